"""Command-line front end.

Every subcommand writes one table (CSV or JSON) whose metadata block echoes
the effective configuration.  Exit status: 0 on success, 2 on usage
errors, 1 on numerical failure with ``error: <category>: <message>`` on
stderr.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import warnings
from dataclasses import fields, replace

import numpy as np

from . import __version__
from .continuum import GaussianAnsatz, a_star, continuum_dispersion, gaussian_energy, optimal_b, reduced_energy
from .dynamics import IntegratorConfig, evolve_real, find_ground_state, find_highest_state
from .edge_modes import build_zero_mode, gamma_plane_scan
from .errors import D4Error, PreconditionError
from .floquet import CoefficientVariant, FloquetParams, arbitrate_variants, drive_strength_for, floquet_ladder
from .io import RunConfig, parse_grid, write_table
from .model import LatticeState, ModelParams, momentum_grid
from .stability import (
    condensate_stable,
    dispersion_arbitrary_k,
    dispersion_k0,
    phase_diagram_sweep,
    threshold_gamma_im,
)
from .stationary import classify, soliton_branch_trace, soliton_seed, solve_self_consistent

log = logging.getLogger("d4nlse")

SEED_ENV = "D4NLSE_SEED"
COMMANDS = ("ground", "highest", "branch", "stability", "phase-diagram", "zeromode",
            "zeromode-scan", "floquet", "continuum", "evolve")
# flags that never change results
_NOT_ECHOED = {"out", "format", "config", "verbose", "command", "jobs"}


class UsageError(Exception):
    pass


def _common(p: argparse.ArgumentParser):
    p.add_argument("--J", type=float, default=1.0)
    p.add_argument("--gamma-re", type=float, default=0.0)
    p.add_argument("--gamma-im", type=float, default=0.0)
    p.add_argument("--gamma-phase", type=float, default=None, help="phase of gamma in degrees")
    p.add_argument("--L", type=int, default=29)
    p.add_argument("--dt", type=float, default=0.1)
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--max-steps", type=int, default=20000)
    p.add_argument("--seed", type=int, default=None, help=f"default: ${SEED_ENV} or 0")
    p.add_argument("--restarts", type=int, default=8)
    p.add_argument("--jobs", type=int, default=None, help="worker processes (default: all cores)")
    p.add_argument("--out", default="-", help="output path, '-' for stdout")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--config", default=None, help="JSON file with flag values (keys as in --help, '_' for '-')")
    p.add_argument("--verbose", "-v", action="store_true")


def build_parser():
    parser = argparse.ArgumentParser(prog="d4nlse", description="Density-difference lattice NLSE toolkit")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    subs = {}
    for name in COMMANDS:
        p = sub.add_parser(name)
        _common(p)
        subs[name] = p
    subs["branch"].add_argument("--grid", default="1.5:6:200", help="|gamma| range a:b:n")
    subs["branch"].add_argument("--highest", action="store_true", help="trace the high-energy partner")
    subs["stability"].add_argument("--k", type=float, default=0.0, help="condensate momentum")
    for name in ("phase-diagram", "zeromode-scan"):
        subs[name].add_argument("--grid-re", default=None, help="a:b:n")
        subs[name].add_argument("--grid-im", default=None, help="a:b:n")
    subs["floquet"].add_argument("--J1", type=float, default=8.46)
    subs["floquet"].add_argument("--omegas", default="25,50,100,200")
    subs["floquet"].add_argument("--time", type=float, default=5.0)
    subs["floquet"].add_argument("--substeps", type=int, default=600)
    subs["floquet"].add_argument("--variant", choices=[v.value for v in CoefficientVariant],
                                 default=CoefficientVariant.LITERAL.value)
    subs["floquet"].add_argument("--arbitrate", action="store_true",
                                 help="compare all coefficient variants at one omega (first of --omegas)")
    subs["continuum"].add_argument("--alpha", type=float, default=1.0, help="lattice spacing")
    subs["evolve"].add_argument("--init", choices=("plane-wave", "random", "soliton"), default="random")
    subs["evolve"].add_argument("--steps", type=int, default=10000)
    subs["evolve"].add_argument("--sample-every", type=int, default=100)
    return parser, subs


_GRID_FLAGS = ("--grid", "--grid-re", "--grid-im")


def _glue_grid_values(argv):
    """``--grid-re -3:3:41`` -> ``--grid-re=-3:3:41``; argparse would read the value as a flag."""
    out, i = [], 0
    while i < len(argv):
        if argv[i] in _GRID_FLAGS and i + 1 < len(argv) and argv[i + 1].startswith("-"):
            out.append(f"{argv[i]}={argv[i + 1]}")
            i += 2
        else:
            out.append(argv[i])
            i += 1
    return out


def parse_args(argv):
    parser, subs = build_parser()
    argv = _glue_grid_values(list(argv))
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config", default=None)
    known, _ = pre.parse_known_args(argv)
    if known.config:
        cmd = next((a for a in argv if a in subs), None)
        if cmd is None:
            parser.parse_args(argv)      # reports the missing subcommand
        try:
            with open(known.config) as fh:
                data = json.load(fh)
        except (OSError, ValueError) as exc:
            parser.error(f"cannot read config {known.config}: {exc}")
        dests = {a.dest for a in subs[cmd]._actions}
        bad = sorted(k for k in data if k.replace("-", "_") not in dests)
        if bad:
            parser.error(f"unknown config keys: {bad}")
        subs[cmd].set_defaults(**{k.replace("-", "_"): v for k, v in data.items()})
    args = parser.parse_args(argv)
    if args.seed is None:
        env = os.environ.get(SEED_ENV)
        try:
            args.seed = int(env) if env else 0
        except ValueError:
            parser.error(f"{SEED_ENV} must be an integer, got {env!r}")
    if args.jobs is None:
        args.jobs = os.cpu_count() or 1
    return parser, args


def gamma_of(args) -> complex:
    if args.gamma_phase is not None:
        if args.command != "branch":
            raise UsageError("--gamma-phase is only used by branch")
        if args.gamma_re or args.gamma_im:
            raise UsageError("--gamma-phase excludes --gamma-re/--gamma-im (the modulus comes from --grid)")
        return complex(0.0)
    return complex(args.gamma_re, args.gamma_im)


def grid(spec: str) -> np.ndarray:
    try:
        return parse_grid(spec)
    except PreconditionError as exc:
        raise UsageError(str(exc)) from None


def run_config(args) -> RunConfig:
    """Effective configuration; command-specific flags land in ``extra``."""
    d = {k: v for k, v in vars(args).items() if k not in _NOT_ECHOED}
    names = {f.name for f in fields(RunConfig)}
    base = {k: v for k, v in d.items() if k in names}
    extra = {k: v for k, v in d.items() if k not in names}
    return RunConfig(command=args.command, extra=extra, **base)


def integrator(args) -> IntegratorConfig:
    if args.dt * args.J > 0.1 + 1e-15:
        raise UsageError("--dt times --J must not exceed 0.1")
    return IntegratorConfig(dt=args.dt, max_steps=args.max_steps, tol=args.tol, renormalize=True,
                            rng_seed=args.seed)


def _state_row(args, params, st):
    c = classify(st.state)
    return {"gamma_re": params.gamma.real, "gamma_im": params.gamma.imag, "L": st.L,
            "energy": st.energy, "mu": st.mu, "residual": st.residual, "converged": st.converged,
            "steps": st.steps, "class": c.kind.value, "three_site_weight": c.three_site_weight,
            "participation_ratio": c.participation_ratio}


def cmd_ground(args, meta):
    if args.restarts < 1:
        raise UsageError("--restarts must be >= 1")
    params = ModelParams(args.J, gamma_of(args))
    finder = find_highest_state if args.command == "highest" else find_ground_state
    st = finder(params, args.L, integrator(args), args.restarts)
    meta["profile"] = [[float(v.real), float(v.imag)] for v in st.state.amplitudes]
    return [_state_row(args, params, st)]


def cmd_branch(args, meta):
    if args.gamma_phase is None:
        raise UsageError("branch needs --gamma-phase")
    gamma_of(args)
    g = grid(args.grid)
    trace = soliton_branch_trace(np.deg2rad(args.gamma_phase), args.L, (float(g[0]), float(g[-1])),
                                 steps=len(g), J=args.J, highest=args.highest)
    meta["termination"] = trace.termination
    return [{"gamma_abs": p.gamma_abs, "gamma_re": p.gamma_abs * np.cos(np.deg2rad(args.gamma_phase)),
             "gamma_im": p.gamma_abs * np.sin(np.deg2rad(args.gamma_phase)), "energy": p.energy,
             "mu": p.mu, "class": p.kind.value, "three_site_weight": p.three_site_weight,
             "residual": p.residual, "valid": p.converged} for p in trace.points]


def cmd_stability(args, meta):
    params = ModelParams(args.J, gamma_of(args))
    meta["threshold_gamma_im"] = threshold_gamma_im(params, args.L)
    meta["condensate_stable"] = condensate_stable(params, args.L)
    rows = []
    for p in momentum_grid(args.L):
        if args.k == 0:
            r = dispersion_k0(p, params, args.L)
        else:
            r = dispersion_arbitrary_k(args.k, p, 1.0 / args.L, params)
        rows.append({"k": r.k, "p": r.p, "eps_squared": r.eps_squared, "stable": r.stable})
    return rows


def _plane(args):
    if not (args.grid_re and args.grid_im):
        raise UsageError("--grid-re and --grid-im are both required")
    return [complex(r, i) for r in grid(args.grid_re) for i in grid(args.grid_im)]


def cmd_phase_diagram(args, meta):
    recs = phase_diagram_sweep(_plane(args), args.L, integrator(args), args.restarts, args.J, args.jobs)
    return [r.row() for r in recs]


def cmd_zeromode(args, meta):
    prof = build_zero_mode(ModelParams(args.J, gamma_of(args)), args.L)
    meta["profile"] = [[float(v.real), float(v.imag)] for v in prof.state.amplitudes]
    return [{"gamma_re": args.gamma_re, "gamma_im": args.gamma_im, "L": args.L,
             "localization_ratio": prof.localization_ratio, "residual": prof.residual,
             "seed": prof.seed, "from_right": prof.from_right}]


def cmd_zeromode_scan(args, meta):
    return [p.row() for p in gamma_plane_scan(_plane(args), args.L, args.J, args.jobs)]


def _floquet_state(args):
    j = np.arange(args.L)
    c = (args.L - 1) / 2
    return LatticeState(np.exp(-(j - c) ** 2 / 4) * np.exp(0.4j * j)).normalize()


def cmd_floquet(args, meta):
    g = gamma_of(args)
    if g == 0:
        raise UsageError("floquet needs a nonzero target gamma (--gamma-re/--gamma-im)")
    try:
        omegas = [float(w) for w in args.omegas.split(",")]
    except ValueError:
        raise UsageError("--omegas must be a comma-separated list of numbers") from None
    state = _floquet_state(args)
    variant = CoefficientVariant(args.variant)
    if args.arbitrate:
        w = omegas[0]
        fp = FloquetParams(args.J, args.J1, drive_strength_for(g, args.J1, w, variant), w)
        best, reps = arbitrate_variants(state, fp, int(np.ceil(args.time / fp.T)), args.substeps)
        meta["best_variant"] = best.value
        return [r.row() for r in reps.values()]
    res = floquet_ladder(state, g, args.J1, omegas, args.time, args.substeps, variant, args.J, args.jobs)
    meta["doubling_ratios"] = [float(x) for x in res.doubling_ratios]
    return [r.row() for r in res.reports]


def cmd_continuum(args, meta):
    g = GaussianAnsatz(1.0, 0.0, args.alpha, args.gamma_im)
    astar = a_star(g, args.J)
    meta["a_star"] = astar
    base = astar if np.isfinite(astar) else 1.0
    rows = []
    for f in (0.25, 0.5, 1, 2, 4, 8, 16):
        a = base * f
        b = optimal_b(a, g, args.J)
        rows.append({"a": a, "b": b, "energy": gaussian_energy(replace(g, a=a, b=b), args.J),
                     "reduced_energy": reduced_energy(a, g, args.J)})
    meta["dispersion"] = [[float(p), continuum_dispersion(p, args.J, args.gamma_im, args.alpha, args.L)]
                          for p in momentum_grid(args.L)[1:4]]
    return rows


def cmd_evolve(args, meta):
    params = ModelParams(args.J, gamma_of(args))
    if args.init == "plane-wave":
        state = LatticeState.plane_wave(args.L)
    elif args.init == "random":
        state = LatticeState.random(args.L, np.random.default_rng(args.seed))
    else:
        state = solve_self_consistent(params, args.L, soliton_seed(params, args.L))[0].state
    cfg = IntegratorConfig(dt=args.dt, max_steps=args.steps, sample_every=args.sample_every)
    if args.dt * args.J > 0.1 + 1e-15:
        raise UsageError("--dt times --J must not exceed 0.1")
    tr = evolve_real(state, params, cfg)
    meta["norm_drift"] = tr.norm_drift
    meta["energy_drift"] = tr.energy_drift
    return [{"t": t, "norm": n, "energy": e, "mu": m}
            for t, n, e, m in zip(tr.times, tr.norm, tr.energy, tr.mu)]


HANDLERS = {"ground": cmd_ground, "highest": cmd_ground, "branch": cmd_branch, "stability": cmd_stability,
            "phase-diagram": cmd_phase_diagram, "zeromode": cmd_zeromode, "zeromode-scan": cmd_zeromode_scan,
            "floquet": cmd_floquet, "continuum": cmd_continuum, "evolve": cmd_evolve}


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser, args = parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if not args.verbose:
        warnings.simplefilter("ignore", RuntimeWarning)
    meta = {"version": __version__, "seed": args.seed,
            "config": json.loads(run_config(args).to_json())}
    try:
        rows = HANDLERS[args.command](args, meta)
        text = write_table(rows, args.format, args.out, meta)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"{parser.prog}: error: {exc}", file=sys.stderr)
        return 2
    except D4Error as exc:
        print(f"error: {exc.category}: {exc}", file=sys.stderr)
        return 1
    if args.out == "-":
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
