"""Ground-state class and condensate stability over the complex gamma plane.

The default 41 x 41 grid at L = 29 should take on the order of half an hour on one core; pass
--jobs to spread points over worker processes, or coarsen the grid.

    python3 scripts/fig2_phase_diagram.py --out phase.csv --jobs 4
"""
import argparse
import os

from d4nlse import __version__
from d4nlse.dynamics import IntegratorConfig
from d4nlse.io import parse_grid, write_table
from d4nlse.model import ModelParams
from d4nlse.stability import phase_diagram_sweep, threshold_gamma_im


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--grid-re", default="-4:4:41")
    ap.add_argument("--grid-im", default="-4:4:41")
    ap.add_argument("--L", type=int, default=29)
    ap.add_argument("--restarts", type=int, default=8)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--jobs", type=int, default=os.cpu_count() or 1)
    ap.add_argument("--out", default="phase_diagram.csv")
    args = ap.parse_args()

    grid = [complex(r, i) for r in parse_grid(args.grid_re) for i in parse_grid(args.grid_im)]
    cfg = IntegratorConfig(dt=0.1, max_steps=20000, tol=1e-10, renormalize=True, rng_seed=args.seed)
    recs = phase_diagram_sweep(grid, args.L, cfg, args.restarts, jobs=args.jobs)
    config = {k: v for k, v in vars(args).items() if k not in ("jobs", "out")}
    meta = {"version": __version__, "seed": args.seed, "config": config,
            "threshold_gamma_im": threshold_gamma_im(ModelParams(), args.L)}
    write_table([r.row() for r in recs], "csv", args.out, meta)
    solitons = sum(r.ground_class is not None and r.ground_class.kind.value == "soliton" for r in recs)
    failed = sum(bool(r.error) for r in recs)
    print(f"{len(recs)} points: {solitons} soliton ground states, {failed} failures -> {args.out}")


if __name__ == "__main__":
    main()
