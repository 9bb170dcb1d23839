"""Real- and imaginary-time propagation with a fixed-step RK4 scheme."""
from __future__ import annotations

import logging
from dataclasses import dataclass, replace

import numpy as np

from .errors import ConvergenceError, IntegratorDivergedError, PreconditionError
from .model import (
    Boundary,
    LatticeState,
    ModelParams,
    energy_array,
    require_normalized,
    rhs_array,
)

log = logging.getLogger(__name__)

NORM_DRIFT_LIMIT = 1e-6


@dataclass(frozen=True)
class IntegratorConfig:
    dt: float = 0.01
    max_steps: int = 10_000
    tol: float = 1e-10
    renormalize: bool = False
    rng_seed: int = 0
    sample_every: int = 100
    check_every: int = 10

    def __post_init__(self):
        if not self.dt > 0:
            raise PreconditionError("dt must be positive")
        if self.max_steps < 1:
            raise PreconditionError("max_steps must be >= 1")


def check_step(cfg: IntegratorConfig, J: float):
    # explicit-stepping stability guard
    if cfg.dt * J > 0.1 + 1e-15:
        raise PreconditionError(f"dt*J = {cfg.dt * J:g} exceeds 0.1")


@dataclass(frozen=True)
class StationaryState:
    state: LatticeState
    mu: float
    energy: float
    residual: float
    converged: bool = True
    steps: int = 0

    @property
    def L(self) -> int:
        return self.state.L


@dataclass
class Trajectory:
    times: np.ndarray
    states: list
    norm: np.ndarray
    energy: np.ndarray
    mu: np.ndarray

    @property
    def final(self) -> LatticeState:
        return self.states[-1]

    @property
    def norm_drift(self) -> float:
        return float(np.max(np.abs(self.norm - self.norm[0])))

    @property
    def energy_drift(self) -> float:
        return float(np.max(np.abs(self.energy - self.energy[0])))


def rk4_step(f, psi, dt):
    k1 = f(psi)
    k2 = f(psi + 0.5 * dt * k1)
    k3 = f(psi + 0.5 * dt * k2)
    k4 = f(psi + dt * k3)
    return psi + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)


def _observables(psi, J, gamma, periodic):
    norm2 = float(np.vdot(psi, psi).real)
    f = rhs_array(psi, J, gamma, periodic)
    return np.sqrt(norm2), energy_array(psi, J, gamma, periodic), float(np.vdot(psi, f).real) / norm2


def propagate(psi, params: ModelParams, periodic: bool, dt: float, n_steps: int,
              frame: float | None = None, on_sample=None, sample_every: int = 0):
    """Integrate ``i dPsi/dt = F(Psi)`` for ``n_steps`` steps of size ``dt``.

    The integration runs in a frame rotating at ``frame`` (defaults to the
    initial chemical potential).  ``F`` is covariant under global phase
    rotations, so the frame only removes the fast overall phase and the
    returned amplitudes are those of the lab frame.
    """
    J, g = params.J, params.gamma
    psi = np.array(psi, dtype=complex)
    if frame is None:
        frame = float(np.vdot(psi, rhs_array(psi, J, g, periodic)).real / np.vdot(psi, psi).real)

    def f(p):
        return -1j * (rhs_array(p, J, g, periodic) - frame * p)

    norm0 = np.linalg.norm(psi)
    # a blow-up surfaces as a norm-drift error at the next sample, not as numpy warnings
    with np.errstate(over="ignore", invalid="ignore"):
        for step in range(1, n_steps + 1):
            psi = rk4_step(f, psi, dt)
            if on_sample is not None and sample_every and (step % sample_every == 0 or step == n_steps):
                drift = abs(np.linalg.norm(psi) - norm0)
                if drift > NORM_DRIFT_LIMIT or not np.isfinite(drift):
                    raise IntegratorDivergedError(
                        f"norm drift {drift:.3e} at step {step}", step=step)
                on_sample(step, psi * np.exp(-1j * frame * step * dt))
    return psi * np.exp(-1j * frame * n_steps * dt)


def evolve_real(state: LatticeState, params: ModelParams, cfg: IntegratorConfig,
                n_steps: int | None = None) -> Trajectory:
    """Real-time evolution for ``n_steps`` (default ``cfg.max_steps``) RK4 steps."""
    require_normalized(state)
    if cfg.renormalize:
        raise PreconditionError("real-time evolution requires renormalize=False")
    check_step(cfg, params.J)
    n_steps = cfg.max_steps if n_steps is None else n_steps
    periodic = state.periodic
    times, states, obs = [0.0], [state], [_observables(state.amplitudes, params.J, params.gamma, periodic)]

    def sample(step, psi):
        times.append(step * cfg.dt)
        states.append(state.with_amplitudes(psi))
        obs.append(_observables(psi, params.J, params.gamma, periodic))

    every = max(1, min(cfg.sample_every, n_steps))
    propagate(state.amplitudes, params, periodic, cfg.dt, n_steps, on_sample=sample, sample_every=every)
    obs = np.array(obs)
    return Trajectory(np.array(times), states, obs[:, 0], obs[:, 1], obs[:, 2])


def canonicalize(state: LatticeState) -> LatticeState:
    """Shift the density maximum to site ``ceil(L/2)`` (1-based) and make it real positive.

    Only periodic states are shifted; open chains keep their positions.
    """
    psi = np.array(state.amplitudes)
    if state.periodic:
        target = (state.L + 1) // 2 - 1
        psi = np.roll(psi, target - int(np.argmax(np.abs(psi))))
    peak = psi[np.argmax(np.abs(psi))]
    if abs(peak) > 0:
        psi = psi * (abs(peak) / peak)
    return state.with_amplitudes(psi)


def _imaginary_flow(state: LatticeState, params: ModelParams, cfg: IntegratorConfig,
                    sign: float, energies: list | None = None) -> StationaryState:
    """Normalized gradient flow ``dPsi/dtau = -sign * (F - mu Psi)``.

    ``sign = +1`` descends in energy, ``sign = -1`` ascends.  ``mu`` is the
    chemical potential at the start of each step; after renormalization
    the shift only changes the overall scale, so the fixed points are the
    stationary states of the real-time dynamics.
    """
    J, g, periodic = params.J, params.gamma, state.periodic
    psi = state.amplitudes / state.norm
    residual = np.inf
    step = 0
    for step in range(1, cfg.max_steps + 1):
        mu = float(np.vdot(psi, rhs_array(psi, J, g, periodic)).real)

        def f(p):
            return -sign * (rhs_array(p, J, g, periodic) - mu * p)

        psi = rk4_step(f, psi, cfg.dt)
        psi = psi / np.linalg.norm(psi)
        if energies is not None:
            energies.append(energy_array(psi, J, g, periodic))
        if step % cfg.check_every == 0 or step == cfg.max_steps:
            fpsi = rhs_array(psi, J, g, periodic)
            mu = float(np.vdot(psi, fpsi).real)
            residual = float(np.linalg.norm(fpsi - mu * psi))
            if not np.isfinite(residual):
                raise IntegratorDivergedError(f"non-finite state at step {step}", step=step)
            if residual < cfg.tol:
                break
    out = canonicalize(state.with_amplitudes(psi))
    psi = out.amplitudes
    fpsi = rhs_array(psi, J, g, periodic)
    mu = float(np.vdot(psi, fpsi).real)
    residual = float(np.linalg.norm(fpsi - mu * psi))
    return StationaryState(out, mu, energy_array(psi, J, g, periodic), residual,
                           converged=residual < cfg.tol, steps=step)


def evolve_imaginary(state: LatticeState, params: ModelParams, cfg: IntegratorConfig,
                     energies: list | None = None) -> StationaryState:
    """Imaginary-time relaxation towards the lowest reachable stationary state.

    Non-converged runs are returned with ``converged=False``.  Passing a
    list as ``energies`` records the energy after every step.
    """
    if not cfg.renormalize:
        raise PreconditionError("imaginary-time evolution requires renormalize=True")
    check_step(cfg, params.J)
    return _imaginary_flow(state, params, cfg, +1.0, energies)


LOCALIZED_SEEDS = 2
LOCALIZED_WIDTH = 0.7


def localized_state(L: int, rng: np.random.Generator, boundary=Boundary.PERIODIC) -> LatticeState:
    """Random complex amplitudes under an ``exp(-|j - c| / 0.7)`` envelope centred mid-chain."""
    j = np.arange(L)
    env = np.exp(-np.abs(j - (L - 1) // 2) / LOCALIZED_WIDTH)
    psi = env * (rng.standard_normal(L) + 1j * rng.standard_normal(L))
    return LatticeState(psi / np.linalg.norm(psi), boundary)


def initial_states(L: int, cfg: IntegratorConfig, restarts: int, boundary=Boundary.PERIODIC,
                   localized: int = 0):
    """Deterministic initial states.

    Restart ``i`` draws a fully random state from seed ``(rng_seed, i)``;
    the ``localized`` extra states draw from ``(rng_seed, restarts + i)``.
    Random states almost always relax to the extended condensate, so the
    localized ones are what samples the soliton basin near a transition.
    """
    out = [LatticeState.random(L, np.random.default_rng([cfg.rng_seed, i]), boundary)
           for i in range(restarts)]
    out += [localized_state(L, np.random.default_rng([cfg.rng_seed, restarts + i]), boundary)
            for i in range(localized)]
    return out


def relax_restarts(params: ModelParams, L: int, cfg: IntegratorConfig, restarts: int,
                   sign: float = 1.0, boundary=Boundary.PERIODIC,
                   localized: int = LOCALIZED_SEEDS) -> list:
    """All imaginary-time results (converged or not), one per initial state."""
    if restarts < 1:
        raise PreconditionError("restarts must be >= 1")
    cfg = replace(cfg, renormalize=True)
    check_step(cfg, params.J)
    return [_imaginary_flow(s, params, cfg, sign)
            for s in initial_states(L, cfg, restarts, boundary, localized)]


def _pick(results, highest: bool):
    ok = [r for r in results if r.converged]
    if not ok:
        best = min(r.residual for r in results)
        raise ConvergenceError(
            f"none of {len(results)} restarts converged (best residual {best:.3e})", results)
    return max(ok, key=lambda r: r.energy) if highest else min(ok, key=lambda r: r.energy)


def find_ground_state(params: ModelParams, L: int, cfg: IntegratorConfig, restarts: int = 8,
                      boundary=Boundary.PERIODIC) -> StationaryState:
    """Lowest-energy converged state over ``restarts`` random and two localized starts."""
    return _pick(relax_restarts(params, L, cfg, restarts, +1.0, boundary), highest=False)


def find_highest_state(params: ModelParams, L: int, cfg: IntegratorConfig, restarts: int = 8,
                       boundary=Boundary.PERIODIC) -> StationaryState:
    """Highest-energy converged state, by energy ascent with renormalization."""
    return _pick(relax_restarts(params, L, cfg, restarts, -1.0, boundary), highest=True)
