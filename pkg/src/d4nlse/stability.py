"""Linear (Bogoliubov) stability of plane-wave condensates and the gamma-plane sweep.

Density convention: the lattice field is normalized to one, so the
condensate density entering the arbitrary-k formula is ``n_k = N_k / L``
with ``N_k`` the weight in mode ``k`` (one for a pure plane wave).  With
this bridge the arbitrary-k spectrum at ``k = 0`` is identical to the
zero-momentum result.
"""
from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .dynamics import IntegratorConfig, StationaryState, propagate, relax_restarts
from .errors import ConvergenceError, D4Error, PreconditionError
from .model import LatticeState, ModelParams, momentum_grid, rhs_jacobian
from .stationary import (
    StateClass,
    StateKind,
    classify,
    soliton_seed,
    solve_self_consistent,
)

log = logging.getLogger(__name__)

STABILITY_TOL = 1e-12


@dataclass(frozen=True)
class BogoliubovResult:
    k: float
    p: float
    eps_squared: float
    n_k: float = 1.0

    @property
    def stable(self) -> bool:
        return self.eps_squared >= -STABILITY_TOL

    @property
    def eps(self) -> complex:
        """Positive branch; imaginary when unstable."""
        return complex(np.sqrt(complex(self.eps_squared)))


def condensate_density(L: int, weight: float = 1.0) -> float:
    """Bridge from a unit-norm lattice field to the mode density ``n_k``."""
    return weight / L


def dispersion_k0(p: float, params: ModelParams, L: int) -> BogoliubovResult:
    """Zero-momentum condensate: ``eps^2 = [2J(1 - cos p)]^2 (1 - 4 gamma_I^2 / (J L)^2)``."""
    J, gi = params.J, params.gamma.imag
    eps2 = (2 * J * (1 - np.cos(p))) ** 2 * (1 - 4 * gi ** 2 / (J ** 2 * L ** 2))
    return BogoliubovResult(0.0, float(p), float(eps2), condensate_density(L))


def dispersion_arbitrary_k(k: float, p: float, n_k: float, params: ModelParams) -> BogoliubovResult:
    """Condensate at momentum ``k``:
    ``eps^2 = 4J^2 (cos p - cos k)^2 - 16 n_k^2 gamma_k^2 (cos p - 1)^2``
    with ``gamma_k = gamma_R sin k - gamma_I cos k``.
    """
    J = params.J
    gk = gamma_k(k, params)
    eps2 = 4 * J ** 2 * (np.cos(p) - np.cos(k)) ** 2 - 16 * n_k ** 2 * gk ** 2 * (np.cos(p) - 1) ** 2
    return BogoliubovResult(float(k), float(p), float(eps2), float(n_k))


def gamma_k(k: float, params: ModelParams) -> float:
    return float(params.gamma.real * np.sin(k) - params.gamma.imag * np.cos(k))


def stable_momentum(params: ModelParams) -> float:
    """Condensate momentum with ``tan k = gamma_I / gamma_R`` (``gamma_k = 0``)."""
    return float(np.arctan2(params.gamma.imag, params.gamma.real))


def condensate_state(L: int, k: float) -> LatticeState:
    """Plane wave ``exp(+i j k) / sqrt(L)``, the condensate that the arbitrary-k formulas describe.

    The momentum-space formulas follow the ``exp(+i j k)`` convention, so
    their ``k`` is ``-k`` in the sense of ``LatticeState.plane_wave``.
    """
    return LatticeState.plane_wave(L, -k)


def arbitrary_k_unstable(k: float, n_k: float, params: ModelParams, L: int) -> bool:
    """Instability verdict over every nonzero grid momentum."""
    ps = momentum_grid(L)[1:]
    return any(not dispersion_arbitrary_k(k, p, n_k, params).stable for p in ps)


def condensate_stable(params: ModelParams, L: int) -> bool:
    return all(dispersion_k0(p, params, L).stable for p in momentum_grid(L)[1:])


def threshold_gamma_im(params: ModelParams, L: int) -> float:
    """``gamma_I = J L / 2``, above which the zero-momentum condensate is unstable."""
    return params.J * L / 2


def perturbation_matrix_k0(p: float, params: ModelParams, L: int) -> np.ndarray:
    """Linear evolution of ``(dPsi_p, dPsi*_-p)`` around the ``k = 0`` condensate.

    ``i d/dt (dPsi_p, dPsi*_-p) = M (dPsi_p, dPsi*_-p)``; the eigenvalues of
    ``M`` are ``+-eps(p)``.
    """
    J, gi = params.J, params.gamma.imag
    c = np.cos(p) - 1
    a = -2 * J * c
    b = 4j * gi / L * c
    return np.array([[a, b], [b, -a]], dtype=complex)


def symplectic_eigenvalues(M: np.ndarray) -> np.ndarray:
    """Eigenvalues sorted by real part, then imaginary part."""
    w = np.linalg.eigvals(M)
    return w[np.lexsort((w.imag, w.real))]


def bogoliubov_matrix(state: LatticeState, params: ModelParams, mu: float) -> np.ndarray:
    """Real ``2L x 2L`` generator ``G`` of ``d/dt (Re dPsi, Im dPsi) = G (Re dPsi, Im dPsi)``.

    Built from the real/imaginary split of the Jacobian of ``F - mu Psi``.
    """
    psi = state.amplitudes
    L = psi.size
    A, B = rhs_jacobian(psi, params.J, params.gamma, state.periodic)
    P = A - mu * np.eye(L) + B
    Q = A - mu * np.eye(L) - B
    jac = np.block([[P.real, -Q.imag], [P.imag, Q.real]])
    # d(dPsi)/dt = -i * (jac applied): (x + i y) -> (y, -x)
    rot = np.block([[np.zeros((L, L)), np.eye(L)], [-np.eye(L), np.zeros((L, L))]])
    return rot @ jac


def split_jacobian(state: LatticeState, params: ModelParams, mu: float) -> np.ndarray:
    """Real Jacobian of ``F - mu Psi`` in the variables ``(Re Psi, Im Psi)``."""
    psi = state.amplitudes
    L = psi.size
    A, B = rhs_jacobian(psi, params.J, params.gamma, state.periodic)
    P = A - mu * np.eye(L) + B
    Q = A - mu * np.eye(L) - B
    return np.block([[P.real, -Q.imag], [P.imag, Q.real]])


@dataclass(frozen=True)
class LinearSpectrum:
    frequencies: np.ndarray    # omega with dPsi ~ exp(-i omega t); real when stable
    max_growth: float          # largest |Im omega|
    unstable: bool


def numeric_linearization(stat: StationaryState, params: ModelParams, tol: float = 1e-8,
                          residual_limit: float = 1e-8) -> LinearSpectrum:
    """Spectrum of the linearized dynamics around a stationary state.

    Instability is declared when some frequency has an imaginary part above
    ``tol`` times the spectral scale (at least one).
    """
    if not stat.residual < residual_limit:
        raise PreconditionError(f"state residual {stat.residual:.3e} exceeds {residual_limit:g}")
    G = bogoliubov_matrix(stat.state, params, stat.mu)
    omega = 1j * np.linalg.eigvals(G)
    omega = omega[np.lexsort((omega.imag, omega.real))]
    growth = float(np.max(np.abs(omega.imag)))
    scale = max(1.0, float(np.max(np.abs(omega))))
    return LinearSpectrum(omega, growth, growth > tol * scale)


def analytic_k0_spectrum(params: ModelParams, L: int) -> np.ndarray:
    """Frequencies predicted for the ``k = 0`` condensate: ``+-eps(p)`` for all grid ``p``.

    ``p = 0`` contributes the two zero modes (phase and norm).
    """
    out = []
    for p in momentum_grid(L):
        e = dispersion_k0(p, params, L).eps
        out += [e, -e]
    out = np.array(out)
    return out[np.lexsort((out.imag, out.real))]


@dataclass(frozen=True)
class GrowthFit:
    rate: float
    predicted: float
    times: np.ndarray
    deviation: np.ndarray     # max_j |n_j - 1/L| per sample

    @property
    def relative_error(self) -> float:
        return abs(self.rate - self.predicted) / self.predicted


def growth_rate(params: ModelParams, L: int, p: float = np.pi, amplitude: float = 1e-6,
                dt: float = 0.01, t_max: float = 40.0, dev_max: float = 1e-2) -> GrowthFit:
    """Measured exponential growth of a seeded ``p`` mode on the ``k = 0`` condensate.

    The condensate gets ``amplitude * exp(i p j) / sqrt(L)`` added, is
    renormalized and evolved in real time.  The density deviation from
    ``1/L`` is recorded until it reaches ``dev_max``; the rate is the slope
    of its logarithm over the second half of that window, after the
    decaying partner mode has died out.
    """
    j = np.arange(L)
    psi = (1 + amplitude * np.exp(1j * p * j)) / np.sqrt(L)
    psi /= np.linalg.norm(psi)
    times, devs = [0.0], [float(np.max(np.abs(np.abs(psi) ** 2 - 1 / L)))]

    class _Done(Exception):
        pass

    def sample(step, x):
        d = float(np.max(np.abs(np.abs(x) ** 2 - 1 / L)))
        if d > dev_max:
            raise _Done
        times.append(step * dt)
        devs.append(d)

    try:
        propagate(psi, params, True, dt, int(round(t_max / dt)), on_sample=sample, sample_every=10)
    except _Done:
        pass
    times, devs = np.array(times), np.array(devs)
    half = times.size // 2
    rate = float(np.polyfit(times[half:], np.log(devs[half:]), 1)[0]) if times.size >= 4 else float("nan")
    predicted = float(abs(dispersion_k0(p, params, L).eps.imag))
    return GrowthFit(rate, predicted, times, devs)


# phase diagram


@dataclass
class SweepRecord:
    gamma: complex
    ground_class: StateClass | None
    E_ground: float
    condensate_stable: bool
    soliton_exists: bool
    E_plane_wave: float = float("nan")
    E_soliton: float = float("nan")
    error: str = ""

    def row(self) -> dict:
        c = self.ground_class
        return {
            "gamma_re": self.gamma.real,
            "gamma_im": self.gamma.imag,
            "ground_class": c.kind.value if c else "",
            "three_site_weight": c.three_site_weight if c else float("nan"),
            "participation_ratio": c.participation_ratio if c else float("nan"),
            "E_ground": self.E_ground,
            "E_plane_wave": self.E_plane_wave,
            "E_soliton": self.E_soliton,
            "condensate_stable": self.condensate_stable,
            "soliton_exists": self.soliton_exists,
            "error": self.error,
        }


def _best(results, kind):
    es = [r.energy for r in results if r.converged and classify(r.state).kind is kind]
    return min(es) if es else float("nan")


def sweep_point(gamma: complex, L: int, cfg: IntegratorConfig, restarts: int = 8, J: float = 1.0) -> SweepRecord:
    """One phase-diagram point; numeric failures are stored in ``error``."""
    params = ModelParams(J, gamma)
    stable = condensate_stable(params, L)
    rec = SweepRecord(complex(gamma), None, float("nan"), stable, False)
    try:
        results = relax_restarts(params, L, cfg, restarts)
        sol = None
        if gamma != 0:
            sol, _ = solve_self_consistent(params, L, soliton_seed(params, L))
            if sol.converged and classify(sol.state).kind is StateKind.SOLITON:
                rec.soliton_exists = True
                results = results + [sol]
        ok = [r for r in results if r.converged]
        if not ok:
            raise ConvergenceError("no converged candidate", results)
        best = min(ok, key=lambda r: r.energy)
        rec.ground_class = classify(best.state)
        rec.E_ground = best.energy
        rec.E_plane_wave = _best(ok, StateKind.PLANE_WAVE)
        rec.E_soliton = _best(ok, StateKind.SOLITON)
    except D4Error as exc:
        rec.error = f"{exc.category}: {exc}"
    return rec


def _sweep_point_args(args):
    return sweep_point(*args)


def phase_diagram_sweep(grid, L: int, cfg: IntegratorConfig, restarts: int = 8, J: float = 1.0,
                        jobs: int = 1) -> list[SweepRecord]:
    """Sweep complex couplings; records come back in grid order."""
    grid = [complex(g) for g in grid]
    if not all(np.isfinite(g.real) and np.isfinite(g.imag) for g in grid):
        raise PreconditionError("grid must be finite")
    args = [(g, L, cfg, restarts, J) for g in grid]
    if jobs <= 1:
        return [sweep_point(*a) for a in args]
    with ProcessPoolExecutor(max_workers=jobs) as ex:
        return list(ex.map(_sweep_point_args, args))
