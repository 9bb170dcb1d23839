"""Stationary states: chiral map, self-consistent solver, three-site ansatz,
classification, and the critical couplings of the condensate/soliton transition."""
from __future__ import annotations

import enum
import itertools
import logging
from dataclasses import dataclass, replace

import numpy as np
from scipy.optimize import brentq, minimize

from .dynamics import (
    IntegratorConfig,
    StationaryState,
    canonicalize,
    find_ground_state,
)
from .errors import BracketError, PreconditionError
from .model import (
    Boundary,
    LatticeState,
    ModelParams,
    energy_array,
    nonlinear_operator,
    require_normalized,
    rhs_array,
    rhs_jacobian,
)

log = logging.getLogger(__name__)


def chiral_transform(state: LatticeState) -> LatticeState:
    """Multiply site ``j`` by ``(-1)**j``.

    Maps a stationary state with ``(mu, E)`` to one with ``(-mu, -E)``.  On a
    periodic chain of odd length the sign pattern breaks across the seam and
    the image is only approximately stationary (see ``chiral_seam_mismatch``).
    """
    signs = np.where(np.arange(state.L) % 2 == 0, 1.0, -1.0)
    return state.with_amplitudes(state.amplitudes * signs)


def chiral_exact(state: LatticeState) -> bool:
    return not state.periodic or state.L % 2 == 0


def chiral_seam_mismatch(state: LatticeState) -> float:
    """Weight on the two seam sites of an odd periodic chain; zero when the map is exact."""
    if chiral_exact(state):
        return 0.0
    d = state.density
    return float(d[0] + d[-1])


def describe(state: LatticeState, params: ModelParams, converged: bool = True, steps: int = 0) -> StationaryState:
    psi = state.amplitudes
    f = rhs_array(psi, params.J, params.gamma, state.periodic)
    mu = float(np.vdot(psi, f).real)
    return StationaryState(state, mu, energy_array(psi, params.J, params.gamma, state.periodic),
                           float(np.linalg.norm(f - mu * psi)), converged, steps)


# self-consistent diagonalization


@dataclass(frozen=True)
class SCFDiagnostics:
    iterations: int
    damping: float
    mu_history: tuple
    oscillating: bool
    newton_steps: int


def newton_polish(state: LatticeState, params: ModelParams, tol: float = 1e-12,
                  max_iter: int = 30) -> tuple[LatticeState, int, bool]:
    """Gauss-Newton on ``F(Psi) = mu Psi``, ``|Psi|^2 = 1`` in real variables.

    The global phase is a zero mode, handled by the least-squares step.
    Returns the polished state, the iteration count and a success flag.
    """
    J, g, periodic = params.J, params.gamma, state.periodic
    psi = state.amplitudes / state.norm
    L = psi.size
    mu = float(np.vdot(psi, rhs_array(psi, J, g, periodic)).real)
    for it in range(max_iter + 1):
        r = rhs_array(psi, J, g, periodic) - mu * psi
        res = np.concatenate([r.real, r.imag, [0.5 * (np.vdot(psi, psi).real - 1.0)]])
        if np.linalg.norm(res) < tol:
            return state.with_amplitudes(psi / np.linalg.norm(psi)), it, True
        if it == max_iter or not np.all(np.isfinite(res)):
            break
        A, B = rhs_jacobian(psi, J, g, periodic)
        P = A - mu * np.eye(L) + B
        Q = A - mu * np.eye(L) - B
        jac = np.zeros((2 * L + 1, 2 * L + 1))
        jac[:L, :L] = P.real
        jac[:L, L:2 * L] = -Q.imag
        jac[L:2 * L, :L] = P.imag
        jac[L:2 * L, L:2 * L] = Q.real
        jac[:L, -1] = -psi.real
        jac[L:2 * L, -1] = -psi.imag
        jac[-1, :L] = psi.real
        jac[-1, L:2 * L] = psi.imag
        step = np.linalg.lstsq(jac, -res, rcond=None)[0]
        psi = psi + step[:L] + 1j * step[L:2 * L]
        mu += step[-1]
    return state.with_amplitudes(psi / np.linalg.norm(psi)), max_iter, False


def solve_self_consistent(params: ModelParams, L: int, init: LatticeState, tol: float = 1e-12,
                          damping: float = 0.5, max_iter: int = 5000, polish: bool = True,
                          residual_tol: float = 1e-10):
    """Damped self-consistent diagonalization of the nonlinear eigenproblem.

    Each iteration builds the Hermitian operator ``M(Psi)`` (hopping with
    frozen densities plus the density-locked diagonal, ``M(Psi) Psi = F(Psi)``),
    diagonalizes it, takes the eigenvector with the largest overlap with the
    current state and mixes it in with weight ``damping``.  Iteration stops
    when successive eigenvalues differ by less than ``tol``.  With ``polish``
    a Newton solve on the full equation finishes the job.

    Returns ``(StationaryState, SCFDiagnostics)``.
    """
    require_normalized(init)
    if init.L != L:
        raise PreconditionError(f"init has {init.L} sites, expected {L}")
    J, g, periodic = params.J, params.gamma, init.periodic
    eta = damping
    psi = np.array(init.amplitudes)
    mus = []
    sign_flips = 0
    oscillating = False
    it = 0
    for it in range(1, max_iter + 1):
        w, V = np.linalg.eigh(nonlinear_operator(psi, J, g, periodic))
        ov = V.conj().T @ psi
        i = int(np.argmax(np.abs(ov)))
        v = V[:, i] * np.exp(1j * np.angle(ov[i]))
        mus.append(float(w[i]))
        psi = (1 - eta) * psi + eta * v
        psi /= np.linalg.norm(psi)
        if len(mus) >= 2 and abs(mus[-1] - mus[-2]) < tol:
            break
        if len(mus) >= 3:
            d1, d2 = mus[-1] - mus[-2], mus[-2] - mus[-3]
            sign_flips = sign_flips + 1 if d1 * d2 < 0 else 0
            if sign_flips > 50:
                if eta < 1 / 64:
                    oscillating = True
                    break
                eta /= 2
                sign_flips = 0
    state = state_in = init.with_amplitudes(psi)
    newton_steps = 0
    ok = True
    if polish:
        state, newton_steps, ok = newton_polish(state_in, params)
        # a Newton jump to a different branch is recognizable by a large move
        if np.linalg.norm(np.abs(state.amplitudes) - np.abs(state_in.amplitudes)) > 0.5:
            ok = False
    res = describe(canonicalize(state), params, steps=it)
    converged = ok and not oscillating and res.residual < residual_tol
    res = replace(res, converged=converged)
    return res, SCFDiagnostics(it, eta, tuple(mus[-60:]), oscillating, newton_steps)


# three-site ansatz


@dataclass(frozen=True)
class ThreeSiteAnsatz:
    """Central weight ``alpha`` and side phases of the three-site soliton ansatz."""

    alpha: float
    phi_plus: float = 0.0
    phi_minus: float = 0.0

    def amplitudes(self) -> np.ndarray:
        side = np.sqrt(max(1.0 - self.alpha, 0.0) / 2)
        return np.array([side * np.exp(1j * self.phi_minus), np.sqrt(self.alpha),
                         side * np.exp(1j * self.phi_plus)])

    def embed(self, L: int, center: int | None = None, boundary=Boundary.PERIODIC) -> LatticeState:
        center = (L + 1) // 2 - 1 if center is None else center
        psi = np.zeros(L, dtype=complex)
        psi[center - 1:center + 2] = self.amplitudes()
        return LatticeState(psi, boundary)


def three_site_energy(ansatz: ThreeSiteAnsatz, params: ModelParams) -> float:
    """Energy of the ansatz: the two bonds touching the central site."""
    a = ansatz.amplitudes()
    n = np.abs(a) ** 2
    b = a[1:].conj() * (-params.J + params.gamma * (n[1:] - n[:-1])) * a[:-1]
    return float(2 * np.sum(b).real)


def _ansatz_from(x) -> ThreeSiteAnsatz:
    wrap = lambda p: float((p + np.pi) % (2 * np.pi) - np.pi) or 0.0
    return ThreeSiteAnsatz(float(x[0]), wrap(x[1]), wrap(x[2]))


@dataclass(frozen=True)
class ThreeSiteResult:
    minimizer: ThreeSiteAnsatz
    e_min: float
    maximizer: ThreeSiteAnsatz
    e_max: float
    stagnated: bool = False


_ALPHA_STARTS = (0.2, 0.5, 0.8, 0.95)
_PHASE_STARTS = (-2.0, 0.0, 2.0)


def three_site_optimize(params: ModelParams, maximize: bool = True) -> ThreeSiteResult:
    """Multi-start bounded descent for the lowest and highest ansatz energies.

    With ``maximize=False`` only the minimum is searched and the maximum is
    filled in from chiral pairing (``E_max = -E_min``, phases shifted by pi).
    """
    if params.gamma == 0:
        raise PreconditionError("three-site optimization requires |gamma| > 0")
    bounds = [(1e-12, 1.0), (-np.pi, np.pi), (-np.pi, np.pi)]

    def best(sign):
        fun = lambda x: sign * three_site_energy(ThreeSiteAnsatz(*x), params)
        top = None
        for a0, p0, m0 in itertools.product(_ALPHA_STARTS, _PHASE_STARTS, _PHASE_STARTS):
            r = minimize(fun, [a0, p0, m0], method="L-BFGS-B", bounds=bounds,
                         options={"ftol": 1e-15, "gtol": 1e-12, "maxiter": 500})
            if top is None or r.fun < top.fun:
                top = r
        # Nelder-Mead polish removes the last bits of L-BFGS-B stopping noise
        r = minimize(lambda x: fun([min(max(x[0], 1e-12), 1.0), x[1], x[2]]), top.x,
                     method="Nelder-Mead", options={"xatol": 1e-12, "fatol": 1e-15, "maxiter": 4000})
        x = r.x if r.fun <= top.fun else top.x
        x = [min(max(x[0], 1e-12), 1.0), x[1], x[2]]
        return _ansatz_from(x), sign * min(r.fun, top.fun), not (top.success or r.success)

    lo, e_lo, s1 = best(+1.0)
    if not maximize:
        hi = _ansatz_from([lo.alpha, lo.phi_plus + np.pi, lo.phi_minus + np.pi])
        return ThreeSiteResult(lo, e_lo, hi, -e_lo, s1)
    hi, e_hi, s2 = best(-1.0)
    return ThreeSiteResult(lo, e_lo, hi, e_hi, s1 or s2)


# classification


class StateKind(str, enum.Enum):
    PLANE_WAVE = "plane-wave"
    SOLITON = "soliton"
    OTHER = "other"


@dataclass(frozen=True)
class ClassifyConfig:
    soliton_weight: float = 0.5
    plane_wave_peak: float = 2.0   # in units of 1/L


@dataclass(frozen=True)
class StateClass:
    kind: StateKind
    three_site_weight: float
    participation_ratio: float


def three_site_weight(state: LatticeState) -> float:
    d = state.density
    if state.periodic:
        w = d + np.roll(d, -1) + np.roll(d, -2)
    else:
        w = d[:-2] + d[1:-1] + d[2:]
    return float(np.max(w))


def classify(state: LatticeState, cfg: ClassifyConfig = ClassifyConfig()) -> StateClass:
    require_normalized(state)
    d = state.density
    w3 = three_site_weight(state)
    pr = float(1.0 / np.sum(d ** 2))
    if w3 > cfg.soliton_weight:
        kind = StateKind.SOLITON
    elif np.max(d) < cfg.plane_wave_peak / state.L:
        kind = StateKind.PLANE_WAVE
    else:
        kind = StateKind.OTHER
    return StateClass(kind, w3, pr)


# critical couplings


def _bisect(pred, lo, hi, xtol):
    p_lo, p_hi = pred(lo), pred(hi)
    if p_lo == p_hi:
        raise BracketError(f"predicate is {p_lo} at both ends of [{lo}, {hi}]")
    while hi - lo > xtol:
        mid = 0.5 * (lo + hi)
        if pred(mid) == p_hi:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def three_site_critical_gamma(phase: float, J: float = 1.0, lo: float = 0.5, hi: float = 4.0) -> float:
    """|gamma| at which the optimal three-site energy crosses ``-2J``."""
    f = lambda m: three_site_optimize(ModelParams.polar(m, phase, J), maximize=False).e_min + 2 * J
    if f(lo) * f(hi) > 0:
        raise BracketError(f"three-site energy does not cross -2J on [{lo}, {hi}]")
    return float(brentq(f, lo, hi, xtol=1e-10))


def critical_gamma(phase: float, L: int, cfg: IntegratorConfig, restarts: int = 8,
                   method: str = "imaginary-time", lo: float = 0.5, hi: float = 4.0,
                   xtol: float = 1e-3, margin: float = 1e-6, J: float = 1.0) -> float:
    """Condensate-to-soliton ground-state transition along ``arg(gamma) = phase``.

    ``method="imaginary-time"`` bisects on ``E_ground < -2J - margin`` using
    ``find_ground_state``; ``method="three-site"`` root-finds the variational
    crossing instead (``L`` and ``cfg`` are unused then).
    """
    if method == "three-site":
        return three_site_critical_gamma(phase, J, lo, hi)
    if method != "imaginary-time":
        raise PreconditionError(f"unknown method {method!r}")

    def pred(m):
        gs = find_ground_state(ModelParams.polar(m, phase, J), L, cfg, restarts)
        log.info("|gamma| = %.5f  E = %.10f", m, gs.energy)
        return gs.energy < -2 * J - margin

    return _bisect(pred, lo, hi, xtol)


# soliton branch continuation


@dataclass(frozen=True)
class BranchPoint:
    gamma_abs: float
    energy: float
    mu: float
    kind: StateKind
    three_site_weight: float
    residual: float
    converged: bool


@dataclass
class BranchTrace:
    phase: float
    L: int
    points: list
    termination: float | None   # last |gamma| that still carries a soliton

    @property
    def valid(self):
        return [p for p in self.points if p.converged and p.kind is StateKind.SOLITON]


def branch_gammas(gamma_range, fine=(1.5, 1.8), coarse_step=0.05, fine_step=0.01, steps: int | None = None):
    """Descending |gamma| values; fine spacing inside ``fine`` unless ``steps`` fixes a uniform grid."""
    g_lo, g_hi = gamma_range
    if steps is not None:
        return list(np.linspace(g_hi, g_lo, steps))
    out = []
    g = g_hi
    while g >= g_lo - 1e-12:
        out.append(round(g, 10))
        g -= fine_step if fine[0] - 1e-12 <= g - fine_step <= fine[1] + 1e-12 else coarse_step
    return out


def soliton_seed(params: ModelParams, L: int, boundary=Boundary.PERIODIC) -> LatticeState:
    """Optimal three-site ansatz embedded in the middle of the chain."""
    return three_site_optimize(params, maximize=False).minimizer.embed(L, boundary=boundary)


def soliton_branch_trace(phase: float, L: int, gamma_range=(1.5, 6.0), steps: int | None = None,
                         J: float = 1.0, cls_cfg: ClassifyConfig = ClassifyConfig(),
                         highest: bool = False) -> BranchTrace:
    """Follow the soliton from the top of ``gamma_range`` downward by continuation.

    The trace stops when the solver fails or the solution stops being a
    soliton; the last good |gamma| is reported as ``termination``.  With
    ``highest`` the chiral partner branch (high-energy soliton) is traced.
    """
    if not (0 < gamma_range[0] < gamma_range[1] <= 10 * J):
        raise PreconditionError("gamma_range must lie within (0, 10J]")
    gammas = branch_gammas(gamma_range, steps=steps)
    params = ModelParams.polar(gammas[0], phase, J)
    opt = three_site_optimize(params, maximize=False)
    seed = opt.maximizer if highest else opt.minimizer
    state = seed.embed(L)
    points, termination = [], None
    for m in gammas:
        params = ModelParams.polar(m, phase, J)
        res, _ = solve_self_consistent(params, L, state)
        c = classify(res.state, cls_cfg)
        lost = not res.converged or c.kind is not StateKind.SOLITON
        if not lost and points:
            # a jump onto another branch shows up as a large change of the profile
            lost = np.linalg.norm(res.state.density - state.density) > 0.2
        points.append(BranchPoint(m, res.energy, res.mu, c.kind, c.three_site_weight, res.residual,
                                  res.converged and not lost))
        if lost:
            break
        termination = m
        state = res.state
    return BranchTrace(phase, L, points, termination)
