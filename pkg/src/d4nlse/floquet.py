"""Three-step Floquet drive and its effective density-difference model.

The driven mean-field Hamiltonian is ``H0 + V(t)`` with the free hopping
``H0 = -J sum_j Psi*_{j+1} Psi_j + c.c.`` and, over three segments of length
``T/3`` each, ``V = V1``, ``V2`` and ``-V1 - V2``, where

    V1 = J1 sum_j Psi*_{j+1} Psi_j + c.c.      (hopping pulse)
    V2 = U  sum_j n_j^2                         (onsite pulse, mean-field form)

Averaged over a period the drive vanishes.  At first order in ``1/omega``
the stroboscopic dynamics is the density-difference model with a purely
kinetic-times-interaction coupling ``gamma_eff ~ i U J1 / omega``.  The
numerical prefactor and its sign are selectable (``CoefficientVariant``)
so they can be arbitrated against the driven simulation.
"""
from __future__ import annotations

import enum
import logging
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .dynamics import NORM_DRIFT_LIMIT, propagate, rk4_step
from .errors import IntegratorDivergedError, PreconditionError
from .model import LatticeState, ModelParams, neighbors, require_normalized

log = logging.getLogger(__name__)

HIGH_FREQUENCY_LIMIT = 0.2
MIN_SUBSTEPS = 300


class CoefficientVariant(str, enum.Enum):
    """Prefactor of ``i pi U J1 / omega`` in ``gamma_eff``.

    ``PAPER`` is ``+2/27`` (default).  ``LITERAL`` is ``-2/9``: the effective
    hopping written with ``(n_j - n_{j+1})`` re-expressed in the
    ``(n_{j+1} - n_j)`` ordering of the model.  The two sign-flipped
    companions complete the arbitration set.
    """

    PAPER = "27+"
    PAPER_FLIPPED = "27-"
    LITERAL = "9-"
    LITERAL_FLIPPED = "9+"

    @property
    def coefficient(self) -> float:
        denom = 27.0 if self.value.startswith("27") else 9.0
        sign = 1.0 if self.value.endswith("+") else -1.0
        return sign * 2.0 / denom


@dataclass(frozen=True)
class FloquetParams:
    J: float = 1.0
    J1: complex = 1.0
    U: float = 0.0
    omega: float = 50.0

    def __post_init__(self):
        object.__setattr__(self, "J1", complex(self.J1))
        if not self.omega > 0:
            raise PreconditionError("omega must be positive")
        if not self.J > 0:
            raise PreconditionError("J must be positive")

    @property
    def T(self) -> float:
        return 2 * np.pi / self.omega

    def high_frequency_flags(self) -> dict:
        """``|U|/omega`` and ``|J1|/omega``; warns when either exceeds 0.2."""
        flags = {"U_over_omega": abs(self.U) / self.omega, "J1_over_omega": abs(self.J1) / self.omega}
        bad = {k: v for k, v in flags.items() if v > HIGH_FREQUENCY_LIMIT}
        if bad:
            warnings.warn(f"outside the high-frequency regime: {bad}", RuntimeWarning, stacklevel=2)
        return flags


def effective_gamma(fp: FloquetParams, variant: CoefficientVariant = CoefficientVariant.PAPER) -> complex:
    """``gamma_eff = c * i pi U J1 / omega`` with ``c`` set by ``variant``."""
    return complex(CoefficientVariant(variant).coefficient * 1j * np.pi * fp.U * fp.J1 / fp.omega)


def drive_strength_for(gamma_eff: complex, J1: complex, omega: float,
                       variant: CoefficientVariant = CoefficientVariant.PAPER) -> float:
    """Real ``U`` that produces ``gamma_eff`` at the given ``J1`` and ``omega``."""
    u = gamma_eff * omega / (CoefficientVariant(variant).coefficient * 1j * np.pi * complex(J1))
    if abs(u.imag) > 1e-12 * max(1.0, abs(u)):
        raise PreconditionError(f"gamma_eff={gamma_eff} needs complex U with J1={J1}")
    return float(u.real)


@dataclass(frozen=True)
class Segment:
    """Bond coefficient ``-J + hop_shift`` and onsite strength ``onsite`` (energy ``onsite * n^2``)."""

    hop_shift: complex
    onsite: float


def segments(fp: FloquetParams) -> tuple[Segment, Segment, Segment]:
    return (Segment(fp.J1, 0.0), Segment(0.0, fp.U), Segment(-fp.J1, -fp.U))


def drive_is_zero_mean(fp: FloquetParams) -> bool:
    """Term-wise check that the three pulses sum to zero."""
    s = segments(fp)
    return sum(x.hop_shift for x in s) == 0 and sum(x.onsite for x in s) == 0


def segment_rhs(psi: np.ndarray, J: float, seg: Segment, periodic: bool) -> np.ndarray:
    """``dH/dPsi*`` for one segment: ``c Psi_{j-1} + c* Psi_{j+1} + 2 U n_j Psi_j``."""
    prev, nxt = neighbors(psi, periodic)
    c = -J + seg.hop_shift
    out = c * prev + np.conj(c) * nxt
    if seg.onsite:
        out = out + 2 * seg.onsite * (psi.real ** 2 + psi.imag ** 2) * psi
    return out


def _segment_generator(L: int, J: float, seg: Segment, periodic: bool):
    """``-i dH/dPsi*`` with the hopping part as a dense matrix (same as ``segment_rhs``)."""
    c = -J + seg.hop_shift
    j = np.arange(L if periodic else L - 1)
    H = np.zeros((L, L), dtype=complex)
    H[(j + 1) % L, j] = c
    H[j, (j + 1) % L] = np.conj(c)
    G = -1j * H
    if not seg.onsite:
        return lambda p: G @ p
    u = -2j * seg.onsite
    return lambda p: G @ p + u * (p.real ** 2 + p.imag ** 2) * p


def _check_substeps(substeps: int) -> int:
    if substeps < MIN_SUBSTEPS:
        raise PreconditionError(f"need at least {MIN_SUBSTEPS} substeps per period, got {substeps}")
    if substeps % 3:
        raise PreconditionError("substeps must be divisible by 3 (one share per segment)")
    return substeps // 3


def evolve_floquet(state: LatticeState, fp: FloquetParams, periods: int, substeps: int = 600,
                   on_period=None) -> LatticeState:
    """Stroboscopic state after ``periods`` full drive periods.

    Each segment gets ``substeps // 3`` RK4 steps, so no step straddles a
    pulse edge.  ``on_period(n, psi)`` is called after every period.
    """
    per_seg = _check_substeps(substeps)
    dt = fp.T / substeps
    J, periodic = fp.J, state.periodic
    psi = np.array(state.amplitudes, dtype=complex)
    norm0 = np.linalg.norm(psi)
    funcs = [_segment_generator(psi.size, J, s, periodic) for s in segments(fp)]
    for n in range(1, periods + 1):
        for f in funcs:
            for _ in range(per_seg):
                psi = rk4_step(f, psi, dt)
        drift = abs(np.linalg.norm(psi) - norm0)
        if not drift <= NORM_DRIFT_LIMIT:
            raise IntegratorDivergedError(f"norm drift {drift:.3e} after period {n}", step=n * substeps)
        if on_period is not None:
            on_period(n, psi)
    return state.with_amplitudes(psi)


def infidelity(a: np.ndarray, b: np.ndarray) -> float:
    ov = np.vdot(a, b)
    return float(1.0 - abs(ov) ** 2 / (np.vdot(a, a).real * np.vdot(b, b).real))


@dataclass(frozen=True)
class StroboscopicReport:
    omega: float
    U: float
    gamma_eff: complex
    variant: str
    times: np.ndarray
    infidelity: np.ndarray      # after each period

    @property
    def final_infidelity(self) -> float:
        return float(self.infidelity[-1])

    @property
    def rate(self) -> float:
        """Infidelity per unit physical time at the end of the run."""
        return float(self.infidelity[-1] / self.times[-1])

    def row(self) -> dict:
        return {"omega": self.omega, "U": self.U, "gamma_eff_re": self.gamma_eff.real,
                "gamma_eff_im": self.gamma_eff.imag, "variant": self.variant,
                "time": float(self.times[-1]), "infidelity": self.final_infidelity,
                "infidelity_rate": self.rate}


def _effective_states(state: LatticeState, params: ModelParams, T: float, periods: int, substeps: int):
    """Effective-model states at every period, on the same time grid as the drive."""
    out = []
    propagate(state.amplitudes, params, state.periodic, T / substeps, periods * substeps,
              frame=0.0, on_sample=lambda s, p: out.append(p), sample_every=substeps)
    return out


def compare_stroboscopic(state: LatticeState, fp: FloquetParams, periods: int, substeps: int = 600,
                         variant: CoefficientVariant = CoefficientVariant.PAPER,
                         variants=None):
    """Per-period infidelity between the driven and the effective evolution.

    With ``variants`` given, one driven run is compared against each listed
    coefficient variant and a dict ``{variant: report}`` is returned.
    """
    require_normalized(state)
    _check_substeps(substeps)
    fp.high_frequency_flags()
    driven = []
    evolve_floquet(state, fp, periods, substeps, on_period=lambda n, p: driven.append(p.copy()))
    times = fp.T * np.arange(1, periods + 1)
    reports = {}
    for v in (variants or [variant]):
        v = CoefficientVariant(v)
        g = effective_gamma(fp, v)
        eff = _effective_states(state, ModelParams(fp.J, g), fp.T, periods, substeps)
        inf = np.array([infidelity(a, b) for a, b in zip(driven, eff)])
        reports[v] = StroboscopicReport(fp.omega, fp.U, g, v.value, times, inf)
    return reports if variants else reports[CoefficientVariant(variant)]


def arbitrate_variants(state: LatticeState, fp: FloquetParams, periods: int, substeps: int = 600):
    """Variant whose effective coupling tracks the drive best, with all reports."""
    reports = compare_stroboscopic(state, fp, periods, substeps, variants=list(CoefficientVariant))
    best = min(reports, key=lambda v: reports[v].final_infidelity)
    log.info("variant arbitration at omega=%g: %s", fp.omega,
             {v.value: r.final_infidelity for v, r in reports.items()})
    return best, reports


@dataclass(frozen=True)
class LadderResult:
    reports: list
    doubling_ratios: np.ndarray

    @property
    def monotone(self) -> bool:
        rates = [r.rate for r in self.reports]
        return all(a > b for a, b in zip(rates, rates[1:]))


def _ladder_point(args):
    state, fp, periods, substeps, variant = args
    return compare_stroboscopic(state, fp, periods, substeps, variant)


def floquet_ladder(state: LatticeState, gamma_eff: complex, J1: complex, omegas=(25, 50, 100, 200),
                   time: float = 5.0, substeps: int = 600,
                   variant: CoefficientVariant = CoefficientVariant.PAPER, J: float = 1.0,
                   jobs: int = 1) -> LadderResult:
    """Infidelity rates on an ``omega`` ladder with ``U`` rescaled to hold ``gamma_eff`` fixed.

    Every point runs for the same physical ``time`` (rounded up to whole
    periods).
    """
    args = []
    for w in omegas:
        U = drive_strength_for(gamma_eff, J1, w, variant)
        fp = FloquetParams(J, J1, U, float(w))
        args.append((state, fp, int(np.ceil(time / fp.T - 1e-9)), substeps, variant))
    if jobs <= 1:
        reports = [_ladder_point(a) for a in args]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            reports = list(ex.map(_ladder_point, args))
    rates = np.array([r.rate for r in reports])
    return LadderResult(reports, rates[:-1] / rates[1:])
