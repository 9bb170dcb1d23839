"""Zero-energy edge modes of the open chain.

With every second site empty, zero chemical potential requires for
consecutive occupied sites ``a = Psi_{2n-1}`` and ``b = Psi_{2n+1}``
(1-based site numbers; 0-based even indices here)

    (J + gamma |a|^2) a = (-J + conj(gamma) |b|^2) b.

The profile is built site by site along the decreasing branch and the
seed amplitude is fixed so that the finished profile has unit norm.
"""
from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .errors import ConstructionError, D4Error, PreconditionError, RootSelectionError
from .model import Boundary, LatticeState, ModelParams, rhs_array

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class ZeroModeProfile:
    state: LatticeState
    residual: float
    localization_ratio: float
    seed: float
    from_right: bool = False


def _polish_root(coef, x):
    for _ in range(3):
        f = np.polyval(coef, x)
        df = np.polyval(np.polyder(coef), x)
        if df == 0:
            break
        x -= f / df
    return x


def next_modulus(a: float, params: ModelParams, forward: bool = True) -> float:
    """Modulus of the next occupied site, chosen on the decreasing branch.

    Forward (site 1 towards site L) solves ``|-J + conj(gamma) x| sqrt(x) = c``
    for ``x = |b|^2`` with ``c = |J + gamma a^2| a``; backward swaps the roles.
    Squaring gives the cubic ``|gamma|^2 x^3 -+ 2 J gamma_R x^2 + J^2 x - c^2 = 0``;
    the smallest root in ``[0, a^2]`` is returned as a modulus.
    """
    J, g = params.J, params.gamma
    if forward:
        c = abs(J + g * a * a) * a
        coef = [abs(g) ** 2, -2 * J * g.real, J * J, -c * c]
    else:
        c = abs(-J + np.conj(g) * a * a) * a
        coef = [abs(g) ** 2, 2 * J * g.real, J * J, -c * c]
    roots = np.roots(np.trim_zeros(np.array(coef, dtype=float), "f"))
    a2 = a * a
    cand = [_polish_root(coef, r.real) for r in roots
            if abs(r.imag) <= 1e-9 * max(1.0, abs(r)) and -1e-14 <= r.real <= a2 * (1 + 1e-9)]
    if c == 0:
        return 0.0
    if not cand:
        raise RootSelectionError("no real root on the decreasing branch")
    return float(np.sqrt(min(max(min(cand), 0.0), a2)))


def _recursion(seed: float, params: ModelParams, n_odd: int, forward: bool):
    """Odd-site amplitudes ordered from the seeded edge inward."""
    J, g = params.J, params.gamma
    out = np.zeros(n_odd, dtype=complex)
    out[0] = seed
    for i in range(1, n_odd):
        a = out[i - 1]
        try:
            bmod = next_modulus(abs(a), params, forward)
        except RootSelectionError as exc:
            raise RootSelectionError(str(exc), site=2 * i + 1) from None
        if bmod == 0.0:
            break
        if forward:
            denom = -J + np.conj(g) * bmod ** 2
            out[i] = (J + g * abs(a) ** 2) * a / denom
        else:
            denom = J + g * bmod ** 2
            out[i] = (-J + np.conj(g) * abs(a) ** 2) * a / denom
        # the moduli already match; keep the exact modulus and take the phase
        out[i] = bmod * np.exp(1j * np.angle(out[i]))
    return out


def _profile(seed: float, params: ModelParams, L: int, forward: bool) -> np.ndarray:
    n_odd = (L + 1) // 2
    amps = _recursion(seed, params, n_odd, forward)
    psi = np.zeros(L, dtype=complex)
    if forward:
        psi[0::2] = amps
    else:
        psi[0::2] = amps[::-1]
    return psi


def build_zero_mode(params: ModelParams, L: int, psi1: float | None = None) -> ZeroModeProfile:
    """Zero mode of the open chain with ``L`` (odd) sites.

    By default the seed is solved for so that the profile has unit norm.
    Passing ``psi1`` fixes the seed instead (the profile is then returned
    unnormalized).  For ``gamma_R > 0`` the recursion starts at the right edge.
    """
    if L % 2 == 0:
        raise ConstructionError(
            f"no zero mode for even L={L}: the last site has a single occupied neighbour")
    if L < 3:
        raise PreconditionError("need L >= 3")
    forward = params.gamma.real <= 0
    if psi1 is None:
        norm2 = lambda s: float(np.sum(np.abs(_profile(s, params, L, forward)) ** 2)) - 1.0
        hi = 1.0
        if norm2(hi) <= 0:
            seed = hi
        else:
            lo = 0.5 / np.sqrt((L + 1) // 2)
            while norm2(lo) > 0:
                lo /= 2
            seed = brentq(norm2, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps)
    else:
        if not psi1 > 0:
            raise PreconditionError("psi1 must be positive")
        seed = float(psi1)
    psi = _profile(seed, params, L, forward)
    state = LatticeState(psi, Boundary.OPEN)
    residual = float(np.linalg.norm(rhs_array(psi, params.J, params.gamma, False)))
    return ZeroModeProfile(state, residual, _ratio(psi, not forward), float(seed), not forward)


def _ratio(psi: np.ndarray, from_right: bool = False) -> float:
    d = np.abs(psi) ** 2
    if from_right or d[0] == 0:
        return float(d[-3] / d[-1])
    return float(d[2] / d[0])


def localization_ratio(profile: ZeroModeProfile) -> float:
    """``|Psi_3|^2 / |Psi_1|^2`` measured from the localizing edge.

    Profiles seeded at the right edge (``gamma_R > 0``), or with ``Psi_1 = 0``,
    use the mirrored ratio ``|Psi_{L-2}|^2 / |Psi_L|^2``.
    """
    return _ratio(profile.state.amplitudes, profile.from_right)


@dataclass(frozen=True)
class ScanPoint:
    gamma: complex
    localization_ratio: float
    residual: float
    error: str = ""

    def row(self):
        return {"gamma_re": self.gamma.real, "gamma_im": self.gamma.imag,
                "localization_ratio": self.localization_ratio, "residual": self.residual,
                "error": self.error}


def scan_point(gamma: complex, L: int, J: float = 1.0) -> ScanPoint:
    try:
        prof = build_zero_mode(ModelParams(J, gamma), L)
        return ScanPoint(complex(gamma), prof.localization_ratio, prof.residual)
    except D4Error as exc:
        return ScanPoint(complex(gamma), float("nan"), float("nan"), f"{exc.category}: {exc}")


def _scan_args(a):
    return scan_point(*a)


def gamma_plane_scan(grid, L: int, J: float = 1.0, jobs: int = 1) -> list[ScanPoint]:
    """Localization ratio over a grid of couplings, in grid order; failures kept as NaN rows."""
    args = [(complex(g), L, J) for g in grid]
    if jobs <= 1:
        return [scan_point(*a) for a in args]
    with ProcessPoolExecutor(max_workers=jobs) as ex:
        return list(ex.map(_scan_args, args))


def default_grid(n_re: int = 41, n_im: int = 41, re=(-2.0, 0.0), im=(-1.0, 1.0)) -> list[complex]:
    """Row-major grid over ``gamma_R`` (outer) and ``gamma_I`` (inner)."""
    return [complex(r, i) for r in np.linspace(*re, n_re) for i in np.linspace(*im, n_im)]
