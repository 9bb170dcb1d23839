"""Lattice state, model parameters and the D4NLSE right-hand side.

The Hamiltonian is

    H = sum_j Psi*_{j+1} [-J + gamma (n_{j+1} - n_j)] Psi_j + c.c.

and the equation of motion is ``i dPsi_j/dt = dH/dPsi*_j``.  Sites are
indexed ``j = 0 .. L-1``; the lattice spacing is one.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .errors import PreconditionError, UnsupportedBoundaryError

#: tolerance on the imaginary part of the (real) energy
ENERGY_IMAG_TOL = 1e-12
#: normalization tolerance for operations that require a unit-norm state
NORM_TOL = 1e-8


class Boundary(str, enum.Enum):
    PERIODIC = "periodic"
    OPEN = "open"


@dataclass(frozen=True)
class ModelParams:
    """Hopping ``J`` and complex density-difference coupling ``gamma``."""

    J: float = 1.0
    gamma: complex = 0j

    def __post_init__(self):
        object.__setattr__(self, "J", float(self.J))
        object.__setattr__(self, "gamma", complex(self.gamma))
        if not self.J > 0:
            raise PreconditionError(f"J must be positive, got {self.J}")

    @property
    def gamma_re(self) -> float:
        return self.gamma.real

    @property
    def gamma_im(self) -> float:
        return self.gamma.imag

    @classmethod
    def polar(cls, modulus: float, phase: float, J: float = 1.0) -> "ModelParams":
        return cls(J=J, gamma=modulus * np.exp(1j * phase))


@dataclass(frozen=True, eq=False)
class LatticeState:
    """Complex amplitudes on ``L`` sites.  Immutable; arrays are read-only."""

    amplitudes: np.ndarray
    boundary: Boundary = Boundary.PERIODIC

    def __post_init__(self):
        psi = np.array(self.amplitudes, dtype=complex).reshape(-1)
        if psi.size < 3:
            raise PreconditionError(f"need at least 3 sites, got {psi.size}")
        psi.setflags(write=False)
        object.__setattr__(self, "amplitudes", psi)
        object.__setattr__(self, "boundary", Boundary(self.boundary))

    @property
    def L(self) -> int:
        return self.amplitudes.size

    @property
    def periodic(self) -> bool:
        return self.boundary is Boundary.PERIODIC

    @property
    def density(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    @property
    def norm(self) -> float:
        return float(np.sqrt(np.sum(self.density)))

    def normalize(self) -> "LatticeState":
        return self.with_amplitudes(self.amplitudes / self.norm)

    def with_amplitudes(self, psi) -> "LatticeState":
        return LatticeState(psi, self.boundary)

    def __len__(self):
        return self.L

    def __repr__(self):
        return f"LatticeState(L={self.L}, boundary={self.boundary.value}, norm={self.norm:.12g})"

    # constructors

    @classmethod
    def plane_wave(cls, L: int, k: float = 0.0, boundary=Boundary.PERIODIC) -> "LatticeState":
        """Normalized ``exp(-i j k)/sqrt(L)``; its only Fourier coefficient sits at ``k``."""
        j = np.arange(L)
        return cls(np.exp(-1j * j * k) / np.sqrt(L), boundary)

    @classmethod
    def single_site(cls, L: int, site: int = 0, boundary=Boundary.OPEN) -> "LatticeState":
        psi = np.zeros(L, dtype=complex)
        psi[site] = 1.0
        return cls(psi, boundary)

    @classmethod
    def random(cls, L: int, rng: np.random.Generator, boundary=Boundary.PERIODIC) -> "LatticeState":
        """Independent complex Gaussian amplitudes, normalized."""
        psi = rng.standard_normal(L) + 1j * rng.standard_normal(L)
        return cls(psi / np.linalg.norm(psi), boundary)


@dataclass(frozen=True)
class MomentumVertex:
    q: float
    k: float
    value: complex = field(default=0j)


def require_normalized(state: LatticeState, tol: float = NORM_TOL):
    dev = abs(float(np.sum(state.density)) - 1.0)
    if dev > tol:
        raise PreconditionError(f"state is not normalized (|norm^2 - 1| = {dev:.3e})")


def neighbors(psi: np.ndarray, periodic: bool):
    """Return ``(Psi_{j-1}, Psi_{j+1})`` with zero padding for open chains."""
    prev = np.roll(psi, 1)
    nxt = np.roll(psi, -1)
    if not periodic:
        prev[0] = 0.0
        nxt[-1] = 0.0
    return prev, nxt


def bond_terms(psi: np.ndarray, J: float, gamma: complex, periodic: bool) -> np.ndarray:
    """``Psi*_{j+1} [-J + gamma (n_{j+1} - n_j)] Psi_j`` for every bond ``(j, j+1)``."""
    n = (psi * psi.conj()).real
    nxt = np.roll(psi, -1)
    b = nxt.conj() * (-J + gamma * (np.roll(n, -1) - n)) * psi
    if not periodic:
        b = b[:-1]
    return b


def energy_array(psi: np.ndarray, J: float, gamma: complex, periodic: bool) -> float:
    b = bond_terms(psi, J, gamma, periodic)
    total = np.sum(b) + np.sum(b.conj())
    assert abs(total.imag) < ENERGY_IMAG_TOL * max(1.0, abs(total.real))
    return float(total.real)


def rhs_array(psi: np.ndarray, J: float, gamma: complex, periodic: bool) -> np.ndarray:
    """``F_j`` with ``i dPsi_j/dt = F_j``, vectorized over sites."""
    prev, nxt = neighbors(psi, periodic)
    n = (psi * psi.conj()).real
    n_prev = (prev * prev.conj()).real
    n_next = (nxt * nxt.conj()).real
    gc = np.conj(gamma)
    psi2 = psi * psi
    return ((-J + gamma * (2 * n - n_prev)) * prev
            - gamma * psi2 * nxt.conj()
            + (-J - gc * (2 * n - n_next)) * nxt
            + gc * psi2 * prev.conj())


def energy(state: LatticeState, params: ModelParams) -> float:
    """Value of the Hamiltonian on a normalized state (real by construction)."""
    require_normalized(state)
    return energy_array(state.amplitudes, params.J, params.gamma, state.periodic)


def rhs(state: LatticeState, params: ModelParams) -> np.ndarray:
    return rhs_array(state.amplitudes, params.J, params.gamma, state.periodic)


def chemical_potential(state: LatticeState, params: ModelParams) -> float:
    """``Re <Psi, F(Psi)>``; equals mu on an exact stationary state."""
    require_normalized(state)
    return float(np.vdot(state.amplitudes, rhs(state, params)).real)


def stationarity_residual(state: LatticeState, params: ModelParams, mu: float | None = None) -> float:
    """``||F(Psi) - mu Psi||`` with ``mu`` defaulting to the Rayleigh quotient."""
    psi = state.amplitudes
    f = rhs_array(psi, params.J, params.gamma, state.periodic)
    if mu is None:
        mu = np.vdot(psi, f).real / np.vdot(psi, psi).real
    return float(np.linalg.norm(f - mu * psi))


def vertex(q: float, k: float, params: ModelParams) -> complex:
    """Momentum-space interaction vertex ``V(q, k)``.

    The formula pairs with the expansion ``Psi_j ~ sum_k Psi~_k exp(+i j k)``.
    With ``fourier`` (which uses ``exp(-i j k)``) the quartic energy is
    recovered from ``vertex(-q, -k)``; the two differ only in the sign of
    the ``gamma_R`` term.
    """
    gr, gi = params.gamma.real, params.gamma.imag
    return 2j * gr * (np.sin(k) - np.sin(q)) + 2j * gi * (np.cos(q) - np.cos(k))


def momentum_grid(L: int) -> np.ndarray:
    """``2 pi m / L`` for ``m = 0..L-1`` folded into ``(-pi, pi]``."""
    k = 2 * np.pi * np.arange(L) / L
    return np.where(k > np.pi + 1e-12, k - 2 * np.pi, k)


def fourier(state: LatticeState) -> np.ndarray:
    """Coefficients ``Psi~_k`` with ``Psi_j = L^-1/2 sum_k Psi~_k exp(-i j k)``.

    Entry ``m`` belongs to momentum ``momentum_grid(L)[m]``.
    """
    if not state.periodic:
        raise UnsupportedBoundaryError("Fourier transform requires a periodic lattice")
    return np.fft.ifft(state.amplitudes, norm="ortho")


def inverse_fourier(coeffs, boundary=Boundary.PERIODIC) -> LatticeState:
    if Boundary(boundary) is not Boundary.PERIODIC:
        raise UnsupportedBoundaryError("Fourier transform requires a periodic lattice")
    return LatticeState(np.fft.fft(np.asarray(coeffs, dtype=complex), norm="ortho"), boundary)


def rhs_jacobian(psi: np.ndarray, J: float, gamma: complex, periodic: bool):
    """Wirtinger derivatives ``A = dF/dPsi`` and ``B = dF/dPsi*`` as dense ``L x L`` arrays.

    ``A`` is Hermitian and ``B`` symmetric, since ``F = dH/dPsi*``.
    """
    L = psi.size
    prev, nxt = neighbors(psi, periodic)
    n = (psi * psi.conj()).real
    n_prev = (prev * prev.conj()).real
    n_next = (nxt * nxt.conj()).real
    gc = np.conj(gamma)
    psi2 = psi * psi
    j = np.arange(L)
    jm, jp = (j - 1) % L, (j + 1) % L
    A = np.zeros((L, L), dtype=complex)
    B = np.zeros((L, L), dtype=complex)
    A[j, j] = 2 * gamma * psi.conj() * prev - 2 * gamma * psi * nxt.conj() \
        - 2 * gc * psi.conj() * nxt + 2 * gc * psi * prev.conj()
    B[j, j] = 2 * gamma * psi * prev - 2 * gc * psi * nxt
    a_lo = -J + 2 * gamma * (n - n_prev)
    a_hi = -J - 2 * gc * (n - n_next)
    b_lo = -gamma * prev ** 2 + gc * psi2
    b_hi = -gamma * psi2 + gc * nxt ** 2
    rows_lo, rows_hi = j, j
    if not periodic:
        rows_lo, rows_hi = j[1:], j[:-1]
        a_lo, b_lo = a_lo[1:], b_lo[1:]
        a_hi, b_hi = a_hi[:-1], b_hi[:-1]
    np.add.at(A, (rows_lo, jm[rows_lo]), a_lo)
    np.add.at(B, (rows_lo, jm[rows_lo]), b_lo)
    np.add.at(A, (rows_hi, jp[rows_hi]), a_hi)
    np.add.at(B, (rows_hi, jp[rows_hi]), b_hi)
    return A, B


def nonlinear_operator(psi: np.ndarray, J: float, gamma: complex, periodic: bool) -> np.ndarray:
    """Hermitian matrix ``M(Psi)`` with ``M(Psi) Psi = F(Psi)``.

    Off-diagonal: the hopping with frozen densities, ``-J + gamma (n_{j+1} - n_j)``.
    Diagonal: ``dH/dn_j`` at frozen bond amplitudes, which collects the
    remaining density-locked terms of the equation of motion.
    """
    L = psi.size
    n = (psi * psi.conj()).real
    nxt = np.roll(psi, -1)
    hop = -J + gamma * (np.roll(n, -1) - n)          # bond (j, j+1), amplitude for j -> j+1
    flow = gamma * nxt.conj() * psi                    # gamma Psi*_{j+1} Psi_j
    if not periodic:
        hop = hop.copy()
        hop[-1] = 0.0
        flow = flow.copy()
        flow[-1] = 0.0
    # dH/dn_j = 2 Re(gamma Psi*_j Psi_{j-1}) - 2 Re(gamma Psi*_{j+1} Psi_j)
    w = 2 * np.roll(flow, 1).real - 2 * flow.real
    M = np.diag(w).astype(complex)
    j = np.arange(L)
    jp = (j + 1) % L
    M[jp, j] += hop
    M[j, jp] += hop.conj()
    return M
