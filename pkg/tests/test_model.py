import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from d4nlse.errors import PreconditionError, UnsupportedBoundaryError
from d4nlse.model import (
    Boundary,
    LatticeState,
    ModelParams,
    chemical_potential,
    energy,
    fourier,
    inverse_fourier,
    momentum_grid,
    nonlinear_operator,
    rhs,
    rhs_array,
    rhs_jacobian,
    stationarity_residual,
    vertex,
)
from oracles import (
    FROZEN_E5_OPEN,
    FROZEN_E5_PERIODIC,
    FROZEN_MU5_PERIODIC,
    fixed_state_5,
    naive_energy,
    naive_rhs,
)

finite = st.floats(-3, 3, allow_nan=False)
gammas = st.builds(complex, finite, finite)
sizes = st.integers(3, 12)


def random_state(L, seed, boundary=Boundary.PERIODIC):
    return LatticeState.random(L, np.random.default_rng(seed), boundary)


class TestLatticeState:
    def test_normalize(self):
        s = LatticeState(np.arange(1, 6) * (1 + 1j)).normalize()
        assert abs(np.sum(s.density) - 1) < 1e-12

    def test_too_small(self):
        with pytest.raises(PreconditionError):
            LatticeState([1, 0])

    def test_read_only(self):
        s = LatticeState.plane_wave(5)
        with pytest.raises(ValueError):
            s.amplitudes[0] = 2

    def test_bad_hopping(self):
        with pytest.raises(PreconditionError):
            ModelParams(J=0.0)


class TestEnergy:
    def test_frozen_oracle(self):
        psi = LatticeState(fixed_state_5())
        p = ModelParams(1.0, 0.7 + 0.3j)
        assert abs(energy(psi, p) - FROZEN_E5_PERIODIC) < 1e-13
        assert abs(chemical_potential(psi, p) - FROZEN_MU5_PERIODIC) < 1e-13
        opn = LatticeState(fixed_state_5(), Boundary.OPEN)
        assert abs(energy(opn, p) - FROZEN_E5_OPEN) < 1e-13

    @given(gammas, sizes, st.integers(0, 10_000))
    def test_matches_naive_sum(self, g, L, seed):
        for b in Boundary:
            s = random_state(L, seed, b)
            assert energy(s, ModelParams(1.0, g)) == pytest.approx(
                naive_energy(list(s.amplitudes), 1.0, g, b is Boundary.PERIODIC), abs=1e-12)

    @given(gammas, st.integers(3, 20))
    def test_plane_wave_k0(self, g, L):
        s = LatticeState.plane_wave(L)
        p = ModelParams(1.0, g)
        assert abs(energy(s, p) + 2) < 1e-12
        assert abs(chemical_potential(s, p) + 2) < 1e-12

    @given(gammas, st.integers(3, 16), st.integers(0, 15))
    def test_uniform_density_gamma_free(self, g, L, m):
        k = 2 * np.pi * m / L
        phases = np.random.default_rng(m).uniform(0, 2 * np.pi, L)
        s = LatticeState(np.exp(1j * phases) / np.sqrt(L))
        assert abs(energy(s, ModelParams(1.0, g)) - energy(s, ModelParams(1.0, 0))) < 1e-12
        pw = LatticeState.plane_wave(L, k)
        diff = rhs(pw, ModelParams(1.0, g)) - rhs(pw, ModelParams(1.0, 0))
        assert np.max(np.abs(diff)) < 1e-12

    @given(gammas, sizes, st.integers(0, 1000), st.floats(0, 2 * np.pi))
    def test_phase_invariance(self, g, L, seed, theta):
        s = random_state(L, seed)
        p = ModelParams(1.0, g)
        assert energy(s.with_amplitudes(s.amplitudes * np.exp(1j * theta)), p) == pytest.approx(
            energy(s, p), abs=1e-12)

    def test_not_normalized(self):
        with pytest.raises(PreconditionError):
            energy(LatticeState(np.ones(4)), ModelParams())


class TestRhs:
    @given(gammas, sizes, st.integers(0, 10_000))
    def test_matches_naive(self, g, L, seed):
        for b in Boundary:
            s = random_state(L, seed, b)
            ref = np.array(naive_rhs(list(s.amplitudes), 1.3, g, b is Boundary.PERIODIC))
            assert np.max(np.abs(rhs(s, ModelParams(1.3, g)) - ref)) < 1e-12

    @pytest.mark.parametrize("m", range(7))
    def test_plane_wave_eigenrelation(self, m):
        L = 7
        k = momentum_grid(L)[m]
        s = LatticeState.plane_wave(L, k)
        p = ModelParams(1.0, 0.4 - 1.1j)
        assert np.max(np.abs(rhs(s, p) + 2 * np.cos(k) * s.amplitudes)) < 1e-12
        assert abs(chemical_potential(s, p) + 2 * np.cos(k)) < 1e-12

    def test_singleton_is_zero(self):
        s = LatticeState.single_site(9, 0, Boundary.OPEN)
        assert np.max(np.abs(rhs(s, ModelParams(1.0, -1.0)))) == 0.0

    @given(gammas, st.integers(3, 8), st.integers(0, 1000))
    def test_gradient_of_energy(self, g, L, seed):
        # F_j = dH/dPsi*_j = (dH/dx_j + i dH/dy_j) / 2 for Psi = x + i y
        for b in Boundary:
            s = random_state(L, seed, b)
            psi = s.amplitudes
            per = b is Boundary.PERIODIC
            h = 1e-5
            grad = np.zeros(L, dtype=complex)
            for j in range(L):
                for unit, w in ((1.0, 1.0), (1j, 1j)):
                    d = np.zeros(L, dtype=complex)
                    d[j] = unit * h
                    ep = naive_energy(list(psi + d), 1.0, g, per)
                    em = naive_energy(list(psi - d), 1.0, g, per)
                    grad[j] += w * (ep - em) / (2 * h) / 2
            f = rhs_array(psi, 1.0, g, per)
            assert np.linalg.norm(f - grad) <= 1e-6 * max(1.0, np.linalg.norm(f))


class TestJacobianAndOperator:
    @given(gammas, st.integers(3, 8), st.integers(0, 1000))
    def test_wirtinger_jacobian(self, g, L, seed):
        for per in (True, False):
            psi = random_state(L, seed).amplitudes
            A, B = rhs_jacobian(psi, 1.0, g, per)
            assert np.allclose(A, A.conj().T, atol=1e-12)
            assert np.allclose(B, B.T, atol=1e-12)
            d = np.random.default_rng(seed + 1).standard_normal(L) * (1 + 0.5j)
            h = 1e-6
            fd = (rhs_array(psi + h * d, 1.0, g, per) - rhs_array(psi - h * d, 1.0, g, per)) / (2 * h)
            assert np.max(np.abs(fd - (A @ d + B @ d.conj()))) < 1e-7

    @given(gammas, sizes, st.integers(0, 1000))
    def test_self_consistent_operator(self, g, L, seed):
        for per in (True, False):
            psi = random_state(L, seed).amplitudes
            M = nonlinear_operator(psi, 1.0, g, per)
            assert np.allclose(M, M.conj().T, atol=1e-14)
            assert np.max(np.abs(M @ psi - rhs_array(psi, 1.0, g, per))) < 1e-12

    def test_residual_zero_on_plane_wave(self):
        assert stationarity_residual(LatticeState.plane_wave(6, np.pi / 3), ModelParams(1, 2j)) < 1e-13


class TestMomentumSpace:
    def test_grid(self):
        k = momentum_grid(6)
        assert np.all(k > -np.pi) and np.all(k <= np.pi)
        assert np.isclose(k[3], np.pi)

    def test_vertex_examples(self):
        p = ModelParams(1.0, 1j)
        # 2i gamma_I (cos 0 - cos pi/2) = +2i
        assert vertex(0.0, np.pi / 2, p) == pytest.approx(2j)
        for k in momentum_grid(9):
            assert vertex(k, k, ModelParams(1.0, 0.3 + 0.8j)) == 0

    @given(gammas)
    def test_vertex_antisymmetry(self, g):
        p = ModelParams(1.0, g)
        ks = momentum_grid(10)
        for q in ks:
            for k in ks:
                assert vertex(q, k, p) == pytest.approx(-vertex(k, q, p), abs=1e-12)

    def test_vertex_reproduces_energy(self):
        # vertex() is written for exp(+ijk) modes; fourier() uses exp(-ijk), hence (-q, -k)
        L = 7
        s = random_state(L, 3)
        p = ModelParams(1.3, 0.7 + 0.4j)
        c = fourier(s)
        ks = momentum_grid(L)
        h = sum(-2 * p.J * np.cos(ks[m]) * abs(c[m]) ** 2 for m in range(L))
        for a in range(L):
            for b in range(L):
                for q in range(L):
                    h += vertex(-ks[q], -ks[a], p) * np.conj(c[a] * c[b]) * c[(a + b - q) % L] * c[q] / L
        assert h.real == pytest.approx(energy(s, p), abs=1e-12)
        assert abs(h.imag) < 1e-12

    @given(sizes, st.integers(0, 1000))
    def test_fourier_roundtrip_and_parseval(self, L, seed):
        s = random_state(L, seed)
        c = fourier(s)
        assert np.sum(np.abs(c) ** 2) == pytest.approx(1.0, abs=1e-12)
        assert np.max(np.abs(inverse_fourier(c).amplitudes - s.amplitudes)) < 1e-12

    @pytest.mark.parametrize("m", [0, 1, 4])
    def test_plane_wave_single_coefficient(self, m):
        L = 9
        k = momentum_grid(L)[m]
        c = fourier(LatticeState.plane_wave(L, k))
        assert abs(abs(c[m]) - 1) < 1e-12
        assert np.sum(np.abs(np.delete(c, m))) < 1e-12

    def test_open_boundary_rejected(self):
        with pytest.raises(UnsupportedBoundaryError):
            fourier(LatticeState.plane_wave(5, boundary=Boundary.OPEN))
        with pytest.raises(UnsupportedBoundaryError):
            inverse_fourier(np.ones(5), Boundary.OPEN)
