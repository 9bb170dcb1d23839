import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.optimize import linear_sum_assignment

from d4nlse.dynamics import IntegratorConfig, StationaryState, evolve_real
from d4nlse.errors import PreconditionError
from d4nlse.model import LatticeState, ModelParams, momentum_grid, rhs_array
from d4nlse.stability import (
    analytic_k0_spectrum,
    arbitrary_k_unstable,
    bogoliubov_matrix,
    condensate_density,
    condensate_stable,
    condensate_state,
    dispersion_arbitrary_k,
    dispersion_k0,
    gamma_k,
    growth_rate,
    numeric_linearization,
    perturbation_matrix_k0,
    phase_diagram_sweep,
    split_jacobian,
    stable_momentum,
    symplectic_eigenvalues,
    sweep_point,
    threshold_gamma_im,
)
from d4nlse.stationary import StateKind, describe, solve_self_consistent, soliton_seed
from oracles import two_mode_eigs

RELAX = IntegratorConfig(dt=0.1, max_steps=20000, tol=1e-10, renormalize=True)
momenta = st.floats(-np.pi, np.pi)


def max_matched_deviation(a, b):
    """Largest distance after optimally pairing two spectra."""
    cost = np.abs(np.asarray(a)[:, None] - np.asarray(b)[None, :])
    r, c = linear_sum_assignment(cost)
    return float(cost[r, c].max())


def plane_wave_stationary(params, L, k=0.0):
    return describe(condensate_state(L, k), params)


class TestDispersionK0:
    @given(momenta)
    def test_free_limit(self, p):
        r = dispersion_k0(p, ModelParams(1.0, 0.0), 16)
        assert r.eps.real == pytest.approx(2 * (1 - np.cos(p)), abs=1e-14)
        assert r.stable

    def test_quadratic_at_small_p(self):
        for p in (1e-2, 1e-3):
            assert dispersion_k0(p, ModelParams(1.0, 0.0), 16).eps.real / p ** 2 == pytest.approx(1.0, rel=1e-4)

    @given(momenta)
    def test_flat_at_threshold(self, p):
        L = 12
        r = dispersion_k0(p, ModelParams(1.0, 1j * L / 2), L)
        assert abs(r.eps_squared) < 1e-24

    @given(momenta, st.floats(-5, 5))
    def test_real_part_irrelevant(self, p, gi):
        base = dispersion_k0(p, ModelParams(1.0, 1j * gi), 10).eps_squared
        for gr in (5.0, -5.0):
            assert dispersion_k0(p, ModelParams(1.0, complex(gr, gi)), 10).eps_squared == base

    @pytest.mark.parametrize("L", [8, 16, 29])
    def test_threshold_sign_change(self, L):
        gc = threshold_gamma_im(ModelParams(), L)
        assert gc == L / 2
        below, above = np.nextafter(gc, 0), np.nextafter(gc, np.inf)
        assert condensate_stable(ModelParams(1.0, 1j * below), L)
        assert condensate_stable(ModelParams(1.0, 1j * gc), L)
        assert not condensate_stable(ModelParams(1.0, 1j * above * (1 + 1e-6)), L)

    def test_stable_flag_tolerance(self):
        r = dispersion_k0(np.pi, ModelParams(1.0, 4j * (1 + 1e-15)), 8)
        assert r.stable == (r.eps_squared >= -1e-12)


class TestPerturbationMatrix:
    @pytest.mark.parametrize("gi", [0.0, 1.0, 3.9])
    def test_eigenvalues_match_dispersion(self, gi):
        L, p_ = 8, ModelParams(1.0, complex(0.7, gi))
        for p in momentum_grid(L)[1:]:
            w = symplectic_eigenvalues(perturbation_matrix_k0(p, p_, L))
            e = dispersion_k0(p, p_, L).eps
            assert max_matched_deviation(w, [e, -e]) < 1e-12

    def test_diagonal_without_imaginary_coupling(self):
        M = perturbation_matrix_k0(1.0, ModelParams(1.0, 3.0), 8)
        assert M[0, 1] == 0 and M[1, 0] == 0

    def test_unstable_continuation(self):
        L = 8
        p_ = ModelParams(1.0, 1j * L)
        for p in momentum_grid(L)[1:]:
            w = np.linalg.eigvals(perturbation_matrix_k0(p, p_, L))
            expected = np.sqrt(4 * L ** 2 / L ** 2 - 1) * 2 * (1 - np.cos(p))
            assert np.sort(np.abs(w.imag)) == pytest.approx([expected, expected], abs=1e-12)
            assert np.max(np.abs(w.real)) < 1e-12


class TestArbitraryK:
    @given(st.floats(-5, 5), st.floats(-5, 5), momenta, st.floats(0, 2))
    def test_stable_momentum_is_stable(self, gr, gi, p, n):
        params = ModelParams(1.0, complex(gr, gi))
        k = stable_momentum(params)
        assert abs(gamma_k(k, params)) < 1e-12
        assert dispersion_arbitrary_k(k, p, n, params).eps_squared >= -1e-12

    @given(st.floats(-5, 5), st.floats(-5, 5), momenta)
    def test_reduces_to_k0(self, gr, gi, p):
        L = 10
        params = ModelParams(1.0, complex(gr, gi))
        a = dispersion_arbitrary_k(0.0, p, condensate_density(L), params).eps_squared
        b = dispersion_k0(p, params, L).eps_squared
        assert a == pytest.approx(b, rel=1e-12, abs=1e-12)

    def test_two_mode_oracle(self):
        params = ModelParams(1.0, 1.0)
        r = dispersion_arbitrary_k(np.pi / 2, np.pi, 1.0, params)
        assert r.eps_squared == pytest.approx(-60.0, abs=1e-12)
        w = two_mode_eigs(np.pi / 2, np.pi, 1.0, 1.0, 1.0 + 0j)
        assert np.allclose(w ** 2, r.eps_squared, atol=1e-12)

    @given(momenta, momenta, st.floats(0, 1), st.floats(-3, 3), st.floats(-3, 3))
    def test_two_mode_oracle_everywhere(self, k, p, n, gr, gi):
        g = complex(gr, gi)
        w = two_mode_eigs(k, p, n, 1.0, g)
        assert np.allclose(w ** 2, dispersion_arbitrary_k(k, p, n, ModelParams(1.0, g)).eps_squared, atol=1e-9)

    def test_instability_verdict_uses_grid(self):
        L = 8
        params = ModelParams(1.0, 4.4j)
        assert arbitrary_k_unstable(0.0, condensate_density(L), params, L)
        assert not arbitrary_k_unstable(0.0, condensate_density(L), ModelParams(1.0, 3.9j), L)

    @pytest.mark.parametrize("L,gamma", [
        (8, 10 * np.exp(1j * np.pi / 4)),
        (12, 20 * np.exp(1j * np.pi / 3)),
        (16, 30 * np.exp(-3j * np.pi / 8)),
    ])
    def test_stable_momentum_on_lattice(self, L, gamma):
        params = ModelParams(1.0, gamma)
        k = stable_momentum(params)
        stat = plane_wave_stationary(params, L, k)
        assert stat.residual < 1e-12
        assert not numeric_linearization(stat, params).unstable
        assert numeric_linearization(plane_wave_stationary(params, L), params).unstable


class TestNumericLinearization:
    @pytest.mark.parametrize("L", [8, 16, 29])
    @pytest.mark.parametrize("gr", [0.0, 2.5])
    def test_matches_k0_formula(self, L, gr):
        params = ModelParams(1.0, complex(gr, 0.3 * L))
        spec = numeric_linearization(plane_wave_stationary(params, L), params)
        assert not spec.unstable
        assert max_matched_deviation(spec.frequencies, analytic_k0_spectrum(params, L)) < 1e-8

    def test_above_threshold_complex(self):
        L = 8
        params = ModelParams(1.0, 0.6j * L)
        spec = numeric_linearization(plane_wave_stationary(params, L), params)
        assert spec.unstable
        assert max_matched_deviation(spec.frequencies, analytic_k0_spectrum(params, L)) < 1e-8

    def test_generator_matches_finite_differences(self, rng):
        params = ModelParams(1.0, 0.8 - 1.1j)
        s = LatticeState.random(7, rng)
        mu = 0.3
        J = split_jacobian(s, params, mu)
        x0 = np.concatenate([s.amplitudes.real, s.amplitudes.imag])

        def g(x):
            psi = x[:7] + 1j * x[7:]
            f = rhs_array(psi, 1.0, params.gamma, True) - mu * psi
            return np.concatenate([f.real, f.imag])

        h = 1e-6
        fd = np.column_stack([(g(x0 + h * e) - g(x0 - h * e)) / (2 * h) for e in np.eye(14)])
        assert np.max(np.abs(fd - J)) < 1e-8
        G = bogoliubov_matrix(s, params, mu)
        assert np.allclose(G[:7], J[7:]) and np.allclose(G[7:], -J[:7])

    def test_residual_precondition(self, rng):
        s = LatticeState.random(7, rng)
        stat = StationaryState(s, 0.0, 0.0, 1e-3)
        with pytest.raises(PreconditionError):
            numeric_linearization(stat, ModelParams())

    def test_soliton_stable(self):
        params = ModelParams(1.0, -4j)
        stat, _ = solve_self_consistent(params, 29, soliton_seed(params, 29))
        assert not numeric_linearization(stat, params).unstable
        # real-time oracle: a perturbed soliton stays put
        kick = np.random.default_rng(1).standard_normal(29) * 1e-3
        start = stat.state.with_amplitudes(stat.state.amplitudes + kick).normalize()
        traj = evolve_real(start, params, IntegratorConfig(dt=0.01, sample_every=500))
        dev = [np.max(np.abs(x.density - stat.state.density)) for x in traj.states]
        assert max(dev) < 1e-2


class TestGrowth:
    def test_rate_matches_dispersion(self):
        L = 8
        fit = growth_rate(ModelParams(1.0, 1.1j * L / 2), L)
        assert fit.relative_error < 0.1
        assert fit.deviation[-1] <= 1e-2

    def test_no_growth_below_threshold(self):
        fit = growth_rate(ModelParams(1.0, 0.9j * 4), 8, t_max=20.0)
        assert fit.predicted == 0.0
        assert np.max(fit.deviation) < 1e-5


class TestSweep:
    def test_weak_coupling_point(self):
        rec = sweep_point(0.5j, 29, RELAX, restarts=2)
        assert rec.error == ""
        assert rec.ground_class.kind is StateKind.PLANE_WAVE
        assert rec.condensate_stable
        assert rec.E_ground == pytest.approx(-2.0, abs=1e-9)

    def test_strong_coupling_point(self):
        rec = sweep_point(3j, 29, RELAX, restarts=2)
        assert rec.ground_class.kind is StateKind.SOLITON
        assert rec.soliton_exists
        assert rec.E_ground < -2.0

    @pytest.mark.parametrize("gr", [-3.0, 0.0, 4.0])
    def test_condensate_unstable_far_above_threshold(self, gr):
        L = 9
        assert not condensate_stable(ModelParams(1.0, complex(gr, 0.6 * L)), L)

    def test_failure_recorded(self):
        cfg = IntegratorConfig(dt=0.1, max_steps=2, tol=1e-10, renormalize=True)
        rec = sweep_point(0.0, 9, cfg, restarts=1)
        assert rec.error.startswith("not-converged")
        assert rec.row()["ground_class"] == ""

    def test_order_and_rows(self):
        grid = [0.0, 0.5j, -0.4 + 0.2j]
        recs = phase_diagram_sweep(grid, 9, RELAX, restarts=1)
        assert [r.gamma for r in recs] == grid
        assert set(recs[0].row()) >= {"gamma_re", "gamma_im", "ground_class", "E_ground", "condensate_stable"}

    def test_parallel_matches_serial(self):
        grid = [0.3j, 2.8j]
        a = phase_diagram_sweep(grid, 9, RELAX, restarts=1)
        b = phase_diagram_sweep(grid, 9, RELAX, restarts=1, jobs=2)
        assert [repr(r.row()) for r in a] == [repr(r.row()) for r in b]

    def test_non_finite_grid(self):
        with pytest.raises(PreconditionError):
            phase_diagram_sweep([complex(np.nan, 0)], 9, RELAX)
