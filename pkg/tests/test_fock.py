import numpy as np
import pytest

from eprcascade import analytic, fock, moments
from eprcascade.errors import ConfigurationError, IntegrationError
from eprcascade.params import Constant, EffectiveParams


def _effective(omega1=0.1, omega2=0.1, kappa1=1.0, kappa2=1.0, eps=1.0,
               phi1=0.0, phi2=0.0):
    return EffectiveParams(
        kappa1=kappa1, kappa2=kappa2,
        schedule1=Constant(omega1), schedule2=Constant(omega2),
        epsilon=eps, phi1=phi1, phi2=phi2)


class TestLadder:
    def test_annihilation_matrix_elements(self):
        (a,) = fock.build_ladder((4,))
        dense = a.toarray()
        expected = np.zeros((4, 4))
        for n in range(1, 4):
            expected[n - 1, n] = np.sqrt(n)
        np.testing.assert_allclose(dense, expected)

    def test_commutator_defect_localised_at_cutoff(self):
        # [a, a^dag] = 1 except the corner entry, which reads -(c-1)
        (a,) = fock.build_ladder((6,))
        comm = (a @ a.conj().T - a.conj().T @ a).toarray()
        np.testing.assert_allclose(np.diag(comm)[:-1], np.ones(5))
        assert comm[5, 5] == pytest.approx(1 - 6)

    def test_tensor_ladders_commute_across_modes(self):
        a, b = fock.build_ladder((3, 4))
        np.testing.assert_allclose(
            (a @ b - b @ a).toarray(), 0.0, atol=1e-15)

    def test_cutoff_floor(self):
        with pytest.raises(ConfigurationError):
            fock.build_ladder((1, 4))


class TestFockSpace:
    def test_dimensions(self):
        space = fock.cascade_space((2, 3, 4, 5))
        assert space.dim == 120
        assert space.modes == ("a1", "a2", "b1", "b2")

    def test_number_state_occupations(self):
        space = fock.FockSpace(("a", "b"), (4, 4))
        rho = space.number_state((2, 1))
        m = space.snapshot(rho.matrix)
        assert m.occupation("a") == pytest.approx(2.0)
        assert m.occupation("b") == pytest.approx(1.0)

    def test_thermal_mean_within_truncation(self):
        space = fock.FockSpace(("a",), (60,))
        rho = space.thermal({"a": 1.5})
        m = space.snapshot(rho.matrix)
        assert m.occupation("a") == pytest.approx(1.5, rel=1e-6)

    def test_vacuum_moments_are_zero(self):
        space = fock.cascade_space((3, 3, 3, 3))
        m = space.snapshot(space.vacuum().matrix)
        np.testing.assert_allclose(m.mean, 0.0, atol=1e-15)
        np.testing.assert_allclose(m.pair, 0.0, atol=1e-15)
        np.testing.assert_allclose(m.occ, 0.0, atol=1e-15)

    def test_coherent_like_mean_via_displaced_number_mix(self):
        # <a> on (|0> + |1>)/sqrt(2) is 1/2
        space = fock.FockSpace(("a",), (3,))
        vec = np.zeros(3, dtype=complex)
        vec[0] = vec[1] = 1.0 / np.sqrt(2.0)
        rho = fock.DensityMatrix(space, np.outer(vec, vec.conj()))
        m = space.snapshot(rho.matrix)
        assert m.mean[0] == pytest.approx(0.5)


class TestDensityMatrix:
    def test_checks_pass_on_clean_state(self):
        # cutoff roomy enough that the truncated thermal tail is negligible
        space = fock.FockSpace(("a", "b"), (2, 30))
        rho = space.thermal({"b": 0.2})
        assert rho.check() == []
        assert rho.trace() == pytest.approx(1.0)
        assert rho.herm_defect() <= 1e-15
        assert rho.min_eigenvalue() >= -1e-15

    def test_check_reports_trace_violation(self):
        space = fock.FockSpace(("a",), (3,))
        rho = fock.DensityMatrix(space, 2.0 * space.vacuum().matrix)
        problems = rho.check()
        assert any("trace" in p for p in problems)

    def test_check_reports_top_population(self):
        space = fock.FockSpace(("a",), (3,))
        rho = space.number_state((2,))
        problems = rho.check()
        assert any("top" in p for p in problems)

    def test_shape_validation(self):
        space = fock.FockSpace(("a",), (3,))
        with pytest.raises(ConfigurationError):
            fock.DensityMatrix(space, np.eye(4, dtype=complex))


class TestRhs:
    def test_vacuum_is_stationary_without_drive(self):
        p = _effective(omega1=0.0, omega2=0.0)
        space = fock.cascade_space((3, 3, 3, 3))
        rho = space.vacuum()
        rhs = fock.lindblad_rhs(rho, p)
        np.testing.assert_allclose(rhs, 0.0, atol=1e-16)

    def test_rhs_is_traceless(self, rng):
        p = _effective(omega1=0.3, omega2=0.2, eps=0.8, phi1=0.4, phi2=1.0)
        space = fock.cascade_space((3, 3, 3, 3))
        x = rng.standard_normal((space.dim, space.dim)) \
            + 1j * rng.standard_normal((space.dim, space.dim))
        mat = x + x.conj().T
        mat /= np.trace(mat).real
        rhs = fock.lindblad_rhs(fock.DensityMatrix(space, mat), p)
        assert abs(np.trace(rhs)) < 1e-12

    def test_rhs_preserves_hermiticity(self, rng):
        p = _effective(omega1=0.3, omega2=0.2, eps=0.7)
        space = fock.cascade_space((3, 3, 3, 3))
        x = rng.standard_normal((space.dim, space.dim)) \
            + 1j * rng.standard_normal((space.dim, space.dim))
        mat = x + x.conj().T
        rhs = fock.lindblad_rhs(fock.DensityMatrix(space, mat), p)
        np.testing.assert_allclose(rhs, rhs.conj().T, atol=1e-13)

    def test_moment_drift_matches_gaussian_generator(self):
        # d<moments>/dt from the density-matrix engine must equal the
        # moment-engine drift at the same state: same master equation.
        # Occupations stay well below the cutoffs so truncation cannot
        # contaminate the comparison; snapshot is linear in rho, so the
        # forward difference of the Euler step is the drift exactly.
        p = _effective(omega1=0.2, omega2=0.3, eps=0.9, phi1=0.2, phi2=0.9)
        space = fock.cascade_space((4, 4, 7, 7))
        rho = space.thermal({"b1": 0.02, "b2": 0.01})
        rhs = fock.lindblad_rhs(rho, p)

        h = 1e-5
        stepped = fock.DensityMatrix(space, rho.matrix + h * rhs)
        m0 = space.snapshot(rho.matrix)
        m1 = space.snapshot(stepped.matrix)
        occ_rate_fock = (m1.occ - m0.occ) / h
        pair_rate_fock = (m1.pair - m0.pair) / h

        # second-order one-sided difference kills the m''(0) h/2 term that
        # a plain forward difference across an integration step picks up
        grid = np.array([0.0, h, 2.0 * h])
        traj = moments.integrate_full(p, grid, initial=m0)
        s0, s1, s2 = traj.states

        def drift(field):
            return (4.0 * getattr(s1, field) - getattr(s2, field)
                    - 3.0 * getattr(s0, field)) / (2.0 * h)

        np.testing.assert_allclose(occ_rate_fock, drift("occ"),
                                   atol=1e-9, rtol=1e-6)
        np.testing.assert_allclose(pair_rate_fock, drift("pair"),
                                   atol=1e-9, rtol=1e-6)


class TestEvolve:
    def test_cavity_decay_matches_closed_form(self):
        # undriven cavities from a one-photon state: pure exponential decay
        p = _effective(omega1=0.0, omega2=0.0, eps=1.0)
        space = fock.cascade_space((4, 4, 2, 2))
        rho0 = space.number_state((1, 0, 0, 0))
        grid = np.arange(0, 81) * 0.025
        traj = fock.evolve(rho0, p, grid)
        np.testing.assert_allclose(
            traj.cavity_n1, np.exp(-2.0 * grid), atol=5e-8)

    def test_trace_and_hermiticity_preserved(self):
        p = _effective(omega1=0.1, omega2=0.1)
        space = fock.cascade_space((4, 4, 6, 6))
        grid = np.arange(0, 21) * 0.05
        traj = fock.evolve(space.vacuum(), p, grid)
        assert traj.valid
        assert traj.trace_drift < 1e-12
        assert traj.herm_defect < 1e-12
        # small negative eigenvalues at the h^4 discretization-error scale
        assert traj.final.min_eigenvalue() >= -1e-8

    def test_truncation_indicator_flags_overflow(self):
        p = _effective(omega1=0.5, omega2=0.5)
        space = fock.cascade_space((2, 2, 2, 2))
        grid = np.arange(0, 41) * 0.05
        traj = fock.evolve(space.vacuum(), p, grid)
        assert not traj.valid
        assert traj.first_invalid_time is not None
        assert traj.first_invalid_time <= grid[-1]

    def test_zero_set_preserved_exactly(self):
        p = _effective(omega1=0.2, omega2=0.3, eps=0.9)
        space = fock.cascade_space((3, 3, 4, 4))
        grid = np.arange(0, 21) * 0.05
        traj = fock.evolve(space.vacuum(), p, grid)
        i, j = 2, 3  # b1, b2
        for m in traj.states:
            assert abs(m.pair[i, i]) <= 1e-15
            assert abs(m.pair[j, j]) <= 1e-15
            assert abs(m.occ[i, j]) <= 1e-15

    def test_step_guard(self):
        p = _effective()
        space = fock.cascade_space((3, 3, 3, 3))
        grid = np.arange(0, 5) * 0.2
        with pytest.raises(ConfigurationError):
            fock.evolve(space.vacuum(), p, grid)


class TestSingleSystem:
    def test_resonant_occupation_is_sinh_squared(self):
        # undamped parametric growth: n_b = sinh^2(Omega t), truncation
        # limited beyond Omega t ~ 0.6 at these cutoffs
        omega = 1.0
        grid = np.arange(0, 101) * 0.005
        traj = fock.single_system_evolve(
            omega, 0.0, 0.0, 0.0, grid, cutoffs=(12, 12))
        expected = np.sinh(omega * grid) ** 2
        np.testing.assert_allclose(traj.n1, expected, atol=1e-6)

    def test_truncation_flag_trips_as_population_climbs(self):
        omega = 1.0
        grid = np.arange(0, 241) * 0.005
        traj = fock.single_system_evolve(
            omega, 0.0, 0.0, 0.0, grid, cutoffs=(12, 12))
        assert not traj.valid
        assert 0.5 < traj.first_invalid_time < 0.8
        # accuracy still holds below the flagged time
        below = grid < 0.5
        np.testing.assert_allclose(
            traj.n1[below], np.sinh(grid[below]) ** 2, atol=1e-6)

    def test_oscillation_guard(self):
        grid = np.arange(0, 11) * 0.02
        with pytest.raises(ConfigurationError):
            fock.single_system_evolve(
                0.1, 1.0, 100.0, 0.0, grid, cutoffs=(3, 3),
                include_counter_rotating=True)

    def test_rwa_check_returns_pair(self):
        grid = np.arange(0, 41) * 0.005
        rot, full = fock.rwa_check(0.1, 1.0, 20.0, 0.0, grid, cutoffs=(4, 4))
        assert rot.valid and full.valid
        # weak drive, short time: the two runs stay close
        assert np.max(np.abs(rot.n1 - full.n1)) < 1e-3


class TestRegression:
    # operators live on the internal two-cavity space with matching cutoffs
    def test_zero_lag_values(self):
        p = _effective(omega1=0.0, omega2=0.0, kappa2=2.0)
        a1, a2 = fock.build_ladder((3, 3))
        tau = np.array([0.0, 0.005])
        s11 = fock.regression_two_time(p, a1, a1.conj().T.tocsr(), tau)
        assert s11[0] == pytest.approx(1.0, abs=1e-12)
        s21 = fock.regression_two_time(p, a2, a1.conj().T.tocsr(), tau)
        assert s21[0] == pytest.approx(0.0, abs=1e-12)

    def test_autocorrelation_decay(self):
        p = _effective(omega1=0.0, omega2=0.0, kappa2=2.0)
        a1, _ = fock.build_ladder((3, 3))
        tau = np.arange(0, 401) * 0.005
        s11 = fock.regression_two_time(p, a1, a1.conj().T.tocsr(), tau)
        np.testing.assert_allclose(
            s11.real, np.exp(-tau), atol=1e-9)
        np.testing.assert_allclose(s11.imag, 0.0, atol=1e-12)

    def test_requires_drives_off(self):
        p = _effective(omega1=0.1, omega2=0.0)
        a1, _ = fock.build_ladder((3, 3))
        with pytest.raises(ConfigurationError):
            fock.regression_two_time(p, a1, a1.conj().T.tocsr(),
                                     np.array([0.0, 0.005]))


class TestTruncationConvergence:
    def test_doubling_cutoffs_leaves_moments_unchanged(self):
        # half-scale instance of the convergence property: doubling the
        # production cross-check cutoffs would need a ~9 GB dense state,
        # so the same drive regime is exercised at smaller cutoffs
        p = _effective(omega1=0.05, omega2=0.05)
        grid = np.arange(0, 41) * 0.05
        runs = []
        for cuts in ((3, 3, 3, 3), (6, 6, 6, 6)):
            space = fock.cascade_space(cuts)
            runs.append(fock.evolve(space.vacuum(), p, grid))
        base, doubled = runs
        assert doubled.valid
        worst = 0.0
        for name in ("var_minus", "var_plus", "n1", "n2",
                     "cavity_n1", "cavity_n2"):
            gap = np.abs(base.series(name) - doubled.series(name)).max()
            worst = max(worst, gap / np.abs(doubled.series(name)).max())
        assert worst < 1e-4
