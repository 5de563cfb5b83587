"""End-to-end acceptance tests for the toolkit's headline results.

Each test covers one numbered acceptance criterion and reports a one-line
verdict through the ``acceptance_record`` fixture (collected into the
terminal summary).  The two expensive computations, the dual-engine
cross-check and the counter-rotating convergence study, are shared through
module-scoped fixtures; the whole file runs in roughly ten minutes, nearly
all of it in those two fixtures.
"""

import numpy as np
import pytest

from eprcascade import (
    Constant,
    EffectiveParams,
    NoMinimumBelowVacuum,
    ReducedRates,
    SineRamp,
    analytic,
    first_crossing,
    fock,
    integrate_adiabatic,
    integrate_full,
    vacuum_state,
)

# Cutoffs for the dual-engine cross-check.  With only five a2 levels the
# a2 top-level population crests at 1.5e-6 near t = 4, tripping the
# truncation indicator; one extra level clears it with a wide margin while
# leaving the moment gap unchanged at the 1e-7 level.
EQUIV_CUTOFFS = (5, 6, 7, 7)

MONITORED_SERIES = ("var_minus", "var_plus", "n1", "n2",
                    "cavity_n1", "cavity_n2")


@pytest.fixture(scope="module")
def dual_engine_runs():
    """Full Gaussian engine vs truncated-basis engine on the same drive."""
    grid = np.arange(0, 101) * 0.05
    p = EffectiveParams(kappa1=1.0, kappa2=1.0, schedule1=Constant(0.1),
                        schedule2=Constant(0.1), epsilon=1.0)
    gauss = integrate_full(p, grid)
    space = fock.cascade_space(EQUIV_CUTOFFS)
    exact = fock.evolve(space.vacuum(), p, grid)
    return grid, gauss, exact


@pytest.fixture(scope="module")
def counter_rotating_runs():
    """Rotating-wave run plus counter-rotating runs at increasing nu.

    All four runs share kappa = 1, Omega = 0.1 (so Gamma1 = 0.01) and cover
    Gamma1 t <= 0.5.  The counter-rotating grids refine the 0.025 base step
    by integer strides so their samples land exactly on the coarse grid;
    each step also satisfies h * 2 nu <= 0.5.
    """
    kappa, omega, cutoffs = 1.0, 0.1, (6, 32)
    base_h, nsteps = 0.025, 2000
    coarse = np.arange(0, nsteps + 1) * base_h
    rot = fock.single_system_evolve(omega, kappa, 10.0, 0.0, coarse,
                                    cutoffs=cutoffs)
    deviations = {}
    valid = rot.valid
    for nu, stride in ((10.0, 2), (30.0, 4), (100.0, 10)):
        fine = np.arange(0, nsteps * stride + 1) * (base_h / stride)
        full = fock.single_system_evolve(
            omega, kappa, nu, 0.0, fine, cutoffs=cutoffs,
            include_counter_rotating=True)
        valid = valid and full.valid
        gap = np.abs(full.n1[::stride] - rot.n1)
        deviations[nu] = float(gap.max() / rot.n1.max())
    return deviations, valid


def test_minimum_variance_landscape(acceptance_record):
    lams = np.arange(30, 501) / 100.0
    details = []
    for eps, v_ref, lam_ref in ((0.9, 0.30, 1.46), (0.8, 0.54, 1.95)):
        # below lam = 1/(4 eps) the curve never dips under the vacuum
        # level, so those sweep points carry no minimum
        values = np.full(lams.size, np.inf)
        for i, lam in enumerate(lams):
            try:
                values[i] = analytic.min_variance(lam, eps)
            except NoMinimumBelowVacuum:
                assert lam < 1.0 / (4.0 * eps)
        k = int(values.argmin())
        assert abs(values[k] - v_ref) <= 0.01
        assert abs(lams[k] - lam_ref) <= 0.02
        details.append(f"eps={eps}: min {values[k]:.4f} at lam {lams[k]:.2f}")
    acceptance_record(1, "; ".join(details))


def test_spot_minimum_and_reduction(acceptance_record):
    v = analytic.min_variance(2.0, 0.8)
    t_star = analytic.t_min(2.0, 0.8)
    reduction = 1.0 - v / 2.0
    assert abs(v - 0.54) <= 0.01
    assert abs(t_star - 0.8) <= 0.02
    assert 0.72 <= reduction <= 0.74
    acceptance_record(
        2, f"min {v:.4f} at Gamma1 t = {t_star:.4f} "
           f"({100 * reduction:.1f}% below vacuum)")


def test_ideal_decay_exactness(acceptance_record):
    grid = np.linspace(0.0, 3.0, 1000)
    closed = 2.0 * np.exp(-2.0 * grid)
    gap = np.abs(analytic.epr_variance(1.0, 1.0, 1.0, grid, "-") - closed)
    assert gap.max() < 1e-12
    traj = integrate_adiabatic(ReducedRates(1.0, 1.0), grid, eps=1.0)
    rel = np.abs(traj.var_minus - closed) / closed
    assert rel.max() < 1e-8
    acceptance_record(
        3, f"closed-form gap {gap.max():.2e}, "
           f"engine relative error {rel.max():.2e}")


def test_occupation_growth_spot(acceptance_record):
    grid = np.linspace(0.0, 1.0, 201)
    traj = integrate_adiabatic(ReducedRates(1.0, 1.0), grid, eps=1.0)
    err = abs(traj.n1[-1] - (np.e ** 2 - 1.0))
    assert err < 1e-6
    acceptance_record(4, f"n1(Gamma1 t = 1) = {traj.n1[-1]:.9f} "
                         f"(error {err:.2e})")


def test_gaussian_fock_equivalence(dual_engine_runs, acceptance_record):
    _, gauss, exact = dual_engine_runs
    assert exact.valid
    assert exact.first_invalid_time is None
    worst = 0.0
    for name in MONITORED_SERIES:
        ref = exact.series(name)
        gap = np.abs(gauss.series(name) - ref).max()
        worst = max(worst, gap / np.abs(ref).max())
    assert worst < 1e-3
    acceptance_record(
        5, f"max relative series gap {worst:.2e}, truncation indicator "
           f"satisfied at cutoffs {EQUIV_CUTOFFS}")


def test_adiabatic_degradation(acceptance_record):
    grid = np.arange(0, 10001) * 0.02
    minima, gaps = [], []
    for omega in (0.1, 0.2, 0.5):
        p = EffectiveParams(kappa1=1.0, kappa2=1.0,
                            schedule1=Constant(omega),
                            schedule2=Constant(omega), epsilon=1.0)
        traj = integrate_full(p, grid)
        gamma1 = omega * omega
        predicted = 2.0 * np.exp(-2.0 * gamma1 * grid[-1])
        minima.append(float(traj.var_minus.min()))
        gaps.append(minima[-1] - predicted)
    assert minima[0] < minima[1] < minima[2]
    assert gaps[2] > 5.0 * gaps[0]
    acceptance_record(
        6, f"minima {minima[0]:.4f} < {minima[1]:.4f} < {minima[2]:.4f}, "
           f"gap ratio {gaps[2] / gaps[0]:.1f}")


def test_ramped_drive_threshold_occupation(acceptance_record):
    grid = np.arange(0, 24001) * 0.005
    occupations = []
    for tau in (20.0, 25.0, 30.0):
        p = EffectiveParams(kappa1=10.0, kappa2=10.0,
                            schedule1=SineRamp(1.0, tau),
                            schedule2=Constant(1.0), epsilon=1.0)
        traj = integrate_full(p, grid)
        t_cross, _ = first_crossing(grid, traj.var_minus, 0.2)
        assert t_cross is not None
        n1 = float(np.interp(t_cross, grid, traj.n1))
        assert 2.0 <= n1 <= 3.5
        occupations.append(n1)
    grid_const = np.arange(0, 8001) * 0.005
    p = EffectiveParams(kappa1=10.0, kappa2=10.0, schedule1=Constant(1.0),
                        schedule2=Constant(1.0), epsilon=1.0)
    traj = integrate_full(p, grid_const)
    t_cross, _ = first_crossing(grid_const, traj.var_minus, 0.2)
    assert t_cross is not None
    n1_const = float(np.interp(t_cross, grid_const, traj.n1))
    assert n1_const > 10.0
    acceptance_record(
        7, "n1 at var_minus = 0.2: "
           + ", ".join(f"{v:.3f}" for v in occupations)
           + f" (ramped) vs {n1_const:.3f} (constant)")


def test_two_time_regression(acceptance_record):
    eps = 0.81
    taus = np.arange(0, 401) * 0.005
    limit = -2.0 * np.sqrt(eps) * taus * np.exp(-taus)
    a1, a2 = fock.build_ladder((3, 3))
    worst = 0.0
    degenerate_gap = 0.0
    for kappa2 in (2.0, 1.0 + 1e-6, 1.0 - 1e-6):
        p = EffectiveParams(kappa1=1.0, kappa2=kappa2,
                            schedule1=Constant(0.0), schedule2=Constant(0.0),
                            epsilon=eps)
        s11 = fock.regression_two_time(p, a1, a1.conj().T, taus, cutoffs=(3, 3))
        s21 = fock.regression_two_time(p, a2, a1.conj().T, taus, cutoffs=(3, 3))
        worst = max(
            worst,
            np.abs(s11 - analytic.cavity_two_time(1.0, kappa2, eps, taus,
                                                  "11")).max(),
            np.abs(s21 - analytic.cavity_two_time(1.0, kappa2, eps, taus,
                                                  "21")).max(),
        )
        if abs(kappa2 - 1.0) < 1e-3:
            degenerate_gap = max(degenerate_gap,
                                 float(np.abs(s21 - limit).max()))
    assert worst < 1e-8
    assert degenerate_gap < 1e-6
    acceptance_record(
        8, f"regression vs closed form {worst:.2e}; near-degenerate runs "
           f"within {degenerate_gap:.2e} of the -2 sqrt(eps) kt e^-kt limit")


def test_counter_rotating_convergence(counter_rotating_runs,
                                      acceptance_record):
    deviations, valid = counter_rotating_runs
    assert valid
    assert deviations[10.0] < 0.03
    assert deviations[10.0] > deviations[30.0] > deviations[100.0]
    acceptance_record(
        9, "n1 deviation vs rotating-wave run: "
           + ", ".join(f"{dev:.2e} (nu={nu:g})"
                       for nu, dev in sorted(deviations.items())))


def test_invariant_suites(rng, dual_engine_runs, acceptance_record):
    # minimum-time sign on a random parameter grid
    lams = rng.uniform(0.05, 5.0, size=200)
    epss = rng.uniform(0.05, 1.0, size=200)
    for lam, eps in zip(lams, epss):
        if lam > 1.0 / (4.0 * eps):
            assert analytic.t_min(lam, eps) > 0.0
        else:
            assert not analytic.has_minimum(lam, eps)
            with pytest.raises(NoMinimumBelowVacuum):
                analytic.t_min(lam, eps)

    # symplectic physicality of the full-engine states; the defect is pure
    # discretization error and shrinks 16x per step halving, so the 1e-8
    # tolerance pins the step (h = 0.05 sits at -1.3e-8, h = 0.02 well under)
    _, gauss, exact = dual_engine_runs
    p = EffectiveParams(kappa1=1.0, kappa2=1.0, schedule1=Constant(0.1),
                        schedule2=Constant(0.1), epsilon=1.0)
    refined = integrate_full(p, np.arange(0, 251) * 0.02)
    defects = [s.symplectic_defect() for s in refined.states]
    assert min(defects) >= -1e-8
    assert vacuum_state().symplectic_defect() >= -1e-12

    # density-matrix invariants at the end of the truncated-basis run
    assert exact.trace_drift <= 1e-8
    assert exact.herm_defect <= 1e-10
    assert exact.final.check() == []

    # zero-set preservation: <b1 b1>, <b2 b2>, <b1^dag b2> stay zero
    adiabatic = integrate_adiabatic(ReducedRates(1.0, 2.0),
                                    np.linspace(0.0, 2.0, 401), eps=0.9)
    for traj in (gauss, exact, adiabatic):
        for state in traj.states:
            i = state.index("b1")
            j = state.index("b2")
            assert abs(state.pair[i, i]) <= 1e-12
            assert abs(state.pair[j, j]) <= 1e-12
            assert abs(state.occ[i, j]) <= 1e-12

    # the stretched quadrature pair never dips below the vacuum level
    assert gauss.var_plus.min() >= 2.0 - 1e-9
    assert exact.var_plus.min() >= 2.0 - 1e-9
    assert adiabatic.var_plus.min() >= 2.0 - 1e-12
    for lam, eps in zip(lams[:50], epss[:50]):
        ts = rng.uniform(0.0, 2.0, size=8)
        assert np.all(
            analytic.epr_variance(1.0, lam, eps, ts, "+") >= 2.0 - 1e-12)

    acceptance_record(
        10, "t_min sign (200 draws), symplectic defect "
            f">= {min(defects):.1e}, density-matrix checks clean, "
            "zero set <= 1e-12, var_plus >= 2")
