import numpy as np
import pytest

from eprcascade.errors import ConfigurationError
from eprcascade.params import (
    Constant,
    EffectiveParams,
    PhysicalParams,
    ReducedRates,
    SineRamp,
    SubsystemParams,
    Tabulated,
    as_schedule,
    effective_coupling,
    reduced_rates,
)


def _subsystem(**overrides):
    base = dict(
        lamb_dicke=0.1,
        atom_cavity_coupling=10.0,
        laser_amplitude=50.0,
        atom_laser_detuning=500.0,
        trap_frequency=2.0,
        atomic_linewidth=5.0,
        cavity_decay=0.1,
    )
    base.update(overrides)
    return SubsystemParams(**base)


class TestSchedules:
    def test_constant(self):
        s = Constant(0.3)
        assert s(0.0) == 0.3
        assert s(17.2) == 0.3
        assert s.max_abs() == 0.3
        assert s.is_constant()

    def test_sine_ramp_shape(self):
        s = SineRamp(2.0, 10.0)
        assert s(0.0) == 0.0
        assert s(5.0 * np.pi) == pytest.approx(2.0)
        assert s.max_abs() == 2.0
        assert not s.is_constant()

    def test_sine_ramp_holds_at_first_maximum(self):
        s = SineRamp(1.0, 20.0)
        ts = np.linspace(0.0, 120.0, 49)
        quarter = 10.0 * np.pi
        expected = np.where(ts < quarter, np.sin(ts / 20.0), 1.0)
        np.testing.assert_allclose(s(ts), expected, atol=1e-15)

    def test_tabulated_interpolates(self):
        s = Tabulated((0.0, 1.0, 2.0), (0.0, 2.0, 0.0))
        assert s(0.5) == pytest.approx(1.0)
        assert s(1.5) == pytest.approx(1.0)
        assert s.max_abs() == 2.0
        assert not s.is_constant()

    def test_tabulated_clamps_outside_range(self):
        s = Tabulated((0.0, 1.0), (1.0, 3.0))
        assert s(-5.0) == pytest.approx(1.0)
        assert s(9.0) == pytest.approx(3.0)

    def test_as_schedule_wraps_numbers(self):
        s = as_schedule(0.25)
        assert isinstance(s, Constant)
        assert s(3.0) == 0.25
        ramp = SineRamp(1.0, 5.0)
        assert as_schedule(ramp) is ramp


class TestEffectiveParams:
    def test_max_rate_covers_all_rates(self):
        p = EffectiveParams(
            kappa1=1.0,
            kappa2=3.0,
            schedule1=Constant(0.5),
            schedule2=SineRamp(4.0, 10.0),
        )
        assert p.max_rate() == 4.0

    def test_rejects_nonpositive_kappa(self):
        with pytest.raises(ConfigurationError):
            EffectiveParams(
                kappa1=0.0, kappa2=1.0,
                schedule1=Constant(0.1), schedule2=Constant(0.1))

    def test_rejects_bad_epsilon(self):
        with pytest.raises(ConfigurationError):
            EffectiveParams(
                kappa1=1.0, kappa2=1.0,
                schedule1=Constant(0.1), schedule2=Constant(0.1),
                epsilon=1.2)


class TestReducedRates:
    def test_ratio(self):
        assert ReducedRates(0.5, 1.5).ratio == pytest.approx(3.0)

    def test_rejects_negative(self):
        with pytest.raises(ConfigurationError):
            ReducedRates(-0.1, 1.0)

    def test_from_effective_constant(self):
        p = EffectiveParams(
            kappa1=2.0, kappa2=4.0,
            schedule1=Constant(0.2), schedule2=Constant(0.4))
        r = reduced_rates(p)
        assert r.gamma1 == pytest.approx(0.04 / 2.0)
        assert r.gamma2 == pytest.approx(0.16 / 4.0)

    def test_from_effective_sampled(self):
        p = EffectiveParams(
            kappa1=1.0, kappa2=1.0,
            schedule1=SineRamp(1.0, 20.0), schedule2=Constant(1.0))
        r = reduced_rates(p, t=10.0 * np.pi)
        assert r.gamma1 == pytest.approx(1.0)

    def test_time_dependent_needs_time(self):
        p = EffectiveParams(
            kappa1=1.0, kappa2=1.0,
            schedule1=SineRamp(1.0, 20.0), schedule2=Constant(1.0))
        with pytest.raises(ConfigurationError):
            reduced_rates(p)


class TestPhysical:
    def test_effective_coupling_raman_form(self):
        p = PhysicalParams(subsystem1=_subsystem(), subsystem2=_subsystem())
        # -eta g0 E / Delta
        assert effective_coupling(p, 1) == pytest.approx(
            -0.1 * 10.0 * 50.0 / 500.0)

    def test_effective_coupling_schedule_amplitude(self):
        sub = _subsystem(laser_amplitude=SineRamp(50.0, 20.0))
        p = PhysicalParams(subsystem1=sub, subsystem2=_subsystem())
        assert effective_coupling(p, 1, t=0.0) == 0.0
        assert effective_coupling(p, 1, t=10.0 * np.pi) == pytest.approx(-0.1)

    def test_subsystem_lookup(self):
        s1 = _subsystem()
        s2 = _subsystem(cavity_decay=0.2)
        p = PhysicalParams(subsystem1=s1, subsystem2=s2)
        assert p.subsystem(1) is s1
        assert p.subsystem(2) is s2
        with pytest.raises(ConfigurationError):
            p.subsystem(3)
