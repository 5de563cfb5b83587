"""Parameter containers and the physical-to-effective parameter maps.

Two layers of description are used throughout the package.  The physical
layer holds per-subsystem trap and cavity numbers (Lamb-Dicke factor,
atom-cavity coupling, laser drive, detunings, decay rates).  The
effective layer is what the dynamical engines consume: two cavity decay
rates, two drive phases, the interconnect efficiency and one coupling
schedule per subsystem.  The map between them is

    Omega_j(t) = -eta_j g0_j E_j(t) / Delta_j      (hbar = 1)

and the adiabatic (cavity-eliminated) description reduces further to the
phonon rates Gamma_j = Omega_j**2 / kappa_j.

All rates and times are expressed in units of kappa1 unless a scenario
says otherwise; the code never converts units on its own.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError

__all__ = [
    "Constant",
    "SineRamp",
    "Tabulated",
    "SubsystemParams",
    "PhysicalParams",
    "EffectiveParams",
    "ReducedRates",
    "as_schedule",
    "effective_coupling",
    "reduced_rates",
]


# ---------------------------------------------------------------------------
# coupling schedules


@dataclass(frozen=True)
class Constant:
    """Time-independent coupling amplitude."""

    omega: float

    def __call__(self, t):
        return self.omega * np.ones_like(np.asarray(t, dtype=float))

    def max_abs(self):
        return abs(self.omega)

    def is_constant(self):
        return True


@dataclass(frozen=True)
class SineRamp:
    """Smooth switch-on ``omega_max * sin(t / tau)`` held at its first maximum.

    For ``t >= pi * tau / 2`` the value stays at ``omega_max``; this is the
    ramp used for the pulsed runs where the drive is turned on slowly
    compared with the cavity decay.
    """

    omega_max: float
    tau: float

    def __post_init__(self):
        if self.tau <= 0:
            raise ConfigurationError("SineRamp tau must be positive")

    def __call__(self, t):
        phase = np.minimum(np.asarray(t, dtype=float) / self.tau, 0.5 * math.pi)
        return self.omega_max * np.sin(phase)

    def max_abs(self):
        return abs(self.omega_max)

    def is_constant(self):
        return False


@dataclass(frozen=True)
class Tabulated:
    """Piecewise-linear schedule through ``(times, values)`` samples.

    Outside the tabulated range the endpoint values are held constant.
    """

    times: tuple
    values: tuple

    def __post_init__(self):
        times = tuple(float(x) for x in self.times)
        values = tuple(float(x) for x in self.values)
        if len(times) != len(values) or len(times) < 2:
            raise ConfigurationError(
                "Tabulated schedule needs matching times/values with >= 2 samples"
            )
        if any(b <= a for a, b in zip(times, times[1:])):
            raise ConfigurationError("Tabulated times must be strictly increasing")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)

    def __call__(self, t):
        return np.interp(np.asarray(t, dtype=float), self.times, self.values)

    def max_abs(self):
        return max(abs(v) for v in self.values)

    def is_constant(self):
        return len(set(self.values)) == 1


def as_schedule(value):
    """Coerce a bare number to a Constant schedule; pass schedules through."""
    if isinstance(value, (Constant, SineRamp, Tabulated)):
        return value
    if isinstance(value, (int, float)):
        return Constant(float(value))
    raise ConfigurationError(f"not a coupling schedule: {value!r}")


# ---------------------------------------------------------------------------
# parameter containers


@dataclass(frozen=True)
class SubsystemParams:
    """Physical numbers for one atom-cavity subsystem (angular frequencies)."""

    lamb_dicke: float
    atom_cavity_coupling: float
    laser_amplitude: float
    atom_laser_detuning: float
    trap_frequency: float
    atomic_linewidth: float
    cavity_decay: float

    def __post_init__(self):
        if self.lamb_dicke <= 0:
            raise ConfigurationError("lamb_dicke must be positive")
        for name in ("atom_cavity_coupling", "trap_frequency", "atomic_linewidth", "cavity_decay"):
            if getattr(self, name) <= 0:
                raise ConfigurationError(f"{name} must be positive")
        if self.atom_laser_detuning == 0:
            raise ConfigurationError("atom_laser_detuning must be nonzero")


@dataclass(frozen=True)
class PhysicalParams:
    """The two subsystems plus the interconnect efficiency."""

    subsystem1: SubsystemParams
    subsystem2: SubsystemParams
    epsilon: float = 1.0

    def __post_init__(self):
        if not 0.0 <= self.epsilon <= 1.0:
            raise ConfigurationError("epsilon must lie in [0, 1]")

    def subsystem(self, j):
        if j == 1:
            return self.subsystem1
        if j == 2:
            return self.subsystem2
        raise ConfigurationError("subsystem index must be 1 or 2")


@dataclass(frozen=True)
class EffectiveParams:
    """Inputs for the cascaded two-cavity model.

    ``schedule1`` drives the parametric (pair-creation) interaction in
    subsystem 1, ``schedule2`` the beamsplitter interaction in subsystem 2.
    ``epsilon`` is the fraction of cavity-1 output reaching cavity 2.
    """

    kappa1: float
    kappa2: float
    schedule1: Constant | SineRamp | Tabulated
    schedule2: Constant | SineRamp | Tabulated
    epsilon: float = 1.0
    phi1: float = 0.0
    phi2: float = 0.0

    def __post_init__(self):
        if self.kappa1 <= 0 or self.kappa2 <= 0:
            raise ConfigurationError("cavity decay rates must be positive")
        if not 0.0 <= self.epsilon <= 1.0:
            raise ConfigurationError("epsilon must lie in [0, 1]")
        object.__setattr__(self, "schedule1", as_schedule(self.schedule1))
        object.__setattr__(self, "schedule2", as_schedule(self.schedule2))

    def max_rate(self):
        """Largest rate in the model, used by the step-size guard."""
        return max(
            self.kappa1,
            self.kappa2,
            self.schedule1.max_abs(),
            self.schedule2.max_abs(),
        )


@dataclass(frozen=True)
class ReducedRates:
    """Phonon-level rates of the cavity-eliminated model.

    ``gamma1`` is the heating (amplification) rate of oscillator 1,
    ``gamma2`` the damping rate of oscillator 2.
    """

    gamma1: float
    gamma2: float

    def __post_init__(self):
        if self.gamma1 < 0 or self.gamma2 < 0:
            raise ConfigurationError("reduced rates must be nonnegative")

    @property
    def ratio(self):
        """gamma2 / gamma1, the damping-to-amplification ratio."""
        if self.gamma1 == 0:
            raise ConfigurationError("ratio undefined for gamma1 = 0")
        return self.gamma2 / self.gamma1


# ---------------------------------------------------------------------------
# operations


def effective_coupling(p: PhysicalParams, j: int, t: float = 0.0):
    """Effective drive amplitude Omega_j(t) of subsystem ``j``.

    Computed from the Raman scheme as ``-eta g0 E(t) / Delta`` with
    hbar = 1.  ``laser_amplitude`` may be a plain number or a schedule,
    in which case it is evaluated at ``t``.

    Parameters
    ----------
    p : PhysicalParams
    j : int
        Subsystem index, 1 or 2.
    t : float
        Evaluation time, only relevant for a time-dependent amplitude.

    Returns
    -------
    float or ndarray
    """
    s = p.subsystem(j)
    amp = s.laser_amplitude
    value = amp(t) if callable(amp) else amp
    return -s.lamb_dicke * s.atom_cavity_coupling * value / s.atom_laser_detuning


def reduced_rates(p: EffectiveParams, t: float | None = None) -> ReducedRates:
    """Adiabatic-elimination rates Gamma_j = Omega_j**2 / kappa_j.

    With ``t`` omitted both schedules must be constant; otherwise the
    schedules are sampled at ``t``, which is how the reduced engine
    handles slowly ramped drives.
    """
    if t is None:
        if not (p.schedule1.is_constant() and p.schedule2.is_constant()):
            raise ConfigurationError(
                "reduced_rates without a time needs constant coupling schedules"
            )
        o1 = float(np.asarray(p.schedule1(0.0)))
        o2 = float(np.asarray(p.schedule2(0.0)))
    else:
        o1 = float(np.asarray(p.schedule1(t)))
        o2 = float(np.asarray(p.schedule2(t)))
    return ReducedRates(gamma1=o1 * o1 / p.kappa1, gamma2=o2 * o2 / p.kappa2)
