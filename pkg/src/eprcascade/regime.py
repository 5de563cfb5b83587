"""Validity-condition calculators for the approximations behind the model.

Each condition is reported as (value, threshold, margin, passed) with
margin = value / threshold; a condition passes when its margin reaches 1
(sitting exactly at the threshold counts as just passing).  Thresholds for
the "much greater than" conditions default to one order of magnitude and
can be overridden per call.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ConfigurationError, RangeError
from .params import PhysicalParams, as_schedule

__all__ = [
    "RegimeCondition",
    "RegimeReport",
    "lamb_dicke_bound",
    "lamb_dicke_bound_exact",
    "strong_coupling_figure",
    "rwa_margins",
    "laser_offset",
    "full_report",
]

RWA_FACTOR = 10.0            # "at least an order of magnitude"
STRONG_COUPLING_THRESHOLD = 10.0


def lamb_dicke_bound(eta, a=3.0):
    """Maximum mean phonon number consistent with the Lamb-Dicke expansion.

    Derived from (eta^2/2)(1 + nbar + a*sigma) << 1 with the thermal-like
    spread sigma ~ nbar + 1/2, taken at equality.  ``a`` is the number of
    standard deviations of the phonon distribution to allow for; the
    default a=3 gives 1/(2 eta^2) - 5/8.
    """
    eta = float(eta)
    if eta <= 0:
        raise ConfigurationError("Lamb-Dicke parameter must be positive")
    if eta >= 1:
        raise RangeError(f"eta = {eta:g} >= 1: Lamb-Dicke regime impossible")
    a = float(a)
    if a < 0:
        raise ConfigurationError("spread multiplier must be >= 0")
    return (2.0 / eta**2 - 1.0 - 0.5 * a) / (1.0 + a)


def lamb_dicke_bound_exact(eta, sigma, a=3.0):
    """Same bound but with a measured phonon-number spread ``sigma``."""
    eta = float(eta)
    if eta <= 0:
        raise ConfigurationError("Lamb-Dicke parameter must be positive")
    if eta >= 1:
        raise RangeError(f"eta = {eta:g} >= 1: Lamb-Dicke regime impossible")
    if sigma < 0:
        raise ConfigurationError("phonon-number spread must be >= 0")
    return 2.0 / eta**2 - 1.0 - float(a) * float(sigma)


def strong_coupling_figure(g0, kappa, gamma):
    """Strong-coupling figure 10*g0^2/(kappa*gamma); pass when above 10."""
    if kappa <= 0 or gamma <= 0:
        raise ConfigurationError("kappa and gamma must be positive")
    return 10.0 * float(g0) ** 2 / (float(kappa) * float(gamma))


def rwa_margins(nu, omega_max, kappa):
    """Ratios (nu/omega_max, nu/kappa) governing the rotating-wave step."""
    if nu <= 0 or omega_max <= 0 or kappa <= 0:
        raise ConfigurationError("nu, omega_max and kappa must be positive")
    return float(nu) / float(omega_max), float(nu) / float(kappa)


def laser_offset(nu1, nu2):
    """Difference of driving-laser frequencies giving equal cavity frequencies."""
    if nu1 <= 0 or nu2 <= 0:
        raise ConfigurationError("trap frequencies must be positive")
    return float(nu1) + float(nu2)


@dataclass(frozen=True)
class RegimeCondition:
    name: str
    value: float
    threshold: float
    margin: float
    passed: bool

    def to_dict(self):
        return {
            "name": self.name,
            "value": self.value,
            "threshold": self.threshold,
            "margin": self.margin,
            "passed": self.passed,
        }


@dataclass(frozen=True)
class RegimeReport:
    """All validity conditions plus the derived operating point."""

    conditions: tuple
    derived: dict

    @property
    def all_pass(self):
        return all(c.passed for c in self.conditions)

    def condition(self, name):
        for c in self.conditions:
            if c.name == name:
                return c
        raise ConfigurationError(f"no condition named {name!r}")

    def to_dict(self):
        return {
            "conditions": [c.to_dict() for c in self.conditions],
            "derived": dict(self.derived),
            "all_pass": self.all_pass,
        }


def _condition(name, value, threshold):
    margin = value / threshold
    return RegimeCondition(
        name=name,
        value=float(value),
        threshold=float(threshold),
        margin=float(margin),
        passed=bool(margin >= 1.0),
    )


def _omega_max(p, j):
    sub = p.subsystem(j)
    amp = sub.laser_amplitude
    if isinstance(amp, (int, float)):
        peak = abs(float(amp))
    else:
        peak = as_schedule(amp).max_abs()
    return abs(sub.lamb_dicke * sub.atom_cavity_coupling * peak
               / sub.atom_laser_detuning)


def full_report(p: PhysicalParams, nbar_max, *,
                rwa_factor=RWA_FACTOR,
                strong_coupling_threshold=STRONG_COUPLING_THRESHOLD):
    """Evaluate every validity condition for an operating point.

    ``nbar_max`` is the largest mean phonon number the planned run reaches
    (apply the occupation law or a trial integration to estimate it).
    """
    nbar_max = float(nbar_max)
    if nbar_max < 0:
        raise ConfigurationError("nbar_max must be >= 0")

    conditions = []
    derived = {}
    for j in (1, 2):
        sub = p.subsystem(j)
        try:
            bound = lamb_dicke_bound(sub.lamb_dicke)
        except (ConfigurationError, RangeError) as exc:
            raise type(exc)(f"lamb_dicke_{j}: {exc}") from exc
        # bound/nbar as the margin: headroom above the planned excursion
        conditions.append(_condition(
            f"lamb_dicke_{j}", bound, max(nbar_max, 1e-300)))

        figure = strong_coupling_figure(
            sub.atom_cavity_coupling, sub.cavity_decay, sub.atomic_linewidth)
        conditions.append(_condition(
            f"strong_coupling_{j}", figure, strong_coupling_threshold))

        omega = _omega_max(p, j)
        if omega <= 0:
            raise ConfigurationError(f"rwa_{j}: effective coupling vanishes")
        ratio_omega, ratio_kappa = rwa_margins(
            sub.trap_frequency, omega, sub.cavity_decay)
        conditions.append(_condition(
            f"rwa_coupling_{j}", ratio_omega, rwa_factor))
        conditions.append(_condition(
            f"rwa_cavity_{j}", ratio_kappa, rwa_factor))

        gamma_j = omega**2 / sub.cavity_decay
        derived[f"omega_{j}"] = omega
        derived[f"gamma_{j}"] = gamma_j

    derived["lambda"] = derived["gamma_2"] / derived["gamma_1"]
    derived["laser_offset"] = laser_offset(
        p.subsystem1.trap_frequency, p.subsystem2.trap_frequency)
    derived["nbar_max"] = nbar_max
    return RegimeReport(conditions=tuple(conditions), derived=derived)
