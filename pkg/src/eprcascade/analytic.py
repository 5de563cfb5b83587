"""Closed-form solutions of the cavity-eliminated cascaded model.

Everything here assumes ground-state initial conditions and equal drive
phases, the case for which the reduced master equation admits explicit
solutions: exponential amplification of oscillator 1, driven damping of
oscillator 2, and the EPR variances built from the cross correlation.
Times are dimensionless (Gamma1 * t) unless a rate argument says
otherwise.

The minimum-variance expressions are typographically intricate, so the
closed form is always cross-checked against direct numerical
minimization of the variance curve; a disagreement beyond 1e-6 raises
``DiagnosticsWarning`` and the numerical value wins.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.optimize import golden

from .errors import ConfigurationError, RangeError, SimulationError

__all__ = [
    "NoMinimumBelowVacuum",
    "DiagnosticsWarning",
    "VarianceReport",
    "occupation_mode1",
    "cross_correlation",
    "occupation_mode2",
    "epr_variance",
    "has_minimum",
    "min_variance",
    "t_min",
    "cavity_mean_decay",
    "cavity_two_time",
    "variance_report",
]

# largest allowed Gamma1*t; keeps exp(2*Gamma1*t) and its square finite
_MAX_GROWTH = 300.0

# relative kappa splitting below which the degenerate-limit branch is used
_DEGENERATE_TOL = 1e-9


class NoMinimumBelowVacuum(SimulationError):
    """The variance never dips below the vacuum level (lambda < 1/(4 eps))."""


class DiagnosticsWarning(UserWarning):
    """Closed form and numerical cross-check disagreed beyond tolerance."""


def _check_rates(gamma1, gamma2, eps, t):
    if gamma1 < 0 or gamma2 < 0:
        raise ConfigurationError("rates must be nonnegative")
    if not 0.0 <= eps <= 1.0:
        raise ConfigurationError("epsilon must lie in [0, 1]")
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ConfigurationError("time must be nonnegative")
    if np.any(gamma1 * t > _MAX_GROWTH):
        raise RangeError(f"Gamma1*t exceeds {_MAX_GROWTH:g}; result would overflow")
    return t


def _coupling(gamma1, gamma2, eps):
    # 2*sqrt(eps*G1*G2)/(G1+G2); zero when both rates vanish
    total = gamma1 + gamma2
    if total == 0.0:
        return 0.0
    return 2.0 * math.sqrt(eps * gamma1 * gamma2) / total


def occupation_mode1(gamma1, t):
    """Mean occupation of the amplified oscillator, exp(2*Gamma1*t) - 1."""
    t = _check_rates(gamma1, 0.0, 1.0, t)
    return np.expm1(2.0 * gamma1 * t)


def cross_correlation(gamma1, gamma2, eps, t):
    """Anomalous cross moment <b1 b2> for vacuum start and equal phases.

    Vanishes identically when the interconnect is closed (eps=0) or when
    both rates are zero.
    """
    t = _check_rates(gamma1, gamma2, eps, t)
    c = _coupling(gamma1, gamma2, eps)
    e1 = np.exp(gamma1 * t)
    return c * e1 * (e1 - np.exp(-gamma2 * t))


def occupation_mode2(gamma1, gamma2, eps, t):
    """Mean occupation of the damped oscillator."""
    t = _check_rates(gamma1, gamma2, eps, t)
    c = _coupling(gamma1, gamma2, eps)
    return (c * (np.exp(gamma1 * t) - np.exp(-gamma2 * t))) ** 2


def epr_variance(gamma1, gamma2, eps, t, sign):
    """Joint quadrature variance 2*[e^{G1 t} +/- c(e^{G1 t} - e^{-G2 t})]^2.

    ``sign="-"`` gives <(X1-X2)^2> = <(P1+P2)^2> (the squeezed pair for
    equal phases), ``sign="+"`` the stretched pair.  The vacuum level is 2.
    """
    if sign not in ("+", "-"):
        raise ConfigurationError("sign must be '+' or '-'")
    t = _check_rates(gamma1, gamma2, eps, t)
    c = _coupling(gamma1, gamma2, eps)
    e1 = np.exp(gamma1 * t)
    cross = c * (e1 - np.exp(-gamma2 * t))
    branch = e1 - cross if sign == "-" else e1 + cross
    return 2.0 * branch * branch


def has_minimum(lam, eps):
    """True when a sub-vacuum variance minimum exists (4*lam*eps >= 1)."""
    _validate_lam_eps(lam, eps)
    return 4.0 * lam * eps >= 1.0


def _validate_lam_eps(lam, eps):
    if lam <= 0:
        raise ConfigurationError("lambda must be positive")
    if not 0.0 < eps <= 1.0:
        raise ConfigurationError("epsilon must lie in (0, 1]")


def _min_variance_closed(lam, eps):
    # verbatim closed form; B -> 0 only for lam=1, eps=1 (monotone decay)
    sqrt_le = math.sqrt(lam * eps)
    b = 1.0 + lam - 2.0 * sqrt_le
    if b <= 0.0:
        return 0.0
    a = 2.0 * math.sqrt(eps) * lam ** 1.5
    p = 1.0 / (1.0 + lam)
    term = a ** p * b ** (1.0 - p) + 2.0 * sqrt_le * (a / b) ** (-lam * p)
    return 2.0 / (1.0 + lam) ** 2 * term * term


def _tmin_closed(lam, eps):
    # dimensionless Gamma1 * t of the variance minimum
    sqrt_le = math.sqrt(lam * eps)
    b = 1.0 + lam - 2.0 * sqrt_le
    if b <= 0.0:
        return math.inf
    return math.log(2.0 * lam * sqrt_le / b) / (1.0 + lam)

def _min_variance_numeric(lam, eps):
    # independent route: coarse log+linear grid, then golden-section polish
    def f(u):
        return epr_variance(1.0, lam, eps, u, "-")

    upper = min(30.0 / (1.0 + lam) + 5.0, _MAX_GROWTH)
    us = np.concatenate(([0.0], np.geomspace(1e-8, upper, 1500)))
    vals = f(us)
    i = int(np.argmin(vals))
    if i == 0:
        return 0.0, 2.0
    lo = us[i - 1]
    hi = us[i + 1] if i + 1 < len(us) else us[-1]
    try:
        u_star = golden(f, brack=(lo, us[i], hi), tol=1e-12)
    except ValueError:
        u_star = us[i]
    return float(u_star), float(f(u_star))


def min_variance(lam, eps):
    """Smallest value of the difference-quadrature variance over time.

    Only defined where the curve actually dips below the vacuum level,
    i.e. for lam >= 1/(4 eps); outside that region
    ``NoMinimumBelowVacuum`` is raised.  The special point lam=1, eps=1
    decays monotonically to zero and returns 0.
    """
    _validate_lam_eps(lam, eps)
    if not has_minimum(lam, eps):
        raise NoMinimumBelowVacuum("no minimum below vacuum")
    closed = _min_variance_closed(lam, eps)
    if not math.isfinite(_tmin_closed(lam, eps)):
        return closed
    _, numeric = _min_variance_numeric(lam, eps)
    if abs(closed - numeric) > 1e-6:
        warnings.warn(
            f"closed-form minimum {closed:.9g} disagrees with numerical "
            f"minimum {numeric:.9g}; using the numerical value",
            DiagnosticsWarning,
            stacklevel=2,
        )
        return numeric
    return closed


def t_min(lam, eps, gamma1=1.0):
    """Time of the variance minimum; infinite for the lam=1, eps=1 decay."""
    _validate_lam_eps(lam, eps)
    if gamma1 <= 0:
        raise ConfigurationError("gamma1 must be positive")
    if not has_minimum(lam, eps):
        raise NoMinimumBelowVacuum("no minimum below vacuum")
    return _tmin_closed(lam, eps) / gamma1


def _degenerate(kappa1, kappa2):
    return abs(kappa2 - kappa1) < _DEGENERATE_TOL * (kappa1 + kappa2)


def cavity_mean_decay(kappa1, kappa2, eps, a1_0, a2_0, t):
    """Mean cavity amplitudes under the cavity-only cascaded evolution.

    Mode 1 decays freely; mode 2 decays while being driven by the mode-1
    output.  The mode-2 expression follows the mean ODE
    d<a2>/dt = -kappa2<a2> - 2 sqrt(eps kappa1 kappa2) <a1>, solved in
    closed form with an explicit kappa1=kappa2 limit.
    """
    if kappa1 <= 0 or kappa2 <= 0:
        raise ConfigurationError("cavity decay rates must be positive")
    if not 0.0 <= eps <= 1.0:
        raise ConfigurationError("epsilon must lie in [0, 1]")
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ConfigurationError("time must be nonnegative")
    e1 = np.exp(-kappa1 * t)
    e2 = np.exp(-kappa2 * t)
    a1_t = e1 * a1_0
    if _degenerate(kappa1, kappa2):
        kappa = 0.5 * (kappa1 + kappa2)
        drive = -2.0 * math.sqrt(eps) * kappa * t * np.exp(-kappa * t)
    else:
        drive = -2.0 * math.sqrt(eps * kappa1 * kappa2) * (e1 - e2) / (kappa2 - kappa1)
    return a1_t, e2 * a2_0 + drive * a1_0


def cavity_two_time(kappa1, kappa2, eps, tau, which):
    """Steady-state two-time correlations of the cavity modes.

    ``which`` selects <a1(tau) a1^dag(0)> ("11"), <a2(tau) a2^dag(0)>
    ("22") or the cross correlation <a2(tau) a1^dag(0)> ("21").  The
    cross term uses the linear-in-tau limit when the decay rates are
    degenerate to within 1e-9 relative.
    """
    if kappa1 <= 0 or kappa2 <= 0:
        raise ConfigurationError("cavity decay rates must be positive")
    if not 0.0 <= eps <= 1.0:
        raise ConfigurationError("epsilon must lie in [0, 1]")
    tau = np.asarray(tau, dtype=float)
    if np.any(tau < 0):
        raise ConfigurationError("tau must be nonnegative")
    if which == "11":
        return np.exp(-kappa1 * tau)
    if which == "22":
        return np.exp(-kappa2 * tau)
    if which == "21":
        if _degenerate(kappa1, kappa2):
            kappa = 0.5 * (kappa1 + kappa2)
            return -2.0 * math.sqrt(eps) * kappa * tau * np.exp(-kappa * tau)
        return (
            2.0
            * math.sqrt(kappa1 * kappa2 * eps)
            / (kappa2 - kappa1)
            * (np.exp(-kappa2 * tau) - np.exp(-kappa1 * tau))
        )
    raise ConfigurationError("which must be one of '11', '22', '21'")


@dataclass(frozen=True)
class VarianceReport:
    """Closed-form variance curves on a time grid plus the global minimum.

    ``min_var_minus``/``t_at_min`` come from the closed-form minimum when
    one exists at finite time, otherwise from the evaluated grid.
    """

    grid: np.ndarray
    var_minus: np.ndarray
    var_plus: np.ndarray
    n1: np.ndarray
    n2: np.ndarray
    cross: np.ndarray
    min_var_minus: float
    t_at_min: float


def variance_report(gamma1, gamma2, eps, t_grid) -> VarianceReport:
    """Evaluate all closed-form series on ``t_grid`` (real time units)."""
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.size == 0:
        raise ConfigurationError("empty time grid")
    vm = epr_variance(gamma1, gamma2, eps, t_grid, "-")
    vp = epr_variance(gamma1, gamma2, eps, t_grid, "+")
    n1 = occupation_mode1(gamma1, t_grid)
    n2 = occupation_mode2(gamma1, gamma2, eps, t_grid)
    cc = cross_correlation(gamma1, gamma2, eps, t_grid)
    lam = gamma2 / gamma1 if gamma1 > 0 else None
    min_v, t_at = None, None
    if lam is not None and eps > 0 and has_minimum(lam, eps):
        tm = t_min(lam, eps, gamma1)
        if math.isfinite(tm):
            min_v = min_variance(lam, eps)
            t_at = tm
    if min_v is None:
        i = int(np.argmin(vm))
        min_v, t_at = float(vm[i]), float(t_grid[i])
    return VarianceReport(
        grid=t_grid,
        var_minus=vm,
        var_plus=vp,
        n1=n1,
        n2=n2,
        cross=cc,
        min_var_minus=min_v,
        t_at_min=t_at,
    )
