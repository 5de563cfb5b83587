"""Classical fixed-step 4th-order Runge-Kutta stepping.

Fixed step keeps runs bit-reproducible; adaptive control is deliberately
absent.  The state may be any complex ndarray; the right-hand side must
return an array of the same shape.
"""

from __future__ import annotations

import numpy as np

from .errors import ConfigurationError

__all__ = ["rk4_step", "uniform_spacing", "enforce_step_guard", "STEP_GUARD"]

# largest dimensionless step h * max_rate accepted by the fixed-step engines
STEP_GUARD = 0.05


def rk4_step(f, t, y, h):
    """Advance ``y`` from ``t`` to ``t + h`` with one classical RK4 step.

    Parameters
    ----------
    f : callable
        Right-hand side ``f(t, y) -> dy/dt``.
    t : float
        Current time.
    y : ndarray
        Current state.
    h : float
        Step size.

    Returns
    -------
    ndarray
        State at ``t + h``.
    """
    k1 = f(t, y)
    k2 = f(t + 0.5 * h, y + 0.5 * h * k1)
    k3 = f(t + 0.5 * h, y + 0.5 * h * k2)
    k4 = f(t + h, y + h * k3)
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def uniform_spacing(grid):
    """Return the common spacing of ``grid``, validating uniformity."""
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size < 2:
        raise ConfigurationError("grid must be a 1-D array with at least two points")
    steps = np.diff(grid)
    if np.any(steps <= 0):
        raise ConfigurationError("grid must be strictly increasing")
    h = steps[0]
    if not np.allclose(steps, h, rtol=1e-8, atol=0.0):
        raise ConfigurationError("grid must be uniformly spaced")
    return float(h)


def enforce_step_guard(h, max_rate):
    """Reject steps with h * max_rate beyond STEP_GUARD (accuracy floor)."""
    if h * max_rate > STEP_GUARD * (1.0 + 1e-12):
        raise ConfigurationError(
            f"step {h:g} too large: h*max_rate = {h * max_rate:g} "
            f"exceeds the stability guard {STEP_GUARD}"
        )
