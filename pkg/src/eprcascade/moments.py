"""Exact moment-equation engines for the cascaded model.

The Hamiltonian is quadratic and every dissipative channel is linear in
the mode operators, so first and second moments close exactly; we
integrate those instead of density matrices.  Moments are kept in the
annihilation-operator basis and converted to quadratures on demand.

Internally the state is the doubled vector v = (m_1..m_n, m_1^dag..
m_n^dag) with drift matrix A(t) and noise matrix D(t):

    d<v>/dt   = A <v>
    dS/dt     = A S + S A^T + D,     S_ij = <v_i v_j>  (ordered products)

A and D were derived operator-by-operator from the master equation; the
Fock-space module provides the independent check that the transcription
is right.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, IntegrationError
from .params import EffectiveParams, ReducedRates
from .rk4 import enforce_step_guard, rk4_step, uniform_spacing

__all__ = [
    "MODES_FULL",
    "MODES_REDUCED",
    "MomentState",
    "Trajectory",
    "vacuum_state",
    "thermal_state",
    "variances",
    "assemble_full_generator",
    "assemble_adiabatic_generator",
    "integrate_full",
    "integrate_adiabatic",
    "first_crossing",
]

MODES_FULL = ("a1", "a2", "b1", "b2")
MODES_REDUCED = ("b1", "b2")


@dataclass(frozen=True)
class MomentState:
    """First and second moments of a Gaussian state.

    ``pair[i, j]`` holds <m_i m_j> (symmetric), ``occ[i, j]`` holds
    <m_i^dag m_j> (Hermitian); both are uncentered.
    """

    modes: tuple
    mean: np.ndarray
    pair: np.ndarray
    occ: np.ndarray

    def index(self, name):
        try:
            return self.modes.index(name)
        except ValueError:
            raise ConfigurationError(f"state has no mode {name!r}") from None

    def occupation(self, name):
        """Real mean occupation <m^dag m> of the named mode."""
        k = self.index(name)
        return float(self.occ[k, k].real)

    def centered(self):
        """Centered (pair, occ) with first-moment products removed."""
        mu = self.mean
        return self.pair - np.outer(mu, mu), self.occ - np.outer(mu.conj(), mu)

    def covariance_matrix(self):
        """Quadrature covariance in (X1, P1, X2, P2, ...) ordering.

        Conventions X = m + m^dag, P = -i(m - m^dag), so [X, P] = 2i and
        the vacuum covariance is the identity.
        """
        n = len(self.modes)
        pc, oc = self.centered()
        doubled = np.empty((2 * n, 2 * n), dtype=complex)
        doubled[:n, :n] = pc
        doubled[n:, :n] = oc
        doubled[:n, n:] = oc.T + np.eye(n)
        doubled[n:, n:] = pc.conj()
        tmat = np.zeros((2 * n, 2 * n), dtype=complex)
        for k in range(n):
            tmat[2 * k, k] = 1.0
            tmat[2 * k, n + k] = 1.0
            tmat[2 * k + 1, k] = -1.0j
            tmat[2 * k + 1, n + k] = 1.0j
        raw = tmat @ doubled @ tmat.T
        return 0.5 * (raw + raw.T).real

    def symplectic_defect(self):
        """Smallest eigenvalue of sigma + iJ; physical states give >= 0."""
        n = len(self.modes)
        jmat = np.zeros((2 * n, 2 * n))
        for k in range(n):
            jmat[2 * k, 2 * k + 1] = 1.0
            jmat[2 * k + 1, 2 * k] = -1.0
        herm = self.covariance_matrix() + 1.0j * jmat
        return float(np.linalg.eigvalsh(herm)[0].real)


def vacuum_state(modes=MODES_REDUCED) -> MomentState:
    n = len(modes)
    return MomentState(
        modes=tuple(modes),
        mean=np.zeros(n, dtype=complex),
        pair=np.zeros((n, n), dtype=complex),
        occ=np.zeros((n, n), dtype=complex),
    )


def thermal_state(modes=MODES_REDUCED, nbars=None) -> MomentState:
    """Product of thermal states; ``nbars`` maps mode name -> occupation."""
    nbars = nbars or {}
    state = vacuum_state(modes)
    for name, nbar in nbars.items():
        if nbar < 0:
            raise ConfigurationError("thermal occupations must be nonnegative")
        k = state.index(name)
        state.occ[k, k] = nbar
    return state


def variances(m: MomentState):
    """All four joint quadrature variances of the motional modes.

    Returns ``(var_minus, var_plus, p_var_minus, p_var_plus)`` for
    X1 -/+ X2 and P1 -/+ P2, centered.  The vacuum level of each is 2.
    """
    i, j = m.index("b1"), m.index("b2")
    pc, oc = m.centered()
    var_x1 = 1.0 + 2.0 * pc[i, i].real + 2.0 * oc[i, i].real
    var_x2 = 1.0 + 2.0 * pc[j, j].real + 2.0 * oc[j, j].real
    cov_x = 2.0 * (pc[i, j] + oc[i, j]).real
    var_p1 = 1.0 - 2.0 * pc[i, i].real + 2.0 * oc[i, i].real
    var_p2 = 1.0 - 2.0 * pc[j, j].real + 2.0 * oc[j, j].real
    cov_p = -2.0 * pc[i, j].real + 2.0 * oc[i, j].real
    return (
        var_x1 + var_x2 - 2.0 * cov_x,
        var_x1 + var_x2 + 2.0 * cov_x,
        var_p1 + var_p2 - 2.0 * cov_p,
        var_p1 + var_p2 + 2.0 * cov_p,
    )


# ---------------------------------------------------------------------------
# generators


def assemble_full_generator(p: EffectiveParams, t: float):
    """Drift and noise matrices of the four-mode cascaded model at time t.

    Mode ordering (a1, a2, b1, b2), doubled to size 8.  Cavity damping
    enters the drift at -kappa_j, the unidirectional interconnect at
    -2 sqrt(eps kappa1 kappa2) from a1 into a2, the pair-creation drive
    at Omega1(t) between (a1, b1) and the exchange drive at Omega2(t)
    between (a2, b2).
    """
    o1 = float(np.asarray(p.schedule1(t)))
    o2 = float(np.asarray(p.schedule2(t)))
    cascade = 2.0 * np.sqrt(p.epsilon * p.kappa1 * p.kappa2)
    g1 = -1.0j * o1 * np.exp(-1.0j * p.phi1)
    n = 4
    top = np.zeros((n, 2 * n), dtype=complex)  # rows d<m_i>/dt
    ia1, ia2, ib1, ib2 = 0, 1, 2, 3
    top[ia1, ia1] = -p.kappa1
    top[ia1, n + ib1] = g1
    top[ia2, ia2] = -p.kappa2
    top[ia2, ia1] = -cascade
    top[ia2, ib2] = -1.0j * o2 * np.exp(-1.0j * p.phi2)
    top[ib1, n + ia1] = g1
    top[ib2, ia2] = -1.0j * o2 * np.exp(1.0j * p.phi2)
    drift = np.vstack(
        [top, np.hstack([top[:, n:].conj(), top[:, :n].conj()])]
    )
    noise = np.zeros((2 * n, 2 * n), dtype=complex)
    noise[ia1, n + ia1] = 2.0 * p.kappa1
    noise[ia2, n + ia2] = 2.0 * p.kappa2
    noise[ia1, n + ia2] = cascade
    noise[ia2, n + ia1] = cascade
    return drift, noise


def assemble_adiabatic_generator(gamma1, gamma2, eps, dphi):
    """Drift and noise matrices of the cavity-eliminated two-mode model.

    Mode ordering (b1, b2), doubled to size 4.  Mode 1 is amplified at
    gamma1, mode 2 damped at gamma2, and the interconnect appears as the
    direct coupling 2 sqrt(eps gamma1 gamma2) with phase dphi=phi1-phi2.
    """
    if gamma1 < 0 or gamma2 < 0:
        raise ConfigurationError("rates must be nonnegative")
    if not 0.0 <= eps <= 1.0:
        raise ConfigurationError("epsilon must lie in [0, 1]")
    c = 2.0 * np.sqrt(eps * gamma1 * gamma2)
    phase = np.exp(-1.0j * dphi)
    n = 2
    ib1, ib2 = 0, 1
    top = np.zeros((n, 2 * n), dtype=complex)
    top[ib1, ib1] = gamma1
    top[ib2, ib2] = -gamma2
    top[ib2, n + ib1] = c * phase
    drift = np.vstack(
        [top, np.hstack([top[:, n:].conj(), top[:, :n].conj()])]
    )
    noise = np.zeros((2 * n, 2 * n), dtype=complex)
    noise[n + ib1, ib1] = 2.0 * gamma1
    noise[ib2, n + ib2] = 2.0 * gamma2
    noise[ib2, ib1] = c * phase
    noise[n + ib1, n + ib2] = c * phase.conjugate()
    return drift, noise


# ---------------------------------------------------------------------------
# integration


@dataclass
class Trajectory:
    """Moment snapshots on a time grid plus the derived variance series."""

    grid: np.ndarray
    states: list
    var_minus: np.ndarray | None
    var_plus: np.ndarray | None
    p_var_minus: np.ndarray | None
    p_var_plus: np.ndarray | None
    n1: np.ndarray | None
    n2: np.ndarray | None
    cavity_n1: np.ndarray | None = None
    cavity_n2: np.ndarray | None = None

    @classmethod
    def from_states(cls, grid, states):
        grid = np.asarray(grid, dtype=float)
        if len(states) != grid.size:
            raise ConfigurationError("snapshot count must equal grid length")
        modes = states[0].modes
        quads = None
        if "b1" in modes and "b2" in modes:
            quads = np.array([variances(s) for s in states])

        def occ_series(name):
            if name not in modes:
                return None
            return np.array([s.occupation(name) for s in states])

        return cls(
            grid=grid,
            states=list(states),
            var_minus=quads[:, 0] if quads is not None else None,
            var_plus=quads[:, 1] if quads is not None else None,
            p_var_minus=quads[:, 2] if quads is not None else None,
            p_var_plus=quads[:, 3] if quads is not None else None,
            n1=occ_series("b1"),
            n2=occ_series("b2"),
            cavity_n1=occ_series("a1"),
            cavity_n2=occ_series("a2"),
        )

    def series(self, name):
        value = getattr(self, name, None)
        if value is None:
            raise ConfigurationError(f"trajectory has no series {name!r}")
        return value


def _pack(mean, smat):
    return np.concatenate([mean, smat.ravel()])


def _unpack(y, n):
    return y[: 2 * n], y[2 * n :].reshape(2 * n, 2 * n)


def _check_initial(initial, modes):
    if initial is None:
        return vacuum_state(modes)
    if tuple(initial.modes) != tuple(modes):
        raise ConfigurationError(
            f"initial state modes {initial.modes} do not match engine modes {modes}"
        )
    return initial


def _doubled(initial: MomentState):
    n = len(initial.modes)
    mean = np.concatenate([initial.mean, initial.mean.conj()])
    smat = np.empty((2 * n, 2 * n), dtype=complex)
    smat[:n, :n] = initial.pair
    smat[n:, :n] = initial.occ
    smat[:n, n:] = initial.occ.T + np.eye(n)
    smat[n:, n:] = initial.pair.conj()
    return mean, smat


def _snapshot(modes, mean, smat, t):
    n = len(modes)
    occ = smat[n:, :n]
    imag_leak = np.abs(np.diag(occ).imag).max()
    scale = max(1.0, np.abs(smat).max())
    if imag_leak > 1e-8 * scale:
        raise IntegrationError(
            f"occupations developed imaginary parts ({imag_leak:.2e})", t=t
        )
    pair = smat[:n, :n]
    return MomentState(
        modes=modes,
        mean=mean[:n].copy(),
        pair=0.5 * (pair + pair.T),
        occ=occ.copy(),
    )


def _integrate(generator, modes, initial, grid, max_rate):
    grid = np.asarray(grid, dtype=float)
    h = uniform_spacing(grid)
    enforce_step_guard(h, max_rate)
    n = len(modes)
    state = _check_initial(initial, modes)
    mean, smat = _doubled(state)
    y = _pack(mean, smat)

    def rhs(t, yv):
        mu, s = _unpack(yv, n)
        drift, noise = generator(t)
        return _pack(drift @ mu, drift @ s + s @ drift.T + noise)

    snapshots = [_snapshot(modes, mean, smat, grid[0])]
    for i in range(grid.size - 1):
        y = rk4_step(rhs, grid[i], y, h)
        if not np.all(np.isfinite(y)):
            raise IntegrationError("non-finite moments", t=grid[i + 1])
        mu, s = _unpack(y, n)
        snapshots.append(_snapshot(modes, mu, s, grid[i + 1]))
    return Trajectory.from_states(grid, snapshots)


def integrate_full(p: EffectiveParams, grid, initial: MomentState | None = None):
    """Integrate the four-mode cascaded model with fixed-step RK4.

    ``grid`` is the integration grid (uniform, strictly increasing); its
    spacing must satisfy h * max(kappa1, kappa2, |Omega|) <= 0.05.
    """
    constant = p.schedule1.is_constant() and p.schedule2.is_constant()
    if constant:
        frozen = assemble_full_generator(p, 0.0)
        generator = lambda t: frozen
    else:
        generator = lambda t: assemble_full_generator(p, t)
    return _integrate(generator, MODES_FULL, initial, grid, p.max_rate())


def integrate_adiabatic(
    r, grid, initial: MomentState | None = None, eps=None, dphi=None
):
    """Integrate the cavity-eliminated two-mode model with fixed-step RK4.

    ``r`` may be a ReducedRates (constant rates; ``eps`` and ``dphi``
    default to 1 and 0) or an EffectiveParams, in which case the rates
    follow the schedules as Gamma_j(t) = Omega_j(t)^2 / kappa_j and
    ``eps``/``dphi`` default to the values it carries.
    """
    if isinstance(r, EffectiveParams):
        eps = r.epsilon if eps is None else eps
        dphi = (r.phi1 - r.phi2) if dphi is None else dphi
        kappa1, kappa2 = r.kappa1, r.kappa2
        sched1, sched2 = r.schedule1, r.schedule2

        def gamma_pair(t):
            o1 = float(np.asarray(sched1(t)))
            o2 = float(np.asarray(sched2(t)))
            return o1 * o1 / kappa1, o2 * o2 / kappa2

        max_rate = max(
            sched1.max_abs() ** 2 / kappa1, sched2.max_abs() ** 2 / kappa2
        )
        constant = sched1.is_constant() and sched2.is_constant()
    elif isinstance(r, ReducedRates):
        eps = 1.0 if eps is None else eps
        dphi = 0.0 if dphi is None else dphi
        rates = (r.gamma1, r.gamma2)
        gamma_pair = lambda t: rates
        max_rate = max(r.gamma1, r.gamma2)
        constant = True
    else:
        raise ConfigurationError(
            "integrate_adiabatic needs ReducedRates or EffectiveParams"
        )

    if constant:
        frozen = assemble_adiabatic_generator(*gamma_pair(0.0), eps, dphi)
        generator = lambda t: frozen
    else:
        generator = lambda t: assemble_adiabatic_generator(*gamma_pair(t), eps, dphi)
    return _integrate(generator, MODES_REDUCED, initial, grid, max_rate)


def first_crossing(grid, series, level):
    """First time ``series`` reaches ``level``, linearly interpolated.

    Returns ``(t_cross, index)`` where ``index`` is the grid point just
    after the crossing, or ``(None, None)`` if the level is never
    reached from the starting side.
    """
    grid = np.asarray(grid, dtype=float)
    series = np.asarray(series, dtype=float)
    start_above = series[0] > level
    for i in range(1, series.size):
        crossed = series[i] <= level if start_above else series[i] >= level
        if crossed:
            y0, y1 = series[i - 1], series[i]
            if y1 == y0:
                return float(grid[i]), i
            frac = (level - y0) / (y1 - y0)
            return float(grid[i - 1] + frac * (grid[i] - grid[i - 1])), i
    return None, None
