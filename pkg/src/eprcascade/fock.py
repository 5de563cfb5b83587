"""Truncated Fock-space integration of the cascaded master equation.

Dense density matrices over a tensor-product number basis, with the
right-hand side assembled from sparse operator products in the form

    drho/dt = E rho + rho E^dag + sum_k C_k rho C_k^dag ,

where E collects -iH together with the anticommutator halves of the decay
terms.  For the cascaded pair of cavities the jump set

    C_1 = sqrt(2 eps kappa1) a1 + sqrt(2 kappa2) a2
    C_2 = sqrt(2 (1-eps) kappa1) a1

reproduces both local decay channels plus the unidirectional feed-forward
term; expanding E rho + rho E^dag + sum C rho C^dag recovers the master
equation used by the moment engines term by term.

This module is the brute-force cross-check: no Gaussian assumption, so it
also hosts the counter-rotating-term comparison for a single subsystem and
two-time cavity correlations via the quantum regression theorem.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import ConfigurationError, IntegrationError
from .kernels import csr_parts, spmm_left_acc, spmm_right_acc
from .moments import MODES_FULL, MomentState, Trajectory
from .params import EffectiveParams, as_schedule
from .rk4 import enforce_step_guard, rk4_step, uniform_spacing

__all__ = [
    "build_ladder",
    "FockSpace",
    "DensityMatrix",
    "FockTrajectory",
    "cascade_space",
    "lindblad_rhs",
    "evolve",
    "single_system_evolve",
    "rwa_check",
    "regression_two_time",
]

TOP_POPULATION_LIMIT = 1e-6
# phase advance per step of the e^{+-2i nu t} factors; above this RK4 cannot
# resolve the counter-rotating oscillation
_OSCILLATION_GUARD = 0.5

MODES_SINGLE = ("a1", "b1")
MODES_CAVITY = ("a1", "a2")


def build_ladder(cutoffs):
    """Annihilation operators for each mode, embedded in the tensor product.

    ``cutoffs[k]`` levels are kept for mode k (occupations 0..cutoffs[k]-1).
    Returns a tuple of sparse CSR matrices in mode order.
    """
    cutoffs = tuple(int(c) for c in cutoffs)
    if not cutoffs:
        raise ConfigurationError("need at least one mode")
    for c in cutoffs:
        if c < 2:
            raise ConfigurationError(f"every Fock cutoff must be at least 2, got {c}")
    eyes = [sp.identity(c, format="csr", dtype=complex) for c in cutoffs]
    ops = []
    for k, ck in enumerate(cutoffs):
        local = sp.diags(
            np.sqrt(np.arange(1.0, ck)), offsets=1, format="csr", dtype=complex
        )
        full = local if k == 0 else eyes[0]
        for j in range(1, len(cutoffs)):
            full = sp.kron(full, local if j == k else eyes[j], format="csr")
        ops.append(full.tocsr())
    return tuple(ops)


class _Expect:
    """Tr(op @ rho) evaluated from the CSR triplets of op, no temporaries."""

    __slots__ = ("rows", "cols", "data")

    def __init__(self, op):
        op = op.tocsr()
        op.sort_indices()
        self.rows = np.repeat(np.arange(op.shape[0]), np.diff(op.indptr))
        self.cols = op.indices.copy()
        self.data = np.asarray(op.data, dtype=complex)

    def __call__(self, mat):
        return complex(np.dot(self.data, mat[self.cols, self.rows]))


class FockSpace:
    """Tensor-product number basis for a named, ordered set of modes."""

    def __init__(self, modes, cutoffs):
        modes = tuple(modes)
        cutoffs = tuple(int(c) for c in cutoffs)
        if len(modes) != len(cutoffs):
            raise ConfigurationError("one cutoff per mode required")
        if len(set(modes)) != len(modes):
            raise ConfigurationError("mode names must be unique")
        self.modes = modes
        self.cutoffs = cutoffs
        self.lower = build_ladder(cutoffs)
        self.dim = int(np.prod(cutoffs))
        levels = np.unravel_index(np.arange(self.dim), cutoffs)
        self.top_masks = tuple(
            np.asarray(lv == c - 1) for lv, c in zip(levels, cutoffs)
        )
        self._moment_table = None

    def index(self, name):
        try:
            return self.modes.index(name)
        except ValueError:
            raise ConfigurationError(f"unknown mode {name!r}") from None

    def annihilation(self, name):
        return self.lower[self.index(name)]

    # ------------------------------------------------------------------
    # states

    def vacuum(self):
        mat = np.zeros((self.dim, self.dim), dtype=complex)
        mat[0, 0] = 1.0
        return DensityMatrix(self, mat)

    def number_state(self, occupations):
        occupations = tuple(int(n) for n in occupations)
        if len(occupations) != len(self.cutoffs):
            raise ConfigurationError("one occupation per mode required")
        for n, c in zip(occupations, self.cutoffs):
            if not 0 <= n < c:
                raise ConfigurationError(f"occupation {n} outside cutoff {c}")
        idx = int(np.ravel_multi_index(occupations, self.cutoffs))
        mat = np.zeros((self.dim, self.dim), dtype=complex)
        mat[idx, idx] = 1.0
        return DensityMatrix(self, mat)

    def thermal(self, nbars):
        """Product thermal state; ``nbars`` maps mode name -> mean occupation.

        Each mode's geometric distribution is renormalised within its cutoff.
        """
        diag = np.ones(1)
        for name, c in zip(self.modes, self.cutoffs):
            nbar = float(nbars.get(name, 0.0))
            if nbar < 0:
                raise ConfigurationError("thermal occupation must be >= 0")
            if nbar == 0.0:
                probs = np.zeros(c)
                probs[0] = 1.0
            else:
                probs = (nbar / (1.0 + nbar)) ** np.arange(c)
                probs /= probs.sum()
            diag = np.kron(diag, probs)
        return DensityMatrix(self, np.diag(diag.astype(complex)))

    # ------------------------------------------------------------------
    # moment extraction

    def moment_table(self):
        if self._moment_table is None:
            lows = self.lower
            n = len(lows)
            means = [_Expect(lows[i]) for i in range(n)]
            pairs = {
                (i, j): _Expect((lows[i] @ lows[j]).tocsr())
                for i in range(n)
                for j in range(i, n)
            }
            occs = {
                (i, j): _Expect((lows[i].conj().T.tocsr() @ lows[j]).tocsr())
                for i in range(n)
                for j in range(n)
            }
            self._moment_table = (means, pairs, occs)
        return self._moment_table

    def snapshot(self, mat):
        """MomentState (means + full second-moment set) of a dense matrix."""
        means, pairs, occs = self.moment_table()
        n = len(self.modes)
        mean = np.array([means[i](mat) for i in range(n)])
        pair = np.zeros((n, n), dtype=complex)
        occ = np.empty((n, n), dtype=complex)
        for i in range(n):
            for j in range(i, n):
                v = pairs[(i, j)](mat)
                pair[i, j] = pair[j, i] = v
            for j in range(n):
                occ[i, j] = occs[(i, j)](mat)
        return MomentState(modes=self.modes, mean=mean, pair=pair, occ=occ)


def cascade_space(cutoffs=(5, 5, 7, 7)):
    """Four-mode space (a1, a2, b1, b2) with the default cross-check cutoffs."""
    if len(cutoffs) != 4:
        raise ConfigurationError("cascade space needs four cutoffs")
    return FockSpace(MODES_FULL, cutoffs)


@dataclass
class DensityMatrix:
    """Dense state over the tensor-product number basis of ``space``."""

    space: FockSpace
    matrix: np.ndarray

    def __post_init__(self):
        mat = np.ascontiguousarray(self.matrix, dtype=complex)
        if mat.shape != (self.space.dim, self.space.dim):
            raise ConfigurationError(
                f"matrix shape {mat.shape} does not match space dim {self.space.dim}"
            )
        self.matrix = mat

    @property
    def modes(self):
        return self.space.modes

    @property
    def cutoffs(self):
        return self.space.cutoffs

    def trace(self):
        return float(np.trace(self.matrix).real)

    def herm_defect(self):
        return float(np.max(np.abs(self.matrix - self.matrix.conj().T)))

    def min_eigenvalue(self):
        herm = 0.5 * (self.matrix + self.matrix.conj().T)
        return float(np.linalg.eigvalsh(herm)[0])

    def top_populations(self):
        """Population in the highest kept level of each mode."""
        diag = np.real(np.diagonal(self.matrix))
        return np.array([diag[m].sum() for m in self.space.top_masks])

    def check(self, herm_tol=1e-10, trace_tol=1e-8, eig_tol=1e-8,
              top_tol=TOP_POPULATION_LIMIT):
        """Return a list of violated-invariant descriptions (empty if clean)."""
        problems = []
        hd = self.herm_defect()
        if hd > herm_tol:
            problems.append(f"hermiticity defect {hd:.3e} > {herm_tol:g}")
        tr = self.trace()
        if abs(tr - 1.0) > trace_tol:
            problems.append(f"trace {tr!r} deviates from 1 by > {trace_tol:g}")
        ev = self.min_eigenvalue()
        if ev < -eig_tol:
            problems.append(f"minimum eigenvalue {ev:.3e} < -{eig_tol:g}")
        top = self.top_populations().max()
        if top >= top_tol:
            problems.append(f"top-level population {top:.3e} >= {top_tol:g}")
        return problems


@dataclass
class FockTrajectory(Trajectory):
    """Moment trajectory extracted from a density-matrix run, plus diagnostics.

    ``valid`` goes False the first time any mode's top-level population
    reaches the truncation limit; the reported moments after
    ``first_invalid_time`` are then untrustworthy.
    """

    valid: bool = True
    first_invalid_time: float | None = None
    top_populations: np.ndarray | None = None
    trace_drift: float = 0.0
    herm_defect: float = 0.0
    final: DensityMatrix | None = None


# ---------------------------------------------------------------------------
# generators


class Generator:
    """Evaluates the master-equation right-hand side for a fixed term set.

    ``e_terms`` is a list of (sparse operator, coefficient) pairs making up
    E(t) = sum_k c_k(t) O_k; a coefficient is a complex constant or a
    callable t -> complex, which is how time-dependent drives enter (the RK4
    substage times are passed straight through).  ``jumps`` is a list of
    sparse collapse operators applied as C rho C^dag.

    The instance is immutable after construction; all scratch space is
    caller-provided, so one generator can serve concurrent runs.
    """

    def __init__(self, space, e_terms, jumps):
        self.space = space
        self.dim = space.dim
        self._terms = []
        for op, coef in e_terms:
            op = sp.csr_matrix(op)
            if not callable(coef):
                coef = complex(coef)
                if coef == 0:
                    continue
            self._terms.append(
                (csr_parts(op), csr_parts(op.conj().T.tocsr()), coef)
            )
        self._jumps = [
            (csr_parts(sp.csr_matrix(c)), csr_parts(sp.csr_matrix(c).conj().T.tocsr()))
            for c in jumps
        ]

    def apply(self, t, rho, out, work):
        """out <- RHS(t, rho), using ``work`` as jump scratch."""
        out[:] = 0.0
        for left, right, coef in self._terms:
            c = coef(t) if callable(coef) else coef
            if c == 0:
                continue
            spmm_left_acc(*left, rho, out, c)
            spmm_right_acc(*right, rho, out, np.conj(c))
        for cparts, cdag_parts in self._jumps:
            work[:] = 0.0
            spmm_left_acc(*cparts, rho, work, 1.0 + 0.0j)
            spmm_right_acc(*cdag_parts, work, out, 1.0 + 0.0j)
        return out


def _schedule_coefficient(schedule):
    if schedule.is_constant():
        return complex(schedule(0.0))
    return lambda t: complex(schedule(t))


def _cascade_generator(space, p):
    if space.modes != MODES_FULL:
        raise ConfigurationError(
            f"cascade generator needs modes {MODES_FULL}, got {space.modes}"
        )
    a1, a2, b1, b2 = space.lower
    k1, k2, eps = p.kappa1, p.kappa2, p.epsilon
    feed = 2.0 * np.sqrt(eps * k1 * k2)

    e_static = -(
        k1 * (a1.conj().T @ a1)
        + k2 * (a2.conj().T @ a2)
        + feed * (a2.conj().T @ a1)
    )
    drive1 = -1j * (
        np.exp(1j * p.phi1) * (a1 @ b1)
        + np.exp(-1j * p.phi1) * (a1.conj().T @ b1.conj().T)
    )
    drive2 = -1j * (
        np.exp(-1j * p.phi2) * (a2.conj().T @ b2)
        + np.exp(1j * p.phi2) * (a2 @ b2.conj().T)
    )
    e_terms = [
        (e_static, 1.0),
        (drive1, _schedule_coefficient(p.schedule1)),
        (drive2, _schedule_coefficient(p.schedule2)),
    ]

    jumps = [np.sqrt(2.0 * eps * k1) * a1 + np.sqrt(2.0 * k2) * a2]
    if eps < 1.0:
        jumps.append(np.sqrt(2.0 * (1.0 - eps) * k1) * a1)
    return Generator(space, e_terms, jumps)


def _cavity_generator(space, p):
    if space.modes != MODES_CAVITY:
        raise ConfigurationError(
            f"cavity generator needs modes {MODES_CAVITY}, got {space.modes}"
        )
    a1, a2 = space.lower
    k1, k2, eps = p.kappa1, p.kappa2, p.epsilon
    feed = 2.0 * np.sqrt(eps * k1 * k2)
    e_static = -(
        k1 * (a1.conj().T @ a1)
        + k2 * (a2.conj().T @ a2)
        + feed * (a2.conj().T @ a1)
    )
    jumps = [np.sqrt(2.0 * eps * k1) * a1 + np.sqrt(2.0 * k2) * a2]
    if eps < 1.0:
        jumps.append(np.sqrt(2.0 * (1.0 - eps) * k1) * a1)
    return Generator(space, [(e_static, 1.0)], jumps)


def _single_system_generator(space, schedule, kappa, nu, phi, counter_rotating):
    if space.modes != MODES_SINGLE:
        raise ConfigurationError(
            f"single-system generator needs modes {MODES_SINGLE}, got {space.modes}"
        )
    a, b = space.lower
    e_terms = []
    if kappa > 0:
        e_terms.append((-kappa * (a.conj().T @ a), 1.0))
    resonant = -1j * (
        np.exp(1j * phi) * (a @ b)
        + np.exp(-1j * phi) * (a.conj().T @ b.conj().T)
    )
    e_terms.append((resonant, _schedule_coefficient(schedule)))
    if counter_rotating:
        # interaction-frame terms oscillating at twice the trap frequency
        down = -1j * np.exp(-1j * phi) * (a.conj().T @ b)
        up = -1j * np.exp(1j * phi) * (a @ b.conj().T)
        e_terms.append(
            (down, lambda t: complex(schedule(t)) * np.exp(-2j * nu * t))
        )
        e_terms.append(
            (up, lambda t: complex(schedule(t)) * np.exp(2j * nu * t))
        )
    jumps = [np.sqrt(2.0 * kappa) * a] if kappa > 0 else []
    return Generator(space, e_terms, jumps)


# ---------------------------------------------------------------------------
# public operations


def lindblad_rhs(rho, p, t=0.0):
    """Master-equation right-hand side drho/dt as a dense matrix.

    ``rho`` must live on the four-mode cascade space; the returned matrix is
    traceless (trace below 1e-10 for normalised input).
    """
    if not isinstance(rho, DensityMatrix):
        raise ConfigurationError("rho must be a DensityMatrix")
    gen = _cascade_generator(rho.space, p)
    out = np.empty_like(rho.matrix)
    work = np.empty_like(rho.matrix)
    gen.apply(float(t), rho.matrix, out, work)
    return out


def _run(gen, rho0, grid, max_rate, top_limit, oscillation_rate=0.0):
    grid = np.asarray(grid, dtype=float)
    h = uniform_spacing(grid)
    enforce_step_guard(h, max_rate)
    if oscillation_rate > 0 and h * oscillation_rate > _OSCILLATION_GUARD * (1 + 1e-12):
        raise ConfigurationError(
            f"step {h:g} cannot resolve the counter-rotating oscillation: "
            f"h*2*nu = {h * oscillation_rate:g} exceeds {_OSCILLATION_GUARD}"
        )
    space = gen.space
    y = np.array(rho0.matrix, dtype=complex, order="C")
    work = np.empty_like(y)

    def f(t, mat):
        out = np.empty_like(mat)
        gen.apply(t, mat, out, work)
        return out

    nmodes = len(space.modes)
    states = []
    top_hist = np.empty((grid.size, nmodes))
    valid = True
    first_bad = None
    trace_drift = 0.0
    for i, t in enumerate(grid):
        if i:
            y = rk4_step(f, grid[i - 1], y, h)
            if not np.all(np.isfinite(y)):
                raise IntegrationError("state became non-finite", t=float(t))
        diag = np.real(np.diagonal(y))
        tops = np.array([diag[m].sum() for m in space.top_masks])
        top_hist[i] = tops
        trace_drift = max(trace_drift, abs(diag.sum() - 1.0))
        if valid and tops.max() >= top_limit:
            valid = False
            first_bad = float(t)
        states.append(space.snapshot(y))

    traj = FockTrajectory.from_states(grid, states)
    traj.valid = valid
    traj.first_invalid_time = first_bad
    traj.top_populations = top_hist
    traj.trace_drift = trace_drift
    traj.herm_defect = float(np.max(np.abs(y - y.conj().T)))
    traj.final = DensityMatrix(space, y)
    return traj


def evolve(rho0, p, grid, *, top_limit=TOP_POPULATION_LIMIT):
    """Integrate the cascaded master equation from ``rho0`` over ``grid``.

    Returns a FockTrajectory carrying the same moment series as the Gaussian
    engines plus truncation diagnostics.
    """
    if not isinstance(rho0, DensityMatrix):
        raise ConfigurationError("rho0 must be a DensityMatrix")
    gen = _cascade_generator(rho0.space, p)
    return _run(gen, rho0, grid, p.max_rate(), top_limit)


def single_system_evolve(omega, kappa, nu, phi, grid, cutoffs=(12, 12), *,
                         include_counter_rotating=False, initial=None,
                         top_limit=TOP_POPULATION_LIMIT):
    """One cavity + one motional mode, optionally with the fast terms kept.

    With ``include_counter_rotating`` the interaction-frame Hamiltonian keeps
    the e^{+-2i nu t} pieces, so the step must also resolve that phase
    (h * 2 nu <= 0.5).  ``kappa`` may be zero for the lossless parametric
    pair.
    """
    schedule = as_schedule(omega)
    if kappa < 0:
        raise ConfigurationError("cavity decay must be >= 0")
    if include_counter_rotating and nu <= 0:
        raise ConfigurationError("trap frequency must be positive")
    if len(cutoffs) != 2:
        raise ConfigurationError("single-system space needs two cutoffs")
    space = FockSpace(MODES_SINGLE, cutoffs)
    gen = _single_system_generator(
        space, schedule, float(kappa), float(nu), float(phi),
        include_counter_rotating,
    )
    if initial is None:
        initial = space.vacuum()
    elif initial.space.modes != MODES_SINGLE:
        raise ConfigurationError("initial state is not a single-system state")
    max_rate = max(float(kappa), schedule.max_abs())
    osc = 2.0 * float(nu) if include_counter_rotating else 0.0
    return _run(gen, initial, grid, max_rate, top_limit, oscillation_rate=osc)


def rwa_check(omega, kappa, nu, phi, grid, cutoffs=(12, 12), *,
              top_limit=TOP_POPULATION_LIMIT):
    """Paired single-system runs without / with the counter-rotating terms.

    Returns (rotating_wave, full) trajectories on the shared grid; comparing
    their occupations quantifies the rotating-wave error at trap frequency
    ``nu``.
    """
    if nu <= 0:
        raise ConfigurationError("trap frequency must be positive")
    rotating = single_system_evolve(
        omega, kappa, nu, phi, grid, cutoffs,
        include_counter_rotating=False, top_limit=top_limit,
    )
    full = single_system_evolve(
        omega, kappa, nu, phi, grid, cutoffs,
        include_counter_rotating=True, top_limit=top_limit,
    )
    return rotating, full


def regression_two_time(p, a_op, b_op, tau_grid, cutoffs=(3, 3)):
    """Steady-state two-time correlation <A(tau) B(0)> for the bare cavities.

    The drives must be off (the cavity steady state is the vacuum); the
    correlation follows from the quantum regression theorem by propagating
    B rho_ss under the cavity generator and tracing against A at each lag.
    ``a_op`` and ``b_op`` act on the two-cavity basis from
    ``build_ladder(cutoffs)`` (mode order a1, a2).
    """
    if p.schedule1.max_abs() != 0.0 or p.schedule2.max_abs() != 0.0:
        raise ConfigurationError("two-time regression requires both drives off")
    if len(cutoffs) != 2:
        raise ConfigurationError("cavity-only space needs two cutoffs")
    space = FockSpace(MODES_CAVITY, cutoffs)
    gen = _cavity_generator(space, p)

    b_mat = sp.csr_matrix(b_op)
    if b_mat.shape != (space.dim, space.dim):
        raise ConfigurationError("operator shape does not match the space")
    expect_a = _Expect(sp.csr_matrix(a_op))

    tau_grid = np.asarray(tau_grid, dtype=float)
    h = uniform_spacing(tau_grid)
    enforce_step_guard(h, max(p.kappa1, p.kappa2))

    rho_ss = space.vacuum().matrix
    y = np.ascontiguousarray(b_mat @ rho_ss)
    work = np.empty_like(y)

    def f(t, mat):
        out = np.empty_like(mat)
        gen.apply(t, mat, out, work)
        return out

    series = np.empty(tau_grid.size, dtype=complex)
    series[0] = expect_a(y)
    for i in range(1, tau_grid.size):
        y = rk4_step(f, tau_grid[i - 1], y, h)
        if not np.all(np.isfinite(y)):
            raise IntegrationError("state became non-finite", t=float(tau_grid[i]))
        series[i] = expect_a(y)
    return series
