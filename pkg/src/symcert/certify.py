"""Fidelity certification programs on the symmetric subspace.

All programs minimize the linear overlap <rho, rho_t> over symmetric states
compatible with the supplied information. The reported bound is read from
the dual side of the conic solve, so it stays a valid lower bound under
solver inexactness.
"""

from __future__ import annotations

import logging
from concurrent.futures import Executor
from dataclasses import dataclass, field
from math import comb

import numpy as np
from scipy.optimize import minimize

from . import conic
from .reduction import global_observable, marginal_map, reduce
from .states import SymmetricState
from .symspace import direction_angles, direction_vector, spin_moment, total_spin_squared

log = logging.getLogger(__name__)

DEFAULT_IMPROVEMENT_TOL = 1e-4


class CertificationError(RuntimeError):
    pass


class InconsistentDataError(CertificationError):
    """Raised when no symmetric N-party state reproduces the data."""

    def __init__(self, N: int, certificate: np.ndarray, constraints: list[str]):
        super().__init__(f"data inconsistent with a symmetric {N}-party state")
        self.certificate = certificate
        self.constraints = constraints


@dataclass(frozen=True)
class MeasurementRecord:
    """Measured value of <S_u^k>, with symmetric noise half-width."""

    direction: tuple[float, float, float]
    order: int
    value: float
    noise_halfwidth: float = 0.0

    def __post_init__(self):
        if self.order < 1:
            raise ValueError("moment order must be >= 1")
        if self.noise_halfwidth < 0:
            raise ValueError("noise half-width must be nonnegative")
        u = np.asarray(self.direction, dtype=float)
        if u.shape != (3,) or abs(np.linalg.norm(u) - 1) > 1e-10:
            raise ValueError("direction must be a unit 3-vector")
        object.__setattr__(self, "direction", tuple(float(v) for v in u))

    @classmethod
    def from_target(cls, target: SymmetricState, u, order: int, noise: float = 0.0) -> "MeasurementRecord":
        """Record whose value is the target's own expectation (ideal data)."""
        u = np.asarray(u, dtype=float)
        return cls(tuple(u), order, target.expectation(spin_moment(target.parties, u, order)), noise)

    @property
    def label(self) -> str:
        theta, phi = direction_angles(self.direction)
        return f"S{self.order}(theta={theta:.6f},phi={phi:.6f})"


@dataclass
class CertificationResult:
    bound: float
    constraints_used: list[str]
    dual_certificate: np.ndarray
    status: str
    gap: float
    iterations: int
    primal_value: float
    dual_value: float
    rescaling: float | None = None
    quantity: str = "fidelity lower bound"
    witness: np.ndarray | None = field(default=None, repr=False)

    @property
    def diagnostics(self) -> dict:
        return {"status": self.status, "gap": self.gap, "iterations": self.iterations,
                "primal_value": self.primal_value, "dual_value": self.dual_value}


def _quantity_label(target: SymmetricState) -> str:
    return "fidelity lower bound" if target.is_pure() else "linear-fidelity lower bound"


def certified_value(problem: conic.ConicProblem, y: np.ndarray, trace_bound: float = 1.0) -> float:
    """Lower bound on the primal optimum valid for any multiplier vector y.

    For feasible X with Tr X <= trace_bound:
    <C, X> = <Z, X> + sum_eq y b + sum_iv y <B, X> >= lambda_min(Z)^- * trace_bound + ...
    """
    Z = conic.dual_slack(problem, y)
    zmin = np.linalg.eigvalsh(Z)[0]
    n_eq = len(problem.equalities)
    val = sum(yj * b for yj, (_, b) in zip(y[:n_eq], problem.equalities))
    for yj, (_, lo, hi) in zip(y[n_eq:], problem.intervals):
        val += min(yj * lo, yj * hi)
    return float(val + min(zmin, 0.0) * trace_bound)


def _run(problem: conic.ConicProblem, target: SymmetricState, labels: list[str],
         **solver_kw) -> CertificationResult:
    sol = conic.solve(problem, **solver_kw)
    if sol.status == conic.PRIMAL_INFEASIBLE:
        raise InconsistentDataError(target.parties, sol.dual, labels)
    if sol.status != conic.OPTIMAL:
        log.warning("solver stopped with status %s (gap %.2e)", sol.status, sol.gap)
    safe = min(sol.dual_value, certified_value(problem, sol.dual))
    return CertificationResult(
        bound=float(np.clip(safe, 0.0, 1.0)),
        constraints_used=labels,
        dual_certificate=sol.dual,
        status=sol.status,
        gap=sol.gap,
        iterations=sol.iterations,
        primal_value=sol.primal_value,
        dual_value=sol.dual_value,
        quantity=_quantity_label(target),
        witness=sol.primal,
    )


def marginal_constraints(N: int, m: int, sigma: np.ndarray):
    """Real-valued equalities pinning every entry of the m-RDM to sigma."""
    mm = marginal_map(N, m)
    rows, labels = [], []
    for a in range(m + 1):
        for b in range(a, m + 1):
            F = mm.functional(a, b)
            rows.append(((F + F.conj().T) / 2, float(sigma[a, b].real)))
            labels.append(f"Re sigma[{a},{b}]")
            if a != b:
                rows.append(((F - F.conj().T) / 2j, float(sigma[a, b].imag)))
                labels.append(f"Im sigma[{a},{b}]")
    return rows, labels


def fidelity_from_full_rdm(target: SymmetricState, m: int) -> CertificationResult:
    """Worst-case overlap with the target over symmetric states sharing its m-RDM."""
    N = target.parties
    if not 1 <= m <= N:
        raise ValueError(f"m = {m} out of range for N = {N}")
    sigma = reduce(target, m)
    rows, labels = marginal_constraints(N, m, sigma)
    problem = conic.ConicProblem(target.matrix, [(np.eye(N + 1), 1.0)] + rows)
    try:
        return _run(problem, target, ["trace"] + labels)
    except InconsistentDataError as exc:
        raise CertificationError("solver reported the target's own marginal as infeasible") from exc


def data_problem(target: SymmetricState, m: int, records) -> tuple[conic.ConicProblem, list[str]]:
    N = target.parties
    if not 1 <= m <= N:
        raise ValueError(f"m = {m} out of range for N = {N}")
    eqs = [(np.eye(N + 1), 1.0)]
    ivs = []
    eq_labels, iv_labels = ["trace"], []
    for rec in records:
        if rec.order > m:
            raise ValueError(f"record {rec.label} has order {rec.order} > m = {m}")
        G = global_observable(N, m, rec.direction, rec.order)
        if rec.noise_halfwidth > 0:
            ivs.append((G, rec.value - rec.noise_halfwidth, rec.value + rec.noise_halfwidth))
            iv_labels.append(f"{rec.label} in [{rec.value - rec.noise_halfwidth:.9g}, {rec.value + rec.noise_halfwidth:.9g}]")
        else:
            eqs.append((G, rec.value))
            eq_labels.append(f"{rec.label} = {rec.value:.9g}")
    return conic.ConicProblem(target.matrix, eqs, ivs), eq_labels + iv_labels


def fidelity_from_data(target: SymmetricState, m: int, records=(), **solver_kw) -> CertificationResult:
    """Worst-case overlap over symmetric states reproducing the measured moments."""
    problem, labels = data_problem(target, m, list(records))
    return _run(problem, target, labels, **solver_kw)


# ----------------------------------------------------------------------------
# measurement selection


def angle_grid(n_theta: int = 32, n_phi: int = 16) -> list[tuple[float, float]]:
    """Directions covering the sphere modulo u -> -u, duplicates at the pole removed."""
    pts = [(0.0, 0.0)]
    for i in range(1, n_theta):
        for j in range(n_phi):
            pts.append((i * np.pi / n_theta, j * np.pi / n_phi))
    return pts


GRID_SOLVER_TOL = {"tol_gap": 1e-6, "tol_feas": 1e-7}


def _bound_at(target, m, k, fixed, theta, phi, solver_kw=None) -> float:
    u = direction_vector(theta, phi)
    rec = MeasurementRecord.from_target(target, u, k)
    try:
        return fidelity_from_data(target, m, list(fixed) + [rec], **(solver_kw or {})).bound
    except CertificationError:
        return np.nan


def optimal_single_measurement(target: SymmetricState, m: int, k: int, fixed=(), *,
                               n_theta: int = 32, n_phi: int = 16, angle_tol: float = 1e-3,
                               executor: Executor | None = None, n_starts: int = 1):
    """max over (theta, phi) of the bound with <S_u^k> added to `fixed`.

    Coarse grid over the half-sphere, then Nelder-Mead from the best grid
    point(s). Returns (theta, phi, bound).
    """
    if k > m:
        raise ValueError(f"moment order {k} exceeds marginal size {m}")
    fixed = list(fixed)
    grid = angle_grid(n_theta, n_phi)
    args = [(target, m, k, fixed, th, ph, GRID_SOLVER_TOL) for th, ph in grid]
    if executor is None:
        values = [_bound_at(*a) for a in args]
    else:
        values = list(executor.map(_bound_at, *zip(*args)))
    values = np.asarray(values, dtype=float)
    if np.all(np.isnan(values)):
        raise CertificationError("every grid direction failed to solve")
    failed = int(np.sum(np.isnan(values)))
    if failed:
        log.warning("%d of %d grid directions failed and were skipped", failed, len(grid))

    # ties (to grid solver accuracy) go to the smaller (theta, phi)
    rounded = np.round(np.nan_to_num(values, nan=-np.inf), 7)
    order = sorted(range(len(grid)), key=lambda i: (-rounded[i], grid[i]))
    best_theta, best_phi = grid[order[0]]
    best = _bound_at(target, m, k, fixed, best_theta, best_phi)
    for i in order[:n_starts]:
        res = minimize(
            lambda v: -np.nan_to_num(_bound_at(target, m, k, fixed, v[0], v[1]), nan=-1.0),
            x0=np.array(grid[i]),
            method="Nelder-Mead",
            options={"xatol": angle_tol, "fatol": np.inf, "maxfev": 300, "initial_simplex": _simplex(grid[i], n_theta, n_phi)},
        )
        if -res.fun > best + 1e-12:
            best, (best_theta, best_phi) = -res.fun, res.x
    theta, phi = _canonical_angles(best_theta, best_phi)
    return theta, phi, float(best)


def _simplex(x0, n_theta, n_phi):
    h_t, h_p = 0.5 * np.pi / n_theta, 0.5 * np.pi / n_phi
    return np.array([x0, (x0[0] + h_t, x0[1]), (x0[0], x0[1] + h_p)])


def _canonical_angles(theta: float, phi: float) -> tuple[float, float]:
    """Representative of +-u with theta in [0, pi], phi in [0, pi)."""
    u = direction_vector(theta, phi)
    t, p = direction_angles(u)
    if p < 0 or p >= np.pi:
        t, p = direction_angles(-u)
    return float(t), float(p % np.pi)


@dataclass
class SelectionResult:
    records: list[MeasurementRecord]
    bounds: list[float]
    baseline: float

    @property
    def bound(self) -> float:
        return self.bounds[-1] if self.bounds else self.baseline


def select_measurements(target: SymmetricState, m: int, max_order: int,
                        improvement_tol: float = DEFAULT_IMPROVEMENT_TOL, *,
                        max_measurements: int = 20, **search_kw) -> SelectionResult:
    """Greedy complexity-ordered measurement list.

    Same-order measurements are tried first; when the best new one does not
    improve the bound by more than `improvement_tol`, the order is raised.
    """
    if max_order > m:
        raise ValueError(f"max_order {max_order} exceeds marginal size {m}")
    baseline = fidelity_from_data(target, m, []).bound
    current = baseline
    records: list[MeasurementRecord] = []
    bounds: list[float] = []
    order = 1
    while order <= max_order and len(records) < max_measurements:
        theta, phi, b = optimal_single_measurement(target, m, order, records, **search_kw)
        if b - current > improvement_tol:
            records.append(MeasurementRecord.from_target(target, direction_vector(theta, phi), order))
            bounds.append(b)
            current = b
            log.info("kept S%d at (%.4f, %.4f): bound %.6f", order, theta, phi, b)
        else:
            order += 1
    return SelectionResult(records, bounds, baseline)


# ----------------------------------------------------------------------------
# overlap with the symmetric subspace


FIRST_MOMENT, SECOND_MOMENT, TOTAL_SPIN = "first", "second", "total"


@dataclass(frozen=True)
class Block:
    two_s: int
    multiplicity: int
    lo: float
    hi: float

    @property
    def S(self) -> float:
        return self.two_s / 2


@dataclass(frozen=True)
class BlockDecomposition:
    N: int
    observable: str
    blocks: tuple[Block, ...]  # descending S, blocks[0] is S = N/2

    @property
    def top(self) -> Block:
        return self.blocks[0]

    @property
    def rest(self) -> tuple[Block, ...]:
        return self.blocks[1:]


def spin_multiplicity(N: int, two_s: int) -> int:
    t = (N - two_s) // 2
    return comb(N, t) - (comb(N, t - 1) if t >= 1 else 0)


def block_decomposition(N: int, observable: str = FIRST_MOMENT, u=(0.0, 0.0, 1.0)) -> BlockDecomposition:
    """Schur-Weyl spin sectors with the range of the observable inside each.

    Ranges are direction independent (every block is rotation covariant); `u`
    is kept for provenance.
    """
    if N < 2:
        raise ValueError("need N >= 2")
    blocks = []
    for two_s in range(N, -1, -2):
        S = two_s / 2
        if observable == FIRST_MOMENT:
            lo, hi = 0.0 - S, S
        elif observable == SECOND_MOMENT:
            lo, hi = (0.0 if two_s % 2 == 0 else 0.25), S * S
        elif observable == TOTAL_SPIN:
            lo = hi = S * (S + 1)
        else:
            raise ValueError(f"unknown observable kind {observable!r}")
        blocks.append(Block(two_s, spin_multiplicity(N, two_s), lo, hi))
    return BlockDecomposition(N, observable, tuple(blocks))


def _check_attainable(decomp: BlockDecomposition, s: float, tol: float = 1e-12):
    lo = min(b.lo for b in decomp.blocks)
    hi = max(b.hi for b in decomp.blocks)
    if not lo - tol <= s <= hi + tol:
        raise ValueError(f"measured value {s} outside the attainable range [{lo}, {hi}]")


def symmetric_overlap_bound(decomp: BlockDecomposition, s: float) -> float:
    """Least weight on the S = N/2 sector compatible with measuring s.

    The adversary places every other sector at its extreme value; above the
    largest value H reachable without the top sector the weight is
    (s - H) / (hi_top - H), and symmetrically below the lowest.
    """
    _check_attainable(decomp, s)
    top = decomp.top
    H = max(b.hi for b in decomp.rest)
    L = min(b.lo for b in decomp.rest)
    lam = 0.0
    if top.hi > H and s > H:
        lam = max(lam, (s - H) / (top.hi - H))
    if top.lo < L and s < L:
        lam = max(lam, (L - s) / (L - top.lo))
    return float(np.clip(lam, 0.0, 1.0))


def symmetric_overlap_lp(decomp: BlockDecomposition, s: float) -> float:
    """Same bound from the explicit LP over block weights at their extreme values."""
    _check_attainable(decomp, s)
    values, costs = [], []
    for i, b in enumerate(decomp.blocks):
        for v in {b.lo, b.hi}:
            values.append(v)
            costs.append(1.0 if i == 0 else 0.0)
    A = np.vstack([values, np.ones(len(values))])
    sol = conic.solve_lp(costs, (A, [s, 1.0]), tol_gap=1e-12, tol_feas=1e-12)
    if sol.status != conic.OPTIMAL:
        raise CertificationError(f"symmetry LP ended with status {sol.status}")
    return float(np.clip(sol.dual_value, 0.0, 1.0))


def total_spin_value(state: SymmetricState) -> float:
    return state.expectation(total_spin_squared(state.parties))


def pi_rescale(symmetric_bound: float, lambda_bound: float) -> float:
    """Overlap of a PI state with the target: lambda times the symmetric-part bound."""
    for v in (symmetric_bound, lambda_bound):
        if not -1e-12 <= v <= 1 + 1e-12:
            raise ValueError(f"value {v} outside [0, 1]")
    return float(np.clip(lambda_bound * symmetric_bound, 0.0, 1.0))
