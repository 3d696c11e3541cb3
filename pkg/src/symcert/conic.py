"""Small dense conic solver: one PSD block plus a nonnegative orthant.

Problems are posed on Hermitian matrices,

    minimize    <C, X>
    subject to  <A_j, X> = b_j
                lo_j <= <B_j, X> <= hi_j
                X >= 0,

and compiled to a real standard form (X -> [[Re X, -Im X], [Im X, Re X]],
interval rows split into two one-sided rows with nonnegative slacks). The
standard form is solved with a primal-dual interior-point method on the
homogeneous self-dual embedding, Nesterov-Todd scaling and Mehrotra
predictor-corrector steps. The embedding yields either an optimal pair or a
Farkas-type infeasibility certificate.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.linalg as la

log = logging.getLogger(__name__)

OPTIMAL = "optimal"
PRIMAL_INFEASIBLE = "primal_infeasible"
DUAL_INFEASIBLE = "dual_infeasible"
MAX_ITERATIONS = "max_iterations"


@dataclass
class ConicProblem:
    objective: np.ndarray
    equalities: list[tuple[np.ndarray, float]] = field(default_factory=list)
    intervals: list[tuple[np.ndarray, float, float]] = field(default_factory=list)

    def __post_init__(self):
        self.objective = _hermitian(self.objective, "objective")
        n = self.dimension
        self.equalities = [(_hermitian(A, "equality", n), float(b)) for A, b in self.equalities]
        checked = []
        for B, lo, hi in self.intervals:
            if lo > hi:
                raise ValueError(f"interval lower bound {lo} exceeds upper bound {hi}")
            checked.append((_hermitian(B, "interval", n), float(lo), float(hi)))
        self.intervals = checked

    @property
    def dimension(self) -> int:
        return self.objective.shape[0]

    def value(self, X: np.ndarray) -> float:
        return float(np.real(np.vdot(self.objective, X)))


def _hermitian(M, what: str, n: int | None = None, tol: float = 1e-12) -> np.ndarray:
    M = np.asarray(M, dtype=complex)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"{what} matrix must be square, got shape {M.shape}")
    if n is not None and M.shape[0] != n:
        raise ValueError(f"{what} matrix has dimension {M.shape[0]}, expected {n}")
    if np.max(np.abs(M - M.conj().T), initial=0.0) > tol * max(1.0, np.max(np.abs(M), initial=0.0)):
        raise ValueError(f"{what} matrix is not Hermitian")
    return (M + M.conj().T) / 2


@dataclass
class ConicSolution:
    status: str
    primal: np.ndarray
    dual: np.ndarray
    primal_value: float
    dual_value: float
    gap: float
    iterations: int
    primal_residual: float = np.nan
    dual_residual: float = np.nan
    slack: np.ndarray | None = None
    lp_primal: np.ndarray | None = None

    @property
    def optimal(self) -> bool:
        return self.status == OPTIMAL


@dataclass
class StandardForm:
    """min <c, x> s.t. A x = b, x in S^n_+ x R^p_+ (all real)."""

    c_psd: np.ndarray
    c_lp: np.ndarray
    A_psd: np.ndarray  # (m, n, n)
    A_lp: np.ndarray  # (m, p)
    b: np.ndarray
    scale: float = 1.0  # reported value = scale * <c, x>
    hermitian: bool = False  # PSD data are real embeddings of Hermitian matrices

    @property
    def n(self) -> int:
        return self.c_psd.shape[0]

    @property
    def p(self) -> int:
        return self.c_lp.shape[0]

    @property
    def m(self) -> int:
        return self.b.shape[0]


def real_embedding(H: np.ndarray) -> np.ndarray:
    re, im = H.real, H.imag
    return np.block([[re, -im], [im, re]])


def complex_from_embedding(Y: np.ndarray) -> np.ndarray:
    n = Y.shape[0] // 2
    X = (Y[:n, :n] + Y[n:, n:]) / 2 + 1j * (Y[n:, :n] - Y[:n, n:]) / 2
    return (X + X.conj().T) / 2


def compile_problem(problem: ConicProblem) -> StandardForm:
    n = problem.dimension
    n_eq, n_iv = len(problem.equalities), len(problem.intervals)
    m = n_eq + 2 * n_iv
    p = 2 * n_iv
    A_psd = np.zeros((m, 2 * n, 2 * n))
    A_lp = np.zeros((m, p))
    b = np.zeros(m)
    for j, (A, bj) in enumerate(problem.equalities):
        A_psd[j] = real_embedding(A)
        b[j] = 2 * bj
    for i, (B, lo, hi) in enumerate(problem.intervals):
        emb = real_embedding(B)
        r = n_eq + 2 * i
        # <B, X> - s_lo = lo ;  <B, X> + s_hi = hi
        A_psd[r] = emb
        A_lp[r, 2 * i] = -1.0
        b[r] = 2 * lo
        A_psd[r + 1] = emb
        A_lp[r + 1, 2 * i + 1] = 1.0
        b[r + 1] = 2 * hi
    return StandardForm(real_embedding(problem.objective), np.zeros(p), A_psd, A_lp, b, scale=0.5, hermitian=True)


def solve(problem: ConicProblem | StandardForm, tol_gap: float = 1e-9, tol_feas: float = 1e-9,
          max_iterations: int = 200) -> ConicSolution:
    """Solve a ConicProblem (Hermitian) or a real StandardForm.

    The reported bound for certification is `dual_value`; it is a valid
    lower bound whenever the dual slack is PSD.
    """
    if isinstance(problem, ConicProblem):
        sf = compile_problem(problem)
        raw = solve_standard(sf, tol_gap, tol_feas, max_iterations)
        return _lift(problem, sf, raw)
    return solve_standard(problem, tol_gap, tol_feas, max_iterations)


def _lift(problem: ConicProblem, sf: StandardForm, raw: ConicSolution) -> ConicSolution:
    X = complex_from_embedding(raw.primal)
    n_eq = len(problem.equalities)
    y = raw.dual
    # interval multiplier = y_lo + y_hi acting on <B, X>
    dual = np.concatenate([y[:n_eq], y[n_eq::2] + y[n_eq + 1::2]]) if problem.intervals else y[:n_eq]
    return ConicSolution(
        status=raw.status,
        primal=X,
        dual=dual,
        primal_value=raw.primal_value,
        dual_value=raw.dual_value,
        gap=raw.gap,
        iterations=raw.iterations,
        primal_residual=raw.primal_residual,
        dual_residual=raw.dual_residual,
        slack=complex_from_embedding(raw.slack) if raw.slack is not None and raw.slack.size else raw.slack,
        lp_primal=raw.lp_primal,
    )


def dual_slack(problem: ConicProblem, y: np.ndarray) -> np.ndarray:
    """Z = C - sum_j y_j A_j over equality then interval rows, exactly from y."""
    Z = problem.objective.copy()
    mats = [A for A, _ in problem.equalities] + [B for B, _, _ in problem.intervals]
    for yj, A in zip(y, mats):
        Z = Z - yj * A
    return (Z + Z.conj().T) / 2


def solve_lp(costs: Sequence[float], equalities=None, bounds=None, **kw) -> ConicSolution:
    """min c.x s.t. A_eq x = b_eq, lo_j <= B_j.x <= hi_j, x >= 0.

    `equalities` is (A_eq, b_eq); `bounds` is a list of (row, lo, hi).
    Runs the conic engine on the orthant only (diagonal matrices).
    """
    c = np.asarray(costs, dtype=float)
    nv = c.size
    rows, rhs = [], []
    if equalities is not None:
        A_eq, b_eq = equalities
        A_eq = np.atleast_2d(np.asarray(A_eq, dtype=float))
        if A_eq.shape[1] != nv:
            raise ValueError("equality matrix does not match the number of variables")
        rows.extend(A_eq)
        rhs.extend(np.asarray(b_eq, dtype=float).ravel())
    bounds = list(bounds or [])
    p = nv + 2 * len(bounds)
    A_lp = np.zeros((len(rows) + 2 * len(bounds), p))
    for i, r in enumerate(rows):
        A_lp[i, :nv] = r
    b = list(rhs)
    for i, (row, lo, hi) in enumerate(bounds):
        if lo > hi:
            raise ValueError("interval lower bound exceeds upper bound")
        r = len(rows) + 2 * i
        A_lp[r, :nv] = row
        A_lp[r, nv + 2 * i] = -1.0
        A_lp[r + 1, :nv] = row
        A_lp[r + 1, nv + 2 * i + 1] = 1.0
        b.extend([lo, hi])
    c_lp = np.concatenate([c, np.zeros(2 * len(bounds))])
    sf = StandardForm(np.zeros((0, 0)), c_lp, np.zeros((len(b), 0, 0)), A_lp, np.array(b, dtype=float))
    sol = solve_standard(sf, **kw)
    sol.lp_primal = sol.lp_primal[:nv] if sol.lp_primal is not None else None
    sol.primal = np.diag(sol.lp_primal) if sol.lp_primal is not None else sol.primal
    return sol


# ----------------------------------------------------------------------------
# interior-point engine


def _independent_rows(Amat: np.ndarray, b: np.ndarray, tol: float = 1e-10):
    """Drop linearly dependent rows. Returns (keep, farkas) where farkas is a
    certificate y with A^T y = 0, b.y = 1 if the dropped rows are inconsistent."""
    m = Amat.shape[0]
    if m == 0:
        return np.arange(0), None
    _, R, piv = la.qr(Amat.T, mode="economic", pivoting=True)
    diag = np.abs(np.diag(R))
    rank = int(np.sum(diag > tol * max(diag[0], 1.0))) if diag.size else 0
    keep = np.sort(piv[:rank])
    drop = np.setdiff1d(np.arange(m), keep)
    for d in drop:
        coef, *_ = la.lstsq(Amat[keep].T, Amat[d])
        mismatch = b[d] - coef @ b[keep]
        if abs(mismatch) > 1e-8 * max(1.0, abs(b[d])):
            y = np.zeros(m)
            y[d] = 1.0
            y[keep] = -coef
            return keep, y / mismatch
    return keep, None


class _Scaling:
    """Nesterov-Todd scaling point for the current iterate."""

    def __init__(self, X, Z, x, z, hermitian=False):
        if X.size and hermitian:
            # embedded iterates: scale the complex half-size pair and embed the result
            self._factor(complex_from_embedding(X), complex_from_embedding(Z))
            self.R, self.Rinv = real_embedding(self.R), real_embedding(self.Rinv)
            self.W = self.R @ self.R.T
            self.lam = np.concatenate([self.lam, self.lam])
        elif X.size:
            self._factor(X, Z)
            self.W = self.R @ self.R.T
        else:
            self.R = self.Rinv = self.W = np.zeros((0, 0))
            self.lam = np.zeros(0)
        self.w = np.sqrt(x / z)
        self.lam_lp = np.sqrt(x * z)

    def _factor(self, X, Z):
        # R^T Z R = R^-1 X R^-T = diag(lam)
        L1 = la.cholesky(X, lower=True)
        L2 = la.cholesky(Z, lower=True)
        U, s, Vh = la.svd(L2.conj().T @ L1)
        self.R = L1 @ Vh.conj().T / np.sqrt(s)
        self.Rinv = (U.conj().T @ L2.conj().T) / np.sqrt(s)[:, None]
        self.lam = s


def _psd_step(lam: np.ndarray, d: np.ndarray) -> float:
    """Largest alpha with diag(lam) + alpha d >= 0."""
    if lam.size == 0:
        return np.inf
    s = 1 / np.sqrt(lam)
    w0 = la.eigh(d * s[:, None] * s[None, :], eigvals_only=True, subset_by_index=[0, 0], driver="evr")[0]
    return np.inf if w0 >= 0 else -1 / w0


def _lp_step(v: np.ndarray, dv: np.ndarray) -> float:
    neg = dv < 0
    return np.inf if not np.any(neg) else float(np.min(-v[neg] / dv[neg]))


def _jordan(P, Q):
    return (P @ Q + Q @ P) / 2


def solve_standard(sf: StandardForm, tol_gap: float = 1e-9, tol_feas: float = 1e-9,
                   max_iterations: int = 200) -> ConicSolution:
    n, p, m = sf.n, sf.p, sf.m
    A_full = np.hstack([sf.A_psd.reshape(m, n * n), sf.A_lp])
    norms = np.linalg.norm(A_full, axis=1)
    if np.any(norms == 0):
        zero = np.flatnonzero(norms == 0)
        if np.any(np.abs(sf.b[zero]) > 1e-12):
            y = np.zeros(m)
            j = zero[np.argmax(np.abs(sf.b[zero]))]
            y[j] = 1.0 / sf.b[j]
            return _infeasible(sf, y, 0)
        norms[zero] = 1.0
    keep, farkas = _independent_rows(A_full / norms[:, None], sf.b / norms)
    if farkas is not None:
        return _infeasible(sf, farkas / norms, 0)

    # row-normalized, reduced system
    Ap = sf.A_psd[keep] / norms[keep, None, None]
    Al = sf.A_lp[keep] / norms[keep, None]
    b = sf.b[keep] / norms[keep]
    c_psd, c_lp = sf.c_psd, sf.c_lp
    mk = b.size
    Aflat = Ap.reshape(mk, n * n)
    nu = n + p

    def A_op(X, x):
        return Aflat @ X.ravel() + Al @ x

    def At_op(y):
        return (y @ Aflat).reshape(n, n), Al.T @ y

    X, Z = np.eye(n), np.eye(n)
    x, z = np.ones(p), np.ones(p)
    y = np.zeros(mk)
    tau = kappa = 1.0
    nb, nc = np.linalg.norm(b), np.sqrt(np.sum(c_psd**2) + np.sum(c_lp**2))

    status = MAX_ITERATIONS
    it = 0
    for it in range(max_iterations + 1):
        AtyX, Atyx = At_op(y)
        rp = A_op(X, x) - b * tau
        rdX = AtyX + Z - c_psd * tau
        rdx = Atyx + z - c_lp * tau
        cx = np.sum(c_psd * X) + c_lp @ x
        by = b @ y
        rg = -cx + by - kappa
        mu = (np.sum(X * Z) + x @ z + tau * kappa) / (nu + 1)

        pres = np.linalg.norm(rp) / tau / (1 + nb)
        dres = np.sqrt(np.sum(rdX**2) + np.sum(rdx**2)) / tau / (1 + nc)
        pobj, dobj = cx / tau, by / tau
        gap = abs(pobj - dobj) * sf.scale
        if pres < tol_feas and dres < tol_feas and gap < tol_gap:
            status = OPTIMAL
            break
        if by > 0:
            r = np.sqrt(np.sum((AtyX + Z) ** 2) + np.sum((Atyx + z) ** 2))
            if r / by < tol_feas and tau < 1e-6 * kappa:
                status = PRIMAL_INFEASIBLE
                break
        if cx < 0:
            r = np.linalg.norm(A_op(X, x))
            if r / -cx < tol_feas and tau < 1e-6 * kappa:
                status = DUAL_INFEASIBLE
                break
        if it == max_iterations:
            break

        try:
            sc = _Scaling(X, Z, x, z, sf.hermitian)
        except la.LinAlgError:
            log.warning("scaling failed at iteration %d; stopping", it)
            break
        W, R, w = sc.W, sc.R, sc.w

        Rinv = sc.Rinv
        # scaled constraint rows  R^T A_i R  and  a_i * w; factor their transpose
        At_s = np.einsum("ji,mjk,kl->mil", R, Ap, R, optimize=True).reshape(mk, n * n) if n else np.zeros((mk, 0))
        At_s = np.hstack([At_s, Al * w])
        Q, Rq = la.qr(At_s.T, mode="economic")

        def subsolve(r1, r2X, r2x, qX, qx):
            # A dx = r1, A^T dy + dz = r2, scaled(dx) + scaled(dz) = q, solved in the
            # NT-scaled space through the QR factors (avoids forming A W A^T)
            v = np.concatenate([(qX - R.T @ r2X @ R).ravel(), qx - w * r2x])
            rhs = r1 - At_s @ v
            t = la.solve_triangular(Rq, rhs, trans="T")
            dy = la.solve_triangular(Rq, t)
            dxs = v + Q @ t
            dXs, dx_s = dxs[: n * n].reshape(n, n), dxs[n * n:]
            dX = R @ dXs @ R.T
            dx = w * dx_s
            dZ = r2X - (dy @ Aflat).reshape(n, n)
            dz = r2x - Al.T @ dy
            return dX, dx, dy, dZ, dz

        u1 = subsolve(b, c_psd, c_lp, np.zeros((n, n)), np.zeros(p))
        den = -(np.sum(c_psd * u1[0]) + c_lp @ u1[1]) + b @ u1[2] + kappa / tau

        lam, lam_lp = sc.lam, sc.lam_lp
        pair = lam[:, None] + lam[None, :]

        def direction(eta, rcX, rcx, rtk):
            qX = 2 * rcX / pair if n else rcX
            qx = rcx / lam_lp
            u0 = subsolve(-eta * rp, -eta * rdX, -eta * rdx, qX, qx)
            num = -eta * rg + (np.sum(c_psd * u0[0]) + c_lp @ u0[1]) - b @ u0[2] + rtk / tau
            dtau = num / den
            dX, dx, dy, dZ, dz = (a + dtau * b1 for a, b1 in zip(u0, u1))
            dkappa = (rtk - kappa * dtau) / tau
            return dX, dx, dy, dZ, dz, dtau, dkappa

        def max_step(d):
            dX, dx, _, dZ, dz, dtau, dkappa = d
            a = min(
                _psd_step(lam, sc.Rinv @ dX @ sc.Rinv.T) if n else np.inf,
                _psd_step(lam, R.T @ dZ @ R) if n else np.inf,
                _lp_step(x, dx), _lp_step(z, dz),
                _lp_step(np.array([tau]), np.array([dtau])),
                _lp_step(np.array([kappa]), np.array([dkappa])),
            )
            return a

        L2 = np.diag(lam**2)
        aff = direction(1.0, -L2, -lam_lp**2, -tau * kappa)
        a_aff = min(1.0, max_step(aff))
        sigma = (1 - a_aff) ** 3
        dXs = sc.Rinv @ aff[0] @ sc.Rinv.T
        dZs = R.T @ aff[3] @ R
        dxs, dzs = aff[1] / w, aff[4] * w
        corr = _jordan(dXs, dZs) if n else np.zeros((0, 0))
        d = direction(
            1 - sigma,
            -L2 + sigma * mu * np.eye(n) - corr,
            -lam_lp**2 + sigma * mu - dxs * dzs,
            -tau * kappa + sigma * mu - aff[5] * aff[6],
        )
        alpha = min(1.0, 0.99 * max_step(d))
        dX, dx, dy, dZ, dz, dtau, dkappa = d
        X = X + alpha * dX
        Z = Z + alpha * dZ
        X, Z = (X + X.T) / 2, (Z + Z.T) / 2
        x = x + alpha * dx
        z = z + alpha * dz
        y = y + alpha * dy
        tau += alpha * dtau
        kappa += alpha * dkappa

    y_full = np.zeros(m)
    if status == PRIMAL_INFEASIBLE:
        y_full[keep] = y / norms[keep] / (b @ y)
        return _infeasible(sf, y_full, it)

    y_full[keep] = y / tau / norms[keep]
    Xs, xs = X / tau, x / tau
    pval = sf.scale * (np.sum(c_psd * Xs) + c_lp @ xs)
    dval = sf.scale * (sf.b @ y_full)
    return ConicSolution(
        status=status,
        primal=Xs,
        dual=y_full,
        primal_value=float(pval),
        dual_value=float(dval),
        gap=float(abs(pval - dval)),
        iterations=it,
        primal_residual=float(pres),
        dual_residual=float(dres),
        slack=Z / tau,
        lp_primal=xs,
    )


def _infeasible(sf: StandardForm, y: np.ndarray, it: int) -> ConicSolution:
    return ConicSolution(
        status=PRIMAL_INFEASIBLE,
        primal=np.zeros((sf.n, sf.n)),
        dual=y,
        primal_value=np.inf,
        dual_value=np.inf,
        gap=np.nan,
        iterations=it,
        lp_primal=np.zeros(sf.p),
    )
