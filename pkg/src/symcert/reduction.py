"""Symmetric partial traces and embedding of collective moments into m-RDM space.

Marginals of symmetric N-qubit states are kept in the (m+1)-dimensional Dicke
basis of m parties. The map is exact: |D_N^k> = sum_{a+j=k} c |D_m^a>|D_{N-m}^j>
with c = sqrt(C(m,a) C(N-m,j) / C(N,k)).
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import comb, factorial

import numpy as np

from .symspace import (
    local_operator,
    log_binom,
    pauli_along,
    rotation_to,
    symmetric_isometry,
)


@dataclass(frozen=True, eq=False)
class MarginalMap:
    """Linear functionals sigma[a, a'] = sum_j weights[a, a', j] * rho[a + j, a' + j]."""

    N: int
    m: int
    weights: np.ndarray  # shape (m+1, m+1, N-m+1)

    def apply(self, rho: np.ndarray) -> np.ndarray:
        rho = np.asarray(rho)
        if rho.shape != (self.N + 1, self.N + 1):
            raise ValueError(f"state of shape {rho.shape} does not match N = {self.N}")
        m, r = self.m, self.N - self.m
        out = np.zeros((m + 1, m + 1), dtype=complex)
        j = np.arange(r + 1)
        for a in range(m + 1):
            for b in range(m + 1):
                out[a, b] = np.dot(self.weights[a, b], rho[a + j, b + j])
        return out

    def adjoint(self, op: np.ndarray) -> np.ndarray:
        """Global operator G with Tr[G rho] = Tr[op apply(rho)] for every rho."""
        op = np.asarray(op)
        m, r = self.m, self.N - self.m
        G = np.zeros((self.N + 1, self.N + 1), dtype=complex)
        j = np.arange(r + 1)
        for a in range(m + 1):
            for b in range(m + 1):
                # Tr[op sigma] = sum_{a,b} op[b, a] sigma[a, b]
                G[b + j, a + j] += op[b, a] * self.weights[a, b]
        return G

    def functional(self, a: int, b: int) -> np.ndarray:
        """Matrix F with Tr[F rho] = sigma[a, b]."""
        E = np.zeros((self.m + 1, self.m + 1), dtype=complex)
        E[b, a] = 1.0
        return self.adjoint(E)


_cache: dict[tuple[int, int], MarginalMap] = {}
_cache_lock = threading.Lock()


def marginal_map(N: int, m: int) -> MarginalMap:
    if not 1 <= m <= N:
        raise ValueError(f"marginal size m = {m} must satisfy 1 <= m <= N = {N}")
    key = (N, m)
    cached = _cache.get(key)
    if cached is not None:
        return cached
    r = N - m
    a = np.arange(m + 1)
    j = np.arange(r + 1)
    lb = np.vectorize(log_binom)
    # log of sqrt(C(m,a) C(r,j) / C(N,a+j)) for every (a, j)
    half = 0.5 * (lb(m, a)[:, None] + lb(r, j)[None, :] - lb(N, a[:, None] + j[None, :]))
    weights = np.exp(half[:, None, :] + half[None, :, :])
    weights.setflags(write=False)
    mm = MarginalMap(N, m, weights)
    with _cache_lock:
        _cache.setdefault(key, mm)
    return _cache[key]


def reduce(state, m: int) -> np.ndarray:
    """m-party marginal of a symmetric state, in the m-party Dicke basis."""
    rho = getattr(state, "matrix", state)
    N = rho.shape[0] - 1
    return marginal_map(N, m).apply(rho)


def brute_force_reduce(state, m: int) -> np.ndarray:
    """Partial trace through the explicit 2^N tensor space. Test oracle, N <= 8."""
    rho = np.asarray(getattr(state, "matrix", state))
    N = rho.shape[0] - 1
    if N > 8:
        raise ValueError("brute-force reduction limited to N <= 8")
    if not 1 <= m <= N:
        raise ValueError(f"marginal size m = {m} out of range")
    iso = symmetric_isometry(N)
    full = iso @ rho @ iso.T
    keep, drop = 2**m, 2 ** (N - m)
    # trace out the last N - m qubits one index at a time
    t = full.reshape(keep, drop, keep, drop)
    red = np.zeros((keep, keep), dtype=complex)
    for i in range(drop):
        red += t[:, i, :, i]
    iso_m = symmetric_isometry(m)
    return iso_m.T @ red @ iso_m


@lru_cache(maxsize=None)
def odd_support_counts(N: int, k: int) -> tuple[int, ...]:
    """c[r] = #sequences (i_1..i_k) in [N]^k whose odd-multiplicity index set has size r.

    From the exponential generating function C(N, r) sinh(x)^r cosh(x)^(N-r).
    """
    def series(even: bool) -> list[Fraction]:
        return [Fraction(1, factorial(n)) if (n % 2 == 0) == even else Fraction(0) for n in range(k + 1)]

    sinh, cosh = series(False), series(True)
    counts = []
    for r in range(k + 1):
        if r > N:
            counts.append(0)
            continue
        poly = _trunc_mul(_trunc_power(sinh, r, k), _trunc_power(cosh, N - r, k), k)
        counts.append(int(comb(N, r) * poly[k] * factorial(k)))
    return tuple(counts)


def _trunc_power(p: list[Fraction], e: int, k: int) -> list[Fraction]:
    result = [Fraction(1)] + [Fraction(0)] * k
    base = list(p)
    while e:
        if e & 1:
            result = _trunc_mul(result, base, k)
        base = _trunc_mul(base, base, k)
        e >>= 1
    return result


def _trunc_mul(p, q, k):
    out = [Fraction(0)] * (k + 1)
    for i, pi in enumerate(p):
        if pi:
            for j in range(k + 1 - i):
                out[i + j] += pi * q[j]
    return out


def symmetrized_correlator(m: int, u, r: int) -> np.ndarray:
    """Sym(sigma_u^{(x)r} (x) 1^{(x)(m-r)}) on the m-party Dicke basis.

    Diagonal in the S_u eigenbasis: with p parties at +1 the eigenvalue is the
    t^r coefficient of (1+t)^p (1-t)^(m-p), divided by C(m, r).
    """
    if not 0 <= r <= m:
        raise ValueError("correlator order out of range")
    # p = m - k parties aligned with u for eigenvector index k
    eig = np.empty(m + 1)
    for k in range(m + 1):
        p = m - k
        coeff = sum(comb(p, i) * comb(m - p, r - i) * (-1) ** (r - i) for i in range(r + 1))
        eig[k] = coeff / comb(m, r)
    U = rotation_to(m, u)
    return (U * eig) @ U.conj().T


def embed_observable(N: int, m: int, u, k: int) -> np.ndarray:
    """m-party operator O with Tr[O reduce(rho, m)] = Tr[S_u^k rho]."""
    if k < 1:
        raise ValueError("moment order must be >= 1")
    if k > m:
        raise ValueError(f"moment order {k} needs a marginal of at least {k} parties, got m = {m}")
    if m > N:
        raise ValueError("marginal larger than the system")
    counts = odd_support_counts(N, k)
    O = np.zeros((m + 1, m + 1), dtype=complex)
    for r, c in enumerate(counts):
        if c:
            O += (c / 2**k) * symmetrized_correlator(m, u, r)
    return (O + O.conj().T) / 2


def global_observable(N: int, m: int, u, k: int) -> np.ndarray:
    """The N-party operator seen by the SDP: adjoint marginal map of embed_observable."""
    G = marginal_map(N, m).adjoint(embed_observable(N, m, u, k))
    return (G + G.conj().T) / 2


def brute_force_embedded(N: int, m: int, u, k: int) -> np.ndarray:
    """(sum_i sigma_u^(i)/2)^k expectation rewritten on m parties via explicit tensors (small m)."""
    sig = pauli_along(u)
    counts = odd_support_counts(N, k)
    iso = symmetric_isometry(m)
    O = np.zeros((2**m, 2**m), dtype=complex)
    for r, c in enumerate(counts):
        if not c:
            continue
        term = np.eye(2**m, dtype=complex)
        for site in range(r):
            term = term @ local_operator(sig, site, m)
        O += c / 2**k * term
    return iso.T @ O @ iso

