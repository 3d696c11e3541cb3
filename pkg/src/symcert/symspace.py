"""Dicke-basis representation of the symmetric subspace and collective spin operators.

Basis ordering: index k counts excitations, k = 0 is the all-up state with
S_z eigenvalue +N/2, so S_z = diag(N/2, N/2 - 1, ..., -N/2).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import comb, lgamma

import numpy as np

HERMITIAN_TOL = 1e-12


def dicke_dimension(N: int, d: int = 2) -> int:
    """Number of occupation vectors of N parties over d levels."""
    if N < 1:
        raise ValueError(f"party count must be >= 1, got {N}")
    if d < 2:
        raise ValueError(f"local dimension must be >= 2, got {d}")
    return comb(N + d - 1, d - 1)


def log_binom(n: int, k: int) -> float:
    if k < 0 or k > n:
        return -np.inf
    return lgamma(n + 1) - lgamma(k + 1) - lgamma(n - k + 1)


@dataclass(frozen=True)
class OccupationVector:
    counts: tuple[int, ...]

    def __post_init__(self):
        if any(c < 0 for c in self.counts):
            raise ValueError("occupation counts must be nonnegative")
        if len(self.counts) < 2:
            raise ValueError("need at least two levels")

    @property
    def parties(self) -> int:
        return sum(self.counts)

    @property
    def d(self) -> int:
        return len(self.counts)

    @classmethod
    def from_excitations(cls, m: int, k: int) -> "OccupationVector":
        """Qubit occupation with k parties in the excited level."""
        if not 0 <= k <= m:
            raise ValueError(f"excitation number {k} out of range for {m} parties")
        return cls((m - k, k))

    @property
    def excitations(self) -> int:
        if self.d != 2:
            raise ValueError("excitation number is only defined for qubits")
        return self.counts[1]


def occupation_vectors(m: int, d: int) -> list[OccupationVector]:
    """All occupation vectors of m parties over d levels, lexicographic in counts[1:]."""
    out = []

    def rec(prefix, remaining, slots):
        if slots == 1:
            out.append(prefix + (remaining,))
            return
        for c in range(remaining, -1, -1):
            rec(prefix + (c,), remaining - c, slots - 1)

    rec((), m, d)
    return [OccupationVector(c) for c in out]


@dataclass(frozen=True, eq=False)
class SymmetricOperator:
    """Hermitian observable on the N-party Dicke basis."""

    matrix: np.ndarray
    parties: int
    order: int = 1
    direction: tuple[float, float, float] | None = None
    d: int = field(default=2)

    def __post_init__(self):
        mat = np.asarray(self.matrix, dtype=complex)
        dim = dicke_dimension(self.parties, self.d)
        if mat.shape != (dim, dim):
            raise ValueError(f"expected {dim}x{dim} matrix, got {mat.shape}")
        if np.max(np.abs(mat - mat.conj().T), initial=0.0) > HERMITIAN_TOL * max(1.0, np.max(np.abs(mat))):
            raise ValueError("operator is not Hermitian")
        mat.setflags(write=False)
        object.__setattr__(self, "matrix", mat)

    def expectation(self, rho: np.ndarray) -> float:
        return float(np.real(np.trace(self.matrix @ rho)))


def direction_vector(theta: float, phi: float) -> np.ndarray:
    st = np.sin(theta)
    return np.array([st * np.cos(phi), st * np.sin(phi), np.cos(theta)])


def direction_angles(u) -> tuple[float, float]:
    """Inverse of direction_vector: (theta, phi) with theta in [0, pi], phi in (-pi, pi]."""
    u = _unit(u)
    theta = float(np.arctan2(np.hypot(u[0], u[1]), u[2]))
    phi = float(np.arctan2(u[1], u[0]))
    return theta, phi


def _unit(u, tol: float = 1e-10) -> np.ndarray:
    u = np.asarray(u, dtype=float).reshape(3)
    if abs(np.linalg.norm(u) - 1.0) > tol:
        raise ValueError(f"direction must be a unit vector, |u| = {np.linalg.norm(u)}")
    return u


def _require_qubits(d: int):
    if d != 2:
        raise NotImplementedError("collective operators are only supported for qubits (d = 2)")


def spin_components(N: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(S_x, S_y, S_z) in the spin-N/2 irrep on the Dicke basis."""
    S = N / 2
    m = S - np.arange(N + 1)
    # <m+1|S_+|m> = sqrt(S(S+1) - m(m+1)); S_+ maps index k+1 -> k
    ladder = np.sqrt(S * (S + 1) - m[1:] * (m[1:] + 1))
    s_plus = np.diag(ladder, 1).astype(complex)
    s_minus = s_plus.conj().T
    sx = (s_plus + s_minus) / 2
    sy = (s_plus - s_minus) / 2j
    sz = np.diag(m).astype(complex)
    return sx, sy, sz


def collective_spin(N: int, u, d: int = 2) -> SymmetricOperator:
    """u_x S_x + u_y S_y + u_z S_z with S = sum_i sigma^(i) / 2."""
    _require_qubits(d)
    u = _unit(u)
    sx, sy, sz = spin_components(N)
    mat = u[0] * sx + u[1] * sy + u[2] * sz
    return SymmetricOperator(mat, N, order=1, direction=tuple(u))


def spin_moment(N: int, u, k: int, d: int = 2) -> SymmetricOperator:
    if k < 1:
        raise ValueError("moment order must be >= 1")
    base = collective_spin(N, u, d).matrix
    mat = np.linalg.matrix_power(base, k)
    mat = (mat + mat.conj().T) / 2
    return SymmetricOperator(mat, N, order=k, direction=tuple(_unit(u)))


def total_spin_squared(N: int, d: int = 2) -> SymmetricOperator:
    _require_qubits(d)
    sx, sy, sz = spin_components(N)
    mat = sx @ sx + sy @ sy + sz @ sz
    return SymmetricOperator((mat + mat.conj().T) / 2, N, order=2)


def rotation_to(N: int, u) -> np.ndarray:
    """Unitary on the spin-N/2 irrep rotating the z axis onto u.

    Built as exp(-i phi S_z) exp(-i theta S_y); columns are the S_u eigenvectors
    in the same ordering as the Dicke basis (eigenvalue N/2 - k).
    """
    theta, phi = direction_angles(u)
    sx, sy, sz = spin_components(N)
    w, v = np.linalg.eigh(sy)
    ry = (v * np.exp(-1j * theta * w)) @ v.conj().T
    rz = np.diag(np.exp(-1j * phi * np.diag(sz).real))
    return rz @ ry


# ----------------------------------------------------------------------------
# brute-force tensor-product constructions, used as test oracles (N <= ~10)

PAULI = {
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def pauli_along(u) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    return u[0] * PAULI["x"] + u[1] * PAULI["y"] + u[2] * PAULI["z"]


def symmetric_isometry(N: int) -> np.ndarray:
    """2^N x (N+1) isometry whose k-th column is |D_N^k> in the computational basis.

    Computational basis bit 0 is the up state (sigma_z = +1), so k counts set bits.
    """
    if N > 14:
        raise ValueError("explicit tensor space too large")
    dim = 2**N
    weights = np.array([bin(i).count("1") for i in range(dim)])
    iso = np.zeros((dim, N + 1))
    for k in range(N + 1):
        iso[weights == k, k] = np.exp(-0.5 * log_binom(N, k))
    return iso


def local_operator(op: np.ndarray, site: int, N: int) -> np.ndarray:
    left = np.eye(2**site)
    right = np.eye(2 ** (N - site - 1))
    return np.kron(np.kron(left, op), right)


def brute_force_collective(N: int, u) -> np.ndarray:
    """sum_i sigma_u^(i) / 2 on the full 2^N space."""
    s = pauli_along(u) / 2
    return sum(local_operator(s, i, N) for i in range(N))


def project_symmetric(op_full: np.ndarray, N: int) -> np.ndarray:
    iso = symmetric_isometry(N)
    return iso.T @ op_full @ iso
