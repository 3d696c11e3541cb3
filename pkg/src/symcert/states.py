"""Target-state generators, the Wineland squeezing parameter and the Uhlmann fidelity."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .symspace import log_binom, rotation_to, spin_components

STATE_TOL = 1e-12
PSD_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class SymmetricState:
    """Density matrix on the Dicke basis of N qubits."""

    matrix: np.ndarray
    parties: int
    label: str = ""

    def __post_init__(self):
        rho = np.array(self.matrix, dtype=complex)
        if rho.shape != (self.parties + 1, self.parties + 1):
            raise ValueError(f"expected {(self.parties + 1,) * 2} matrix, got {rho.shape}")
        if np.max(np.abs(rho - rho.conj().T)) > STATE_TOL:
            raise ValueError("state is not Hermitian")
        rho = (rho + rho.conj().T) / 2
        if abs(np.trace(rho).real - 1) > STATE_TOL:
            raise ValueError(f"state trace is {np.trace(rho).real}, expected 1")
        if np.linalg.eigvalsh(rho)[0] < -PSD_TOL:
            raise ValueError("state is not positive semidefinite")
        rho.setflags(write=False)
        object.__setattr__(self, "matrix", rho)

    @classmethod
    def from_vector(cls, psi, label: str = "") -> "SymmetricState":
        psi = np.asarray(psi, dtype=complex)
        psi = psi / np.linalg.norm(psi)
        return cls(np.outer(psi, psi.conj()), len(psi) - 1, label)

    @property
    def dim(self) -> int:
        return self.parties + 1

    def expectation(self, op) -> float:
        op = getattr(op, "matrix", op)
        return float(np.real(np.trace(op @ self.matrix)))

    def purity(self) -> float:
        return float(np.real(np.trace(self.matrix @ self.matrix)))

    def is_pure(self, tol: float = 1e-9) -> bool:
        return abs(self.purity() - 1) < tol


def _css_vector(N: int, u) -> np.ndarray:
    # all-up state rotated onto u
    return rotation_to(N, u)[:, 0]


def coherent_spin_state(N: int, u=(1.0, 0.0, 0.0)) -> SymmetricState:
    u = np.asarray(u, dtype=float)
    if abs(np.linalg.norm(u) - 1) > 1e-10:
        raise ValueError("direction must be a unit vector")
    if np.allclose(u, [1, 0, 0]):
        k = np.arange(N + 1)
        amps = np.exp(0.5 * (np.array([log_binom(N, i) for i in k]) - N * np.log(2)))
        psi = amps.astype(complex)
    else:
        psi = _css_vector(N, u)
    return SymmetricState.from_vector(psi, label=f"css:{u[0]:.6g},{u[1]:.6g},{u[2]:.6g}")


def one_axis_twisted_vector(N: int, mu: float) -> np.ndarray:
    k = np.arange(N + 1)
    amps = np.exp(0.5 * (np.array([log_binom(N, i) for i in k]) - N * np.log(2)))
    sz = N / 2 - k
    return amps * np.exp(-0.5j * mu * sz**2)


def one_axis_twisted(N: int, mu: float) -> SymmetricState:
    """x-polarized CSS evolved under exp(-i mu/2 S_z^2), mu = 2 chi t."""
    if N < 2:
        raise ValueError("one-axis twisting needs N >= 2")
    return SymmetricState.from_vector(one_axis_twisted_vector(N, mu), label=f"oat:{mu!r}")


def dicke_state(N: int, k: int) -> SymmetricState:
    if not 0 <= k <= N:
        raise ValueError(f"excitation number {k} out of range for N = {N}")
    psi = np.zeros(N + 1, dtype=complex)
    psi[k] = 1
    return SymmetricState.from_vector(psi, label=f"dicke:{k}")


def random_symmetric_state(N: int, rank: int, seed=None) -> SymmetricState:
    """Ginibre-induced random state rho = G G^dag / Tr[G G^dag], G of shape (N+1, rank)."""
    if not 1 <= rank <= N + 1:
        raise ValueError(f"rank {rank} out of range 1..{N + 1}")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    G = rng.standard_normal((N + 1, rank)) + 1j * rng.standard_normal((N + 1, rank))
    rho = G @ G.conj().T
    rho = rho / np.trace(rho).real
    return SymmetricState((rho + rho.conj().T) / 2, N, label=f"random:{rank}:ginibre")


def spin_covariances(state: SymmetricState):
    """Mean spin vector and symmetrized covariance matrix."""
    rho = getattr(state, "matrix", state)
    S = spin_components(rho.shape[0] - 1)
    mean = np.array([np.real(np.trace(s @ rho)) for s in S])
    cov = np.empty((3, 3))
    for i in range(3):
        for j in range(3):
            anti = S[i] @ S[j] + S[j] @ S[i]
            cov[i, j] = 0.5 * np.real(np.trace(anti @ rho)) - mean[i] * mean[j]
    return mean, cov


def wineland_xi2(state: SymmetricState) -> tuple[float, float]:
    """min over yz-plane directions n(theta) = (0, sin theta, cos theta) of N Var(S_n) / <S_x>^2.

    Returns (xi2, theta_star).
    """
    rho = getattr(state, "matrix", state)
    N = rho.shape[0] - 1
    mean, cov = spin_covariances(rho)
    if abs(mean[0]) < 1e-9:
        raise ValueError("vanishing polarization <S_x>; squeezing parameter undefined")
    # Var(S_n) = cos^2 Var(S_z) + sin^2 Var(S_y) + 2 sin cos Cov(y, z)
    yz = np.array([[cov[2, 2], cov[1, 2]], [cov[1, 2], cov[1, 1]]])
    w, v = np.linalg.eigh(yz)
    cz, sy = v[:, 0]
    theta = float(np.arctan2(sy, cz) % np.pi)
    return float(N * w[0] / mean[0] ** 2), theta


def squeezing_direction(state: SymmetricState) -> np.ndarray:
    _, theta = wineland_xi2(state)
    return np.array([0.0, np.sin(theta), np.cos(theta)])


def xi2_db(xi2: float) -> float:
    return 10 * np.log10(xi2)


def _psd_factor(rho: np.ndarray) -> np.ndarray:
    """V with rho = V V^dag; eigenvalues at round-off level are dropped as exact zeros."""
    w, v = np.linalg.eigh((rho + rho.conj().T) / 2)
    keep = w > 1e-13 * max(w[-1], 1e-300)
    return v[:, keep] * np.sqrt(w[keep])


def uhlmann_fidelity(rho1, rho2) -> float:
    """Tr[sqrt(sqrt(rho1) rho2 sqrt(rho1))]^2, evaluated as ||V1^dag V2||_1^2 with rho_i = V_i V_i^dag."""
    a = np.asarray(getattr(rho1, "matrix", rho1))
    b = np.asarray(getattr(rho2, "matrix", rho2))
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch {a.shape} vs {b.shape}")
    s = np.linalg.svd(_psd_factor(a).conj().T @ _psd_factor(b), compute_uv=False)
    return float(min(1.0, np.sum(s) ** 2))


def linear_overlap(rho1, rho2) -> float:
    a = getattr(rho1, "matrix", rho1)
    b = getattr(rho2, "matrix", rho2)
    return float(np.real(np.trace(a @ b)))
