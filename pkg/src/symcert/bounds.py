"""Quantum-information quantities bounded by a certified fidelity."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

SCHMIDT, QFI, RELATIVE_ENTROPY = "schmidt_rank", "qfi", "relative_entropy"


@dataclass(frozen=True)
class DerivedBound:
    kind: str
    value: object
    inputs: dict = field(default_factory=dict)


def _check_fidelity(F: float):
    if not 0.0 <= F <= 1.0:
        raise ValueError(f"fidelity {F} outside [0, 1]")


def schmidt_number_witness(fidelity: float, schmidt_coeffs) -> int:
    """Smallest Schmidt rank compatible with `fidelity` to the reference state.

    A state of Schmidt rank <= r has fidelity at most the sum of the r largest
    coefficients, so the witnessed rank is 1 + #{r : partial_sum(r) < F}.
    Equality does not witness the next rank.
    """
    _check_fidelity(fidelity)
    lam = np.asarray(schmidt_coeffs, dtype=float)
    if lam.ndim != 1 or lam.size == 0:
        raise ValueError("Schmidt coefficients must be a nonempty vector")
    if np.any(lam < 0) or np.any(np.diff(lam) > 1e-12):
        raise ValueError("Schmidt coefficients must be nonnegative and sorted decreasing")
    if abs(lam.sum() - 1) > 1e-9:
        raise ValueError(f"Schmidt coefficients sum to {lam.sum()}, expected 1")
    partial = np.cumsum(lam)
    # 1e-12 guards exact-tie inputs against cumsum round-off
    return int(1 + np.sum(partial < fidelity - 1e-12))


def qfi_bound(fidelity: float, N: int, target_pure: bool, qfi_target: float) -> tuple[float, float]:
    """Interval for F_Q(rho): qfi_target -+ zeta sqrt(1 - F) N^2, clipped to [0, N^2]."""
    _check_fidelity(fidelity)
    zeta = 6.0 if target_pure else 8.0
    half = zeta * np.sqrt(1.0 - fidelity) * N**2
    lo = max(0.0, qfi_target - half)
    hi = min(float(N**2), qfi_target + half)
    return lo, hi


def relative_entropy_bound(fidelity: float, rho_entropy_term: float = 0.0) -> float:
    """D(rho || sigma) >= Tr[rho log2 rho] - log2 F. Returns +inf at F = 0."""
    _check_fidelity(fidelity)
    if fidelity == 0:
        return float("inf")
    return float(rho_entropy_term - np.log2(fidelity))


def neg_entropy_term(rho) -> float:
    """Tr[rho log2 rho] (zero for pure states)."""
    w = np.linalg.eigvalsh(getattr(rho, "matrix", rho))
    w = w[w > 1e-15]
    return float(np.sum(w * np.log2(w)))


def derive_all(fidelity: float, N: int, *, schmidt_coeffs=None, qfi_target=None,
               target_pure: bool = True, rho_entropy_term: float = 0.0) -> list[DerivedBound]:
    out = []
    if schmidt_coeffs is not None:
        out.append(DerivedBound(SCHMIDT, schmidt_number_witness(fidelity, schmidt_coeffs),
                                {"fidelity": fidelity, "schmidt_coeffs": list(map(float, schmidt_coeffs))}))
    if qfi_target is not None:
        out.append(DerivedBound(QFI, qfi_bound(fidelity, N, target_pure, qfi_target),
                                {"fidelity": fidelity, "N": N, "target_pure": target_pure, "qfi_target": qfi_target}))
    out.append(DerivedBound(RELATIVE_ENTROPY, relative_entropy_bound(fidelity, rho_entropy_term),
                            {"fidelity": fidelity, "rho_entropy_term": rho_entropy_term}))
    return out
