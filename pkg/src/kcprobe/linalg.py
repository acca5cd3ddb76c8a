"""Dense complex linear algebra primitives for small operator spaces.

Everything here works on plain square ``numpy`` arrays of ``complex128``.
Matrices are validated where a mathematical property is load-bearing
(hermiticity, unitarity, density-matrix constraints); validation failures
raise :class:`~kcprobe.errors.InvariantViolation`.
"""

from __future__ import annotations

import numpy as np

from .errors import DimensionError, InvariantViolation
from .tolerances import DEFAULT, Tolerances

SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
SIGMA_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
SIGMA_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)


def as_complex_matrix(a) -> np.ndarray:
    """Coerce to a finite square complex128 array."""
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m.view(float))):
        raise InvariantViolation("matrix contains non-finite entries")
    return m


def require_same_dim(a: np.ndarray, b: np.ndarray) -> int:
    if a.shape != b.shape:
        raise DimensionError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return a.shape[0]


def frobenius(a: np.ndarray) -> float:
    return float(np.linalg.norm(a))


def commutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Return ``a @ b - b @ a``."""
    a = as_complex_matrix(a)
    b = as_complex_matrix(b)
    require_same_dim(a, b)
    return a @ b - b @ a


def hs_inner(a: np.ndarray, b: np.ndarray) -> complex:
    """Hilbert-Schmidt inner product ``tr(a^H b)``."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    require_same_dim(a, b)
    return complex(np.sum(a.conj() * b))


def hs_norm(a: np.ndarray) -> float:
    return float(np.sqrt(max(hs_inner(a, a).real, 0.0)))


def is_hermitian(m: np.ndarray, tol: Tolerances = DEFAULT) -> bool:
    scale = max(frobenius(m), 1.0)
    return frobenius(m - m.conj().T) <= tol.hermiticity * scale


def check_hermitian(m: np.ndarray, tol: Tolerances = DEFAULT, what: str = "matrix") -> np.ndarray:
    m = as_complex_matrix(m)
    if not is_hermitian(m, tol):
        raise InvariantViolation(
            f"{what} is not Hermitian: |M - M^H|_F = {frobenius(m - m.conj().T):.3e}"
        )
    return m


def check_unitary(u: np.ndarray, tol: Tolerances = DEFAULT, what: str = "matrix") -> np.ndarray:
    u = as_complex_matrix(u)
    defect = frobenius(u.conj().T @ u - np.eye(u.shape[0]))
    if defect > tol.unitarity:
        raise InvariantViolation(f"{what} is not unitary: |U^H U - 1|_F = {defect:.3e}")
    return u


def check_density(rho: np.ndarray, tol: Tolerances = DEFAULT) -> np.ndarray:
    rho = check_hermitian(rho, tol, what="density matrix")
    tr = np.trace(rho)
    if abs(tr - 1.0) > tol.density_trace:
        raise InvariantViolation(f"density matrix trace {tr} is not 1")
    lo = float(np.linalg.eigvalsh(rho)[0])
    if lo < -tol.density_eig:
        raise InvariantViolation(f"density matrix has negative eigenvalue {lo:.3e}")
    return rho


def hermitian_eig(h: np.ndarray, tol: Tolerances = DEFAULT):
    """Eigendecomposition of a Hermitian matrix.

    Returns ``(w, v)`` with eigenvalues ``w`` sorted ascending and unitary
    ``v`` whose columns are the eigenvectors, so ``h = v @ diag(w) @ v^H``.
    Eigenvector phases are not pinned; callers must not depend on them.
    """
    h = check_hermitian(h, tol)
    w, v = np.linalg.eigh(h)
    return w, v


def unitary_from_hamiltonian(h: np.ndarray, t: float, tol: Tolerances = DEFAULT) -> np.ndarray:
    """Return ``exp(-i t h)`` computed through the eigendecomposition of ``h``."""
    if not np.isfinite(t):
        raise InvariantViolation(f"time must be finite, got {t}")
    h = check_hermitian(h, tol)
    if t == 0.0:
        return np.eye(h.shape[0], dtype=complex)
    w, v = np.linalg.eigh(h)
    return (v * np.exp(-1j * w * t)) @ v.conj().T


def orthonormalize_hs(ops, rank_tol: float | None = None, tol: Tolerances = DEFAULT) -> list:
    """Orthonormalize operators in the Hilbert-Schmidt inner product.

    Modified Gram-Schmidt with re-orthogonalization; inputs whose residual
    after projection falls below ``rank_tol`` are dropped.  Order of the
    surviving inputs is preserved.
    """
    if rank_tol is None:
        rank_tol = tol.rank
    mats = [np.asarray(op, dtype=complex) for op in ops]
    if not mats:
        raise DimensionError("orthonormalize_hs needs at least one operator")
    d = mats[0].shape
    basis: list[np.ndarray] = []
    for m in mats:
        if m.shape != d:
            raise DimensionError(f"mixed operator shapes: {m.shape} vs {d}")
        v = m.copy()
        for _ in range(2):  # second pass keeps orthogonality near machine precision
            for b in basis:
                v = v - hs_inner(b, v) * b
        norm = hs_norm(v)
        if norm >= rank_tol:
            basis.append(v / norm)
    return basis


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product of two square matrices."""
    return np.kron(as_complex_matrix(a), as_complex_matrix(b))
