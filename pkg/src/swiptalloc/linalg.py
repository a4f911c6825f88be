"""Dense complex Hermitian linear algebra used throughout the package.

All matrices here are small (dimension <= 16 after real embedding), so the
routines favour accuracy and simplicity over scalability.  Everything is a
pure function on numpy arrays; nothing mutates its inputs.
"""

from __future__ import annotations

import numpy as np

from .errors import DimError, InvalidMatrix

# Hermitian symmetry slack accepted by validation, relative to matrix scale.
HERMITIAN_RTOL = 1e-12


def check_finite(a: np.ndarray) -> np.ndarray:
    a = np.asarray(a)
    if not np.all(np.isfinite(a)):
        raise InvalidMatrix("matrix contains NaN or Inf entries")
    return a


def hermitian_part(a: np.ndarray) -> np.ndarray:
    """Project onto the Hermitian subspace: (A + A^H) / 2."""
    a = np.asarray(a, dtype=complex)
    return 0.5 * (a + a.conj().T)


def as_hermitian(a: np.ndarray, rtol: float = HERMITIAN_RTOL) -> np.ndarray:
    """Validate Hermitian symmetry and return the exactly symmetrized matrix."""
    a = check_finite(np.asarray(a, dtype=complex))
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise InvalidMatrix(f"expected a square matrix, got shape {a.shape}")
    scale = 1.0 + (np.abs(a).max() if a.size else 0.0)
    if np.abs(a - a.conj().T).max(initial=0.0) > rtol * scale:
        raise InvalidMatrix("matrix is not Hermitian within tolerance")
    return hermitian_part(a)


def eig_hermitian(h: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a Hermitian matrix.

    Returns (eigenvalues ascending, eigenvectors as orthonormal columns).
    """
    h = as_hermitian(h)
    w, v = np.linalg.eigh(h)
    return w, v


def null_space_basis(h: np.ndarray, tol: float = 1e-7) -> np.ndarray:
    """Orthonormal basis of the numerical null space of a Hermitian matrix.

    A direction v belongs to the null space when |H v| <= tol * |H|_F * |v|,
    which for Hermitian H is the eigenspace with |eigenvalue| below
    tol * |H|_F.  Returns an (n, r) matrix; r may be zero.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    h = as_hermitian(h)
    cutoff = tol * np.linalg.norm(h, "fro")
    w, v = np.linalg.eigh(h)
    keep = np.abs(w) <= cutoff
    return v[:, keep]


def trace_inner(a: np.ndarray, b: np.ndarray) -> float:
    """Re Tr(A B) for Hermitian A, B; exactly symmetric in its arguments."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.shape != b.shape:
        raise DimError(f"shape mismatch {a.shape} vs {b.shape}")
    # For Hermitian operands Tr(AB) = sum_ij conj(A_ij) B_ij, whose real part
    # is an elementwise-symmetric sum, so float ordering matches both ways.
    return float(np.real(np.vdot(a, b)))


def real_embedding(h: np.ndarray) -> np.ndarray:
    """Map Hermitian H = A + iB to the real symmetric [[A, -B], [B, A]].

    Eigenvalues of the output are those of H with doubled multiplicity.
    """
    h = np.asarray(h, dtype=complex)
    a, b = h.real, h.imag
    return np.block([[a, -b], [b, a]])


def complex_recovery(s: np.ndarray) -> np.ndarray:
    """Average a real symmetric 2n x 2n matrix back to an n x n Hermitian one.

    Inverse of `real_embedding` on its range; orthogonal projection onto the
    embedded subspace elsewhere.  Preserves positive semidefiniteness.
    """
    s = np.asarray(s, dtype=float)
    n2 = s.shape[0]
    if n2 % 2:
        raise DimError("real embedding must have even dimension")
    n = n2 // 2
    a = 0.5 * (s[:n, :n] + s[n:, n:])
    b = 0.5 * (s[n:, :n] - s[:n, n:])
    return hermitian_part(a + 1j * b)


def random_hermitian(rng: np.random.Generator, dim: int, scale: float = 1.0) -> np.ndarray:
    m = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return hermitian_part(scale * m)


def random_psd(rng: np.random.Generator, dim: int, rank: int | None = None) -> np.ndarray:
    """Random PSD Hermitian matrix, optionally of prescribed rank."""
    r = dim if rank is None else rank
    f = (rng.standard_normal((dim, r)) + 1j * rng.standard_normal((dim, r))) / np.sqrt(2.0)
    return hermitian_part(f @ f.conj().T)
