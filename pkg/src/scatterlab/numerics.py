"""Dense complex-matrix primitives with explicit tolerance contracts.

Everything here operates on small (2x2 / 4x4) numpy arrays and is backed by
LAPACK via numpy.linalg; the wrappers add the precondition checks and
ordering/clamping conventions the rest of the package relies on.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NonHermitianError, NotPositiveError, ValidationError

DEFAULT_TOL = 1e-10


@dataclass(frozen=True)
class HermitianEig:
    """Eigensystem of a Hermitian matrix, eigenvalues sorted descending.

    ``vectors[:, k]`` is the orthonormal eigenvector paired with ``values[k]``.
    """

    values: np.ndarray
    vectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return (self.vectors * self.values) @ self.vectors.conj().T


def asymmetry(a: np.ndarray) -> float:
    """Max-norm deviation from Hermiticity, max|A - A^dagger|."""
    return float(np.max(np.abs(a - a.conj().T)))


def _require_finite(a: np.ndarray) -> np.ndarray:
    a = np.asarray(a)
    if not np.all(np.isfinite(a)):
        raise ValidationError("matrix contains non-finite entries")
    return a.astype(complex)


def hermitian_eig(a: np.ndarray, tol: float = DEFAULT_TOL) -> HermitianEig:
    """Eigendecompose a Hermitian matrix, eigenvalues descending.

    Rejects inputs whose Hermiticity defect exceeds ``tol``; the symmetrized
    matrix (A + A^dagger)/2 is what actually gets decomposed, so the
    reconstruction error stays within 10*tol*max|A|.
    """
    a = _require_finite(a)
    asym = asymmetry(a)
    if asym > tol:
        raise NonHermitianError(
            f"matrix is not Hermitian: asymmetry {asym:.3e} exceeds tol {tol:.3e}"
        )
    w, v = np.linalg.eigh((a + a.conj().T) / 2)
    order = np.argsort(w)[::-1]
    return HermitianEig(values=w[order], vectors=v[:, order])


def psd_sqrt(a: np.ndarray, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Hermitian square root of a PSD matrix.

    Eigenvalues below -tol are a genuine negativity and rejected; the band
    [-tol, tol) collapses to zero. Zeroing the positive side too keeps B*B
    within the 10*tol reconstruction contract and stops the square root from
    amplifying eigenvalue rounding junk (sqrt(1e-17) ~ 3e-9) into B.
    """
    eig = hermitian_eig(a, tol)
    wmin = float(eig.values[-1])
    if wmin < -tol:
        raise NotPositiveError(
            f"matrix is not PSD: smallest eigenvalue {wmin:.3e} below -tol {-tol:.3e}"
        )
    w = np.where(eig.values < tol, 0.0, eig.values)
    b = (eig.vectors * np.sqrt(w)) @ eig.vectors.conj().T
    return (b + b.conj().T) / 2


def general_eigenvalues(a: np.ndarray) -> np.ndarray:
    """Eigenvalues of a general (non-Hermitian) 4x4 matrix, unordered."""
    a = _require_finite(a)
    if a.shape != (4, 4):
        raise ValidationError(f"expected a 4x4 matrix, got shape {a.shape}")
    return np.linalg.eigvals(a)
