"""Classical polarization optics: Mueller matrices, Jones matrices, and the
coherency-matrix bridge between them.

Stokes basis is (S0, S1, S2, S3) with S1 = H-V, S2 = +45 - (-45), S3 = R-L.
The matching Pauli-like basis TAU is chosen so that tau_1 maps H/V, tau_2
maps +/-45 and tau_3 maps circular polarization (R has Jones vector
(1, -i)/sqrt(2)). With this pairing the isotropic depolarizer diag(1,a,a,a)
corresponds exactly to the qubit depolarizing channel.

A Mueller matrix is physical (realizable as a completely positive map) iff
its 4x4 Hermitian coherency matrix H is positive semidefinite; the spectral
decomposition of H yields the weighted Jones operators of the map.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np

from .errors import NonPhysicalMuellerError, ValidationError
from .numerics import DEFAULT_TOL, hermitian_eig

_I2 = np.eye(2, dtype=complex)

# Stokes-ordered Pauli set: identity, H/V, +/-45, R/L
TAU = np.array(
    [
        [[1.0, 0.0], [0.0, 1.0]],
        [[1.0, 0.0], [0.0, -1.0]],
        [[0.0, 1.0], [1.0, 0.0]],
        [[0.0, 1.0j], [-1.0j, 0.0]],
    ],
    dtype=complex,
)

# kron(tau_i, tau_j*) for row-major (i, j), used by both coherency directions
_TAU_KRON = np.stack(
    [np.kron(TAU[i], TAU[j].conj()) for i in range(4) for j in range(4)]
)


def validate_mueller(m: np.ndarray) -> np.ndarray:
    m = np.asarray(m, dtype=float)
    if m.shape != (4, 4):
        raise ValidationError(f"expected a 4x4 Mueller matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValidationError("Mueller matrix contains non-finite entries")
    return m


def coherency_from_mueller(m: np.ndarray) -> np.ndarray:
    """Hermitian coherency matrix H = (1/4) sum_ij M_ij kron(tau_i, tau_j*)."""
    m = validate_mueller(m)
    h = np.tensordot(m.reshape(16), _TAU_KRON, axes=(0, 0)) / 4.0
    return (h + h.conj().T) / 2


def mueller_from_coherency(h: np.ndarray) -> np.ndarray:
    """Inverse relation M_ij = Tr[H kron(tau_i, tau_j*)]."""
    m = np.einsum("kab,ba->k", _TAU_KRON, np.asarray(h, dtype=complex))
    return m.real.reshape(4, 4)


def mueller_from_jones(j: np.ndarray) -> np.ndarray:
    """Mueller matrix of a non-depolarizing element, M_ij = Tr(tau_i J tau_j J†)/2."""
    j = np.asarray(j, dtype=complex)
    if j.shape != (2, 2) or not np.all(np.isfinite(j)):
        raise ValidationError("Jones matrix must be a finite 2x2 matrix")
    jd = j.conj().T
    m = np.empty((4, 4))
    for col in range(4):
        x = j @ TAU[col] @ jd
        for row in range(4):
            m[row, col] = np.trace(TAU[row] @ x).real / 2.0
    return m


@dataclass(frozen=True)
class KrausSet:
    """Weighted Jones operators {(lambda_mu, T_mu)} of a polarization map.

    Weights are the coherency eigenvalues, sorted descending; each Jones
    matrix is normalized to Tr(T†T) = 2 with its global phase fixed by making
    the largest-magnitude entry real positive.
    """

    weights: np.ndarray
    jones: np.ndarray

    def __len__(self) -> int:
        return len(self.weights)

    def reconstruct(self) -> np.ndarray:
        """Rebuild the Mueller matrix as sum_mu lambda_mu * lift(T_mu)."""
        m = np.zeros((4, 4))
        for w, t in zip(self.weights, self.jones):
            m += w * mueller_from_jones(t)
        return m

    def completeness(self) -> np.ndarray:
        """sum_mu lambda_mu T_mu† T_mu; equals the identity iff trace-preserving."""
        return np.einsum("k,kba,kbc->ac", self.weights, self.jones.conj(), self.jones)


def _fix_phase(t: np.ndarray) -> np.ndarray:
    idx = int(np.argmax(np.abs(t)))
    pivot = t.flat[idx]
    if abs(pivot) < 1e-300:
        return t
    return t * (abs(pivot) / pivot)


def cloude_decompose(m: np.ndarray, tol: float = DEFAULT_TOL) -> KrausSet:
    """Spectral decomposition of the coherency matrix into weighted Jones pairs.

    Eigenvalues in [-tol, 0] are treated as zero and dropped; anything below
    -tol means the Mueller matrix is not completely positive.
    """
    h = coherency_from_mueller(m)
    eig = hermitian_eig(h, tol)
    wmin = float(eig.values[-1])
    if wmin < -tol:
        raise NonPhysicalMuellerError(
            f"Mueller matrix is not physical: coherency eigenvalue {wmin:.3e} < -tol"
        )
    weights = []
    jones = []
    for k, w in enumerate(eig.values):
        if w <= tol:
            continue
        t = math.sqrt(2.0) * eig.vectors[:, k].reshape(2, 2)
        weights.append(float(w))
        jones.append(_fix_phase(t))
    if not jones:  # all-absorbing edge; keep a null element for shape sanity
        weights = [0.0]
        jones = [np.zeros((2, 2), dtype=complex)]
    return KrausSet(weights=np.array(weights), jones=np.stack(jones))


def is_physical(m: np.ndarray, tol: float = DEFAULT_TOL) -> bool:
    """True iff the smallest coherency eigenvalue is >= -tol."""
    h = coherency_from_mueller(m)
    wmin = float(np.linalg.eigvalsh(h).min())
    return wmin >= -tol


# ---------------------------------------------------------------------------
# forward constructors for the three media types
# ---------------------------------------------------------------------------

def depolarizer(delta: float) -> np.ndarray:
    """Isotropic depolarizer diag(1, a, a, a) with a = 1 - delta."""
    if not 0.0 <= delta < 1.0:
        raise ValidationError(f"depolarization factor delta={delta} outside [0, 1)")
    a = 1.0 - delta
    return np.diag([1.0, a, a, a])


def _unit_axis(axis) -> np.ndarray:
    n = np.asarray(axis, dtype=float).reshape(3)
    norm = float(np.linalg.norm(n))
    if norm < 1e-12:
        raise ValidationError("retarder axis must be nonzero")
    if abs(norm - 1.0) > 1e-6:
        raise ValidationError(f"retarder axis must be unit length, |axis| = {norm:.6f}")
    return n / norm


def retarder(retardance: float, axis) -> np.ndarray:
    """Retarder: rotation of the Stokes sphere by ``retardance`` about ``axis``."""
    n = _unit_axis(axis)
    k = np.array([[0.0, -n[2], n[1]], [n[2], 0.0, -n[0]], [-n[1], n[0], 0.0]])
    rot = (
        math.cos(retardance) * np.eye(3)
        + math.sin(retardance) * k
        + (1.0 - math.cos(retardance)) * np.outer(n, n)
    )
    m = np.eye(4)
    m[1:, 1:] = rot
    return m


def diattenuator(d, tu: float = 1.0) -> np.ndarray:
    """Diattenuator with diattenuation vector d (|d| < 1) and transmittance tu."""
    d = np.asarray(d, dtype=float).reshape(3)
    mag = float(np.linalg.norm(d))
    if mag >= 1.0:
        raise ValidationError(f"diattenuation |d| = {mag:.6f} must be < 1")
    if not 0.0 < tu <= 1.0:
        raise ValidationError(f"transmittance tu={tu} outside (0, 1]")
    m = np.eye(4)
    if mag > 0.0:
        dhat = d / mag
        perp = math.sqrt(1.0 - mag * mag)
        m[0, 1:] = d
        m[1:, 0] = d
        m[1:, 1:] = perp * np.eye(3) + (1.0 - perp) * np.outer(dhat, dhat)
    return tu * m


def jones_retarder(retardance: float, axis) -> np.ndarray:
    """Jones matrix exp(i R n.tau / 2) whose Mueller lift is retarder(R, axis)."""
    n = _unit_axis(axis)
    gen = n[0] * TAU[1] + n[1] * TAU[2] + n[2] * TAU[3]
    return math.cos(retardance / 2.0) * _I2 + 1.0j * math.sin(retardance / 2.0) * gen


def jones_diattenuator(d, tu: float = 1.0) -> np.ndarray:
    """Hermitian Jones matrix whose Mueller lift is diattenuator(d, tu)."""
    d = np.asarray(d, dtype=float).reshape(3)
    mag = float(np.linalg.norm(d))
    if mag >= 1.0:
        raise ValidationError(f"diattenuation |d| = {mag:.6f} must be < 1")
    if not 0.0 < tu <= 1.0:
        raise ValidationError(f"transmittance tu={tu} outside (0, 1]")
    t_hi = tu * (1.0 + mag)
    t_lo = tu * (1.0 - mag)
    a = (math.sqrt(t_hi) + math.sqrt(t_lo)) / 2.0
    b = (math.sqrt(t_hi) - math.sqrt(t_lo)) / 2.0
    if mag == 0.0:
        return a * _I2
    dhat = d / mag
    return a * _I2 + b * (dhat[0] * TAU[1] + dhat[1] * TAU[2] + dhat[2] * TAU[3])


def compose(ms) -> np.ndarray:
    """Matrix product of Mueller matrices, leftmost applied last."""
    ms = list(ms)
    if not ms:
        raise ValidationError("compose requires at least one Mueller matrix")
    return functools.reduce(np.matmul, (validate_mueller(m) for m in ms))
