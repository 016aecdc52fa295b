"""Two-qubit polarization states and the entanglement/mixedness measures.

Basis order is fixed to the product basis (HH, HV, VH, VV). The measures are
the tangle (concurrence squared, via the spin-flip eigenvalue formula) and the
linear entropy (4/3)[1 - Tr(rho^2)]; together they place a state in the
linear-entropy/tangle plane bounded below by the Werner curve and above by
the maximally-entangled-mixed-state (MEMS) frontier.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .errors import InvalidStateError, ValidationError
from .numerics import general_eigenvalues, hermitian_eig, psd_sqrt

STATE_TOL = 1e-9

# max linear entropy of the 16/27-point where the two MEMS branches meet
_MEMS_KNEE_SL = 16.0 / 27.0
_MEMS_ZERO_SL = 8.0 / 9.0

_SIGMA_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]])
_SPIN_FLIP = np.kron(_SIGMA_Y, _SIGMA_Y).real  # real symmetric

_SINGLET_KET = np.array([0.0, 1.0, -1.0, 0.0], dtype=complex) / math.sqrt(2.0)


def validate_density_matrix(rho: np.ndarray, tol: float = STATE_TOL) -> np.ndarray:
    """Check Hermiticity, unit trace and positivity; return as complex array."""
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (4, 4):
        raise InvalidStateError(f"expected a 4x4 density matrix, got shape {rho.shape}")
    if not np.all(np.isfinite(rho)):
        raise InvalidStateError("density matrix contains non-finite entries")
    asym = float(np.max(np.abs(rho - rho.conj().T)))
    if asym > tol:
        raise InvalidStateError(f"density matrix not Hermitian: asymmetry {asym:.3e}")
    tr = complex(np.trace(rho))
    if abs(tr - 1.0) > tol:
        raise InvalidStateError(f"density matrix trace {tr.real:.12f} != 1")
    wmin = float(np.linalg.eigvalsh((rho + rho.conj().T) / 2).min())
    if wmin < -tol:
        raise InvalidStateError(f"density matrix has negative eigenvalue {wmin:.3e}")
    return rho


def singlet() -> np.ndarray:
    """Density matrix of the polarization singlet (|HV> - |VH>)/sqrt(2)."""
    return np.outer(_SINGLET_KET, _SINGLET_KET.conj())


def werner(p: float) -> np.ndarray:
    """Werner state p*singlet + (1-p)/4 * identity."""
    if not 0.0 <= p <= 1.0:
        raise ValidationError(f"werner parameter p={p} outside [0, 1]")
    return p * singlet() + (1.0 - p) / 4.0 * np.eye(4, dtype=complex)


def euler_unitary(alpha: float, beta: float, gamma: float) -> np.ndarray:
    """Single-qubit unitary parametrized by the three Euler angles of a rotation."""
    c = math.cos(gamma / 2.0)
    s = math.sin(gamma / 2.0)
    return np.array(
        [
            [np.exp(-0.5j * (alpha + beta)) * c, -np.exp(-0.5j * (alpha - beta)) * s],
            [np.exp(0.5j * (alpha - beta)) * s, np.exp(0.5j * (alpha + beta)) * c],
        ]
    )


def generalized_werner(p: float, alpha: float, beta: float, gamma: float) -> np.ndarray:
    """Werner state rotated by a local unitary on the first photon only."""
    v = euler_unitary(alpha, beta, gamma)
    vi = np.kron(v, np.eye(2))
    return vi @ werner(p) @ vi.conj().T


def mems(c: float) -> np.ndarray:
    """Maximally entangled mixed state with concurrence c (two-branch family).

    The populations sit on (HH, HV, VV) with the HH/VV coherence c/2; the
    HH/VV population is c/2 above concurrence 2/3 and frozen at 1/3 below it.
    """
    if not 0.0 <= c <= 1.0:
        raise ValidationError(f"mems concurrence c={c} outside [0, 1]")
    x = c / 2.0 if c >= 2.0 / 3.0 else 1.0 / 3.0
    rho = np.zeros((4, 4), dtype=complex)
    rho[0, 0] = x
    rho[3, 3] = x
    rho[1, 1] = 1.0 - 2.0 * x
    rho[0, 3] = c / 2.0
    rho[3, 0] = c / 2.0
    return rho


def tangle(rho: np.ndarray, validate: bool = True) -> float:
    """Tangle (concurrence squared) of a two-qubit density matrix.

    Uses the spin-flip construction: the eigenvalues of
    rho (sigma_y x sigma_y) rho* (sigma_y x sigma_y) are real nonnegative for
    any valid state; their square roots enter the concurrence.
    """
    if validate:
        rho = validate_density_matrix(rho)
    rt = rho @ _SPIN_FLIP @ rho.conj() @ _SPIN_FLIP
    evals = general_eigenvalues(rt)
    imax = float(np.max(np.abs(evals.imag)))
    if imax > 1e-9:
        raise InvalidStateError(f"spin-flip spectrum has imaginary part {imax:.3e}")
    lam = np.sort(evals.real)[::-1]
    if lam[-1] < -1e-9:
        raise InvalidStateError(f"spin-flip spectrum has negative eigenvalue {lam[-1]:.3e}")
    lam = np.maximum(lam, 0.0)
    root = np.sqrt(lam)
    conc = root[0] - root[1] - root[2] - root[3]
    t = max(0.0, conc) ** 2
    return min(t, 1.0)


def linear_entropy(rho: np.ndarray, validate: bool = True) -> float:
    """Linear entropy (4/3)[1 - Tr(rho^2)]: 0 for pure, 1 for maximally mixed."""
    if validate:
        rho = validate_density_matrix(rho)
    purity = float(np.trace(rho @ rho).real)
    return float(min(max(4.0 / 3.0 * (1.0 - purity), 0.0), 1.0))


def fidelity(rho: np.ndarray, sigma: np.ndarray, validate: bool = True) -> float:
    """Fidelity (Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2, symmetric in its arguments."""
    if validate:
        rho = validate_density_matrix(rho)
        sigma = validate_density_matrix(sigma)
    return _fidelity_from_sqrt(psd_sqrt(rho, STATE_TOL), sigma)


def _fidelity_from_sqrt(sqrt_rho: np.ndarray, sigma: np.ndarray) -> float:
    inner = sqrt_rho @ sigma @ sqrt_rho
    w = hermitian_eig(inner, 1e-8).values
    f = float(np.sum(np.sqrt(np.maximum(w, 0.0))) ** 2)
    return min(max(f, 0.0), 1.0)


# ---------------------------------------------------------------------------
# generalized-Werner fit
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GwFitResult:
    p: float
    alpha: float
    beta: float
    gamma: float
    fidelity: float
    converged: bool


def _euler_angles_from_unitary(u: np.ndarray) -> tuple[float, float, float]:
    """Invert the Euler parametrization for an arbitrary 2x2 unitary.

    The global phase is stripped (det normalized to 1); the overall sign
    ambiguity of SU(2) does not affect conjugation.
    """
    u = u / np.sqrt(np.linalg.det(u))
    c = abs(u[0, 0])
    s = abs(u[1, 0])
    gamma = 2.0 * math.atan2(s, c)
    phi00 = float(np.angle(u[0, 0])) if c > 1e-12 else 0.0
    phi10 = float(np.angle(u[1, 0])) if s > 1e-12 else 0.0
    alpha = phi10 - phi00
    beta = -phi10 - phi00
    return alpha % (2.0 * math.pi), beta % (2.0 * math.pi), gamma


def _aligned_unitary_guess(rho: np.ndarray) -> tuple[float, float, float] | None:
    """Guess the local rotation from the dominant eigenvector of rho.

    For any state of the rotated-Werner family the top eigenvector is the
    rotated singlet; peeling the singlet off it recovers the rotation. Returns
    None when the eigenvector is too close to a product state to invert.
    """
    eig = hermitian_eig(rho, 1e-8)
    chi = eig.vectors[:, 0].reshape(2, 2)
    # (V x I)|singlet> reshapes to V @ Psi with Psi the singlet 2x2 kernel
    psi_inv = math.sqrt(2.0) * np.array([[0.0, -1.0], [1.0, 0.0]])
    cand = chi @ psi_inv
    u, sv, vh = np.linalg.svd(cand)
    if sv[-1] < 1e-6:
        return None
    return _euler_angles_from_unitary(u @ vh)


def gw_fit(
    rho: np.ndarray,
    starts: int = 8,
    seed: int = 0,
    f_tol: float = 1e-8,
) -> GwFitResult:
    """Best generalized-Werner approximation of ``rho`` by maximal fidelity.

    Multi-start local search over (p, alpha, beta, gamma); the start list
    combines a data-driven guess (mixedness-matched p, rotation peeled from
    the dominant eigenvector) with seeded random starts over the full box.
    """
    rho = validate_density_matrix(rho)
    sqrt_rho = psd_sqrt(rho, STATE_TOL)

    def neg_f(x: np.ndarray) -> float:
        p = min(max(float(x[0]), 0.0), 1.0)
        penalty = (float(x[0]) - p) ** 2
        sigma = generalized_werner(p, float(x[1]), float(x[2]), float(x[3]))
        return -_fidelity_from_sqrt(sqrt_rho, sigma) + penalty

    p_mix = math.sqrt(max(0.0, 1.0 - linear_entropy(rho, validate=False)))
    top = float(hermitian_eig(rho, 1e-8).values[0])
    p_top = min(max((4.0 * top - 1.0) / 3.0, 0.0), 1.0)

    start_points = [np.array([p_mix, 0.0, 0.0, 0.0])]
    guess = _aligned_unitary_guess(rho)
    if guess is not None:
        start_points.insert(0, np.array([p_mix, *guess]))
        start_points.append(np.array([p_top, *guess]))
    rng = np.random.default_rng(seed)
    while len(start_points) < max(starts, 8):
        start_points.append(
            np.array(
                [
                    rng.uniform(0.0, 1.0),
                    rng.uniform(0.0, 2.0 * math.pi),
                    rng.uniform(0.0, 2.0 * math.pi),
                    rng.uniform(0.0, 2.0 * math.pi),
                ]
            )
        )

    bounds = [(0.0, 1.0), (None, None), (None, None), (None, None)]
    best_x = start_points[0]
    best_val = neg_f(best_x)
    for x0 in start_points:
        res = minimize(neg_f, x0, method="L-BFGS-B", bounds=bounds,
                       options={"maxiter": 300})
        if res.fun < best_val:
            best_val = float(res.fun)
            best_x = res.x
        if -best_val >= 1.0 - 1e-9:
            break

    polish = minimize(
        neg_f,
        best_x,
        method="Nelder-Mead",
        options={"xatol": 1e-10, "fatol": 1e-12, "maxiter": 4000},
    )
    if polish.fun < best_val:
        best_val = float(polish.fun)
        best_x = polish.x

    p = min(max(float(best_x[0]), 0.0), 1.0)
    alpha, beta, gamma = (float(a) % (2.0 * math.pi) for a in best_x[1:])
    f_max = _fidelity_from_sqrt(sqrt_rho, generalized_werner(p, alpha, beta, gamma))
    converged = bool(polish.success) or f_max >= 1.0 - f_tol
    return GwFitResult(p=p, alpha=alpha, beta=beta, gamma=gamma,
                       fidelity=f_max, converged=converged)


# ---------------------------------------------------------------------------
# the linear-entropy/tangle plane
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PlanePoint:
    """A point in the linear-entropy/tangle plane, with optional error bars."""

    s_l: float
    t: float
    sigma_sl: float | None = None
    sigma_t: float | None = None


def werner_tangle_of_p(p: float) -> float:
    """Tangle of the Werner state with mixing parameter p."""
    return max(0.0, (3.0 * p - 1.0) / 2.0) ** 2


def werner_tangle_at(s_l: float) -> float:
    """Werner-curve tangle as a function of linear entropy (p = sqrt(1 - S_L))."""
    return werner_tangle_of_p(math.sqrt(max(0.0, 1.0 - s_l)))


def mems_tangle_at(s_l: float) -> float:
    """MEMS-frontier tangle at a given linear entropy (upper physical bound)."""
    if s_l <= _MEMS_KNEE_SL:
        conc = (1.0 + math.sqrt(max(0.0, 1.0 - 1.5 * s_l))) / 2.0
        return conc * conc
    if s_l <= _MEMS_ZERO_SL:
        return 1.5 * (_MEMS_ZERO_SL - s_l)
    return 0.0


def mems_entropy_of_tangle(t: float) -> float:
    """Linear entropy on the MEMS frontier at a given tangle (inverse bound)."""
    conc = math.sqrt(min(max(t, 0.0), 1.0))
    if conc >= 2.0 / 3.0:
        return 8.0 / 3.0 * conc * (1.0 - conc)
    return _MEMS_ZERO_SL - 2.0 / 3.0 * t


def werner_curve(samples: int) -> list[PlanePoint]:
    """The Werner curve sampled uniformly in p over [0, 1]."""
    if samples < 2:
        raise ValidationError(f"curve needs at least 2 samples, got {samples}")
    ps = np.linspace(0.0, 1.0, samples)
    return [PlanePoint(s_l=1.0 - p * p, t=werner_tangle_of_p(p)) for p in ps]


def mems_curve(samples: int) -> list[PlanePoint]:
    """The MEMS frontier sampled uniformly in concurrence over [0, 1]."""
    if samples < 2:
        raise ValidationError(f"curve needs at least 2 samples, got {samples}")
    cs = np.linspace(0.0, 1.0, samples)
    out = []
    for c in cs:
        state = mems(float(c))
        out.append(PlanePoint(s_l=linear_entropy(state, validate=False), t=float(c) ** 2))
    return out


def classify_point(pt: PlanePoint, tol: float = STATE_TOL) -> str:
    """Classify a plane point against the Werner curve and the MEMS bound.

    Returns one of 'on_werner', 'sub_werner', 'super_werner', 'unphysical'.
    """
    if not (0.0 <= pt.s_l <= 1.0 and 0.0 <= pt.t <= 1.0):
        raise ValidationError(f"point ({pt.s_l}, {pt.t}) outside the unit square")
    if pt.t > mems_tangle_at(pt.s_l) + tol:
        return "unphysical"
    t_w = werner_tangle_at(pt.s_l)
    if abs(pt.t - t_w) <= tol:
        return "on_werner"
    return "sub_werner" if pt.t < t_w else "super_werner"
