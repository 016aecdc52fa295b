"""Simulated two-photon tomography: 16 coincidence projectors, maximum-
likelihood reconstruction, and the Monte Carlo error-bar protocol.

The projector tuple follows the standard quarter-wave-plate/polarizer
analyzer settings with single-photon kets H, V, D=(H+V)/sqrt2,
A=(H-V)/sqrt2, R=(H-iV)/sqrt2, L=(H+iV)/sqrt2.

Reconstruction parametrizes rho = L†L / Tr(L†L) with L lower-triangular
(16 real parameters), which keeps every iterate a physical state, and
minimizes the Poisson negative log-likelihood of the observed counts.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .errors import ValidationError
from .qstate import (
    PlanePoint,
    linear_entropy,
    mems_entropy_of_tangle,
    mems_tangle_at,
    tangle,
    validate_density_matrix,
)

GRAD_TOL = 1e-8
OBJ_TOL = 1e-12

_SQ = 1.0 / math.sqrt(2.0)
_KETS = {
    "H": np.array([1.0, 0.0], dtype=complex),
    "V": np.array([0.0, 1.0], dtype=complex),
    "D": np.array([_SQ, _SQ], dtype=complex),
    "A": np.array([_SQ, -_SQ], dtype=complex),
    "R": np.array([_SQ, -1.0j * _SQ], dtype=complex),
    "L": np.array([_SQ, 1.0j * _SQ], dtype=complex),
}

SETTINGS = (
    "HH", "HV", "VV", "VH", "RH", "RV", "DV", "DH",
    "DR", "DD", "RD", "HD", "VD", "VL", "HL", "RL",
)

# lower-triangle off-diagonal positions, parameter order after the 4 diagonals
_TRIL = ((1, 0), (2, 0), (2, 1), (3, 0), (3, 1), (3, 2))


@dataclass(frozen=True)
class ProjectorSet:
    """An informationally complete family of two-photon projectors."""

    labels: tuple[str, ...]
    projectors: np.ndarray  # (n, 4, 4)


def _projector(label: str) -> np.ndarray:
    ket = np.kron(_KETS[label[0]], _KETS[label[1]])
    return np.outer(ket, ket.conj())


def _check_complete(labels, projectors) -> None:
    stacked = projectors.reshape(len(labels), 16)
    rank = np.linalg.matrix_rank(stacked, tol=1e-10)
    if rank < 16:
        raise ValidationError(
            f"projector set is not informationally complete (rank {rank} < 16)"
        )


def standard_projectors() -> ProjectorSet:
    """The canonical 16-setting analyzer tuple."""
    projs = np.stack([_projector(lbl) for lbl in SETTINGS])
    _check_complete(SETTINGS, projs)
    return ProjectorSet(labels=SETTINGS, projectors=projs)


def projector_set_from_file(path) -> ProjectorSet:
    """Load an alternate projector set from a JSON file."""
    with open(path) as fh:
        text = fh.read()
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: not valid JSON: {exc}") from exc
    return projector_set_from_json(obj)


def projector_set_from_json(obj: dict) -> ProjectorSet:
    """Build a projector set from a JSON-style mapping.

    Expected form: {"settings": [{"label": str, "ket_a": [[re,im],[re,im]],
    "ket_b": ...}, ...]}; the completeness invariant is enforced.
    """
    try:
        entries = obj["settings"]
        labels = []
        projs = []
        for entry in entries:
            ka = np.array([complex(re, im) for re, im in entry["ket_a"]])
            kb = np.array([complex(re, im) for re, im in entry["ket_b"]])
            ka = ka / np.linalg.norm(ka)
            kb = kb / np.linalg.norm(kb)
            ket = np.kron(ka, kb)
            labels.append(str(entry["label"]))
            projs.append(np.outer(ket, ket.conj()))
    except (KeyError, TypeError, IndexError) as exc:
        raise ValidationError(f"malformed projector-set description: {exc}") from exc
    projs = np.stack(projs)
    _check_complete(labels, projs)
    return ProjectorSet(labels=tuple(labels), projectors=projs)


@dataclass
class CoincidenceCounts:
    """16 coincidence counts plus the counts-per-setting normalization N."""

    counts: np.ndarray
    n_per_setting: float
    labels: tuple[str, ...] = SETTINGS

    def __post_init__(self):
        self.counts = np.asarray(self.counts, dtype=float)
        if self.counts.shape != (len(self.labels),):
            raise ValidationError(
                f"expected {len(self.labels)} counts, got shape {self.counts.shape}"
            )
        if np.any(self.counts < 0) or not np.all(np.isfinite(self.counts)):
            raise ValidationError("counts must be finite and nonnegative")
        if not self.n_per_setting > 0:
            raise ValidationError(f"counts-per-setting N={self.n_per_setting} must be > 0")


def simulate_counts(
    rho: np.ndarray,
    n_per_setting: float,
    noise: str = "none",
    seed: int | None = None,
    projectors: ProjectorSet | None = None,
) -> CoincidenceCounts:
    """Expected (or Poisson-sampled) coincidence counts n_i = N Tr(rho P_i)."""
    if noise not in ("none", "poisson"):
        raise ValidationError(f"noise must be 'none' or 'poisson', got {noise!r}")
    if not n_per_setting > 0:
        raise ValidationError(f"counts-per-setting N={n_per_setting} must be > 0")
    rho = validate_density_matrix(rho)
    ps = projectors or standard_projectors()
    probs = np.einsum("kab,ba->k", ps.projectors, rho).real
    expected = n_per_setting * np.maximum(probs, 0.0)
    if noise == "poisson":
        rng = np.random.default_rng(seed)
        counts = rng.poisson(expected).astype(float)
    else:
        counts = expected
    return CoincidenceCounts(counts=counts, n_per_setting=float(n_per_setting),
                             labels=ps.labels)


# ---------------------------------------------------------------------------
# maximum-likelihood reconstruction
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ReconstructionResult:
    rho: np.ndarray
    converged: bool
    objective: float
    iterations: int
    grad_norm: float


def _params_to_lower(t: np.ndarray) -> np.ndarray:
    lo = np.zeros((4, 4), dtype=complex)
    lo[np.diag_indices(4)] = t[:4]
    for k, (i, j) in enumerate(_TRIL):
        lo[i, j] = t[4 + 2 * k] + 1.0j * t[5 + 2 * k]
    return lo


def _lower_to_params(lo: np.ndarray) -> np.ndarray:
    t = np.empty(16)
    t[:4] = lo.diagonal().real
    for k, (i, j) in enumerate(_TRIL):
        t[4 + 2 * k] = lo[i, j].real
        t[5 + 2 * k] = lo[i, j].imag
    return t


def _nll_and_grad(t, projs, counts, n_per):
    lo = _params_to_lower(t)
    g = lo.conj().T @ lo
    s = float(np.trace(g).real)
    p_raw = np.maximum(np.einsum("kab,ba->k", projs, g).real / s, 0.0)
    # clip only inside the log; the linear term and the trace-projection b
    # must use the raw probabilities or zero-probability settings inject a
    # spurious gradient along the (exactly flat) scale direction
    p_log = np.clip(p_raw, 1e-12, None)
    f = float(n_per * np.sum(p_raw) - np.sum(counts * np.log(n_per * p_log)))
    c = n_per - counts / p_log
    a = np.einsum("k,kab->ab", c, projs)
    b = float(np.dot(c, p_raw))
    w = lo @ (a - b * np.eye(4)) / s
    grad = np.empty(16)
    grad[:4] = 2.0 * w.diagonal().real
    for k, (i, j) in enumerate(_TRIL):
        grad[4 + 2 * k] = 2.0 * w[i, j].real
        grad[5 + 2 * k] = 2.0 * w[i, j].imag
    return f, grad


def _params_from_density(rho: np.ndarray) -> np.ndarray:
    """Lower-triangular L with L†L = rho, for possibly singular rho.

    Uses a QL factorization of the Hermitian square root (QR of the
    index-reversed matrix), which unlike Cholesky tolerates zero eigenvalues;
    row phases are fixed so the diagonal of L is real nonnegative. Eigenvalue
    rounding junk is zeroed before the square root amplifies it (1e-17 junk
    would become 1e-8 rows of L and pollute the likelihood gradient).
    """
    w, v = np.linalg.eigh((rho + rho.conj().T) / 2)
    w = np.maximum(w, 0.0)
    w[w < 1e-15 * w.max()] = 0.0
    b = (v * np.sqrt(w)) @ v.conj().T
    rev = np.eye(4)[::-1]
    _, r = np.linalg.qr(rev @ b @ rev)
    lo = rev @ r @ rev
    for k in range(4):
        pivot = lo[k, k]
        if abs(pivot) > 1e-300:
            lo[k, :] *= abs(pivot) / pivot
    return _lower_to_params(lo)


def _rank_truncate(rho: np.ndarray, cut: float = 1e-12) -> np.ndarray | None:
    """Zero out eigenvalues below ``cut`` and renormalize.

    At a boundary optimum the parametrized gradient scales like
    sqrt(junk eigenvalue) * N, so residual rank noise of 1e-16 inflates an
    otherwise-converged gradient to ~1e-4; truncation removes it.
    """
    w, v = np.linalg.eigh((rho + rho.conj().T) / 2)
    w = np.where(w < cut, 0.0, w)
    total = float(w.sum())
    if total <= 0.0:
        return None
    return (v * w) @ v.conj().T / total


def _linear_inversion(counts, projs, n_per) -> np.ndarray:
    """Least-squares solution of Tr(rho P_i) = n_i / N, Hermitized."""
    phat = counts / n_per
    bmat = projs.transpose(0, 2, 1).reshape(len(counts), 16)
    rho_vec, *_ = np.linalg.lstsq(bmat, phat, rcond=None)
    rho = rho_vec.reshape(4, 4)
    return (rho + rho.conj().T) / 2


def _initial_params(rho_li: np.ndarray) -> np.ndarray:
    """Optimizer start: linear inversion pushed well inside the PSD cone."""
    w, v = np.linalg.eigh(rho_li)
    w = np.maximum(w, 1e-4)
    rho = (v * w) @ v.conj().T
    rho = rho / np.trace(rho).real
    return _params_from_density(rho)


def _newton_polish(t, f, grad, projs, counts, n_per, max_steps=25):
    """Damped Newton steps on the 16-parameter problem to drive the gradient
    norm toward machine precision; the Hessian is a finite difference of the
    analytic gradient and its null directions (parametrization gauge) are
    handled by the pseudo-inverse."""
    gnorm = float(np.linalg.norm(grad))
    last_df = None
    for _ in range(max_steps):
        if gnorm < GRAD_TOL:
            break
        h = np.empty((16, 16))
        fd = 1e-7 * max(1.0, float(np.max(np.abs(t))))
        for k in range(16):
            tk = t.copy()
            tk[k] += fd
            _, gk = _nll_and_grad(tk, projs, counts, n_per)
            h[:, k] = (gk - grad) / fd
        h = (h + h.T) / 2
        step = -np.linalg.pinv(h, rcond=1e-12) @ grad
        improved = False
        scale = 1.0
        for _ in range(12):
            t_new = t + scale * step
            f_new, g_new = _nll_and_grad(t_new, projs, counts, n_per)
            gn_new = float(np.linalg.norm(g_new))
            # accept on gradient decrease, but never let f climb beyond
            # rounding noise (that path leads to parametrization saddles)
            if gn_new < gnorm and f_new <= f + 1e-7:
                last_df = f - f_new
                t, f, grad, gnorm = t_new, f_new, g_new, gn_new
                improved = True
                break
            scale *= 0.5
        if not improved:
            break
    return t, f, grad, gnorm, last_df


def mle_reconstruct(
    counts: CoincidenceCounts,
    projectors: ProjectorSet | None = None,
    max_iter: int = 10_000,
) -> ReconstructionResult:
    """Maximum-likelihood density matrix for a set of coincidence counts.

    Converged when the gradient norm drops below 1e-8 or the objective change
    stalls below 1e-12; otherwise the best iterate is returned flagged.
    """
    ps = projectors or standard_projectors()
    if len(ps.labels) != len(counts.counts):
        raise ValidationError("counts and projector set have different lengths")
    projs = ps.projectors
    n_per = counts.n_per_setting
    cvec = counts.counts

    rho_li = _linear_inversion(cvec, projs, n_per)

    def descend(t0):
        res = minimize(
            _nll_and_grad,
            t0,
            args=(projs, cvec, n_per),
            jac=True,
            method="L-BFGS-B",
            options={"maxiter": max_iter, "maxfun": 4 * max_iter,
                     "ftol": 1e-16, "gtol": 1e-12},
        )
        f0, g0 = _nll_and_grad(res.x, projs, cvec, n_per)
        return (*_newton_polish(res.x, f0, g0, projs, cvec, n_per), int(res.nit))

    def density_of(t):
        lo = _params_to_lower(t)
        g4 = lo.conj().T @ lo
        rho = g4 / np.trace(g4).real
        return (rho + rho.conj().T) / 2

    def kernel_floor(rho):
        """Smallest curvature of the likelihood into the kernel of rho.

        The triangular parametrization enters kernel directions only at
        second order, so a vanishing parameter gradient at rank deficiency
        can hide a descent direction (a saddle); true optima have this
        floor >= 0 up to rounding.
        """
        p_raw = np.maximum(np.einsum("kab,ba->k", projs, rho).real, 0.0)
        c = n_per - cvec / np.clip(p_raw, 1e-12, None)
        a = np.einsum("k,kab->ab", c, projs)
        gmat = a - float(np.dot(c, p_raw)) * np.eye(4)
        w, v = np.linalg.eigh(rho)
        floor, direction = np.inf, None
        for k in range(4):
            if w[k] < 1e-10:
                val = float((v[:, k].conj() @ gmat @ v[:, k]).real)
                if val < floor:
                    floor, direction = val, v[:, k]
        return floor, direction

    kkt_tol = 1e-6 * max(1.0, n_per)

    t, f, grad, gnorm, last_df, nit = descend(_initial_params(rho_li))
    iterations = nit
    best = (t, f, grad, gnorm, last_df)

    def consider(state):
        # prefer genuine objective decreases; within objective noise prefer
        # the smaller gradient
        nonlocal best
        if state[1] < best[1] - 1e-8 or (state[1] <= best[1] + 1e-6
                                         and state[3] < best[3]):
            best = state

    # Boundary optima: the objective is flat below float resolution there, so
    # iterates hover with residual rank noise that inflates the gradient. Try
    # rank-truncated candidates over a ladder of cuts, taken from the current
    # iterate and from linear inversion when it is physical (for noiseless
    # data it solves the moment equations exactly and hence is the optimum).
    # A candidate that lowers the objective but not the gradient is a fresh
    # descent start: the optimum sits on the boundary with a support the
    # triangular parametrization cannot slide along.
    li_physical = float(np.linalg.eigvalsh(rho_li).min()) >= -1e-10
    for _ in range(2):
        if gnorm < GRAD_TOL:
            break
        sources = [density_of(t)]
        if li_physical:
            sources.append(rho_li)
        best_grad = None
        best_f = None
        for source in sources:
            for cut in (1e-12, 1e-10, 3e-9, 1e-7):
                cand = _rank_truncate(source, cut)
                if cand is None:
                    continue
                t_c = _params_from_density(cand)
                f_c, g_c = _nll_and_grad(t_c, projs, cvec, n_per)
                gn_c = float(np.linalg.norm(g_c))
                if gn_c < gnorm and f_c <= f + 1e-6:
                    if best_grad is None or gn_c < best_grad[3]:
                        best_grad = (t_c, f_c, g_c, gn_c)
                elif f_c < f - 1e-8 and (best_f is None or f_c < best_f[1]):
                    best_f = (t_c, f_c)
        # a meaningful objective decrease signals the wrong support and takes
        # priority over marginal gradient improvements
        if best_f is not None:
            t, f, grad, gnorm, last_df, nit = descend(best_f[0])
            iterations += nit
        elif best_grad is not None:
            t, f, grad, gnorm = best_grad
            t, f, grad, gnorm, last_df = _newton_polish(t, f, grad, projs, cvec, n_per)
        else:
            break
        consider((t, f, grad, gnorm, last_df))

    t, f, grad, gnorm, last_df = best
    kfloor, kdir = kernel_floor(density_of(t))
    if kfloor < -kkt_tol and kdir is not None:
        # saddle of the parametrization: mix in a sliver of the descent
        # direction and re-descend
        mixed = 0.9999 * density_of(t) + 1e-4 * np.outer(kdir, kdir.conj())
        mixed /= np.trace(mixed).real
        state = descend(_params_from_density(mixed))
        iterations += state[5]
        consider(state[:5])
        t, f, grad, gnorm, last_df = best
        kfloor, _ = kernel_floor(density_of(t))

    rho = density_of(t)
    converged = (gnorm < GRAD_TOL
                 or (last_df is not None and abs(last_df) < OBJ_TOL)) \
        and kfloor >= -kkt_tol
    return ReconstructionResult(
        rho=rho,
        converged=bool(converged),
        objective=f,
        iterations=iterations,
        grad_norm=gnorm,
    )


# ---------------------------------------------------------------------------
# Monte Carlo error protocol
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MonteCarloErrors:
    t_exp: float
    sl_exp: float
    t_av: float
    sl_av: float
    sigma_t: float
    sigma_sl: float
    trials: int
    dropped: int
    warning: bool


def monte_carlo_errors(
    counts: CoincidenceCounts,
    trials: int = 1000,
    seed: int = 0,
    projectors: ProjectorSet | None = None,
) -> MonteCarloErrors:
    """Error bars by Gaussian resampling of the counts.

    Each trial redraws every count from a Gaussian centered on the measured
    value with standard deviation sqrt(count) (negatives clamped to zero,
    zero counts stay zero), reconstructs by MLE, and accumulates the tangle
    and linear entropy. The bars are the absolute deviations between the
    trial averages and the point estimate. Each (trial, setting) pair has its
    own deterministic RNG stream derived from the master seed.

    Trials whose reconstruction fails to converge are dropped; the warning
    flag is set on >5% drops, on a non-converged point estimate, or on
    degenerate data (fewer than four settings with nonzero counts, where the
    resampling cannot explore the state space).
    """
    if trials < 1:
        raise ValidationError(f"trials must be >= 1, got {trials}")
    ps = projectors or standard_projectors()
    point = mle_reconstruct(counts, ps)
    t_exp = tangle(point.rho, validate=False)
    sl_exp = linear_entropy(point.rho, validate=False)

    degenerate = int(np.count_nonzero(counts.counts > 0)) < 4
    sigmas = np.sqrt(counts.counts)
    dropped = 0
    t_sum = 0.0
    sl_sum = 0.0
    for trial in range(trials):
        drawn = np.empty_like(counts.counts)
        for k in range(len(counts.counts)):
            if sigmas[k] == 0.0:
                drawn[k] = counts.counts[k]
                continue
            rng = np.random.default_rng([seed, trial, k])
            drawn[k] = max(0.0, rng.normal(counts.counts[k], sigmas[k]))
        trial_counts = CoincidenceCounts(
            counts=drawn, n_per_setting=counts.n_per_setting, labels=counts.labels
        )
        rec = mle_reconstruct(trial_counts, ps)
        if not rec.converged:
            dropped += 1
            continue
        t_sum += tangle(rec.rho, validate=False)
        sl_sum += linear_entropy(rec.rho, validate=False)

    kept = trials - dropped
    if kept > 0:
        t_av = t_sum / kept
        sl_av = sl_sum / kept
        sigma_t = abs(t_exp - t_av)
        sigma_sl = abs(sl_exp - sl_av)
    else:
        t_av = sl_av = sigma_t = sigma_sl = float("nan")
    warning = degenerate or dropped > 0.05 * trials or not point.converged or kept == 0
    return MonteCarloErrors(
        t_exp=t_exp,
        sl_exp=sl_exp,
        t_av=t_av,
        sl_av=sl_av,
        sigma_t=sigma_t,
        sigma_sl=sigma_sl,
        trials=trials,
        dropped=dropped,
        warning=bool(warning),
    )


@dataclass(frozen=True)
class ClippedPoint:
    """Plane point with explicit error-bar endpoints after physical clipping."""

    s_l: float
    t: float
    sl_lo: float
    sl_hi: float
    t_lo: float
    t_hi: float


def clip_to_physical(pt: PlanePoint) -> ClippedPoint:
    """Truncate error bars at the borders of the physical region.

    The vertical bar is clipped to [0, T_mems(S_L)]; the horizontal bar to
    [0, 1] and, where the point's tangle exceeds the MEMS bound at the bar's
    right end, to the entropy where the bound equals that tangle.
    """
    st = pt.sigma_t or 0.0
    ssl = pt.sigma_sl or 0.0
    t_lo = max(pt.t - st, 0.0)
    t_hi = min(pt.t + st, mems_tangle_at(pt.s_l))
    t_hi = max(t_hi, t_lo)
    sl_lo = max(pt.s_l - ssl, 0.0)
    sl_hi = min(pt.s_l + ssl, 1.0)
    if pt.t > mems_tangle_at(sl_hi):
        sl_hi = max(min(mems_entropy_of_tangle(pt.t), sl_hi), pt.s_l)
    return ClippedPoint(s_l=pt.s_l, t=pt.t, sl_lo=sl_lo, sl_hi=sl_hi,
                        t_lo=t_lo, t_hi=t_hi)
