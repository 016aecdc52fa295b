"""Local quantum maps on one arm of a two-photon state.

A physical Mueller matrix decomposes into weighted Jones operators; acting
with them on a single photon of an entangled pair gives the scattered
two-photon state, renormalized when the medium is dichroic (lossy).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError, ZeroProbabilityError
from .mueller import KrausSet, cloude_decompose, compose, depolarizer, diattenuator, retarder
from .qstate import singlet, validate_density_matrix

_I2 = np.eye(2, dtype=complex)

TP_TOL = 1e-9


@dataclass(frozen=True)
class LocalChannel:
    """Single-photon map acting on one arm (A = scattered idler, B = partner)."""

    kraus: KrausSet
    arm: str = "A"
    trace_preserving: bool = False

    def __post_init__(self):
        if self.arm not in ("A", "B"):
            raise ValidationError(f"arm must be 'A' or 'B', got {self.arm!r}")


def channel_from_mueller(m: np.ndarray, arm: str = "A", tol: float = TP_TOL) -> LocalChannel:
    """Build the local channel of a physical Mueller matrix.

    The trace-preserving flag records whether sum lambda T†T equals the
    identity within ``tol``; dichroic media fail this test and their output
    states require renormalization.
    """
    kraus = cloude_decompose(m)
    defect = float(np.max(np.abs(kraus.completeness() - _I2)))
    return LocalChannel(kraus=kraus, arm=arm, trace_preserving=defect <= tol)


def apply(ch: LocalChannel, rho: np.ndarray, validate: bool = True) -> np.ndarray:
    """Apply the channel to one arm of a two-photon state.

    Output is renormalized whenever the raw trace differs from 1 by more than
    1e-9 (post-selection on detected pairs); a raw trace at numerical zero
    means the channel annihilates the state.
    """
    if validate:
        rho = validate_density_matrix(rho)
    else:
        rho = np.asarray(rho, dtype=complex)
    out = np.zeros((4, 4), dtype=complex)
    for w, t in zip(ch.kraus.weights, ch.kraus.jones):
        k = np.kron(t, _I2) if ch.arm == "A" else np.kron(_I2, t)
        out += w * (k @ rho @ k.conj().T)
    out = (out + out.conj().T) / 2
    tr = float(np.trace(out).real)
    if tr <= 1e-12:
        raise ZeroProbabilityError(
            f"channel annihilates the state (raw trace {tr:.3e}); no pairs survive"
        )
    if abs(tr - 1.0) > 1e-9:
        out = out / tr
    return out


@dataclass(frozen=True)
class Scenario:
    """Scattering scenario: I = diffuser, II = retarder+diffuser, III = dichroic+diffuser."""

    kind: str
    delta: float
    retardance: float | None = None
    axis: tuple[float, float, float] | None = None
    d: tuple[float, float, float] | None = None
    tu: float = 1.0
    params: dict = field(init=False)

    def __post_init__(self):
        if self.kind not in ("I", "II", "III"):
            raise ValidationError(f"scenario kind must be I, II or III, got {self.kind!r}")
        params = {"delta": self.delta}
        if self.kind == "II":
            if self.retardance is None or self.axis is None:
                raise ValidationError("type II scenario requires retardance and axis")
            params["retardance"] = self.retardance
            params["axis"] = list(self.axis)
        if self.kind == "III":
            if self.d is None:
                raise ValidationError("type III scenario requires a diattenuation vector d")
            params["d"] = list(self.d)
            params["tu"] = self.tu
        object.__setattr__(self, "params", params)


def scenario_mueller(sc: Scenario) -> np.ndarray:
    """Mueller matrix of a scenario; retarder/diattenuator act after the diffuser."""
    m_dep = depolarizer(sc.delta)
    if sc.kind == "I":
        return m_dep
    if sc.kind == "II":
        return compose([retarder(sc.retardance, sc.axis), m_dep])
    return compose([diattenuator(sc.d, sc.tu), m_dep])


def scatter_singlet(sc: Scenario) -> np.ndarray:
    """Scatter one photon of the singlet through the scenario's medium."""
    ch = channel_from_mueller(scenario_mueller(sc), arm="A")
    return apply(ch, singlet(), validate=False)
