"""Pydantic request/response models for the HTTP service.

Density matrices travel as 4x4 arrays of [re, im] pairs under the
"HV-product" basis tag, matching the package's JSON file format.
"""

from __future__ import annotations

from typing import Literal, Optional

import numpy as np
from pydantic import BaseModel, Field, field_validator

from ..serialize import BASIS_TAG, density_matrix_from_obj


class DensityMatrixModel(BaseModel):
    basis: Literal["HV-product"] = BASIS_TAG
    matrix: list[list[list[float]]]

    @field_validator("matrix")
    @classmethod
    def _shape(cls, v):
        if len(v) != 4 or any(len(row) != 4 for row in v):
            raise ValueError("matrix must be 4x4")
        for row in v:
            for entry in row:
                if len(entry) != 2:
                    raise ValueError("each entry must be a [re, im] pair")
        return v

    def to_array(self, validate: bool = True) -> np.ndarray:
        return density_matrix_from_obj(self.model_dump(), validate=validate)

    @classmethod
    def from_array(cls, rho: np.ndarray) -> "DensityMatrixModel":
        matrix = [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(rho)]
        return cls(matrix=matrix)


class MeasuresResponse(BaseModel):
    tangle: float
    linear_entropy: float
    classification: str


class WernerRequest(BaseModel):
    p: float = Field(ge=0.0, le=1.0)


class GeneralizedWernerRequest(BaseModel):
    p: float = Field(ge=0.0, le=1.0)
    alpha: float = 0.0
    beta: float = 0.0
    gamma: float = 0.0


class MemsRequest(BaseModel):
    c: float = Field(ge=0.0, le=1.0)


class GwFitRequest(BaseModel):
    state: DensityMatrixModel
    starts: int = Field(default=8, ge=1, le=64)
    seed: int = 0


class GwFitResponse(BaseModel):
    p: float
    alpha: float
    beta: float
    gamma: float
    fidelity: float
    converged: bool


class MuellerMatrixModel(BaseModel):
    matrix: list[list[float]]

    @field_validator("matrix")
    @classmethod
    def _shape(cls, v):
        if len(v) != 4 or any(len(row) != 4 for row in v):
            raise ValueError("matrix must be 4x4")
        return v

    def to_array(self) -> np.ndarray:
        return np.asarray(self.matrix, dtype=float)


class KrausPairModel(BaseModel):
    weight: float
    jones: list[list[list[float]]]  # 2x2 of [re, im]


class DecomposeResponse(BaseModel):
    pairs: list[KrausPairModel]
    trace_preserving: bool


class PhysicalityResponse(BaseModel):
    physical: bool
    min_coherency_eigenvalue: float


class ScenarioModel(BaseModel):
    kind: Literal["I", "II", "III"]
    delta: float = Field(ge=0.0, lt=1.0)
    retardance: Optional[float] = None
    axis: Optional[tuple[float, float, float]] = None
    d: Optional[tuple[float, float, float]] = None
    tu: float = Field(default=1.0, gt=0.0, le=1.0)


class ScatterResponse(BaseModel):
    state: DensityMatrixModel
    tangle: float
    linear_entropy: float
    classification: str


class SweepRequest(BaseModel):
    kind: Literal["I", "II", "III"]
    samples: int = Field(ge=1, le=100_000)
    seed: int = 0
    delta_min: float = 0.0
    delta_max: float = 0.95
    retardance_min: float = 0.0
    retardance_max: float = 2.0 * np.pi
    d_min: float = 0.0
    d_max: float = 0.95
    tu_min: float = 1.0
    tu_max: float = 1.0
    fit_gw: bool = False


class SweepRecordModel(BaseModel):
    scenario: str
    params: dict
    s_l: float
    t: float
    classification: str
    gw_fidelity: Optional[float] = None


class CurvePointModel(BaseModel):
    param: float
    s_l: float
    t: float


class CountsModel(BaseModel):
    counts: dict[str, float]
    counts_per_setting: Optional[float] = None


class SimulateRequest(BaseModel):
    state: DensityMatrixModel
    counts_per_setting: float = Field(gt=0.0)
    noise: Literal["none", "poisson"] = "none"
    seed: int = 0


class ConvergenceModel(BaseModel):
    converged: bool
    objective: float
    iterations: int
    grad_norm: float


class ReconstructResponse(BaseModel):
    state: DensityMatrixModel
    convergence: ConvergenceModel
    tangle: float
    linear_entropy: float


class ErrorsRequest(BaseModel):
    counts: CountsModel
    trials: int = Field(default=1000, ge=1, le=100_000)
    seed: int = 0


class ClippedBarsModel(BaseModel):
    sl_lo: float
    sl_hi: float
    t_lo: float
    t_hi: float


class ErrorsResponse(BaseModel):
    t_exp: float
    sl_exp: float
    t_av: float
    sl_av: float
    sigma_t: float
    sigma_sl: float
    trials: int
    dropped: int
    warning: bool
    clipped: ClippedBarsModel
