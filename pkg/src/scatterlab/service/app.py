"""HTTP service wrapping the core package.

Stateless compute endpoints; every operation available from the CLI is also
reachable here. Domain validation errors surface as 422 responses.
"""

from __future__ import annotations

import numpy as np
from fastapi import FastAPI, Query, Request
from fastapi.responses import JSONResponse

from .. import __version__
from ..channel import Scenario, channel_from_mueller, scatter_singlet
from ..errors import ScatterLabError, ValidationError
from ..mueller import coherency_from_mueller
from ..qstate import (
    PlanePoint,
    classify_point,
    generalized_werner,
    gw_fit,
    linear_entropy,
    mems,
    singlet,
    tangle,
    werner,
)
from ..sweep import SweepConfig, curve_points, run_sweep
from ..tomography import (
    SETTINGS,
    CoincidenceCounts,
    clip_to_physical,
    mle_reconstruct,
    monte_carlo_errors,
    simulate_counts,
)
from .schemas import (
    ClippedBarsModel,
    ConvergenceModel,
    CountsModel,
    CurvePointModel,
    DecomposeResponse,
    DensityMatrixModel,
    ErrorsRequest,
    ErrorsResponse,
    GeneralizedWernerRequest,
    GwFitRequest,
    GwFitResponse,
    KrausPairModel,
    MeasuresResponse,
    MemsRequest,
    MuellerMatrixModel,
    PhysicalityResponse,
    ReconstructResponse,
    ScatterResponse,
    ScenarioModel,
    SimulateRequest,
    SweepRecordModel,
    SweepRequest,
    WernerRequest,
)

app = FastAPI(title="scatterlab", version=__version__)


@app.exception_handler(ScatterLabError)
async def _domain_error(request: Request, exc: ScatterLabError):
    return JSONResponse(status_code=422, content={"detail": str(exc)})


def _measures(rho: np.ndarray) -> MeasuresResponse:
    t = tangle(rho, validate=False)
    s_l = linear_entropy(rho, validate=False)
    cls = classify_point(PlanePoint(s_l=s_l, t=t))
    return MeasuresResponse(tangle=t, linear_entropy=s_l, classification=cls)


@app.get("/health")
def health() -> dict:
    return {"status": "ok", "version": __version__}


@app.get("/states/singlet", response_model=DensityMatrixModel)
def get_singlet():
    return DensityMatrixModel.from_array(singlet())


@app.post("/states/werner", response_model=DensityMatrixModel)
def post_werner(req: WernerRequest):
    return DensityMatrixModel.from_array(werner(req.p))


@app.post("/states/generalized-werner", response_model=DensityMatrixModel)
def post_generalized_werner(req: GeneralizedWernerRequest):
    return DensityMatrixModel.from_array(
        generalized_werner(req.p, req.alpha, req.beta, req.gamma)
    )


@app.post("/states/mems", response_model=DensityMatrixModel)
def post_mems(req: MemsRequest):
    return DensityMatrixModel.from_array(mems(req.c))


@app.post("/measures", response_model=MeasuresResponse)
def post_measures(state: DensityMatrixModel):
    return _measures(state.to_array())


@app.post("/fit/generalized-werner", response_model=GwFitResponse)
def post_gw_fit(req: GwFitRequest):
    res = gw_fit(req.state.to_array(), starts=req.starts, seed=req.seed)
    return GwFitResponse(
        p=res.p, alpha=res.alpha, beta=res.beta, gamma=res.gamma,
        fidelity=res.fidelity, converged=res.converged,
    )


@app.post("/mueller/decompose", response_model=DecomposeResponse)
def post_decompose(req: MuellerMatrixModel):
    m = req.to_array()
    ch = channel_from_mueller(m)
    pairs = [
        KrausPairModel(
            weight=float(w),
            jones=[[[float(z.real), float(z.imag)] for z in row] for row in t],
        )
        for w, t in zip(ch.kraus.weights, ch.kraus.jones)
    ]
    return DecomposeResponse(pairs=pairs, trace_preserving=ch.trace_preserving)


@app.post("/mueller/physical", response_model=PhysicalityResponse)
def post_physical(req: MuellerMatrixModel):
    h = coherency_from_mueller(req.to_array())
    wmin = float(np.linalg.eigvalsh(h).min())
    return PhysicalityResponse(physical=wmin >= -1e-10, min_coherency_eigenvalue=wmin)


def _scenario_from_model(model: ScenarioModel) -> Scenario:
    return Scenario(
        kind=model.kind,
        delta=model.delta,
        retardance=model.retardance,
        axis=model.axis,
        d=model.d,
        tu=model.tu,
    )


@app.post("/scatter", response_model=ScatterResponse)
def post_scatter(req: ScenarioModel):
    rho = scatter_singlet(_scenario_from_model(req))
    meas = _measures(rho)
    return ScatterResponse(
        state=DensityMatrixModel.from_array(rho),
        tangle=meas.tangle,
        linear_entropy=meas.linear_entropy,
        classification=meas.classification,
    )


@app.post("/sweep", response_model=list[SweepRecordModel])
def post_sweep(req: SweepRequest):
    cfg = SweepConfig(**req.model_dump())
    records = run_sweep(cfg)
    return [
        SweepRecordModel(
            scenario=r.scenario, params=r.params, s_l=r.s_l, t=r.t,
            classification=r.classification, gw_fidelity=r.gw_fidelity,
        )
        for r in records
    ]


@app.get("/curves/{kind}", response_model=list[CurvePointModel])
def get_curve(kind: str, samples: int = Query(default=101, ge=2, le=100_000)):
    return [
        CurvePointModel(param=p, s_l=s, t=t) for p, s, t in curve_points(kind, samples)
    ]


def _counts_from_model(model: CountsModel) -> CoincidenceCounts:
    missing = [lbl for lbl in SETTINGS if lbl not in model.counts]
    if missing:
        raise ValidationError(f"missing settings {missing}")
    unknown = [lbl for lbl in model.counts if lbl not in SETTINGS]
    if unknown:
        raise ValidationError(f"unknown settings {unknown}")
    values = np.array([model.counts[lbl] for lbl in SETTINGS])
    n_per = model.counts_per_setting
    if n_per is None:
        n_per = float(values[0] + values[1] + values[2] + values[3])
        if n_per <= 0:
            raise ValidationError("cannot infer counts-per-setting from basis counts")
    return CoincidenceCounts(counts=values, n_per_setting=n_per)


def _counts_to_model(counts: CoincidenceCounts) -> CountsModel:
    return CountsModel(
        counts={lbl: float(v) for lbl, v in zip(counts.labels, counts.counts)},
        counts_per_setting=counts.n_per_setting,
    )


@app.post("/tomography/simulate", response_model=CountsModel)
def post_simulate(req: SimulateRequest):
    counts = simulate_counts(
        req.state.to_array(),
        req.counts_per_setting,
        noise=req.noise,
        seed=req.seed,
    )
    return _counts_to_model(counts)


@app.post("/tomography/reconstruct", response_model=ReconstructResponse)
def post_reconstruct(req: CountsModel):
    counts = _counts_from_model(req)
    res = mle_reconstruct(counts)
    return ReconstructResponse(
        state=DensityMatrixModel.from_array(res.rho),
        convergence=ConvergenceModel(
            converged=res.converged,
            objective=res.objective,
            iterations=res.iterations,
            grad_norm=res.grad_norm,
        ),
        tangle=tangle(res.rho, validate=False),
        linear_entropy=linear_entropy(res.rho, validate=False),
    )


@app.post("/tomography/errors", response_model=ErrorsResponse)
def post_errors(req: ErrorsRequest):
    counts = _counts_from_model(req.counts)
    res = monte_carlo_errors(counts, trials=req.trials, seed=req.seed)
    clipped = clip_to_physical(
        PlanePoint(s_l=res.sl_exp, t=res.t_exp, sigma_sl=res.sigma_sl, sigma_t=res.sigma_t)
    )
    return ErrorsResponse(
        t_exp=res.t_exp,
        sl_exp=res.sl_exp,
        t_av=res.t_av,
        sl_av=res.sl_av,
        sigma_t=res.sigma_t,
        sigma_sl=res.sigma_sl,
        trials=res.trials,
        dropped=res.dropped,
        warning=res.warning,
        clipped=ClippedBarsModel(
            sl_lo=clipped.sl_lo, sl_hi=clipped.sl_hi,
            t_lo=clipped.t_lo, t_hi=clipped.t_hi,
        ),
    )
