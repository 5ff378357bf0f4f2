"""FastAPI service wrapping the detection toolkit.

The handler bodies are plain functions over the pydantic models so the CLI
can execute them in-process; the FastAPI routes are thin bindings.  Domain
errors (ValueError from the library) surface as HTTP 400.
"""

from __future__ import annotations

import math

import numpy as np
from fastapi import FastAPI

from ..core import Detection, PowerGrid, Region
from ..detectors import binary_detect, exhaustive_detect, oracle_detect
from ..flops import flops_binary, flops_exhaustive
from ..presets import PRESETS
from ..simkit import (
    Cell,
    SweepResult,
    TrialConfig,
    gen_trial,
    run_sweep,
)
from ..thresholds import ThresholdTable, calibrate, calibrate_oracle
from .models import (
    CalibrateRequest,
    DetectionModel,
    DetectRequest,
    FlopsRequest,
    FlopsResponse,
    FlopsRowModel,
    SweepRequest,
    SweepResponse,
    SweepRowModel,
    ThresholdEntry,
    ThresholdTableModel,
)

# the instrumented run plants a strong, comfortably-sized signal so that
# phase 2 always executes; the counts themselves are shape-driven
FLOPS_TRIAL_SNR_DB = 20.0
FLOPS_TRIAL_SIZE_FRACTION = 16  # signal side = grid side / 16, floor 4


def dyadic_sizes(n_total: int) -> list[int]:
    sizes = [1]
    while sizes[-1] < n_total:
        sizes.append(sizes[-1] * 2)
    return [s for s in sizes if s <= n_total]


def do_calibrate(req: CalibrateRequest) -> ThresholdTableModel:
    sizes = dyadic_sizes(req.n_total) if req.sizes == "dyadic" else req.sizes
    table = calibrate(req.pfa, req.n_total, sizes)
    data = table.to_dict()
    return ThresholdTableModel(
        pfa=data["pfa"],
        n_total=data["n_total"],
        entries=[ThresholdEntry(**e) for e in data["entries"]],
    )


def _detection_response(det: Detection) -> DetectionModel:
    fields: dict = {"decided": det.decided, "score": det.score}
    if det.decided:
        bounds = det.region.bounds
        fields["a"], fields["b"] = bounds[0]
        if len(bounds) == 2:
            fields["a2"], fields["b2"] = bounds[1]
        db = det.snr_hat.db
        fields["snr_hat_db"] = db if math.isfinite(db) else None
    return DetectionModel(**fields)


def _region_from_list(values: list[int], dims: int) -> Region:
    if dims == 1 and len(values) == 2:
        return Region.interval(*values)
    if dims == 2 and len(values) == 4:
        return Region.box(*values)
    raise ValueError(
        f"region must have {2 * dims} integers for a {dims}D grid, got {len(values)}"
    )


def do_detect(req: DetectRequest) -> DetectionModel:
    grid = PowerGrid(np.asarray(req.powers, dtype=float))
    if req.table is not None:
        table = ThresholdTable.from_dict(req.table.model_dump())
    else:
        table = ThresholdTable(req.pfa, grid.n_total)
    if req.detector == "exhaustive":
        det = exhaustive_detect(grid, table)
    elif req.detector == "binary":
        det = binary_detect(grid, table)
    else:
        if req.region is None:
            raise ValueError("oracle detection needs a hypothesized region")
        region = _region_from_list(req.region, grid.dims)
        u0 = calibrate_oracle(table.pfa, region.size)
        det = oracle_detect(grid, region, u0)
    return _detection_response(det)


def _cells_from_request(req: SweepRequest) -> list[Cell]:
    if (req.preset is None) == (req.cells is None):
        raise ValueError("provide exactly one of preset or cells")
    if req.preset is not None:
        if req.preset not in PRESETS:
            raise ValueError(f"unknown preset {req.preset!r}")
        return PRESETS[req.preset]()
    return [
        Cell(c.detector, tuple(c.shape), c.size, c.gamma_db, c.nref)
        for c in req.cells
    ]


def sweep_rows(result: SweepResult) -> list[SweepRowModel]:
    return [
        SweepRowModel(
            detector=r.detector,
            dims=r.dims,
            n=r.n_total,
            signal_size=r.size,
            snr_db=r.gamma_db,
            trials=r.trials,
            md_rate=r.md_rate,
            fa_rate=r.fa_rate,
            iou_mean=r.iou_mean,
            iou_error_rate=r.iou_error_rate,
            mean_score=r.mean_score,
            seed=r.seed,
        )
        for r in result.rows
    ]


def do_sweep(req: SweepRequest) -> SweepResponse:
    cells = _cells_from_request(req)
    result = run_sweep(cells, req.trials, req.pfa, req.seed, workers=req.workers)
    return SweepResponse(rows=sweep_rows(result))


def _flops_trial_grid(shape: tuple[int, ...], seed: int) -> PowerGrid:
    side = min(shape)
    size = min(max(side // FLOPS_TRIAL_SIZE_FRACTION, 4), side)
    bounds = tuple(((n - size) // 2, (n - size) // 2 + size) for n in shape)
    cfg = TrialConfig(shape, Region(bounds), FLOPS_TRIAL_SNR_DB, seed)
    return gen_trial(cfg)


def do_flops(req: FlopsRequest) -> FlopsResponse:
    shape = tuple(req.shape)
    if len(shape) not in (1, 2) or any(n < 1 for n in shape):
        raise ValueError(f"shape must be 1D or 2D positive, got {shape}")
    grid = _flops_trial_grid(shape, req.seed)
    label = "x".join(str(n) for n in shape)
    table = ThresholdTable(1e-6, grid.n_total)
    rows = []
    _, binary = flops_binary(grid, table)
    rows.append(FlopsRowModel(shape=label, algorithm="binary_search", flops=binary.search))
    rows.append(FlopsRowModel(shape=label, algorithm="binary_refine", flops=binary.refine))
    rows.append(FlopsRowModel(shape=label, algorithm="binary_total", flops=binary.total))
    if not req.skip_exhaustive:
        _, exh = flops_exhaustive(grid, table)
        rows.append(FlopsRowModel(shape=label, algorithm="exhaustive", flops=exh.total))
    return FlopsResponse(rows=rows)


app = FastAPI(title="specdet", description="GLRT detection with unknown signal extent")


@app.exception_handler(ValueError)
async def _value_error_handler(request, exc):
    from fastapi.responses import JSONResponse

    return JSONResponse(status_code=400, content={"detail": str(exc)})


@app.get("/health")
def health() -> dict:
    return {"status": "ok"}


@app.post("/calibrate", response_model=ThresholdTableModel)
def calibrate_endpoint(req: CalibrateRequest) -> ThresholdTableModel:
    return do_calibrate(req)


@app.post("/detect", response_model=DetectionModel)
def detect_endpoint(req: DetectRequest) -> DetectionModel:
    return do_detect(req)


@app.post("/sweep", response_model=SweepResponse)
def sweep_endpoint(req: SweepRequest) -> SweepResponse:
    return do_sweep(req)


@app.post("/flops", response_model=FlopsResponse)
def flops_endpoint(req: FlopsRequest) -> FlopsResponse:
    return do_flops(req)
