"""Request/response schemas for the detection service."""

from __future__ import annotations

from typing import Literal, Union

from pydantic import BaseModel, Field


class ThresholdEntry(BaseModel):
    ell: int
    u: float
    t: float


class ThresholdTableModel(BaseModel):
    pfa: float
    n_total: int
    entries: list[ThresholdEntry]


class CalibrateRequest(BaseModel):
    pfa: float
    n_total: int = Field(ge=1)
    sizes: Union[Literal["dyadic"], list[int]] = "dyadic"


class DetectRequest(BaseModel):
    powers: Union[list[float], list[list[float]]]
    pfa: float = 1e-6
    detector: Literal["exhaustive", "binary", "oracle"] = "exhaustive"
    region: list[int] | None = None  # oracle hypothesis: [a, b] or [a1, b1, a2, b2]
    table: ThresholdTableModel | None = None


class DetectionModel(BaseModel):
    decided: bool
    a: int | None = None
    b: int | None = None
    a2: int | None = None
    b2: int | None = None
    snr_hat_db: float | None = None
    score: float


class CellModel(BaseModel):
    detector: Literal["exhaustive", "binary", "oracle"]
    shape: list[int]
    size: int | None = None
    gamma_db: float | None = None
    nref: int | None = None


class SweepRequest(BaseModel):
    preset: str | None = None
    cells: list[CellModel] | None = None
    trials: int = Field(ge=1)
    pfa: float = 1e-6
    seed: int = 1
    workers: int | None = None


class SweepRowModel(BaseModel):
    detector: str
    dims: int
    n: int
    signal_size: int | None
    snr_db: float | None
    trials: int
    md_rate: float | None
    fa_rate: float | None
    iou_mean: float | None
    iou_error_rate: float | None
    mean_score: float
    seed: int


class SweepResponse(BaseModel):
    rows: list[SweepRowModel]


class FlopsRequest(BaseModel):
    shape: list[int]
    seed: int = 7
    skip_exhaustive: bool = False


class FlopsRowModel(BaseModel):
    shape: str
    algorithm: str
    flops: int


class FlopsResponse(BaseModel):
    rows: list[FlopsRowModel]
