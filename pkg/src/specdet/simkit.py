"""Seeded trial generation, Monte Carlo sweeps, and metric aggregation.

Reproducibility contract: every trial owns an independent counter-based
PRNG stream (Philox) whose seed is a hash of (master seed, cell identity,
trial index), so results are bit-identical for a given master seed no
matter how trials are chunked across workers.  Aggregation reduces
per-trial arrays in trial-index order.

Per-bin powers are unit-mean exponentials drawn by inverse CDF
(x = -mu * ln u with u uniform on the open interval), scaled by (1 + gamma)
inside the true region.  With ``noise_ref`` set, the grid is additionally
divided by a noise-power estimate formed from that many noise-only draws,
reproducing an imperfect calibration phase.
"""

from __future__ import annotations

import hashlib
import math
import os
import struct
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .core import Detection, PowerGrid, Region, Snr, iou
from .detectors import (
    DyadicPyramid,
    binary_detect,
    binary_refine,
    exhaustive_detect,
    oracle_detect,
)
from .thresholds import ThresholdTable, calibrate_oracle

__all__ = [
    "TrialConfig",
    "Cell",
    "CellResult",
    "SweepResult",
    "gen_trial",
    "run_sweep",
    "run_trial",
    "consistency_probe",
    "derive_seed",
    "sweep_to_csv",
    "CSV_HEADER",
]

DETECTORS = ("exhaustive", "binary", "oracle")

_GRID_STREAM = 0
_PLACE_STREAM = 1


def derive_seed(*parts) -> int:
    """Stable 64-bit seed from a mixed tuple of ints/floats/strings."""
    h = hashlib.blake2b(digest_size=8)
    for p in parts:
        if isinstance(p, bool) or p is None:
            h.update(repr(p).encode())
        elif isinstance(p, int):
            h.update(b"i" + p.to_bytes(16, "little", signed=True))
        elif isinstance(p, float):
            h.update(b"f" + struct.pack("<d", p))
        else:
            h.update(b"s" + str(p).encode())
        h.update(b"|")
    return int.from_bytes(h.digest(), "little")


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))


def _open_uniform(rng: np.random.Generator, shape) -> np.ndarray:
    """Uniforms on (0, 1): redraw the (measure-zero) exact zeros."""
    u = rng.random(shape)
    flat = u.reshape(-1)
    while True:
        zero = np.flatnonzero(flat == 0.0)
        if zero.size == 0:
            return u
        flat[zero] = rng.random(zero.size)


@dataclass(frozen=True)
class TrialConfig:
    """One trial: shape, truth (region + SNR, or neither for H0), seed.

    ``noise_norm`` picks how an estimated noise level rescales the powers:
    "power" divides by the noise-power estimate itself (the default,
    unit-consistent reading), "amplitude" divides by its square root.
    """

    shape: tuple[int, ...]
    region: Region | None
    gamma_db: float | None
    seed: int
    noise_ref: int | None = None
    noise_norm: str = "power"

    def __post_init__(self):
        if (self.region is None) != (self.gamma_db is None):
            raise ValueError("region and gamma_db must be provided together")
        if self.noise_ref is not None and self.noise_ref < 1:
            raise ValueError(f"noise_ref must be >= 1, got {self.noise_ref}")
        if self.noise_norm not in ("power", "amplitude"):
            raise ValueError(f"noise_norm must be 'power' or 'amplitude', got {self.noise_norm!r}")


def gen_trial(cfg: TrialConfig) -> PowerGrid:
    """Draw one power grid under the trial's hypothesis; pure in cfg."""
    rng = _rng(cfg.seed)
    u = _open_uniform(rng, cfg.shape)
    x = -np.log(u)
    if cfg.region is not None:
        for (a, b), n in zip(cfg.region.bounds, cfg.shape):
            if b > n:
                raise ValueError(f"true region [{a}, {b}) exceeds grid size {n}")
        if cfg.region.is_empty:
            raise ValueError("true region must be nonempty")
        gamma = Snr.from_db(cfg.gamma_db).gamma
        x[cfg.region.slices()] *= 1.0 + gamma
    if cfg.noise_ref is not None:
        w = _open_uniform(rng, cfg.noise_ref)
        sigma2_hat = float(np.mean(-np.log(w)))
        divisor = sigma2_hat if cfg.noise_norm == "power" else math.sqrt(sigma2_hat)
        x = x / divisor
    return PowerGrid(x)


@dataclass(frozen=True)
class Cell:
    """One sweep cell: a detector evaluated at fixed (shape, size, SNR, nref).

    ``gamma_db=None`` marks a noise-only (H0) cell; ``size`` is the signal
    side length (cardinality size**dims).
    """

    detector: str
    shape: tuple[int, ...]
    size: int | None
    gamma_db: float | None
    nref: int | None = None

    def __post_init__(self):
        if self.detector not in DETECTORS:
            raise ValueError(f"unknown detector {self.detector!r}")
        if len(self.shape) not in (1, 2):
            raise ValueError("cells must be 1D or 2D")
        if self.gamma_db is not None:
            if self.size is None or self.size < 1:
                raise ValueError("signal cells need a size >= 1")
            if any(self.size > n for n in self.shape):
                raise ValueError(f"size {self.size} exceeds shape {self.shape}")

    @property
    def dims(self) -> int:
        return len(self.shape)

    @property
    def n_total(self) -> int:
        n = 1
        for s in self.shape:
            n *= s
        return n

    @property
    def signal_cardinality(self) -> int | None:
        if self.size is None:
            return None
        return self.size**self.dims

    def key(self) -> int:
        return derive_seed(
            "cell", self.detector, self.shape, self.size, self.gamma_db, self.nref
        )

    def label(self) -> str:
        """Detector label for result rows; noise-calibrated runs carry nref."""
        if self.nref is None:
            return self.detector
        return f"{self.detector}(nref={self.nref})"


@dataclass(frozen=True)
class CellResult:
    detector: str
    dims: int
    n_total: int
    size: int | None
    gamma_db: float | None
    trials: int
    md_rate: float | None
    fa_rate: float | None
    iou_mean: float | None
    iou_error_rate: float | None
    mean_score: float
    seed: int


@dataclass(frozen=True)
class SweepResult:
    rows: tuple[CellResult, ...]

    def to_json_dict(self) -> dict:
        return {"rows": [row.__dict__ for row in self.rows]}


_TABLE_CACHE: dict[tuple[float, int], ThresholdTable] = {}


def _table_for(pfa: float, n_total: int) -> ThresholdTable:
    key = (pfa, n_total)
    if key not in _TABLE_CACHE:
        _TABLE_CACHE[key] = ThresholdTable(pfa, n_total)
    return _TABLE_CACHE[key]


def _place_region(cell: Cell, rng: np.random.Generator) -> Region:
    bounds = []
    for n in cell.shape:
        start = int(rng.integers(0, n - cell.size + 1))
        bounds.append((start, start + cell.size))
    return Region(tuple(bounds))


def run_trial(
    cell: Cell, pfa: float, master_seed: int, trial_index: int
) -> tuple[Detection, Region | None]:
    """One seeded trial of a cell: returns the detection and the true region."""
    cell_key = cell.key()
    grid_seed = derive_seed(master_seed, cell_key, trial_index, _GRID_STREAM)
    region = None
    if cell.gamma_db is not None:
        place_rng = _rng(derive_seed(master_seed, cell_key, trial_index, _PLACE_STREAM))
        region = _place_region(cell, place_rng)
    cfg = TrialConfig(cell.shape, region, cell.gamma_db, grid_seed, cell.nref)
    grid = gen_trial(cfg)
    if cell.detector == "exhaustive":
        det = exhaustive_detect(grid, _table_for(pfa, cell.n_total))
    elif cell.detector == "binary":
        det = binary_detect(grid, _table_for(pfa, cell.n_total))
    else:
        if region is None:
            # H0 oracle: the detector still needs a hypothesized region
            if cell.size is None:
                raise ValueError("oracle H0 cells need a hypothesized size")
            place_rng = _rng(
                derive_seed(master_seed, cell_key, trial_index, _PLACE_STREAM)
            )
            region_h = _place_region(cell, place_rng)
            u0 = calibrate_oracle(pfa, region_h.size)
            det = oracle_detect(grid, region_h, u0)
            return det, None
        u0 = calibrate_oracle(pfa, region.size)
        det = oracle_detect(grid, region, u0)
    return det, region


def _run_cell_range(
    cell: Cell, pfa: float, master_seed: int, start: int, stop: int
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    n = stop - start
    decided = np.zeros(n, dtype=bool)
    ious = np.zeros(n)
    scores = np.zeros(n)
    for k, i in enumerate(range(start, stop)):
        det, region = run_trial(cell, pfa, master_seed, i)
        decided[k] = det.decided
        scores[k] = det.score
        if region is not None and det.decided:
            ious[k] = iou(det.region, region)
    return decided, ious, scores


def _effective_workers(workers: int | None) -> int:
    cap = os.environ.get("SPECDET_THREADS")
    limit = int(cap) if cap else None
    w = workers if workers is not None else (limit or os.cpu_count() or 1)
    if limit is not None:
        w = min(w, limit)
    return max(w, 1)


def run_sweep(
    cells,
    trials: int,
    pfa: float,
    master_seed: int,
    workers: int | None = None,
) -> SweepResult:
    """Run every cell for ``trials`` independent trials and aggregate metrics.

    IoU metrics are averaged over detected signal trials only; H0 cells
    report a false-alarm rate instead of MD/IoU.  Output is independent of
    the worker count.
    """
    cells = list(cells)
    if not cells:
        raise ValueError("cell list is empty")
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    if not (0.0 < pfa < 1.0):
        raise ValueError("pfa must be in (0,1)")
    nworkers = _effective_workers(workers)
    rows = []
    if nworkers > 1:
        chunk = max(64, trials // (nworkers * 4))
        spans = [
            (ci, lo, min(lo + chunk, trials))
            for ci, cell in enumerate(cells)
            for lo in range(0, trials, chunk)
        ]
        with ProcessPoolExecutor(max_workers=nworkers) as pool:
            parts = list(
                pool.map(
                    _run_cell_range_star,
                    [(cells[ci], pfa, master_seed, lo, hi) for ci, lo, hi in spans],
                    chunksize=1,
                )
            )
        by_cell: dict[int, list] = {ci: [] for ci in range(len(cells))}
        for (ci, lo, hi), part in zip(spans, parts):
            by_cell[ci].append((lo, part))
        for ci, cell in enumerate(cells):
            pieces = [p for _, p in sorted(by_cell[ci], key=lambda t: t[0])]
            decided = np.concatenate([p[0] for p in pieces])
            ious = np.concatenate([p[1] for p in pieces])
            scores = np.concatenate([p[2] for p in pieces])
            rows.append(_aggregate(cell, trials, master_seed, decided, ious, scores))
    else:
        for cell in cells:
            decided, ious, scores = _run_cell_range(cell, pfa, master_seed, 0, trials)
            rows.append(_aggregate(cell, trials, master_seed, decided, ious, scores))
    return SweepResult(tuple(rows))


def _run_cell_range_star(args):
    return _run_cell_range(*args)


def _aggregate(
    cell: Cell,
    trials: int,
    master_seed: int,
    decided: np.ndarray,
    ious: np.ndarray,
    scores: np.ndarray,
) -> CellResult:
    mean_score = float(scores.mean())
    if cell.gamma_db is None:
        return CellResult(
            cell.label(), cell.dims, cell.n_total, cell.size, None, trials,
            None, float(decided.mean()), None, None, mean_score, master_seed,
        )
    ndet = int(decided.sum())
    iou_mean = float(ious[decided].mean()) if ndet else None
    iou_err = 1.0 - iou_mean if iou_mean is not None else None
    return CellResult(
        cell.label(), cell.dims, cell.n_total, cell.size, cell.gamma_db, trials,
        1.0 - ndet / trials, None, iou_mean, iou_err, mean_score, master_seed,
    )


def consistency_probe(
    gamma_db: float,
    alpha0: float,
    beta0: float,
    n_list,
    trials: int,
    seed: int,
) -> list[tuple[int, float]]:
    """Mean refinement IoU against a proportionally placed true interval.

    For each N the true interval is [floor(alpha0*N), floor(beta0*N)) and the
    boundary refinement runs unconditioned on detection; the asymptotic
    consistency of the binary search shows as mean IoU approaching 1 with N.
    """
    if not (0.0 < alpha0 < beta0 < 1.0):
        raise ValueError("need 0 < alpha0 < beta0 < 1")
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    out = []
    for n in n_list:
        m = int(n).bit_length() - 1
        if n <= 0 or (1 << m) != n:
            raise ValueError(f"N must be a power of two, got {n}")
        region = Region.interval(int(alpha0 * n), int(beta0 * n))
        total = 0.0
        for i in range(trials):
            cfg = TrialConfig(
                (n,), region, gamma_db, derive_seed(seed, "consistency", n, i)
            )
            grid = gen_trial(cfg)
            pyramid = DyadicPyramid.build(grid)
            est = binary_refine(pyramid, grid)
            total += iou(est, region)
        out.append((int(n), total / trials))
    return out


# --- serialization ---------------------------------------------------------

CSV_HEADER = (
    "detector,dims,n,signal_size,snr_db,trials,"
    "md_rate,fa_rate,iou_mean,iou_error_rate,mean_score,seed"
)


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def sweep_to_csv(result: SweepResult) -> str:
    """Render a sweep as CSV (UTF-8, LF, schema in ``CSV_HEADER``)."""
    lines = [CSV_HEADER]
    for r in result.rows:
        lines.append(
            ",".join(
                _fmt(v)
                for v in (
                    r.detector, r.dims, r.n_total, r.size, r.gamma_db, r.trials,
                    r.md_rate, r.fa_rate, r.iou_mean, r.iou_error_rate,
                    r.mean_score, r.seed,
                )
            )
        )
    return "\n".join(lines) + "\n"
