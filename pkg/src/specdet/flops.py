"""Primitive-operation accounting for the detectors.

Counting convention: add, subtract, multiply, divide, compare, and ln each
cost 1; threshold-table lookups are free (thresholds are precomputed, and
only detection-time work is charged).  The exhaustive count charges the
direct scalar sweep -- per candidate region one prefix-sum lookup, the mean,
the clamp, the threshold compare, the score phi/multiply, and the
running-max compare -- regardless of how the production implementation
vectorizes the identical computation.  Exact sub-operation conventions are
not standardized anywhere, so only order-of-magnitude comparisons are
meaningful.

The refinement counters replay the exact phase-2 loop (a test pins the
replayed boundaries to ``binary_refine``'s output), charging bounds checks
for every attempted move and the full score evaluation only for in-bounds
candidates.
"""

from __future__ import annotations

from dataclasses import dataclass

from .core import Detection, PowerGrid, Region, phi
from .detectors import DyadicPyramid, dyadic_search, exhaustive_detect
from .thresholds import ThresholdTable

__all__ = ["FlopReport", "flops_exhaustive", "flops_binary", "count_flops"]

# per-candidate-region cost of the scalar exhaustive sweep
_REGION_OPS_1D = 9  # prefix diff, div, clamp, threshold cmp, phi (2 sub + ln), mul, max cmp
_REGION_OPS_2D = 11  # 4-term integral-image lookup costs 3 instead of 1

# refinement: score evaluation (sum lookup, div, clamp, phi, mul) + improvement cmp
_EVAL_OPS_1D = 8
_EVAL_OPS_2D = 10
_BOUNDS_OPS = 2  # per attempted move

# per exceeding level in the dyadic scan: clamp, phi, mul, argmax-tracking cmp
_LEVEL_SCORE_OPS = 6


@dataclass(frozen=True)
class FlopReport:
    """Counted operations per phase; ``refine`` is zero for exhaustive."""

    detector: str
    shape: tuple[int, ...]
    search: int
    refine: int

    @property
    def total(self) -> int:
        return self.search + self.refine


def _n_regions(shape: tuple[int, ...]) -> int:
    n = 1
    for s in shape:
        n *= s * (s + 1) // 2
    return n


def flops_exhaustive(grid: PowerGrid, table: ThresholdTable) -> tuple[Detection, FlopReport]:
    per_region = _REGION_OPS_1D if grid.dims == 1 else _REGION_OPS_2D
    count = per_region * _n_regions(grid.shape)
    det = exhaustive_detect(grid, table)
    return det, FlopReport("exhaustive", grid.shape, count, 0)


def _replay_refine_1d(grid: PowerGrid, depth: int) -> tuple[Region, int]:
    p = grid.prefix
    n = grid.shape[0]
    count = _EVAL_OPS_1D  # initial full-interval score

    def score(a: int, b: int) -> float:
        m = (p[b] - p[a]) / (b - a)
        return (b - a) * phi(max(m, 1.0))

    a, b = 0, n
    jmax = score(a, b)
    for t in range(depth):
        step = 1 << (depth - t - 1)
        na = a
        for d in (-step, step):
            a2 = a + d
            count += _BOUNDS_OPS
            if a2 < 0 or b - a2 <= 0:
                continue
            count += _EVAL_OPS_1D
            j2 = score(a2, b)
            if j2 > jmax:
                jmax, na = j2, a2
        a = na
        nb = b
        for d in (-step, step):
            b2 = b + d
            count += _BOUNDS_OPS
            if b2 > n or b2 - a <= 0:
                continue
            count += _EVAL_OPS_1D
            j2 = score(a, b2)
            if j2 > jmax:
                jmax, nb = j2, b2
        b = nb
    return Region.interval(a, b), count


def _replay_refine_2d(grid: PowerGrid, depth: int) -> tuple[Region, int]:
    ii = grid.prefix
    n = grid.shape[0]
    count = _EVAL_OPS_2D

    def score(a1: int, b1: int, a2: int, b2: int) -> float:
        area = (b1 - a1) * (b2 - a2)
        s = ii[b1, b2] - ii[a1, b2] - ii[b1, a2] + ii[a1, a2]
        return area * phi(max(s / area, 1.0))

    a1, b1, a2, b2 = 0, n, 0, n
    jmax = score(a1, b1, a2, b2)
    for t in range(depth):
        step = 1 << (depth - t - 1)
        best = a1
        for d in (-step, step):
            c = a1 + d
            count += _BOUNDS_OPS
            if c < 0 or b1 - c <= 0:
                continue
            count += _EVAL_OPS_2D
            j2 = score(c, b1, a2, b2)
            if j2 > jmax:
                jmax, best = j2, c
        a1 = best
        best = b1
        for d in (-step, step):
            c = b1 + d
            count += _BOUNDS_OPS
            if c > n or c - a1 <= 0:
                continue
            count += _EVAL_OPS_2D
            j2 = score(a1, c, a2, b2)
            if j2 > jmax:
                jmax, best = j2, c
        b1 = best
        best = a2
        for d in (-step, step):
            c = a2 + d
            count += _BOUNDS_OPS
            if c < 0 or b2 - c <= 0:
                continue
            count += _EVAL_OPS_2D
            j2 = score(a1, b1, c, b2)
            if j2 > jmax:
                jmax, best = j2, c
        a2 = best
        best = b2
        for d in (-step, step):
            c = b2 + d
            count += _BOUNDS_OPS
            if c > n or c - a2 <= 0:
                continue
            count += _EVAL_OPS_2D
            j2 = score(a1, b1, a2, c)
            if j2 > jmax:
                jmax, best = j2, c
        b2 = best
    return Region.box(a1, b1, a2, b2), count


def flops_binary(grid: PowerGrid, table: ThresholdTable) -> tuple[Detection, FlopReport]:
    from .core import region_mean, snr_mle

    pyramid = DyadicPyramid.build(grid)
    # phase 1: pairwise merges (adds plus one divide per node) and one
    # threshold compare per node at every level
    merge_ops_per_node = 2 if grid.dims == 1 else 4
    search = 0
    for m, z in enumerate(pyramid.levels):
        search += z.size  # threshold compares
        if m > 0:
            search += merge_ops_per_node * z.size
    hit = dyadic_search(pyramid, table)
    search += _LEVEL_SCORE_OPS * len(hit.level_scores)
    if not hit.decided:
        return Detection.none(grid.dims), FlopReport("binary", grid.shape, search, 0)
    if grid.dims == 1:
        region, refine = _replay_refine_1d(grid, pyramid.depth)
    else:
        region, refine = _replay_refine_2d(grid, pyramid.depth)
    mean = region_mean(grid, region)
    det = Detection(True, region, snr_mle(mean), region.size * phi(max(mean, 1.0)))
    return det, FlopReport("binary", grid.shape, search, refine)


def count_flops(detector: str, grid: PowerGrid, table: ThresholdTable) -> int:
    """Total counted operations for one detection on ``grid``."""
    if detector == "exhaustive":
        return flops_exhaustive(grid, table)[1].total
    if detector == "binary":
        return flops_binary(grid, table)[1].total
    raise ValueError(f"no instrumented variant for detector {detector!r}")
