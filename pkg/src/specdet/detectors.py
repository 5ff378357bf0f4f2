"""Detector families: exhaustive ML, two-phase binary search, oracle.

All three share the same decision statistic: a region S qualifies when its
clamped mean power max(mean_S, 1) reaches the per-cardinality threshold
u_|S|, and regions are ranked by the score J(S) = |S| * phi(max(mean_S, 1)).

* ``exhaustive_detect`` scans every interval (1D) or axis-aligned rectangle
  (2D) through prefix sums -- O(N^2) region evaluations.
* ``binary_detect`` runs the O(N) two-phase search: a scan over dyadic
  intervals (phase 1) followed by greedy boundary refinement with
  log2(N) stages (phase 2).
* ``oracle_detect`` thresholds the single true candidate region; its
  threshold carries no union-bound penalty, making it the performance
  ceiling for the GLRT detectors.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .core import Detection, PowerGrid, Region, phi, phi_array, region_mean, snr_mle
from .thresholds import ThresholdTable

__all__ = [
    "DyadicPyramid",
    "DyadicHit",
    "dyadic_search",
    "binary_refine",
    "binary_detect",
    "exhaustive_detect",
    "oracle_detect",
]


def _require_pow2(n: int, what: str) -> int:
    m = int(n).bit_length() - 1
    if n <= 0 or (1 << m) != n:
        raise ValueError(f"{what} must be a power of two, got {n}")
    return m


def _check_table(grid: PowerGrid, table: ThresholdTable) -> None:
    if table.n_total != grid.n_total:
        raise ValueError(
            f"threshold table calibrated for N={table.n_total}, grid has N={grid.n_total}"
        )


class DyadicPyramid:
    """Mean powers over all dyadic intervals (1D) or dyadic squares (2D).

    ``levels[m]`` holds the means over blocks of side 2^m; level 0 is the
    raw grid and each level halves the resolution via

        Z[m, i] = (Z[m-1, 2i] + Z[m-1, 2i+1]) / 2

    (four-way average in 2D).  2D pyramids require a square 2^M x 2^M grid.
    """

    def __init__(self, levels: list[np.ndarray], dims: int):
        self.levels = levels
        self.dims = dims

    @classmethod
    def build(cls, grid: PowerGrid) -> "DyadicPyramid":
        if grid.dims == 1:
            _require_pow2(grid.shape[0], "grid length")
            z = grid.values
            levels = [z]
            while z.size > 1:
                z = (z[0::2] + z[1::2]) * 0.5
                levels.append(z)
            return cls(levels, 1)
        n1, n2 = grid.shape
        if n1 != n2:
            raise ValueError(f"2D dyadic search needs a square grid, got {n1}x{n2}")
        _require_pow2(n1, "grid side")
        z = grid.values
        levels = [z]
        while z.shape[0] > 1:
            h = z.shape[0] // 2
            z = (z[0::2, 0::2] + z[1::2, 0::2] + z[0::2, 1::2] + z[1::2, 1::2]) * 0.25
            levels.append(z)
        return cls(levels, 2)

    @property
    def depth(self) -> int:
        """M with N = 2^M bins per axis."""
        return len(self.levels) - 1

    def block_size(self, m: int) -> int:
        """Cardinality of a level-m block: 2^m in 1D, 4^m in 2D."""
        return (1 << m) if self.dims == 1 else (1 << (2 * m))


@dataclass(frozen=True)
class DyadicHit:
    """Phase-1 outcome: decision plus the best-scoring dyadic block."""

    decided: bool
    level: int | None = None
    index: tuple[int, ...] | None = None
    level_scores: dict[int, float] = field(default_factory=dict)
    level_means: dict[int, float] = field(default_factory=dict)


def dyadic_search(
    pyramid: DyadicPyramid, table: ThresholdTable, keep: str = "max"
) -> DyadicHit:
    """Scan all dyadic blocks; decide if any level's block passes its threshold.

    ``keep="max"`` tracks the per-level maximum mean (so the per-level score
    J*_m is the true level optimum); ``keep="last"`` reproduces the
    last-exceeding-index bookkeeping of the phase-1 pseudocode.  Both modes
    yield the identical detection decision.
    """
    if keep not in ("max", "last"):
        raise ValueError(f"keep must be 'max' or 'last', got {keep!r}")
    scores: dict[int, float] = {}
    means: dict[int, float] = {}
    best: tuple[float, int, tuple[int, ...]] | None = None
    for m, z in enumerate(pyramid.levels):
        ell = pyramid.block_size(m)
        u = table.u(ell)
        flat = z.ravel()
        if keep == "max":
            i = int(flat.argmax())
            zstar = float(flat[i])
            if zstar < u:
                continue
        else:
            hits = np.flatnonzero(flat >= u)
            if hits.size == 0:
                continue
            i = int(hits[-1])
            zstar = float(flat[i])
        jm = ell * phi(max(zstar, 1.0))
        scores[m] = jm
        means[m] = zstar
        idx = (i,) if pyramid.dims == 1 else tuple(
            int(v) for v in np.unravel_index(i, z.shape)
        )
        if best is None or jm > best[0]:
            best = (jm, m, idx)
    if best is None:
        return DyadicHit(False, level_scores=scores, level_means=means)
    return DyadicHit(True, best[1], best[2], scores, means)


def _refine_1d_recompute(
    grid: PowerGrid, depth: int, trace: list | None = None
) -> Region:
    p = grid.prefix
    n = grid.shape[0]

    def score(a: int, b: int) -> float:
        m = (p[b] - p[a]) / (b - a)
        return (b - a) * phi(max(m, 1.0))

    a, b = 0, n
    jmax = score(a, b)
    if trace is not None:
        trace.append((a, b))
    for t in range(depth):
        step = 1 << (depth - t - 1)
        na = a
        for d in (-step, step):
            a2 = a + d
            if a2 < 0 or b - a2 <= 0:
                continue
            j2 = score(a2, b)
            if j2 > jmax:
                jmax, na = j2, a2
        a = na
        nb = b
        for d in (-step, step):
            b2 = b + d
            if b2 > n or b2 - a <= 0:
                continue
            j2 = score(a, b2)
            if j2 > jmax:
                jmax, nb = j2, b2
        b = nb
        if trace is not None:
            trace.append((a, b))
    return Region.interval(a, b)


def _refine_1d_incremental(pyramid: DyadicPyramid) -> Region:
    # Running-sum formulation: the candidate mean is updated from the dyadic
    # block means instead of being recomputed from prefix sums.
    levels = pyramid.levels
    depth = pyramid.depth
    n = 1 << depth

    def score(s: float, length: int) -> float:
        return length * phi(max(s / length, 1.0))

    a, b = 0, n
    cursum = float(levels[depth][0]) * n
    jmax = score(cursum, n)
    for t in range(depth):
        m = depth - t - 1
        step = 1 << m
        z = levels[m]
        na, nsum = a, cursum
        for d in (-1, 1):
            a2 = a + d * step
            length = b - a2
            if a2 < 0 or length <= 0:
                continue
            if d < 0:
                s2 = cursum + step * float(z[a2 // step])
            else:
                s2 = cursum - step * float(z[a // step])
            j2 = score(s2, length)
            if j2 > jmax:
                jmax, na, nsum = j2, a2, s2
        a, cursum = na, nsum
        nb, nsum = b, cursum
        for d in (-1, 1):
            b2 = b + d * step
            length = b2 - a
            if b2 > n or length <= 0:
                continue
            if d > 0:
                s2 = cursum + step * float(z[b // step])
            else:
                s2 = cursum - step * float(z[b2 // step])
            j2 = score(s2, length)
            if j2 > jmax:
                jmax, nb, nsum = j2, b2, s2
        b, cursum = nb, nsum
    return Region.interval(a, b)


def _refine_2d_recompute(grid: PowerGrid, depth: int) -> Region:
    ii = grid.prefix
    n = grid.shape[0]

    def score(a1: int, b1: int, a2: int, b2: int) -> float:
        area = (b1 - a1) * (b2 - a2)
        s = ii[b1, b2] - ii[a1, b2] - ii[b1, a2] + ii[a1, a2]
        return area * phi(max(s / area, 1.0))

    a1, b1, a2, b2 = 0, n, 0, n
    jmax = score(a1, b1, a2, b2)
    for t in range(depth):
        step = 1 << (depth - t - 1)
        # edges refined in fixed order: axis-1 low/high, then axis-2 low/high
        best = a1
        for d in (-step, step):
            c = a1 + d
            if c < 0 or b1 - c <= 0:
                continue
            j2 = score(c, b1, a2, b2)
            if j2 > jmax:
                jmax, best = j2, c
        a1 = best
        best = b1
        for d in (-step, step):
            c = b1 + d
            if c > n or c - a1 <= 0:
                continue
            j2 = score(a1, c, a2, b2)
            if j2 > jmax:
                jmax, best = j2, c
        b1 = best
        best = a2
        for d in (-step, step):
            c = a2 + d
            if c < 0 or b2 - c <= 0:
                continue
            j2 = score(a1, b1, c, b2)
            if j2 > jmax:
                jmax, best = j2, c
        a2 = best
        best = b2
        for d in (-step, step):
            c = b2 + d
            if c > n or c - a2 <= 0:
                continue
            j2 = score(a1, b1, a2, c)
            if j2 > jmax:
                jmax, best = j2, c
        b2 = best
    return Region.box(a1, b1, a2, b2)


def binary_refine(
    pyramid: DyadicPyramid,
    grid: PowerGrid,
    hit: DyadicHit | None = None,
    mode: str = "recompute",
    trace: list | None = None,
) -> Region:
    """Phase 2: greedy boundary refinement starting from the full grid.

    Each of log2(N) stages halves the step and tries moving first the left
    then the right boundary (all four edges in 2D, in fixed order) by
    {-step, +step}; a move is taken only on strict score improvement with
    bounds intact and a nonempty candidate.  ``mode="recompute"`` is the
    reference semantics (candidate means from prefix sums);
    ``mode="incremental"`` keeps a running sum updated from the dyadic
    block means (1D only) and traces identical boundary sequences.

    When a ``hit`` is passed it must be a positive detection; pass none to
    run the estimator unconditionally (e.g. consistency experiments).
    A ``trace`` list (1D recompute only) collects the (a, b) boundaries
    after every stage, the initial full interval first.
    """
    if hit is not None and not hit.decided:
        raise ValueError("binary_refine requires a positive phase-1 detection")
    if mode not in ("recompute", "incremental"):
        raise ValueError(f"mode must be 'recompute' or 'incremental', got {mode!r}")
    if trace is not None and (mode != "recompute" or pyramid.dims != 1):
        raise ValueError("trace is only supported for 1D recompute refinement")
    if pyramid.dims == 1:
        if mode == "incremental":
            return _refine_1d_incremental(pyramid)
        return _refine_1d_recompute(grid, pyramid.depth, trace)
    if mode == "incremental":
        raise ValueError("incremental refinement is only implemented in 1D")
    return _refine_2d_recompute(grid, pyramid.depth)


def binary_detect(
    grid: PowerGrid,
    table: ThresholdTable,
    keep: str = "max",
    refine_mode: str = "recompute",
) -> Detection:
    """Two-phase O(N) detector: dyadic scan, then boundary refinement."""
    _check_table(grid, table)
    pyramid = DyadicPyramid.build(grid)
    hit = dyadic_search(pyramid, table, keep=keep)
    if not hit.decided:
        return Detection.none(grid.dims)
    region = binary_refine(pyramid, grid, hit=hit, mode=refine_mode)
    mean = region_mean(grid, region)
    return Detection(True, region, snr_mle(mean), region.size * phi(max(mean, 1.0)))


def _exhaustive_1d(grid: PowerGrid, table: ThresholdTable) -> Detection:
    n = grid.shape[0]
    p = grid.prefix
    u = table.u_array(n)
    # V[k, a] = sum over [a, a + k + 1); out-of-range entries read -inf padding
    ppad = np.concatenate([p, np.full(n, -np.inf)])
    windows = sliding_window_view(ppad[1:], n + 1)  # windows[k, a] = ppad[1 + k + a]
    v = windows - p[np.newaxis, :]
    ells = np.arange(1, n + 1, dtype=np.float64)
    maxsum = v.max(axis=1)
    means = maxsum / ells
    qualified = means >= u[1:]
    if not qualified.any():
        return Detection.none(1)
    scores = ells * phi_array(np.maximum(means, 1.0))
    scores[~qualified] = -np.inf
    jbest = scores.max()
    best_key = None
    best_k = -1
    for k in np.flatnonzero(scores == jbest):
        a = int(v[k].argmax())
        key = (a, a + int(k) + 1)
        if best_key is None or key < best_key:
            best_key, best_k = key, int(k)
    a, b = best_key
    mean = means[best_k]
    return Detection(True, Region.interval(a, b), snr_mle(mean), float(jbest))


def _exhaustive_2d(grid: PowerGrid, table: ThresholdTable) -> Detection:
    n1, n2 = grid.shape
    ii = grid.prefix
    u = table.u_array(grid.n_total)
    ells2 = np.arange(1, n2 + 1, dtype=np.float64)
    dpad = np.empty(2 * n2 + 1)
    dpad[n2 + 1 :] = -np.inf
    windows = sliding_window_view(dpad[1:], n2 + 1)
    v = np.empty((n2, n2 + 1))
    decided = False
    best_j = -np.inf
    best_key: tuple[int, int, int, int] | None = None
    best_mean = 0.0
    for a1 in range(n1):
        for b1 in range(a1 + 1, n1 + 1):
            ell1 = b1 - a1
            d = ii[b1] - ii[a1]
            dpad[: n2 + 1] = d
            np.subtract(windows, d[np.newaxis, :], out=v)
            maxsum = v.max(axis=1)
            areas = ell1 * ells2
            means = maxsum / areas
            qualified = means >= u[(ell1 * np.arange(1, n2 + 1))]
            if not qualified.any():
                continue
            decided = True
            scores = areas * phi_array(np.maximum(means, 1.0))
            scores[~qualified] = -np.inf
            jrow = scores.max()
            if jrow < best_j:
                continue
            for k in np.flatnonzero(scores == jrow):
                a2 = int(v[k].argmax())
                key = (a1, a2, b1, a2 + int(k) + 1)
                if jrow > best_j or (jrow == best_j and (best_key is None or key < best_key)):
                    best_j = float(jrow)
                    best_key = key
                    best_mean = float(means[k])
    if not decided:
        return Detection.none(2)
    a1, a2, b1, b2 = best_key
    region = Region.box(a1, b1, a2, b2)
    return Detection(True, region, snr_mle(best_mean), best_j)


def exhaustive_detect(grid: PowerGrid, table: ThresholdTable) -> Detection:
    """Exhaustive ML: evaluate every candidate region, keep the best qualifier.

    Decides iff any region's clamped mean reaches u_|S|; returns the argmax
    of J(S) among qualifying regions, ties broken toward the
    lexicographically smallest boundary tuple.
    """
    _check_table(grid, table)
    if grid.dims == 1:
        return _exhaustive_1d(grid, table)
    return _exhaustive_2d(grid, table)


def oracle_detect(grid: PowerGrid, s0: Region, u0: float) -> Detection:
    """Single-hypothesis detector told the true candidate region."""
    mean = region_mean(grid, s0)
    xplus = max(mean, 1.0)
    if xplus < u0:
        return Detection.none(grid.dims)
    return Detection(True, s0, snr_mle(mean), s0.size * phi(xplus))
