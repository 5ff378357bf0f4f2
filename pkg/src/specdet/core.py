"""Measurement model, region geometry, and likelihood primitives.

Power measurements are non-coherent per-bin energies, noise-normalized so
that a noise-only bin has unit mean.  A signal occupying a region S raises
the mean to 1 + gamma on S.  Everything downstream (threshold calibration,
detectors, Monte Carlo) is built on the few primitives defined here:

* ``PowerGrid``   -- the measurement vector/array with precomputed prefix
  sums (integral image in 2D) for O(1) region sums.
* ``Region``      -- half-open interval [a, b) in 1D, axis-aligned box in 2D.
* ``phi``         -- the score kernel phi(x) = x - 1 - ln x.
* ``likelihood``  -- the region score J(S) = |S| * phi(max(mean_S, 1)),
  i.e. the log likelihood ratio maximized over the unknown SNR.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "Snr",
    "Region",
    "PowerGrid",
    "Detection",
    "region_mean",
    "phi",
    "phi_array",
    "likelihood",
    "likelihood_at_gamma",
    "snr_mle",
    "iou",
]


@dataclass(frozen=True)
class Snr:
    """Linear signal-to-noise ratio (dimensionless power ratio >= 0)."""

    gamma: float

    def __post_init__(self):
        if not (self.gamma >= 0.0):
            raise ValueError(f"SNR must be >= 0, got {self.gamma}")

    @classmethod
    def from_db(cls, db: float) -> "Snr":
        return cls(10.0 ** (db / 10.0))

    @property
    def db(self) -> float:
        """SNR in decibels; -inf for gamma == 0."""
        if self.gamma == 0.0:
            return -math.inf
        return 10.0 * math.log10(self.gamma)


@dataclass(frozen=True)
class Region:
    """Candidate signal set: product of half-open integer intervals.

    ``bounds`` holds one (a, b) pair per axis with 0 <= a <= b.  The empty
    region (any zero-length axis) is the "no signal" placeholder.
    """

    bounds: tuple[tuple[int, int], ...]

    def __post_init__(self):
        if not self.bounds:
            raise ValueError("Region needs at least one axis")
        for a, b in self.bounds:
            if not (isinstance(a, int) and isinstance(b, int)):
                raise ValueError("Region bounds must be integers")
            if a < 0 or b < a:
                raise ValueError(f"invalid axis bounds [{a}, {b})")

    @classmethod
    def interval(cls, a: int, b: int) -> "Region":
        return cls(((int(a), int(b)),))

    @classmethod
    def box(cls, a1: int, b1: int, a2: int, b2: int) -> "Region":
        return cls(((int(a1), int(b1)), (int(a2), int(b2))))

    @classmethod
    def empty(cls, dims: int = 1) -> "Region":
        return cls(tuple((0, 0) for _ in range(dims)))

    @property
    def dims(self) -> int:
        return len(self.bounds)

    @property
    def size(self) -> int:
        """Cardinality |S| = product of axis lengths."""
        n = 1
        for a, b in self.bounds:
            n *= b - a
        return n

    @property
    def is_empty(self) -> bool:
        return self.size == 0

    @property
    def sort_key(self) -> tuple[int, ...]:
        """Lexicographic tie-break key: all left edges, then all right edges."""
        return tuple(a for a, _ in self.bounds) + tuple(b for _, b in self.bounds)

    def slices(self) -> tuple[slice, ...]:
        return tuple(slice(a, b) for a, b in self.bounds)


class PowerGrid:
    """Nonnegative power measurements with prefix sums for O(1) region sums.

    1D grids store an (N+1,) inclusive-exclusive prefix; 2D grids store an
    (N1+1, N2+1) integral image.  Values are frozen after construction, so a
    grid can safely be shared across concurrent detector invocations.
    """

    def __init__(self, values):
        arr = np.ascontiguousarray(values, dtype=np.float64)
        if arr.ndim not in (1, 2):
            raise ValueError(f"grid must be 1D or 2D, got {arr.ndim}D")
        if arr.size == 0:
            raise ValueError("grid must be nonempty")
        if np.any(arr < 0) or not np.all(np.isfinite(arr)):
            raise ValueError("grid values must be finite and >= 0")
        arr.setflags(write=False)
        self.values = arr
        if arr.ndim == 1:
            prefix = np.concatenate(([0.0], np.cumsum(arr)))
        else:
            prefix = np.zeros((arr.shape[0] + 1, arr.shape[1] + 1))
            prefix[1:, 1:] = arr.cumsum(axis=0).cumsum(axis=1)
        prefix.setflags(write=False)
        self.prefix = prefix

    @property
    def dims(self) -> int:
        return self.values.ndim

    @property
    def shape(self) -> tuple[int, ...]:
        return self.values.shape

    @property
    def n_total(self) -> int:
        return self.values.size

    def check_region(self, region: Region, allow_empty: bool = False) -> None:
        if region.dims != self.dims:
            raise ValueError(
                f"region is {region.dims}D but grid is {self.dims}D"
            )
        for (a, b), n in zip(region.bounds, self.shape):
            if b > n:
                raise ValueError(f"region axis [{a}, {b}) exceeds grid size {n}")
        if region.is_empty and not allow_empty:
            raise ValueError("region is empty")

    def region_sum(self, region: Region) -> float:
        """Sum of values over ``region``, from the prefix table."""
        self.check_region(region, allow_empty=True)
        if self.dims == 1:
            (a, b), = region.bounds
            return float(self.prefix[b] - self.prefix[a])
        (a1, b1), (a2, b2) = region.bounds
        ii = self.prefix
        return float(ii[b1, b2] - ii[a1, b2] - ii[b1, a2] + ii[a1, a2])


def region_mean(grid: PowerGrid, region: Region) -> float:
    """Mean power over a nonempty in-bounds region (prefix-sum backed)."""
    grid.check_region(region)
    return grid.region_sum(region) / region.size


def phi(x: float) -> float:
    """Score kernel phi(x) = x - 1 - ln(x) for x >= 1.

    Strictly increasing on [1, inf) with phi(1) = 0.  Callers clamp the
    region mean below at 1 before evaluating.
    """
    if x < 1.0:
        raise ValueError(f"phi domain is x >= 1, got {x}")
    return x - 1.0 - math.log(x)


def phi_array(x: np.ndarray) -> np.ndarray:
    """Vectorized ``phi`` over values already clamped to >= 1."""
    return x - 1.0 - np.log(x)


def likelihood(grid: PowerGrid, region: Region) -> float:
    """GLRT score J(S) = |S| * phi(max(mean_S, 1)).

    This is the log likelihood ratio for region S maximized over the
    unknown SNR; it is 0 whenever the region mean is at or below the
    noise floor.
    """
    m = region_mean(grid, region)
    return region.size * phi(max(m, 1.0))


def likelihood_at_gamma(grid: PowerGrid, region: Region, gamma: Snr | float) -> float:
    """Log likelihood ratio at a fixed SNR:

        J(S, gamma) = |S| * [ mean_S * gamma/(1+gamma) - ln(1+gamma) ]

    May be negative; maximized over gamma >= 0 it equals ``likelihood``.
    """
    g = gamma.gamma if isinstance(gamma, Snr) else float(gamma)
    if g < 0:
        raise ValueError(f"SNR must be >= 0, got {g}")
    m = region_mean(grid, region)
    return region.size * (m * g / (1.0 + g) - math.log1p(g))


def snr_mle(mean: float) -> Snr:
    """Maximum-likelihood SNR from a region mean: max(mean - 1, 0)."""
    return Snr(max(float(mean) - 1.0, 0.0))


def iou(s1: Region, s2: Region) -> float:
    """Intersection over union of two regions.

    Both empty -> 1.0, exactly one empty -> 0.0.  The union is computed as
    |S1| + |S2| - |S1 n S2|.
    """
    if s1.dims != s2.dims:
        raise ValueError("regions must have the same dimensionality")
    if s1.is_empty and s2.is_empty:
        return 1.0
    if s1.is_empty or s2.is_empty:
        return 0.0
    inter = 1
    for (a1, b1), (a2, b2) in zip(s1.bounds, s2.bounds):
        overlap = min(b1, b2) - max(a1, a2)
        if overlap <= 0:
            return 0.0
        inter *= overlap
    union = s1.size + s2.size - inter
    return inter / union


@dataclass(frozen=True)
class Detection:
    """Detector output: decision, estimated region, SNR estimate, score J."""

    decided: bool
    region: Region
    snr_hat: Snr
    score: float

    @classmethod
    def none(cls, dims: int = 1) -> "Detection":
        return cls(False, Region.empty(dims), Snr(0.0), 0.0)
