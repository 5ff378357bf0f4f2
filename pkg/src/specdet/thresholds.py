"""Threshold calibration and the analytic false-alarm / missed-detection bounds.

The union bound over the <= N^2/2 candidate regions gives

    P_FA <= (N^2 / 2) * max_ell F(2*ell*u_ell; 2*ell),

so targeting a false-alarm probability p fixes each mean-power threshold as

    u_ell = F^{-1}(2p / N^2; 2*ell) / (2*ell),      t_ell = ell * phi(u_ell),

where F is the chi-squared complementary CDF.  The union-bound count is
N^2/2 with N the total bin count in both 1D and 2D.  For absurdly lax
targets u_ell can fall below 1; it is clamped there since the decision
statistic max(mean, 1) cannot distinguish sub-unity thresholds from 1.
"""

from __future__ import annotations

import json
import threading

import numpy as np

from .chi2 import ccdf, inv_ccdf
from .core import Snr, phi

__all__ = [
    "ThresholdTable",
    "calibrate",
    "pfa_bound",
    "pmd_bound",
    "calibrate_oracle",
]


class ThresholdTable:
    """Per-cardinality thresholds u_ell (and t_ell) for one (pfa, N) target.

    Entries are filled lazily and memoized: 2D detectors query many distinct
    areas, and precomputing all of them would waste thousands of inversions.
    Reads are lock-free once computed; lazy inserts are serialized so one
    table can be shared across threads.
    """

    def __init__(self, pfa: float, n_total: int, entries: dict[int, float] | None = None):
        if not (0.0 < pfa < 1.0):
            raise ValueError("pfa must be in (0,1)")
        if n_total < 1:
            raise ValueError(f"n_total must be >= 1, got {n_total}")
        self.pfa = float(pfa)
        self.n_total = int(n_total)
        self._u: dict[int, float] = {}
        self._lock = threading.Lock()
        self._u_array: np.ndarray | None = None
        if entries:
            for ell, u in entries.items():
                self._check_ell(ell)
                self._u[int(ell)] = float(u)

    def _check_ell(self, ell: int) -> None:
        if not (1 <= ell <= self.n_total):
            raise ValueError(f"cardinality {ell} outside [1, {self.n_total}]")

    @property
    def tail_target(self) -> float:
        """Per-hypothesis tail probability 2*pfa/N^2 solved by calibration."""
        return 2.0 * self.pfa / self.n_total**2

    def u(self, ell: int) -> float:
        """Mean-power threshold for regions of cardinality ``ell``."""
        self._check_ell(ell)
        ell = int(ell)
        try:
            return self._u[ell]
        except KeyError:
            pass
        with self._lock:
            if ell not in self._u:
                raw = inv_ccdf(self.tail_target, 2 * ell) / (2.0 * ell)
                self._u[ell] = max(raw, 1.0)
            return self._u[ell]

    def t(self, ell: int) -> float:
        """Log-likelihood threshold t_ell = ell * phi(u_ell)."""
        return ell * phi(self.u(ell))

    def u_array(self, max_ell: int) -> np.ndarray:
        """Thresholds for ell = 1..max_ell as an array indexed by ell.

        Index 0 is +inf padding so that ``arr[ell]`` is u_ell.  Computed in
        one vectorized pass and cached; used by the exhaustive detectors.
        """
        self._check_ell(max_ell)
        with self._lock:
            cached = self._u_array
            if cached is not None and cached.size > max_ell:
                return cached[: max_ell + 1]
            ells = np.arange(1, max_ell + 1)
            raw = 2.0 * _vec_inv_ccdf(self.tail_target, ells)
            u = np.maximum(raw / (2.0 * ells), 1.0)
            for ell, val in self._u.items():  # explicit entries win (imported tables)
                if ell <= max_ell:
                    u[ell - 1] = val
            arr = np.concatenate(([np.inf], u))
            arr.setflags(write=False)
            self._u_array = arr
            for ell in ells:
                self._u.setdefault(int(ell), float(arr[ell]))
            return arr

    def sizes(self) -> list[int]:
        """Cardinalities with stored entries, ascending."""
        return sorted(self._u)

    def to_dict(self) -> dict:
        entries = [
            {"ell": ell, "u": self._u[ell], "t": ell * phi(self._u[ell])}
            for ell in self.sizes()
        ]
        return {"pfa": self.pfa, "n_total": self.n_total, "entries": entries}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_dict(cls, data: dict) -> "ThresholdTable":
        entries = {int(e["ell"]): float(e["u"]) for e in data["entries"]}
        table = cls(float(data["pfa"]), int(data["n_total"]))
        # bypass the >= 1 clamp: imported entries are authoritative
        table._u.update(entries)
        return table

    @classmethod
    def from_json(cls, text: str) -> "ThresholdTable":
        return cls.from_dict(json.loads(text))


def _vec_inv_ccdf(q: float, ells: np.ndarray) -> np.ndarray:
    from scipy.special import gammainccinv

    return gammainccinv(ells.astype(np.float64), q)


def calibrate(pfa: float, n_total: int, sizes) -> ThresholdTable:
    """Build a threshold table meeting a target false-alarm probability.

    ``sizes`` is the iterable of cardinalities to precompute; further sizes
    are filled lazily on demand.
    """
    table = ThresholdTable(pfa, n_total)
    for ell in sizes:
        table.u(int(ell))
    return table


def pfa_bound(table: ThresholdTable) -> float:
    """Union-bound false-alarm probability (N^2/2) * max_ell F(2*ell*u_ell; 2*ell).

    For a table built by ``calibrate`` this recovers the pfa target.
    """
    sizes = table.sizes()
    if not sizes:
        raise ValueError("threshold table has no entries")
    worst = max(ccdf(2.0 * ell * table.u(ell), 2 * ell) for ell in sizes)
    return table.n_total**2 / 2.0 * worst


def pmd_bound(table: ThresholdTable, ell: int, gamma: Snr | float) -> float:
    """Missed-detection bound 1 - F(2*ell*u_ell / (1+gamma); 2*ell).

    Monotone non-increasing in gamma; at gamma = 0 and calibrated
    thresholds it equals 1 - 2*pfa/N^2.
    """
    g = gamma.gamma if isinstance(gamma, Snr) else float(gamma)
    if g < 0:
        raise ValueError(f"SNR must be >= 0, got {g}")
    u = table.u(ell)
    return 1.0 - ccdf(2.0 * ell * u / (1.0 + g), 2 * ell)


def calibrate_oracle(pfa0: float, ell0: int) -> float:
    """Single-hypothesis threshold for a detector told the true region.

    u_0 = F^{-1}(pfa0; 2*ell0) / (2*ell0) -- no N^2/2 union factor, so it is
    always below the GLRT threshold at the same target.
    """
    if not (0.0 < pfa0 < 1.0):
        raise ValueError("pfa must be in (0,1)")
    if ell0 < 1:
        raise ValueError(f"ell0 must be >= 1, got {ell0}")
    return inv_ccdf(pfa0, 2 * ell0) / (2.0 * ell0)
