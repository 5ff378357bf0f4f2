"""Chi-squared complementary CDF and inverse for even degrees of freedom.

Threshold calibration only ever needs F(s; nu) = P(Z_nu >= s) and its
inverse, with nu = 2*ell.  Both are the regularized upper incomplete gamma
function Q(nu/2, s/2), delegated to scipy.special which stays accurate to
better than 1e-12 relative in tails down to 1e-300 (verified in tests
against an mpmath reference).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import gammaincc, gammainccinv

__all__ = ["ChiSqParams", "ccdf", "inv_ccdf"]


@dataclass(frozen=True)
class ChiSqParams:
    """Degrees of freedom; the calibration recipe always uses nu = 2*ell."""

    nu: int

    def __post_init__(self):
        if self.nu < 2 or self.nu % 2 != 0:
            raise ValueError(f"nu must be a positive even integer, got {self.nu}")


def _nu_value(nu: int | ChiSqParams) -> int:
    if isinstance(nu, ChiSqParams):
        return nu.nu
    return ChiSqParams(int(nu)).nu


def ccdf(s, nu: int | ChiSqParams):
    """P(Z_nu >= s) for a chi-squared variable with ``nu`` degrees of freedom.

    Accepts a scalar or array ``s``; requires s >= 0.
    """
    n = _nu_value(nu)
    arr = np.asarray(s, dtype=np.float64)
    if np.any(arr < 0):
        raise ValueError("s must be >= 0")
    out = gammaincc(n / 2.0, arr / 2.0)
    return float(out) if np.isscalar(s) or arr.ndim == 0 else out


def inv_ccdf(q, nu: int | ChiSqParams):
    """Inverse of ``ccdf`` in s: returns s with P(Z_nu >= s) = q, q in (0, 1].

    ``inv_ccdf(1, nu) == 0``.  Accepts a scalar or array ``q``.
    """
    n = _nu_value(nu)
    arr = np.asarray(q, dtype=np.float64)
    if np.any(arr <= 0) or np.any(arr > 1):
        raise ValueError("q must be in (0, 1]")
    out = 2.0 * gammainccinv(n / 2.0, arr)
    return float(out) if np.isscalar(q) or arr.ndim == 0 else out
