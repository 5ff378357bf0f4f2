"""GLRT detection of signals with unknown extent in power measurements."""

from .core import (
    Detection,
    PowerGrid,
    Region,
    Snr,
    iou,
    likelihood,
    likelihood_at_gamma,
    phi,
    region_mean,
    snr_mle,
)
from .chi2 import ChiSqParams, ccdf, inv_ccdf
from .detectors import (
    DyadicHit,
    DyadicPyramid,
    binary_detect,
    binary_refine,
    dyadic_search,
    exhaustive_detect,
    oracle_detect,
)
from .flops import FlopReport, count_flops, flops_binary, flops_exhaustive
from .simkit import (
    Cell,
    CellResult,
    SweepResult,
    TrialConfig,
    consistency_probe,
    gen_trial,
    run_sweep,
    run_trial,
)
from .thresholds import (
    ThresholdTable,
    calibrate,
    calibrate_oracle,
    pfa_bound,
    pmd_bound,
)

__all__ = [
    "Detection",
    "PowerGrid",
    "Region",
    "Snr",
    "iou",
    "likelihood",
    "likelihood_at_gamma",
    "phi",
    "region_mean",
    "snr_mle",
    "ChiSqParams",
    "ccdf",
    "inv_ccdf",
    "DyadicHit",
    "DyadicPyramid",
    "binary_detect",
    "binary_refine",
    "dyadic_search",
    "exhaustive_detect",
    "oracle_detect",
    "FlopReport",
    "count_flops",
    "flops_binary",
    "flops_exhaustive",
    "Cell",
    "CellResult",
    "SweepResult",
    "TrialConfig",
    "consistency_probe",
    "gen_trial",
    "run_sweep",
    "run_trial",
    "ThresholdTable",
    "calibrate",
    "calibrate_oracle",
    "pfa_bound",
    "pmd_bound",
]

__version__ = "0.1.0"
