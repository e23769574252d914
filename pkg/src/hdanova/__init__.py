"""Equality of group means for high-dimensional, serially dependent panels.

The test compares ``K`` groups of ``d``-dimensional time series through a
banded U-statistic that only pairs observations whose time lag lies in
``[B, B1]``, and calibrates it with a dependent (kernel-correlated) wild
bootstrap on second-order residuals.
"""

from .bandwidth import BandGrid, default_grid, select_bands, select_h
from .bootstrap import TestConfig, TestReport, run_test, run_test_detailed
from .dgp import DgpSpec, Kind, gen_panel
from .errors import (
    BandwidthClamped,
    BandwidthError,
    DegenerateInput,
    DegenerateVariance,
    HdAnovaError,
    InvalidArgument,
    MalformedData,
    NoAdmissibleBandwidth,
    NumericalFailure,
    ShapeMismatch,
    TooShort,
)
from .kernel import GAUSSIAN, KernelSpec, gram
from .panel import Panel, demean, load_panel, load_series, split_periods
from .statistic import BandConfig, pair_count, rhat
from .variance import hac_variance, second_order_residuals

__version__ = "0.1.0"

__all__ = [
    "BandConfig", "BandGrid", "BandwidthClamped", "BandwidthError", "DegenerateInput",
    "DegenerateVariance", "DgpSpec", "GAUSSIAN", "HdAnovaError", "InvalidArgument",
    "KernelSpec", "Kind", "MalformedData", "NoAdmissibleBandwidth", "NumericalFailure",
    "Panel", "ShapeMismatch", "TestConfig", "TestReport", "TooShort", "default_grid",
    "demean", "gen_panel", "gram", "hac_variance", "load_panel", "load_series",
    "pair_count", "rhat", "run_test", "run_test_detailed", "second_order_residuals",
    "select_bands", "select_h", "split_periods",
]
