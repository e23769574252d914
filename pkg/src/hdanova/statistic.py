"""The banded quadratic-form ANOVA statistic.

For a group ``X`` of shape ``(T, d)`` the banded cross sum is

    sum over ordered pairs (t1, t2) with B <= |t1 - t2| <= B1 of x_{t1} . x_{t2}

which is evaluated in O(T d) with a sliding window of lagged row sums instead
of the O(T^2 d) double loop.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import BandwidthClamped, BandwidthError, InvalidArgument, ShapeMismatch
from .panel import Panel, column_means


@dataclass(frozen=True)
class BandConfig:
    """Lag band ``B <= |t1 - t2| <= B1`` in time-index units."""

    B: int
    B1: int

    def __post_init__(self) -> None:
        for name in ("B", "B1"):
            v = getattr(self, name)
            if isinstance(v, bool) or int(v) != v:
                raise BandwidthError(f"{name} must be an integer, got {v!r}")
            object.__setattr__(self, name, int(v))
        if not 1 <= self.B < self.B1:
            raise BandwidthError(f"need 1 <= B < B1, got B={self.B}, B1={self.B1}")

    @property
    def width(self) -> int:
        return self.B1 - self.B

    def check(self, T: int) -> None:
        if self.B1 > T - 1:
            raise BandwidthError(f"B1={self.B1} exceeds T-1={T - 1}")

    def clamped(self, t_min: int) -> "BandConfig":
        """Reduce ``B1`` to ``t_min - 1`` if needed, warning when it happens."""
        if self.B1 <= t_min - 1:
            return self
        if self.B >= t_min - 1:
            raise BandwidthError(f"B={self.B} leaves no admissible B1 below T_min={t_min}")
        warnings.warn(f"B1={self.B1} clamped to {t_min - 1} (shortest group has T={t_min})",
                      BandwidthClamped, stacklevel=2)
        return BandConfig(self.B, t_min - 1)


@dataclass(frozen=True)
class StatisticValue:
    rhat: float
    per_group: tuple[float, ...]
    scaled: float
    band: BandConfig
    t_min: int


def pair_count(T: int, band: BandConfig) -> int:
    """Number of ordered pairs in ``[1, T]^2`` whose lag lies in the band."""
    band.check(T)
    return (2 * T - band.B - band.B1) * (band.B1 - band.B + 1)


def _as_matrix(X) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X[:, None]
    if X.ndim != 2:
        raise ShapeMismatch(f"expected a (T, d) matrix, got shape {X.shape}")
    return X


def lagged_window_sums(X: np.ndarray, band: BandConfig) -> np.ndarray:
    """Rows ``W_t = sum_{s=max(0, t-B1)}^{t-B} x_s`` for ``t = B..T-1`` (0-based).

    Built from one prefix sum, so the whole sequence costs O(T d).
    """
    T, d = X.shape
    prefix = np.zeros((T + 1, d))
    np.cumsum(X, axis=0, out=prefix[1:])
    t = np.arange(band.B, T)
    hi = t - band.B + 1
    lo = np.maximum(t - band.B1, 0)
    return prefix[hi] - prefix[lo]


def banded_cross_sum(X, band: BandConfig) -> float:
    X = _as_matrix(X)
    band.check(X.shape[0])
    W = lagged_window_sums(X, band)
    # ordered pairs: twice the t2 < t1 half
    return 2.0 * float(np.einsum("ij,ij->", X[band.B:], W))


def cross_group_sum(Xk, X1) -> float:
    Xk, X1 = _as_matrix(Xk), _as_matrix(X1)
    if Xk.shape[1] != X1.shape[1]:
        raise ShapeMismatch(f"dimension mismatch: {Xk.shape[1]} vs {X1.shape[1]}")
    return float(Xk.sum(axis=0) @ X1.sum(axis=0))


def rhat_k(Xk, X1, band: BandConfig) -> float:
    Xk, X1 = _as_matrix(Xk), _as_matrix(X1)
    if Xk.shape[1] != X1.shape[1]:
        raise ShapeMismatch(f"dimension mismatch: {Xk.shape[1]} vs {X1.shape[1]}")
    Tk, T1 = Xk.shape[0], X1.shape[0]
    root_d = math.sqrt(Xk.shape[1])
    return (
        banded_cross_sum(Xk, band) / (pair_count(Tk, band) * root_d)
        + banded_cross_sum(X1, band) / (pair_count(T1, band) * root_d)
        - 2.0 * cross_group_sum(Xk, X1) / (Tk * T1 * root_d)
    )


def pooled_mean(panel: Panel) -> np.ndarray:
    return column_means(np.vstack(panel.groups))


def rhat(panel: Panel, band: BandConfig, center: bool = True) -> StatisticValue:
    """Statistic over groups ``2..K`` against group 1.

    ``band.B1`` is clamped to ``min_k T_k - 1``.  With ``center=True`` one common
    vector (the pooled mean of all observations) is subtracted from every group
    first.  That leaves the expectation of each term unchanged but removes the
    edge-weighted linear terms that a large common mean would otherwise add to
    the null variance.
    """
    band = band.clamped(panel.t_min)
    groups = panel.groups
    if center:
        shift = pooled_mean(panel)
        groups = tuple(g - shift for g in groups)
    per_group = [rhat_k(Xk, groups[0], band) for Xk in groups[1:]]
    total = float(sum(per_group))
    scaled = scale_factor(panel.t_min, band) * total
    return StatisticValue(total, tuple(per_group), scaled, band, panel.t_min)


def scale_factor(t_min: int, band: BandConfig) -> float:
    if t_min < 1:
        raise InvalidArgument("t_min must be positive")
    return math.sqrt(t_min * band.width)
