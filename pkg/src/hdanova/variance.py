"""Second-order residuals and the kernel HAC variance diagnostic."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import InvalidArgument
from .kernel import GAUSSIAN, KernelSpec
from .panel import Panel
from .statistic import BandConfig, lagged_window_sums

LAG_CUTOFF = 1e-12


@dataclass(frozen=True, eq=False)
class SecondOrderResiduals:
    """``theta[k][j]`` is the windowed product sum at time ``t = B + 1 + j``.

    Group ``k`` carries ``T_k - B`` values.
    """

    values: tuple[np.ndarray, ...]
    band: BandConfig
    lengths: tuple[int, ...]
    d: int

    @property
    def K(self) -> int:
        return len(self.values)

    def concatenated(self) -> np.ndarray:
        return np.concatenate(self.values)


def theta_hat(X: np.ndarray, band: BandConfig) -> np.ndarray:
    """``sum_{s=(t-B1) v 1}^{t-B} x_t . x_s`` for ``t = B+1..T`` of one group."""
    X = np.asarray(X, dtype=np.float64)
    band.check(X.shape[0])
    W = lagged_window_sums(X, band)
    return np.einsum("ij,ij->i", X[band.B:], W)


def second_order_residuals(res: Panel, band: BandConfig) -> SecondOrderResiduals:
    values = []
    for g in res.groups:
        th = theta_hat(g, band)
        th.setflags(write=False)
        values.append(th)
    return SecondOrderResiduals(tuple(values), band, res.lengths, res.d)


@dataclass(frozen=True)
class HacEstimate:
    value: float
    scale: float
    H: float


def default_scale(T: int, d: int, band: BandConfig) -> float:
    return math.sqrt(T * d * band.width)


def hac_variance(theta, H: float, spec: Callable = GAUSSIAN, scale: float = 1.0) -> HacEstimate:
    """Kernel-weighted long-run variance of ``sum_t theta_t / scale``.

    Evaluated lag by lag,
    ``(sum theta^2 + 2 sum_{q>=1} K(q/H) sum_t theta_t theta_{t+q}) / scale^2``,
    stopping once ``K(q/H)`` drops below 1e-12.
    """
    if not (H > 0 and math.isfinite(H)):
        raise InvalidArgument(f"H must be positive, got {H}")
    if not (scale > 0 and math.isfinite(scale)):
        raise InvalidArgument(f"scale must be positive, got {scale}")
    th = np.asarray(theta, dtype=np.float64).ravel()
    if th.size == 0:
        raise InvalidArgument("theta must be non-empty")
    total = float(th @ th)
    for q in range(1, th.size):
        w = float(spec(q / H))
        if w < LAG_CUTOFF:
            break
        total += 2.0 * w * float(th[:-q] @ th[q:])
    return HacEstimate(total / scale**2, float(scale), float(H))


def component_hac(residual_group: np.ndarray, band: BandConfig, H: float,
                  spec: KernelSpec = GAUSSIAN, scale: float | None = None) -> HacEstimate:
    """HAC estimate of ``Var(Q / scale)`` for the unit-coefficient band form ``Q``.

    ``Q = sum_{B <= |t1-t2| <= B1} e_{t1} . e_{t2} = sum_t 2 theta_t``, so the
    sequence fed to :func:`hac_variance` is twice the second-order residuals.
    ``scale`` defaults to ``sqrt(T d (B1 - B))``.
    """
    X = np.asarray(residual_group, dtype=np.float64)
    T, d = X.shape
    if scale is None:
        scale = default_scale(T, d, band)
    return hac_variance(2.0 * theta_hat(X, band), H, spec, scale)
