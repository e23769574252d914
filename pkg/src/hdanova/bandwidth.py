"""Data-driven choice of the lag band (B, B1) and of the bootstrap kernel width H."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import BandwidthError, DegenerateInput, InvalidArgument, NoAdmissibleBandwidth
from .panel import Panel
from .statistic import BandConfig, banded_cross_sum, pair_count
from .variance import SecondOrderResiduals

DEFAULT_BETA = 0.3
DEFAULT_PILOT = (10, 15)
DEFAULT_GAPS = (3, 5, 8, 13, 21)
MIN_H = 2.0


@dataclass(frozen=True)
class BandGrid:
    S_B: tuple[int, ...]
    S_B1: tuple[int, ...]
    beta: float = DEFAULT_BETA
    pilot_B: int = DEFAULT_PILOT[0]
    pilot_B1: int = DEFAULT_PILOT[1]
    # optional per-B candidate lists; when set they override S_B1
    pairs: tuple[tuple[int, int], ...] | None = field(default=None)

    def __post_init__(self) -> None:
        object.__setattr__(self, "S_B", tuple(sorted(int(b) for b in self.S_B)))
        object.__setattr__(self, "S_B1", tuple(sorted(int(b) for b in self.S_B1)))
        if not 0.0 < self.beta < 1.0:
            raise InvalidArgument(f"beta must lie in (0, 1), got {self.beta}")
        if any(b < 1 for b in self.S_B + self.S_B1):
            raise InvalidArgument("all bandwidth candidates must be >= 1")
        if not 1 <= self.pilot_B < self.pilot_B1:
            raise InvalidArgument("pilot bandwidths must satisfy 1 <= B < B1")

    def candidates(self) -> list[tuple[int, int]]:
        if self.pairs is not None:
            return sorted(set((int(b), int(b1)) for b, b1 in self.pairs if b1 > b))
        return [(b, b1) for b in self.S_B for b1 in self.S_B1 if b1 > b]


def default_grid(t_min: int, beta: float = DEFAULT_BETA) -> BandGrid:
    """Candidate bands for series whose shortest group has ``t_min`` rows.

    ``B`` runs over every integer from ``ceil(1/beta)`` (the smallest value whose
    subsample counterpart ``floor(beta B)`` is positive) to ``t_min // 4``, and
    ``B1 = B + gap`` with gaps 3, 5, 8, 13, 21, capped at ``t_min - 1``.
    """
    lo = math.ceil(1.0 / beta)
    hi = max(lo, t_min // 4)
    pairs = []
    for b in range(lo, hi + 1):
        for gap in DEFAULT_GAPS:
            b1 = min(b + gap, t_min - 1)
            if b1 > b:
                pairs.append((b, b1))
    S_B = tuple(range(lo, hi + 1))
    S_B1 = tuple(sorted({b1 for _, b1 in pairs})) or (lo + 1,)
    return BandGrid(S_B, S_B1, beta=beta, pairs=tuple(pairs))


def zhat(X, b: int, b1: int) -> float:
    X = np.asarray(X, dtype=np.float64)
    band = BandConfig(b, b1)
    return banded_cross_sum(X, band) / (pair_count(X.shape[0], band) * math.sqrt(X.shape[1]))


def subsample_band(T: int, b: int, b1: int, beta: float) -> tuple[int, int, int] | None:
    """``(T_dag, B_dag, B1_dag)`` for the prefix subsample, or None if inadmissible."""
    t_dag = math.floor(beta * T)
    b_dag = math.floor(beta * b)
    b1_dag = math.floor(beta * b1)
    if b_dag < 1 or b_dag >= b1_dag or b1_dag > t_dag - 1:
        return None
    return t_dag, b_dag, b1_dag


def zhat_subsample(X, b: int, b1: int, beta: float) -> float | None:
    """Statistic on the first ``floor(beta T)`` rows with the band scaled by ``beta``.

    Returns None (candidate skipped) when the scaled band is not admissible.
    """
    X = np.asarray(X, dtype=np.float64)
    sub = subsample_band(X.shape[0], b, b1, beta)
    if sub is None:
        return None
    t_dag, b_dag, b1_dag = sub
    return zhat(X[:t_dag], b_dag, b1_dag)


def evaluate_grid(panel: Panel, grid: BandGrid) -> dict[tuple[int, int], float]:
    """Objective ``sum_k |Z_k - Z_k^dag(B, B1)|`` for every admissible candidate."""
    t_min = panel.t_min
    pilot_b1 = min(grid.pilot_B1, t_min - 1)
    pilot_b = min(grid.pilot_B, pilot_b1 - 1)
    if pilot_b < 1:
        raise BandwidthError(f"series too short (T_min={t_min}) for a pilot band")
    pilot = [zhat(g, pilot_b, pilot_b1) for g in panel.groups]
    objectives: dict[tuple[int, int], float] = {}
    for b, b1 in grid.candidates():
        if b1 > t_min - 1:
            continue
        total = 0.0
        for g, z in zip(panel.groups, pilot):
            z_dag = zhat_subsample(g, b, b1, grid.beta)
            if z_dag is None:
                break
            total += abs(z - z_dag)
        else:
            objectives[(b, b1)] = total
    return objectives


def select_bands(panel: Panel, grid: BandGrid | None = None) -> BandConfig:
    """Band minimising the subsample discrepancy; ties go to smaller B, then B1."""
    if grid is None:
        grid = default_grid(panel.t_min)
    return best_band(evaluate_grid(panel, grid))[0]


def best_band(objectives: dict[tuple[int, int], float]) -> tuple[BandConfig, float]:
    if not objectives:
        raise NoAdmissibleBandwidth("every candidate band was skipped")
    (b, b1), value = min(objectives.items(), key=lambda item: (item[1], item[0]))
    return BandConfig(b, b1), value


# ----------------------------------------------------------------- kernel width H

def _flat_top(x: float) -> float:
    ax = abs(x)
    if ax <= 0.5:
        return 1.0
    if ax <= 1.0:
        return 2.0 * (1.0 - ax)
    return 0.0


def optimal_block_length(x) -> float:
    """Automatic stationary-bootstrap block length of a scalar series.

    Politis and White (2004) with the Patton, Politis and White (2009)
    correction: the flat-top window size is twice the first lag after which
    ``k_n = max(5, log10 n)`` consecutive autocorrelations fall inside
    ``+-2 sqrt(log10(n) / n)``, capped at ``ceil(sqrt n) + k_n``; the result is
    capped at ``ceil(min(3 sqrt n, n / 3))``.
    """
    x = np.asarray(x, dtype=np.float64).ravel()
    n = x.size
    eps = x - x.mean()
    gamma0 = float(eps @ eps)
    if n < 2 or gamma0 <= 0.0 or not math.isfinite(gamma0):
        raise DegenerateInput("series has zero sample variance")
    b_max = math.ceil(min(3.0 * math.sqrt(n), n / 3.0))
    kn = max(5, int(math.log10(n)))
    m_max = min(math.ceil(math.sqrt(n)) + kn, n - 1)
    crit = 2.0 * math.sqrt(math.log10(n) / n)

    acv = np.empty(m_max + 1)
    acorr = np.empty(m_max + 1)
    for lag in range(m_max + 1):
        prod = float(eps[lag:] @ eps[: n - lag])
        acv[lag] = prod / n
        acorr[lag] = prod / gamma0
    m_hat = None
    for lag in range(1, m_max - kn + 2):
        if np.all(np.abs(acorr[lag:lag + kn]) < crit):
            m_hat = lag - 1
            break
    if m_hat is None:
        significant = np.flatnonzero(np.abs(acorr[1:]) >= crit)
        m_hat = int(significant[-1]) + 1 if significant.size else 1
    m = min(2 * max(m_hat, 1), m_max)

    g = 0.0
    long_run = acv[0]
    for lag in range(1, m + 1):
        w = _flat_top(lag / m)
        g += 2.0 * w * lag * acv[lag]
        long_run += 2.0 * w * acv[lag]
    d_sb = 2.0 * long_run**2
    if d_sb <= 0.0 or g == 0.0:
        return 1.0
    b_sb = (2.0 * g**2 / d_sb) ** (1.0 / 3.0) * n ** (1.0 / 3.0)
    return float(min(b_sb, b_max))


def select_h(sor: SecondOrderResiduals | Sequence[np.ndarray] | np.ndarray) -> float:
    """Kernel width from the block-length rule on all second-order residuals.

    The groups are concatenated into one series; the result is clamped to
    ``[MIN_H, floor(N / 3)]`` with ``MIN_H = 2``.
    """
    if isinstance(sor, SecondOrderResiduals):
        series = sor.concatenated()
    elif isinstance(sor, np.ndarray):
        series = sor.ravel()
    else:
        series = np.concatenate([np.asarray(s, dtype=np.float64).ravel() for s in sor])
    n = series.size
    if n < 20:
        raise DegenerateInput(f"need at least 20 second-order residuals, got {n}")
    if not np.all(np.isfinite(series)) or np.ptp(series) == 0.0:
        raise DegenerateInput("second-order residuals have zero variance")
    h = optimal_block_length(series)
    return float(min(max(h, MIN_H), n // 3))
