"""Second-order wild bootstrap calibration and the end-to-end test."""

from __future__ import annotations

import math
import time
import warnings
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from . import rng as rngmod
from .bandwidth import MIN_H, BandGrid, select_bands, select_h
from .errors import DegenerateVariance, InvalidArgument, ShapeMismatch
from .kernel import GAUSSIAN, KernelSpec, ToeplitzGram, gram
from .panel import Panel, demean
from .statistic import BandConfig, pair_count, rhat, scale_factor
from .variance import SecondOrderResiduals, second_order_residuals

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class TestConfig:
    """Settings for one run of the test.

    ``band`` and ``H`` may be left as None; they are then chosen from the data
    (``band`` requires ``auto_bandwidth=True``).  ``center`` subtracts the pooled
    mean before the statistic is formed.
    """

    __test__ = False  # not a pytest class

    band: BandConfig | None = None
    H: float | None = None
    kernel: KernelSpec = GAUSSIAN
    boot_count: int = 100
    alpha: float = 0.05
    seed: int = 0
    auto_bandwidth: bool = False
    grid: BandGrid | None = None
    center: bool = True

    def __post_init__(self) -> None:
        if int(self.boot_count) != self.boot_count or self.boot_count < 2:
            raise InvalidArgument(f"boot_count must be an integer >= 2, got {self.boot_count}")
        if not 0.0 < self.alpha < 1.0:
            raise InvalidArgument(f"alpha must lie in (0, 1), got {self.alpha}")
        if self.H is not None and not (self.H > 0 and math.isfinite(self.H)):
            raise InvalidArgument(f"H must be positive, got {self.H}")
        if self.band is None and not self.auto_bandwidth:
            raise InvalidArgument("either give a band or set auto_bandwidth")
        if int(self.seed) != self.seed or self.seed < 0:
            raise InvalidArgument("seed must be a non-negative integer")


@dataclass(frozen=True, eq=False)
class BootstrapDraws:
    values: np.ndarray
    quantile: float
    v: int


@dataclass(frozen=True)
class TestReport:
    __test__ = False

    statistic: float
    rhat: float
    quantile: float
    reject: bool
    B: int
    B1: int
    H: float
    boot_count: int
    alpha: float
    seed: int
    wall_time: float = field(default=0.0, compare=False)
    schema_version: int = SCHEMA_VERSION

    def to_dict(self, timing: bool = True) -> dict:
        out = asdict(self)
        if not timing:
            out.pop("wall_time")
        return out


def sample_weights(T: int, gram_: ToeplitzGram, rng: np.random.Generator) -> np.ndarray:
    """One draw of mean-zero Gaussian weights with covariance ``gram_`` (+ jitter)."""
    if gram_.size != T:
        raise ShapeMismatch(f"Gram size {gram_.size} does not match T={T}")
    return gram_.factor @ rng.standard_normal(T)


def bootstrap_coefficients(sor: SecondOrderResiduals, t_min: int) -> np.ndarray:
    """Per-group multipliers of ``sum_t theta_{t,k} w_{t,k}`` in a bootstrap draw.

    Group 1 enters every pairwise term, hence the extra factor ``K - 1``.
    """
    band = sor.band
    root = scale_factor(t_min, band)
    root_d = math.sqrt(sor.d)
    coef = np.array([2.0 * root / (pair_count(T, band) * root_d) for T in sor.lengths])
    coef[0] *= sor.K - 1
    return coef


def bootstrap_statistic(sor: SecondOrderResiduals, weights: Sequence[np.ndarray], t_min: int) -> float:
    """One bootstrap statistic from weights aligned to ``t = B+1..T_k``."""
    if len(weights) != sor.K:
        raise ShapeMismatch(f"expected {sor.K} weight vectors, got {len(weights)}")
    coef = bootstrap_coefficients(sor, t_min)
    total = 0.0
    for c, theta, w in zip(coef, sor.values, weights):
        w = np.asarray(w, dtype=np.float64)
        if w.shape != theta.shape:
            raise ShapeMismatch(f"weights of length {w.size} do not align with {theta.size} residuals")
        total += c * float(theta @ w)
    return total


def conditional_variance(sor: SecondOrderResiduals, grams: Sequence[ToeplitzGram], t_min: int) -> float:
    """Exact variance of a bootstrap draw given the data."""
    coef = bootstrap_coefficients(sor, t_min)
    total = 0.0
    for c, theta, g in zip(coef, sor.values, grams):
        cov = g.factor @ g.factor.T
        total += c**2 * float(theta @ cov @ theta)
    return total


def empirical_quantile(values, alpha: float) -> tuple[float, int]:
    """Order statistic ``v = min{x : x / U >= 1 - alpha}`` (1-based) of the draws."""
    vals = np.sort(np.asarray(values, dtype=np.float64).ravel(), kind="stable")
    U = vals.size
    if U == 0:
        raise InvalidArgument("cannot take a quantile of no values")
    if not 0.0 < alpha < 1.0:
        raise InvalidArgument(f"alpha must lie in (0, 1), got {alpha}")
    xs = np.arange(1, U + 1)
    v = int(xs[xs / U >= 1.0 - alpha][0])
    return float(vals[v - 1]), v


def weight_grams(sor: SecondOrderResiduals, H: float, kernel: KernelSpec = GAUSSIAN) -> list[ToeplitzGram]:
    # only t = B+1..T_k carry residuals; that block of the Toeplitz Gram is itself
    # the Gram of size T_k - B
    return [gram(kernel, theta.size, H) for theta in sor.values]


def bootstrap_draws(sor: SecondOrderResiduals, grams: Sequence[ToeplitzGram], t_min: int,
                    boot_count: int, alpha: float, seed: rngmod.SeedLike,
                    stream_ids: Sequence[int] | None = None) -> BootstrapDraws:
    """Run ``boot_count`` bootstrap replicates.

    Replicate ``u`` of group ``k`` draws from the substream ``(STREAM_BOOT, u, id_k)``
    where ``id_k = stream_ids[k]`` (default ``k``).
    """
    ids = list(range(sor.K)) if stream_ids is None else list(stream_ids)
    values = np.empty(boot_count)
    for u in range(boot_count):
        weights = [
            sample_weights(g.size, g, rngmod.substream(seed, rngmod.STREAM_BOOT, u, ids[k]))
            for k, g in enumerate(grams)
        ]
        values[u] = bootstrap_statistic(sor, weights, t_min)
    q, v = empirical_quantile(values, alpha)
    values.setflags(write=False)
    return BootstrapDraws(values, q, v)


@dataclass(frozen=True, eq=False)
class TestRun:
    """Everything computed during :func:`run_test`, for diagnostics."""

    __test__ = False

    report: TestReport
    band: BandConfig
    sor: SecondOrderResiduals
    grams: tuple[ToeplitzGram, ...]
    draws: BootstrapDraws


def run_test_detailed(panel: Panel, config: TestConfig, seed: rngmod.SeedLike | None = None) -> TestRun:
    start = time.perf_counter()
    seed = config.seed if seed is None else seed
    if config.auto_bandwidth and config.band is None:
        band = select_bands(panel, config.grid)
    else:
        band = config.band.clamped(panel.t_min)
    stat = rhat(panel, band, center=config.center)
    _, residuals = demean(panel)
    sor = second_order_residuals(residuals, band)
    if config.H is not None:
        H = config.H
    elif not any(np.any(v) for v in sor.values):
        # every draw is exactly zero whatever H is; skip the block-length rule
        H = MIN_H
    else:
        H = select_h(sor)
    grams = tuple(weight_grams(sor, H, config.kernel))
    draws = bootstrap_draws(sor, grams, panel.t_min, config.boot_count, config.alpha, seed)
    if np.ptp(draws.values) == 0.0:
        warnings.warn("all bootstrap statistics are identical", DegenerateVariance, stacklevel=2)
    reject = bool(stat.scaled >= draws.quantile)
    report = TestReport(
        statistic=stat.scaled,
        rhat=stat.rhat,
        quantile=draws.quantile,
        reject=reject,
        B=band.B,
        B1=band.B1,
        H=float(H),
        boot_count=config.boot_count,
        alpha=config.alpha,
        seed=int(seed) if not isinstance(seed, np.random.SeedSequence) else int(config.seed),
        wall_time=time.perf_counter() - start,
    )
    return TestRun(report, band, sor, grams, draws)


def run_test(panel: Panel, config: TestConfig, seed: rngmod.SeedLike | None = None) -> TestReport:
    """Bootstrap-calibrated test of equal group means.

    The statistic is rescaled by ``sqrt(T_min (B1 - B))`` so that it lives on the
    same scale as the bootstrap draws, and ``H0`` is rejected when it is at least
    the empirical ``1 - alpha`` quantile of the draws.
    """
    return run_test_detailed(panel, config, seed).report
