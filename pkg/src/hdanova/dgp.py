"""Synthetic panels for size and power studies.

Observations are ``x_{t,k} = mu_k + Theta eps_{t,k}`` where ``Theta`` is the
symmetric banded mixing matrix (1 on the diagonal, 0.5 and 0.3 on the first two
off-diagonals) and ``eps`` follows one of the innovation recursions below,
driven by i.i.d. Uniform[-1, 1] noise ``e``.  The spatially independent kind
skips the mixing and uses ``e`` directly.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

import numpy as np
from scipy.signal import lfilter

from . import rng as rngmod
from .errors import InvalidArgument
from .panel import Panel

MIN_BURN_IN = 7
THETA_BAND = (1.0, 0.5, 0.3)


class Kind(str, enum.Enum):
    SPATIAL_INDEPENDENT = "spatial_independent"
    INDEPENDENT = "independent"
    AUTOREGRESSIVE = "autoregressive"
    MOVING_AVERAGE = "moving_average"
    NONLINEAR = "nonlinear"
    NONSTATIONARY = "nonstationary"

    @classmethod
    def parse(cls, value: "Kind | str") -> "Kind":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower().replace("-", "_").replace(" ", "_")
        aliases = {"spatial": "spatial_independent", "iid": "independent", "ar": "autoregressive",
                   "ma": "moving_average", "non_linear": "nonlinear", "non_stationary": "nonstationary"}
        key = aliases.get(key, key)
        try:
            return cls(key)
        except ValueError:
            raise InvalidArgument(f"unknown innovation kind {value!r}") from None


STATIONARY_KINDS = (Kind.INDEPENDENT, Kind.AUTOREGRESSIVE, Kind.MOVING_AVERAGE, Kind.NONLINEAR)


@dataclass(frozen=True)
class DgpSpec:
    """One simulation design.  ``shift=None`` is the null; a float ``a`` adds
    Uniform(0, a) offsets to every coordinate of the first group's mean."""

    kind: Kind = Kind.SPATIAL_INDEPENDENT
    K: int = 2
    T: tuple[int, ...] = (150, 200)
    d: int = 250
    shift: float | None = None
    burn_in: int = 200

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", Kind.parse(self.kind))
        T = (self.T,) * self.K if isinstance(self.T, int) else tuple(int(t) for t in self.T)
        object.__setattr__(self, "T", T)
        if self.K < 2 or len(self.T) != self.K:
            raise InvalidArgument(f"need K >= 2 group lengths, got K={self.K}, T={self.T}")
        if self.d < 1 or min(self.T) < 1:
            raise InvalidArgument("d and every T_k must be positive")
        if self.shift is not None and not self.shift > 0:
            raise InvalidArgument(f"shift magnitude must be positive, got {self.shift}")
        if self.burn_in < MIN_BURN_IN:
            raise InvalidArgument(f"burn_in must be >= {MIN_BURN_IN}")

    @property
    def shift_label(self) -> str:
        return "none" if self.shift is None else f"uniform(0,{self.shift:g})"


@dataclass(frozen=True, eq=False)
class MeanSet:
    means: tuple[np.ndarray, ...]


def theta_matrix(d: int) -> np.ndarray:
    idx = np.abs(np.subtract.outer(np.arange(d), np.arange(d)))
    out = np.zeros((d, d))
    for lag, value in enumerate(THETA_BAND):
        out[idx == lag] = value
    return out


def apply_theta(eps: np.ndarray) -> np.ndarray:
    """Rows of ``eps`` multiplied by the mixing matrix, using its band (O(d) per row)."""
    eps = np.asarray(eps, dtype=np.float64)
    out = THETA_BAND[0] * eps
    for lag in (1, 2):
        w = THETA_BAND[lag]
        out[:, lag:] += w * eps[:, :-lag]
        out[:, :-lag] += w * eps[:, lag:]
    return out


def gen_innovations(kind: Kind | str, T: int, d: int, burn_in: int = 200,
                    rng: np.random.Generator | None = None, e: np.ndarray | None = None) -> np.ndarray:
    """Simulate ``burn_in + T`` steps from zero initial conditions; return the last ``T``.

    ``e`` overrides the Uniform[-1, 1] driving noise (shape ``(burn_in + T, d)``).
    """
    kind = Kind.parse(kind)
    if burn_in < MIN_BURN_IN:
        raise InvalidArgument(f"burn_in must be >= {MIN_BURN_IN} to cover the longest lag")
    n = burn_in + T
    if e is None:
        if rng is None:
            raise InvalidArgument("need an rng or explicit noise")
        e = rng.uniform(-1.0, 1.0, size=(n, d))
    else:
        e = np.broadcast_to(np.asarray(e, dtype=np.float64), (n, d))

    if kind in (Kind.SPATIAL_INDEPENDENT, Kind.INDEPENDENT):
        eps = np.array(e)
    elif kind is Kind.AUTOREGRESSIVE:
        eps = lfilter([1.0], [1.0, -0.7, -0.2], e, axis=0)
    elif kind is Kind.MOVING_AVERAGE:
        taps = np.zeros(8)
        taps[[0, 2, 5, 7]] = [1.0, 0.6, 0.4, 0.3]
        eps = lfilter(taps, [1.0], e, axis=0)
    elif kind is Kind.NONLINEAR:
        eps = np.zeros((n, d))
        # eps_0 = sin(0) + 0 * e_0 = 0
        for t in range(1, n):
            eps[t] = np.sin(eps[t - 1]) + e[t - 1] * e[t]
    else:
        eps = np.zeros((n, d))
        # coordinates are 1-based in the recursion: even i gets e_t, odd i gets e_{t-2} e_t
        even = (np.arange(d) + 1) % 2 == 0
        zero = np.zeros(d)
        for t in range(n):
            prev1 = eps[t - 1] if t >= 1 else zero
            prev4 = eps[t - 4] if t >= 4 else zero
            e_lag2 = e[t - 2] if t >= 2 else zero
            noise = np.where(even, e[t], e_lag2 * e[t])
            eps[t] = np.sin(prev1) + np.cos(prev4) + noise
    return np.ascontiguousarray(eps[burn_in:])


def draw_means(spec: DgpSpec, rng: np.random.Generator | None) -> MeanSet:
    ones = np.ones(spec.d)
    first = ones.copy()
    if spec.shift is not None:
        first = first + rng.uniform(0.0, spec.shift, size=spec.d)
    return MeanSet((first,) + tuple(ones.copy() for _ in range(spec.K - 1)))


NoiseHook = Callable[[int, int, int], np.ndarray]


def gen_group(spec: DgpSpec, k: int, mean: np.ndarray, seed: rngmod.SeedLike,
              base_noise: NoiseHook | None = None) -> np.ndarray:
    T = spec.T[k]
    e = None if base_noise is None else base_noise(k, spec.burn_in + T, spec.d)
    rng = rngmod.substream(seed) if e is None else None
    eps = gen_innovations(spec.kind, T, spec.d, spec.burn_in, rng, e)
    if spec.kind is not Kind.SPATIAL_INDEPENDENT:
        eps = apply_theta(eps)
    return mean + eps


def gen_panel(spec: DgpSpec, seed: rngmod.SeedLike,
              group_seeds: Mapping[int, rngmod.SeedLike] | None = None,
              base_noise: NoiseHook | None = None) -> tuple[Panel, MeanSet]:
    """Generate one panel and its true means.

    Group ``k`` (0-based) draws from substream ``(STREAM_DATA, k)`` of ``seed``
    unless ``group_seeds`` overrides it; the mean offsets use ``(STREAM_MEAN,)``.
    """
    means = draw_means(spec, rngmod.substream(seed, rngmod.STREAM_MEAN))
    group_seeds = group_seeds or {}
    groups = []
    for k in range(spec.K):
        gseed = group_seeds.get(k, rngmod.child(seed, rngmod.STREAM_DATA, k))
        groups.append(gen_group(spec, k, means.means[k], gseed, base_noise))
    return Panel(tuple(groups)), means


def distance(means: MeanSet | Sequence[np.ndarray]) -> float:
    mus = means.means if isinstance(means, MeanSet) else tuple(means)
    if len(mus) < 2:
        raise InvalidArgument("distance needs at least two means")
    d = mus[0].size
    return float(sum(np.sum((m - mus[0]) ** 2) for m in mus[1:]) / math.sqrt(d))
