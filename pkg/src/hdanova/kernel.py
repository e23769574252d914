"""Bootstrap kernels and their Toeplitz Gram matrices."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from .errors import InvalidArgument, NumericalFailure

JITTERS = (0.0, 1e-12, 1e-10, 1e-8)
PSD_TOL = 1e-8

_KERNELS: dict[str, Callable[[np.ndarray], np.ndarray]] = {
    "gaussian": lambda x: np.exp(-0.5 * np.square(x)),
}


@dataclass(frozen=True)
class KernelSpec:
    """A named kernel ``K: R -> [0, 1]`` with ``K(0) = 1``.

    Instances are callable and vectorised.
    """

    kind: str = "gaussian"

    def __post_init__(self) -> None:
        kind = self.kind.lower()
        if kind not in _KERNELS:
            raise InvalidArgument(f"unknown kernel {self.kind!r}; available: {sorted(_KERNELS)}")
        object.__setattr__(self, "kind", kind)

    def __call__(self, x):
        return _KERNELS[self.kind](np.asarray(x, dtype=np.float64))


GAUSSIAN = KernelSpec("gaussian")


def kernel_eval(spec: KernelSpec, x: float) -> float:
    if not math.isfinite(x):
        raise InvalidArgument(f"kernel argument must be finite, got {x}")
    return float(spec(x))


@dataclass(frozen=True, eq=False)
class ToeplitzGram:
    """``G[i, j] = K((i - j) / H)`` together with a factor ``L L^T = G + jitter I``."""

    size: int
    bandwidth: float
    matrix: np.ndarray
    factor: np.ndarray
    jitter: float

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(self.matrix)[0])


def gram_matrix(spec: Callable, T: int, H: float) -> np.ndarray:
    lags = np.arange(T, dtype=np.float64)
    column = np.asarray(spec(lags / H), dtype=np.float64)
    idx = np.abs(np.subtract.outer(np.arange(T), np.arange(T)))
    return column[idx]


def gram(spec: KernelSpec, T: int, H: float) -> ToeplitzGram:
    """Build the Gram matrix and its Cholesky factor.

    The factorisation retries with diagonal jitter 0, 1e-12, 1e-10 and 1e-8.
    Dense O(T^3); results are cached per ``(spec, T, H)``.
    """
    if int(T) != T or T < 1:
        raise InvalidArgument(f"T must be a positive integer, got {T}")
    if not (H > 0 and math.isfinite(H)):
        raise InvalidArgument(f"H must be positive and finite, got {H}")
    return _gram_cached(spec, int(T), float(H))


@lru_cache(maxsize=256)
def _gram_cached(spec: KernelSpec, T: int, H: float) -> ToeplitzGram:
    G = gram_matrix(spec, T, H)
    eye = np.eye(T)
    for jitter in JITTERS:
        try:
            L = np.linalg.cholesky(G + jitter * eye if jitter else G)
        except np.linalg.LinAlgError:
            continue
        G.setflags(write=False)
        L.setflags(write=False)
        return ToeplitzGram(T, H, G, L, jitter)
    raise NumericalFailure(f"Cholesky failed for T={T}, H={H} even with jitter {JITTERS[-1]}")


def check_admissible(spec: Callable, grid: Sequence[float]) -> bool:
    """Numerical admissibility check on a sorted grid of non-negative points.

    Checks ``K(0) = 1``, symmetry, monotone non-increase on the grid, values in
    [0, 1], and that the 128 x 128 Gram matrix at bandwidth 8 is PSD.
    """
    x = np.asarray(grid, dtype=np.float64)
    try:
        k0 = float(spec(0.0))
        kpos = np.asarray(spec(x), dtype=np.float64)
        kneg = np.asarray(spec(-x), dtype=np.float64)
        G = gram_matrix(spec, 128, 8.0)
    except (ValueError, FloatingPointError, ArithmeticError):
        return False
    if not np.isclose(k0, 1.0, rtol=0.0, atol=1e-12):
        return False
    if not np.all(np.isfinite(kpos)) or not np.allclose(kpos, kneg, rtol=0.0, atol=1e-12):
        return False
    if np.any(kpos < 0.0) or np.any(kpos > 1.0 + 1e-12):
        return False
    if np.any(np.diff(kpos) > 1e-12):
        return False
    return bool(np.linalg.eigvalsh(G)[0] >= -PSD_TOL)
