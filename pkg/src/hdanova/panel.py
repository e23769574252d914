"""Panel data model: K groups of (T_k x d) series, CSV ingestion and demeaning."""

from __future__ import annotations

import csv
import errno
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import InvalidArgument, MalformedData, ShapeMismatch, TooShort

MIN_LENGTH = 3


def _frozen(x: np.ndarray) -> np.ndarray:
    arr = np.array(x, dtype=np.float64, order="C", copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Panel:
    """Ordered groups of observations; group ``k`` has shape ``(T_k, d)``.

    Rows are time points and columns are coordinates.  Arrays are copied on
    construction and made read-only.
    """

    groups: tuple[np.ndarray, ...]

    def __post_init__(self) -> None:
        groups = tuple(_frozen(g) for g in self.groups)
        object.__setattr__(self, "groups", groups)
        self._validate()

    def _validate(self) -> None:
        if len(self.groups) < 2:
            raise InvalidArgument(f"need at least 2 groups, got {len(self.groups)}")
        for k, g in enumerate(self.groups, start=1):
            if g.ndim != 2:
                raise ShapeMismatch(f"group {k} must be 2-dimensional, got ndim={g.ndim}")
            if g.shape[1] < 1:
                raise ShapeMismatch(f"group {k} has no coordinates")
            if g.shape[0] < MIN_LENGTH:
                raise TooShort(f"group {k} has T={g.shape[0]} < {MIN_LENGTH}")
            if not np.all(np.isfinite(g)):
                raise MalformedData(f"group {k} contains non-finite values")
        dims = {g.shape[1] for g in self.groups}
        if len(dims) != 1:
            raise ShapeMismatch(f"groups disagree on dimension: {sorted(dims)}")

    @property
    def K(self) -> int:
        return len(self.groups)

    @property
    def d(self) -> int:
        return self.groups[0].shape[1]

    @property
    def lengths(self) -> tuple[int, ...]:
        return tuple(g.shape[0] for g in self.groups)

    @property
    def t_min(self) -> int:
        return min(self.lengths)

    def permuted(self, order: Sequence[int]) -> "Panel":
        """Return a panel whose ``i``-th group is ``self.groups[order[i]]``."""
        return type(self)(tuple(self.groups[i] for i in order))

    def equals(self, other: "Panel") -> bool:
        return len(self.groups) == len(other.groups) and all(
            a.shape == b.shape and np.array_equal(a, b)
            for a, b in zip(self.groups, other.groups)
        )


@dataclass(frozen=True, eq=False)
class ResidualPanel(Panel):
    """Per-group residuals ``x_{t,k} - mean_k``; same shapes as the source panel."""


@dataclass(frozen=True, eq=False)
class GroupMeans:
    means: tuple[np.ndarray, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "means", tuple(_frozen(m) for m in self.means))


def column_means(x: np.ndarray) -> np.ndarray:
    # numpy only sums pairwise along the contiguous axis
    xt = np.ascontiguousarray(np.asarray(x, dtype=np.float64).T)
    return xt.sum(axis=1) / x.shape[0]


def demean(panel: Panel) -> tuple[GroupMeans, ResidualPanel]:
    means = tuple(column_means(g) for g in panel.groups)
    residuals = tuple(g - m for g, m in zip(panel.groups, means))
    return GroupMeans(means), ResidualPanel(residuals)


def split_periods(series: np.ndarray, n_periods: int) -> Panel:
    """Cut one ``(T, d)`` series into ``n_periods`` contiguous blocks.

    Block lengths differ by at most one; the first ``T % n_periods`` blocks
    receive the extra row.
    """
    x = np.asarray(series, dtype=np.float64)
    if x.ndim == 1:
        x = x[:, None]
    if int(n_periods) != n_periods or n_periods < 2:
        raise InvalidArgument(f"n_periods must be an integer >= 2, got {n_periods}")
    n_periods = int(n_periods)
    T = x.shape[0]
    if T < MIN_LENGTH * n_periods:
        raise TooShort(f"T={T} is too short for {n_periods} periods of >= {MIN_LENGTH} rows")
    base, extra = divmod(T, n_periods)
    sizes = [base + 1 if i < extra else base for i in range(n_periods)]
    bounds = np.cumsum([0] + sizes)
    return Panel(tuple(x[bounds[i]:bounds[i + 1]] for i in range(n_periods)))


# --------------------------------------------------------------------------- CSV

def _parse_float(cell: str, line: int) -> float:
    cell = cell.strip()
    if cell == "":
        raise MalformedData(f"line {line}: empty cell")
    try:
        value = float(cell)
    except ValueError:
        raise MalformedData(f"line {line}: cannot parse {cell!r} as a number") from None
    if not math.isfinite(value):
        raise MalformedData(f"line {line}: non-finite value {cell!r}")
    return value


def _parse_int(cell: str, line: int, name: str) -> int:
    try:
        return int(cell.strip())
    except ValueError:
        raise MalformedData(f"line {line}: {name} {cell!r} is not an integer") from None


def read_groups(path: str | Path) -> list[np.ndarray]:
    """Read the long-form CSV into one array per group id (ids must be 1..K)."""
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(errno.ENOENT, "no such file", str(path))
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise MalformedData(f"{path}: empty file") from None
        header = [h.strip() for h in header]
        if len(header) < 3 or header[0] != "group" or header[1] != "time":
            raise MalformedData(f"{path}: header must start with 'group,time' and name >= 1 value column")
        rows_by_group: dict[int, list[list[float]]] = {}
        width_by_group: dict[int, int] = {}
        last_time: dict[int, int] = {}
        order: list[int] = []
        for line, row in enumerate(reader, start=2):
            if not row or all(c.strip() == "" for c in row):
                continue
            if len(row) < 3:
                raise MalformedData(f"line {line}: expected group, time and values")
            gid = _parse_int(row[0], line, "group")
            t = _parse_int(row[1], line, "time")
            values = [_parse_float(c, line) for c in row[2:]]
            if gid not in rows_by_group:
                if order and gid < order[-1]:
                    raise MalformedData(f"line {line}: rows must be grouped by ascending group id")
                order.append(gid)
                rows_by_group[gid] = []
                width_by_group[gid] = len(values)
            elif gid != order[-1]:
                raise MalformedData(f"line {line}: group {gid} is not contiguous")
            elif len(values) != width_by_group[gid]:
                raise MalformedData(f"line {line}: row width differs from earlier rows of group {gid}")
            if gid in last_time and t <= last_time[gid]:
                raise MalformedData(f"line {line}: time must be strictly increasing within group {gid}")
            last_time[gid] = t
            rows_by_group[gid].append(values)
    if not order:
        raise MalformedData(f"{path}: no data rows")
    if order != list(range(1, len(order) + 1)):
        raise MalformedData(f"{path}: group ids must be 1..K, got {order}")
    widths = {width_by_group[g] for g in order}
    if len(widths) != 1:
        raise ShapeMismatch(f"{path}: groups have different numbers of value columns: "
                            + ", ".join(f"group {g}: {width_by_group[g]}" for g in order))
    if widths.pop() != len(header) - 2:
        raise MalformedData(f"{path}: header names {len(header) - 2} value columns, rows carry a different count")
    return [np.asarray(rows_by_group[g], dtype=np.float64) for g in order]


def load_panel(path: str | Path) -> Panel:
    """Load a ``group,time,x1,...,xd`` CSV into a :class:`Panel`."""
    return Panel(tuple(read_groups(path)))


def load_series(path: str | Path) -> np.ndarray:
    """Load the same CSV schema as one series, stacking groups in id order."""
    return np.vstack(read_groups(path))


def save_panel(panel: Panel | Iterable[np.ndarray], path: str | Path) -> None:
    groups = panel.groups if isinstance(panel, Panel) else tuple(panel)
    d = groups[0].shape[1]
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["group", "time"] + [f"x{i}" for i in range(1, d + 1)])
        for k, g in enumerate(groups, start=1):
            for t, row in enumerate(g, start=1):
                # repr() is the shortest string that round-trips a double
                writer.writerow([k, t] + [repr(float(v)) for v in row])
