"""Monte Carlo size/power sweeps, the real-data workflow and report files.

Replicate ``r`` of an experiment with root seed ``s`` uses the seed sequence
at address ``(r,)`` below ``s`` for everything it draws (data, mean offsets
and bootstrap weights), so results do not depend on how replicates are spread
over worker processes.
"""

from __future__ import annotations

import csv
import io
import json
import math
import sys
import time
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib

from . import rng as rngmod
from .bootstrap import SCHEMA_VERSION, TestConfig, TestReport, run_test, run_test_detailed
from .dgp import DgpSpec, Kind, distance, gen_panel
from .errors import ExperimentFailure, HdAnovaError, InvalidArgument, MalformedData
from .kernel import KernelSpec
from .panel import load_series, split_periods
from .statistic import BandConfig

FAST_PROFILE = {"replicates": 50, "boot_count": 60, "d": 60, "T": 80}


@dataclass(frozen=True)
class ExperimentSpec:
    dgp: DgpSpec
    config: TestConfig
    replicates: int = 200
    parallelism: int = 1

    def __post_init__(self) -> None:
        if int(self.replicates) != self.replicates or self.replicates < 1:
            raise InvalidArgument(f"replicates must be >= 1, got {self.replicates}")
        if int(self.parallelism) != self.parallelism or self.parallelism < 1:
            raise InvalidArgument(f"parallelism must be >= 1, got {self.parallelism}")


@dataclass(frozen=True)
class ReplicateResult:
    reject: bool
    B: int
    B1: int
    H: float
    distance: float
    wall_time: float


@dataclass(frozen=True)
class SummaryRow:
    """One cell of a size/power table.

    ``shift`` is 0 under the null.  ``B``, ``B1`` and ``H`` are the most frequent
    selection across replicates (ties go to the smallest triple).
    """

    kind: str
    shift: float
    replicates: int
    rejections: int
    rate: float
    se: float
    mean_distance: float
    B: int
    B1: int
    H: float
    wall_time: float | None = None


# fixed and documented: the CSV header is exactly this order
COLUMNS = tuple(f.name for f in fields(SummaryRow))


def binomial_se(p: float, n: int) -> float:
    return math.sqrt(p * (1.0 - p) / n)


def run_replicate(spec: ExperimentSpec, r: int) -> ReplicateResult:
    """Generate, test and record replicate ``r``."""
    start = time.perf_counter()
    seed = rngmod.child(spec.config.seed, r)
    try:
        panel, means = gen_panel(spec.dgp, seed)
        run = run_test_detailed(panel, spec.config, seed=seed)
    except (HdAnovaError, ArithmeticError) as exc:
        raise ExperimentFailure(
            f"replicate {r} of {spec.dgp.kind.value} (shift={spec.dgp.shift_label}) failed: "
            f"{type(exc).__name__}: {exc}"
        ) from exc
    rep = run.report
    return ReplicateResult(rep.reject, rep.B, rep.B1, rep.H, distance(means),
                           time.perf_counter() - start)


def _replicate_task(args: tuple[ExperimentSpec, int]) -> ReplicateResult:
    return run_replicate(*args)


def run_replicates(spec: ExperimentSpec) -> list[ReplicateResult]:
    """All replicates of ``spec`` in replicate order."""
    tasks = [(spec, r) for r in range(spec.replicates)]
    if spec.parallelism == 1:
        return [_replicate_task(t) for t in tasks]
    chunk = max(1, spec.replicates // (4 * spec.parallelism))
    with ProcessPoolExecutor(max_workers=spec.parallelism) as pool:
        return list(pool.map(_replicate_task, tasks, chunksize=chunk))


def summarize(spec: ExperimentSpec, results: Sequence[ReplicateResult],
              wall_time: float | None = None) -> SummaryRow:
    R = len(results)
    rejections = sum(r.reject for r in results)
    rate = rejections / R
    counts = Counter((r.B, r.B1, r.H) for r in results)
    (B, B1, H), _ = min(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    return SummaryRow(
        kind=spec.dgp.kind.value,
        shift=0.0 if spec.dgp.shift is None else float(spec.dgp.shift),
        replicates=R,
        rejections=int(rejections),
        rate=rate,
        se=binomial_se(rate, R),
        mean_distance=float(np.mean([r.distance for r in results])),
        B=int(B),
        B1=int(B1),
        H=float(H),
        wall_time=wall_time,
    )


def run_size_power(spec: ExperimentSpec, timing: bool = False) -> SummaryRow:
    """Rejection rate over ``spec.replicates`` independent replicates.

    Wall time is left out unless ``timing`` is set, so that reports from the
    same seed are byte-identical.
    """
    start = time.perf_counter()
    results = run_replicates(spec)
    return summarize(spec, results, time.perf_counter() - start if timing else None)


def run_real(input: str | Path, n_periods: int, config: TestConfig) -> TestReport:
    """Split one long series into ``n_periods`` consecutive blocks and test them."""
    if int(n_periods) != n_periods or n_periods < 2:
        raise InvalidArgument(f"need at least two periods, got {n_periods}")
    panel = split_periods(load_series(input), int(n_periods))
    return run_test(panel, config)


# ------------------------------------------------------------------ reports

def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def emit_report(rows: Iterable[SummaryRow], fmt: str = "json", path: str | Path | None = None) -> str:
    """Serialise rows as JSON or CSV; write to ``path`` if given and return the text."""
    rows = list(rows)
    if fmt == "json":
        doc = {"schema_version": SCHEMA_VERSION, "rows": [asdict(r) for r in rows]}
        text = json.dumps(doc, indent=2) + "\n"
    elif fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(COLUMNS)
        for r in rows:
            writer.writerow([_cell(getattr(r, c)) for c in COLUMNS])
        text = buf.getvalue()
    else:
        raise InvalidArgument(f"unknown report format {fmt!r}")
    if path is not None:
        Path(path).write_text(text, encoding="utf-8")
    return text


_CASTS = {"kind": str, "shift": float, "replicates": int, "rejections": int, "rate": float,
          "se": float, "mean_distance": float, "B": int, "B1": int, "H": float}


def parse_report(text: str, fmt: str = "json") -> list[SummaryRow]:
    if fmt == "json":
        doc = json.loads(text)
        if doc.get("schema_version") != SCHEMA_VERSION:
            raise MalformedData(f"unsupported schema_version {doc.get('schema_version')!r}")
        return [SummaryRow(**row) for row in doc["rows"]]
    if fmt == "csv":
        reader = csv.reader(io.StringIO(text))
        header = tuple(next(reader, ()))
        if header != COLUMNS:
            raise MalformedData(f"unexpected header {header}")
        rows = []
        for rec in reader:
            vals = dict(zip(COLUMNS, rec))
            kwargs = {k: _CASTS[k](vals[k]) for k in _CASTS}
            kwargs["wall_time"] = float(vals["wall_time"]) if vals["wall_time"] else None
            rows.append(SummaryRow(**kwargs))
        return rows
    raise InvalidArgument(f"unknown report format {fmt!r}")


# ------------------------------------------------------------- experiment sets

def default_experiments(seed: int = 0, parallelism: int = 1) -> list[ExperimentSpec]:
    """Size and power cells for the spatially independent design."""
    config = TestConfig(auto_bandwidth=True, boot_count=100, seed=seed)
    return [
        ExperimentSpec(DgpSpec(Kind.SPATIAL_INDEPENDENT, shift=shift), config, 200, parallelism)
        for shift in (None, 1.0)
    ]


def fast_profile(spec: ExperimentSpec) -> ExperimentSpec:
    p = FAST_PROFILE
    dgp = replace(spec.dgp, d=p["d"], T=(p["T"],) * spec.dgp.K)
    config = replace(spec.config, boot_count=p["boot_count"])
    return replace(spec, dgp=dgp, config=config, replicates=p["replicates"])


_DGP_KEYS = {"kind", "K", "T", "d", "shift", "burn_in"}
_CONFIG_KEYS = {"B", "B1", "H", "kernel", "boot_count", "alpha", "seed", "center"}
_SPEC_KEYS = {"replicates", "parallelism"}


def experiment_from_mapping(block: dict, seed: int | None = None,
                            parallelism: int | None = None) -> ExperimentSpec:
    """Build one experiment from a flat key/value block.

    Omitting ``B``/``B1`` selects the band from the data; omitting ``H`` picks
    it automatically; omitting ``shift`` (or setting it to 0) is the null.
    """
    unknown = set(block) - _DGP_KEYS - _CONFIG_KEYS - _SPEC_KEYS
    if unknown:
        raise InvalidArgument(f"unknown experiment keys: {sorted(unknown)}")
    dgp_kw = {k: block[k] for k in _DGP_KEYS & set(block)}
    if "T" in dgp_kw and isinstance(dgp_kw["T"], list):
        dgp_kw["T"] = tuple(dgp_kw["T"])
    if not dgp_kw.get("shift"):
        dgp_kw["shift"] = None
    has_band = "B" in block or "B1" in block
    if has_band and not ("B" in block and "B1" in block):
        raise InvalidArgument("give both B and B1, or neither")
    config = TestConfig(
        band=BandConfig(block["B"], block["B1"]) if has_band else None,
        H=block.get("H"),
        kernel=KernelSpec(block.get("kernel", "gaussian")),
        boot_count=block.get("boot_count", 100),
        alpha=block.get("alpha", 0.05),
        seed=seed if seed is not None else block.get("seed", 0),
        auto_bandwidth=not has_band,
        center=block.get("center", True),
    )
    return ExperimentSpec(
        DgpSpec(**dgp_kw), config,
        replicates=block.get("replicates", 200),
        parallelism=parallelism if parallelism is not None else block.get("parallelism", 1),
    )


def load_experiments(path: str | Path, seed: int | None = None,
                     parallelism: int | None = None) -> list[ExperimentSpec]:
    """Read ``[experiment.N]`` blocks from a TOML file, ordered by ``N``."""
    with Path(path).open("rb") as fh:
        doc = tomllib.load(fh)
    blocks = doc.get("experiment")
    if not isinstance(blocks, dict) or not blocks:
        raise MalformedData(f"{path}: no [experiment.N] blocks")

    def order(key: str):
        return (0, int(key), "") if key.isdigit() else (1, 0, key)

    return [experiment_from_mapping(blocks[k], seed, parallelism) for k in sorted(blocks, key=order)]


def simulate(experiments: Sequence[ExperimentSpec], fast: bool = False,
             timing: bool = False) -> list[SummaryRow]:
    return [run_size_power(fast_profile(e) if fast else e, timing) for e in experiments]
