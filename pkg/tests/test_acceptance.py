"""Acceptance suite: one check per criterion at its stated tolerance.

Each test prints a single ``[PASS]``/``[FAIL]`` line to the terminal (also when
output is captured) before asserting.  The module can also be run directly:
``python tests/test_acceptance.py`` prints every line and exits non-zero if any
criterion fails.
"""

from __future__ import annotations

import math
import sys
import time
import warnings
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent))
import oracles  # noqa: E402

from hdanova import rng as rngmod  # noqa: E402
from hdanova.bandwidth import select_bands, select_h, zhat, zhat_subsample  # noqa: E402
from hdanova.bootstrap import (  # noqa: E402
    TestConfig, bootstrap_coefficients, bootstrap_draws, weight_grams,
)
from hdanova.dgp import DgpSpec, apply_theta, distance, draw_means, gen_innovations, gen_panel  # noqa: E402
from hdanova.harness import ExperimentSpec, emit_report, fast_profile, run_size_power  # noqa: E402
from hdanova.kernel import GAUSSIAN, gram  # noqa: E402
from hdanova.panel import demean  # noqa: E402
from hdanova.statistic import BandConfig, banded_cross_sum, pair_count, rhat, rhat_k  # noqa: E402
from hdanova.variance import component_hac, default_scale, second_order_residuals, theta_hat  # noqa: E402

ROOT_SEED = 20240


@dataclass
class Outcome:
    number: int
    title: str
    ok: bool
    detail: str

    def line(self) -> str:
        return f"[{'PASS' if self.ok else 'FAIL'}] criterion {self.number:2d}: {self.title} -- {self.detail}"


# ---------------------------------------------------------------- criteria

def criterion_1() -> Outcome:
    start = time.perf_counter()
    mismatches = checked = 0
    for T in range(3, 51):
        idx = np.arange(T)
        lags = np.abs(idx[:, None] - idx[None, :])
        for B in range(1, T - 1):
            at_least = lags >= B
            for B1 in range(B + 1, T):
                brute = int(np.count_nonzero(at_least & (lags <= B1)))
                checked += 1
                mismatches += pair_count(T, BandConfig(B, B1)) != brute
    elapsed = time.perf_counter() - start
    ok = mismatches == 0 and elapsed < 5.0
    return Outcome(1, "pair_count equals enumeration, T <= 50", ok,
                   f"{checked} triples, {mismatches} mismatches, {elapsed:.2f}s (limit 5s)")


def _mask_banded(X, B, B1):
    T = X.shape[0]
    lags = np.abs(np.subtract.outer(np.arange(T), np.arange(T)))
    return float(np.sum((X @ X.T) * ((lags >= B) & (lags <= B1))))


def _loop_theta(E, B, B1):
    G = E @ E.T
    return np.array([G[t - 1, max(t - B1, 1) - 1:t - B].sum() for t in range(B + 1, E.shape[0] + 1)])


def _loop_rhat_k(Xk, X1, B, B1):
    d = Xk.shape[1]
    Vk, V1 = oracles.pair_count(Xk.shape[0], B, B1), oracles.pair_count(X1.shape[0], B, B1)
    cross = float(np.sum(Xk @ X1.T))
    return (_mask_banded(Xk, B, B1) / (Vk * math.sqrt(d)) + _mask_banded(X1, B, B1) / (V1 * math.sqrt(d))
            - 2 * cross / (Xk.shape[0] * X1.shape[0] * math.sqrt(d)))


def _rel(a, b):
    return abs(a - b) / max(abs(b), 1e-300)


def criterion_2() -> Outcome:
    start = time.perf_counter()
    rng = np.random.default_rng(ROOT_SEED + 2)
    worst = {"banded_cross_sum": 0.0, "second_order_residuals": 0.0, "rhat_k": 0.0, "zhat": 0.0}
    for _ in range(200):
        T = int(rng.integers(12, 101))
        T1 = int(rng.integers(12, 101))
        d = int(rng.integers(1, 51))
        B = int(rng.integers(1, min(T, T1) - 2))
        B1 = int(rng.integers(B + 1, min(T, T1)))
        X = rng.standard_normal((T, d)) + rng.uniform(-1, 1)
        X1 = rng.standard_normal((T1, d)) + rng.uniform(-1, 1)
        band = BandConfig(B, B1)
        worst["banded_cross_sum"] = max(worst["banded_cross_sum"],
                                        _rel(banded_cross_sum(X, band), _mask_banded(X, B, B1)))
        E = X - X.mean(axis=0)
        ref = _loop_theta(E, B, B1)
        got = theta_hat(E, band)
        worst["second_order_residuals"] = max(worst["second_order_residuals"],
                                              float(np.max(np.abs(got - ref)) / max(np.max(np.abs(ref)), 1e-300)))
        worst["rhat_k"] = max(worst["rhat_k"], _rel(rhat_k(X, X1, band), _loop_rhat_k(X, X1, B, B1)))
        ref_z = _mask_banded(X, B, B1) / (oracles.pair_count(T, B, B1) * math.sqrt(d))
        worst["zhat"] = max(worst["zhat"], _rel(zhat(X, B, B1), ref_z))
    # the subsample path goes through the same oracle on a prefix
    X = rng.standard_normal((90, 7))
    ref = _mask_banded(X[:27], 3, 6) / (oracles.pair_count(27, 3, 6) * math.sqrt(7))
    worst["zhat"] = max(worst["zhat"], _rel(zhat_subsample(X, 10, 21, 0.3), ref))
    elapsed = time.perf_counter() - start
    ok = all(v <= 1e-8 for v in worst.values()) and elapsed < 30.0
    detail = ", ".join(f"{k} {v:.1e}" for k, v in worst.items())
    return Outcome(2, "sliding-window sums match naive oracles (rel 1e-8)", ok,
                   f"worst relative error: {detail}; {elapsed:.1f}s (limit 30s)")


def criterion_3() -> Outcome:
    start = time.perf_counter()
    worst = math.inf
    for T in (64, 128, 256):
        for H in (1.0, 5.0, 50.0, float(T)):
            worst = min(worst, float(np.linalg.eigvalsh(gram(GAUSSIAN, T, H).matrix)[0]))
    elapsed = time.perf_counter() - start
    return Outcome(3, "Toeplitz Gram is PSD", worst >= -1e-8 and elapsed < 30.0,
                   f"smallest eigenvalue {worst:.2e} (limit -1e-8), {elapsed:.1f}s")


def criterion_4() -> Outcome:
    start = time.perf_counter()
    panel, _ = gen_panel(DgpSpec("spatial_independent", T=(150, 200), d=250), rngmod.child(ROOT_SEED, 4))
    band = select_bands(panel)
    _, res = demean(panel)
    sor = second_order_residuals(res, band)
    H = select_h(sor)
    grams = weight_grams(sor, H)
    U = 20000
    draws = bootstrap_draws(sor, grams, panel.t_min, U, 0.05, rngmod.child(ROOT_SEED, 4, 1))
    c = bootstrap_coefficients(sor, panel.t_min) / 2.0  # c_k without the factor 2
    closed = 4.0 * sum(ck**2 * th @ g.matrix @ th for ck, th, g in zip(c, sor.values, grams))
    mean, var = float(np.mean(draws.values)), float(np.var(draws.values, ddof=1))
    se = math.sqrt(var / U)
    rel = abs(var - closed) / closed
    elapsed = time.perf_counter() - start
    ok = abs(mean) <= 4 * se and rel <= 0.05 and elapsed < 60.0
    return Outcome(4, "bootstrap conditional law, U=20000", ok,
                   f"mean {mean:.3f} ({abs(mean) / se:.2f} SE, limit 4); variance {var:.2f} vs closed form "
                   f"{closed:.2f} ({100 * rel:.2f}%, limit 5%); {elapsed:.1f}s")


def _spatial(shift, R):
    spec = ExperimentSpec(DgpSpec("spatial_independent", T=(150, 200), d=250, shift=shift),
                          TestConfig(auto_bandwidth=True, boot_count=100, seed=ROOT_SEED), R)
    return run_size_power(spec)


def criterion_5() -> Outcome:
    row = _spatial(None, 200)
    ok = 0.01 <= row.rate <= 0.12
    return Outcome(5, "null size, spatially independent, R=200", ok,
                   f"rate {row.rate:.3f} (SE {row.se:.3f}; band [0.01, 0.12]); modal (B,B1,H)=({row.B},{row.B1},{row.H:.1f})")


def criterion_6() -> Outcome:
    row = _spatial(1.0, 100)
    return Outcome(6, "power under Uniform(0,1) shift, R=100", row.rate >= 0.95,
                   f"rate {row.rate:.3f} (limit >= 0.95); mean distance {row.mean_distance:.2f}")


def criterion_7() -> Outcome:
    spec = DgpSpec("moving_average", T=(100, 100), d=200)
    naive, banded = [], []
    for r in range(200):
        panel, _ = gen_panel(spec, rngmod.child(ROOT_SEED, 7, r))
        naive.append(rhat(panel, BandConfig(1, 99)).rhat)
        banded.append(rhat(panel, select_bands(panel)).rhat)
    out = []
    for values in (naive, banded):
        v = np.asarray(values)
        se = v.std(ddof=1) / math.sqrt(v.size)
        out.append((v.mean(), se, v.mean() / se))
    ok = out[0][2] > 5 and abs(out[1][2]) <= 4
    return Outcome(7, "naive-mode bias vs banded mode, MA null, R=200", ok,
                   f"naive mean {out[0][0]:.4f} = {out[0][2]:.1f} SE (limit > 5); "
                   f"banded mean {out[1][0]:.4f} = {out[1][2]:.2f} SE (limit |z| <= 4)")


def criterion_8() -> Outcome:
    start = time.perf_counter()
    spec = DgpSpec(d=250, shift=1.0)
    vals = [distance(draw_means(spec, rngmod.substream(ROOT_SEED, 8, r))) for r in range(1000)]
    target = math.sqrt(250) / 3
    rel = abs(np.mean(vals) - target) / target
    elapsed = time.perf_counter() - start
    return Outcome(8, "mean distance equals sqrt(d)/3", rel <= 0.03 and elapsed < 5.0,
                   f"mean {np.mean(vals):.3f} vs {target:.3f} ({100 * rel:.2f}%, limit 3%); {elapsed:.2f}s")


def criterion_9() -> Outcome:
    T = d = 300
    band = BandConfig(math.floor(T ** 0.15), math.floor(T ** 0.3))   # (2, 5)
    scale = default_scale(T, d, band)
    stats, estimates = [], []
    for r in range(1000):
        rng = rngmod.substream(ROOT_SEED, 9, r)
        X = 1.0 + apply_theta(gen_innovations("independent", T, d, rng=rng))
        E = X - X.mean(axis=0)
        stats.append(banded_cross_sum(E, band) / scale)
        estimates.append(component_hac(E, band, select_h(2.0 * theta_hat(E, band))).value)
    mc = float(np.var(stats, ddof=1))
    hac = float(np.mean(estimates))
    rel = abs(hac - mc) / mc
    return Outcome(9, "HAC estimate vs Monte Carlo variance, i.i.d. innovations", rel <= 0.25,
                   f"mean HAC {hac:.3f} vs MC variance {mc:.3f} ({100 * rel:.1f}%, limit 25%); "
                   f"T=d=300, (B,B1)=({band.B},{band.B1})")


def criterion_10() -> Outcome:
    start = time.perf_counter()
    base = [ExperimentSpec(DgpSpec("spatial_independent", shift=s),
                           TestConfig(auto_bandwidth=True, seed=ROOT_SEED), 200) for s in (None, 1.0)]
    texts = {}
    for workers in (1, 8):
        rows = [run_size_power(replace(fast_profile(e), parallelism=workers)) for e in base]
        texts[workers] = {fmt: emit_report(rows, fmt).encode() for fmt in ("json", "csv")}
    elapsed = time.perf_counter() - start
    same = texts[1] == texts[8]
    return Outcome(10, "parallelism 1 vs 8 gives byte-identical reports", same and elapsed < 60.0,
                   f"json and csv identical: {same}; {elapsed:.1f}s for both runs (limit 60s)")


CRITERIA = {n: globals()[f"criterion_{n}"] for n in range(1, 11)}
SLOW = {5, 6, 7, 9}


# ------------------------------------------------------------------ pytest

def _report(outcome: Outcome, capsys) -> None:
    with capsys.disabled():
        print("\n" + outcome.line())
    assert outcome.ok, outcome.line()


@pytest.mark.parametrize("number", [pytest.param(n, marks=pytest.mark.slow) if n in SLOW else n
                                    for n in CRITERIA])
def test_criterion(number, capsys):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        outcome = CRITERIA[number]()
    _report(outcome, capsys)


def main() -> int:
    failed = 0
    for fn in CRITERIA.values():
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            outcome = fn()
        print(outcome.line(), flush=True)
        failed += not outcome.ok
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
