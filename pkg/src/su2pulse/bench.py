"""Precision/runtime benchmark of the linear and quadratic steppers.

Each sample draws an effective coupling and half-sine amplitude uniformly
from ``param_range``, computes a refined reference once, and evolves with
every (order, n) combination. Precision is counted in correct digits

    p = -log10(max_ij |U_ij - U_ref_ij|),  clipped to [0, 15].
"""

from __future__ import annotations

import csv
import io
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .fields import half_sine
from .model import BlockParams
from .propagator import ConvergenceError, EvolutionSpec, StepOrder, evolve, reference

__all__ = [
    "BenchConfig",
    "BenchRecord",
    "BenchResult",
    "digits_of_precision",
    "draw_sample",
    "run_benchmark",
    "write_bench_csv",
    "BENCH_CSV_COLUMNS",
    "MAX_DIGITS",
]

MAX_DIGITS = 15.0
BENCH_CSV_COLUMNS = ("order", "n", "samples", "mean_p", "median_p", "min_p", "mean_time_s", "skipped")
_METRIC_NOTE = "# p = -log10(max entrywise |U - U_ref|) clipped to [0, 15]; U_ref = Richardson-refined quadratic, polar-projected"


@dataclass(frozen=True)
class BenchConfig:
    samples: int = 1000
    n_values: tuple[int, ...] = (10, 100, 1000)
    param_range: float = 5.0
    seed: int = 20240101
    reference_tol: float = 1e-10
    orders: tuple[str, ...] = ("linear", "quadratic")
    q: int = 1

    def __post_init__(self) -> None:
        if self.samples < 1:
            raise ValueError("samples must be >= 1")
        n_values = tuple(int(n) for n in self.n_values)
        if not n_values or any(n < 1 for n in n_values):
            raise ValueError("n_values must be a non-empty list of positive integers")
        object.__setattr__(self, "n_values", n_values)
        object.__setattr__(self, "orders", tuple(StepOrder(o).value for o in self.orders))
        if not self.param_range > 0:
            raise ValueError("param_range must be positive")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")


@dataclass
class BenchRecord:
    order: str
    n: int
    mean_digits: float
    median_digits: float
    min_digits: float
    mean_time: float
    median_time: float
    samples: int
    skipped: int = 0


@dataclass
class BenchResult:
    config: BenchConfig
    records: list[BenchRecord]
    skipped: int
    # digits[order][n] -> per-sample array (kept for downstream analysis)
    digits: dict[str, dict[int, np.ndarray]] = field(default_factory=dict, repr=False)

    def record(self, order: str, n: int) -> BenchRecord:
        for r in self.records:
            if r.order == StepOrder(order).value and r.n == n:
                return r
        raise KeyError((order, n))


def digits_of_precision(U, U_ref) -> float:
    err = float(np.max(np.abs(np.asarray(U) - np.asarray(U_ref))))
    if err == 0.0:
        return MAX_DIGITS
    return min(MAX_DIGITS, max(0.0, -math.log10(err)))


def draw_sample(seed: int, index: int, param_range: float) -> tuple[float, float]:
    """(Jeff, amplitude) for one sample; the stream depends only on (seed, index)."""
    rng = np.random.default_rng(np.random.SeedSequence([seed, index]))
    J, A = rng.uniform(-param_range, param_range, size=2)
    return float(J), float(A)


def _run_sample(cfg: BenchConfig, index: int):
    J, A = draw_sample(cfg.seed, index, cfg.param_range)
    block = BlockParams.effective(J, 1.0, cfg.q)
    field = half_sine(A)
    try:
        U_ref = reference(block, field, cfg.reference_tol)
    except ConvergenceError:
        return None
    out = {}
    for order in cfg.orders:
        for n in cfg.n_values:
            spec = EvolutionSpec(block, field, n, order)
            t0 = time.perf_counter()
            U = evolve(spec)
            elapsed = time.perf_counter() - t0
            out[(order, n)] = (digits_of_precision(U, U_ref), elapsed)
    return out


def run_benchmark(cfg: BenchConfig, threads: int = 1) -> BenchResult:
    """Run all samples (optionally on a thread pool) and aggregate per (order, n)."""
    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            results = list(pool.map(lambda i: _run_sample(cfg, i), range(cfg.samples)))
    else:
        results = [_run_sample(cfg, i) for i in range(cfg.samples)]
    ok = [r for r in results if r is not None]
    skipped = len(results) - len(ok)
    records = []
    digits: dict[str, dict[int, np.ndarray]] = {}
    for order in cfg.orders:
        digits[order] = {}
        for n in cfg.n_values:
            p = np.array([r[(order, n)][0] for r in ok])
            t = np.array([r[(order, n)][1] for r in ok])
            digits[order][n] = p
            if len(ok):
                rec = BenchRecord(order, n, float(p.mean()), float(np.median(p)), float(p.min()),
                                  float(t.mean()), float(np.median(t)), len(ok), skipped)
            else:
                rec = BenchRecord(order, n, math.nan, math.nan, math.nan, math.nan, math.nan, 0, skipped)
            records.append(rec)
    return BenchResult(cfg, records, skipped, digits)


def write_bench_csv(records, out=None) -> str:
    buf = io.StringIO()
    buf.write(_METRIC_NOTE + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(BENCH_CSV_COLUMNS)
    for r in records:
        w.writerow([r.order, r.n, r.samples, repr(r.mean_digits), repr(r.median_digits), repr(r.min_digits),
                    repr(r.mean_time), r.skipped])
    text = buf.getvalue()
    if out is not None:
        out.write(text)
    return text


def config_to_dict(cfg: BenchConfig) -> dict:
    d = asdict(cfg)
    d["n_values"] = list(cfg.n_values)
    d["orders"] = list(cfg.orders)
    return d
