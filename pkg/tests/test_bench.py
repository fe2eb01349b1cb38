import csv
import io
import math

import numpy as np
import pytest

from su2pulse.bench import (
    BENCH_CSV_COLUMNS,
    BenchConfig,
    digits_of_precision,
    draw_sample,
    run_benchmark,
    write_bench_csv,
)


@pytest.mark.parametrize(
    "dev, expected",
    [(0.0, 15.0), (1e-5, 5.0), (0.5, -math.log10(0.5)), (2.0, 0.0), (1e-20, 15.0)],
)
def test_digits_of_precision(dev, expected):
    U = np.eye(2, dtype=complex)
    V = U.copy()
    V[0, 1] += dev
    assert digits_of_precision(V, U) == pytest.approx(expected, abs=1e-12)


def test_digits_half_is_point_three():
    assert round(digits_of_precision(np.eye(2) * 1.5, np.eye(2)), 2) == 0.30


def test_draw_sample_stream_is_per_index():
    assert draw_sample(7, 3, 5.0) == draw_sample(7, 3, 5.0)
    assert draw_sample(7, 3, 5.0) != draw_sample(7, 4, 5.0)
    J, A = draw_sample(7, 3, 2.0)
    assert abs(J) <= 2.0 and abs(A) <= 2.0


def test_config_validation():
    for bad in ({"samples": 0}, {"n_values": ()}, {"n_values": (10, 0)}, {"param_range": 0.0},
                {"orders": ("cubic",)}, {"seed": -1}):
        with pytest.raises(ValueError):
            BenchConfig(**bad)


@pytest.fixture(scope="module")
def small_run():
    return run_benchmark(BenchConfig(samples=40, n_values=(100, 200, 400, 800), seed=11))


def test_determinism_across_runs_and_threads(small_run):
    again = run_benchmark(small_run.config, threads=4)
    for order in small_run.config.orders:
        for n in small_run.config.n_values:
            np.testing.assert_array_equal(small_run.digits[order][n], again.digits[order][n])
    strip = lambda rs: [(r.order, r.n, r.mean_digits, r.median_digits, r.min_digits, r.samples) for r in rs]
    assert strip(small_run.records) == strip(again.records)


@pytest.mark.parametrize("order, gain", [("linear", math.log10(2)), ("quadratic", 2 * math.log10(2))])
def test_doubling_n_adds_digits(small_run, order, gain):
    means = [small_run.record(order, n).mean_digits for n in small_run.config.n_values]
    assert np.allclose(np.diff(means), gain, atol=0.05)


def test_monotone_in_n(small_run):
    for order in small_run.config.orders:
        means = [small_run.record(order, n).mean_digits for n in small_run.config.n_values]
        assert all(b >= a - 0.1 for a, b in zip(means, means[1:]))


def test_quadratic_beats_linear(small_run):
    for n in small_run.config.n_values:
        assert small_run.record("quadratic", n).mean_digits > small_run.record("linear", n).mean_digits + 1


def test_records_are_finite_and_capped(small_run):
    assert small_run.skipped == 0
    for r in small_run.records:
        assert 0 <= r.min_digits <= r.median_digits <= 15 and 0 <= r.mean_digits <= 15
        assert r.mean_time > 0 and r.samples == 40


def test_bench_csv_layout(small_run):
    text = write_bench_csv(small_run.records)
    lines = text.splitlines()
    assert lines[0].startswith("#")
    rows = list(csv.reader(io.StringIO("\n".join(lines[1:]))))
    assert tuple(rows[0]) == BENCH_CSV_COLUMNS
    assert len(rows) == 1 + len(small_run.records)
    assert float(rows[1][3]) == small_run.records[0].mean_digits


def test_missing_record_raises(small_run):
    with pytest.raises(KeyError):
        small_run.record("linear", 12345)
