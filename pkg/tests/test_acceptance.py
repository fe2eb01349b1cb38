"""Acceptance criteria, each at its stated tolerance and runtime budget.

Every test prints one PASS/FAIL line (repeated in the terminal summary) and
then asserts the same condition, so a failing criterion fails the suite.
"""

import math
import time

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from su2pulse.bench import BenchConfig, run_benchmark
from su2pulse.model import ModelParams, verify_block_equivalence
from su2pulse.propagator import evolve_effective, reference_effective
from su2pulse.su2 import GateForm, reconstruct_gate_form, extract_gate_form, wrap_angle
from su2pulse.synthesis import ScanConfig, amplitude_at, scan_plane

pytestmark = pytest.mark.slow


def report(number, name, passed, detail):
    line = f"[{'PASS' if passed else 'FAIL'}] #{number} {name}: {detail}"
    print(line)
    ACCEPTANCE_LINES.append(line)
    assert passed, line


@pytest.fixture(scope="module")
def bench():
    cfg = BenchConfig(samples=1000, n_values=(10, 100, 1000, 10000))
    t0 = time.perf_counter()
    res = run_benchmark(cfg)
    return res, time.perf_counter() - t0


def test_01_block_structure():
    rng = np.random.default_rng(101)
    t0 = time.perf_counter()
    leak = dev = 0.0
    for h in (1, 2, 3):
        for _ in range(1000):
            J1, J2, J3, B1, B2 = rng.uniform(-5, 5, 5)
            rep = verify_block_equivalence(ModelParams(h, (J1, J2, J3), B1, B2))
            leak, dev = max(leak, rep.max_leakage), max(dev, rep.max_deviation)
    elapsed = time.perf_counter() - t0
    ok = leak <= 1e-12 and dev <= 1e-10 and elapsed <= 30
    report(1, "block structure", ok, f"leakage {leak:.2e} (<=1e-12), deviation {dev:.2e} (<=1e-10), {elapsed:.1f}s (<=30s)")


def test_02_convergence_orders():
    rng = np.random.default_rng(202)
    J, A = rng.uniform(-5, 5, (2, 100))
    t0 = time.perf_counter()
    R = reference_effective(J, A, 1, 1e-10)
    ns = np.array([100, 1000, 10000])
    slopes = {}
    for order, expected in (("linear", -1.0), ("quadratic", -2.0)):
        errs = np.array([np.abs(evolve_effective(J, A, 1, int(n), order) - R).max(axis=(1, 2)) for n in ns])
        s = np.polyfit(np.log10(ns), np.log10(errs), 1)[0]
        slopes[order] = (s, expected)
    elapsed = time.perf_counter() - t0
    worst = {o: float(np.abs(s - e).max()) for o, (s, e) in slopes.items()}
    ok = all(w <= 0.15 for w in worst.values()) and elapsed <= 120
    detail = ", ".join(
        f"{o} slopes in [{s.min():.3f}, {s.max():.3f}] (target {e:+.0f}+-0.15)" for o, (s, e) in slopes.items()
    )
    report(2, "convergence orders", ok, f"{detail}, {elapsed:.1f}s (<=120s)")


def test_03_precision_at_n100(bench):
    res, elapsed = bench
    r = res.record("quadratic", 100)
    ok = r.mean_digits >= 5.0 and r.median_digits >= 4.5 and res.skipped == 0 and elapsed <= 300
    report(3, "quadratic precision at n=100", ok,
           f"mean p {r.mean_digits:.3f} (>=5.0), median p {r.median_digits:.3f} (>=4.5), "
           f"skipped {res.skipped}, {elapsed:.1f}s (<=300s)")


def test_04_improvement_over_linear(bench):
    res, _ = bench
    gains = {n: res.record("quadratic", n).mean_digits - res.record("linear", n).mean_digits for n in (100, 1000)}
    ok = all(g >= 1.0 for g in gains.values())
    report(4, "quadratic minus linear digits", ok, ", ".join(f"n={n}: {g:.3f} (>=1.0)" for n, g in gains.items()))


def test_05_synthesis_anchors():
    cfg = ScanConfig(0.0)
    t0 = time.perf_counter()
    a_zero = amplitude_at(math.pi**2 / 4, 0.0, cfg).A
    diag = [(J, amplitude_at(0.0, J, cfg)) for J in (0.5, 1.0, 2.0)]
    elapsed = time.perf_counter() - t0
    a_min = min(g.A for _, g in diag)
    phi_err = max(abs(wrap_angle(g.phi - J)) for J, g in diag)
    ok = a_zero <= 1e-4 and a_min >= 1 - 1e-6 and phi_err <= 1e-4 and elapsed <= 5
    report(5, "synthesis anchors", ok,
           f"A(pi^2/4, 0) {a_zero:.2e} (<=1e-4), min A(0, J) 1-{1 - a_min:.1e} (>=1-1e-6), "
           f"phi error {phi_err:.2e} (<=1e-4), n={cfg.n}, {elapsed:.2f}s (<=5s)")


def test_06_gate_form_roundtrip():
    rng = np.random.default_rng(606)
    t0 = time.perf_counter()
    worst = 0.0
    for _ in range(10_000):
        alpha = rng.uniform(0, math.pi / 2)
        varphi, phi, theta = rng.uniform(-math.pi, math.pi, 3)
        g = GateForm.make(varphi, math.cos(alpha), math.sin(alpha), phi, theta)
        U = reconstruct_gate_form(g)
        worst = max(worst, float(np.abs(reconstruct_gate_form(extract_gate_form(U)) - U).max()))
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-11 and elapsed <= 5
    report(6, "gate-form roundtrip", ok, f"max deviation {worst:.2e} (<=1e-11), {elapsed:.2f}s (<=5s)")


def test_07_scan_integrity():
    t0 = time.perf_counter()
    results = {t: scan_plane(ScanConfig(t)) for t in (0.0, 0.5, 1.0)}
    elapsed = time.perf_counter() - t0
    residual = max(p.residual for r in results.values() for p in r.points)
    axis = {round(p.J, 9) for p in results[1.0].points if abs(p.ampl) <= 1e-12}
    has_axis = axis == {round(J, 9) for J in np.linspace(-5, 5, 101)}
    zero = results[0.0]
    c = zero.curve_near(math.pi**2 / 4, 0.0)
    near = min(math.hypot(p.ampl - math.pi**2 / 4, p.J) for p in zero.curves()[c])
    theta_std = zero.theta_std[c]
    flagged = sum(s > 0.05 for r in results.values() for s in r.theta_std.values())
    ok = residual <= 1e-4 and has_axis and near <= 1e-3 and theta_std <= 0.05 and elapsed <= 600
    report(7, "scan integrity", ok,
           f"max reference residual {residual:.2e} (<=1e-4), A=1 contains ampl=0 axis: {has_axis}, "
           f"theta std on A=0 curve at (pi^2/4, 0) {theta_std:.2e} (<=0.05, {len(zero.curves()[c])} pt), "
           f"curves flagged {flagged}, {elapsed:.1f}s (<=600s)")


def _n_for_digits(res, order, p):
    ns = np.array(res.config.n_values, dtype=float)
    means = np.array([res.record(order, int(n)).mean_digits for n in ns])
    return 10 ** np.interp(p, means, np.log10(ns))


def test_08_cost_and_partition_savings(bench):
    res, _ = bench
    ratios = {n: res.record("quadratic", n).mean_time / res.record("linear", n).mean_time for n in res.config.n_values}
    savings = {}
    for n in (1000, 10000):
        p = res.record("linear", n).mean_digits
        savings[n] = n / _n_for_digits(res, "quadratic", p)
    ok = all(r <= 3.0 for r in ratios.values()) and all(s >= 10 for s in savings.values())
    report(8, "per-step cost and partition savings", ok,
           "cost ratio " + ", ".join(f"n={n}: {r:.2f}" for n, r in ratios.items()) + " (<=3), "
           + "n_linear/n_quadratic at equal p " + ", ".join(f"n={n}: {s:.1f}" for n, s in savings.items()) + " (>=10)")
