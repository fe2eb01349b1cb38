"""Search the (amplitude, coupling) plane for half-sine pulses realizing a gate amplitude.

Scan coordinates are the effective block-level pair: ``ampl`` is the
half-sine amplitude of the field entering the block and ``J`` its sigma_3
coefficient. For each point the evolved block is projected onto U(2) and
reduced to gate form (varphi, A, B, phi, theta).
"""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .propagator import StepOrder, evolve_effective, reference_effective
from .su2 import GateForm, extract_gate_form, gate_components, polar_unitary, wrap_angle

__all__ = [
    "ScanConfig",
    "ContourPoint",
    "ScanResult",
    "SolveResult",
    "TargetNotFound",
    "amplitude_at",
    "scan_plane",
    "solve_for_target",
    "theta_spread",
    "write_scan_csv",
    "SCAN_CSV_COLUMNS",
]

SCAN_CSV_COLUMNS = ("target_A", "q", "ampl", "J", "A", "B", "phi", "theta", "varphi", "residual")
_BISECT_MAX_ITER = 60


class TargetNotFound(RuntimeError):
    def __init__(self, message: str, diagnostics: dict):
        super().__init__(f"{message}; diagnostics: {diagnostics}")
        self.diagnostics = diagnostics


@dataclass(frozen=True)
class ScanConfig:
    target_a: float
    q: int = 1
    # (ampl_min, ampl_max, J_min, J_max)
    region: tuple[float, float, float, float] = (-5.0, 5.0, -5.0, 5.0)
    resolution: int = 101
    n: int = 1000
    order: StepOrder = StepOrder.QUADRATIC
    root_tol: float = 1e-6
    recheck: bool = True
    reference_tol: float = 1e-9

    def __post_init__(self) -> None:
        if not 0.0 <= self.target_a <= 1.0:
            raise ValueError(f"target amplitude must lie in [0, 1], got {self.target_a}")
        if self.q not in (1, 2):
            raise ValueError(f"q must be 1 or 2, got {self.q!r}")
        a0, a1, j0, j1 = self.region
        if not (a0 < a1 and j0 < j1):
            raise ValueError(f"degenerate scan region {self.region}")
        if self.resolution < 2:
            raise ValueError("grid resolution must be at least 2")
        if self.n < 1:
            raise ValueError("partition count n must be positive")
        object.__setattr__(self, "order", StepOrder(self.order))
        object.__setattr__(self, "region", tuple(float(x) for x in self.region))

    @property
    def cell(self) -> tuple[float, float]:
        a0, a1, j0, j1 = self.region
        return (a1 - a0) / (self.resolution - 1), (j1 - j0) / (self.resolution - 1)

    def contains(self, ampl: float, J: float) -> bool:
        a0, a1, j0, j1 = self.region
        return a0 <= ampl <= a1 and j0 <= J <= j1


@dataclass(frozen=True)
class ContourPoint:
    ampl: float
    J: float
    gate: GateForm
    target_a: float
    q: int
    residual: float = math.nan
    curve: int = -1


@dataclass
class ScanResult:
    config: ScanConfig
    points: list[ContourPoint]
    # circular spread of theta along each chained polyline, keyed by curve index
    theta_std: dict[int, float] = field(default_factory=dict)

    def curves(self) -> dict[int, list[ContourPoint]]:
        out: dict[int, list[ContourPoint]] = {}
        for p in self.points:
            out.setdefault(p.curve, []).append(p)
        return out

    def curve_near(self, ampl: float, J: float) -> int | None:
        if not self.points:
            return None
        d = [math.hypot(p.ampl - ampl, p.J - J) for p in self.points]
        return self.points[int(np.argmin(d))].curve


@dataclass
class SolveResult:
    point: ContourPoint
    amplitude_residual: float
    phase_residual: float
    iterations: int


def _unitary(ampl, J, cfg: ScanConfig) -> np.ndarray:
    return polar_unitary(evolve_effective(J, ampl, cfg.q, cfg.n, cfg.order))


def _amplitudes(U: np.ndarray):
    _, a, b = gate_components(U)
    A = np.abs(a) / np.hypot(np.abs(a), np.abs(b))
    return A, a, b


def amplitude_at(ampl: float, J: float, cfg: ScanConfig) -> GateForm:
    """Gate form of the block evolved under a half-sine pulse of amplitude ``ampl``."""
    if not (math.isfinite(ampl) and math.isfinite(J)):
        raise ValueError("pulse parameters must be finite")
    return extract_gate_form(_unitary(ampl, J, cfg))


def _signed_functions(target: float, tol: float):
    """Functions whose sign changes bracket the A = target level set.

    A = 0 and A = 1 are the extremes of A, so A - target never changes sign
    there; the real and imaginary parts of the vanishing entry are used instead.
    """

    def level(A, a, b):
        return A - target

    funcs = [level]
    if target <= tol:
        funcs += [lambda A, a, b: a.real, lambda A, a, b: a.imag]
    elif target >= 1.0 - tol:
        funcs += [lambda A, a, b: b.real, lambda A, a, b: b.imag]
    return funcs


def _on_target(target: float, A, a, b, tol: float) -> np.ndarray:
    """|A - target| <= tol; at the extremes the vanishing entry itself must be <= tol."""
    if target <= tol:
        return np.abs(a) <= tol
    if target >= 1.0 - tol:
        return np.abs(b) <= tol
    return np.abs(A - target) <= tol


def _bisect(f, lo: np.ndarray, hi: np.ndarray, f_lo: np.ndarray, cfg: ScanConfig, done_tol: float) -> np.ndarray:
    """Vectorized bisection of f along segments lo -> hi (points are (ampl, J) rows)."""
    lo, hi = lo.copy(), hi.copy()
    s_lo = np.sign(f_lo)
    mid = 0.5 * (lo + hi)
    active = np.ones(len(lo), dtype=bool)
    for _ in range(_BISECT_MAX_ITER):
        if not active.any():
            break
        idx = np.flatnonzero(active)
        m = 0.5 * (lo[idx] + hi[idx])
        mid[idx] = m
        A, a, b = _amplitudes(_unitary(m[:, 0], m[:, 1], cfg))
        fm = f(A, a, b)
        same = np.sign(fm) == s_lo[idx]
        lo[idx[same]] = m[same]
        hi[idx[~same]] = m[~same]
        small = (np.abs(fm) <= done_tol) | (np.abs(hi[idx] - lo[idx]).max(axis=1) < 1e-13)
        active[idx[small]] = False
    return mid


def _chain(P: np.ndarray, link: float) -> list[list[int]]:
    """Greedy nearest-neighbour chaining of points into polylines."""
    n = len(P)
    order = np.lexsort((P[:, 0], P[:, 1]))
    unused = np.ones(n, dtype=bool)
    lines = []
    for start in order:
        if not unused[start]:
            continue
        unused[start] = False
        line = [int(start)]
        for grow_front in (False, True):
            while True:
                end = line[0] if grow_front else line[-1]
                cand = np.flatnonzero(unused)
                if cand.size == 0:
                    break
                d = np.hypot(*(P[cand] - P[end]).T)
                k = int(np.argmin(d))
                if d[k] > link:
                    break
                unused[cand[k]] = False
                if grow_front:
                    line.insert(0, int(cand[k]))
                else:
                    line.append(int(cand[k]))
        lines.append(line)
    return lines


def theta_spread(thetas: Iterable[float]) -> float:
    """RMS deviation of angles from their circular mean."""
    th = np.asarray(list(thetas), dtype=float)
    if th.size == 0:
        return math.nan
    mean = np.angle(np.mean(np.exp(1j * th)))
    dev = np.angle(np.exp(1j * (th - mean)))
    return float(np.sqrt(np.mean(dev**2)))


def _grid_unitaries(AA, JJ, cfg: ScanConfig, threads: int) -> np.ndarray:
    if threads <= 1:
        return _unitary(AA, JJ, cfg)
    rows = np.array_split(np.arange(AA.shape[0]), threads)
    with ThreadPoolExecutor(threads) as pool:
        parts = list(pool.map(lambda r: _unitary(AA[r], JJ[r], cfg), rows))
    return np.concatenate(parts, axis=0)


def scan_plane(cfg: ScanConfig, threads: int = 1) -> ScanResult:
    """Locate the A = target level set on a grid, refine crossings, chain into polylines.

    Grid rows may be evaluated on ``threads`` workers; every point is computed
    independently, so the output does not depend on the thread count.
    """
    a0, a1, j0, j1 = cfg.region
    amps = np.linspace(a0, a1, cfg.resolution)
    Js = np.linspace(j0, j1, cfg.resolution)
    AA, JJ = np.meshgrid(amps, Js)
    A, a, b = _amplitudes(_grid_unitaries(AA, JJ, cfg, threads))
    tol = cfg.root_tol

    hit = _on_target(cfg.target_a, A, a, b, tol)
    found = [np.column_stack([AA[hit], JJ[hit]])]
    coords = np.stack([AA, JJ], axis=-1)
    for f in _signed_functions(cfg.target_a, tol):
        F = f(A, a, b)
        brackets = []
        for sl0, sl1 in (
            ((slice(None), slice(None, -1)), (slice(None), slice(1, None))),
            ((slice(None, -1), slice(None)), (slice(1, None), slice(None))),
        ):
            cross = F[sl0] * F[sl1] < 0
            brackets.append((coords[sl0][cross], coords[sl1][cross], F[sl0][cross]))
        lo = np.concatenate([x[0] for x in brackets])
        if len(lo) == 0:
            continue
        hi = np.concatenate([x[1] for x in brackets])
        flo = np.concatenate([x[2] for x in brackets])
        roots = _bisect(f, lo, hi, flo, cfg, tol / 10)
        found.append(roots[_on_target(cfg.target_a, *_amplitudes(_unitary(roots[:, 0], roots[:, 1], cfg)), tol)])

    P = np.concatenate(found)
    if len(P):
        P = np.unique(np.round(P, 12), axis=0)
    if len(P) == 0:
        return ScanResult(cfg, [])

    U = _unitary(P[:, 0], P[:, 1], cfg)
    if cfg.recheck:
        A_ref, _, _ = _amplitudes(reference_effective(P[:, 1], P[:, 0], cfg.q, cfg.reference_tol))
        residual = np.abs(A_ref - cfg.target_a)
    else:
        residual = np.full(len(P), math.nan)

    link = 1.5 * math.hypot(*cfg.cell)
    points: list[ContourPoint] = []
    spread: dict[int, float] = {}
    for c, line in enumerate(_chain(P, link)):
        for i in line:
            g = extract_gate_form(U[i])
            points.append(ContourPoint(float(P[i, 0]), float(P[i, 1]), g, cfg.target_a, cfg.q, float(residual[i]), c))
        spread[c] = theta_spread(points[-1 - k].gate.theta for k in range(len(line)))
    return ScanResult(cfg, points, spread)


def write_scan_csv(points: Sequence[ContourPoint], out=None) -> str:
    """Serialize contour points with round-trip precision; returns the CSV text."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SCAN_CSV_COLUMNS)
    for p in points:
        g = p.gate
        w.writerow(
            [repr(float(p.target_a)), p.q]
            + [repr(float(x)) for x in (p.ampl, p.J, g.A, g.B, g.phi, g.theta, g.varphi, p.residual)]
        )
    text = buf.getvalue()
    if out is not None:
        out.write(text)
    return text


# --- single-point solver ---------------------------------------------------


def _residual_vector(target_a: float, A, a, b, tol: float) -> np.ndarray:
    if target_a <= tol:
        return np.stack([a.real, a.imag], axis=-1)
    if target_a >= 1.0 - tol:
        return np.stack([b.real, b.imag], axis=-1)
    return (A - target_a)[..., None]


def _linearize(p: np.ndarray, target_a: float, cfg: ScanConfig, h: float = 1e-6):
    """Residual, finite-difference Jacobian and gate amplitude at p = (ampl, J)."""
    pts = np.array([p, p + (h, 0), p - (h, 0), p + (0, h), p - (0, h)])
    A, a, b = _amplitudes(_unitary(pts[:, 0], pts[:, 1], cfg))
    r = _residual_vector(target_a, A, a, b, 1e-12)
    jac = np.column_stack([(r[1] - r[2]) / (2 * h), (r[3] - r[4]) / (2 * h)])
    return r[0], jac, float(A[0])


def _correct(p, target_a, cfg, max_step, max_iter=60, a_tol=1e-8):
    """Gauss-Newton with minimum-norm steps back onto the A = target set."""
    for it in range(1, max_iter + 1):
        r, jac, A = _linearize(p, target_a, cfg)
        # at A in {0, 1} the vanishing entry is the sharper test: |A - 1| ~ B^2 / 2
        if float(np.linalg.norm(r)) <= a_tol:
            return p, A, it, jac
        step = -np.linalg.lstsq(jac, r, rcond=1e-10)[0]
        norm = float(np.hypot(*step))
        if norm > max_step:
            step *= max_step / norm
        p = p + step
        if not cfg.contains(*p):
            return p, A, it, None
    return p, A, max_iter, None


def _tangent(jac: np.ndarray) -> np.ndarray | None:
    """Direction along the solution set, or None at an isolated solution."""
    _, s, Vh = np.linalg.svd(jac)
    if jac.shape[0] >= 2 and s[-1] > 1e-6 * s[0]:
        return None
    return Vh[-1].real


def _phase_mismatch(g: GateForm, phi, theta) -> float:
    total = 0.0
    if phi is not None:
        total += wrap_angle(g.phi - phi) ** 2
    if theta is not None:
        total += wrap_angle(g.theta - theta) ** 2
    return math.sqrt(total)


def solve_for_target(
    target_a: float,
    seed: tuple[float, float],
    cfg: ScanConfig,
    phi: float | None = None,
    theta: float | None = None,
    max_distance: float = 1.0,
    max_walk: int = 200,
) -> SolveResult:
    """Refine a seed onto the A = target_a set, then optionally walk it to match phi/theta.

    Away from A in {0, 1} each Gauss-Newton step is the 1-D Newton step along
    the gradient of A. The phase walk is a predictor-corrector continuation
    with steps of one grid cell, followed by step halving around the best point.
    """
    if not 0.0 <= target_a <= 1.0:
        raise ValueError("target amplitude must lie in [0, 1]")
    p0 = np.asarray(seed, dtype=float)
    if not cfg.contains(*p0):
        raise ValueError(f"seed {seed} lies outside the region {cfg.region}")
    h = min(cfg.cell)
    p, A, iters, jac = _correct(p0, target_a, cfg, max_step=h)
    diag = {"seed": tuple(p0), "last_point": tuple(float(x) for x in p), "last_A": A, "iterations": iters}
    if jac is None or not cfg.contains(*p) or math.hypot(*(p - p0)) > max_distance:
        raise TargetNotFound(f"no A={target_a} solution near seed", diag)

    def gate_at(x):
        return extract_gate_form(_unitary(x[0], x[1], cfg))

    best_p, best_g = p, gate_at(p)
    best_m = _phase_mismatch(best_g, phi, theta)
    if (phi is not None or theta is not None) and best_m > 0:
        t0 = _tangent(jac)
        if t0 is not None:
            for sign in (1.0, -1.0):
                q, t = p, sign * t0
                for _ in range(max_walk):
                    q_new, A_new, _, jac_new = _correct(q + h * t, target_a, cfg, max_step=h, max_iter=20)
                    if jac_new is None or not cfg.contains(*q_new):
                        break
                    t_new = _tangent(jac_new)
                    if t_new is None:
                        break
                    t = t_new if t_new @ t >= 0 else -t_new
                    q = q_new
                    g = gate_at(q)
                    m = _phase_mismatch(g, phi, theta)
                    if m < best_m:
                        best_p, best_g, best_m = q, g, m
            # local refinement by step halving along the set
            step_len = h / 2
            while step_len > 1e-9:
                improved = False
                _, jac_b, _ = _linearize(best_p, target_a, cfg)
                t = _tangent(jac_b)
                if t is None:
                    break
                for sign in (1.0, -1.0):
                    q, A_q, _, jac_q = _correct(best_p + sign * step_len * t, target_a, cfg, max_step=h, max_iter=20)
                    if jac_q is None:
                        continue
                    g = gate_at(q)
                    m = _phase_mismatch(g, phi, theta)
                    if m < best_m:
                        best_p, best_g, best_m, improved = q, g, m, True
                        break
                if not improved:
                    step_len /= 2
    _, _, A_best = _linearize(best_p, target_a, cfg)
    point = ContourPoint(float(best_p[0]), float(best_p[1]), best_g, target_a, cfg.q)
    return SolveResult(point, abs(A_best - target_a), best_m, iters)
