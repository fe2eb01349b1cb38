"""Stepped propagators for one SU(2) block over the window t in [0, 1].

The block generator is L(t) = Jeff sigma_3 + b(t) sigma_q with
b(t) = field_scale * envelope(t). One step from t0 to t0 + dt is

    linear:     1 + i L dt
    quadratic:  1 + i L dt - 1/2 Q dt^2,  Q = (Jeff^2 + b^2) 1 - i b' sigma_q

with the field sampled at the left endpoint t0. The n steps of a uniform
partition are stacked on the left; the U(1) factor exp(i s0 J0) is applied
once at the end when requested.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import fields
from .fields import FieldProfile
from .model import BlockParams
from .su2 import SIGMA, polar_unitary, sigma_q

__all__ = [
    "StepOrder",
    "EvolutionSpec",
    "ConvergenceError",
    "step",
    "evolve",
    "evolve_effective",
    "ordered_product",
    "exact_constant",
    "exact_commuting",
    "exact_stepwise",
    "reference",
    "reference_effective",
    "richardson_limit",
]

REFERENCE_N0 = 10_000
REFERENCE_MAX_N = 2**20
# at most _BATCH_PIECE x _TIME_BLOCK step matrices are materialized at once
_TIME_BLOCK = 4096
_BATCH_PIECE = 256


class StepOrder(str, Enum):
    LINEAR = "linear"
    QUADRATIC = "quadratic"


class ConvergenceError(RuntimeError):
    pass


@dataclass(frozen=True)
class EvolutionSpec:
    block: BlockParams
    field: FieldProfile
    n: int = 100
    order: StepOrder = StepOrder.QUADRATIC
    attach_global_phase: bool = False
    unitarize: bool = False

    def __post_init__(self) -> None:
        if isinstance(self.n, bool) or not isinstance(self.n, (int, np.integer)) or self.n < 1:
            raise ValueError(f"partition count n must be a positive integer, got {self.n!r}")
        object.__setattr__(self, "order", StepOrder(self.order))


def _step_stack(Jeff, b, db, dt: float, q: int, order: StepOrder) -> np.ndarray:
    """Step matrices for broadcast arrays of (Jeff, b, b'); shape (..., 2, 2)."""
    Jeff, b, db = np.broadcast_arrays(*(np.asarray(x, dtype=float) for x in (Jeff, b, db)))
    out = np.empty(Jeff.shape + (2, 2), dtype=complex)
    if order is StepOrder.QUADRATIC:
        c = 1.0 - 0.5 * dt * dt * (Jeff * Jeff + b * b)
        w = 1j * (dt * b + 0.5 * dt * dt * db)
    else:
        c = np.ones_like(Jeff)
        w = 1j * dt * b
    out[..., 0, 0] = c + 1j * dt * Jeff
    out[..., 1, 1] = c - 1j * dt * Jeff
    sq = sigma_q(q)
    out[..., 0, 1] = w * sq[0, 1]
    out[..., 1, 0] = w * sq[1, 0]
    return out


def ordered_product(mats: np.ndarray) -> np.ndarray:
    """Left-stacked product M[-1] ... M[1] M[0] over axis -3, by pairwise reduction."""
    M = np.asarray(mats)
    while M.shape[-3] > 1:
        if M.shape[-3] % 2:
            tail = M[..., -1:, :, :]
            M = np.concatenate([np.matmul(M[..., 1:-1:2, :, :], M[..., 0:-1:2, :, :]), tail], axis=-3)
        else:
            M = np.matmul(M[..., 1::2, :, :], M[..., 0::2, :, :])
    return M[..., 0, :, :]


def step(block: BlockParams, field: FieldProfile, t0: float, dt: float, order=StepOrder.QUADRATIC) -> np.ndarray:
    order = StepOrder(order)
    if not dt > 0:
        raise ValueError("step length must be positive")
    if t0 < 0 or t0 + dt > 1.0 + 1e-12:
        raise ValueError(f"step [{t0}, {t0 + dt}] leaves the window [0, 1]")
    b = block.field_scale * fields.value(field, t0)
    db = block.field_scale * fields.derivative(field, t0) if order is StepOrder.QUADRATIC else 0.0
    return _step_stack(block.Jeff, b, db, dt, block.q, order)


def _evolve_arrays(Jeff, field_scale, field: FieldProfile, q: int, n: int, order: StepOrder) -> np.ndarray:
    """Ordered product for broadcast parameter arrays; returns shape (*P, 2, 2).

    Steps are reduced pairwise inside fixed time blocks and the blocks are
    chained sequentially, so each entry's rounding does not depend on how many
    other parameter points share the call.
    """
    Jeff, scale = np.broadcast_arrays(np.asarray(Jeff, dtype=float), np.asarray(field_scale, dtype=float))
    shape = Jeff.shape
    Jeff, scale = Jeff.ravel(), scale.ravel()
    U = np.empty((Jeff.size, 2, 2), dtype=complex)
    for lo in range(0, Jeff.size, _BATCH_PIECE):
        sl = slice(lo, lo + _BATCH_PIECE)
        U[sl] = _evolve_piece(Jeff[sl], scale[sl], field, q, n, order)
    return U.reshape(shape + (2, 2))


def _evolve_piece(Jeff, scale, field, q, n, order) -> np.ndarray:
    dt = 1.0 / n
    U = np.broadcast_to(SIGMA[0], Jeff.shape + (2, 2)).copy()
    Jx = Jeff[:, None]
    sx = scale[:, None]
    for start in range(0, n, _TIME_BLOCK):
        t = np.arange(start, min(n, start + _TIME_BLOCK)) * dt
        b = sx * fields.value(field, t)
        db = sx * fields.derivative(field, t) if order is StepOrder.QUADRATIC else 0.0
        U = ordered_product(_step_stack(Jx, b, db, dt, q, order)) @ U
    return U


def _phase(block: BlockParams) -> complex:
    return np.exp(1j * block.s0 * block.J0)


def evolve(spec: EvolutionSpec) -> np.ndarray:
    U = _evolve_arrays(spec.block.Jeff, spec.block.field_scale, spec.field, spec.block.q, spec.n, spec.order)
    if spec.unitarize:
        U = polar_unitary(U)
    if spec.attach_global_phase:
        U = _phase(spec.block) * U
    return U


def evolve_effective(Jeff, amplitude, q: int, n: int, order=StepOrder.QUADRATIC, kind: str = "half-sine", m: int = 1) -> np.ndarray:
    """Batched evolution for arrays of effective (Jeff, amplitude) pairs with a unit-envelope field."""
    envelope = FieldProfile(kind, 1.0, m=m)
    return _evolve_arrays(Jeff, amplitude, envelope, q, n, StepOrder(order))


def exact_constant(block: BlockParams, b_value: float, t: float = 1.0) -> np.ndarray:
    """exp(i (Jeff sigma_3 + b sigma_q) t) in closed form."""
    omega = math.hypot(block.Jeff, b_value)
    if omega == 0.0:
        return SIGMA[0].copy()
    gen = block.Jeff * SIGMA[3] + b_value * sigma_q(block.q)
    return math.cos(omega * t) * SIGMA[0] + 1j * (math.sin(omega * t) / omega) * gen


def exact_commuting(block: BlockParams, field: FieldProfile) -> np.ndarray:
    """Closed form when Jeff = 0: only sigma_q survives and the generator commutes with itself."""
    if block.Jeff != 0.0:
        raise ValueError("exact_commuting requires Jeff == 0")
    Phi = block.field_scale * fields.integral(field, 0.0, 1.0)
    return math.cos(Phi) * SIGMA[0] + 1j * math.sin(Phi) * sigma_q(block.q)


def exact_stepwise(block: BlockParams, field: FieldProfile) -> np.ndarray:
    """Product of constant-field exponentials over the intervals of a stepwise or constant profile."""
    if field.kind == "constant":
        return exact_constant(block, block.field_scale * field.amplitude, 1.0)
    if field.kind != "stepwise":
        raise ValueError("exact_stepwise needs a constant or stepwise profile")
    edges = [0.0, *field.breakpoints, 1.0]
    U = SIGMA[0].copy()
    for lo, hi, v in zip(edges, edges[1:], field.values):
        U = exact_constant(block, block.field_scale * field.amplitude * v, hi - lo) @ U
    return U


def richardson_limit(evolve_at, tol: float, n0: int = REFERENCE_N0, max_n: int = REFERENCE_MAX_N) -> np.ndarray:
    """Extrapolate ``evolve_at(n)`` to n -> infinity over n0, 2 n0, 4 n0, ...

    The stepped product has a global error expansion in powers dt^2, dt^3, ...,
    so column m of the table is accurate to O(dt^(m+2)). Stops once successive
    diagonal entries agree entrywise to better than tol / 10.
    """
    rows: list[list[np.ndarray]] = []
    n = n0
    last = None
    while n <= max_n:
        row = [np.asarray(evolve_at(n))]
        for m, prev in enumerate(rows[-1] if rows else []):
            factor = 2.0 ** (m + 2) - 1.0
            row.append(row[m] + (row[m] - prev) / factor)
        rows.append(row)
        best = row[-1]
        if last is not None and np.abs(best - last).max() < tol / 10:
            return best
        last = best
        n *= 2
    raise ConvergenceError(f"reference did not reach tol {tol:g} with n <= {max_n}")


def reference(block: BlockParams, field: FieldProfile, tol: float = 1e-10, attach_global_phase: bool = False) -> np.ndarray:
    """High-accuracy propagator, projected onto the unitary group."""
    if field.kind == "stepwise":
        # the expansion behind the extrapolation assumes a smooth field
        U = exact_stepwise(block, field)
    else:
        U = richardson_limit(
            lambda n: _evolve_arrays(block.Jeff, block.field_scale, field, block.q, n, StepOrder.QUADRATIC),
            tol,
        )
    U = polar_unitary(U)
    if attach_global_phase:
        U = _phase(block) * U
    return U


def reference_effective(Jeff, amplitude, q: int, tol: float = 1e-10, kind: str = "half-sine") -> np.ndarray:
    """Batched :func:`reference` for arrays of effective (Jeff, amplitude) pairs."""
    envelope = FieldProfile(kind, 1.0)
    U = richardson_limit(lambda n: _evolve_arrays(Jeff, amplitude, envelope, q, n, StepOrder.QUADRATIC), tol)
    return polar_unitary(U)
