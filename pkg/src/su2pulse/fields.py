"""Scalar field envelopes on the dimensionless gate window t in [0, 1].

Three shapes are supported: a constant, a piecewise-constant (stepwise)
profile, and the single-mode half-sine pulse ``amplitude * sin(m pi t)``.
Evaluation is vectorized over ``t``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np
from numpy.typing import ArrayLike

__all__ = [
    "FieldProfile",
    "Scaling",
    "SPEED_OF_LIGHT",
    "constant",
    "stepwise",
    "half_sine",
    "value",
    "derivative",
    "integral",
    "to_dimensionless",
    "from_dimensionless",
    "time_to_dimensionless",
]

SPEED_OF_LIGHT = 299_792_458.0
KINDS = ("constant", "stepwise", "half-sine")


@dataclass(frozen=True)
class FieldProfile:
    kind: str
    amplitude: float = 1.0
    m: int = 1
    breakpoints: tuple[float, ...] = field(default_factory=tuple)
    values: tuple[float, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"unknown field kind {self.kind!r}; expected one of {KINDS}")
        if not math.isfinite(self.amplitude):
            raise ValueError("field amplitude must be finite")
        if self.kind == "half-sine" and (not isinstance(self.m, int) or self.m < 1):
            raise ValueError(f"mode m must be a positive integer, got {self.m!r}")
        if self.kind == "stepwise":
            bp = tuple(float(b) for b in self.breakpoints)
            vals = tuple(float(v) for v in self.values)
            object.__setattr__(self, "breakpoints", bp)
            object.__setattr__(self, "values", vals)
            if len(vals) != len(bp) + 1:
                raise ValueError("stepwise profile needs len(values) == len(breakpoints) + 1")
            if any(not (0.0 < b < 1.0) for b in bp):
                raise ValueError("stepwise breakpoints must lie strictly inside (0, 1)")
            if any(b1 >= b2 for b1, b2 in zip(bp, bp[1:])):
                raise ValueError("stepwise breakpoints must be strictly increasing")
            if not all(math.isfinite(v) for v in vals):
                raise ValueError("stepwise values must be finite")

    def scaled(self, factor: float) -> FieldProfile:
        """Same shape with the amplitude multiplied by ``factor``."""
        return FieldProfile(self.kind, self.amplitude * factor, self.m, self.breakpoints, self.values)

    def to_dict(self) -> dict[str, Any]:
        d: dict[str, Any] = {"kind": self.kind, "amplitude": self.amplitude}
        if self.kind == "half-sine":
            d["m"] = self.m
        if self.kind == "stepwise":
            d["breakpoints"] = list(self.breakpoints)
            d["values"] = list(self.values)
        return d

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> FieldProfile:
        unknown = set(d) - {"kind", "amplitude", "m", "breakpoints", "values"}
        if unknown:
            raise ValueError(f"unknown field keys: {sorted(unknown)}")
        if "kind" not in d:
            raise ValueError("field profile needs a 'kind'")
        return cls(
            kind=d["kind"],
            amplitude=float(d.get("amplitude", 1.0)),
            m=d.get("m", 1),
            breakpoints=tuple(d.get("breakpoints", ())),
            values=tuple(d.get("values", ())),
        )


def constant(amplitude: float) -> FieldProfile:
    return FieldProfile("constant", amplitude)


def stepwise(breakpoints, values, amplitude: float = 1.0) -> FieldProfile:
    return FieldProfile("stepwise", amplitude, breakpoints=tuple(breakpoints), values=tuple(values))


def half_sine(amplitude: float, m: int = 1) -> FieldProfile:
    return FieldProfile("half-sine", amplitude, m=m)


def _check_window(t: np.ndarray) -> None:
    if np.any(~((t >= 0.0) & (t <= 1.0))):
        raise ValueError("time outside the window [0, 1]")


def _scalar_or_array(t_in, out: np.ndarray):
    return float(out) if np.ndim(t_in) == 0 else out


def value(f: FieldProfile, t: ArrayLike):
    """Envelope value at t; stepwise intervals are left-closed."""
    tt = np.asarray(t, dtype=float)
    _check_window(tt)
    if f.kind == "constant":
        out = np.full(tt.shape, f.amplitude)
    elif f.kind == "half-sine":
        out = f.amplitude * np.sin(f.m * np.pi * tt)
    else:
        idx = np.searchsorted(np.asarray(f.breakpoints), tt, side="right")
        out = f.amplitude * np.asarray(f.values)[idx]
    return _scalar_or_array(t, out)


def derivative(f: FieldProfile, t: ArrayLike):
    """Analytic time derivative; undefined (ValueError) at stepwise breakpoints."""
    tt = np.asarray(t, dtype=float)
    _check_window(tt)
    if f.kind == "half-sine":
        out = f.amplitude * f.m * np.pi * np.cos(f.m * np.pi * tt)
    else:
        if f.kind == "stepwise" and np.any(np.isin(tt, f.breakpoints)):
            raise ValueError("derivative of a stepwise field is undefined at a breakpoint")
        out = np.zeros(tt.shape)
    return _scalar_or_array(t, out)


def integral(f: FieldProfile, t0: float, t1: float) -> float:
    """Exact integral of the envelope over [t0, t1]."""
    if not (0.0 <= t0 <= t1 <= 1.0):
        raise ValueError(f"need 0 <= t0 <= t1 <= 1, got [{t0}, {t1}]")
    if f.kind == "constant":
        return f.amplitude * (t1 - t0)
    if f.kind == "half-sine":
        w = f.m * math.pi
        return f.amplitude * (math.cos(w * t0) - math.cos(w * t1)) / w
    edges = [0.0, *f.breakpoints, 1.0]
    total = 0.0
    for lo, hi, v in zip(edges, edges[1:], f.values):
        overlap = min(hi, t1) - max(lo, t0)
        if overlap > 0:
            total += v * overlap
    return f.amplitude * total


@dataclass(frozen=True)
class Scaling:
    """Length ``d``, mode ``m`` and light speed ``c`` used by the t' = (m c / d) t rescaling."""

    d: float
    m: int = 1
    c: float = SPEED_OF_LIGHT

    def __post_init__(self) -> None:
        if not self.d > 0:
            raise ValueError("effective length d must be positive")
        if self.m < 1:
            raise ValueError("mode m must be >= 1")

    @property
    def rate(self) -> float:
        return self.m * self.c / self.d


def to_dimensionless(x: float, s: Scaling) -> float:
    """Physical amplitude or coupling (frequency units) -> dimensionless, x * d / (m c)."""
    return x / s.rate


def from_dimensionless(x: float, s: Scaling) -> float:
    return x * s.rate


def time_to_dimensionless(t: float, s: Scaling) -> float:
    return t * s.rate
