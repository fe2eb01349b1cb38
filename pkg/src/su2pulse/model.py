"""Two-qubit Heisenberg-Ising Hamiltonian with a field along a fixed axis h.

    H_h = sum_k J_k sigma_k (x) sigma_k - B1 sigma_h (x) 1 - B2 1 (x) sigma_h

In a suitably ordered Bell basis H_h splits into two 2x2 blocks (k = 1, 2),

    H_k = -s0 J_h sigma_0 + s1 J_{h,s0} sigma_3 + s2 B_{h,-s0} sigma_q,

with J_{h,+-} = J_a +- J_b ({a, b} = {1, 2, 3} minus h, ascending) and
B_{h,+-} = B1 +- B2. hbar = 1 throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .su2 import SIGMA, sigma_q

__all__ = [
    "ModelParams",
    "SignSet",
    "BlockParams",
    "sign_factors",
    "build_full_hamiltonian",
    "bell_basis",
    "block_params",
    "block_hamiltonian",
    "extract_blocks",
    "verify_block_equivalence",
    "BlockReport",
    "effective_to_model",
]

_R = 1.0 / math.sqrt(2.0)
BELL_STATES = {
    "phi+": np.array([1, 0, 0, 1], dtype=complex) * _R,
    "phi-": np.array([1, 0, 0, -1], dtype=complex) * _R,
    "psi+": np.array([0, 1, 1, 0], dtype=complex) * _R,
    "psi-": np.array([0, 1, -1, 0], dtype=complex) * _R,
}

# Column order and signs per field direction; columns 0-1 span block k=1, 2-3 block k=2.
# Found by exhaustive search over Bell orderings and column phases against
# verify_block_equivalence; the real-sign solution with +phi+ first is kept.
BELL_TABLE: dict[int, tuple[tuple[str, int], ...]] = {
    1: (("phi+", 1), ("psi+", 1), ("phi-", 1), ("psi-", -1)),
    2: (("phi+", 1), ("psi-", -1), ("phi-", 1), ("psi+", -1)),
    3: (("phi+", 1), ("phi-", 1), ("psi+", 1), ("psi-", -1)),
}


def _check_h(h: int) -> None:
    if h not in (1, 2, 3):
        raise ValueError(f"field direction h must be 1, 2 or 3, got {h!r}")


def _check_k(k: int) -> None:
    if k not in (1, 2):
        raise ValueError(f"block index k must be 1 or 2, got {k!r}")


@dataclass(frozen=True)
class ModelParams:
    h: int
    J: tuple[float, float, float]
    B1: float = 0.0
    B2: float = 0.0

    def __post_init__(self) -> None:
        _check_h(self.h)
        J = tuple(float(x) for x in self.J)
        if len(J) != 3:
            raise ValueError("J needs exactly three exchange strengths")
        object.__setattr__(self, "J", J)
        object.__setattr__(self, "B1", float(self.B1))
        object.__setattr__(self, "B2", float(self.B2))
        if not all(math.isfinite(x) for x in (*J, self.B1, self.B2)):
            raise ValueError("model parameters must be finite")


@dataclass(frozen=True)
class SignSet:
    s0: int
    s1: int
    s2: int
    p: int
    q: int


def sign_factors(h: int, k: int) -> SignSet:
    _check_h(h)
    _check_k(k)
    s0 = (-1) ** (h + k + 1)
    p = 1 + (h - 1) * (h - 2) // 2
    q = 2 - h % 2
    s1 = s0**p
    s2 = (-1) ** p * s0 ** (p + q)
    return SignSet(s0, s1, s2, p, q)


@dataclass(frozen=True)
class BlockParams:
    """Reduced coefficients of one SU(2) block.

    The effective field entering the block is ``field_scale * envelope(t)``;
    ``field_scale`` already carries the -s2 sign.
    """

    J0: float
    Jeff: float
    field_scale: float
    q: int
    k: int = 1
    signs: SignSet | None = field(default=None, compare=False)

    def __post_init__(self) -> None:
        if self.q not in (1, 2):
            raise ValueError(f"q must be 1 or 2, got {self.q!r}")
        _check_k(self.k)
        if self.signs is not None and self.signs.q != self.q:
            raise ValueError("q does not match the sign set")
        if not all(math.isfinite(x) for x in (self.J0, self.Jeff, self.field_scale)):
            raise ValueError("block parameters must be finite")

    @property
    def s0(self) -> int:
        """Sign of the U(1) phase rate; defaults to +1 for blocks built from effective values."""
        return self.signs.s0 if self.signs is not None else 1

    @property
    def field_sign(self) -> int:
        return -self.signs.s2 if self.signs is not None else 1

    @classmethod
    def effective(cls, Jeff: float, field_scale: float = 1.0, q: int = 1, J0: float = 0.0) -> BlockParams:
        """Block defined directly by its effective coefficients."""
        return cls(J0=J0, Jeff=Jeff, field_scale=field_scale, q=q)


def _kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.kron(a, b)


def build_full_hamiltonian(m: ModelParams, envelope: float = 1.0) -> np.ndarray:
    """4x4 Hamiltonian in the computational basis; fields scaled by ``envelope``."""
    H = np.zeros((4, 4), dtype=complex)
    for k in range(3):
        H += m.J[k] * _kron(SIGMA[k + 1], SIGMA[k + 1])
    sh = SIGMA[m.h]
    H -= envelope * m.B1 * _kron(sh, SIGMA[0])
    H -= envelope * m.B2 * _kron(SIGMA[0], sh)
    return H


def bell_basis(h: int) -> np.ndarray:
    _check_h(h)
    return np.column_stack([sign * BELL_STATES[name] for name, sign in BELL_TABLE[h]])


def _pair_sums(m: ModelParams, s0: int) -> tuple[float, float]:
    a, b = (i for i in (1, 2, 3) if i != m.h)
    J_pair = m.J[a - 1] + s0 * m.J[b - 1]
    B_pair = m.B1 - s0 * m.B2
    return J_pair, B_pair


def block_params(m: ModelParams, k: int, signs: SignSet | None = None) -> BlockParams:
    """Effective coefficients of block k; ``signs`` overrides the sign table (testing only)."""
    sg = signs if signs is not None else sign_factors(m.h, k)
    J_pair, B_pair = _pair_sums(m, sg.s0)
    return BlockParams(
        J0=m.J[m.h - 1],
        Jeff=-sg.s1 * J_pair,
        field_scale=-sg.s2 * B_pair,
        q=sg.q,
        k=k,
        signs=sg,
    )


def block_hamiltonian(bp: BlockParams, envelope: float = 1.0) -> np.ndarray:
    """Full 2x2 block including the U(1) part: -s0 J0 sigma_0 - Jeff sigma_3 - field sigma_q."""
    return -bp.s0 * bp.J0 * SIGMA[0] - bp.Jeff * SIGMA[3] - envelope * bp.field_scale * sigma_q(bp.q)


def extract_blocks(m: ModelParams, envelope: float = 1.0) -> tuple[np.ndarray, np.ndarray, float]:
    """Bell-transform H and return (block 1, block 2, max off-block magnitude)."""
    V = bell_basis(m.h)
    T = V.conj().T @ build_full_hamiltonian(m, envelope) @ V
    leak = max(np.abs(T[:2, 2:]).max(), np.abs(T[2:, :2]).max())
    return T[:2, :2], T[2:, 2:], float(leak)


@dataclass
class BlockReport:
    max_deviation: float
    max_leakage: float
    tol: float
    deviation_by_block: dict[int, float]

    @property
    def passed(self) -> bool:
        return self.max_deviation <= self.tol and self.max_leakage <= self.tol


def verify_block_equivalence(
    m: ModelParams,
    tol: float = 1e-10,
    sign_table: Callable[[int, int], SignSet] = sign_factors,
) -> BlockReport:
    """Compare Bell-extracted blocks with blocks rebuilt from :func:`block_params`."""
    blocks = extract_blocks(m)
    dev = {}
    for k in (1, 2):
        bp = block_params(m, k, signs=sign_table(m.h, k))
        dev[k] = float(np.abs(blocks[k - 1] - block_hamiltonian(bp)).max())
    return BlockReport(max(dev.values()), blocks[2], tol, dev)


def effective_to_model(h: int, k: int, Jeff: float, field_scale: float, J0: float = 0.0) -> ModelParams:
    """One raw parameter set whose block k has the given effective coefficients.

    Only J_a and B1 are used besides J_h, so the other block is generally different.
    """
    sg = sign_factors(h, k)
    a = min(i for i in (1, 2, 3) if i != h)
    J = [0.0, 0.0, 0.0]
    J[h - 1] = J0
    J[a - 1] = -sg.s1 * Jeff
    return ModelParams(h=h, J=tuple(J), B1=-sg.s2 * field_scale, B2=0.0)
