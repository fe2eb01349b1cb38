"""2x2 complex algebra: Pauli basis and the generic single-block gate form.

A gate form is the parameterization

    U = e^{i varphi} [[ A e^{i phi},   B e^{i theta}],
                      [-B e^{-i theta}, A e^{-i phi}]],   A^2 + B^2 = 1

Matrices are plain ``numpy`` arrays of shape (2, 2) and dtype complex.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike

__all__ = [
    "GateForm",
    "SIGMA",
    "pauli",
    "sigma_q",
    "unitarity_defect",
    "reconstruct_gate_form",
    "extract_gate_form",
    "polar_unitary",
    "wrap_angle",
    "gate_components",
]

SIGMA = (
    np.eye(2, dtype=complex),
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)
for _s in SIGMA:
    _s.setflags(write=False)

_NORM_TOL = 1e-12


def pauli(index: int) -> np.ndarray:
    """Return a fresh copy of sigma_index (sigma_0 is the identity)."""
    if index not in (0, 1, 2, 3):
        raise ValueError(f"Pauli index must be 0..3, got {index!r}")
    return SIGMA[index].copy()


def sigma_q(q: int) -> np.ndarray:
    """Field-coupling Pauli matrix: -(q-2) sigma_1 + (q-1) sigma_2."""
    if q not in (1, 2):
        raise ValueError(f"q must be 1 or 2, got {q!r}")
    return -(q - 2) * SIGMA[1] + (q - 1) * SIGMA[2]


def wrap_angle(x: float) -> float:
    """Map an angle to (-pi, pi]."""
    y = math.remainder(x, 2.0 * math.pi)
    if y <= -math.pi:
        y += 2.0 * math.pi
    return y


def unitarity_defect(U: ArrayLike) -> float:
    """Frobenius norm of U^dagger U - I."""
    U = np.asarray(U, dtype=complex)
    n = U.shape[-1]
    return float(np.linalg.norm(U.conj().T @ U - np.eye(n), ord="fro"))


def polar_unitary(U: ArrayLike) -> np.ndarray:
    """Closest unitary to U in Frobenius norm (unitary factor of the polar decomposition).

    Works on stacks of matrices: the last two axes are the matrix axes.
    """
    U = np.asarray(U, dtype=complex)
    W, _, Vh = np.linalg.svd(U)
    return W @ Vh


@dataclass(frozen=True)
class GateForm:
    """Parameters (varphi, A, B, phi, theta) of a U(2) block in gate form."""

    varphi: float
    A: float
    B: float
    phi: float
    theta: float

    def __post_init__(self) -> None:
        vals = (self.varphi, self.A, self.B, self.phi, self.theta)
        if not all(math.isfinite(v) for v in vals):
            raise ValueError(f"non-finite gate parameters: {vals}")
        if self.A < 0 or self.B < 0:
            raise ValueError(f"amplitudes must be non-negative, got A={self.A}, B={self.B}")
        if abs(self.A**2 + self.B**2 - 1.0) > _NORM_TOL:
            raise ValueError(f"A^2 + B^2 = {self.A**2 + self.B**2!r}, expected 1")
        for name in ("varphi", "phi", "theta"):
            v = getattr(self, name)
            if not (-math.pi < v <= math.pi):
                raise ValueError(f"{name}={v} outside (-pi, pi]")

    @classmethod
    def make(cls, varphi: float, A: float, B: float, phi: float, theta: float) -> GateForm:
        """Build a gate form, wrapping angles and normalizing (A, B)."""
        r = math.hypot(A, B)
        if r == 0.0:
            raise ValueError("A and B cannot both vanish")
        return cls(wrap_angle(varphi), float(abs(A) / r), float(abs(B) / r), wrap_angle(phi), wrap_angle(theta))

    def as_tuple(self) -> tuple[float, float, float, float, float]:
        return (self.varphi, self.A, self.B, self.phi, self.theta)


def reconstruct_gate_form(g: GateForm) -> np.ndarray:
    if not isinstance(g, GateForm):
        raise TypeError(f"expected GateForm, got {type(g).__name__}")
    a = g.A * np.exp(1j * g.phi)
    b = g.B * np.exp(1j * g.theta)
    core = np.array([[a, b], [-np.conj(b), np.conj(a)]], dtype=complex)
    return np.exp(1j * g.varphi) * core


def extract_gate_form(U: ArrayLike, tol: float = 1e-10) -> GateForm:
    """Inverse of :func:`reconstruct_gate_form` for a unitary 2x2 matrix.

    The global phase is fixed to half the principal argument of det U, which
    leaves an SU(2) core whose (1,1) and (1,2) entries give (A, phi) and
    (B, theta) directly. A phase whose modulus is below ``tol`` is reported as 0.
    """
    U = np.asarray(U, dtype=complex)
    if U.shape != (2, 2):
        raise ValueError(f"expected a 2x2 matrix, got shape {U.shape}")
    if not np.all(np.isfinite(U)):
        raise ValueError("matrix has non-finite entries")
    defect = unitarity_defect(U)
    if defect > tol:
        raise ValueError(f"matrix is not unitary: defect {defect:.3e} > tol {tol:.3e}")

    varphi = 0.5 * float(np.angle(np.linalg.det(U)))
    if varphi <= -math.pi / 2:
        # np.angle returns -pi for det on the negative real axis; principal Arg is +pi
        varphi += math.pi
    core = U * np.exp(-1j * varphi)
    # average the redundant entries of the SU(2) core to symmetrize rounding
    a = 0.5 * (core[0, 0] + np.conj(core[1, 1]))
    b = 0.5 * (core[0, 1] - np.conj(core[1, 0]))
    A, B = abs(a), abs(b)
    phi = float(np.angle(a)) if A > tol else 0.0
    theta = float(np.angle(b)) if B > tol else 0.0
    return GateForm.make(varphi, A, B, phi, theta)


def gate_components(U: ArrayLike) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorized gauge fixing for a stack of unitaries (..., 2, 2).

    Returns (varphi, a, b) with the SU(2) core entries a = A e^{i phi} and
    b = B e^{i theta}, using the same gauge as :func:`extract_gate_form`.
    """
    U = np.asarray(U, dtype=complex)
    det = U[..., 0, 0] * U[..., 1, 1] - U[..., 0, 1] * U[..., 1, 0]
    varphi = 0.5 * np.angle(det)
    varphi = np.where(varphi <= -np.pi / 2, varphi + np.pi, varphi)
    ph = np.exp(-1j * varphi)
    a = 0.5 * ph * U[..., 0, 0] + 0.5 * np.conj(ph * U[..., 1, 1])
    b = 0.5 * ph * U[..., 0, 1] - 0.5 * np.conj(ph * U[..., 1, 0])
    return varphi, a, b
