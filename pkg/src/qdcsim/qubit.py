"""Qubit states and two-outcome detectors in the Bloch-vector picture.

The Bloch vector is the canonical representation; density matrices are
built on demand (mostly for checks and reporting). Pauli convention is the
standard one with ``sigma_z = diag(1, -1)``, so bit 1 on axis ``(0, 0, 1)``
is ``diag(1, 0)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .errors import EmptyInput, InvalidAxis, InvalidState
from .rng import RngStream

ALGEBRA_TOL = 1e-12
UNIT_TOL = 1e-9

IDENTITY = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULI = (SIGMA_X, SIGMA_Y, SIGMA_Z)


class BlochVector(NamedTuple):
    x: float
    y: float
    z: float

    def dot(self, other: Sequence[float]) -> float:
        return self.x * other[0] + self.y * other[1] + self.z * other[2]

    def cross(self, other: Sequence[float]) -> "BlochVector":
        ox, oy, oz = other
        return BlochVector(self.y * oz - self.z * oy, self.z * ox - self.x * oz, self.x * oy - self.y * ox)

    def norm(self) -> float:
        return math.sqrt(self.x * self.x + self.y * self.y + self.z * self.z)

    def scale(self, k: float) -> "BlochVector":
        return BlochVector(k * self.x, k * self.y, k * self.z)

    def plus(self, other: Sequence[float]) -> "BlochVector":
        return BlochVector(self.x + other[0], self.y + other[1], self.z + other[2])

    def neg(self) -> "BlochVector":
        return BlochVector(-self.x, -self.y, -self.z)

    def normalized(self) -> "BlochVector":
        return self.scale(1.0 / self.norm())


E1 = BlochVector(1.0, 0.0, 0.0)
E2 = BlochVector(0.0, 1.0, 0.0)
E3 = BlochVector(0.0, 0.0, 1.0)
AXES = (E1, E2, E3)


def as_vector(v: Iterable[float]) -> BlochVector:
    x, y, z = (float(c) for c in v)
    return BlochVector(x, y, z)


def unit_axis(v: Iterable[float]) -> BlochVector:
    """Coerce ``v`` to a BlochVector, raising InvalidAxis unless it is unit length."""
    if type(v) is BlochVector:
        n2 = v.x * v.x + v.y * v.y + v.z * v.z
        if abs(n2 - 1.0) <= UNIT_TOL:
            return v
    try:
        vec = as_vector(v)
    except (TypeError, ValueError) as exc:
        raise InvalidAxis(f"not a 3-vector: {v!r}") from exc
    if not all(math.isfinite(c) for c in vec) or abs(vec.norm() - 1.0) > UNIT_TOL:
        raise InvalidAxis(f"axis must be unit length, got norm {vec.norm()!r}")
    return vec


def check_bit(bit: int) -> int:
    if bit not in (0, 1):
        raise ValueError(f"bit must be 0 or 1, got {bit!r}")
    return int(bit)


def density_matrix(r: Iterable[float]) -> np.ndarray:
    """``1/2 I + 1/2 r.sigma`` for any Bloch vector ``r`` (norm <= 1)."""
    x, y, z = as_vector(r)
    return 0.5 * (IDENTITY + x * SIGMA_X + y * SIGMA_Y + z * SIGMA_Z)


def coding_state(bit: int, axis: Iterable[float]) -> np.ndarray:
    n = unit_axis(axis)
    sign = 1.0 if check_bit(bit) else -1.0
    return density_matrix(n.scale(sign))


def check_density(rho: np.ndarray) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (2, 2):
        raise InvalidState(f"expected a 2x2 matrix, got shape {rho.shape}")
    if np.max(np.abs(rho - rho.conj().T)) > ALGEBRA_TOL:
        raise InvalidState("matrix is not Hermitian")
    if abs(np.trace(rho) - 1.0) > ALGEBRA_TOL:
        raise InvalidState(f"trace {np.trace(rho)!r} != 1")
    if np.linalg.eigvalsh(rho).min() < -ALGEBRA_TOL:
        raise InvalidState("matrix has a negative eigenvalue")
    return rho


def bloch_of(rho: np.ndarray) -> BlochVector:
    rho = check_density(rho)
    return BlochVector(*(float(np.trace(rho @ s).real) for s in PAULI))


@dataclass(frozen=True)
class Detector:
    """Projective detector ``D(m) = C0(m) + C1(m)`` with axis ``m``."""

    axis: BlochVector

    def __post_init__(self):
        object.__setattr__(self, "axis", unit_axis(self.axis))

    def projector(self, bit: int) -> np.ndarray:
        return coding_state(bit, self.axis)

    @property
    def c0(self) -> np.ndarray:
        return self.projector(0)

    @property
    def c1(self) -> np.ndarray:
        return self.projector(1)


def outcome_probability(detector_axis, detector_bit: int, state_bit: int, state_axis) -> float:
    """Probability that a detector on ``m`` registers ``r`` for the coding state ``(s, n)``.

    ``P = (1 + (2s - 1)(2r - 1) m.n) / 2``, clipped to [0, 1]. The two
    outcomes sum to exactly 1.0 in floating point.
    """
    m = unit_axis(detector_axis)
    n = unit_axis(state_axis)
    c = m.dot(n) * (2 * check_bit(state_bit) - 1)
    likely = min(1.0, 0.5 * (1.0 + abs(c)))
    # likely >= 1/2, so 1 - likely is exact
    if (c >= 0) == (detector_bit == 1):
        return likely
    return 1.0 - likely


def _prob_one(c: float, state_bit: int) -> float:
    # snap unit-vector rounding so aligned detectors are exactly deterministic
    if c > 1.0 - ALGEBRA_TOL:
        c = 1.0
    elif c < -1.0 + ALGEBRA_TOL:
        c = -1.0
    return 0.5 * (1.0 + c) if state_bit else 0.5 * (1.0 - c)


def measure(detector: Detector, state_bit: int, state_axis, rng: RngStream) -> tuple[int, BlochVector]:
    """Measure the coding state ``(state_bit, state_axis)``; return outcome and reduced Bloch vector.

    The carrier collapses onto ``+m`` for outcome 1 and ``-m`` for outcome 0.
    Exactly one uniform draw is consumed per call.
    """
    n = unit_axis(state_axis)
    m = detector.axis
    outcome = int(rng.random() < _prob_one(m.dot(n), check_bit(state_bit)))
    return outcome, (m if outcome else m.neg())


def measure_many(detector_axis, state_bits, state_axes, rng: RngStream) -> np.ndarray:
    """Vectorised :func:`measure` returning only the outcome bits.

    ``state_axes`` is either one axis shared by every bit or an ``(N, 3)`` array.
    """
    m = np.asarray(unit_axis(detector_axis))
    bits = np.asarray(state_bits, dtype=np.int8)
    axes = np.asarray(state_axes, dtype=float)
    c = axes @ m
    c = np.where(c > 1.0 - ALGEBRA_TOL, 1.0, np.where(c < -1.0 + ALGEBRA_TOL, -1.0, c))
    p1 = 0.5 * (1.0 + (2 * bits - 1) * c)
    return (rng.random(bits.shape) < p1).astype(np.int8)


def average_density(states: Sequence[tuple[int, Iterable[float]]]) -> np.ndarray:
    if len(states) == 0:
        raise EmptyInput("average_density needs at least one state")
    total = np.zeros((2, 2), dtype=complex)
    for bit, axis in states:
        total += coding_state(bit, axis)
    return total / len(states)


class Carrier(NamedTuple):
    """A qubit in transit: the coding state ``(bit, axis)`` plus a latency flag."""

    bit: int
    axis: BlochVector
    delayed: bool = False
