"""Linear-inversion estimation of a Bloch vector from +/-1 Pauli outcomes.

Two settings are simulated. Bob's is supported: Alice repeats one state
``3K`` times and Bob measures ``K`` copies along each coordinate axis. Eve's
is unsupported: she splits ordinary traffic into three interleaved
subsequences and measures one axis on each.

Standard errors are the theoretical ``1/sqrt(K - 1)`` (unit Pauli variance),
not the sample variance.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .errors import InconsistentEstimate, InsufficientSample, InvalidTolerance
from .qubit import AXES, BlochVector, check_bit, density_matrix, measure_many, unit_axis
from .rng import RngStream

# maps (position in stream, stream length) to an axis index 0..2
AssignmentRule = Callable[[int, int], int]


def round_robin(i: int, total: int) -> int:
    return i % 3


def contiguous_thirds(i: int, total: int) -> int:
    return min(3 * i // total, 2)


ASSIGNMENT_RULES: dict[str, AssignmentRule] = {
    "round_robin": round_robin,
    "contiguous": contiguous_thirds,
}


@dataclass(frozen=True)
class AxisSample:
    axis: BlochVector
    outcomes: tuple[int, ...]

    @property
    def values(self) -> np.ndarray:
        return 2 * np.asarray(self.outcomes, dtype=float) - 1


@dataclass(frozen=True)
class BlochEstimate:
    mean: tuple[float, float, float]
    std_error: tuple[float, float, float]
    sample_sizes: tuple[int, int, int]

    @property
    def norm(self) -> float:
        return math.sqrt(sum(m * m for m in self.mean))


def complexity(s: float) -> int:
    """Number of repetitions ``K(s) = ceil(1/s**2)`` for a tolerance ``s`` in (0, 1]."""
    if not (0 < s <= 1):
        raise InvalidTolerance(f"tolerance must lie in (0, 1], got {s!r}")
    # exact rational arithmetic: no rounding at integer boundaries
    return math.ceil(1 / Fraction(s) ** 2)


def standard_error(k: int) -> float:
    return 1.0 / math.sqrt(k - 1)


def estimate_axis_mean(sample: AxisSample) -> tuple[float, float]:
    k = len(sample.outcomes)
    if k < 2:
        raise InsufficientSample(f"need at least 2 outcomes, got {k}")
    return float(sample.values.mean()), standard_error(k)


def _mean_from_counts(ones: int, k: int) -> float:
    return (2 * ones - k) / k


def bob_determine_basis(true_axis, K: int, rng: RngStream) -> BlochEstimate:
    """Estimate the axis of ``3K`` copies of the bit-1 state, ``K`` per coordinate axis."""
    if K < 2:
        raise InsufficientSample(f"K must be >= 2, got {K}")
    n = unit_axis(true_axis)
    means = []
    for e in AXES:
        outcomes = measure_many(e, np.ones(K, dtype=np.int8), n, rng)
        means.append(_mean_from_counts(int(outcomes.sum()), K))
    se = standard_error(K)
    return BlochEstimate(tuple(means), (se, se, se), (K, K, K))


def eve_estimate_basis(
    stream: Sequence[tuple[int, Sequence[float]]],
    assignment: AssignmentRule | str = round_robin,
    rng: RngStream | None = None,
) -> BlochEstimate:
    """Eve's estimate from one pass over ordinary traffic.

    Element ``i`` of ``stream`` is measured along axis ``assignment(i, len)``;
    the per-axis means have expectation ``n_k (2 nu_k - 1)`` with ``nu_k`` the
    share of bit-1 states that landed in subsequence ``k``.
    """
    if rng is None:
        raise ValueError("eve_estimate_basis needs an rng")
    if isinstance(assignment, str):
        assignment = ASSIGNMENT_RULES[assignment]
    total = len(stream)
    if total == 0:
        raise InsufficientSample("empty stream")
    bits = np.fromiter((check_bit(b) for b, _ in stream), dtype=np.int8, count=total)
    axes = np.array([tuple(a) for _, a in stream], dtype=float)
    which = np.fromiter((assignment(i, total) for i in range(total)), dtype=np.int64, count=total)
    return _estimate_partitioned(bits, axes, which, rng)


def eve_estimate_arrays(bits: np.ndarray, axes: np.ndarray, which: np.ndarray, rng: RngStream) -> BlochEstimate:
    """Array form of :func:`eve_estimate_basis` for large Monte Carlo runs."""
    return _estimate_partitioned(np.asarray(bits, dtype=np.int8), np.asarray(axes, dtype=float), np.asarray(which), rng)


def _estimate_partitioned(bits, axes, which, rng) -> BlochEstimate:
    means, ses, sizes = [], [], []
    for k, e in enumerate(AXES):
        sel = which == k
        size = int(sel.sum())
        if size < 2:
            raise InsufficientSample(f"subsequence {k} has {size} element(s)")
        sub_axes = axes[sel] if axes.ndim == 2 else axes
        outcomes = measure_many(e, bits[sel], sub_axes, rng)
        means.append(_mean_from_counts(int(outcomes.sum()), size))
        ses.append(standard_error(size))
        sizes.append(size)
    return BlochEstimate(tuple(means), tuple(ses), tuple(sizes))


def expected_eve_means(axis, nu: Sequence[float]) -> tuple[float, float, float]:
    n = unit_axis(axis)
    return tuple(n[k] * (2 * nu[k] - 1) for k in range(3))


def reconstruct_state(estimate: BlochEstimate) -> tuple[np.ndarray, bool]:
    """Density matrix ``1/2 I + 1/2 <sigma>.sigma`` and whether the mean had to be clipped to norm 1."""
    norm = estimate.norm
    if norm > 1 + 3 * max(estimate.std_error):
        raise InconsistentEstimate(f"estimate norm {norm:.4f} is beyond statistical overshoot")
    r = np.asarray(estimate.mean, dtype=float)
    clipped = norm > 1
    if clipped:
        r = r / norm
    return density_matrix(r), clipped
