"""Right-angle random walk of the coding basis on the Bloch sphere.

Each step turns the heading by +/-90 degrees about the current point (the turn
bit picks the sign) and then advances a fixed great-circle arc of 0.75 rad.
Since 0.75 is not a rational multiple of pi, finitely many steps never land
exactly on an earlier basis.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import InvalidInit, InvalidState
from .qubit import UNIT_TOL, BlochVector, as_vector, check_bit

STEP_ARC = 0.75

DEFAULT_START = BlochVector(0.0, 0.0, 1.0)
DEFAULT_HEADING = BlochVector(1.0, 0.0, 0.0)


@dataclass(frozen=True)
class WalkState:
    current: BlochVector
    heading: BlochVector
    step_arc: float = STEP_ARC

    def check(self) -> None:
        if (
            abs(self.current.norm() - 1.0) > UNIT_TOL
            or abs(self.heading.norm() - 1.0) > UNIT_TOL
            or abs(self.current.dot(self.heading)) > UNIT_TOL
            or self.step_arc != STEP_ARC
        ):
            raise InvalidState(f"walk state violates its invariants: {self!r}")


def walk_init(start: Iterable[float] = DEFAULT_START, initial_heading: Iterable[float] = DEFAULT_HEADING) -> WalkState:
    start, heading = as_vector(start), as_vector(initial_heading)
    if abs(start.norm() - 1.0) > UNIT_TOL or abs(heading.norm() - 1.0) > UNIT_TOL:
        raise InvalidInit("start and heading must be unit vectors")
    if abs(start.dot(heading)) > UNIT_TOL:
        raise InvalidInit("heading must be orthogonal to start")
    return WalkState(start, heading)


def turned_heading(state: WalkState, turn_bit: int) -> BlochVector:
    """Heading after the right-angle turn: ``current x heading`` for bit 1, its negative for bit 0."""
    h = state.current.cross(state.heading)
    return h if check_bit(turn_bit) else h.neg()


def walk_step(state: WalkState, turn_bit: int) -> WalkState:
    state.check()
    n, a = state.current, state.step_arc
    h = turned_heading(state, turn_bit)
    ca, sa = math.cos(a), math.sin(a)
    new = n.scale(ca).plus(h.scale(sa)).normalized()
    tangent = n.scale(-sa).plus(h.scale(ca))
    # Gram-Schmidt against the new point keeps the frame orthonormal over long walks
    tangent = tangent.plus(new.scale(-tangent.dot(new))).normalized()
    return WalkState(new, tangent, a)


def walk_sequence(init: WalkState, turn_bits: Sequence[int]) -> list[BlochVector]:
    points = []
    state = init
    for bit in turn_bits:
        state = walk_step(state, bit)
        points.append(state.current)
    return points


def walk_states(init: WalkState, turn_bits: Sequence[int]) -> list[WalkState]:
    """Like :func:`walk_sequence` but keeps full states (point and heading)."""
    states = []
    state = init
    for bit in turn_bits:
        state = walk_step(state, bit)
        states.append(state)
    return states


def arc_between(a: Sequence[float], b: Sequence[float]) -> float:
    c = as_vector(a).dot(b)
    return math.acos(max(-1.0, min(1.0, c)))
