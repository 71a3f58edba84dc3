"""Eavesdropping strategies that sit on the qubit channel.

Eve sees every carrier in transit, may measure it with a detector of her
choice and forwards the reduced state. She can read the classical feedback
but not alter it, and she knows when the basis changes; only the turn bits
of the walk are hidden from her.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

from .basis_walk import WalkState, walk_init, walk_step
from .errors import SpanMismatch
from .qubit import AXES, BlochVector, Carrier, Detector, check_bit, measure, outcome_probability, unit_axis
from .rng import RngStream, rng_stream
from .tomography import BlochEstimate, standard_error


@dataclass
class EveRecord:
    strategy: str
    guessed_bits: list[int] = field(default_factory=list)
    axis_tallies: list[list[int]] = field(default_factory=lambda: [[0, 0], [0, 0], [0, 0]])  # [count, ones]
    basis_estimates: list[BlochVector] = field(default_factory=list)
    guess_matches: list[bool] = field(default_factory=list)
    delayed: int = 0

    @property
    def intercepted(self) -> int:
        return len(self.guessed_bits)

    def tally(self, k: int, bit: int) -> None:
        self.axis_tallies[k][0] += 1
        self.axis_tallies[k][1] += bit

    def tomography_estimate(self) -> BlochEstimate:
        means, ses, sizes = [], [], []
        for count, ones in self.axis_tallies:
            means.append((2 * ones - count) / count if count else 0.0)
            ses.append(standard_error(count) if count >= 2 else math.inf)
            sizes.append(count)
        return BlochEstimate(tuple(means), tuple(ses), tuple(sizes))

    def to_events(self) -> list[dict]:
        """Line records in the transcript schema, tagged with the strategy kind."""
        records = []
        for i, bit in enumerate(self.guessed_bits):
            records.append({"index": i, "kind": "EveMeasured", "payload": {"strategy": self.strategy, "bit": bit}})
        base = len(records)
        for j, hit in enumerate(self.guess_matches):
            records.append(
                {"index": base + j, "kind": "EveWalkGuess", "payload": {"strategy": self.strategy, "step": j, "match": hit}}
            )
        return records


class Eavesdropper:
    """Base strategy: forwards every carrier untouched."""

    kind = "passive"

    def __init__(self):
        self.record = EveRecord(self.kind)

    def intercept(self, carrier: Carrier, rng: RngStream) -> Carrier:
        return carrier

    def on_basis_change(self, true_bit: int | None = None) -> None:
        pass


PassiveOff = Eavesdropper


class FixedAxisMeasure(Eavesdropper):
    kind = "fixed_axis"

    def __init__(self, axis):
        super().__init__()
        self.detector = Detector(unit_axis(axis))

    def _measure(self, carrier: Carrier, detector: Detector, rng: RngStream) -> Carrier:
        outcome, _ = measure(detector, carrier.bit, carrier.axis, rng)
        self.record.guessed_bits.append(outcome)
        return Carrier(outcome, detector.axis, carrier.delayed)

    def intercept(self, carrier, rng):
        return self._measure(carrier, self.detector, rng)


class InterceptResend(FixedAxisMeasure):
    """Measure-and-replace; statistically identical to :class:`FixedAxisMeasure` except for the latency flag."""

    kind = "intercept_resend"

    def intercept(self, carrier, rng):
        forwarded = self._measure(carrier, self.detector, rng)
        self.record.delayed += 1
        return forwarded._replace(delayed=True)


class TomographyInterleave(FixedAxisMeasure):
    """Measure carrier ``i`` along coordinate axis ``i mod 3`` and keep per-axis tallies."""

    kind = "tomography"

    def __init__(self, assignment: str = "round_robin"):
        Eavesdropper.__init__(self)
        if assignment != "round_robin":
            raise ValueError("only round_robin assignment is available on a live channel")
        self._detectors = tuple(Detector(e) for e in AXES)
        self._count = 0

    def intercept(self, carrier, rng):
        k = self._count % 3
        self._count += 1
        forwarded = self._measure(carrier, self._detectors[k], rng)
        self.record.tally(k, forwarded.bit)
        return forwarded


class WalkGuesser(FixedAxisMeasure):
    """Tracks the public walk with privately guessed turn bits and measures on its guessed basis."""

    kind = "walk_guesser"

    def __init__(self, guess_seed: int, init: WalkState | None = None):
        self.walk = init if init is not None else walk_init()
        super().__init__(self.walk.current)
        self.guess_rng = rng_stream(guess_seed, "eve-walk-guess")
        self.record.basis_estimates.append(self.walk.current)

    @property
    def basis(self) -> BlochVector:
        return self.walk.current

    def on_basis_change(self, true_bit: int | None = None) -> None:
        eve_guess_walk(self, true_bit)


def eve_guess_walk(guesser: WalkGuesser, true_bit: int | None = None) -> BlochVector:
    """Advance Eve's walk by one guessed turn; ``true_bit`` is used only to score the guess."""
    guess = int(guesser.guess_rng.integers(0, 2))
    guesser.walk = walk_step(guesser.walk, guess)
    guesser.detector = Detector(guesser.walk.current)
    guesser.record.basis_estimates.append(guesser.walk.current)
    if true_bit is not None:
        guesser.record.guess_matches.append(guess == check_bit(true_bit))
    return guesser.walk.current


def eve_information_leakage(record: EveRecord, ground_truth: Sequence[int]) -> float:
    if len(record.guessed_bits) != len(ground_truth):
        raise SpanMismatch(f"record covers {len(record.guessed_bits)} qubits, ground truth has {len(ground_truth)}")
    if not ground_truth:
        raise SpanMismatch("empty span")
    hits = sum(int(g == t) for g, t in zip(record.guessed_bits, ground_truth))
    return hits / len(ground_truth)


def bob_flip_probability(eve_axis, alice_axis, alice_bit: int = 1) -> float:
    """Chance that Bob (detector on Alice's axis) reads the wrong bit after Eve measures on ``eve_axis``.

    Sums the four (Eve outcome, Bob outcome) paths; closed form ``(1 - c**2)/2`` with ``c = m.n``.
    """
    total = 0.0
    for eve_bit in (0, 1):
        p_eve = outcome_probability(eve_axis, eve_bit, alice_bit, alice_axis)
        p_wrong = outcome_probability(alice_axis, 1 - alice_bit, eve_bit, eve_axis)
        total += p_eve * p_wrong
    return total


STRATEGIES = {
    "passive": PassiveOff,
    "fixed_axis": FixedAxisMeasure,
    "intercept_resend": InterceptResend,
    "tomography": TomographyInterleave,
    "walk_guesser": WalkGuesser,
}


def make_strategy(kind: str, **params) -> Eavesdropper:
    try:
        cls = STRATEGIES[kind]
    except KeyError:
        raise ValueError(f"unknown strategy {kind!r}; choose from {sorted(STRATEGIES)}") from None
    return cls(**params)
