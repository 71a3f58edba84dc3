"""Alice/Bob session with feedback verification and coordinated basis changes.

One package round trip:

1. Alice encodes the payload and sends one carrier per codeword bit.
2. Bob measures on his current basis and decodes. He echoes a balanced
   package back, or returns the error-signal word if the package arrived
   unbalanced.
3. Alice measures the reply and compares it with what she sent. On a
   mismatch she sends the error-signal word and resends.

Both endpoints count packages between errors. Those error intervals,
mixed with the shared secret, re-key the turn-bit stream of the basis
walk. A re-key happens only after a monitoring window passes without
tripping the error threshold.
"""
from __future__ import annotations

import enum
import hashlib
import json
from collections import deque
from dataclasses import dataclass, field
from typing import Any, Iterable, NamedTuple, Sequence

import numpy as np

from .adversary import Eavesdropper
from .basis_walk import WalkState, walk_init, walk_step
from .codec import (
    BASIS_CHANGE_INDEX,
    Data,
    DecodeResult,
    Package,
    PackageScheme,
    Unbalanced,
    bitstring,
    decode,
    encode,
    make_scheme,
)
from .errors import ChannelEmpty, ConfigError, ProtocolOrder
from .qubit import BlochVector, Carrier, Detector, measure
from .rng import RngStream, rng_stream

_MASK64 = (1 << 64) - 1


class EventKind(str, enum.Enum):
    QUBIT_SENT = "QubitSent"
    QUBIT_MEASURED = "QubitMeasured"
    FEEDBACK_ECHO = "FeedbackEcho"
    ERROR_SIGNAL = "ErrorSignal"
    RESEND = "Resend"
    BASIS_CHANGED = "BasisChanged"
    ABORT = "Abort"


class ProtocolEvent(NamedTuple):
    index: int
    kind: EventKind
    payload: dict[str, Any]

    def to_json(self) -> str:
        return json.dumps(
            {"index": self.index, "kind": self.kind.value, "payload": self.payload},
            sort_keys=False,
            separators=(",", ":"),
        )


class Transcript:
    """Assigns monotone indices to events.

    With ``record=False`` only the counter advances: per-qubit events are
    not built at all and operations return empty event lists.
    """

    def __init__(self, record: bool = True):
        self.record = record
        self.events: list[ProtocolEvent] = []
        self._next = 0

    def emit(self, kind: EventKind, **payload) -> ProtocolEvent:
        event = ProtocolEvent(self._next, kind, payload)
        self._next += 1
        if self.record:
            self.events.append(event)
        return event

    def skip(self, n: int) -> None:
        self._next += n

    def __len__(self):
        return self._next

    def to_jsonl(self) -> str:
        return "".join(e.to_json() + "\n" for e in self.events)

    def write(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(self.to_jsonl())


def read_transcript(path) -> list[dict]:
    with open(path, encoding="utf-8") as fh:
        return [json.loads(line) for line in fh if line.strip()]


@dataclass(frozen=True)
class SessionConfig:
    package_length: int = 6
    initial_basis: WalkState = field(default_factory=walk_init)
    shared_secret_seed: int = 0
    basis_change_period: int = 16  # delivered packages between basis changes; 0 disables
    error_rate_threshold: float = 0.05
    monitoring_window: int = 50
    eve_on_feedback: bool = False
    max_attempts: int = 1000  # per package

    def __post_init__(self):
        if self.package_length not in (4, 6):
            raise ConfigError("package_length", "must be 4 or 6 (length 2 has no error-signal word)")
        if not 0 < self.error_rate_threshold <= 1:
            raise ConfigError("error_rate_threshold", "must lie in (0, 1]")
        if self.monitoring_window < 10:
            raise ConfigError("monitoring_window", "must be >= 10")
        if self.basis_change_period < 0:
            raise ConfigError("basis_change_period", "must be >= 0")
        if self.max_attempts < 1:
            raise ConfigError("max_attempts", "must be >= 1")
        try:
            self.initial_basis.check()
        except ValueError as exc:
            raise ConfigError("initial_basis", str(exc)) from exc

    @property
    def scheme(self) -> PackageScheme:
        return make_scheme(self.package_length)


class TurnBitSource:
    """Shared keyed bit stream driving the walk's turn direction.

    Key = secret XOR digest(committed error intervals). Both endpoints hold an
    identical copy; identical histories give identical bits.
    """

    def __init__(self, secret: int):
        self.secret = int(secret) & _MASK64
        self.committed: tuple[int, ...] = ()
        self.consumed = 0
        self._rekey()

    @staticmethod
    def digest(intervals: Sequence[int]) -> int:
        raw = b"".join(int(i).to_bytes(8, "little") for i in intervals)
        return int.from_bytes(hashlib.blake2b(raw, digest_size=8).digest(), "little")

    def _rekey(self) -> None:
        key = self.secret ^ self.digest(self.committed)
        self._rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(key)))

    def refresh(self, intervals: Sequence[int]) -> bool:
        """Re-key from ``intervals`` if they differ from the last committed set."""
        intervals = tuple(intervals)
        if intervals == self.committed:
            return False
        self.committed = intervals
        self._rekey()
        return True

    def next_bit(self) -> int:
        self.consumed += 1
        return int(self._rng.integers(0, 2))


class Role(str, enum.Enum):
    ALICE = "alice"
    BOB = "bob"


@dataclass
class EndpointState:
    role: Role
    walk: WalkState
    turn_bits: TurnBitSource
    packages_since_last_error: int = 0
    collected_error_intervals: list[int] = field(default_factory=list)
    pending_package: Package | None = None
    window: deque = field(default_factory=deque)  # recent attempt outcomes, True = error
    attempts: int = 0
    errors: int = 0
    delivered: int = 0
    basis_changes: int = 0

    @property
    def current_basis(self) -> BlochVector:
        return self.walk.current

    def record_attempt(self, error: bool, window: int) -> None:
        self.attempts += 1
        self.window.append(error)
        if len(self.window) > window:
            self.window.popleft()
        if error:
            self.errors += 1
            self.collected_error_intervals.append(self.packages_since_last_error)
            self.packages_since_last_error = 0
        else:
            self.packages_since_last_error += 1
            self.delivered += 1


def new_endpoint(role: Role, config: SessionConfig) -> EndpointState:
    return EndpointState(role, config.initial_basis, TurnBitSource(config.shared_secret_seed))


class QuantumChannel:
    """FIFO of carriers; an optional eavesdropper sees each carrier on entry."""

    def __init__(self, adversary: Eavesdropper | None = None, rng: RngStream | None = None, log: list | None = None):
        self.adversary = adversary
        self.rng = rng
        self._queue: deque[Carrier] = deque()
        self.sent_bits: list[int] = [] if log is None else log  # ground truth of intercepted carriers

    def send(self, carriers: Iterable[Carrier]) -> None:
        if self.adversary is None:
            self._queue.extend(carriers)
            return
        for c in carriers:
            self.sent_bits.append(c.bit)
            self._queue.append(self.adversary.intercept(c, self.rng))

    def receive(self, n: int) -> list[Carrier]:
        if len(self._queue) < n:
            raise ChannelEmpty(f"wanted {n} carriers, channel holds {len(self._queue)}")
        return [self._queue.popleft() for _ in range(n)]

    def __len__(self):
        return len(self._queue)


def _send(package: Package, basis: BlochVector, channel: QuantumChannel, transcript: Transcript, sender: Role):
    if transcript.record:
        axis = list(basis)
        events = [transcript.emit(EventKind.QUBIT_SENT, by=sender.value, bit=int(b), axis=axis) for b in package.bits]
    else:
        events = []
        transcript.skip(len(package.bits))
    channel.send(Carrier(int(b), basis) for b in package.bits)
    return events


def _receive(n: int, basis: BlochVector, channel, rng, transcript: Transcript, receiver: Role):
    carriers = channel.receive(n)
    detector = Detector(basis)
    bits = [measure(detector, c.bit, c.axis, rng)[0] for c in carriers]
    if transcript.record:
        events = [
            transcript.emit(EventKind.QUBIT_MEASURED, by=receiver.value, bit=b, delayed=c.delayed)
            for b, c in zip(bits, carriers)
        ]
    else:
        events = []
        transcript.skip(n)
    return "".join(map(str, bits)), carriers, events


def alice_send_package(state: EndpointState, scheme: PackageScheme, payload, channel, transcript: Transcript):
    package = encode(scheme, payload)
    state.pending_package = package
    return _send(package, state.current_basis, channel, transcript, Role.ALICE)


@dataclass
class Reception:
    result: DecodeResult
    bits: str
    delayed: int


def bob_receive_package(state: EndpointState, scheme: PackageScheme, channel, rng, transcript: Transcript):
    """Measure one package off ``channel`` and queue Bob's reply (echo or error signal)."""
    bits, carriers, events = _receive(scheme.length, state.current_basis, channel, rng, transcript, Role.BOB)
    result = decode(scheme, bits)
    if isinstance(result, Unbalanced):
        state.pending_package = scheme.error_signal
    else:
        state.pending_package = Package(bits)
    return Reception(result, bits, sum(c.delayed for c in carriers)), events


def bob_send_reply(state: EndpointState, channel, transcript: Transcript):
    if state.pending_package is None:
        raise ProtocolOrder("Bob has nothing to reply")
    package, state.pending_package = state.pending_package, None
    events = [transcript.emit(EventKind.FEEDBACK_ECHO, bits=package.bits, role=package.role.value)]
    return events + _send(package, state.current_basis, channel, transcript, Role.BOB)


def alice_receive_reply(state: EndpointState, scheme: PackageScheme, channel, rng, transcript: Transcript):
    bits, _, events = _receive(scheme.length, state.current_basis, channel, rng, transcript, Role.ALICE)
    return bits, events


def alice_process_feedback(
    state: EndpointState, scheme: PackageScheme, echo_bits: str, channel, transcript: Transcript, window: int
):
    """Compare Bob's echo with the pending package.

    Returns ``(match, events)``. On a mismatch the error signal goes out on
    ``channel`` and the pending package stays queued for resending.
    """
    if state.pending_package is None:
        raise ProtocolOrder("no package awaiting feedback")
    echo_bits = bitstring(echo_bits)
    match = echo_bits == state.pending_package.bits
    if match:
        state.pending_package = None
        state.record_attempt(False, window)
        return True, []
    interval = state.packages_since_last_error
    state.record_attempt(True, window)
    events = [transcript.emit(EventKind.ERROR_SIGNAL, echo=echo_bits, sent=state.pending_package.bits, interval=interval)]
    events += _send(scheme.error_signal, state.current_basis, channel, transcript, Role.ALICE)
    events.append(transcript.emit(EventKind.RESEND, bits=state.pending_package.bits))
    return False, events


def bob_receive_error_signal(state: EndpointState, scheme: PackageScheme, channel, rng, transcript, window: int):
    """Consume Alice's error-signal package.

    Bob's bookkeeping follows Alice's verdict even if the signal itself
    arrives garbled, so the two error-interval histories never diverge.
    """
    bits, _, events = _receive(scheme.length, state.current_basis, channel, rng, transcript, Role.BOB)
    state.record_attempt(True, window)
    return decode(scheme, bits), events


def advance_basis(state: EndpointState, transcript: Transcript):
    bit = state.turn_bits.next_bit()
    state.walk = walk_step(state.walk, bit)
    state.basis_changes += 1
    event = transcript.emit(
        EventKind.BASIS_CHANGED, by=state.role.value, turn_bit=bit, basis=list(state.current_basis), change=state.basis_changes
    )
    return bit, [event]


@dataclass(frozen=True)
class Continue:
    error_rate: float


@dataclass(frozen=True)
class Abort:
    reason: str
    error_rate: float


def monitor_intervention(state: EndpointState, config: SessionConfig) -> Continue | Abort:
    """Abort once the error rate over the last ``monitoring_window`` attempts exceeds the threshold."""
    if not state.window:
        return Continue(0.0)
    rate = sum(state.window) / len(state.window)
    if len(state.window) >= config.monitoring_window and rate > config.error_rate_threshold:
        return Abort(f"windowed error rate {rate:.3f} > {config.error_rate_threshold}", rate)
    return Continue(rate)


@dataclass
class SessionResult:
    sent: list[str]
    delivered: list[str]
    aborted: bool = False
    abort_reason: str | None = None
    attempts_to_abort: int | None = None
    attempts: int = 0
    errors: int = 0
    basis_changes: int = 0
    delayed_carriers: int = 0

    @property
    def bit_errors(self) -> int:
        return sum(sum(a != b for a, b in zip(s, d)) for s, d in zip(self.sent, self.delivered))

    @property
    def delivered_bit_error_rate(self) -> float:
        bits = sum(len(d) for d in self.delivered)
        return self.bit_errors / bits if bits else 0.0


class Session:
    """Deterministic event loop for one Alice/Bob session with an optional eavesdropper."""

    def __init__(
        self,
        config: SessionConfig,
        seed: int,
        adversary: Eavesdropper | None = None,
        record: bool = True,
    ):
        self.config = config
        self.scheme = config.scheme
        self.seed = seed
        self.adversary = adversary
        self.transcript = Transcript(record)
        self.alice = new_endpoint(Role.ALICE, config)
        self.bob = new_endpoint(Role.BOB, config)
        self.alice_rng = rng_stream(seed, "alice")
        self.bob_rng = rng_stream(seed, "bob")
        eve_rng = rng_stream(seed, "eve")
        self.intercepted_truth: list[int] = []
        self.forward = QuantumChannel(adversary, eve_rng, self.intercepted_truth)
        self.reverse = QuantumChannel(adversary if config.eve_on_feedback else None, eve_rng, self.intercepted_truth)
        self.true_turn_bits: list[int] = []

    def _change_basis(self) -> None:
        ack = self.scheme.overhead(BASIS_CHANGE_INDEX)
        _send(ack, self.alice.current_basis, self.forward, self.transcript, Role.ALICE)
        _receive(self.scheme.length, self.bob.current_basis, self.forward, self.bob_rng, self.transcript, Role.BOB)
        bit, _ = advance_basis(self.alice, self.transcript)
        advance_basis(self.bob, self.transcript)
        self.true_turn_bits.append(bit)
        if self.adversary is not None:
            self.adversary.on_basis_change(bit)

    def _checkpoint(self) -> Continue | Abort:
        verdict = monitor_intervention(self.alice, self.config)
        if isinstance(verdict, Continue):
            self.alice.turn_bits.refresh(self.alice.collected_error_intervals)
            self.bob.turn_bits.refresh(self.bob.collected_error_intervals)
        return verdict

    def run(self, payloads: Iterable) -> SessionResult:
        cfg, scheme = self.config, self.scheme
        sent, delivered = [], []
        result = SessionResult(sent, delivered)
        delayed = 0
        for payload in payloads:
            payload = bitstring(payload)
            sent.append(payload)
            for _ in range(cfg.max_attempts):
                alice_send_package(self.alice, scheme, payload, self.forward, self.transcript)
                reception, _ = bob_receive_package(self.bob, scheme, self.forward, self.bob_rng, self.transcript)
                delayed += reception.delayed
                bob_send_reply(self.bob, self.reverse, self.transcript)
                echo, _ = alice_receive_reply(self.alice, scheme, self.reverse, self.alice_rng, self.transcript)
                ok, _ = alice_process_feedback(self.alice, scheme, echo, self.forward, self.transcript, cfg.monitoring_window)
                if ok:
                    self.bob.record_attempt(False, cfg.monitoring_window)
                else:
                    bob_receive_error_signal(self.bob, scheme, self.forward, self.bob_rng, self.transcript, cfg.monitoring_window)
                if self.alice.attempts % cfg.monitoring_window == 0:
                    verdict = self._checkpoint()
                    if isinstance(verdict, Abort):
                        return self._abort(result, verdict.reason, delayed)
                if ok:
                    assert isinstance(reception.result, Data)
                    delivered.append(reception.result.payload)
                    break
            else:
                return self._abort(result, f"package not confirmed after {cfg.max_attempts} attempts", delayed)
            if cfg.basis_change_period and self.alice.delivered % cfg.basis_change_period == 0:
                self._change_basis()
        return self._finish(result, delayed)

    def _finish(self, result: SessionResult, delayed: int) -> SessionResult:
        result.attempts = self.alice.attempts
        result.errors = self.alice.errors
        result.basis_changes = self.alice.basis_changes
        result.delayed_carriers = delayed
        return result

    def _abort(self, result: SessionResult, reason: str, delayed: int) -> SessionResult:
        self.transcript.emit(EventKind.ABORT, reason=reason, attempts=self.alice.attempts)
        result.aborted = True
        result.abort_reason = reason
        result.attempts_to_abort = self.alice.attempts
        # the package in flight was never confirmed
        if len(result.sent) > len(result.delivered):
            result.sent.pop()
        return self._finish(result, delayed)


def random_payloads(scheme: PackageScheme, count: int, rng: RngStream) -> list[str]:
    values = rng.integers(0, 2**scheme.payload_bits, size=count)
    return [format(int(v), f"0{scheme.payload_bits}b") for v in values]
