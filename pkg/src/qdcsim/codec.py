"""Balanced (constant-weight) package codes.

Every codeword of length ``L`` carries exactly ``L/2`` ones, so a package
averaged over its qubits is the maximally mixed state whatever the coding
axis. Codewords are enumerated lexicographically; the first
``2**payload_bits`` carry data and the remainder are overhead words.
Overhead word 0 is the error signal, overhead word 1 the basis-change
acknowledgment.
"""
from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence, Union

from .errors import EmptyInput, PackageSize, PayloadSize, UnsupportedLength

PAYLOAD_BITS = {2: 1, 4: 2, 6: 4}

ERROR_SIGNAL_INDEX = 0
BASIS_CHANGE_INDEX = 1


def bitstring(bits: Union[str, Sequence[int]]) -> str:
    if isinstance(bits, str):
        s = bits
    else:
        s = "".join(str(int(b)) for b in bits)
    if set(s) - {"0", "1"}:
        raise ValueError(f"not a bit string: {bits!r}")
    return s


def is_balanced(bits: str) -> bool:
    return len(bits) % 2 == 0 and bits.count("1") * 2 == len(bits)


class Role(enum.Enum):
    DATA = "data"
    OVERHEAD = "overhead"
    ERROR_SIGNAL = "error_signal"


@dataclass(frozen=True)
class PackageScheme:
    length: int
    payload_bits: int
    data_codebook: tuple[str, ...]
    overhead_codebook: tuple[str, ...]
    _index: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        self._index.update({w: ("data", i) for i, w in enumerate(self.data_codebook)})
        self._index.update({w: ("overhead", i) for i, w in enumerate(self.overhead_codebook)})

    @property
    def codewords(self) -> tuple[str, ...]:
        return self.data_codebook + self.overhead_codebook

    @property
    def error_signal(self) -> "Package":
        if not self.overhead_codebook:
            raise UnsupportedLength("length-2 packages have no overhead word for an error signal")
        return Package(self.overhead_codebook[ERROR_SIGNAL_INDEX], Role.ERROR_SIGNAL, ERROR_SIGNAL_INDEX)

    def overhead(self, index: int) -> "Package":
        if index == ERROR_SIGNAL_INDEX:
            return self.error_signal
        return Package(self.overhead_codebook[index], Role.OVERHEAD, index)


@dataclass(frozen=True)
class Package:
    bits: str
    role: Role = Role.DATA
    overhead_index: int | None = None

    def __post_init__(self):
        if not is_balanced(self.bits):
            raise ValueError(f"package {self.bits!r} is not balanced")

    def __len__(self):
        return len(self.bits)


# decode results
@dataclass(frozen=True)
class Data:
    payload: str


@dataclass(frozen=True)
class Overhead:
    index: int


@dataclass(frozen=True)
class Unbalanced:
    bits: str


DecodeResult = Union[Data, Overhead, Unbalanced]


@lru_cache(maxsize=None)
def make_scheme(length: int) -> PackageScheme:
    if length not in PAYLOAD_BITS:
        raise UnsupportedLength(f"package length must be one of {sorted(PAYLOAD_BITS)}, got {length!r}")
    words = sorted("".join(w) for w in itertools.product("01", repeat=length) if is_balanced("".join(w)))
    k = PAYLOAD_BITS[length]
    return PackageScheme(length, k, tuple(words[: 2**k]), tuple(words[2**k :]))


def encode(scheme: PackageScheme, payload) -> Package:
    payload = bitstring(payload)
    if len(payload) != scheme.payload_bits:
        raise PayloadSize(f"payload must be {scheme.payload_bits} bits, got {len(payload)}")
    return Package(scheme.data_codebook[int(payload, 2)])


def decode(scheme: PackageScheme, bits) -> DecodeResult:
    bits = bitstring(bits)
    if len(bits) != scheme.length:
        raise PackageSize(f"package must be {scheme.length} bits, got {len(bits)}")
    hit = scheme._index.get(bits)
    if hit is None:
        return Unbalanced(bits)
    kind, i = hit
    if kind == "data":
        return Data(format(i, f"0{scheme.payload_bits}b"))
    return Overhead(i)


def stream_balance_deviation(packages: Sequence, window: int) -> float:
    """Largest ``2 |mean(bit) - 1/2|`` over every run of ``window`` consecutive packages.

    Accepts :class:`Package` objects or raw bit strings (the latter so that
    corrupted, unbalanced packages can be inspected too).
    """
    if window < 1:
        raise ValueError("window must be >= 1")
    if not packages:
        raise EmptyInput("no packages")
    strings = [p.bits if isinstance(p, Package) else bitstring(p) for p in packages]
    window = min(window, len(strings))
    worst = 0.0
    for start in range(len(strings) - window + 1):
        chunk = "".join(strings[start : start + window])
        worst = max(worst, abs(chunk.count("1") / len(chunk) - 0.5) * 2)
    return worst
