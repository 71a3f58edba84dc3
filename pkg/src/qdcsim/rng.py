"""Deterministic random streams keyed by ``(seed, label)``.

Every party in a simulated session (Alice, Bob, Eve, the shared secret) draws
from its own stream, so adding or removing one party never shifts the draws
of another.
"""
from __future__ import annotations

import hashlib

import numpy as np

RngStream = np.random.Generator

_MASK64 = (1 << 64) - 1


def label_digest(label: str) -> int:
    return int.from_bytes(hashlib.blake2b(label.encode("utf-8"), digest_size=8).digest(), "little")


def rng_stream(seed: int, label: str = "") -> RngStream:
    """Return a Philox-backed generator for the given seed and stream label."""
    seq = np.random.SeedSequence([int(seed) & _MASK64, label_digest(label)])
    return np.random.Generator(np.random.Philox(seq))
