"""Deterministic, counter-based random streams.

Every stochastic quantity in the package is drawn from a Philox generator
keyed by a hash of ``(seed, *tags)``, where tags identify the consumer
(filter frequency, pulse phase, trial index, ...).  Streams are therefore
reproducible byte-for-byte across runs and platforms, and independent of
evaluation order: adding or removing sweep points never perturbs the noise
seen by the remaining points.

Gaussian variates use the inverse-CDF transform of a 53-bit uniform rather
than a rejection method, so a given key always yields the same value.
"""

from __future__ import annotations

import hashlib
import struct

import numpy as np
from scipy.special import ndtri

__all__ = ["stream_key", "generator", "uniform_open", "normal"]

_TWO53 = float(2**53)


def _encode(part) -> bytes:
    if isinstance(part, bool):
        return b"b" + (b"\x01" if part else b"\x00")
    if isinstance(part, (int, np.integer)):
        return b"i" + int(part).to_bytes(16, "little", signed=True)
    if isinstance(part, (float, np.floating)):
        return b"f" + struct.pack("<d", float(part))
    if isinstance(part, str):
        raw = part.encode("utf-8")
        return b"s" + len(raw).to_bytes(4, "little") + raw
    if isinstance(part, (tuple, list)):
        body = b"".join(_encode(p) for p in part)
        return b"t" + len(part).to_bytes(4, "little") + body
    raise TypeError(f"unhashable stream tag of type {type(part).__name__}")


def stream_key(seed: int, *tags) -> np.ndarray:
    """Collapse ``(seed, *tags)`` into a 128-bit Philox key."""
    digest = hashlib.blake2b(_encode((int(seed),) + tags), digest_size=16).digest()
    return np.frombuffer(digest, dtype=np.uint64)


def generator(seed: int, *tags) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=stream_key(seed, *tags)))


def uniform_open(seed: int, tags: tuple, size=None) -> np.ndarray | float:
    """Uniform draws on the open interval (0, 1) with 53-bit resolution."""
    raw = generator(seed, *tags).integers(0, 2**53, size=size)
    return (raw + 0.5) / _TWO53


def normal(seed: int, tags: tuple, size=None, sigma: float = 1.0):
    """Deterministic N(0, sigma^2) draws via the inverse normal CDF."""
    return sigma * ndtri(uniform_open(seed, tags, size=size))
