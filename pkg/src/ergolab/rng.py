"""Seeded counter-based random streams.

Every random stream is a Philox generator keyed by a hash of its
identifying parts, e.g. ``("scheme-comparison", N, scheme, seed)``. Streams
depend only on those parts and never on execution order.
"""
from __future__ import annotations

import hashlib
import json

import numpy as np


def derive_key(*parts) -> int:
    """128-bit key from a canonical encoding of ``parts``."""
    blob = json.dumps(parts, sort_keys=True, separators=(",", ":"), default=str)
    return int.from_bytes(hashlib.sha256(blob.encode()).digest()[:16], "little")


def make_rng(*parts) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=derive_key(*parts)))
