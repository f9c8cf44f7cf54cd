"""Derived random streams: one root seed per run, sub-seeds keyed by (tag, index)."""

from __future__ import annotations

import zlib

import numpy as np


def derive_seed(seed: int, tag: str, index: int = 0) -> int:
    """A 32-bit seed that depends only on ``(seed, tag, index)``."""
    ss = np.random.SeedSequence([int(seed) & 0xFFFFFFFF, zlib.crc32(tag.encode()), int(index)])
    return int(ss.generate_state(1)[0])


def rng_for(seed: int, tag: str, index: int = 0) -> np.random.Generator:
    return np.random.default_rng(derive_seed(seed, tag, index))
