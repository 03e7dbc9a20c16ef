"""Seed-stream derivation.

All randomness is derived from one top-level integer seed. A child stream is
identified by ``(seed, tag, index)``; the tag is hashed with CRC32 so that the
mapping is stable across interpreter runs (``hash()`` is salted).
"""

import zlib

import numpy as np


def _tag_key(tag):
    return zlib.crc32(str(tag).encode("utf-8"))


def derive_rng(seed, tag="", index=0):
    """Return a ``numpy.random.Generator`` for the stream ``(seed, tag, index)``."""
    ss = np.random.SeedSequence([int(seed) & 0xFFFFFFFF, _tag_key(tag), int(index)])
    return np.random.default_rng(ss)


def derive_seed(seed, tag="", index=0):
    """Integer seed in ``[0, 2**31)`` for libraries that want an int ``random_state``."""
    ss = np.random.SeedSequence([int(seed) & 0xFFFFFFFF, _tag_key(tag), int(index)])
    return int(ss.generate_state(1, dtype=np.uint32)[0] >> 1)
