"""Deterministic RNG derivation from (seed, key parts).

Every random draw in the library goes through `rng_for`, keyed by the run
seed plus a stable description of *what* is being drawn (a tag string and
the ids involved).  Draws are therefore independent of call order, which
is what makes batched and per-pair code paths produce identical results.

Derivation rule (stable contract, reimplemented by the test oracle):
  - each key part maps to an unsigned 64-bit integer:
      * int  -> value & (2**64 - 1)
      * str  -> big-endian blake2s digest, digest_size=8, of the UTF-8 bytes
  - the masked seed followed by the mapped parts feeds
    numpy.random.SeedSequence, which seeds a default_rng Generator.
"""

from __future__ import annotations

import hashlib

import numpy as np

_MASK64 = (1 << 64) - 1


def stable_key(part: int | str) -> int:
    """Map a key part to an unsigned 64-bit integer, stable across runs."""
    if isinstance(part, bool):  # bool is an int subclass; reject ambiguity
        raise TypeError("bool key parts are not supported")
    if isinstance(part, int):
        return part & _MASK64
    if isinstance(part, str):
        digest = hashlib.blake2s(part.encode("utf-8"), digest_size=8).digest()
        return int.from_bytes(digest, "big")
    raise TypeError(f"unsupported key part type: {type(part).__name__}")


def rng_for(seed: int, *parts: int | str) -> np.random.Generator:
    """Return a Generator keyed by the seed and the given parts."""
    entropy = [seed & _MASK64] + [stable_key(p) for p in parts]
    return np.random.default_rng(np.random.SeedSequence(entropy))
