"""Deterministic seed derivation.

All randomness in the pipeline flows from one top-level seed, fanned out
per stage (and per key within a stage) by hashing.  Python's builtin
``hash`` is salted per process, so a keyed blake2b digest is used instead.
"""

from __future__ import annotations

import hashlib


def derive_seed(*parts) -> int:
    """Derive a stable 64-bit seed from arbitrary string/int parts."""
    h = hashlib.blake2b(digest_size=8)
    for part in parts:
        h.update(str(part).encode("utf-8"))
        h.update(b"\x00")
    return int.from_bytes(h.digest(), "little")


def derive_unit(*parts) -> float:
    """Stable uniform float in [0, 1) from the same keyed hash."""
    return derive_seed(*parts) / 2**64
