"""Seed-derived RNG streams. Children are derived by hashing the seed
with a path of string parts, so any (seed, path) pair names the same
stream in every process and iteration order."""

from __future__ import annotations

import hashlib
import random


def derived_rng(seed: int, *parts) -> random.Random:
    # Never the builtin hash(): it is salted per process.
    material = ":".join([str(seed), *map(str, parts)]).encode("utf-8")
    digest = hashlib.sha256(material).digest()
    return random.Random(int.from_bytes(digest[:8], "big"))
