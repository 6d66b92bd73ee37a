"""Deterministic random-stream derivation.

Every stochastic draw in the package comes from a generator keyed by
(master seed, purpose code, indices...) through numpy's SeedSequence
spawn keys. Streams are independent of execution order and thread
scheduling, which is what makes whole runs bit-reproducible.
"""

from __future__ import annotations

import numpy as np

# Purpose codes keep spawn keys disjoint across draw sites that share
# the same index tuple.
CANDIDATE = 0
WARMUP = 1
CORPUS = 2
WORLDGEN = 3


def stream(master_seed: int, purpose: int, *indices: int) -> np.random.Generator:
    """Return the generator for one logical draw site.

    The same (seed, purpose, indices) always yields the same stream.
    """
    if master_seed < 0:
        raise ValueError("master seed must be non-negative")
    key = (purpose,) + tuple(int(i) for i in indices)
    return np.random.default_rng(np.random.SeedSequence(master_seed, spawn_key=key))


def stream_label(purpose: int, *indices: int) -> str:
    names = {CANDIDATE: "cand", WARMUP: "warmup", CORPUS: "corpus", WORLDGEN: "world"}
    tail = "/".join(str(i) for i in indices)
    base = names.get(purpose, f"p{purpose}")
    return f"{base}:{tail}" if tail else base
