"""Synthetic benchmark corpora, fully determined by a seed.

Two flavors: an English-like stream (order-1 Markov chain over 64 symbols
with skewed, row-shuffled transition weights, so H1 is well below H0) and
a DNA-like stream (uniform over 4 symbols).  Symbol values start at 0, so
either corpus is valid under any alphabet size that covers it.
"""

from __future__ import annotations

from bisect import bisect_right
import random

import numpy as np

ENGLISH_SYMBOLS = 64
DNA_SYMBOLS = 4


def gen_dna(size: int, seed: int = 0) -> bytes:
    rng = np.random.Generator(np.random.PCG64(seed))
    return rng.integers(0, DNA_SYMBOLS, size, dtype=np.uint8).tobytes()


def _transition_rows(rng: random.Random):
    base = [1.0 / (j + 1) ** 1.3 for j in range(ENGLISH_SYMBOLS)]
    rows = []
    for _ in range(ENGLISH_SYMBOLS):
        weights = base[:]
        rng.shuffle(weights)
        total = sum(weights)
        acc = 0.0
        cum = []
        for w in weights:
            acc += w / total
            cum.append(acc)
        cum[-1] = 1.0
        rows.append(cum)
    return rows


def gen_english(size: int, seed: int = 0) -> bytes:
    """Order-1 Markov stream over 64 symbols."""
    rng = random.Random(seed)
    rows = _transition_rows(rng)
    uniform = np.random.Generator(np.random.PCG64(seed ^ 0x5EED)).random(size)
    out = bytearray(size)
    state = 0
    for i in range(size):
        state = bisect_right(rows[state], uniform[i])
        if state >= ENGLISH_SYMBOLS:
            state = ENGLISH_SYMBOLS - 1
        out[i] = state
    return bytes(out)


def generate(kind: str, size: int, seed: int = 0) -> bytes:
    if kind == "english":
        return gen_english(size, seed)
    if kind == "dna":
        return gen_dna(size, seed)
    raise ValueError("unknown corpus kind {!r}".format(kind))
