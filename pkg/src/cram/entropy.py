"""Empirical entropy of concrete strings.

Everything here is in bits (log base 2), with the convention 0*log(0) = 0.
``h0`` is the zeroth-order entropy of the symbol frequencies of a string;
``hk`` conditions each symbol on its preceding length-k context.  The first
k characters of a string have no full context and are excluded from every
context bucket, so the bucket totals sum to ``n - k``.

Also provided: the block transform used by the compressed store (``ell``
consecutive characters packed into one value of a larger alphabet) and the
machinery to measure and bound how much ``n * h0`` / ``n * hk`` can move
under a single-character edit.
"""

from __future__ import annotations

import math
from typing import Dict, Iterable, Mapping, Sequence, Tuple, Union

import numpy as np

Edit = Tuple  # ("delete", i) | ("insert", i, c) | ("replace", i, c)
TextLike = Union[bytes, bytearray, Sequence[int]]


class SymbolHistogram:
    """Occurrence counts per symbol plus their total.

    Symbols are small non-negative ints.  Symbols with count zero may be
    absent from the map; ``total`` always equals the sum of all counts.
    """

    __slots__ = ("counts", "total")

    def __init__(self, counts: Mapping[int, int] | None = None):
        self.counts: Dict[int, int] = dict(counts) if counts else {}
        self.total: int = sum(self.counts.values())

    @classmethod
    def from_text(cls, text: TextLike) -> "SymbolHistogram":
        hist = cls()
        counts = hist.counts
        for sym in text:
            counts[sym] = counts.get(sym, 0) + 1
        hist.total = len(text)
        return hist

    def add(self, sym: int, delta: int = 1) -> None:
        new = self.counts.get(sym, 0) + delta
        if new < 0:
            raise ValueError("negative count for symbol {}".format(sym))
        if new:
            self.counts[sym] = new
        else:
            self.counts.pop(sym, None)
        self.total += delta

    def h0(self) -> float:
        """Entropy in bits/symbol of the stored distribution."""
        n = self.total
        if n == 0:
            return 0.0
        acc = 0.0
        for c in self.counts.values():
            if c:
                p = c / n
                acc -= p * math.log2(p)
        return acc


class ContextPartition:
    """Symbols of a string bucketed by their preceding length-k context."""

    __slots__ = ("k", "buckets")

    def __init__(self, k: int, buckets: Dict[bytes, SymbolHistogram]):
        self.k = k
        self.buckets = buckets

    @classmethod
    def from_text(cls, text: TextLike, k: int) -> "ContextPartition":
        if k < 0:
            raise ValueError("context length must be >= 0")
        data = bytes(text)
        buckets: Dict[bytes, SymbolHistogram] = {}
        for i in range(k, len(data)):
            ctx = data[i - k:i]
            hist = buckets.get(ctx)
            if hist is None:
                hist = buckets[ctx] = SymbolHistogram()
            hist.add(data[i])
        return cls(k, buckets)


def _entropy_of_counts(counts: np.ndarray, total: int) -> float:
    if total == 0:
        return 0.0
    nz = counts[counts > 0]
    p = nz / total
    return float(-np.sum(p * np.log2(p)))


def h0(text: TextLike) -> float:
    """Zeroth-order empirical entropy in bits per symbol.

    Returns 0.0 for empty input or input with a single distinct symbol.
    """
    n = len(text)
    if n == 0:
        return 0.0
    if isinstance(text, (bytes, bytearray, memoryview)):
        arr = np.frombuffer(bytes(text), dtype=np.uint8)
    else:
        arr = np.asarray(text)
    counts = np.bincount(arr)
    return _entropy_of_counts(counts, n)


def hk(text: TextLike, k: int) -> float:
    """k-th order empirical entropy in bits per symbol.

    Averages the bucket entropies of ``ContextPartition.from_text`` weighted
    by bucket size over the full string length; ``hk(text, 0) == h0(text)``.
    """
    n = len(text)
    if k < 0:
        raise ValueError("context length must be >= 0")
    if n == 0:
        return 0.0
    if k >= n:
        raise ValueError("context length {} must be < text length {}".format(k, n))
    if k == 0:
        return h0(text)
    if isinstance(text, (bytes, bytearray, memoryview)) and n > (1 << 16) and k <= 6:
        return _hk_bytes(bytes(text), k)
    part = ContextPartition.from_text(text, k)
    acc = 0.0
    for hist in part.buckets.values():
        acc += hist.total * hist.h0()
    return acc / n


def _hk_bytes(data: bytes, k: int) -> float:
    """Vectorized hk: group (context, symbol) pairs by composite integer key."""
    arr = np.frombuffer(data, dtype=np.uint8).astype(np.int64)
    n = arr.shape[0]
    keys = arr[k:].copy()
    shift = 8
    for back in range(1, k + 1):
        keys += arr[k - back:n - back] << shift
        shift += 8
    pair_keys, pair_counts = np.unique(keys, return_counts=True)
    ctx_of_pair = pair_keys >> 8
    boundaries = np.nonzero(np.diff(ctx_of_pair))[0] + 1
    starts = np.concatenate(([0], boundaries))
    counts = pair_counts.astype(np.float64)
    ctx_totals = np.add.reduceat(counts, starts)
    # n*hk = sum_ctx C*log2(C) - sum_pairs c*log2(c)
    acc = float(np.sum(ctx_totals * np.log2(ctx_totals))
                - np.sum(counts * np.log2(counts)))
    return acc / n


def apply_edit(text: TextLike, edit: Edit) -> bytes:
    """Apply a single-character edit, returning the edited string."""
    data = bytearray(bytes(text))
    kind = edit[0]
    if kind == "delete":
        (_, i) = edit
        if not 0 <= i < len(data):
            raise ValueError("delete position {} out of range".format(i))
        del data[i]
    elif kind == "insert":
        (_, i, c) = edit
        if not 0 <= i <= len(data):
            raise ValueError("insert position {} out of range".format(i))
        data.insert(i, c)
    elif kind == "replace":
        (_, i, c) = edit
        if not 0 <= i < len(data):
            raise ValueError("replace position {} out of range".format(i))
        data[i] = c
    else:
        raise ValueError("unknown edit kind {!r}".format(kind))
    return bytes(data)


def edit_delta_h0(text: TextLike, edit: Edit) -> float:
    """|n*h0(T) - n'*h0(T')| for a single-character edit T -> T'."""
    before = bytes(text)
    after = apply_edit(before, edit)
    return abs(len(before) * h0(before) - len(after) * h0(after))


def edit_delta_h0_bound(kind: str, n: int, sigma: int) -> float:
    """Worst-case bound on ``edit_delta_h0`` for an edit of ``kind``.

    delete:  4*log2(n)   + 3*log2(sigma)   (n >= 1)
    insert:  4*log2(n+1) + 4*log2(sigma)
    replace: 4*log2(n+1) + 3*log2(sigma)
    """
    if kind == "delete":
        if n < 1:
            raise ValueError("delete needs n >= 1")
        return 4 * math.log2(n) + 3 * math.log2(sigma)
    if kind == "insert":
        return 4 * math.log2(n + 1) + 4 * math.log2(sigma)
    if kind == "replace":
        return 4 * math.log2(n + 1) + 3 * math.log2(sigma)
    raise ValueError("unknown edit kind {!r}".format(kind))


def edit_delta_hk_bound(n: int, sigma: int, k: int) -> float:
    """Bound on |n*hk(T) - n'*hk(T')| for one edit: at most 2k+1 context
    buckets change, each by at most one single-character edit's worth."""
    return (2 * k + 1) * (4 * math.log2(n + 1) + 4 * math.log2(sigma))


def blocked_text(text: TextLike, ell: int, sigma: int) -> np.ndarray:
    """Pack each run of ``ell`` characters into one base-``sigma`` value.

    Returns ceil(n/ell) block values; the final partial block is padded
    with symbol 0.  Callers that care about the true length keep ``n``.
    """
    if ell < 1:
        raise ValueError("block length must be >= 1")
    if isinstance(text, (bytes, bytearray, memoryview)):
        arr = np.frombuffer(bytes(text), dtype=np.uint8).astype(np.int64)
    else:
        arr = np.asarray(text, dtype=np.int64)
    n = arr.shape[0]
    nblocks = -(-n // ell) if n else 0
    if nblocks == 0:
        return np.zeros(0, dtype=np.int64)
    padded = np.zeros(nblocks * ell, dtype=np.int64)
    padded[:n] = arr
    values = np.zeros(nblocks, dtype=np.int64)
    for j in range(ell):
        values *= sigma
        values += padded[j::ell]
    return values


def h0_of_counts(counts: Iterable[int]) -> float:
    """h0 of an explicit count vector (used for block-value histograms)."""
    arr = np.asarray(list(counts) if not isinstance(counts, np.ndarray) else counts,
                     dtype=np.float64)
    return _entropy_of_counts(arr, int(arr.sum()))
