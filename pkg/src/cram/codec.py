"""Block codes for the compressed store.

The primary code ranks block values by decreasing frequency and emits, for
rank j, a '0' flag followed by the j-th string of the length-ordered binary
enumeration ['', '0', '1', '00', '01', '10', '11', '000', ...].  Ranks too
large for that to be profitable escape to a '1' flag followed by the raw
block value.  The code is deliberately not prefix-free: every stored code's
exact bit length is known to the caller, so decoding is pure arithmetic and
no decode table is needed.

A canonical Huffman code over the same block alphabet is also provided for
the prototype benchmark mode.
"""

from __future__ import annotations

import heapq
from array import array
from dataclasses import dataclass
from typing import Mapping, Sequence, Tuple, Union

FreqLike = Union[Mapping[int, int], Sequence[int], "array"]


class CorruptionError(Exception):
    """A stored code decoded to something outside the table."""


@dataclass(frozen=True)
class CodecParams:
    """Alphabet size, block length, and the derived code-length cap."""

    sigma: int
    ell: int

    def __post_init__(self):
        if not 2 <= self.sigma <= 256:
            raise ValueError("alphabet size must be in [2, 256]")
        if self.ell < 1:
            raise ValueError("block length must be >= 1")
        if self.ell * (self.sigma - 1).bit_length() > 32:
            raise ValueError("block alphabet too large (raw width > 32 bits)")

    @property
    def char_bits(self) -> int:
        return (self.sigma - 1).bit_length()

    @property
    def raw_bits(self) -> int:
        return self.ell * self.char_bits

    @property
    def cap_bits(self) -> int:
        return 1 + self.raw_bits

    @property
    def num_blocks(self) -> int:
        return self.sigma ** self.ell


def enc(j: int) -> Tuple[int, int]:
    """The j-th binary string (1-based) of ['', '0', '1', '00', ...].

    Returned as (length_bits, bits); the length is floor(log2(j)).
    """
    if j < 1:
        raise ValueError("enumeration rank must be >= 1")
    nbits = j.bit_length() - 1
    return nbits, j - (1 << nbits)


def dec(length_bits: int, bits: int) -> int:
    """Inverse of ``enc``: the rank of a (length, bits) pair."""
    return (1 << length_bits) + bits


def _freq_array(freq: FreqLike, size: int):
    counts = [0] * size
    if isinstance(freq, Mapping):
        items = freq.items()
    elif hasattr(freq, "counts"):  # SymbolHistogram duck type
        items = freq.counts.items()
    else:
        items = enumerate(freq)
    for value, count in items:
        if not 0 <= value < size:
            raise ValueError("block value {} outside alphabet of {}".format(value, size))
        counts[value] = count
    return counts


class CodeTable:
    """Rank-based block code, immutable once built.

    Every block value of the alphabet gets a code, including values never
    observed: those are ranked after all observed values in ascending value
    order, so blocks that first appear mid-stream remain encodable.
    """

    __slots__ = ("params", "len_of", "bits_of", "rank_of", "value_of_rank")

    def __init__(self, params: CodecParams, order: Sequence[int]):
        self.params = params
        size = params.num_blocks
        raw_bits = params.raw_bits
        len_of = array("B", bytes(size))
        bits_of = array("Q", [0]) * size
        rank_of = array("I", [0]) * size
        value_of_rank = array("I", [0]) * size
        for idx, value in enumerate(order):
            j = idx + 1
            rank_of[value] = j
            value_of_rank[idx] = value
            nbits = j.bit_length() - 1
            if nbits <= raw_bits - 1:
                len_of[value] = 1 + nbits
                bits_of[value] = j - (1 << nbits)
            else:
                len_of[value] = 1 + raw_bits
                bits_of[value] = (1 << raw_bits) | value
        self.len_of = len_of
        self.bits_of = bits_of
        self.rank_of = rank_of
        self.value_of_rank = value_of_rank

    def decode_value(self, length_bits: int, bits: int) -> int:
        """Map a stored (length, bits) code back to its block value."""
        flag_shift = length_bits - 1
        if bits >> flag_shift:
            if flag_shift != self.params.raw_bits:
                raise CorruptionError("escape code of width {}".format(length_bits))
            return bits - (1 << flag_shift)
        rank = (1 << flag_shift) | bits
        if rank > self.params.num_blocks:
            raise CorruptionError("decoded rank {} outside table".format(rank))
        return self.value_of_rank[rank - 1]


def build_code_table(freq: FreqLike, params: CodecParams) -> CodeTable:
    """Rank block values by decreasing frequency, ties by ascending value.

    Deterministic: two builds from equal histograms are identical.
    """
    counts = _freq_array(freq, params.num_blocks)
    order = sorted(range(params.num_blocks), key=lambda v: (-counts[v], v))
    return CodeTable(params, order)


def encode_block(table: CodeTable, block: int) -> Tuple[int, int]:
    """(length_bits, bits) of the code for ``block`` under ``table``."""
    return table.len_of[block], table.bits_of[block]


def decode_block(table: CodeTable, length_bits: int, bits: int) -> int:
    """Inverse of ``encode_block`` given the exact stored length."""
    return table.decode_value(length_bits, bits)


class HuffmanTable:
    """Canonical Huffman code over the full block alphabet.

    Built with every weight at least one so unseen blocks stay encodable.
    Decoding uses the canonical first-code-per-length offsets, so it is
    arithmetic like the rank code and needs the stored length too.
    """

    __slots__ = ("params", "len_of", "bits_of", "_first_code", "_first_index",
                 "_by_canonical")

    def __init__(self, params: CodecParams, lengths: Sequence[int]):
        self.params = params
        size = params.num_blocks
        max_len = max(lengths) if size else 0
        if max_len > 64:
            raise ValueError("degenerate weights: code length {}".format(max_len))
        order = sorted(range(size), key=lambda v: (lengths[v], v))
        len_of = array("B", bytes(size))
        bits_of = array("Q", [0]) * size
        first_code = [0] * (max_len + 2)
        first_index = [0] * (max_len + 2)
        by_canonical = array("I", [0]) * size
        code = 0
        prev_len = 0
        for idx, value in enumerate(order):
            length = lengths[value]
            code <<= (length - prev_len)
            if length != prev_len:
                for fill in range(prev_len + 1, length + 1):
                    first_code[fill] = code >> (length - fill) if fill < length else code
                    first_index[fill] = idx
                prev_len = length
            len_of[value] = length
            bits_of[value] = code
            by_canonical[idx] = value
            code += 1
        self.len_of = len_of
        self.bits_of = bits_of
        self._first_code = first_code
        self._first_index = first_index
        self._by_canonical = by_canonical

    def decode_value(self, length_bits: int, bits: int) -> int:
        if length_bits >= len(self._first_code):
            raise CorruptionError("code length {} outside table".format(length_bits))
        idx = self._first_index[length_bits] + (bits - self._first_code[length_bits])
        if not 0 <= idx < self.params.num_blocks:
            raise CorruptionError("canonical index {} outside table".format(idx))
        value = self._by_canonical[idx]
        if self.len_of[value] != length_bits or self.bits_of[value] != bits:
            raise CorruptionError("no code of length {} equals those bits".format(length_bits))
        return value


def build_huffman_table(freq: FreqLike, params: CodecParams) -> HuffmanTable:
    """Canonical Huffman table with add-one smoothing of absent blocks."""
    counts = _freq_array(freq, params.num_blocks)
    size = params.num_blocks
    if size == 1:
        return HuffmanTable(params, [1])
    heap = [(max(counts[v], 1), v, v) for v in range(size)]
    heapq.heapify(heap)
    parent = {}
    next_id = size
    while len(heap) > 1:
        w1, _, n1 = heapq.heappop(heap)
        w2, _, n2 = heapq.heappop(heap)
        parent[n1] = next_id
        parent[n2] = next_id
        heapq.heappush(heap, (w1 + w2, min(n1, n2), next_id))
        next_id += 1
    lengths = [0] * size
    for v in range(size):
        node = v
        depth = 0
        while node in parent:
            node = parent[node]
            depth += 1
        lengths[v] = depth
    return HuffmanTable(params, lengths)
