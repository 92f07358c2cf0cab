"""Compressed random-access memory: a dynamic byte string stored near its
empirical entropy, with O(1) reads, amortized-O(1) in-place writes under
rotating entropy-code tables, and an extended engine adding insert/delete.
"""

from .allocator import SegmentStore, StoreParams
from .bitvec import DynBitVec
from .codec import (CodecParams, CodeTable, HuffmanTable, build_code_table,
                    build_huffman_table, dec, decode_block, enc, encode_block)
from .core import Cram, CramParams, SpaceReport
from .entropy import (ContextPartition, SymbolHistogram, blocked_text,
                      edit_delta_h0, edit_delta_h0_bound, edit_delta_hk_bound,
                      h0, hk)
from .extended import ExtendedCram
from .prototype import HuffmanCram
from .snapshot import from_bytes, load, save, to_bytes

__version__ = "0.1.0"

__all__ = [
    "Cram", "CramParams", "ExtendedCram", "HuffmanCram", "SpaceReport",
    "SegmentStore", "StoreParams", "DynBitVec",
    "CodecParams", "CodeTable", "HuffmanTable",
    "build_code_table", "build_huffman_table",
    "enc", "dec", "encode_block", "decode_block",
    "SymbolHistogram", "ContextPartition",
    "h0", "hk", "blocked_text",
    "edit_delta_h0", "edit_delta_h0_bound", "edit_delta_hk_bound",
    "to_bytes", "from_bytes", "save", "load",
]
