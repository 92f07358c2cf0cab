"""Compressed byte string supporting insert and delete.

Same entropy coding and table rotation as ``core``, but super-blocks hold
a variable number of blocks (between ``tau`` and ``2*tau``, except the
last) and are stored as whole variable-length records.  Because block
codes are not self-delimiting, every record starts with a header of
per-block code lengths; the header bits count as structural bookkeeping,
not payload.

Super-block starts are marked in a dynamic bit vector: the super-block
ordinal of position i is ``rank1(i+1) - 1`` and its start is a select.
Edits re-derive the touched super-block's blocks from its own start, so
neighbors are only involved when the block count leaves [tau, 2*tau] and
the super-block splits or merges with one of them.

Geometry is frozen at build time from the initial length; when the text
shrinks below half or grows beyond double that anchor the whole structure
is rebuilt in place with fresh parameters.
"""

from __future__ import annotations

import math
from array import array
from dataclasses import dataclass

import numpy as np

from .allocator import SegmentStore, StoreParams
from .bitvec import DynBitVec
from .codec import CodecParams, build_code_table
from .core import SpaceReport, block_length_for


def blocks_per_super(n: int) -> int:
    """Default minimum blocks per super-block: log n / log log n."""
    if n < 16:
        return 2
    lg = math.log2(n)
    return max(2, int(lg / math.log2(lg)))


@dataclass(frozen=True)
class XParams:
    """Frozen geometry; ``n0`` anchors every length-derived choice."""

    n0: int
    sigma: int
    ell: int
    tau: int

    @property
    def len_field_bits(self) -> int:
        cap = 1 + self.ell * (self.sigma - 1).bit_length()
        return cap.bit_length()

    @property
    def max_record_bits(self) -> int:
        cap = 1 + self.ell * (self.sigma - 1).bit_length()
        return 2 * self.tau * (self.len_field_bits + cap)

    @property
    def max_supers(self) -> int:
        # capacity for the doubled length at minimum super-block size
        return max(4, -(-2 * self.n0 // (self.tau * self.ell)) + 2)


class ExtendedCram:
    """Mutable compressed byte string with insert and delete."""

    def __init__(self, text, sigma: int = 256, tau: int | None = None,
                 ell: int | None = None, debug: bool = False):
        self.debug = debug
        self._sigma = sigma
        self._tau_override = tau
        self._ell_override = ell
        self._init_from(bytes(text))

    def _init_from(self, data: bytes) -> None:
        sigma = self._sigma
        if not 2 <= sigma <= 256:
            raise ValueError("alphabet size must be in [2, 256]")
        if data and max(data) >= sigma:
            raise ValueError("symbol outside alphabet of {}".format(sigma))
        n = len(data)
        anchor = max(n, 16)
        ell = self._ell_override or block_length_for(anchor, sigma)
        tau = self._tau_override or blocks_per_super(anchor)
        self.params = XParams(n0=anchor, sigma=sigma, ell=ell, tau=tau)
        self.codec_params = CodecParams(sigma, ell)
        self.n = n

        p = self.params
        freq = np.zeros(self.codec_params.num_blocks, dtype=np.int64)
        per_sb = max(1, (3 * tau) // 2) * ell
        chunks = [data[s:s + per_sb] for s in range(0, n, per_sb)]
        self._slots = list(range(len(chunks)))
        self._free = list(range(p.max_supers - 1, len(chunks) - 1, -1))
        self._slot_nchars = array("i", bytes(4 * p.max_supers))
        self._rewritten = bytearray(p.max_supers)

        entries = []
        lengths = [0] * p.max_supers
        for chunk in chunks:
            for v in self._pack_values(chunk):
                freq[v] += 1
        table = build_code_table(freq, self.codec_params)
        self._tbl_old = table
        self._tbl_new = table
        self._freq_frozen = array("q", freq.tolist())
        self._freq_live = array("q", self._freq_frozen)
        for ordinal, chunk in enumerate(chunks):
            nbits, value = self._encode_entry(chunk, table)
            entries.append((nbits, value))
            lengths[ordinal] = nbits
            self._slot_nchars[ordinal] = len(chunk)
        self.store = SegmentStore(StoreParams(p.max_record_bits, p.max_supers),
                                  lengths)
        for ordinal, (nbits, value) in enumerate(entries):
            self.store.write(ordinal, value)

        bits = bytearray(n)
        pos = 0
        for chunk in chunks:
            bits[pos] = 1
            pos += len(chunk)
        self.boundary = DynBitVec(bits)
        self._phase = 1
        self._x = 0
        self._build_schedule()

    # -- block packing --------------------------------------------------------

    def _pack_values(self, chars) -> list:
        """Base-sigma block values of one super-block, last block padded."""
        sigma, ell = self.params.sigma, self.params.ell
        values = []
        for s in range(0, len(chars), ell):
            piece = chars[s:s + ell]
            v = 0
            for ch in piece:
                v = v * sigma + ch
            for _ in range(ell - len(piece)):
                v *= sigma
            values.append(v)
        return values

    def _unpack_chars(self, values, nchars: int) -> bytearray:
        sigma, ell = self.params.sigma, self.params.ell
        out = bytearray()
        for v in values:
            digits = bytearray(ell)
            for j in range(ell - 1, -1, -1):
                digits[j] = v % sigma
                v //= sigma
            out.extend(digits)
        del out[nchars:]
        return out

    def _encode_entry(self, chars, table):
        """(nbits, value) of a super-block record: length header, then codes."""
        wl = self.params.len_field_bits
        len_of = table.len_of
        bits_of = table.bits_of
        values = self._pack_values(chars)
        acc = 0
        nbits = 0
        for v in values:
            acc = (acc << wl) | len_of[v]
            nbits += wl
        for v in values:
            ln = len_of[v]
            acc = (acc << ln) | bits_of[v]
            nbits += ln
        return nbits, acc

    def _decode_entry(self, slot: int):
        """(chars, values) of the record in ``slot`` under its governing table."""
        nchars = self._slot_nchars[slot]
        k = -(-nchars // self.params.ell)
        wl = self.params.len_field_bits
        total = self.store.len[slot]
        acc = self.store.read(slot)
        table = self._tbl_new if self._rewritten[slot] else self._tbl_old
        decode = table.decode_value
        body = total - k * wl
        lens = []
        head = acc >> body
        for j in range(k - 1, -1, -1):
            lens.append((head >> (j * wl)) & ((1 << wl) - 1))
        values = []
        rest = body
        mask_acc = acc & ((1 << body) - 1)
        for ln in lens:
            rest -= ln
            values.append(decode(ln, (mask_acc >> rest) & ((1 << ln) - 1)))
        return self._unpack_chars(values, nchars), values

    # -- position plumbing -----------------------------------------------------

    def _ordinal_of(self, i: int) -> int:
        return self.boundary.rank1(i + 1) - 1

    def _start_of(self, ordinal: int) -> int:
        return self.boundary.select1(ordinal + 1)

    def _store_entry(self, slot: int, chars) -> None:
        table = self._tbl_new if self._rewritten[slot] else self._tbl_old
        nbits, value = self._encode_entry(chars, table)
        if self.store.len[slot] != nbits:
            self.store.realloc(slot, nbits)
        self.store.write(slot, value)
        self._slot_nchars[slot] = len(chars)

    def _freq_delta(self, old_values, new_values) -> None:
        live = self._freq_live
        for v in old_values:
            live[v] -= 1
        for v in new_values:
            live[v] += 1

    # -- phase machinery ---------------------------------------------------------

    def _build_schedule(self) -> None:
        slots = sorted(self._slots, key=lambda s: self.store.len[s])
        self._schedule = array("i", slots)
        self._sched_pos = 0
        self._phase_len = max(1, len(slots))

    def _schedule_step(self) -> None:
        schedule = self._schedule
        sp = self._sched_pos
        if sp < len(schedule):
            slot = schedule[sp]
            self._sched_pos = sp + 1
            if not self._rewritten[slot] and self.store.len[slot]:
                self._migrate(slot)

    def _migrate(self, slot: int) -> None:
        chars, _ = self._decode_entry(slot)
        self._rewritten[slot] = 1
        self._store_entry(slot, chars)

    def _after_edit(self) -> None:
        self._x += 1
        if self._x >= self._phase_len:
            self.advance_phase()
        if self.debug:
            self.check_invariants()
        n, n0 = self.n, self.params.n0
        if n and (n > 2 * n0 or n < n0 // 2):
            self._rebuild()

    def advance_phase(self) -> None:
        """Rotate tables; every live super-block moves to the newer table."""
        for slot in self._slots:
            if not self._rewritten[slot]:
                self._migrate(slot)
        self._tbl_old = self._tbl_new
        self._tbl_new = build_code_table(self._freq_frozen, self.codec_params)
        self._freq_frozen = array("q", self._freq_live)
        self._rewritten = bytearray(self.params.max_supers)
        self._build_schedule()
        self._phase += 1
        self._x = 0

    def _rebuild(self) -> None:
        self._init_from(self.bytes())

    # -- public operations ----------------------------------------------------------

    def access(self, i: int) -> bytes:
        """The ``ell`` characters starting at position i."""
        ell = self.params.ell
        if not 0 <= i <= self.n - ell:
            raise ValueError("read of {} chars at {} leaves [0, {})".format(
                ell, i, self.n))
        return self.read(i, ell)

    def read(self, i: int, length: int) -> bytes:
        if length < 0 or not 0 <= i <= self.n - length:
            raise ValueError("read of {} chars at {} leaves [0, {})".format(
                length, i, self.n))
        if length == 0:
            return b""
        ordinal = self._ordinal_of(i)
        start = self._start_of(ordinal)
        out = bytearray()
        local = i - start
        while len(out) < length:
            chars, _ = self._decode_entry(self._slots[ordinal])
            out.extend(chars[local:])
            local = 0
            ordinal += 1
        return bytes(out[:length])

    def bytes(self) -> bytes:
        """The whole current text."""
        out = bytearray()
        for slot in self._slots:
            chars, _ = self._decode_entry(slot)
            out.extend(chars)
        return bytes(out)

    def replace(self, i: int, c: int) -> None:
        if not 0 <= i < self.n:
            raise ValueError("position {} outside [0, {})".format(i, self.n))
        if not 0 <= c < self.params.sigma:
            raise ValueError("symbol {} outside alphabet".format(c))
        self._schedule_step()
        ordinal = self._ordinal_of(i)
        slot = self._slots[ordinal]
        start = self._start_of(ordinal)
        chars, old_values = self._decode_entry(slot)
        chars[i - start] = c
        self._store_entry(slot, chars)
        self._freq_delta(old_values, self._pack_values(chars))
        self._after_edit()

    def insert(self, i: int, c: int) -> None:
        """Insert symbol ``c`` so that it becomes the character at position i."""
        if not 0 <= i <= self.n:
            raise ValueError("insert position {} outside [0, {}]".format(i, self.n))
        if not 0 <= c < self.params.sigma:
            raise ValueError("symbol {} outside alphabet".format(c))
        if self.n == 0:
            slot = self._free.pop()
            self._slots.append(slot)
            self._rewritten[slot] = 1
            self._store_entry(slot, bytes([c]))
            self._freq_delta((), self._pack_values(bytes([c])))
            self.boundary.insert_bit(0, 1)
            self.n = 1
            self._after_edit()
            return
        self._schedule_step()
        if i == self.n:
            ordinal = len(self._slots) - 1
        else:
            ordinal = self._ordinal_of(i)
        slot = self._slots[ordinal]
        start = self._start_of(ordinal)
        local = i - start
        chars, old_values = self._decode_entry(slot)
        chars.insert(local, c)
        self.boundary.insert_bit(i + 1 if local == 0 else i, 0)
        self.n += 1
        tau, ell = self.params.tau, self.params.ell
        nblocks = -(-len(chars) // ell)
        if nblocks > 2 * tau:
            left_chars = (-(-nblocks // 2)) * ell
            left, right = chars[:left_chars], chars[left_chars:]
            rslot = self._free.pop()
            self._rewritten[rslot] = self._rewritten[slot]
            self._store_entry(slot, left)
            self._store_entry(rslot, right)
            self._slots.insert(ordinal + 1, rslot)
            self.boundary.set_bit(start + left_chars, 1)
            self._freq_delta(old_values,
                             self._pack_values(left) + self._pack_values(right))
        else:
            self._store_entry(slot, chars)
            self._freq_delta(old_values, self._pack_values(chars))
        self._after_edit()

    def delete(self, i: int) -> None:
        """Remove the character at position i."""
        if not 0 <= i < self.n:
            raise ValueError("position {} outside [0, {})".format(i, self.n))
        self._schedule_step()
        ordinal = self._ordinal_of(i)
        slot = self._slots[ordinal]
        start = self._start_of(ordinal)
        local = i - start
        chars, old_values = self._decode_entry(slot)
        del chars[local]
        if not chars:
            self.store.realloc(slot, 0)
            self._slot_nchars[slot] = 0
            self._rewritten[slot] = 0
            self._free.append(slot)
            del self._slots[ordinal]
            self.boundary.delete_bit(i)
            self._freq_delta(old_values, ())
            self.n -= 1
            self._after_edit()
            return
        self.boundary.delete_bit(i + 1 if local == 0 else i)
        self.n -= 1
        tau, ell = self.params.tau, self.params.ell
        nblocks = -(-len(chars) // ell)
        if nblocks >= tau or len(self._slots) == 1:
            self._store_entry(slot, chars)
            self._freq_delta(old_values, self._pack_values(chars))
            self._after_edit()
            return
        # merge with the right neighbor when there is one, else the left
        if ordinal + 1 < len(self._slots):
            left_ord = ordinal
            merged_start = start
        else:
            left_ord = ordinal - 1
            merged_start = self._start_of(left_ord)
        lslot = self._slots[left_ord]
        rslot = self._slots[left_ord + 1]
        if lslot == slot:
            lchars, lvals = chars, None
            rchars, rvals = self._decode_entry(rslot)
        else:
            lchars, lvals = self._decode_entry(lslot)
            rchars, rvals = chars, None
        removed = old_values
        kept = lvals if lvals is not None else rvals
        merged = bytearray(lchars) + rchars
        # the right partner's start stops being a boundary
        self.boundary.set_bit(self._start_of(left_ord + 1), 0)
        self._rewritten[lslot] = 1
        self._rewritten[rslot] = 1
        mblocks = -(-len(merged) // ell)
        if mblocks > 2 * tau:
            left_chars = (-(-mblocks // 2)) * ell
            left, right = merged[:left_chars], merged[left_chars:]
            self._store_entry(lslot, left)
            self._store_entry(rslot, right)
            self.boundary.set_bit(merged_start + left_chars, 1)
            new_values = self._pack_values(left) + self._pack_values(right)
        else:
            self._store_entry(lslot, merged)
            self.store.realloc(rslot, 0)
            self._slot_nchars[rslot] = 0
            self._rewritten[rslot] = 0
            self._free.append(rslot)
            del self._slots[left_ord + 1]
            new_values = self._pack_values(merged)
        self._freq_delta(list(removed) + list(kept), new_values)
        self._after_edit()

    # -- reporting and integrity ---------------------------------------------------

    def measure(self) -> SpaceReport:
        store = self.store
        wl = self.params.len_field_bits
        ell = self.params.ell
        header_bits = sum(-(-self._slot_nchars[s] // ell) * wl
                          for s in self._slots)
        stored = int(np.frombuffer(store.len, dtype=np.int32).sum())
        payload = stored - header_bits
        size = self.codec_params.num_blocks
        rank_bits = max(1, (size - 1).bit_length())
        nsuper = len(self._slots)
        sb_index_bits = max(1, (max(nsuper, 1) - 1).bit_length())
        table_bits = (2 * size * rank_bits
                      + 2 * size * 64
                      + self.params.max_supers
                      + self.n)  # boundary bit vector content
        overhead = (store.arena_bits - payload + store.index_bits()
                    + header_bits
                    + len(self._schedule) * sb_index_bits)
        total = payload + table_bits
        return SpaceReport(n=self.n, payload_bits=payload,
                           table_bits=table_bits,
                           alloc_overhead_bits=overhead,
                           total_bits=total,
                           bpc=total / self.n if self.n else 0.0)

    def check_invariants(self, full_store: bool = False) -> None:
        assert self.boundary.ones == len(self._slots), "boundary ones != supers"
        assert len(self.boundary) == self.n, "boundary length != n"
        tau, ell = self.params.tau, self.params.ell
        total = 0
        freq = np.zeros(self.codec_params.num_blocks, dtype=np.int64)
        for ordinal, slot in enumerate(self._slots):
            nchars = self._slot_nchars[slot]
            assert nchars > 0, "empty super-block in the ordinal list"
            assert self._start_of(ordinal) == total, "boundary drift"
            nblocks = -(-nchars // ell)
            if len(self._slots) > 1 and ordinal < len(self._slots) - 1:
                assert tau <= nblocks <= 2 * tau, \
                    "super-block {} holds {} blocks".format(ordinal, nblocks)
            else:
                assert nblocks <= 2 * tau, "oversized super-block"
            chars, values = self._decode_entry(slot)
            assert len(chars) == nchars
            table = self._tbl_new if self._rewritten[slot] else self._tbl_old
            want = sum(table.len_of[v] for v in values) \
                + nblocks * self.params.len_field_bits
            assert self.store.len[slot] == want, \
                "stored size {} != coded size {}".format(self.store.len[slot], want)
            for v in values:
                freq[v] += 1
            total += nchars
        assert total == self.n, "super-block sizes sum to {}".format(total)
        live = np.frombuffer(self._freq_live, dtype=np.int64)
        assert np.array_equal(freq, live), "live histogram out of sync"
        if full_store:
            self.store.check_invariants()
