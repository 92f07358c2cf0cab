"""Compressed random-access memory over a byte string.

The text is split into fixed blocks of ``ell`` characters; each block is
entropy-coded by rank (see ``codec``) and stored as one variable-length
record in a ``SegmentStore``.  Reads decode at most two blocks, so they
cost O(1) regardless of text size.

In-place writes keep compression adaptive without ever re-encoding the
whole text at once.  Two code tables are live at any time: an old one and
a new one.  Writes are counted into phases; during a phase every
super-block (a fixed group of blocks) is re-encoded from the old table to
the new exactly once, shortest first, driven by one schedule step per
write.  A per-super-block bitmap records which table governs it.  When the
phase ends the tables rotate: the new table becomes the old one and a
fresh table is built from the block histogram frozen at the phase start.
A second, live histogram tracks every write so the next frozen snapshot is
always exact.

Space reporting: ``measure`` counts the compressed image (payload plus
code tables, histograms, and phase bookkeeping) as ``total_bits``; the
allocator's structural bookkeeping (segment headers, id tags, location
tables) is reported separately as ``alloc_overhead_bits``.
"""

from __future__ import annotations

import math
from array import array
from dataclasses import dataclass

import numpy as np

from .allocator import SegmentStore, StoreParams
from .codec import CodecParams, CodeTable, build_code_table
from .entropy import blocked_text

_MAX_BLOCK_ALPHABET = 1 << 22


def block_length_for(n: int, sigma: int) -> int:
    """Default block length: half the base-sigma word length of n."""
    if n <= 1:
        return 1
    return max(1, int(0.5 * math.log2(n) / math.log2(sigma) + 1e-9))


@dataclass(frozen=True)
class CramParams:
    """Frozen geometry of one store instance."""

    n: int
    sigma: int
    ell: int
    spb: int          # blocks per super-block
    epsilon: float

    @property
    def nblocks(self) -> int:
        return -(-self.n // self.ell) if self.n else 0

    @property
    def nsuper(self) -> int:
        return -(-self.nblocks // self.spb) if self.nblocks else 0

    @property
    def phase_len(self) -> int:
        """Writes per phase."""
        return max(1, math.ceil(self.epsilon * self.nblocks))


@dataclass
class SpaceReport:
    """Size breakdown in bits; ``bpc`` is total_bits per text character."""

    n: int
    payload_bits: int
    table_bits: int
    alloc_overhead_bits: int
    total_bits: int
    bpc: float

    def __str__(self):
        return ("n={} payload={} tables={} total={} bpc={:.4f} "
                "(allocator bookkeeping: {} bits)").format(
                    self.n, self.payload_bits, self.table_bits,
                    self.total_bits, self.bpc, self.alloc_overhead_bits)


class PhaseView:
    """Read-only peek at the rotation state, for tests and debugging."""

    __slots__ = ("phase", "ops_in_phase", "phase_len", "rewritten",
                 "table_old", "table_new", "freq_frozen", "freq_live")

    def __init__(self, cram: "Cram"):
        self.phase = cram._phase
        self.ops_in_phase = cram._x
        self.phase_len = cram.params.phase_len
        self.rewritten = bytes(cram._rewritten)
        self.table_old = cram._tbl_old
        self.table_new = cram._tbl_new
        self.freq_frozen = cram._freq_frozen
        self.freq_live = cram._freq_live


class Cram:
    """Mutable compressed byte string with O(1) reads.

    ``epsilon`` trades write cost for adaptation lag: each write re-encodes
    one super-block of ceil(1/epsilon) blocks.  With ``rotate=False`` the
    initial code tables govern forever (the single-table mode used as a
    baseline in the benchmarks).
    """

    def __init__(self, text, sigma: int = 256, epsilon: float = 1 / 16,
                 ell: int | None = None, rotate: bool = True,
                 debug: bool = False, debug_interval: int = 1000):
        if not 2 <= sigma <= 256:
            raise ValueError("alphabet size must be in [2, 256]")
        if not 0 < epsilon <= 1:
            raise ValueError("epsilon must be in (0, 1]")
        data = np.frombuffer(bytes(text), dtype=np.uint8)
        n = int(data.shape[0])
        if n == 0:
            raise ValueError("empty text")
        if int(data.max()) >= sigma:
            raise ValueError("symbol {} outside alphabet of {}".format(
                int(data.max()), sigma))
        if ell is None:
            ell = block_length_for(n, sigma)
        if sigma ** ell > _MAX_BLOCK_ALPHABET:
            raise ValueError("block alphabet sigma**ell too large")
        spb = math.ceil(1 / epsilon)
        self.params = CramParams(n=n, sigma=sigma, ell=ell, spb=spb,
                                 epsilon=epsilon)
        self.rotate = rotate
        self.debug = debug
        self.debug_interval = debug_interval
        self._ops_since_check = 0

        cp = CodecParams(sigma, ell)
        self.codec_params = cp
        nblocks = self.params.nblocks
        nsuper = self.params.nsuper
        values = blocked_text(data, ell, sigma)
        freq = np.bincount(values, minlength=cp.num_blocks)

        table = self._build_table(freq)
        self._tbl_old = table
        self._tbl_new = table
        self._freq_frozen = array("q", freq.tolist())
        self._freq_live = array("q", self._freq_frozen)

        lengths = np.frombuffer(table.len_of, dtype=np.uint8)[values]
        self.store = SegmentStore(StoreParams(cp.cap_bits, nblocks),
                                  lengths.tolist())
        self._write_all(values, table)

        sb_bits = np.add.reduceat(lengths.astype(np.int64),
                                  np.arange(0, nblocks, spb))
        self._sb_bits = array("q", sb_bits.tolist())
        self._rewritten = bytearray(nsuper)
        self._phase = 1
        self._x = 0
        self._build_schedule()

        self._pow = [sigma ** (ell - 1 - j) for j in range(ell)]
        self._chunk_of = self._build_chunks(cp)

    # -- construction helpers ----------------------------------------------

    def _build_table(self, freq):
        return build_code_table(freq, self.codec_params)

    def _write_all(self, values, table) -> None:
        bits_of = table.bits_of
        write = self.store.write
        for i, v in enumerate(values.tolist()):
            write(i, bits_of[v])

    @staticmethod
    def _build_chunks(cp: CodecParams):
        vals = np.arange(cp.num_blocks, dtype=np.int64)
        cols = []
        rest = vals
        for _ in range(cp.ell):
            rest, digit = np.divmod(rest, cp.sigma)
            cols.append(digit)
        matrix = np.stack(cols[::-1], axis=1).astype(np.uint8)
        blob = matrix.tobytes()
        ell = cp.ell
        return [blob[k * ell:(k + 1) * ell] for k in range(cp.num_blocks)]

    def _build_schedule(self) -> None:
        nsuper = self.params.nsuper
        if nsuper:
            lens = np.frombuffer(self._sb_bits, dtype=np.int64)
            order = np.argsort(lens, kind="stable").astype(np.int32)
            self._schedule = array("i", order.tobytes())
        else:
            self._schedule = array("i")
        self._sched_pos = 0

    # -- basic queries -------------------------------------------------------

    @property
    def n(self) -> int:
        return self.params.n

    @property
    def ell(self) -> int:
        return self.params.ell

    @property
    def phase(self) -> int:
        return self._phase

    @property
    def phase_state(self) -> PhaseView:
        return PhaseView(self)

    def _decode_block(self, blk: int) -> int:
        ln = self.store.len[blk]
        bits = self.store.read(blk)
        table = self._tbl_new if self._rewritten[blk // self.params.spb] \
            else self._tbl_old
        return table.decode_value(ln, bits)

    def access(self, i: int) -> bytes:
        """The ``ell`` characters starting at position i."""
        ell = self.params.ell
        if not 0 <= i <= self.params.n - ell:
            raise ValueError("read of {} chars at {} leaves [0, {})".format(
                ell, i, self.params.n))
        blk, off = divmod(i, ell)
        chunk = self._chunk_of[self._decode_block(blk)]
        if off == 0:
            return chunk
        tail = self._chunk_of[self._decode_block(blk + 1)]
        return chunk[off:] + tail[:off]

    def read(self, i: int, length: int) -> bytes:
        """Arbitrary-length substring (stitches whole-block decodes)."""
        n, ell = self.params.n, self.params.ell
        if length < 0 or not 0 <= i <= n - length:
            raise ValueError("read of {} chars at {} leaves [0, {})".format(
                length, i, n))
        if length == 0:
            return b""
        first = i // ell
        last = (i + length - 1) // ell
        chunk_of = self._chunk_of
        dec = self._decode_block
        parts = [chunk_of[dec(b)] for b in range(first, last + 1)]
        blob = b"".join(parts)
        start = i - first * ell
        return blob[start:start + length]

    # -- writes ---------------------------------------------------------------

    def replace(self, i: int, c: int) -> None:
        """Overwrite the character at position i with symbol ``c``."""
        params = self.params
        if not 0 <= i < params.n:
            raise ValueError("position {} outside [0, {})".format(i, params.n))
        if not 0 <= c < params.sigma:
            raise ValueError("symbol {} outside alphabet".format(c))
        if self.rotate:
            sp = self._sched_pos
            if sp < len(self._schedule):
                sched_sb = self._schedule[sp]
                self._sched_pos = sp + 1
                if not self._rewritten[sched_sb]:
                    # re-encoding is the identity when both tables coincide
                    if self._tbl_old is not self._tbl_new:
                        self._reencode_super_block(sched_sb, self._tbl_old,
                                                   self._tbl_new)
                    self._rewritten[sched_sb] = 1
        self._apply_replace(i, c)
        self._x += 1
        if self.rotate and self._x == params.phase_len:
            self.advance_phase()

    def _apply_replace(self, i: int, c: int) -> None:
        """The table-governed single-character overwrite itself."""
        params = self.params
        ell = params.ell
        blk = i // ell
        sb = blk // params.spb
        table = self._tbl_new if self._rewritten[sb] else self._tbl_old
        store = self.store
        ln = store.len[blk]
        # inline single-segment read (the common case)
        off = store.pos[blk]
        if off + ln <= store._window:
            base = store.slot_addr[store.seg_slot[blk]] * store._segbits \
                + store._data_off + off
            end = base + ln
            last = (end + 7) >> 3
            bits = (int.from_bytes(store.arena[base >> 3:last], "big")
                    >> ((last << 3) - end)) & ((1 << ln) - 1)
        else:
            bits = store._window_read(store.seg_slot[blk], off, ln)
        if type(table) is CodeTable:
            flag = ln - 1
            if bits >> flag:
                val = bits - (1 << flag)
            else:
                val = table.value_of_rank[(1 << flag) + bits - 1]
        else:
            val = table.decode_value(ln, bits)
        pw = self._pow[i - blk * ell]
        old_c = (val // pw) % params.sigma
        if c != old_c:
            nval = val + (c - old_c) * pw
            self._freq_live[val] -= 1
            self._freq_live[nval] += 1
            nln = table.len_of[nval]
            if nln != ln:
                self._sb_bits[sb] += nln - ln
            store.rewrite(blk, nln, table.bits_of[nval])
        if self.debug:
            self._debug_after_op(blk, sb)

    def write_range(self, i: int, data) -> None:
        """Replace ``len(data)`` characters starting at i, one by one."""
        replace = self.replace
        for k, c in enumerate(bytes(data)):
            replace(i + k, c)

    def _reencode_super_block(self, sb: int, tbl_from, tbl_to) -> None:
        """Migrate one super-block between tables (values unchanged)."""
        params = self.params
        start = sb * params.spb
        stop = min(start + params.spb, params.nblocks)
        store = self.store
        slen = store.len
        spos = store.pos
        sslot = store.seg_slot
        slot_addr = store.slot_addr
        arena = store.arena
        window = store._window
        segbits = store._segbits
        data_off = store._data_off
        window_read = store._window_read
        rewrite = store.rewrite
        arithmetic = type(tbl_from) is CodeTable
        decode = tbl_from.decode_value
        value_of_rank = getattr(tbl_from, "value_of_rank", None)
        len_to = tbl_to.len_of
        bits_to = tbl_to.bits_of
        delta = 0
        for blk in range(start, stop):
            ln = slen[blk]
            off = spos[blk]
            if off + ln <= window:
                base = slot_addr[sslot[blk]] * segbits + data_off + off
                end = base + ln
                last = (end + 7) >> 3
                bits = (int.from_bytes(arena[base >> 3:last], "big")
                        >> ((last << 3) - end)) & ((1 << ln) - 1)
            else:
                bits = window_read(sslot[blk], off, ln)
            if arithmetic:
                flag = ln - 1
                if bits >> flag:
                    val = bits - (1 << flag)
                else:
                    val = value_of_rank[(1 << flag) + bits - 1]
            else:
                val = decode(ln, bits)
            nln = len_to[val]
            if nln != ln:
                delta += nln - ln
            rewrite(blk, nln, bits_to[val])
        if delta:
            self._sb_bits[sb] += delta

    def advance_phase(self) -> None:
        """Rotate the code tables at a phase boundary.

        Any super-blocks the schedule did not reach are migrated first so
        the whole text is on the newer table before it becomes the old one.
        """
        params = self.params
        if self._x != params.phase_len:
            raise ValueError("phase has {} of {} writes".format(
                self._x, params.phase_len))
        schedule = self._schedule
        rewritten = self._rewritten
        migrate = self._tbl_old is not self._tbl_new
        while self._sched_pos < len(schedule):
            sb = schedule[self._sched_pos]
            self._sched_pos += 1
            if not rewritten[sb]:
                if migrate:
                    self._reencode_super_block(sb, self._tbl_old, self._tbl_new)
                rewritten[sb] = 1
        self._tbl_old = self._tbl_new
        built = self._build_table(self._freq_frozen)
        # keep the old object when the rebuilt table encodes identically,
        # so unchanged-table phases skip their no-op migrations
        if not (built.len_of == self._tbl_new.len_of
                and built.bits_of == self._tbl_new.bits_of):
            self._tbl_new = built
        self._freq_frozen = array("q", self._freq_live)
        self._rewritten = bytearray(params.nsuper)
        self._build_schedule()
        self._phase += 1
        self._x = 0

    # -- reporting -------------------------------------------------------------

    def measure(self) -> SpaceReport:
        params = self.params
        store = self.store
        payload = int(np.frombuffer(store.len, dtype=np.int32).sum())
        size = self.codec_params.num_blocks
        rank_bits = max(1, (size - 1).bit_length())
        table_bits = (2 * size * rank_bits          # two live rank orders
                      + 2 * size * 64               # frozen + live histograms
                      + params.nsuper)              # governing-table bitmap
        # navigation state (locations, segment headers, rewrite schedule)
        # is bookkeeping, not compressed content
        sb_index_bits = max(1, (max(params.nsuper, 1) - 1).bit_length())
        overhead = (store.arena_bits - payload + store.index_bits()
                    + len(self._schedule) * sb_index_bits)
        total = payload + table_bits
        return SpaceReport(n=params.n, payload_bits=payload,
                           table_bits=table_bits,
                           alloc_overhead_bits=overhead,
                           total_bits=total, bpc=total / params.n)

    # -- integrity ---------------------------------------------------------------

    def _debug_after_op(self, blk: int, sb: int) -> None:
        # cheap local form of the two phase invariants, run after every op
        table = self._tbl_new if self._rewritten[sb] else self._tbl_old
        ln = self.store.len[blk]
        val = table.decode_value(ln, self.store.read(blk))
        assert table.len_of[val] == ln, \
            "block {} stored in {} bits, governing table says {}".format(
                blk, ln, table.len_of[val])
        self._ops_since_check += 1
        if self._ops_since_check >= self.debug_interval:
            self._ops_since_check = 0
            self.check_invariants()

    def decode_values(self) -> np.ndarray:
        """Every block value under its governing table (full scan)."""
        params = self.params
        out = np.empty(params.nblocks, dtype=np.int64)
        store = self.store
        slen = store.len
        read = store.read
        dec_old = self._tbl_old.decode_value
        dec_new = self._tbl_new.decode_value
        rewritten = self._rewritten
        spb = params.spb
        for blk in range(params.nblocks):
            dec = dec_new if rewritten[blk // spb] else dec_old
            out[blk] = dec(slen[blk], read(blk))
        return out

    def check_invariants(self, full_store: bool = False) -> None:
        """Global phase invariants; O(number of blocks)."""
        params = self.params
        values = self.decode_values()
        # governing-table consistency: stored lengths match table lengths
        len_old = np.frombuffer(self._tbl_old.len_of, dtype=np.uint8)
        len_new = np.frombuffer(self._tbl_new.len_of, dtype=np.uint8)
        stored = np.frombuffer(self.store.len, dtype=np.int32)
        rew = np.frombuffer(self._rewritten, dtype=np.uint8)
        governs = np.repeat(rew.astype(bool), params.spb)[:params.nblocks]
        want = np.where(governs, len_new[values], len_old[values])
        bad = np.nonzero(stored != want)[0]
        assert bad.size == 0, "block {} stored length mismatch".format(bad[:4])
        # live histogram tracks the current text exactly
        freq = np.bincount(values, minlength=self.codec_params.num_blocks)
        live = np.frombuffer(self._freq_live, dtype=np.int64)
        assert np.array_equal(freq, live), "live histogram out of sync"
        # per-super-block encoded sizes
        sb_sizes = np.add.reduceat(stored.astype(np.int64),
                                   np.arange(0, params.nblocks, params.spb))
        cached = np.frombuffer(self._sb_bits, dtype=np.int64)
        assert np.array_equal(sb_sizes, cached), "super-block size cache stale"
        if full_store:
            self.store.check_invariants()

    def _corrupt_bit(self, bit_index: int) -> None:
        # test hook: flip one stored payload bit
        self.store.arena[bit_index >> 3] ^= 0x80 >> (bit_index & 7)
