"""Binary snapshot of a store, for saving and restoring across processes.

Layout (all integers little-endian, bit fields MSB-first within bytes):

    magic "CRAM1", version byte, mode byte (0 fixed, 1 variable supers),
    geometry header, the two live code tables (as rank-order value lists),
    the frozen and live block histograms, the governing-table bitmap, the
    remaining rewrite schedule, mode-specific state, then the allocator:
    geometry, class heads and stream fronts, slot table, free slots, and
    the raw arena.

Per-record locations are not stored: the arena's chains are self
describing (every record is tagged with its id), so loading rescans them.
"""

from __future__ import annotations

import struct
import sys
from array import array

import numpy as np

from .allocator import SegmentStore, StoreParams
from .bitvec import DynBitVec
from .codec import CodecParams, CodeTable
from .core import Cram, CramParams
from .extended import ExtendedCram, XParams

MAGIC = b"CRAM1"
VERSION = 1


def _le(arr: array) -> bytes:
    if sys.byteorder == "little":
        return arr.tobytes()
    swapped = array(arr.typecode, arr)
    swapped.byteswap()
    return swapped.tobytes()


def _from_le(typecode: str, raw: bytes) -> array:
    arr = array(typecode, raw)
    if sys.byteorder != "little":
        arr.byteswap()
    return arr


def _pack_bits(flags) -> bytes:
    out = bytearray((len(flags) + 7) // 8)
    for i, f in enumerate(flags):
        if f:
            out[i >> 3] |= 0x80 >> (i & 7)
    return bytes(out)


def _unpack_bits(raw: bytes, count: int) -> bytearray:
    out = bytearray(count)
    for i in range(count):
        if raw[i >> 3] & (0x80 >> (i & 7)):
            out[i] = 1
    return out


class _Writer:
    def __init__(self):
        self.parts = []

    def u8(self, v):
        self.parts.append(struct.pack("<B", v))

    def u16(self, v):
        self.parts.append(struct.pack("<H", v))

    def u32(self, v):
        self.parts.append(struct.pack("<I", v))

    def u64(self, v):
        self.parts.append(struct.pack("<Q", v))

    def f64(self, v):
        self.parts.append(struct.pack("<d", v))

    def blob(self, raw: bytes):
        self.u64(len(raw))
        self.parts.append(raw)

    def getvalue(self) -> bytes:
        return b"".join(self.parts)


class _Reader:
    def __init__(self, raw: bytes):
        self.raw = raw
        self.pos = 0

    def _take(self, fmt):
        size = struct.calcsize(fmt)
        vals = struct.unpack_from(fmt, self.raw, self.pos)
        self.pos += size
        return vals[0]

    def u8(self):
        return self._take("<B")

    def u16(self):
        return self._take("<H")

    def u32(self):
        return self._take("<I")

    def u64(self):
        return self._take("<Q")

    def f64(self):
        return self._take("<d")

    def blob(self) -> bytes:
        size = self.u64()
        raw = self.raw[self.pos:self.pos + size]
        if len(raw) != size:
            raise ValueError("snapshot truncated")
        self.pos += size
        return raw


def _dump_store(w: _Writer, store: SegmentStore) -> None:
    store._sync_fields()
    sp = store.params
    w.u32(sp.b)
    w.u64(sp.m)
    w.u32(sp.p)
    w.u64(store._hw)
    w.blob(_le(store._heads))
    w.blob(_le(store._foffs))
    w.blob(_le(store.slot_addr))
    w.blob(_le(array("i", store._free_slots)))
    used = (store._hw * sp.seg_bits + 7) // 8
    w.blob(bytes(store.arena[:used]))


def _load_store(r: _Reader) -> SegmentStore:
    b = r.u32()
    m = r.u64()
    p = r.u32()
    hw = r.u64()
    heads = _from_le("i", r.blob())
    foffs = _from_le("i", r.blob())
    slot_addr = _from_le("i", r.blob())
    free_slots = list(_from_le("i", r.blob()))
    arena = bytearray(r.blob())

    params = StoreParams(b, m, p)
    store = SegmentStore.__new__(SegmentStore)
    store.params = params
    store._b = b
    store._p = p
    store._segbits = params.seg_bits
    store._window = params.window
    store._off_bits = (params.seg_bits - 1).bit_length()
    store._data_off = 3 * p
    store.seg_slot = array("i", bytes(4 * m))
    store.pos = array("H", bytes(2 * m))
    store.len = array("i", bytes(4 * m))
    store.slot_addr = slot_addr
    store._free_slots = free_slots
    store._heads = heads
    store._foffs = foffs
    store._hw = hw
    cap = max(hw, 1)
    store._cap = cap
    need = (cap * params.seg_bits + 7) // 8
    if len(arena) < need:
        arena.extend(bytes(need - len(arena)))
    store.arena = arena
    store._slot_of = array("i", bytes(4 * hw))
    freed = set(free_slots)
    for slot in range(1, len(slot_addr)):
        addr = slot_addr[slot]
        if 0 <= addr < hw and slot not in freed:
            store._slot_of[addr] = slot
    # header fields were synced at dump time; rebuild the link tables
    from .bits import read_bits
    nslots = len(slot_addr)
    store._pred_of = array("i", bytes(4 * nslots))
    store._succ_of = array("i", bytes(4 * nslots))
    for addr in range(hw):
        slot = store._slot_of[addr]
        base = addr * params.seg_bits
        store._pred_of[slot] = read_bits(arena, base, p)
        store._succ_of[slot] = read_bits(arena, base + p, p)
    store._tagged_bits = 0
    _rescan_locations(store)
    return store


def _rescan_locations(store: SegmentStore) -> None:
    """Rebuild per-record locations by walking every class chain."""
    p = store._p
    window = store._window
    tagged = 0
    for x in range(1, store._b + 1):
        head = store._heads[x]
        if not head:
            continue
        chain = []
        slot = head
        while slot:
            chain.append(slot)
            slot = store._succ_of[slot]
        stream_bits = len(chain) * window - store._foffs[x]
        if stream_bits % (p + x):
            raise ValueError("snapshot arena: ragged class {} stream".format(x))
        cursor = store._foffs[x]
        for _ in range(stream_bits // (p + x)):
            rec = store._window_read(chain[cursor // window], cursor % window, p)
            if not 0 <= rec < store.params.m:
                raise ValueError("snapshot arena: bad id tag {}".format(rec))
            data_at = cursor + p
            store.seg_slot[rec] = chain[data_at // window]
            store.pos[rec] = data_at % window
            store.len[rec] = x
            cursor += p + x
            tagged += p + x
    store._tagged_bits = tagged


def _dump_tables(w: _Writer, cram) -> None:
    for table in (cram._tbl_old, cram._tbl_new):
        w.blob(_le(table.value_of_rank))
    for hist in (cram._freq_frozen, cram._freq_live):
        w.blob(_le(hist))


def _load_tables(r: _Reader, cp: CodecParams):
    orders = [_from_le("I", r.blob()) for _ in range(2)]
    hists = [array("q", _from_le("q", r.blob())) for _ in range(2)]
    tables = [CodeTable(cp, order) for order in orders]
    return tables, hists


def to_bytes(obj) -> bytes:
    """Serialize a ``Cram`` or ``ExtendedCram``."""
    w = _Writer()
    w.parts.append(MAGIC)
    w.u8(VERSION)
    if isinstance(obj, Cram):
        w.u8(0)
        p = obj.params
        w.u64(p.n)
        w.u16(p.sigma)
        w.u8(p.ell)
        w.u8(1 if obj.rotate else 0)
        w.u32(p.spb)
        w.f64(p.epsilon)
        w.u32(obj._phase)
        w.u32(obj._x)
        _dump_tables(w, obj)
        w.blob(_pack_bits(obj._rewritten))
        w.blob(_le(array("i", obj._schedule[obj._sched_pos:])))
        _dump_store(w, obj.store)
    elif isinstance(obj, ExtendedCram):
        w.u8(1)
        p = obj.params
        w.u64(obj.n)
        w.u64(p.n0)
        w.u16(p.sigma)
        w.u8(p.ell)
        w.u32(p.tau)
        w.u32(obj._phase)
        w.u32(obj._x)
        w.u32(obj._phase_len)
        _dump_tables(w, obj)
        w.blob(_pack_bits(obj._rewritten))
        w.blob(_le(array("i", obj._schedule[obj._sched_pos:])))
        w.blob(_le(array("i", obj._slots)))
        w.blob(_le(obj._slot_nchars))
        w.blob(_le(array("i", obj._free)))
        w.blob(_pack_bits(list(obj.boundary)))
        _dump_store(w, obj.store)
    else:
        raise TypeError("cannot snapshot {!r}".format(type(obj)))
    return w.getvalue()


def from_bytes(raw: bytes):
    """Restore whatever ``to_bytes`` produced."""
    r = _Reader(raw)
    if r.raw[:5] != MAGIC:
        raise ValueError("not a snapshot (bad magic)")
    r.pos = 5
    version = r.u8()
    if version != VERSION:
        raise ValueError("unsupported snapshot version {}".format(version))
    mode = r.u8()
    if mode == 0:
        return _load_cram(r)
    if mode == 1:
        return _load_extended(r)
    raise ValueError("unknown snapshot mode {}".format(mode))


def _load_cram(r: _Reader) -> Cram:
    n = r.u64()
    sigma = r.u16()
    ell = r.u8()
    rotate = bool(r.u8())
    spb = r.u32()
    epsilon = r.f64()
    phase = r.u32()
    x = r.u32()
    cp = CodecParams(sigma, ell)
    params = CramParams(n=n, sigma=sigma, ell=ell, spb=spb, epsilon=epsilon)
    (tbl_old, tbl_new), (freq_frozen, freq_live) = _load_tables(r, cp)
    rewritten = _unpack_bits(r.blob(), params.nsuper)
    schedule = array("i", _from_le("i", r.blob()))
    store = _load_store(r)

    obj = Cram.__new__(Cram)
    obj.params = params
    obj.codec_params = cp
    obj.rotate = rotate
    obj.debug = False
    obj.debug_interval = 1000
    obj._ops_since_check = 0
    obj._tbl_old = tbl_old
    obj._tbl_new = tbl_new
    obj._freq_frozen = freq_frozen
    obj._freq_live = freq_live
    obj._rewritten = rewritten
    obj._schedule = schedule
    obj._sched_pos = 0
    obj._phase = phase
    obj._x = x
    obj.store = store
    lengths = np.frombuffer(store.len, dtype=np.int32).astype(np.int64)
    if params.nblocks:
        sb_bits = np.add.reduceat(lengths, np.arange(0, params.nblocks, spb))
        obj._sb_bits = array("q", sb_bits.tolist())
    else:
        obj._sb_bits = array("q")
    obj._pow = [sigma ** (ell - 1 - j) for j in range(ell)]
    obj._chunk_of = Cram._build_chunks(cp)
    return obj


def _load_extended(r: _Reader) -> ExtendedCram:
    n = r.u64()
    n0 = r.u64()
    sigma = r.u16()
    ell = r.u8()
    tau = r.u32()
    phase = r.u32()
    x = r.u32()
    phase_len = r.u32()
    cp = CodecParams(sigma, ell)
    params = XParams(n0=n0, sigma=sigma, ell=ell, tau=tau)
    (tbl_old, tbl_new), (freq_frozen, freq_live) = _load_tables(r, cp)
    rewritten = _unpack_bits(r.blob(), params.max_supers)
    schedule = array("i", _from_le("i", r.blob()))
    slots = list(_from_le("i", r.blob()))
    slot_nchars = _from_le("i", r.blob())
    free = list(_from_le("i", r.blob()))
    boundary_raw = r.blob()
    store = _load_store(r)

    obj = ExtendedCram.__new__(ExtendedCram)
    obj.debug = False
    obj._sigma = sigma
    obj._tau_override = None
    obj._ell_override = None
    obj.params = params
    obj.codec_params = cp
    obj.n = n
    obj._slots = slots
    obj._free = free
    obj._slot_nchars = slot_nchars
    obj._rewritten = rewritten
    obj._tbl_old = tbl_old
    obj._tbl_new = tbl_new
    obj._freq_frozen = freq_frozen
    obj._freq_live = freq_live
    obj.store = store
    obj.boundary = DynBitVec(_unpack_bits(boundary_raw, n))
    obj._phase = phase
    obj._x = x
    obj._schedule = schedule
    obj._sched_pos = 0
    obj._phase_len = phase_len
    return obj


def save(obj, path) -> None:
    with open(path, "wb") as fh:
        fh.write(to_bytes(obj))


def load(path):
    with open(path, "rb") as fh:
        return from_bytes(fh.read())
