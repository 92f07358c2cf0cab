"""Arena of variable-length bit records with O(1) addressing.

Stores a fixed number ``m`` of bit strings, each at most ``b`` bits long,
packed into fixed-size segments so that total space stays close to the
payload size while records keep changing length.

Layout.  A segment is exactly ``b + 4p`` bits: a ``p``-bit pred link, a
``p``-bit succ link, an offset field, padding, then a ``b + p``-bit
``block_data`` window.  All segments holding records of one length x are
chained into a doubly-linked list; their windows carry one contiguous
stream of (id, data) pairs, ``p``-bit record id followed by x data bits.
The stream is flush with the window end of the tail segment, grows and
shrinks only at its front, and only the head segment may have unused bits.
A pair can straddle two adjacent segments but never three, because a pair
is at most ``p + b`` bits and a window is ``b + p``.

Addressing is indirect: ``seg_slot[i]`` names an indirection slot and
``slot_addr[slot]`` holds that segment's arena index, so when a segment is
relocated only one entry changes.  Links between segments store slot ids
for the same reason.  The arena itself is kept dense: freeing a segment
moves the highest-addressed segment into the hole.

The pred/succ/offset header fields are authoritative in side tables
(``_pred_of``, ``_succ_of``, ``_foffs``) and the in-arena copies are only
refreshed lazily (``_sync_fields``) before a snapshot or dump; relocating
a segment therefore moves just its window bits.

``realloc`` does not preserve record contents; callers rewrite records
right after resizing them.  ``rewrite`` fuses both steps.
"""

from __future__ import annotations

from array import array
from dataclasses import dataclass

from .bits import read_bits, write_bits

_NO_SLOT = 0  # slot ids are 1-based; 0 is the null link


@dataclass(frozen=True)
class StoreParams:
    """Record-size cap ``b``, record count ``m``, and pointer width ``p``.

    ``p`` defaults to enough bits for any bit address within an arena of
    ``m`` worst-case segments, rounded up to a whole byte.
    """

    b: int
    m: int
    p: int = 0

    def __post_init__(self):
        if self.b < 1:
            raise ValueError("record cap must be >= 1")
        if self.m < 1:
            raise ValueError("record count must be >= 1")
        if self.p == 0:
            first_pass = max(8, (self.m * self.b).bit_length())
            seg_bits = self.b + 4 * first_pass
            p = max(8, (self.m * seg_bits).bit_length())
            p = (p + 7) & ~7
            object.__setattr__(self, "p", p)
        if self.m.bit_length() > self.p:
            raise ValueError("pointer width too small for record ids")

    @property
    def seg_bits(self) -> int:
        return self.b + 4 * self.p

    @property
    def window(self) -> int:
        """block_data bits per segment."""
        return self.b + self.p


class SegmentStore:
    """The arena plus per-record location tables.

    Records are indexed 0..m-1.  ``address(i)`` resolves to (segment arena
    index, bit offset within that segment's window, length); data whose
    offset + length exceeds the window continues at the start of the next
    segment's window in the same chain.
    """

    def __init__(self, params: StoreParams, lengths):
        if len(lengths) != params.m:
            raise ValueError("need exactly one initial length per record")
        self.params = params
        b, m, p = params.b, params.m, params.p
        self._b = b
        self._p = p
        self._segbits = params.seg_bits
        self._window = params.window
        if self._window > 0xFFFF:
            raise ValueError("window too wide for 16-bit offsets")
        self._off_bits = (self._segbits - 1).bit_length()
        self._data_off = 3 * p  # window start within a segment

        self.seg_slot = array("i", bytes(4 * m))
        self.pos = array("H", bytes(2 * m))
        self.len = array("i", bytes(4 * m))
        self.slot_addr = array("i", [0])   # slot 0 reserved as null
        self._pred_of = array("i", [0])    # slot -> predecessor slot
        self._succ_of = array("i", [0])    # slot -> successor slot
        self._slot_of = array("i", [])     # arena index -> slot
        self._free_slots = []
        self._heads = array("i", bytes(4 * (b + 1)))   # class x -> head slot
        self._foffs = array("i", bytes(4 * (b + 1)))   # class x -> stream front
        self._hw = 0
        self._cap = 0
        self.arena = bytearray()
        # space accounting: payload bits plus one id tag per live record
        self._tagged_bits = 0
        self._bulk_build(lengths)

    # -- construction -----------------------------------------------------

    def _bulk_build(self, lengths) -> None:
        b, p = self._b, self._p
        window = self._window
        counts = [0] * (b + 1)
        len_arr = self.len
        for i, x in enumerate(lengths):
            if not 0 <= x <= b:
                raise ValueError("record {} length {} outside [0, {}]".format(i, x, b))
            len_arr[i] = x
            counts[x] += 1
        # consecutive arena ranges per class; fresh slot ids are sequential,
        # so the segment at address a gets slot a + 1
        seg_first = [0] * (b + 1)
        cursor = [0] * (b + 1)
        total_segs = 0
        for x in range(1, b + 1):
            k = counts[x]
            if not k:
                continue
            stream = k * (p + x)
            nsegs = -(-stream // window)
            seg_first[x] = total_segs
            cursor[x] = nsegs * window - stream
            total_segs += nsegs
            self._tagged_bits += stream
        self._grow(max(total_segs, 1))
        self._hw = total_segs
        self.slot_addr = array("i", range(-1, total_segs))
        self.slot_addr[0] = 0
        self._slot_of = array("i", range(1, total_segs + 1))
        pred_of = array("i", range(-1, total_segs))
        succ_of = array("i", range(1, total_segs + 2))
        pred_of[0] = 0
        succ_of[0] = 0
        for x in range(1, b + 1):
            if not counts[x]:
                continue
            stream = counts[x] * (p + x)
            nsegs = -(-stream // window)
            first = seg_first[x]
            pred_of[first + 1] = _NO_SLOT
            succ_of[first + nsegs] = _NO_SLOT
            self._heads[x] = first + 1
            self._foffs[x] = cursor[x]
        self._pred_of = pred_of
        self._succ_of = succ_of
        seg_slot = self.seg_slot
        pos_arr = self.pos
        arena = self.arena
        segbits = self._segbits
        data_off = self._data_off
        for i, x in enumerate(lengths):
            if not x:
                continue
            cur = cursor[x]
            addr = seg_first[x] + cur // window
            off = cur % window
            base = addr * segbits + data_off + off
            if off + p <= window:
                end = base + p
                first_b = base >> 3
                last_b = (end + 7) >> 3
                shift = (last_b << 3) - end
                mask = ((1 << p) - 1) << shift
                word = int.from_bytes(arena[first_b:last_b], "big")
                word = (word & ~mask) | (i << shift)
                arena[first_b:last_b] = word.to_bytes(last_b - first_b, "big")
            else:
                head = window - off
                write_bits(arena, base, head, i >> (p - head))
                write_bits(arena, (addr + 1) * segbits + data_off,
                           p - head, i & ((1 << (p - head)) - 1))
            data_at = cur + p
            seg_slot[i] = seg_first[x] + data_at // window + 1
            pos_arr[i] = data_at % window
            cursor[x] = cur + p + x

    # -- slot and segment plumbing ----------------------------------------

    def _new_slot(self, addr: int) -> int:
        if self._free_slots:
            slot = self._free_slots.pop()
            self.slot_addr[slot] = addr
        else:
            slot = len(self.slot_addr)
            self.slot_addr.append(addr)
            self._pred_of.append(0)
            self._succ_of.append(0)
        while len(self._slot_of) <= addr:
            self._slot_of.append(0)
        self._slot_of[addr] = slot
        return slot

    def _grow(self, need: int) -> None:
        if need <= self._cap:
            return
        new_cap = max(need, self._cap * 2, 4)
        grow_bits = new_cap * self._segbits
        self.arena.extend(bytes(-(-grow_bits // 8) - len(self.arena)))
        self._cap = new_cap

    def _alloc_segment(self) -> int:
        addr = self._hw
        self._grow(addr + 1)
        self._hw = addr + 1
        slot = self._new_slot(addr)
        self._pred_of[slot] = _NO_SLOT
        self._succ_of[slot] = _NO_SLOT
        return slot

    def _free_segment(self, slot: int) -> None:
        addr = self.slot_addr[slot]
        last = self._hw - 1
        if addr != last:
            # only the window content matters; header fields are synced lazily
            sb = self._segbits
            doff = self._data_off
            write_bits(self.arena, addr * sb + doff, self._window,
                       read_bits(self.arena, last * sb + doff, self._window))
            moved = self._slot_of[last]
            self.slot_addr[moved] = addr
            self._slot_of[addr] = moved
        self._hw = last
        self._free_slots.append(slot)

    def _sync_fields(self) -> None:
        """Write every live segment's header fields into the arena."""
        arena = self.arena
        segbits = self._segbits
        p = self._p
        for addr in range(self._hw):
            slot = self._slot_of[addr]
            base = addr * segbits
            write_bits(arena, base, p, self._pred_of[slot])
            write_bits(arena, base + p, p, self._succ_of[slot])
        for x in range(1, self._b + 1):
            head = self._heads[x]
            if head:
                base = self.slot_addr[head] * segbits
                write_bits(arena, base + 2 * p, self._off_bits, self._foffs[x])

    # -- window-relative I/O ----------------------------------------------

    def _window_read(self, slot: int, off: int, nbits: int) -> int:
        """Read from a window stream position, following succ on overflow."""
        window = self._window
        arena = self.arena
        segbits = self._segbits
        if off >= window:
            slot = self._succ_of[slot]
            off -= window
        base = self.slot_addr[slot] * segbits + self._data_off + off
        if off + nbits <= window:
            end = base + nbits
            last = (end + 7) >> 3
            return (int.from_bytes(arena[base >> 3:last], "big")
                    >> ((last << 3) - end)) & ((1 << nbits) - 1)
        head = window - off
        end = base + head
        last = (end + 7) >> 3
        hi = (int.from_bytes(arena[base >> 3:last], "big")
              >> ((last << 3) - end)) & ((1 << head) - 1)
        nxt = self._succ_of[slot]
        rest = nbits - head
        base2 = self.slot_addr[nxt] * segbits + self._data_off
        end2 = base2 + rest
        last2 = (end2 + 7) >> 3
        lo = (int.from_bytes(arena[base2 >> 3:last2], "big")
              >> ((last2 << 3) - end2)) & ((1 << rest) - 1)
        return (hi << rest) | lo

    def _window_write(self, slot: int, off: int, nbits: int, value: int) -> None:
        window = self._window
        arena = self.arena
        segbits = self._segbits
        if off >= window:
            slot = self._succ_of[slot]
            off -= window
        base = self.slot_addr[slot] * segbits + self._data_off + off
        if off + nbits <= window:
            end = base + nbits
            first = base >> 3
            last = (end + 7) >> 3
            shift = (last << 3) - end
            mask = ((1 << nbits) - 1) << shift
            word = int.from_bytes(arena[first:last], "big")
            word = (word & ~mask) | ((value << shift) & mask)
            arena[first:last] = word.to_bytes(last - first, "big")
            return
        head = window - off
        write_bits(arena, base, head, value >> (nbits - head))
        nxt = self._succ_of[slot]
        write_bits(arena, self.slot_addr[nxt] * segbits + self._data_off,
                   nbits - head, value & ((1 << (nbits - head)) - 1))

    # -- list-front surgery ------------------------------------------------

    def _pop_front(self, x: int):
        """Detach the front (id, data) pair of class x; returns (id, data)."""
        p = self._p
        head = self._heads[x]
        foff = self._foffs[x]
        pair = self._window_read(head, foff, p + x)
        foff += p + x
        if foff >= self._window:
            old_head = head
            succ = self._succ_of[head]
            self._heads[x] = succ
            if succ:
                self._pred_of[succ] = _NO_SLOT
            self._free_segment(old_head)
            foff -= self._window
        self._foffs[x] = foff if self._heads[x] else 0
        return pair >> x, pair & ((1 << x) - 1)

    def _push_front(self, x: int, rec: int, data: int) -> None:
        """Prepend an (id, data) pair to class x and record its location."""
        p = self._p
        need = p + x
        window = self._window
        head = self._heads[x]
        foff = self._foffs[x]
        if not head:
            head = self._alloc_segment()
            self._heads[x] = head
            foff = window - need
        elif foff >= need:
            foff -= need
        else:
            new_head = self._alloc_segment()
            old = head
            self._succ_of[new_head] = old
            self._pred_of[old] = new_head
            self._heads[x] = new_head
            head = new_head
            foff = window - need + foff
        self._foffs[x] = foff
        self._window_write(head, foff, need, (rec << x) | data)
        data_at = foff + p
        if data_at >= window:
            self.seg_slot[rec] = self._succ_of[head]
            self.pos[rec] = data_at - window
        else:
            self.seg_slot[rec] = head
            self.pos[rec] = data_at

    def _remove_record(self, i: int, x: int) -> None:
        """Free record i's pair in class x, backfilling from the front."""
        p = self._p
        window = self._window
        hole_slot = self.seg_slot[i]
        hole_off = self.pos[i] - p
        if hole_off < 0:
            hole_slot = self._pred_of[hole_slot]
            hole_off += window
        rec, data = self._pop_front(x)
        if rec == i:
            return
        self._window_write(hole_slot, hole_off, p + x, (rec << x) | data)
        data_at = hole_off + p
        if data_at >= window:
            self.seg_slot[rec] = self._succ_of[hole_slot]
            self.pos[rec] = data_at - window
        else:
            self.seg_slot[rec] = hole_slot
            self.pos[rec] = data_at

    # -- public operations --------------------------------------------------

    def address(self, i: int):
        """(segment arena index, window bit offset, length) of record i."""
        if not 0 <= i < self.params.m:
            raise ValueError("record index {} out of range".format(i))
        slot = self.seg_slot[i]
        return (self.slot_addr[slot] if slot else -1), self.pos[i], self.len[i]

    def read(self, i: int) -> int:
        """Current bits of record i as an int (MSB first)."""
        if not 0 <= i < self.params.m:
            raise ValueError("record index {} out of range".format(i))
        x = self.len[i]
        if x == 0:
            return 0
        return self._window_read(self.seg_slot[i], self.pos[i], x)

    def write(self, i: int, value: int) -> None:
        """Overwrite record i; ``value`` must fit in its current length."""
        if not 0 <= i < self.params.m:
            raise ValueError("record index {} out of range".format(i))
        x = self.len[i]
        if value >> x:
            raise ValueError("value wider than record length {}".format(x))
        if x:
            self._window_write(self.seg_slot[i], self.pos[i], x, value)

    def realloc(self, i: int, new_len: int) -> None:
        """Resize record i to ``new_len`` bits; contents become unspecified."""
        if not 0 <= i < self.params.m:
            raise ValueError("record index {} out of range".format(i))
        if not 0 <= new_len <= self._b:
            raise ValueError("length {} outside [0, {}]".format(new_len, self._b))
        old = self.len[i]
        if new_len == old:
            return
        p = self._p
        if old:
            self._remove_record(i, old)
            self._tagged_bits -= old + p
        if new_len:
            self._push_front(new_len, i, 0)
            self._tagged_bits += new_len + p
        else:
            self.seg_slot[i] = _NO_SLOT
            self.pos[i] = 0
        self.len[i] = new_len

    def rewrite(self, i: int, new_len: int, value: int) -> None:
        """Resize record i and store ``value`` in one step (hot path)."""
        old = self.len[i]
        if new_len == old:
            self._window_write(self.seg_slot[i], self.pos[i], old, value)
            return
        p = self._p
        if old:
            self._remove_record(i, old)
        if new_len:
            self._push_front(new_len, i, value)
        else:
            self.seg_slot[i] = _NO_SLOT
            self.pos[i] = 0
        self._tagged_bits += new_len - old + (p if old == 0 else 0) \
            - (p if new_len == 0 else 0)
        self.len[i] = new_len

    # -- accounting and diagnostics -----------------------------------------

    @property
    def live_segments(self) -> int:
        return self._hw

    @property
    def arena_bits(self) -> int:
        """High-water arena footprint in bits."""
        return self._hw * self._segbits

    @property
    def tagged_bits(self) -> int:
        """Payload plus one id tag per live record (the stream content)."""
        return self._tagged_bits

    def segment_budget(self) -> int:
        """Upper bound on live segments: ceil(S/b) + b for stream size S."""
        return -(-self._tagged_bits // self._b) + self._b

    def index_bits(self) -> int:
        """Bits of the location tables outside the arena."""
        m = self.params.m
        per_record = self._p + 16 + self._b.bit_length()
        slots = len(self.slot_addr) - 1
        return m * per_record + 2 * slots * self._p

    def dump(self) -> str:
        """Text rendering of every class chain, head first."""
        lines = []
        for x in range(1, self._b + 1):
            slot = self._heads[x]
            if not slot:
                continue
            parts = []
            while slot:
                parts.append("slot {} (seg {})".format(slot, self.slot_addr[slot]))
                slot = self._succ_of[slot]
            lines.append("L{} front={}: {}".format(x, self._foffs[x], " -> ".join(parts)))
        return "\n".join(lines)

    def check_invariants(self) -> None:
        """Full structural scan; raises AssertionError on any violation."""
        p = self._p
        window = self._window
        seen = {}
        seg_class = {}
        live_segments = 0
        tagged = 0
        for x in range(1, self._b + 1):
            slot = self._heads[x]
            foff = self._foffs[x]
            if not slot:
                assert foff == 0, "class {} has a front offset but no head".format(x)
                continue
            chain = []
            prev = _NO_SLOT
            while slot:
                addr = self.slot_addr[slot]
                assert 0 <= addr < self._hw, "slot {} points outside arena".format(slot)
                assert self._slot_of[addr] == slot, "reverse map broken at {}".format(addr)
                assert self._pred_of[slot] == prev, "pred link broken at slot {}".format(slot)
                assert addr not in seg_class, "segment {} in two chains".format(addr)
                seg_class[addr] = x
                chain.append(slot)
                prev = slot
                slot = self._succ_of[slot]
                live_segments += 1
            stream_bits = len(chain) * window - foff
            assert stream_bits % (p + x) == 0, \
                "class {} stream is not a whole number of pairs".format(x)
            cursor = foff
            for _ in range(stream_bits // (p + x)):
                rec = self._window_read(chain[cursor // window], cursor % window, p)
                assert 0 <= rec < self.params.m, "id tag {} out of range".format(rec)
                assert rec not in seen, "record {} appears twice".format(rec)
                assert self.len[rec] == x, \
                    "record {} tagged in class {} but len {}".format(rec, x, self.len[rec])
                data_at = cursor + p
                want_slot = chain[data_at // window]
                assert self.seg_slot[rec] == want_slot, \
                    "record {} slot {} != {}".format(rec, self.seg_slot[rec], want_slot)
                assert self.pos[rec] == data_at % window, \
                    "record {} pos {} != {}".format(rec, self.pos[rec], data_at % window)
                seen[rec] = True
                cursor += p + x
                tagged += p + x
        for i in range(self.params.m):
            if self.len[i]:
                assert i in seen, "record {} missing from its chain".format(i)
        assert live_segments == self._hw, \
            "chains cover {} segments, arena holds {}".format(live_segments, self._hw)
        assert tagged == self._tagged_bits, \
            "stream accounting {} != cached {}".format(tagged, self._tagged_bits)
        assert self._hw <= self.segment_budget(), \
            "arena {} exceeds budget {}".format(self._hw, self.segment_budget())


def new_store(params: StoreParams, initial_lengths) -> SegmentStore:
    """Build a store of ``params.m`` zero-initialized records."""
    return SegmentStore(params, initial_lengths)
