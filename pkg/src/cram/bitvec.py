"""Dynamic bit sequence with rank, select, insert, and delete.

A height-balanced binary tree whose leaves hold bit chunks of up to 1024
bits (stored as ints, position 0 at the least significant bit).  Routers
cache subtree bit totals and one counts, so every operation is O(log n)
plus chunk-local integer surgery.

Leaves stay at least quarter-full: an insert that overfills a leaf splits
it in half, and a delete that would underfill a leaf dissolves it and
splices its remaining bits into the neighboring chunk.  A tree with a
single leaf may be arbitrarily small.
"""

from __future__ import annotations

CHUNK_CAP = 1024
CHUNK_MIN = CHUNK_CAP // 4


class _Leaf:
    __slots__ = ("bits", "nbits", "ones")

    def __init__(self, bits: int, nbits: int):
        self.bits = bits
        self.nbits = nbits
        self.ones = bits.bit_count()


class _Router:
    __slots__ = ("left", "right", "height", "tbits", "tones")

    def __init__(self, left, right):
        self.left = left
        self.right = right
        _fix(self)


def _h(n) -> int:
    return 0 if type(n) is _Leaf else n.height


def _tbits(n) -> int:
    return n.nbits if type(n) is _Leaf else n.tbits


def _tones(n) -> int:
    return n.ones if type(n) is _Leaf else n.tones


def _fix(n: _Router) -> _Router:
    left, right = n.left, n.right
    n.tbits = _tbits(left) + _tbits(right)
    n.tones = _tones(left) + _tones(right)
    n.height = 1 + max(_h(left), _h(right))
    return n


def _rot_left(n: _Router) -> _Router:
    r = n.right
    n.right = r.left
    r.left = n
    _fix(n)
    return _fix(r)


def _rot_right(n: _Router) -> _Router:
    l = n.left
    n.left = l.right
    l.right = n
    _fix(n)
    return _fix(l)


def _bal(n):
    if type(n) is _Leaf:
        return n
    _fix(n)
    lean = _h(n.left) - _h(n.right)
    if lean > 1:
        if _h(n.left.left) < _h(n.left.right):
            n.left = _rot_left(n.left)
        return _rot_right(n)
    if lean < -1:
        if _h(n.right.right) < _h(n.right.left):
            n.right = _rot_right(n.right)
        return _rot_left(n)
    return n


def _leaves_to_tree(leaves):
    if len(leaves) == 1:
        return leaves[0]
    mid = len(leaves) // 2
    return _Router(_leaves_to_tree(leaves[:mid]), _leaves_to_tree(leaves[mid:]))


def _split_leaf(leaf: _Leaf):
    """Break an overfull leaf into a balanced subtree of half-full leaves."""
    pieces = []
    bits, nbits = leaf.bits, leaf.nbits
    while nbits > CHUNK_CAP:
        half = CHUNK_CAP // 2
        pieces.append(_Leaf(bits & ((1 << half) - 1), half))
        bits >>= half
        nbits -= half
    pieces.append(_Leaf(bits, nbits))
    if len(pieces) >= 2 and pieces[-1].nbits < CHUNK_MIN:
        prev = pieces[-2]
        merged = prev.bits | (pieces[-1].bits << prev.nbits)
        pieces[-2] = _Leaf(merged, prev.nbits + pieces[-1].nbits)
        pieces.pop()
    return _leaves_to_tree(pieces)


def _insert_run(n, pos: int, value: int, nbits: int):
    if type(n) is _Leaf:
        low = n.bits & ((1 << pos) - 1)
        high = n.bits >> pos
        n.bits = low | (value << pos) | (high << (pos + nbits))
        n.nbits += nbits
        n.ones = n.bits.bit_count()
        if n.nbits > CHUNK_CAP:
            return _split_leaf(n)
        return n
    lt = _tbits(n.left)
    if pos <= lt:
        n.left = _insert_run(n.left, pos, value, nbits)
    else:
        n.right = _insert_run(n.right, pos - lt, value, nbits)
    return _bal(n)


def _delete_bit(n, pos: int) -> int:
    """Remove one bit in place (no leaf dissolves); returns the bit."""
    if type(n) is _Leaf:
        bit = (n.bits >> pos) & 1
        low = n.bits & ((1 << pos) - 1)
        n.bits = low | ((n.bits >> (pos + 1)) << pos)
        n.nbits -= 1
        n.ones -= bit
        return bit
    lt = _tbits(n.left)
    if pos < lt:
        bit = _delete_bit(n.left, pos)
    else:
        bit = _delete_bit(n.right, pos - lt)
    n.tbits -= 1
    n.tones -= bit
    return bit


def _splice_leaf(n, pos: int):
    """Remove the whole leaf covering ``pos``; returns (subtree, leaf)."""
    if type(n) is _Leaf:
        return None, n
    lt = _tbits(n.left)
    if pos < lt:
        sub, leaf = _splice_leaf(n.left, pos)
        if sub is None:
            return n.right, leaf
        n.left = sub
    else:
        sub, leaf = _splice_leaf(n.right, pos - lt)
        if sub is None:
            return n.left, leaf
        n.right = sub
    return _bal(n), leaf


def _select_in_chunk(bits: int, j: int) -> int:
    pos = 0
    while True:
        byte = bits & 0xFF
        c = byte.bit_count()
        if j > c:
            j -= c
            bits >>= 8
            pos += 8
        else:
            break
    while True:
        if bits & 1:
            j -= 1
            if j == 0:
                return pos
        bits >>= 1
        pos += 1


class DynBitVec:
    """Mutable bit sequence; positions are 0-based."""

    def __init__(self, bits=()):
        leaves = []
        acc = 0
        nacc = 0
        for b in bits:
            if b:
                acc |= 1 << nacc
            nacc += 1
            if nacc == CHUNK_CAP // 2:
                leaves.append(_Leaf(acc, nacc))
                acc = 0
                nacc = 0
        if nacc:
            leaves.append(_Leaf(acc, nacc))
        if len(leaves) >= 2 and leaves[-1].nbits < CHUNK_MIN:
            prev = leaves[-2]
            leaves[-2] = _Leaf(prev.bits | (leaves[-1].bits << prev.nbits),
                               prev.nbits + leaves[-1].nbits)
            leaves.pop()
        self._root = _leaves_to_tree(leaves) if leaves else None

    def __len__(self) -> int:
        return _tbits(self._root) if self._root is not None else 0

    @property
    def ones(self) -> int:
        return _tones(self._root) if self._root is not None else 0

    def get(self, i: int) -> int:
        if not 0 <= i < len(self):
            raise ValueError("position {} out of range".format(i))
        n = self._root
        while type(n) is _Router:
            lt = _tbits(n.left)
            if i < lt:
                n = n.left
            else:
                i -= lt
                n = n.right
        return (n.bits >> i) & 1

    def rank1(self, i: int) -> int:
        """Number of one bits in positions [0, i)."""
        if not 0 <= i <= len(self):
            raise ValueError("rank position {} out of range".format(i))
        n = self._root
        if n is None:
            return 0
        acc = 0
        while type(n) is _Router:
            lt = _tbits(n.left)
            if i <= lt:
                n = n.left
            else:
                acc += _tones(n.left)
                i -= lt
                n = n.right
        return acc + (n.bits & ((1 << i) - 1)).bit_count()

    def select1(self, j: int) -> int:
        """Position of the j-th one bit (1-based j)."""
        if not 1 <= j <= self.ones:
            raise ValueError("select rank {} out of range".format(j))
        n = self._root
        pos = 0
        while type(n) is _Router:
            lo = _tones(n.left)
            if j <= lo:
                n = n.left
            else:
                j -= lo
                pos += _tbits(n.left)
                n = n.right
        return pos + _select_in_chunk(n.bits, j)

    def insert_bit(self, i: int, bit: int) -> None:
        if not 0 <= i <= len(self):
            raise ValueError("insert position {} out of range".format(i))
        if self._root is None:
            self._root = _Leaf(1 if bit else 0, 1)
            return
        self._root = _insert_run(self._root, i, 1 if bit else 0, 1)

    def delete_bit(self, i: int) -> None:
        if not 0 <= i < len(self):
            raise ValueError("delete position {} out of range".format(i))
        root = self._root
        # locate the leaf to decide between in-place removal and dissolving
        n = root
        local = i
        while type(n) is _Router:
            lt = _tbits(n.left)
            if local < lt:
                n = n.left
            else:
                local -= lt
                n = n.right
        if type(root) is _Leaf or n.nbits > CHUNK_MIN:
            _delete_bit(root, i)
            if type(root) is _Leaf and root.nbits == 0:
                self._root = None
            return
        start = i - local
        sub, leaf = _splice_leaf(root, i)
        low = leaf.bits & ((1 << local) - 1)
        rest = low | ((leaf.bits >> (local + 1)) << local)
        self._root = _insert_run(sub, start, rest, leaf.nbits - 1)

    def set_bit(self, i: int, bit: int) -> None:
        """Overwrite the bit at ``i`` (delete plus insert)."""
        self.delete_bit(i)
        self.insert_bit(i, bit)

    def __iter__(self):
        stack = [self._root] if self._root is not None else []
        while stack:
            n = stack.pop()
            if type(n) is _Leaf:
                for q in range(n.nbits):
                    yield (n.bits >> q) & 1
            else:
                stack.append(n.right)
                stack.append(n.left)

    def check_invariants(self) -> None:
        """Recompute every cached aggregate and structural bound."""
        root = self._root
        if root is None:
            return
        leaf_count = 0

        def walk(n):
            nonlocal leaf_count
            if type(n) is _Leaf:
                leaf_count += 1
                assert 0 <= n.nbits, "negative leaf size"
                assert n.bits >> n.nbits == 0, "stray bits beyond leaf size"
                assert n.ones == n.bits.bit_count(), "leaf popcount cache wrong"
                return 0, n.nbits, n.ones
            hl, bl, ol = walk(n.left)
            hr, br, orr = walk(n.right)
            assert abs(hl - hr) <= 1, "tree out of balance"
            h = 1 + max(hl, hr)
            assert n.height == h, "height cache wrong"
            assert n.tbits == bl + br, "bit-count cache wrong"
            assert n.tones == ol + orr, "popcount cache wrong"
            return h, n.tbits, n.tones

        height, total, _ = walk(root)
        if leaf_count > 1:
            def leaves(n):
                if type(n) is _Leaf:
                    yield n
                else:
                    yield from leaves(n.left)
                    yield from leaves(n.right)
            for lf in leaves(root):
                assert CHUNK_MIN <= lf.nbits <= CHUNK_CAP, \
                    "leaf fill {} outside [{}, {}]".format(lf.nbits, CHUNK_MIN, CHUNK_CAP)
        if total > 1:
            import math
            assert height <= 2 * math.log2(total) + 2, "height exceeds balance bound"
