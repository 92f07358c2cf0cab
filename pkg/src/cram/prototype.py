"""Prototype store variant: Huffman block codes and write-credit rewrites.

Matches the benchmarking configuration rather than the constant-time
design: blocks are Huffman-coded over the full block alphabet (add-one
smoothed), and re-encoding is driven by a write multiplier ``u`` instead
of a fixed schedule quota.  Every written byte earns ``u - 1`` bytes of
re-encoding credit, spent migrating scheduled super-blocks; on top of
that, once the bytes written into one large block exceed ``large_chars/u``
the whole large block is migrated at once.  With ``u == 1`` no credit ever
accrues, so the initial code tables govern forever.  Tables rotate when
every super-block has migrated.
"""

from __future__ import annotations

from array import array

from .codec import build_huffman_table
from .core import Cram, block_length_for


class HuffmanCram(Cram):
    """Huffman-coded store with ``u``-credit table adaptation."""

    def __init__(self, text, sigma: int = 256, u: int = 4,
                 spb_chars: int = 64, large_chars: int = 1024,
                 debug: bool = False):
        if u < 1:
            raise ValueError("write multiplier u must be >= 1")
        self.u = u
        data = bytes(text)
        ell = block_length_for(len(data), sigma)
        spb = max(1, spb_chars // ell)
        self._sb_chars = spb * ell
        self._large_chars = max(large_chars, self._sb_chars)
        self._credit = 0
        self._n_rewritten = 0
        super().__init__(data, sigma=sigma, epsilon=1.0 / spb, ell=ell,
                         rotate=(u > 1), debug=debug)
        nlarge = -(-self.params.n // self._large_chars)
        self._large_written = array("i", bytes(4 * nlarge))

    def _build_table(self, freq):
        return build_huffman_table(freq, self.codec_params)

    def _migrate(self, sb: int) -> None:
        if not self._rewritten[sb]:
            self._reencode_super_block(sb, self._tbl_old, self._tbl_new)
            self._rewritten[sb] = 1
            self._n_rewritten += 1

    def replace(self, i: int, c: int) -> None:
        params = self.params
        if not 0 <= i < params.n:
            raise ValueError("position {} outside [0, {})".format(i, params.n))
        if not 0 <= c < params.sigma:
            raise ValueError("symbol {} outside alphabet".format(c))
        if self.rotate:
            self._credit += self.u - 1
            schedule = self._schedule
            while self._credit >= self._sb_chars:
                sp = self._sched_pos
                if sp >= len(schedule):
                    self._credit = 0
                    break
                self._sched_pos = sp + 1
                self._credit -= self._sb_chars
                self._migrate(schedule[sp])
            lb = i // self._large_chars
            written = self._large_written[lb] + 1
            if written * self.u > self._large_chars:
                start = lb * self._large_chars // (params.ell * params.spb)
                stop = min(-(-((lb + 1) * self._large_chars)
                             // (params.ell * params.spb)), params.nsuper)
                for sb in range(start, stop):
                    self._migrate(sb)
                self._large_written[lb] = 0
            else:
                self._large_written[lb] = written
        self._apply_replace(i, c)
        self._x += 1
        if self.rotate and self._n_rewritten == params.nsuper:
            self._rotate_tables()

    def _rotate_tables(self) -> None:
        self._tbl_old = self._tbl_new
        self._tbl_new = self._build_table(self._freq_frozen)
        self._freq_frozen = array("q", self._freq_live)
        self._rewritten = bytearray(self.params.nsuper)
        self._build_schedule()
        self._n_rewritten = 0
        self._credit = 0
        self._phase += 1
        self._x = 0

    def advance_phase(self) -> None:
        for sb in range(self.params.nsuper):
            self._migrate(sb)
        self._rotate_tables()
