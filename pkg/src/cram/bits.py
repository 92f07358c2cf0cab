"""Bit-level primitives shared by the storage layers.

Bit streams are MSB-first within bytes: bit 0 of a stream is the most
significant bit of byte 0. Field values travel as plain ints.
"""


def read_bits(buf, pos: int, nbits: int) -> int:
    """Read ``nbits`` bits starting at bit offset ``pos``."""
    if nbits == 0:
        return 0
    end = pos + nbits
    first = pos >> 3
    last = (end + 7) >> 3
    word = int.from_bytes(buf[first:last], "big")
    return (word >> ((last << 3) - end)) & ((1 << nbits) - 1)


def write_bits(buf, pos: int, nbits: int, value: int) -> None:
    """Write the low ``nbits`` bits of ``value`` at bit offset ``pos``."""
    if nbits == 0:
        return
    end = pos + nbits
    first = pos >> 3
    last = (end + 7) >> 3
    shift = (last << 3) - end
    mask = ((1 << nbits) - 1) << shift
    word = int.from_bytes(buf[first:last], "big")
    word = (word & ~mask) | ((value << shift) & mask)
    buf[first:last] = word.to_bytes(last - first, "big")


def copy_bits(dst, dpos: int, src, spos: int, nbits: int) -> None:
    """Copy a bit range between (possibly identical) buffers.

    Ranges are assumed not to overlap when ``dst is src``.
    """
    write_bits(dst, dpos, nbits, read_bits(src, spos, nbits))


def bits_to_str(value: int, nbits: int) -> str:
    """Render a field as a '0'/'1' string, MSB first ('' for zero width)."""
    return format(value, "0{}b".format(nbits)) if nbits else ""


class BitWriter:
    """Append-only bit stream builder."""

    def __init__(self):
        self._chunks = bytearray()
        self._acc = 0
        self._nacc = 0

    def write(self, value: int, nbits: int) -> None:
        self._acc = (self._acc << nbits) | (value & ((1 << nbits) - 1))
        self._nacc += nbits
        while self._nacc >= 8:
            self._nacc -= 8
            self._chunks.append((self._acc >> self._nacc) & 0xFF)
        self._acc &= (1 << self._nacc) - 1

    @property
    def bit_length(self) -> int:
        return len(self._chunks) * 8 + self._nacc

    def getvalue(self) -> bytes:
        """Bytes of the stream, final partial byte zero-padded."""
        out = bytearray(self._chunks)
        if self._nacc:
            out.append((self._acc << (8 - self._nacc)) & 0xFF)
        return bytes(out)


class BitReader:
    """Cursor-style reader over a byte buffer."""

    def __init__(self, buf, pos: int = 0):
        self._buf = buf
        self.pos = pos

    def read(self, nbits: int) -> int:
        value = read_bits(self._buf, self.pos, nbits)
        self.pos += nbits
        return value
