"""Length-prefixed big-endian binary records."""

import struct

from crypto import bits_to_bytes, bytes_to_bits


class MalformedRecordError(ValueError):
    """Truncated or inconsistent binary record."""


class RecordWriter:
    def __init__(self):
        self._parts = []

    def raw(self, data):
        self._parts.append(bytes(data))

    def u8(self, value):
        self.raw(struct.pack(">B", value))

    def u16(self, value):
        self.raw(struct.pack(">H", value))

    def u32(self, value):
        self.raw(struct.pack(">I", value))

    def i128(self, value):
        self.raw(value.to_bytes(16, "big", signed=True))

    def blob(self, data):
        self.u32(len(data))
        self.raw(data)

    def bits(self, bits):
        self.u32(len(bits))
        self.raw(bits_to_bytes(bits))

    def text(self, value):
        data = value.encode()
        self.u16(len(data))
        self.raw(data)

    def getvalue(self):
        return b"".join(self._parts)


class RecordReader:
    def __init__(self, data):
        self.data = bytes(data)
        self.pos = 0

    def raw(self, n):
        if n < 0 or self.pos + n > len(self.data):
            raise MalformedRecordError(f"record truncated at byte {self.pos}")
        chunk = self.data[self.pos:self.pos + n]
        self.pos += n
        return chunk

    def u8(self):
        return self.raw(1)[0]

    def u16(self):
        return struct.unpack(">H", self.raw(2))[0]

    def u32(self):
        return struct.unpack(">I", self.raw(4))[0]

    def i128(self):
        return int.from_bytes(self.raw(16), "big", signed=True)

    def blob(self):
        return self.raw(self.u32())

    def bits(self):
        n = self.u32()
        return bytes_to_bits(self.raw((n + 7) // 8), n)

    def text(self):
        try:
            return self.raw(self.u16()).decode()
        except UnicodeDecodeError as exc:
            raise MalformedRecordError("label is not UTF-8") from exc

    def expect(self, magic):
        if self.raw(len(magic)) != magic:
            raise MalformedRecordError(f"expected {magic!r} header")

    def done(self):
        if self.pos != len(self.data):
            raise MalformedRecordError(f"{len(self.data) - self.pos} trailing bytes")
