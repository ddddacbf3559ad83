"""On-disk archive container: a fixed header, a CRC-protected segment table
and the encrypted group payloads.

Byte layout (little-endian)::

    "SALT" | version u8 | width u16 | height u16 | frames u32 | K u8
    | anchor_interval u8 | n u16 | q u16 | key_id 16s | stripe_size u32
    | drive_count u8 | parity_scheme u8 | segment_count u32
    | { offset u64 | length u64 | crc32 u32 }*   (offsets are absolute)
    | payloads
"""

import struct
import zlib
from dataclasses import dataclass

from ..errors import DecodeError, IntegrityError, InvalidInputError

MAGIC = b"SALT"
VERSION = 1
PARITY_RAID5 = 5
_HEADER = struct.Struct("<4sBHHIBBHH16sIBB")
_COUNT = struct.Struct("<I")
_ENTRY = struct.Struct("<QQI")


def crc32(data):
    return zlib.crc32(data) & 0xFFFFFFFF


@dataclass(frozen=True)
class ContainerHeader:
    width: int
    height: int
    frame_count: int
    num_layers: int
    anchor_interval: int
    n: int
    q: int
    key_id: bytes
    stripe_size: int
    drive_count: int
    parity_scheme: int = PARITY_RAID5

    def __post_init__(self):
        if len(self.key_id) != 16:
            raise InvalidInputError("key id must be 16 bytes")

    def pack(self):
        try:
            return _HEADER.pack(MAGIC, VERSION, self.width, self.height, self.frame_count,
                                self.num_layers, self.anchor_interval, self.n, self.q,
                                self.key_id, self.stripe_size, self.drive_count,
                                self.parity_scheme)
        except struct.error as exc:
            raise InvalidInputError(f"header field out of range: {exc}") from exc


@dataclass(frozen=True)
class SegmentEntry:
    offset: int
    length: int
    crc: int


@dataclass(frozen=True)
class ArchiveContainer:
    header: ContainerHeader
    segments: tuple                 # payload bytes, one per group
    table: tuple = None             # as stored; computed from segments if omitted

    def __post_init__(self):
        object.__setattr__(self, "segments", tuple(bytes(s) for s in self.segments))
        if self.table is None:
            object.__setattr__(self, "table", self._fresh_table())
        elif len(self.table) != len(self.segments):
            raise InvalidInputError("segment table and payload counts differ")

    def _fresh_table(self):
        pos = _HEADER.size + _COUNT.size + _ENTRY.size * len(self.segments)
        table = []
        for seg in self.segments:
            table.append(SegmentEntry(pos, len(seg), crc32(seg)))
            pos += len(seg)
        return tuple(table)

    @property
    def payload_bytes(self):
        return sum(len(s) for s in self.segments)

    def to_bytes(self):
        parts = [self.header.pack(), _COUNT.pack(len(self.segments))]
        parts += [_ENTRY.pack(e.offset, e.length, e.crc) for e in self.table]
        parts += self.segments
        return b"".join(parts)

    @classmethod
    def from_bytes(cls, data):
        """Parse the layout; payload CRCs are checked by :meth:`verify`."""
        data = bytes(data)
        if len(data) < _HEADER.size + _COUNT.size:
            raise DecodeError("container header truncated")
        (magic, version, w, h, frames, k, interval, n, q, key_id, stripe, drives,
         parity) = _HEADER.unpack_from(data)
        if magic != MAGIC:
            raise DecodeError("not an archive container")
        if version != VERSION:
            raise DecodeError(f"unsupported container version {version}")
        (count,) = _COUNT.unpack_from(data, _HEADER.size)
        pos = _HEADER.size + _COUNT.size
        if pos + count * _ENTRY.size > len(data):
            raise DecodeError("segment table truncated")
        table, segments = [], []
        expect = pos + count * _ENTRY.size
        for i in range(count):
            e = SegmentEntry(*_ENTRY.unpack_from(data, pos + i * _ENTRY.size))
            if e.offset != expect or e.offset + e.length > len(data):
                raise DecodeError(f"segment {i} lies outside the payload area")
            table.append(e)
            segments.append(data[e.offset:e.offset + e.length])
            expect += e.length
        if expect != len(data):
            raise DecodeError("trailing bytes after the last segment")
        header = ContainerHeader(w, h, frames, k, interval, n, q, key_id, stripe, drives,
                                 parity)
        return cls(header, tuple(segments), tuple(table))

    def verify(self):
        for i, (entry, seg) in enumerate(zip(self.table, self.segments)):
            if crc32(seg) != entry.crc:
                raise IntegrityError(f"segment {i}: CRC-32 mismatch", segment=i)
        return True
