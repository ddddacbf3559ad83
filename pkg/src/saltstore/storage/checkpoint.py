"""Fixed-budget pipeline checkpoint that fits a 1 KiB state buffer.

Layout (little-endian)::

    stage u8 | group u32 | cursor u64 | generator state 4 x u64
    | backup_len u16 | backup | crc32 u32

The CRC covers every preceding byte.
"""

import enum
import struct
from dataclasses import dataclass

from ..errors import DecodeError, IntegrityError, InvalidInputError
from .container import crc32

STATE_BUDGET = 1024
_FIXED = struct.Struct("<BIQ4QH")
_CRC = struct.Struct("<I")
OVERHEAD = _FIXED.size + _CRC.size
MAX_BACKUP = STATE_BUDGET - OVERHEAD


class Stage(enum.IntEnum):
    IDLE = 0
    ENCODE = 1
    ENCRYPT = 2
    STAGED = 3
    COMMITTED = 4


@dataclass(frozen=True)
class CheckpointState:
    stage: Stage
    group: int                      # groups completed so far
    cursor: int                     # pool stripe cursor the archive will start at
    generator: tuple = (0, 0, 0, 0)
    backup: bytes = b""

    def __post_init__(self):
        object.__setattr__(self, "stage", Stage(self.stage))
        object.__setattr__(self, "backup", bytes(self.backup))
        object.__setattr__(self, "generator", tuple(int(g) for g in self.generator))
        if len(self.generator) != 4 or any(not 0 <= g < 2 ** 64 for g in self.generator):
            raise InvalidInputError("generator state is four 64-bit words")
        if len(self.backup) > MAX_BACKUP:
            raise InvalidInputError(
                f"backup of {len(self.backup)} bytes exceeds the {MAX_BACKUP}-byte budget")
        if not 0 <= self.group < 2 ** 32 or not 0 <= self.cursor < 2 ** 64:
            raise InvalidInputError("group or cursor out of range")


def save_checkpoint(state):
    body = _FIXED.pack(state.stage, state.group, state.cursor, *state.generator,
                       len(state.backup)) + state.backup
    return body + _CRC.pack(crc32(body))


def restore_checkpoint(data):
    data = bytes(data)
    if len(data) < OVERHEAD:
        raise DecodeError("checkpoint truncated")
    if len(data) > STATE_BUDGET:
        raise DecodeError("checkpoint larger than the state buffer")
    body, (crc,) = data[:-_CRC.size], _CRC.unpack(data[-_CRC.size:])
    if crc32(body) != crc:
        raise IntegrityError("checkpoint CRC-32 mismatch")
    stage, group, cursor, g0, g1, g2, g3, blen = _FIXED.unpack_from(body)
    if _FIXED.size + blen != len(body):
        raise DecodeError("checkpoint backup length inconsistent")
    try:
        return CheckpointState(Stage(stage), group, cursor, (g0, g1, g2, g3),
                               body[_FIXED.size:])
    except ValueError as exc:
        raise DecodeError(str(exc)) from exc
