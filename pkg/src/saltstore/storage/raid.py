"""RAID-5 over a :class:`DrivePool` with left-symmetric rotating parity.

Stripe ``s`` occupies the byte range ``[s*S, (s+1)*S)`` of every drive,
where ``S`` is the pool's stripe size.  With ``N`` drives the parity chunk
of stripe ``s`` sits at member position ``N - 1 - (s mod N)`` and data
chunk ``i`` at ``(parity + 1 + i) mod N``.  A short final chunk is padded
with zeros for the parity computation only; the pad is never written.
"""

import random
from collections import defaultdict
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass, field

import numpy as np

from ..errors import CapacityError, DriveFailure, InvalidInputError, UnrecoverableError
from .pool import BLOCK_SIZE


def xor_bytes(*chunks):
    size = max(len(c) for c in chunks)
    acc = np.zeros(size, dtype=np.uint8)
    for c in chunks:
        acc[:len(c)] ^= np.frombuffer(c, dtype=np.uint8)
    return acc.tobytes()


@dataclass(frozen=True)
class Chunk:
    drive: int
    offset: int          # byte offset on the drive
    length: int
    data_offset: int     # byte offset within the object; -1 for parity


@dataclass(frozen=True)
class Stripe:
    index: int
    parity_drive: int
    chunks: tuple        # data chunks in object order
    parity: Chunk

    @property
    def members(self):
        return self.chunks + (self.parity,)


@dataclass(frozen=True)
class StripeMap:
    object_id: str
    length: int
    stripe_size: int
    drive_ids: tuple
    stripes: tuple = field(default=())

    def to_dict(self):
        return {
            "object_id": self.object_id, "length": self.length,
            "stripe_size": self.stripe_size, "drive_ids": list(self.drive_ids),
            "stripes": [{"index": s.index, "parity_drive": s.parity_drive,
                         "parity": [s.parity.drive, s.parity.offset, s.parity.length],
                         "chunks": [[c.drive, c.offset, c.length, c.data_offset]
                                    for c in s.chunks]}
                        for s in self.stripes],
        }

    @classmethod
    def from_dict(cls, d):
        try:
            stripes = tuple(
                Stripe(s["index"], s["parity_drive"],
                       tuple(Chunk(*c) for c in s["chunks"]),
                       Chunk(*s["parity"], -1))
                for s in d["stripes"])
            return cls(d["object_id"], d["length"], d["stripe_size"],
                       tuple(d["drive_ids"]), stripes)
        except (KeyError, TypeError) as exc:
            raise InvalidInputError(f"malformed stripe map: {exc}") from exc


def parity_position(stripe, n):
    return n - 1 - (stripe % n)


def data_positions(stripe, n):
    p = parity_position(stripe, n)
    return [(p + 1 + i) % n for i in range(n - 1)]


def stripes_needed(length, n, stripe_size):
    per_stripe = (n - 1) * stripe_size
    return -(-length // per_stripe)


def raid_write(pool, object_id, data):
    """Stripe ``data`` across the pool starting at its allocation cursor."""
    data = bytes(data)
    n = len(pool)
    s_size = pool.stripe_size
    count = stripes_needed(len(data), n, s_size)
    first = pool.next_stripe
    if first + count > pool.slot_capacity:
        raise CapacityError(
            f"{len(data)} bytes need {count} stripes; {pool.slot_capacity - first} free")
    for d in pool.drives:
        if not d.available:
            raise DriveFailure(d.id)
    ids = pool.drive_ids
    stripes = []
    pos = 0
    for k in range(count):
        s = first + k
        base = s * s_size
        chunks = []
        payloads = []
        for p in data_positions(s, n):
            piece = data[pos:pos + s_size]
            if not piece:
                break
            chunks.append(Chunk(ids[p], base, len(piece), pos))
            payloads.append(piece)
            pos += len(piece)
        parity = xor_bytes(*payloads)
        pchunk = Chunk(ids[parity_position(s, n)], base, len(parity), -1)
        with pool.stripe_lock(s):
            for c, piece in zip(chunks, payloads):
                pool.drive(c.drive).write(c.offset, piece)
            pool.drive(pchunk.drive).write(pchunk.offset, parity)
        stripes.append(Stripe(s, pchunk.drive, tuple(chunks), pchunk))
    pool.next_stripe = first + count
    pool.save_state()
    return StripeMap(object_id, len(data), s_size, tuple(ids), tuple(stripes))


def _check_map(pool, smap):
    if tuple(pool.drive_ids) != tuple(smap.drive_ids) or smap.stripe_size != pool.stripe_size:
        raise InvalidInputError(f"stripe map for {smap.object_id!r} does not match this pool")


def _block_requests(chunk):
    """Split a chunk into block-aligned ``(drive, offset, length)`` fetches."""
    out = []
    pos = chunk.offset
    end = chunk.offset + chunk.length
    while pos < end:
        n = min(BLOCK_SIZE - pos % BLOCK_SIZE, end - pos)
        out.append((chunk.drive, pos, n))
        pos += n
    return out


def _reconstruct_chunk(pool, stripe, target):
    """XOR the surviving members of ``stripe`` to recover ``target``."""
    peers = [c for c in stripe.members if c is not target]
    missing = [c.drive for c in peers if not pool.drive(c.drive).available]
    if missing:
        raise UnrecoverableError(stripe.index, missing + [target.drive])
    parts = [pool.drive(c.drive).read(c.offset, c.length) for c in peers]
    return xor_bytes(*parts)[:target.length].ljust(target.length, b"\0")


@dataclass
class TransferStats:
    host_bytes: int = 0
    p2p_bytes: int = 0
    read_by_drive: dict = field(default_factory=lambda: defaultdict(int))
    written_by_drive: dict = field(default_factory=lambda: defaultdict(int))

    @property
    def total_read(self):
        return sum(self.read_by_drive.values())

    def merge(self, other):
        self.host_bytes += other.host_bytes
        self.p2p_bytes += other.p2p_bytes
        for k, v in other.read_by_drive.items():
            self.read_by_drive[k] += v
        for k, v in other.written_by_drive.items():
            self.written_by_drive[k] += v
        return self


def raid_read(pool, smap, parallelism=1, shuffle_seed=None, stats=None):
    """Fetch an object with up to ``parallelism`` block reads in flight.

    Completion order does not matter: every block lands at the object
    offset recorded in the map.  ``shuffle_seed`` permutes the issue order
    (used to exercise that claim).  Chunks on unavailable drives are rebuilt
    from parity; a stripe missing two members raises
    :class:`UnrecoverableError` naming the stripe.
    """
    if parallelism < 1:
        raise InvalidInputError("parallelism must be at least 1")
    _check_map(pool, smap)
    out = bytearray(smap.length)
    requests = []
    degraded = []
    for stripe in smap.stripes:
        for chunk in stripe.chunks:
            if pool.drive(chunk.drive).available:
                for drive, off, n in _block_requests(chunk):
                    requests.append((drive, off, n, chunk.data_offset + off - chunk.offset))
            else:
                degraded.append((stripe, chunk))
    if shuffle_seed is not None:
        random.Random(shuffle_seed).shuffle(requests)

    def fetch(req):
        drive, off, n, dest = req
        return dest, pool.drive(drive).read(off, n), drive

    stats = stats if stats is not None else TransferStats()
    with ThreadPoolExecutor(max_workers=parallelism) as ex:
        for i in range(0, len(requests), parallelism):
            batch = [ex.submit(fetch, r) for r in requests[i:i + parallelism]]
            for fut in as_completed(batch):
                dest, data, drive = fut.result()
                out[dest:dest + len(data)] = data
                stats.read_by_drive[drive] += len(data)
    for stripe, chunk in degraded:
        data = _reconstruct_chunk(pool, stripe, chunk)
        out[chunk.data_offset:chunk.data_offset + chunk.length] = data
        for peer in stripe.members:
            if peer is not chunk:
                stats.read_by_drive[peer.drive] += peer.length
    stats.host_bytes += smap.length
    return bytes(out)


def stripe_residue(pool, stripe_index):
    """XOR of every member slot of a stripe; all zeros when parity is consistent."""
    s = pool.stripe_size
    slots = [d.read(stripe_index * s, s) for d in pool.drives]
    return xor_bytes(*slots)


def scrub(pool, stripes=None):
    """Indices of allocated stripes whose members do not XOR to zero."""
    if stripes is None:
        stripes = range(pool.next_stripe)
    missing = pool.failed_drives()
    if missing:
        raise DriveFailure(missing[0])
    return [s for s in stripes if any(stripe_residue(pool, s))]


def reconstruct(pool, failed_drive_id):
    """Rebuild every allocated slot of a failed drive from its stripe peers.

    The drive's store is recreated empty and refilled; afterwards the pool
    is fully redundant again.  Returns the rebuilt :class:`Drive`.
    """
    target = pool.drive(failed_drive_id)
    others = [d for d in pool.drives if d is not target]
    gone = [d.id for d in others if not d.available]
    if gone:
        raise UnrecoverableError(0 if pool.next_stripe else -1, gone + [target.id])
    if target.available:
        raise InvalidInputError(f"drive {failed_drive_id} has not failed")
    target.store.create()
    target.failed = False
    s = pool.stripe_size
    for stripe in range(pool.next_stripe):
        with pool.stripe_lock(stripe):
            slot = xor_bytes(*(d.read(stripe * s, s) for d in others))
            if any(slot):
                target.write(stripe * s, slot)
    return target


def p2p_transfer(pool, src_drive, dst_csd, blocks, route="p2p"):
    """Copy 4 KiB blocks of ``src_drive`` into a CSD's compute buffer.

    ``route="p2p"`` models a direct drive-to-drive transfer; ``"host"``
    bounces the same bytes through host memory.
    """
    dst = pool.drive(dst_csd)
    if not dst.is_csd:
        raise InvalidInputError(f"drive {dst_csd} is not a computational storage drive")
    if route not in ("p2p", "host"):
        raise InvalidInputError(f"unknown route {route!r}")
    src = pool.drive(src_drive)
    stats = TransferStats()
    for blk in blocks:
        data = src.read(blk * BLOCK_SIZE, BLOCK_SIZE)
        dst.compute_buffer.extend(data)
        stats.read_by_drive[src.id] += len(data)
        stats.written_by_drive[dst.id] += len(data)
        if route == "p2p":
            stats.p2p_bytes += len(data)
        else:
            stats.host_bytes += len(data)
    return stats
