"""End-to-end write path (encode, encrypt, stage, stripe) and read path
(gather, verify, decrypt, decode, exemplar tagging).

Each group's encrypted segment is staged in a :class:`Journal` and a
checkpoint is written after it.  Striping happens once, after the last
group, so an archive interrupted at any group boundary resumes from the
journal and produces the same container bytes as an uninterrupted run.
"""

import hashlib
import json
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..codec import CodecParams, EncodedGop, decode_gop, encode_gop, extract_features
from ..errors import DecodeError, IntegrityError, InvalidInputError, PowerLoss
from ..exemplar import DriftCase, classify_drift
from ..rlwe import (DEFAULT_PARAMS, Plaintext, ciphertext_body, ciphertext_from_body,
                    decrypt, derive_seed, dump_public_key, encrypt)
from ..rlwe.serialize import poly_nbytes
from .checkpoint import CheckpointState, Stage, restore_checkpoint, save_checkpoint
from .container import PARITY_RAID5, ArchiveContainer, ContainerHeader, crc32
from .raid import StripeMap, TransferStats, raid_read, raid_write

_BACKUP = struct.Struct("<III")     # job crc, last segment length, last segment crc


class Journal:
    """Staging area for segments and the checkpoint; memory or a directory."""

    def __init__(self, root=None):
        self.root = Path(root) if root is not None else None
        self._mem = {}
        if self.root is not None:
            self.root.mkdir(parents=True, exist_ok=True)

    def put(self, name, data):
        if self.root is None:
            self._mem[name] = bytes(data)
            return
        tmp = self.root / (name + ".tmp")
        tmp.write_bytes(data)
        tmp.replace(self.root / name)

    def get(self, name):
        if self.root is None:
            return self._mem.get(name)
        path = self.root / name
        return path.read_bytes() if path.exists() else None

    def clear(self):
        if self.root is None:
            self._mem.clear()
            return
        for p in self.root.iterdir():
            p.unlink()


def _public(keys):
    return getattr(keys, "public", keys)


def _ring_params(keys, params=None):
    return params or getattr(keys, "params", DEFAULT_PARAMS)


def key_id(keys, params=None):
    """First 16 bytes of SHA-256 over the serialized public key."""
    return hashlib.sha256(dump_public_key(_public(keys), _ring_params(keys, params))).digest()[:16]


def block_bytes(params=DEFAULT_PARAMS):
    return params.n // 8


def encrypt_segment(plain, keys, seed, group, params=DEFAULT_PARAMS):
    """Length-prefix ``plain``, zero-pad to whole blocks and encrypt each block."""
    bsz = block_bytes(params)
    framed = struct.pack("<I", len(plain)) + plain
    framed += bytes(-len(framed) % bsz)
    pk = _public(keys)
    bodies = []
    for b in range(len(framed) // bsz):
        m = Plaintext.from_bytes(framed[b * bsz:(b + 1) * bsz])
        bodies.append(ciphertext_body(encrypt(m, pk, params, derive_seed(seed, group, b))))
    return b"".join(bodies)


def decrypt_segment(segment, keys, params=DEFAULT_PARAMS):
    body = 2 * poly_nbytes(params.n)
    if len(segment) % body:
        raise DecodeError("segment is not a whole number of ciphertexts")
    plain = b"".join(
        decrypt(ciphertext_from_body(segment[i:i + body], params), keys, params).to_bytes()
        for i in range(0, len(segment), body))
    (n,) = struct.unpack_from("<I", plain)
    if 4 + n > len(plain):
        raise DecodeError("decrypted length prefix exceeds the segment")
    return plain[4:4 + n]


@dataclass(frozen=True)
class ArchiveResult:
    container: ArchiveContainer
    stripe_map: StripeMap
    codec_bytes: int        # serialized groups before encryption
    resumed_from: int = 0   # groups skipped thanks to a checkpoint


def _split(frames, interval):
    return [frames[i:i + interval] for i in range(0, len(frames), interval)]


def archive(frames, pool, keys, params=CodecParams(), seed=0, object_id="archive",
            journal=None, power_loss_after=None, ring=None):
    """Archive ``frames`` into ``pool``.

    ``power_loss_after=g`` raises :class:`PowerLoss` right after the
    checkpoint for group ``g`` is written.  Calling again with the same
    journal resumes after the last checkpointed group.
    """
    frames = list(frames)
    if not frames:
        raise InvalidInputError("nothing to archive")
    ring = _ring_params(keys, ring)
    journal = journal if journal is not None else Journal()
    h, w = frames[0].shape
    groups = _split(frames, params.anchor_interval)
    header = ContainerHeader(w, h, len(frames), params.num_layers, params.anchor_interval,
                             ring.n, ring.q, key_id(keys, ring), pool.stripe_size,
                             len(pool), PARITY_RAID5)
    job = crc32(header.pack() + repr((params, seed, object_id)).encode())

    start, cursor = 0, pool.next_stripe
    generator = (seed % 2 ** 64, 0, 0, derive_seed(seed, 0))
    raw = journal.get("checkpoint")
    if raw is not None:
        state = restore_checkpoint(raw)
        job_seen, last_len, last_crc = _BACKUP.unpack(state.backup)
        if job_seen != job:
            raise InvalidInputError("journal holds a checkpoint for a different archive job")
        if state.stage is Stage.COMMITTED:
            return _committed(journal, header, len(groups), state.group)
        if state.group:
            last = journal.get(f"seg{state.group - 1}")
            if last is None or len(last) != last_len or crc32(last) != last_crc:
                raise IntegrityError("staged segment does not match the checkpoint",
                                     segment=state.group - 1)
        if pool.next_stripe != state.cursor:
            raise InvalidInputError(
                f"pool cursor moved from {state.cursor} to {pool.next_stripe} since the checkpoint")
        start, cursor, generator = state.group, state.cursor, state.generator

    for g in range(start, len(groups)):
        plain = encode_gop(groups[g], params).to_bytes()
        journal.put(f"plain{g}", struct.pack("<I", len(plain)))
        segment = encrypt_segment(plain, keys, seed, g, ring)
        journal.put(f"seg{g}", segment)
        blocks = generator[2] + len(segment) // (2 * poly_nbytes(ring.n))
        generator = (seed % 2 ** 64, g + 1, blocks, derive_seed(seed, g + 1))
        state = CheckpointState(Stage.STAGED, g + 1, cursor, generator,
                                _BACKUP.pack(job, len(segment), crc32(segment)))
        journal.put("checkpoint", save_checkpoint(state))
        if power_loss_after == g:
            raise PowerLoss(f"power lost after group {g}")

    container = ArchiveContainer(header, [journal.get(f"seg{g}") for g in range(len(groups))])
    smap = raid_write(pool, object_id, container.to_bytes())
    journal.put("map", json.dumps(smap.to_dict()).encode())
    journal.put("checkpoint", save_checkpoint(CheckpointState(
        Stage.COMMITTED, len(groups), cursor, generator, _BACKUP.pack(job, 0, 0))))
    return ArchiveResult(container, smap, _codec_bytes(journal, len(groups)), start)


def _codec_bytes(journal, count):
    return sum(struct.unpack("<I", journal.get(f"plain{g}"))[0] for g in range(count))


def _committed(journal, header, count, done):
    if done != count:
        raise InvalidInputError("committed checkpoint disagrees with the group count")
    container = ArchiveContainer(header, [journal.get(f"seg{g}") for g in range(count)])
    smap = StripeMap.from_dict(json.loads(journal.get("map")))
    return ArchiveResult(container, smap, _codec_bytes(journal, count), count)


@dataclass(frozen=True)
class RetrieveResult:
    frames: list                # every decoded frame
    tags: list                  # DriftCase per frame, or None without a model
    exemplar_indices: list
    stats: TransferStats

    @property
    def exemplars(self):
        return [self.frames[i] for i in self.exemplar_indices]


def load_container(pool, smap, parallelism=1, stats=None):
    return ArchiveContainer.from_bytes(raid_read(pool, smap, parallelism, stats=stats))


def retrieve(pool, smap, keys, k_max=None, cluster_model=None, parallelism=1,
             container=None, extractor=None):
    """Read an archive back and tag every frame against ``cluster_model``.

    The striped object is reassembled before anything is decrypted.  A
    wrong key is caught by the key id in the header; damaged payloads by
    the segment CRCs, since decryption itself cannot detect garbage.
    Without a model every frame counts as an exemplar.
    """
    stats = TransferStats()
    if container is None:
        container = load_container(pool, smap, parallelism, stats)
    container.verify()
    hdr = container.header
    ring = _ring_params(keys)
    if key_id(keys, ring) != hdr.key_id:
        raise InvalidInputError("archive was sealed for a different key")
    if (hdr.n, hdr.q) != (ring.n, ring.q):
        raise DecodeError("archive ring parameters differ from the key's")
    frames = []
    for i, seg in enumerate(container.segments):
        try:
            g = EncodedGop.from_bytes(decrypt_segment(seg, keys, ring))
        except DecodeError as exc:
            raise DecodeError(f"segment {i}: {exc}") from exc
        frames.extend(decode_gop(g, k_max))
    if len(frames) != hdr.frame_count:
        raise DecodeError(f"decoded {len(frames)} frames, header says {hdr.frame_count}")
    if cluster_model is None:
        return RetrieveResult(frames, None, list(range(len(frames))), stats)
    tags = [classify_drift(extract_features(f, extractor), cluster_model) for f in frames]
    picked = [i for i, t in enumerate(tags) if t is not DriftCase.KNOWN]
    return RetrieveResult(frames, tags, picked, stats)


def frame_features(frames, extractor=None):
    return np.stack([extract_features(f, extractor) for f in frames])
