"""Simulated drive pool, RAID-5 striping and the archive pipeline."""

from .checkpoint import (MAX_BACKUP, STATE_BUDGET, CheckpointState, Stage,
                         restore_checkpoint, save_checkpoint)
from .container import ArchiveContainer, ContainerHeader, SegmentEntry, crc32
from .pipeline import (ArchiveResult, Journal, RetrieveResult, archive, decrypt_segment,
                       encrypt_segment, frame_features, key_id, load_container, retrieve)
from .pool import (BLOCK_SIZE, DEFAULT_STRIPE_SIZE, Drive, DrivePool, DriveSpec, FileStore,
                   MemoryStore, PoolLayout, create_pool, format_layout, init_file_pool,
                   load_layout, open_pool, parse_layout)
from .raid import (Chunk, Stripe, StripeMap, TransferStats, p2p_transfer, parity_position,
                   raid_read, raid_write, reconstruct, scrub, stripe_residue, xor_bytes)

__all__ = [
    "BLOCK_SIZE", "DEFAULT_STRIPE_SIZE", "MAX_BACKUP", "STATE_BUDGET", "ArchiveContainer",
    "ArchiveResult", "CheckpointState", "Chunk", "ContainerHeader", "Drive", "DrivePool",
    "DriveSpec", "FileStore", "Journal", "MemoryStore", "PoolLayout", "RetrieveResult",
    "SegmentEntry", "Stage", "Stripe", "StripeMap", "TransferStats", "archive",
    "crc32", "create_pool", "decrypt_segment", "encrypt_segment", "format_layout",
    "frame_features", "init_file_pool", "key_id", "load_container", "load_layout",
    "open_pool", "p2p_transfer", "parity_position", "parse_layout", "raid_read",
    "raid_write", "reconstruct", "restore_checkpoint", "retrieve", "save_checkpoint",
    "scrub", "stripe_residue", "xor_bytes",
]
