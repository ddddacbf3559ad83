"""Simulated drive pool of plain and computational-storage drives.

Pool layout text is line oriented.  Global settings are ``key=value`` lines;
each drive is one line of whitespace-separated ``key=value`` pairs that
starts with ``drive=<id>``::

    backing=file
    stripe_size=65536
    raid=5
    drive=0 kind=plain capacity=16777216 path=d0.img
    drive=1 kind=csd   capacity=16777216 path=d1.img

Relative paths resolve against the layout file's directory.  A file-backed
pool keeps its stripe allocation cursor in ``<layout>.state``.
"""

import json
import os
import threading
from dataclasses import dataclass, field
from pathlib import Path

from ..errors import DriveFailure, InvalidInputError

BLOCK_SIZE = 4096
DEFAULT_STRIPE_SIZE = 64 * 1024
KINDS = ("plain", "csd")


class MemoryStore:
    """Sparse block store; unwritten blocks read as zeros."""

    def __init__(self):
        self._blocks = {}

    def read(self, offset, length):
        out = bytearray(length)
        pos = offset
        while pos < offset + length:
            blk, within = divmod(pos, BLOCK_SIZE)
            n = min(BLOCK_SIZE - within, offset + length - pos)
            data = self._blocks.get(blk)
            if data is not None:
                out[pos - offset:pos - offset + n] = data[within:within + n]
            pos += n
        return bytes(out)

    def write(self, offset, data):
        pos = offset
        view = memoryview(data)
        while view:
            blk, within = divmod(pos, BLOCK_SIZE)
            n = min(BLOCK_SIZE - within, len(view))
            block = self._blocks.setdefault(blk, bytearray(BLOCK_SIZE))
            block[within:within + n] = view[:n]
            view = view[n:]
            pos += n

    def available(self):
        return self._blocks is not None

    def destroy(self):
        self._blocks = None

    def create(self):
        self._blocks = {}


class FileStore:
    """Block store backed by one (sparse) file; a missing file is a failed drive."""

    def __init__(self, path):
        self.path = Path(path)

    def available(self):
        return self.path.exists()

    def read(self, offset, length):
        with open(self.path, "rb") as fh:
            fh.seek(offset)
            data = fh.read(length)
        return data + bytes(length - len(data))

    def write(self, offset, data):
        with open(self.path, "r+b") as fh:
            fh.seek(offset)
            fh.write(data)

    def destroy(self):
        if self.path.exists():
            self.path.unlink()

    def create(self):
        self.path.parent.mkdir(parents=True, exist_ok=True)
        with open(self.path, "wb"):
            pass


@dataclass
class Drive:
    id: int
    kind: str
    capacity: int
    store: object = field(repr=False)
    failed: bool = False
    compute_buffer: bytearray = field(default_factory=bytearray, repr=False)

    @property
    def is_csd(self):
        return self.kind == "csd"

    @property
    def available(self):
        return not self.failed and self.store.available()

    def _check(self, offset, length):
        if not self.available:
            raise DriveFailure(self.id)
        if offset < 0 or offset + length > self.capacity:
            raise InvalidInputError(
                f"drive {self.id}: access [{offset}, {offset + length}) beyond capacity")

    def read(self, offset, length):
        self._check(offset, length)
        return self.store.read(offset, length)

    def write(self, offset, data):
        self._check(offset, len(data))
        self.store.write(offset, data)


@dataclass(frozen=True)
class DriveSpec:
    id: int
    kind: str = "plain"
    capacity: int = 16 * 1024 * 1024
    path: str = None


@dataclass(frozen=True)
class PoolLayout:
    drives: tuple
    stripe_size: int = DEFAULT_STRIPE_SIZE
    backing: str = "memory"
    raid: int = 5
    root: str = "."
    source: str = None           # layout file path, if parsed from one

    @property
    def state_path(self):
        return Path(self.source).with_name(Path(self.source).name + ".state") if self.source else None


def parse_layout(text, root=".", source=None):
    settings = {}
    drives = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        pairs = []
        for tok in tokens:
            if "=" not in tok:
                raise InvalidInputError(f"line {lineno}: expected key=value, got {tok!r}")
            pairs.append(tuple(tok.split("=", 1)))
        if pairs[0][0] == "drive":
            spec = {"id": pairs[0][1]}
            spec.update(pairs[1:])
            try:
                drives.append(DriveSpec(id=int(spec["id"]), kind=spec.get("kind", "plain"),
                                        capacity=int(spec.get("capacity", 16 * 1024 * 1024)),
                                        path=spec.get("path")))
            except ValueError as exc:
                raise InvalidInputError(f"line {lineno}: {exc}") from exc
        elif len(pairs) == 1:
            settings[pairs[0][0]] = pairs[0][1]
        else:
            raise InvalidInputError(f"line {lineno}: one setting per line")
    try:
        return PoolLayout(drives=tuple(drives),
                          stripe_size=int(settings.get("stripe_size", DEFAULT_STRIPE_SIZE)),
                          backing=settings.get("backing", "memory"),
                          raid=int(settings.get("raid", 5)),
                          root=str(root), source=source)
    except ValueError as exc:
        raise InvalidInputError(str(exc)) from exc


def load_layout(path):
    path = Path(path)
    return parse_layout(path.read_text(), root=path.parent, source=str(path))


def format_layout(layout):
    lines = [f"backing={layout.backing}", f"stripe_size={layout.stripe_size}",
             f"raid={layout.raid}"]
    for d in layout.drives:
        line = f"drive={d.id} kind={d.kind} capacity={d.capacity}"
        if d.path:
            line += f" path={d.path}"
        lines.append(line)
    return "\n".join(lines) + "\n"


class DrivePool:
    def __init__(self, drives, stripe_size=DEFAULT_STRIPE_SIZE, raid=5, state_path=None):
        self.drives = list(drives)
        self.stripe_size = stripe_size
        self.raid = raid
        self.next_stripe = 0
        self.state_path = Path(state_path) if state_path else None
        self._index = {d.id: pos for pos, d in enumerate(self.drives)}
        self._stripe_locks = {}
        self._lock = threading.Lock()

    def __len__(self):
        return len(self.drives)

    @property
    def drive_ids(self):
        return [d.id for d in self.drives]

    def drive(self, drive_id):
        try:
            return self.drives[self._index[drive_id]]
        except KeyError:
            raise InvalidInputError(f"no drive with id {drive_id}") from None

    def position(self, drive_id):
        return self._index[drive_id]

    @property
    def slot_capacity(self):
        """Number of stripes that fit on the smallest drive."""
        return min(d.capacity for d in self.drives) // self.stripe_size

    def stripe_lock(self, stripe):
        with self._lock:
            return self._stripe_locks.setdefault(stripe, threading.Lock())

    def failed_drives(self):
        return [d.id for d in self.drives if not d.available]

    def fail_drive(self, drive_id):
        """Pull a drive: its contents are gone until :func:`reconstruct` rebuilds it."""
        d = self.drive(drive_id)
        d.store.destroy()
        d.failed = True

    def save_state(self):
        if self.state_path:
            self.state_path.write_text(json.dumps({"next_stripe": self.next_stripe}))

    def load_state(self):
        if self.state_path and self.state_path.exists():
            self.next_stripe = int(json.loads(self.state_path.read_text())["next_stripe"])


def create_pool(layout, create=True):
    """Build a pool with empty block stores; existing backing files are reused.

    With ``create=False`` a file-backed pool that was never initialized is left
    untouched and reported as :class:`InvalidInputError`.
    """
    if not isinstance(layout, PoolLayout):
        layout = PoolLayout(drives=tuple(layout))
    ids = [d.id for d in layout.drives]
    if len(set(ids)) != len(ids):
        raise InvalidInputError("drive ids must be unique")
    if layout.raid != 5:
        raise InvalidInputError(f"unsupported RAID level {layout.raid}")
    if len(ids) < 3:
        raise InvalidInputError("RAID-5 needs at least three drives")
    if layout.stripe_size <= 0:
        raise InvalidInputError("stripe size must be positive")
    if layout.backing not in ("memory", "file"):
        raise InvalidInputError(f"unknown backing {layout.backing!r}")
    drives = []
    for spec in layout.drives:
        if spec.kind not in KINDS:
            raise InvalidInputError(f"drive {spec.id}: unknown kind {spec.kind!r}")
        if spec.capacity < layout.stripe_size:
            raise InvalidInputError(f"drive {spec.id}: capacity below one stripe")
        if layout.backing == "file":
            path = Path(spec.path or f"drive{spec.id}.img")
            if not path.is_absolute():
                path = Path(layout.root) / path
            store = FileStore(path)
        else:
            store = MemoryStore()
        drives.append(Drive(spec.id, spec.kind, spec.capacity, store))
    pool = DrivePool(drives, layout.stripe_size, layout.raid, layout.state_path)
    if layout.backing == "file":
        fresh = pool.state_path is None or not pool.state_path.exists()
        if fresh and not create:
            raise InvalidInputError("pool not initialized")
        for d in drives:
            if fresh and not d.store.available():
                d.store.create()
        pool.load_state()
    return pool


def open_pool(path, create=True):
    return create_pool(load_layout(path), create)


def init_file_pool(path, layout):
    """Write ``layout`` to ``path`` and create empty backing files."""
    path = Path(path)
    path.write_text(format_layout(layout))
    state = path.with_name(path.name + ".state")
    if state.exists():
        os.remove(state)
    pool = create_pool(load_layout(path))
    pool.save_state()
    return pool
