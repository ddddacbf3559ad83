"""Analytic sizing of the exemplar accelerator, archival data-rate arithmetic,
redundancy overhead, and a two-resource compute-placement latency model."""

import csv
import io
import math
from dataclasses import dataclass, field

from .errors import InvalidInputError

KIB = 1024
SECONDS_PER_DAY = 86400
TIB = 2 ** 40


@dataclass(frozen=True)
class AcceleratorConfig:
    grid: tuple = (8, 8)
    tiles: int = 64
    filter_banks: int = 64
    filter_bank_bytes: int = 1 * KIB
    input_buffer_bytes: int = 64 * KIB   # stated total, double-buffered
    input_half_bytes: int = 16 * KIB     # stated half size; not 64 KiB / 2
    output_bank_bytes: int = 1 * KIB
    scratchpad_bytes: int = 64 * KIB
    state_buffer_bytes: int = 1 * KIB

    def __post_init__(self):
        if self.grid[0] * self.grid[1] != self.tiles:
            raise InvalidInputError("tile count must equal the grid product")


def _positive(*dims):
    for d in dims:
        if int(d) != d or d <= 0:
            raise InvalidInputError(f"dimensions must be positive integers, got {dims}")


def conv_iterations(c, h, w, tiles=64):
    """Iterations for one ``c x h x w`` kernel spread over the tiles."""
    _positive(c, h, w)
    return -(-(c * h * w) // tiles)


def input_load(x, y, z):
    """``(iterations, per-buffer loading cycles)`` for an ``x*y*z`` input.

    The per-buffer figure ``xyz / 2048`` is rounded up.
    """
    _positive(x, y, z)
    v = x * y * z
    return -(-v // 1024), -(-v // 2048)


def batch_size(active_tiles, min_channels):
    """``floor(A / L)``; 0 means no batching is possible."""
    if min_channels <= 0:
        raise InvalidInputError("minimum channel count must be positive")
    if active_tiles < 1:
        raise InvalidInputError("need at least one active tile")
    return active_tiles // min_channels


@dataclass(frozen=True)
class RawRate:
    bytes_per_frame: int
    bytes_per_second: int
    bytes_per_day: int

    @property
    def mib_per_frame(self):
        return self.bytes_per_frame / 2 ** 20

    @property
    def gib_per_second(self):
        return self.bytes_per_second / 2 ** 30

    @property
    def tib_per_day(self):
        return self.bytes_per_day / TIB


def raw_rate(width, height, channels, bytes_per_sample, fps):
    _positive(width, height, channels, bytes_per_sample, fps)
    frame = width * height * channels * bytes_per_sample
    return RawRate(frame, frame * fps, frame * fps * SECONDS_PER_DAY)


def redundancy_overhead(scheme, drive_count=None):
    """Extra capacity per byte of data: RAID-5 ``1/(N-1)``, mirroring 1."""
    scheme = scheme.lower()
    if scheme in ("raid5", "raid-5"):
        if drive_count is None or drive_count < 3:
            raise InvalidInputError("RAID-5 needs at least three drives")
        return 1.0 / (drive_count - 1)
    if scheme in ("mirror", "raid1", "raid-1"):
        return 1.0
    raise InvalidInputError(f"unknown redundancy scheme {scheme!r}")


@dataclass(frozen=True)
class PlacementScenario:
    """Where the data lives and where the kernel runs.

    ``fractions`` maps a location name to its share of the data; a location
    named ``host`` runs the kernel on the host CPU over the host I/O path,
    any other location runs it on that drive's own compute.
    """

    name: str
    fractions: dict = field(default_factory=lambda: {"host": 1.0})
    host_bw: float = 2e9
    internal_bw: float = 8e9
    host_rate: float = 1e9
    csd_rate: float = 1e9
    payload_bytes: float = 64e9
    work_units: float = 64e9

    def __post_init__(self):
        if not self.fractions or any(f < 0 for f in self.fractions.values()):
            raise InvalidInputError("fractions must be non-negative")
        if not math.isclose(sum(self.fractions.values()), 1.0, abs_tol=1e-9):
            raise InvalidInputError("data fractions must sum to 1")
        for v in (self.host_bw, self.internal_bw, self.host_rate, self.csd_rate,
                  self.payload_bytes, self.work_units):
            if not v > 0:
                raise InvalidInputError("rates and sizes must be positive")


def host_latency(s, share=1.0):
    return share * (s.payload_bytes / s.host_bw + s.work_units / s.host_rate)


def csd_latency(s, share):
    return share * (s.payload_bytes / s.internal_bw + s.work_units / s.csd_rate)


def placement_latency(s):
    """``(latency, speedup over running everything on the host)``.

    Locations proceed in parallel, so the scenario finishes with its
    slowest location.
    """
    parts = []
    for loc, share in s.fractions.items():
        if share == 0:
            continue
        parts.append(host_latency(s, share) if loc == "host" else csd_latency(s, share))
    latency = max(parts)
    return latency, host_latency(s) / latency


def distribution_table(**params):
    """The six placements of the two-drive data-distribution experiment."""
    rows = [
        ("CSD1 data, host kernel", {"host": 1.0}),
        ("CSD1", {"csd1": 1.0}),
        ("CSD1 0.1 / CSD2 0.9", {"csd1": 0.1, "csd2": 0.9}),
        ("CSD1 0.3 / CSD2 0.7", {"csd1": 0.3, "csd2": 0.7}),
        ("CSD1 0.4 / CSD2 0.6", {"csd1": 0.4, "csd2": 0.6}),
        ("CSD1 0.5 / CSD2 0.5", {"csd1": 0.5, "csd2": 0.5}),
    ]
    return [PlacementScenario(name, fr, **params) for name, fr in rows]


def report_csv(scenarios):
    buf = io.StringIO()
    out = csv.writer(buf, lineterminator="\n")
    out.writerow(["scenario", "latency", "speedup"])
    for s in scenarios:
        lat, speed = placement_latency(s)
        out.writerow([s.name, f"{lat:.6g}", f"{speed:.4f}"])
    return buf.getvalue()


_FLOAT_KEYS = ("host_bw", "internal_bw", "host_rate", "csd_rate", "payload_bytes",
               "work_units")


def parse_scenarios(text):
    """Parse ``key=value`` scenario text; a blank line separates scenarios.

    Recognised keys are ``name``, the rate/size fields of
    :class:`PlacementScenario`, and ``data.<location>=<fraction>``.
    """
    scenarios = []
    for block in _blocks(text):
        kwargs, fractions = {}, {}
        for lineno, key, value in block:
            if key == "name":
                kwargs["name"] = value
            elif key in _FLOAT_KEYS:
                kwargs[key] = float(value)
            elif key.startswith("data."):
                fractions[key[5:]] = float(value)
            else:
                raise InvalidInputError(f"line {lineno}: unknown key {key!r}")
        kwargs.setdefault("name", f"scenario{len(scenarios) + 1}")
        if fractions:
            kwargs["fractions"] = fractions
        scenarios.append(PlacementScenario(**kwargs))
    return scenarios


def _blocks(text):
    block = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            if block:
                yield block
                block = []
            continue
        if "=" not in line:
            raise InvalidInputError(f"line {lineno}: expected key=value")
        key, value = (p.strip() for p in line.split("=", 1))
        block.append((lineno, key, value))
    if block:
        yield block
