import io
import json

import numpy as np
import pytest

from saltstore.cli import EXIT_DATA, EXIT_OK, EXIT_USAGE, main, read_clip, write_clip
from saltstore.codec import Frame

LAYOUT = """backing=file
stripe_size=16384
drive=0 kind=plain capacity=4194304 path=d0.img
drive=1 kind=plain capacity=4194304 path=d1.img
drive=2 kind=plain capacity=4194304 path=d2.img
drive=3 kind=csd capacity=4194304 path=d3.img
"""


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = main([str(a) for a in argv], out, err)
    return code, out.getvalue(), err.getvalue()


def clip(n=12, size=32, seed=0):
    rng = np.random.default_rng(seed)
    y, x = np.mgrid[0:size, 0:size]
    frames = [Frame.from_array(((x * 4 + y + 2 * t) % 256).astype(np.uint8)) for t in range(n)]
    frames[n // 2] = Frame.from_array(rng.integers(0, 256, (size, size), dtype=np.uint8))
    return frames


def pool_snapshot(d):
    return {p.name: p.read_bytes() for p in sorted(d.iterdir()) if p.suffix in (".img", ".state")}


@pytest.fixture
def ws(tmp_path):
    (tmp_path / "pool.cfg").write_text(LAYOUT)
    write_clip(tmp_path / "clip.raw", clip())
    assert run("keygen", "--seed", 7, "--out", tmp_path / "k.slwe")[0] == EXIT_OK
    return tmp_path


def archive_args(ws):
    return ("archive", "--in", ws / "clip.raw", "--pool", ws / "pool.cfg",
            "--key", ws / "k.slwe", "--out", ws / "map.salt")


def retrieve_args(ws, out="back.raw"):
    return ("retrieve", "--in", ws / "map.salt", "--pool", ws / "pool.cfg",
            "--key", ws / "k.slwe", "--out", ws / out)


def test_raw_clip_roundtrip(tmp_path):
    frames = clip(3, 16)
    write_clip(tmp_path / "c.raw", frames)
    assert read_clip(tmp_path / "c.raw") == frames
    raw = (tmp_path / "c.raw").read_bytes()
    assert raw[:8] == bytes([16, 0, 16, 0, 3, 0, 0, 0])


def test_keygen_deterministic(tmp_path):
    run("keygen", "--seed", 7, "--out", tmp_path / "a")
    run("keygen", "--seed", 7, "--out", tmp_path / "b")
    run("keygen", "--seed", 8, "--out", tmp_path / "c")
    a = (tmp_path / "a").read_bytes()
    assert a == (tmp_path / "b").read_bytes() != (tmp_path / "c").read_bytes()


def test_archive_retrieve_bit_exact(ws):
    code, out, _ = run(*archive_args(ws))
    assert code == EXIT_OK and "archived 12 frames" in out
    assert json.loads((ws / "map.salt").read_text())["stripe_size"] == 16384
    code, out, _ = run(*retrieve_args(ws), "--kmax", 4, "--parallel", 4)
    assert code == EXIT_OK
    assert read_clip(ws / "back.raw") == read_clip(ws / "clip.raw")


def test_archive_is_reproducible(ws, tmp_path_factory):
    run(*archive_args(ws))
    first = pool_snapshot(ws)
    other = tmp_path_factory.mktemp("again")
    (other / "pool.cfg").write_text(LAYOUT)
    write_clip(other / "clip.raw", clip())
    run("keygen", "--seed", 7, "--out", other / "k.slwe")
    assert run(*archive_args(other))[0] == EXIT_OK
    assert pool_snapshot(other) == first


def test_failures_and_rebuild(ws):
    run(*archive_args(ws))
    assert run("fail", "--pool", ws / "pool.cfg", "--drive", 2)[0] == EXIT_OK
    assert run(*retrieve_args(ws))[0] == EXIT_OK
    assert read_clip(ws / "back.raw") == read_clip(ws / "clip.raw")
    assert run("fail", "--pool", ws / "pool.cfg", "--drive", 3)[0] == EXIT_OK
    code, _, err = run(*retrieve_args(ws, "x.raw"))
    assert code == EXIT_DATA
    assert "stripe 0 unrecoverable" in err and "2, 3" in err


def test_rebuild_restores_scrub(ws):
    run(*archive_args(ws))
    before = pool_snapshot(ws)
    run("fail", "--pool", ws / "pool.cfg", "--drive", 1)
    assert run("scrub", "--pool", ws / "pool.cfg")[0] == EXIT_DATA
    code, out, _ = run("rebuild", "--pool", ws / "pool.cfg", "--drive", 1)
    assert code == EXIT_OK and "rebuilt" in out
    assert pool_snapshot(ws) == before
    code, out, _ = run("scrub", "--pool", ws / "pool.cfg")
    assert code == EXIT_OK and "0 inconsistent" in out


def test_corruption_reported_as_data_error(ws):
    run(*archive_args(ws))
    img = ws / "d0.img"
    raw = bytearray(img.read_bytes())
    raw[100] ^= 0xFF
    img.write_bytes(bytes(raw))
    code, _, err = run(*retrieve_args(ws))
    assert code == EXIT_DATA and "segment" in err


def test_model_and_exemplar_query(ws):
    write_clip(ws / "train.raw", [f for i, f in enumerate(clip()) if i != 6])
    code, out, _ = run("model", "--in", ws / "train.raw", "--out", ws / "m.bin",
                       "--k", 2, "--seed", 1)
    assert code == EXIT_OK and out.startswith("model: k=2")
    run(*archive_args(ws))
    code, out, _ = run("exemplar", "--in", ws / "map.salt", "--pool", ws / "pool.cfg",
                       "--key", ws / "k.slwe", "--model", ws / "m.bin",
                       "--out", ws / "ex.raw")
    assert code == EXIT_OK
    assert out.splitlines()[0].startswith("6 ")
    assert read_clip(ws / "ex.raw") == [read_clip(ws / "clip.raw")[6]]


def test_bench_prints_tables(ws):
    code, out, _ = run("bench", "--repeat", 1)
    assert code == EXIT_OK
    assert out.splitlines()[0].startswith("scenario,latency")
    assert "hspm_multiply_n256" in out


@pytest.mark.parametrize("argv", [
    ("frobnicate",),
    ("archive", "--pool", "{ws}/pool.cfg"),
    ("archive", "--in", "{ws}/clip.raw", "--pool", "{ws}/pool.cfg", "--key", "{ws}/k.slwe",
     "--out", "{ws}/m.salt", "--layers", "0"),
    ("archive", "--in", "{ws}/missing.raw", "--pool", "{ws}/pool.cfg", "--key",
     "{ws}/k.slwe", "--out", "{ws}/m.salt"),
    ("fail", "--pool", "{ws}/pool.cfg"),
    ("fail", "--pool", "{ws}/pool.cfg", "--drive", "9"),
    ("rebuild", "--pool", "{ws}/pool.cfg", "--drive", "0"),
    ("retrieve", "--pool", "{ws}/pool.cfg", "--key", "{ws}/k.slwe"),
    ("scrub", "--pool", "{ws}/pool.cfg", "--seed", "abc"),
])
def test_usage_errors_leave_pool_untouched(ws, argv):
    before = pool_snapshot(ws)
    code, _, err = run(*(a.format(ws=ws) for a in argv))
    assert code == EXIT_USAGE, err
    assert pool_snapshot(ws) == before


def test_identical_argv_identical_result(ws):
    a = run("bench", "--repeat", 1, "--seed", 3)
    b = run("bench", "--repeat", 1, "--seed", 3)
    strip = lambda s: [line.split(",")[0] + line.split(",")[-1] for line in s.splitlines()]
    assert a[0] == b[0] and strip(a[1]) == strip(b[1])


def test_rebuild_of_healthy_drive_is_rejected(ws):
    run(*archive_args(ws))
    before = pool_snapshot(ws)
    code, _, err = run("rebuild", "--pool", ws / "pool.cfg", "--drive", 0)
    assert code == EXIT_USAGE and "has not failed" in err
    assert pool_snapshot(ws) == before
