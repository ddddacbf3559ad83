"""``salt`` command-line front end.

Exit status: 0 success, 1 usage error, 2 data error (checksum, unrecoverable
stripe, malformed file), 3 internal error.
"""

import argparse
import json
import struct
import sys
import time
from pathlib import Path

import numpy as np

from . import exemplar, mulkern, perfmodel
from .codec import CodecParams, Frame, extract_features
from .errors import (CapacityError, DecodeError, DriveFailure, IntegrityError,
                     InvalidInputError, SaltError, UnrecoverableError)
from .rlwe import dump_keypair, keygen, load_keypair
from .storage import (Journal, StripeMap, archive, load_layout, open_pool, reconstruct,
                      retrieve, scrub)

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_INTERNAL = 0, 1, 2, 3
_RAW_HEADER = struct.Struct("<HHI")
_DATA_ERRORS = (DecodeError, IntegrityError, UnrecoverableError, DriveFailure, CapacityError)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def read_clip(path):
    """Frames from a raw clip: ``w u16 | h u16 | count u32`` then planar 8-bit frames."""
    data = Path(path).read_bytes()
    if len(data) < _RAW_HEADER.size:
        raise DecodeError(f"{path}: raw clip header truncated")
    w, h, n = _RAW_HEADER.unpack_from(data)
    body = np.frombuffer(data, dtype=np.uint8, offset=_RAW_HEADER.size)
    if w == 0 or h == 0 or body.size != w * h * n:
        raise DecodeError(f"{path}: expected {n} frames of {w}x{h}, found {body.size} bytes")
    return [Frame(w, h, f) for f in body.reshape(n, h, w)]


def write_clip(path, frames):
    h, w = frames[0].shape if frames else (0, 0)
    with open(path, "wb") as fh:
        fh.write(_RAW_HEADER.pack(w, h, len(frames)))
        for f in frames:
            fh.write(f.samples.tobytes())


def _need(args, *names):
    flag = {"in_path": "in"}
    missing = [f"--{flag.get(n, n)}" for n in names if getattr(args, n) is None]
    if missing:
        raise UsageError(f"{args.verb} requires {', '.join(missing)}")


def _exists(*paths):
    for p in paths:
        if p is not None and not Path(p).exists():
            raise UsageError(f"{p}: no such file")


def _open_pool(args, create=False):
    """Validate the layout (and ``--drive``) before anything touches the pool."""
    _exists(args.pool)
    layout = load_layout(args.pool)
    if args.drive is not None and args.drive not in [d.id for d in layout.drives]:
        raise UsageError(f"no drive {args.drive} in {args.pool}")
    return open_pool(args.pool, create=create)


def _load_model(args):
    if args.model is None:
        return None
    _exists(args.model)
    m = exemplar.ClusterModel.from_bytes(Path(args.model).read_bytes())
    return m.with_thresholds(args.tau1, args.tau2)


def cmd_keygen(args, out):
    _need(args, "out")
    Path(args.out).write_bytes(dump_keypair(keygen(seed=args.seed)))
    print(f"wrote key pair to {args.out}", file=out)


def cmd_archive(args, out):
    _need(args, "in_path", "pool", "key", "out")
    _exists(args.in_path, args.pool, args.key)
    frames = read_clip(args.in_path)
    keys = load_keypair(Path(args.key).read_bytes())
    params = CodecParams(num_layers=args.layers, base_step=args.base_step)
    pool = _open_pool(args, create=True)
    journal = Journal(args.journal) if args.journal else None
    res = archive(frames, pool, keys, params, seed=args.seed,
                  object_id=Path(args.in_path).name, journal=journal)
    Path(args.out).write_text(json.dumps(res.stripe_map.to_dict(), indent=1))
    raw = sum(f.samples.size for f in frames)
    print(f"archived {len(frames)} frames: raw {raw} B, encoded {res.codec_bytes} B, "
          f"container {len(res.container.to_bytes())} B, "
          f"{len(res.stripe_map.stripes)} stripes", file=out)


def _retrieve(args):
    _need(args, "pool", "key", "in_path")
    _exists(args.pool, args.key, args.in_path)
    if args.parallel < 1:
        raise UsageError("--parallel must be at least 1")
    model = _load_model(args)
    keys = load_keypair(Path(args.key).read_bytes())
    try:
        smap = StripeMap.from_dict(json.loads(Path(args.in_path).read_text()))
    except (ValueError, InvalidInputError) as exc:
        raise DecodeError(f"{args.in_path}: {exc}") from exc
    pool = _open_pool(args)
    return retrieve(pool, smap, keys, k_max=args.kmax, cluster_model=model,
                    parallelism=args.parallel)


def cmd_retrieve(args, out):
    res = _retrieve(args)
    if args.out:
        write_clip(args.out, res.frames)
    print(f"retrieved {len(res.frames)} frames", file=out)
    if res.tags is not None:
        print("tags: " + " ".join(t.value for t in res.tags), file=out)
        print(f"exemplars: {res.exemplar_indices}", file=out)


def cmd_exemplar(args, out):
    _need(args, "model")
    res = _retrieve(args)
    if args.out:
        write_clip(args.out, res.exemplars)
    for i in res.exemplar_indices:
        print(f"{i} {res.tags[i].value}", file=out)
    print(f"{len(res.exemplar_indices)} of {len(res.frames)} frames selected", file=out)


def cmd_scrub(args, out):
    _need(args, "pool")
    pool = _open_pool(args)
    bad = scrub(pool)
    for s in bad:
        print(f"stripe {s}: parity mismatch", file=out)
    print(f"scrubbed {pool.next_stripe} stripes, {len(bad)} inconsistent", file=out)
    return EXIT_DATA if bad else EXIT_OK


def cmd_fail(args, out):
    _need(args, "pool", "drive")
    pool = _open_pool(args)
    pool.fail_drive(args.drive)
    print(f"drive {args.drive} failed", file=out)


def cmd_rebuild(args, out):
    _need(args, "pool", "drive")
    pool = _open_pool(args)
    reconstruct(pool, args.drive)
    print(f"drive {args.drive} rebuilt ({pool.next_stripe} stripes)", file=out)


def cmd_model(args, out):
    _need(args, "in_path", "out")
    _exists(args.in_path)
    if args.k < 1:
        raise UsageError("--k must be at least 1")
    feats = np.stack([extract_features(f) for f in read_clip(args.in_path)])
    m = exemplar.fit(feats, min(args.k, len(feats)), seed=args.seed, restarts=args.restarts)
    m = m.with_thresholds(args.tau1, args.tau2)
    Path(args.out).write_bytes(m.to_bytes())
    print(f"model: k={m.k} tau1={m.tau1:.6g} tau2={m.tau2:.6g} cost={m.cost:.6g}", file=out)


def _time(fn, repeat):
    t0 = time.perf_counter()
    for _ in range(repeat):
        fn()
    return (time.perf_counter() - t0) / repeat


def cmd_bench(args, out):
    if args.in_path:
        _exists(args.in_path)
        scenarios = perfmodel.parse_scenarios(Path(args.in_path).read_text())
    else:
        scenarios = perfmodel.distribution_table()
    out.write(perfmodel.report_csv(scenarios))
    rng = np.random.default_rng(args.seed)
    a = rng.integers(0, mulkern.Q, 256)
    b = rng.integers(-31, 32, 256)
    c = rng.integers(0, mulkern.Q, 256)
    t = _time(lambda: mulkern.hspm_multiply(a, b, c), args.repeat)
    cycles = mulkern.hspm_cycles(256).total
    print("kernel,seconds,modelled_cycles", file=out)
    print(f"hspm_multiply_n256,{t:.6g},{cycles}", file=out)
    x = rng.integers(0, 1 << 18, 1 << 16)
    t = _time(lambda: mulkern.mod_reduce_approx_array(x), args.repeat)
    print(f"mod_reduce_65536,{t:.6g},", file=out)


COMMANDS = {
    "keygen": cmd_keygen, "archive": cmd_archive, "retrieve": cmd_retrieve,
    "scrub": cmd_scrub, "fail": cmd_fail, "rebuild": cmd_rebuild,
    "exemplar": cmd_exemplar, "bench": cmd_bench, "model": cmd_model,
}


def build_parser():
    p = _Parser(prog="salt", description="Archive, protect and query video clips "
                "on a simulated RAID-5 pool.")
    p.add_argument("verb", choices=sorted(COMMANDS))
    p.add_argument("--pool", help="pool layout file")
    p.add_argument("--key", help="key pair file")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--layers", type=int, default=4, help="residual layers K")
    p.add_argument("--base-step", type=int, default=8)
    p.add_argument("--kmax", type=int, default=None, help="layers to decode")
    p.add_argument("--parallel", type=int, default=1, help="outstanding block reads")
    p.add_argument("--tau1", type=float, default=None)
    p.add_argument("--tau2", type=float, default=None)
    p.add_argument("--model", help="cluster model file")
    p.add_argument("--k", type=int, default=4, help="clusters for `model`")
    p.add_argument("--restarts", type=int, default=10)
    p.add_argument("--repeat", type=int, default=20, help="timing repetitions for `bench`")
    p.add_argument("--journal", help="staging directory for resumable archives")
    p.add_argument("--drive", type=int)
    p.add_argument("--in", dest="in_path")
    p.add_argument("--out")
    return p


def main(argv=None, out=None, err=None):
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        args = build_parser().parse_args(argv)
        return COMMANDS[args.verb](args, out) or EXIT_OK
    except UsageError as exc:
        print(f"usage error: {exc}", file=err)
        return EXIT_USAGE
    except _DATA_ERRORS as exc:
        print(f"data error: {exc}", file=err)
        return EXIT_DATA
    except InvalidInputError as exc:
        print(f"invalid input: {exc}", file=err)
        return EXIT_USAGE
    except SaltError as exc:
        print(f"error: {exc}", file=err)
        return EXIT_DATA
    except SystemExit as exc:          # --help
        return EXIT_OK if not exc.code else EXIT_USAGE
    except Exception as exc:           # noqa: BLE001
        print(f"internal error: {type(exc).__name__}: {exc}", file=err)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
