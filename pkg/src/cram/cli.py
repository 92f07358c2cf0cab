"""Command-line harness: build, fuzz-verify, and benchmark the stores.

Subcommands
-----------
build       build a store from a corpus, print the space report, and
            optionally write a snapshot
verify      seeded oracle fuzzing of both store engines; nonzero exit and
            a reproduction trace on the first divergence
overwrite   progressively overwrite corpus A with corpus B, sampling
            bits-per-character at every percentage point (CSV)
throughput  wall-clock read/write timing over a range of unit sizes (CSV)
entropy     empirical entropy report of a corpus

Corpora are raw byte files; ``--gen english|dna --size N`` generates a
seeded synthetic corpus instead of reading one.  All randomized behavior
is fully determined by ``--seed``.
"""

from __future__ import annotations

import argparse
import csv
import random
import sys
import time

import numpy as np

from . import corpus as corpus_mod
from . import snapshot
from .core import Cram
from .entropy import h0, hk, h0_of_counts, blocked_text
from .extended import ExtendedCram
from .prototype import HuffmanCram


def _load_corpora(args, count: int):
    if args.gen:
        size = args.size
        if size <= 0:
            raise SystemExit("--gen needs --size > 0")
        kinds = ["english", "dna"] if count == 2 else [args.gen]
        return [corpus_mod.generate(k, size, args.seed) for k in kinds]
    paths = args.corpus or []
    if len(paths) < count:
        raise SystemExit("need {} corpus file(s) or --gen".format(count))
    out = []
    for path in paths[:count]:
        with open(path, "rb") as fh:
            out.append(fh.read())
    return out


def _open_out(path):
    return open(path, "w", newline="") if path else sys.stdout


# ---------------------------------------------------------------------------


def fuzz_cram(text: bytes, sigma: int, epsilon: float, ops: int, seed: int,
              fault_at: int | None = None, debug: bool = False,
              debug_interval: int = 1000):
    """Drive random access/replace against a flat-array oracle.

    Returns None on success or a divergence record (op index, op, expected,
    got).  ``fault_at`` flips one stored bit before that op index to prove
    the comparison detects corruption.
    """
    rng = random.Random(seed)
    state = Cram(text, sigma=sigma, epsilon=epsilon, debug=debug,
                 debug_interval=debug_interval)
    oracle = bytearray(text)
    n = len(oracle)
    ell = state.ell
    for step in range(ops):
        if fault_at is not None and step == fault_at:
            state._corrupt_bit(rng.randrange(state.store.arena_bits))
        if rng.random() < 0.5:
            i = rng.randrange(n - ell + 1)
            want = bytes(oracle[i:i + ell])
            try:
                got = state.access(i)
            except Exception as exc:  # corruption surfaces as an error too
                return {"step": step, "op": ("access", i), "want": want,
                        "got": "exception: {!r}".format(exc)}
            if got != want:
                return {"step": step, "op": ("access", i), "want": want,
                        "got": got}
        else:
            i = rng.randrange(n)
            c = rng.randrange(sigma)
            try:
                state.replace(i, c)
            except Exception as exc:
                return {"step": step, "op": ("replace", i, c), "want": None,
                        "got": "exception: {!r}".format(exc)}
            oracle[i] = c
    tail = state.read(0, n)
    if tail != bytes(oracle):
        first = next(idx for idx in range(n) if tail[idx] != oracle[idx])
        return {"step": ops, "op": ("final-compare", first),
                "want": oracle[first], "got": tail[first]}
    return None


def fuzz_extended(text: bytes, sigma: int, tau, ops: int, seed: int):
    """Drive the four-operation engine against a growable-array oracle."""
    rng = random.Random(seed)
    state = ExtendedCram(text, sigma=sigma, tau=tau)
    oracle = bytearray(text)
    for step in range(ops):
        op = rng.random()
        n = len(oracle)
        try:
            if op < 0.35 and n >= state.params.ell:
                i = rng.randrange(n - state.params.ell + 1)
                want = bytes(oracle[i:i + state.params.ell])
                got = state.access(i)
                if got != want:
                    return {"step": step, "op": ("access", i), "want": want,
                            "got": got}
            elif op < 0.55 and n:
                i = rng.randrange(n)
                c = rng.randrange(sigma)
                state.replace(i, c)
                oracle[i] = c
            elif op < 0.8:
                i = rng.randint(0, n)
                c = rng.randrange(sigma)
                state.insert(i, c)
                oracle.insert(i, c)
            elif n:
                i = rng.randrange(n)
                state.delete(i)
                del oracle[i]
        except Exception as exc:
            return {"step": step, "op": ("op", op), "want": None,
                    "got": "exception: {!r}".format(exc)}
    if state.bytes() != bytes(oracle):
        return {"step": ops, "op": ("final-compare",), "want": None,
                "got": "text mismatch"}
    return None


def cmd_verify(args) -> int:
    (data,) = _load_corpora(args, 1)
    sigma = args.sigma
    fault = args.ops // 2 if args.inject_fault else None
    bad = fuzz_cram(data, sigma, args.epsilon, args.ops, args.seed,
                    fault_at=fault)
    if bad is None and not args.inject_fault:
        bad = fuzz_extended(data[:max(1, len(data) // 8)], sigma, args.tau,
                            max(1, args.ops // 10), args.seed + 1)
    if bad is not None:
        print("DIVERGED seed={} {}".format(args.seed, bad))
        print("reproduce: replay the seeded op stream up to step {}".format(
            bad["step"]))
        return 1
    print("verified: {} ops (and {} four-op ops) match the oracles".format(
        args.ops, max(1, args.ops // 10)))
    return 0


def cmd_build(args) -> int:
    (data,) = _load_corpora(args, 1)
    t0 = time.perf_counter()
    if args.mode == "huffman-u":
        state = HuffmanCram(data, sigma=args.sigma, u=args.u)
    else:
        state = Cram(data, sigma=args.sigma, epsilon=args.epsilon)
    dt = time.perf_counter() - t0
    report = state.measure()
    print(report)
    print("build time: {:.2f} s".format(dt))
    if args.out:
        snapshot.save(state, args.out)
        print("snapshot written to", args.out)
    return 0


def cmd_overwrite(args) -> int:
    src, dst = _load_corpora(args, 2)
    if len(src) != len(dst):
        raise SystemExit("corpora must have equal length")
    n = len(src)
    if args.mode == "huffman-u":
        state = HuffmanCram(src, sigma=args.sigma, u=args.u)
    else:
        state = Cram(src, sigma=args.sigma, epsilon=args.epsilon,
                     rotate=not args.no_rotate)
    current = np.frombuffer(src, dtype=np.uint8).copy()
    dst_np = np.frombuffer(dst, dtype=np.uint8)
    ell = state.ell

    out = _open_out(args.out)
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["percent", "bpc_total", "bpc_payload", "h0_blocked_current"])

    def sample(percent, upto):
        current[:upto] = dst_np[:upto]
        rep = state.measure()
        blocked = blocked_text(current.tobytes(), ell, args.sigma)
        hb = h0_of_counts(np.bincount(blocked))
        writer.writerow([percent, "{:.6f}".format(rep.bpc),
                         "{:.6f}".format(rep.payload_bits / n),
                         "{:.6f}".format(hb)])

    sample(0, 0)
    replace = state.replace
    pos = 0
    for percent in range(1, 101):
        target = n * percent // 100
        while pos < target:
            replace(pos, dst[pos])
            pos += 1
        sample(percent, target)
    if out is not sys.stdout:
        out.close()
    return 0


def cmd_throughput(args) -> int:
    (data,) = _load_corpora(args, 1)
    n = len(data)
    units = [u for u in (4, 16, 64, 256, 1024) if u <= n]
    rows = []
    for unit in units:
        reads = []
        writes = []
        for _ in range(3):
            state = Cram(data, sigma=args.sigma, epsilon=args.epsilon)
            t0 = time.perf_counter()
            total = 0
            for i in range(0, n - unit + 1, unit):
                total += len(state.read(i, unit))
            reads.append(time.perf_counter() - t0)
            assert total == (n // unit) * unit
            rev = data[::-1]
            t0 = time.perf_counter()
            for i in range(0, n - unit + 1, unit):
                state.write_range(i, rev[i:i + unit])
            writes.append(time.perf_counter() - t0)
        rows.append((unit, sorted(reads)[1], sorted(writes)[1]))

    out = _open_out(args.out)
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["unit_bytes", "read_s", "write_s"])
    for unit, r, w in rows:
        writer.writerow([unit, "{:.6f}".format(r), "{:.6f}".format(w)])
    if out is not sys.stdout:
        out.close()
    return 0


def cmd_entropy(args) -> int:
    (data,) = _load_corpora(args, 1)
    kmax = min(args.k, max(0, len(data) - 1))
    for k in range(kmax + 1):
        value = h0(data) if k == 0 else hk(data, k)
        print("H{} = {:.6f} bits/char".format(k, value))
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="cram", description="compressed random-access memory harness")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, corpora="?"):
        p.add_argument("--corpus", nargs="+", help="raw byte corpus file(s)")
        p.add_argument("--gen", choices=["english", "dna"],
                       help="generate a synthetic corpus instead")
        p.add_argument("--size", type=int, default=1 << 20,
                       help="generated corpus size in bytes")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--sigma", type=int, default=256)
        p.add_argument("--epsilon", type=float, default=1 / 16)
        p.add_argument("--mode", choices=["theory", "huffman-u"],
                       default="theory")
        p.add_argument("--u", type=int, default=4,
                       help="write multiplier for huffman-u mode")
        p.add_argument("--tau", type=int, default=None,
                       help="min blocks per super-block (extended engine)")
        p.add_argument("--out", help="output path (CSV or snapshot)")

    p = sub.add_parser("build", help="build and report size")
    common(p)
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("verify", help="oracle fuzzing")
    common(p)
    p.add_argument("--ops", type=int, default=100000)
    p.add_argument("--inject-fault", action="store_true",
                   help="flip a stored bit mid-run; expect detection")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("overwrite", help="progressive overwrite experiment")
    common(p)
    p.add_argument("--no-rotate", action="store_true",
                   help="freeze the initial code tables (u=1 behavior)")
    p.set_defaults(func=cmd_overwrite)

    p = sub.add_parser("throughput", help="read/write timing by unit size")
    common(p)
    p.set_defaults(func=cmd_throughput)

    p = sub.add_parser("entropy", help="empirical entropy report")
    common(p)
    p.add_argument("--k", type=int, default=3)
    p.set_defaults(func=cmd_entropy)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
