"""Command-line interface: estimation trials, timing grids, sketch files,
and a small LSH search demo, all emitting CSV (or binary sketch records)."""

from __future__ import annotations

import argparse
import sys

from .annindex import LshIndex, LshParams
from .bench import (
    ALGORITHMS,
    ESTIMATION_COLUMNS,
    TIMING_COLUMNS,
    ExperimentConfig,
    gen_pair,
    gen_set,
    run_estimation_experiment,
    run_timing_experiment,
    write_csv,
)
from .baselines import IcwsSketcher, icws_fingerprints
from .core import ValidationError, read_sets
from .randomness import HashFamily, derive_seed
from .sketching import MinHashSketch, bottom_k, dart_minhash, dump_sketch, one_bit


def _add_common(parser, pairs_help: str):
    parser.add_argument("--k", type=int, default=256, help="sketch length (default 256)")
    parser.add_argument("--l0", type=int, default=256, help="entries per generated set (default 256)")
    parser.add_argument("--l1", type=float, default=1.0, help="L1 norm of generated sets (default 1)")
    parser.add_argument("--pairs", type=int, default=100, help=pairs_help)
    parser.add_argument("--target-j", type=float, default=0.5, help="target Jaccard similarity (default 0.5)")
    parser.add_argument("--seed", type=int, default=1, help="base seed (default 1)")
    parser.add_argument("--algo", default="dartminhash", choices=ALGORITHMS)
    parser.add_argument("--out", default="-", help="output path, '-' for stdout")


def _int_list(text: str) -> list[int]:
    return [int(tok) for tok in text.split(",") if tok]


def _float_list(text: str) -> list[float]:
    return [float(tok) for tok in text.split(",") if tok]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dartsketch",
        description="Weighted minhash sketching, similarity estimation and search benchmarks")
    sub = parser.add_subparsers(dest="command", required=True)

    est = sub.add_parser("estimate", help="similarity estimation trials on synthetic pairs")
    _add_common(est, "number of random pairs (default 100)")

    tim = sub.add_parser("timing", help="sketching running-time grid")
    tim.add_argument("--algo", default="dartminhash",
                     help="comma-separated algorithms (default dartminhash)")
    tim.add_argument("--k", type=_int_list, default=[256], help="comma-separated sketch lengths")
    tim.add_argument("--l0", type=_int_list, default=[256], help="comma-separated set sizes")
    tim.add_argument("--l1", type=_float_list, default=[1.0], help="comma-separated L1 norms")
    tim.add_argument("--sets", type=int, default=100, help="sets per cell (default 100)")
    tim.add_argument("--warmup", type=int, default=3, help="warm-up sketches per cell (default 3)")
    tim.add_argument("--seed", type=int, default=1)
    tim.add_argument("--out", default="-")

    sk = sub.add_parser("sketch", help="sketch sets from a text file into a binary record stream")
    sk.add_argument("--input", required=True, help="text file, one set per line (id:weight tokens)")
    sk.add_argument("--algo", default="dartminhash", choices=ALGORITHMS)
    sk.add_argument("--k", type=int, default=256)
    sk.add_argument("--seed", type=int, default=1)
    sk.add_argument("--one-bit", action="store_true", help="emit one-bit sketches")
    sk.add_argument("--out", required=True, help="output file (binary)")

    demo = sub.add_parser("lsh-demo", help="index synthetic points and run near-neighbor queries")
    _add_common(demo, "unused; kept for flag uniformity")
    demo.add_argument("--input", default=None,
                      help="optional text file of sets to index instead of synthetic points")
    demo.add_argument("--points", type=int, default=100, help="points to index (default 100)")
    demo.add_argument("--queries", type=int, default=10, help="queries to run (default 10)")
    demo.add_argument("--tables", type=int, default=16, help="L, number of tables (default 16)")
    demo.add_argument("--key-size", type=int, default=2, help="K, hashes per table (default 2)")
    demo.add_argument("--j1", type=float, default=0.5, help="similarity threshold (default 0.5)")
    return parser


def _cmd_estimate(args) -> int:
    config = ExperimentConfig(algorithm=args.algo, k=args.k, l0=args.l0, l1=args.l1,
                              pairs=args.pairs, target_j=args.target_j, seed=args.seed)
    rows = run_estimation_experiment(config)
    write_csv(rows, ESTIMATION_COLUMNS, args.seed, args.out)
    return 0


def _cmd_timing(args) -> int:
    algorithms = [tok for tok in args.algo.split(",") if tok]
    for algorithm in algorithms:
        if algorithm not in ALGORITHMS:
            raise ValidationError(f"unknown algorithm {algorithm!r}")
    cells = [(algorithm, k, l0, l1)
             for algorithm in algorithms for k in args.k for l0 in args.l0 for l1 in args.l1]
    rows = run_timing_experiment(cells, sets_per_cell=args.sets,
                                 warmup=args.warmup, seed=args.seed)
    write_csv(rows, TIMING_COLUMNS, args.seed, args.out)
    return 0


def _cmd_sketch(args) -> int:
    if args.out == "-":
        raise ValidationError("sketch output is binary; --out must be a file path")
    sets = read_sets(args.input)
    hashes = HashFamily(args.seed)
    records = []
    for x in sets:
        if args.algo == "dartminhash":
            sketch = dart_minhash(x, args.k, hashes)
        elif args.algo in ("icws", "icws-fast"):
            values = IcwsSketcher(args.k, hashes, fast=args.algo == "icws-fast").minhash(x)
            sketch = MinHashSketch(icws_fingerprints(values, hashes), args.k, hashes.seed)
        else:
            sketch = bottom_k(x, args.k, hashes)
        if args.one_bit:
            if not isinstance(sketch, MinHashSketch):
                raise ValidationError("--one-bit requires a minhash-style sketch")
            sketch = one_bit(sketch)
        records.append(dump_sketch(sketch))
    try:
        with open(args.out, "wb") as handle:
            handle.write(b"".join(records))
    except OSError as exc:
        raise ValidationError(f"cannot write {args.out!r}: {exc}") from exc
    return 0


def _cmd_lsh_demo(args) -> int:
    import numpy as np

    params = LshParams(L=args.tables, K=args.key_size, j1=args.j1)
    hashes = HashFamily(derive_seed(args.seed, 0))
    rng = np.random.Generator(np.random.MT19937(np.random.SeedSequence(derive_seed(args.seed, 1))))
    index = LshIndex(params, hashes)
    if args.input:
        ids = index.bulk_load(args.input)
        points = [index.point(i) for i in ids]
    else:
        points = []
        for point_id in range(args.points):
            x = gen_set(args.l0, args.l1, rng)
            index.insert(point_id, x)
            points.append(x)
    rows = []
    for query_id in range(args.queries):
        base = points[int(rng.integers(0, len(points)))]
        q = gen_pair(base, args.target_j, rng)
        for point_id, similarity in index.query(q):
            rows.append((query_id, point_id, similarity))
    write_csv(rows, ("query", "id", "similarity"), args.seed, args.out)
    return 0


_COMMANDS = {
    "estimate": _cmd_estimate,
    "timing": _cmd_timing,
    "sketch": _cmd_sketch,
    "lsh-demo": _cmd_lsh_demo,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
