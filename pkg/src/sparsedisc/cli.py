"""Command-line front end.

Subcommands: generate (beck-fiala | partition | edge-cover | random),
solve, verify, oracle, bench.  Exit codes: 0 ok, 1 solve/verify/oracle
failure, 2 usage error.  All randomness flows from explicit --seed
flags; reruns with identical flags write byte-identical files.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import csv
import hashlib
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .all_sets import solve_all_sets
from .big_sets import is_rainbow, lll_threshold, solve_big_sets
from .coloring import (
    FractionalColoring,
    IntegralColoring,
    discrepancy,
    frac_discrepancy,
    function_color_values,
    read_coloring,
    write_coloring,
)
from .instance import (
    CoverageInstance,
    gen_beck_fiala,
    gen_edge_coverage,
    gen_partition_matroid,
    gen_random,
    read_instance,
    write_instance,
)
from .oracle import min_discrepancy_exhaustive
from .small_sets import SmallSetsConfig, solve_small_sets

BENCH_COLUMNS = [
    "algo",
    "n",
    "m",
    "t",
    "k",
    "seed",
    "status",
    "discrepancy",
    "bound",
    "ratio",
    "retries",
    "millis",
]


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _load_instance(path: str) -> CoverageInstance:
    return read_instance(Path(path).read_text(encoding="utf-8"))


# ---------------------------------------------------------------------------
# generate


def _random_hypergraph(n, m, t, lo, hi, rng):
    """Hyperedges with sizes in [lo, hi] and vertex degree at most t."""
    capacity = np.full(n, t, dtype=np.int64)
    edges = []
    for _ in range(m):
        size = int(rng.integers(lo, hi + 1))
        eligible = np.flatnonzero(capacity > 0)
        if eligible.size < size:
            raise ValueError(
                f"infeasible: cannot draw {m} hyperedges of size >= {lo} "
                f"with vertex degree <= {t} on {n} vertices"
            )
        members = rng.choice(eligible, size=size, replace=False)
        capacity[members] -= 1
        edges.append(sorted(int(v) for v in members))
    return edges


def cmd_generate(args) -> int:
    rng = np.random.default_rng(args.seed)
    if args.family == "random":
        inst = gen_random(
            args.n, args.m, args.t, (args.size_min, args.size_max), seed=args.seed
        )
    elif args.family == "beck-fiala":
        hi = args.size_max if args.size_max <= args.n else args.n
        edges = _random_hypergraph(args.n, args.m, args.t, args.size_min, hi, rng)
        inst = gen_beck_fiala(args.n, edges)
    elif args.family == "partition":
        if args.blocks < 1 or args.blocks > args.n:
            raise ValueError(f"--blocks must be in [1, n], got {args.blocks}")
        functions = []
        for _ in range(args.m):
            perm = rng.permutation(args.n)
            blocks = [
                sorted(int(v) for v in part)
                for part in np.array_split(perm, args.blocks)
            ]
            functions.extend(gen_partition_matroid(args.n, blocks).functions)
        inst = CoverageInstance(n=args.n, functions=tuple(functions))
    elif args.family == "edge-cover":
        vertices = args.vertices
        if vertices * (vertices - 1) // 2 < args.n:
            raise ValueError(
                f"--vertices {vertices} supports at most "
                f"{vertices * (vertices - 1) // 2} edges, need {args.n}"
            )
        pairs = [(u, v) for u in range(vertices) for v in range(u + 1, vertices)]
        functions = []
        for _ in range(args.m):
            chosen = rng.choice(len(pairs), size=args.n, replace=False)
            edges = [pairs[int(c)] for c in chosen]
            functions.extend(gen_edge_coverage(vertices, edges).functions)
        inst = CoverageInstance(n=args.n, functions=tuple(functions))
    else:  # pragma: no cover - argparse restricts choices
        raise ValueError(f"unknown family {args.family}")
    inst = CoverageInstance(
        n=inst.n,
        functions=inst.functions,
        meta={"generator": args.family, "seed": args.seed},
    )
    _emit(write_instance(inst), args.out)
    return 0


# ---------------------------------------------------------------------------
# solve


def _pick_algorithm(inst: CoverageInstance, k: int, requested: str, s_flag):
    if requested != "auto":
        return requested
    t = max(1, inst.t)
    s_big = lll_threshold(t, k)
    sizes = [len(s) for _, s in inst.all_sets()]
    if sizes and min(sizes) >= s_big:
        return "big"
    s_cap = s_flag if s_flag is not None else (max(sizes) if sizes else 1)
    if not sizes or max(sizes) <= s_cap:
        return "small"
    return "all"


def cmd_solve(args) -> int:
    inst = _load_instance(args.infile)
    algo = _pick_algorithm(inst, args.k, args.algo, args.s)
    if algo == "small":
        cfg = SmallSetsConfig(
            k=args.k,
            max_set_size=args.s,
            retry_limit=args.retries if args.retries else 40,
            seed=args.seed,
        )
        coloring, report = solve_small_sets(inst, cfg)
    elif algo == "big":
        coloring, report = solve_big_sets(inst, args.k, seed=args.seed)
    else:
        coloring, report = solve_all_sets(
            inst, args.k, seed=args.seed, retry_limit=args.retries if args.retries else 20
        )
    if args.out:
        Path(args.out).write_text(write_coloring(coloring), encoding="utf-8")
    if args.report:
        Path(args.report).write_text(report.to_json(), encoding="utf-8")
    if args.pretty:
        for key, value in report.as_dict().items():
            if not isinstance(value, dict):
                print(f"{key:>14}: {value}")
    else:
        sys.stdout.write(report.to_json())
    return 0 if report.success else 1


# ---------------------------------------------------------------------------
# verify


def cmd_verify(args) -> int:
    inst = _load_instance(args.infile)
    coloring = read_coloring(Path(args.coloring).read_text(encoding="utf-8"))
    if args.k is not None and coloring.k != args.k:
        raise ValueError(f"coloring has k={coloring.k}, expected k={args.k}")
    k = coloring.k
    if isinstance(coloring, FractionalColoring):
        if coloring.n != inst.n:
            raise ValueError(f"coloring has {coloring.n} rows, instance has n={inst.n}")
        result = {
            "kind": "fractional",
            "n": inst.n,
            "k": k,
            "frac_discrepancy": frac_discrepancy(inst, coloring),
        }
    else:
        if coloring.n != inst.n:
            raise ValueError(
                f"coloring has {coloring.n} entries, instance has n={inst.n}"
            )
        disc, witness = discrepancy(inst, coloring, k)
        values = function_color_values(inst, coloring.chi, k)
        rainbow = [
            [is_rainbow(s, coloring.chi, k) for s in fn.sets]
            for fn in inst.functions
        ]
        result = {
            "kind": "integral",
            "n": inst.n,
            "k": k,
            "discrepancy": disc,
            "witness": list(witness),
            "per_function_values": values.tolist(),
            "rainbow": rainbow,
        }
    text = json.dumps(result, indent=1) + "\n"
    if args.report:
        Path(args.report).write_text(text, encoding="utf-8")
    if args.pretty:
        for key, value in result.items():
            if not isinstance(value, list):
                print(f"{key:>16}: {value}")
    else:
        sys.stdout.write(text)
    return 0


# ---------------------------------------------------------------------------
# oracle


def cmd_oracle(args) -> int:
    inst = _load_instance(args.infile)
    value, witness = min_discrepancy_exhaustive(inst, args.k)
    result = {
        "minimum": value,
        "witness": witness.chi.tolist(),
        "k": args.k,
        "n": inst.n,
    }
    if args.compare:
        other = read_coloring(Path(args.compare).read_text(encoding="utf-8"))
        if not isinstance(other, IntegralColoring):
            raise ValueError("--compare expects an integral coloring file")
        disc, _ = discrepancy(inst, other, args.k)
        result["compare_discrepancy"] = disc
        result["gap"] = disc - value
    text = json.dumps(result, indent=1) + "\n"
    if args.pretty:
        for key, value in result.items():
            print(f"{key:>20}: {value}")
    else:
        sys.stdout.write(text)
    return 0


# ---------------------------------------------------------------------------
# bench


def _cell_seed(seed_base: int, algo: str, n: int, m: int, t: int, k: int, rep: int) -> int:
    tag = f"{seed_base}:{algo}:{n}:{m}:{t}:{k}:{rep}".encode()
    return int.from_bytes(hashlib.sha256(tag).digest()[:6], "big")


def _bench_cell(algo, n, m, t, k, seed, size_min, size_max):
    row = {
        "algo": algo,
        "n": n,
        "m": m,
        "t": t,
        "k": k,
        "seed": seed,
        "status": "ok",
        "discrepancy": "",
        "bound": "",
        "ratio": "",
        "retries": "",
        "millis": "",
    }
    start = time.perf_counter()
    try:
        inst = gen_random(n, m, t, (size_min, size_max), seed=seed)
        if algo == "small":
            _, report = solve_small_sets(inst, SmallSetsConfig(k=k, seed=seed))
        elif algo == "big":
            _, report = solve_big_sets(inst, k, seed=seed)
        elif algo == "all":
            _, report = solve_all_sets(inst, k, seed=seed)
        else:
            raise ValueError(f"unknown algorithm {algo}")
        if report.bound > 0:
            ratio = report.discrepancy / report.bound
        else:
            ratio = 0.0 if report.discrepancy == 0 else float("inf")
        row.update(
            status="ok" if report.success else "failed",
            discrepancy=report.discrepancy,
            bound=report.bound,
            ratio=ratio,
            retries=report.retries,
        )
    except (ValueError, RuntimeError) as exc:
        row["status"] = f"error:{type(exc).__name__}"
    row["millis"] = round((time.perf_counter() - start) * 1000.0, 3)
    return row


def cmd_bench(args) -> int:
    algos = args.algos.split(",")
    cells = [
        (algo, n, m, t, k, _cell_seed(args.seed_base, algo, n, m, t, k, rep))
        for algo in algos
        for n in args.n_list
        for m in args.m_list
        for t in args.t_list
        for k in args.k_list
        for rep in range(args.seeds)
    ]
    worker = lambda cell: _bench_cell(*cell, args.size_min, args.size_max)
    if args.jobs > 1:
        with concurrent.futures.ThreadPoolExecutor(max_workers=args.jobs) as pool:
            rows = list(pool.map(worker, cells))
    else:
        rows = [worker(cell) for cell in cells]
    with open(args.out, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=BENCH_COLUMNS)
        writer.writeheader()
        writer.writerows(rows)
    ok = sum(1 for r in rows if r["status"] == "ok")
    print(f"{len(rows)} rows ({ok} ok) -> {args.out}")
    return 0


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sparsedisc",
        description="Low-discrepancy k-colorings for sparse coverage families",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="write a random instance file")
    gen.add_argument(
        "family", choices=["beck-fiala", "partition", "edge-cover", "random"]
    )
    gen.add_argument("--n", type=int, required=True, help="number of items")
    gen.add_argument("--m", type=int, default=1, help="number of functions")
    gen.add_argument("--t", type=int, default=2, help="target sparsity")
    gen.add_argument("--size-min", type=int, default=2)
    gen.add_argument("--size-max", type=int, default=4)
    gen.add_argument("--blocks", type=int, default=2, help="partition blocks")
    gen.add_argument("--vertices", type=int, default=64, help="edge-cover vertices")
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out", default=None)
    gen.set_defaults(func=cmd_generate)

    slv = sub.add_parser("solve", help="compute a coloring and report")
    slv.add_argument("--algo", choices=["small", "big", "all", "auto"], default="auto")
    slv.add_argument("--k", type=int, required=True)
    slv.add_argument("--seed", type=int, default=0)
    slv.add_argument("--in", dest="infile", required=True)
    slv.add_argument("--out", default=None, help="coloring file")
    slv.add_argument("--report", default=None, help="report JSON file")
    slv.add_argument("--s", type=int, default=None, help="max set size for small/auto")
    slv.add_argument("--retries", type=int, default=None)
    slv.add_argument("--pretty", action="store_true")
    slv.set_defaults(func=cmd_solve)

    ver = sub.add_parser("verify", help="recompute discrepancy for a coloring")
    ver.add_argument("--in", dest="infile", required=True)
    ver.add_argument("--coloring", required=True)
    ver.add_argument("--k", type=int, default=None)
    ver.add_argument("--report", default=None)
    ver.add_argument("--pretty", action="store_true")
    ver.set_defaults(func=cmd_verify)

    orc = sub.add_parser("oracle", help="exact minimum by exhaustive search")
    orc.add_argument("--in", dest="infile", required=True)
    orc.add_argument("--k", type=int, required=True)
    orc.add_argument("--compare", default=None, help="coloring file to compare")
    orc.add_argument("--pretty", action="store_true")
    orc.set_defaults(func=cmd_oracle)

    ben = sub.add_parser("bench", help="sweep a parameter grid to CSV")
    ben.add_argument("--algos", default="small")
    ben.add_argument("--n-list", type=int, nargs="+", required=True)
    ben.add_argument("--m-list", type=int, nargs="+", default=[2])
    ben.add_argument("--t-list", type=int, nargs="+", default=[2])
    ben.add_argument("--k-list", type=int, nargs="+", default=[2])
    ben.add_argument("--seeds", type=int, default=1, help="replicates per cell")
    ben.add_argument("--seed-base", type=int, default=0)
    ben.add_argument("--size-min", type=int, default=2)
    ben.add_argument("--size-max", type=int, default=4)
    ben.add_argument("--jobs", type=int, default=1)
    ben.add_argument("--out", required=True)
    ben.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def entrypoint() -> None:  # console script
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
