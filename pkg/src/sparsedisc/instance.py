"""Data model, validation, generation, and serialization of sparse
coverage-function instances.

A coverage function over items 0..n-1 is stored in dual form: a list of
"dual sets", one per universe element, each listing the items that cover
that element.  The value of the function on an item set T is the number
of dual sets that T hits.  An instance bundles m such functions over a
shared item universe; its sparsity t is the largest number of dual sets
any single item belongs to, counted across all functions.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

__all__ = [
    "CoverageFunction",
    "CoverageInstance",
    "ThresholdSet",
    "InstanceFormatError",
    "validate",
    "sparsity",
    "gen_beck_fiala",
    "gen_partition_matroid",
    "gen_edge_coverage",
    "gen_random",
    "read_instance",
    "write_instance",
]


class InstanceFormatError(ValueError):
    """Raised when an instance file cannot be parsed or fails validation."""


@dataclass(frozen=True)
class CoverageFunction:
    """One coverage function, given by its dual sets.

    Duplicate identical sets are allowed and kept: they stand for distinct
    universe elements covered by the same items.  A function with no sets
    is allowed and is identically zero.
    """

    sets: tuple[tuple[int, ...], ...]

    @staticmethod
    def from_sets(sets: Iterable[Iterable[int]]) -> "CoverageFunction":
        return CoverageFunction(tuple(tuple(int(j) for j in s) for s in sets))

    def max_size(self) -> int:
        return max((len(s) for s in self.sets), default=0)

    def support(self) -> tuple[int, ...]:
        return tuple(sorted({j for s in self.sets for j in s}))


@dataclass(frozen=True)
class CoverageInstance:
    """A family of coverage functions over a shared item universe [0, n)."""

    n: int
    functions: tuple[CoverageFunction, ...]
    meta: Mapping[str, object] | None = None

    @property
    def m(self) -> int:
        return len(self.functions)

    @cached_property
    def t(self) -> int:
        """Sparsity: max number of dual sets any item appears in."""
        return sparsity(self)

    def all_sets(self) -> Iterator[tuple[int, tuple[int, ...]]]:
        """Yield (function index, dual set) over the whole family."""
        for i, fn in enumerate(self.functions):
            for s in fn.sets:
                yield i, s

    def max_set_size(self) -> int:
        return max((fn.max_size() for fn in self.functions), default=0)

    def min_set_size(self) -> int:
        sizes = [len(s) for fn in self.functions for s in fn.sets]
        return min(sizes) if sizes else 0

    def set_count(self) -> int:
        return sum(len(fn.sets) for fn in self.functions)


def sparsity(inst: CoverageInstance) -> int:
    """Max over items of the number of dual sets containing the item."""
    counts = np.zeros(inst.n, dtype=np.int64)
    for _, s in inst.all_sets():
        for j in s:
            counts[j] += 1
    return int(counts.max()) if inst.n > 0 else 0


def validate(inst: CoverageInstance) -> list[str]:
    """Check every structural invariant; return all violations found.

    An empty list means the instance is valid.  Violations are data, not
    exceptions: callers that need hard failure raise on a nonempty result.
    """
    violations: list[str] = []
    if inst.n < 1:
        violations.append(f"n must be >= 1, got {inst.n}")
    if inst.m < 1:
        violations.append("instance must have at least one function")
    for i, fn in enumerate(inst.functions):
        for si, s in enumerate(fn.sets):
            where = f"functions[{i}].sets[{si}]"
            if len(s) == 0:
                violations.append(f"{where}: empty set")
                continue
            if any(j < 0 or j >= inst.n for j in s):
                bad = [j for j in s if j < 0 or j >= inst.n]
                violations.append(
                    f"{where}: index out of range for n={inst.n}: {bad}"
                )
            if len(set(s)) != len(s):
                violations.append(f"{where}: duplicate element in set")
            elif tuple(sorted(s)) != tuple(s):
                violations.append(f"{where}: not sorted ascending")
    # cached sparsity must agree with a fresh recomputation
    if not violations and inst.t != sparsity(inst):
        violations.append(f"cached sparsity {inst.t} != recomputed {sparsity(inst)}")
    return violations


def _require_valid(inst: CoverageInstance, context: str) -> CoverageInstance:
    bad = validate(inst)
    if bad:
        raise InstanceFormatError(f"{context}: " + "; ".join(bad))
    return inst


@dataclass(frozen=True)
class ThresholdSet:
    """Derived constants used by the solvers for one (instance, k) pair.

    drop_threshold  constraint-dropping bound 3*t for batched rounding
    frac_cap        m*k*t*s cap on fractional rows after phase-1 rounding
    s_big           minimum set size for the resampling solver (local
                    lemma condition k*exp(-s/k)*e*(t*s+1) <= 1)
    s_split         small/big size split ceil(24*k*ln(n*t*k)) for the
                    combined solver
    """

    t: int
    k: int
    drop_threshold: int
    frac_cap: int
    s_big: int
    s_split: int

    @classmethod
    def from_instance(
        cls, inst: CoverageInstance, k: int, max_size: int | None = None
    ) -> "ThresholdSet":
        if k < 1:
            raise ValueError(f"k must be >= 1, got {k}")
        t = max(1, inst.t)
        s = max(1, max_size if max_size is not None else inst.max_set_size())
        from .big_sets import lll_threshold  # local import avoids a cycle

        s_split = max(1, math.ceil(24.0 * k * math.log(inst.n * t * k)))
        return cls(
            t=t,
            k=k,
            drop_threshold=3 * t,
            frac_cap=inst.m * k * t * s,
            s_big=lll_threshold(t, k),
            s_split=s_split,
        )

    def as_dict(self) -> dict[str, int]:
        return {
            "t": self.t,
            "k": self.k,
            "drop_threshold": self.drop_threshold,
            "frac_cap": self.frac_cap,
            "s_big": self.s_big,
            "s_split": self.s_split,
        }


# ---------------------------------------------------------------------------
# Generators


def _canonical_set(items: Iterable[int]) -> tuple[int, ...]:
    return tuple(sorted({int(j) for j in items}))


def gen_beck_fiala(n: int, hyperedges: Sequence[Iterable[int]]) -> CoverageInstance:
    """Encode a hypergraph as a coverage family, one function per hyperedge.

    Hyperedge H becomes the function with singleton dual sets {i} for each
    i in H, so the function value on T is exactly |T intersect H|.  The
    sparsity of the result equals the maximum vertex degree.
    """
    functions = []
    for hi, edge in enumerate(hyperedges):
        members = _canonical_set(edge)
        if not members:
            raise ValueError(f"hyperedge {hi} is empty")
        functions.append(CoverageFunction(tuple((j,) for j in members)))
    return _require_valid(
        CoverageInstance(n=n, functions=tuple(functions)), "gen_beck_fiala"
    )


def gen_partition_matroid(n: int, blocks: Sequence[Iterable[int]]) -> CoverageInstance:
    """Rank function of a partition matroid: one function whose dual sets
    are the partition blocks.  Blocks must be disjoint and cover [0, n)."""
    canon = [_canonical_set(b) for b in blocks]
    seen: set[int] = set()
    for bi, b in enumerate(canon):
        overlap = seen.intersection(b)
        if overlap:
            raise ValueError(f"blocks overlap on items {sorted(overlap)} (block {bi})")
        seen.update(b)
    if seen != set(range(n)):
        missing = sorted(set(range(n)) - seen)
        raise ValueError(f"blocks do not cover [0, {n}): missing {missing}")
    fn = CoverageFunction(tuple(canon))
    return _require_valid(CoverageInstance(n=n, functions=(fn,)), "gen_partition_matroid")


def gen_edge_coverage(
    num_vertices: int, edges: Sequence[tuple[int, int]]
) -> CoverageInstance:
    """Vertex coverage by edges: items are the edges of a simple graph,
    one dual set per vertex listing its incident edge indices.

    Vertices with no incident edge contribute no set (they can never be
    covered, so the function value is unaffected).
    """
    incident: dict[int, list[int]] = {}
    seen_edges: set[tuple[int, int]] = set()
    for ei, (u, v) in enumerate(edges):
        u, v = int(u), int(v)
        if u == v:
            raise ValueError(f"edge {ei} is a self-loop ({u},{v})")
        if not (0 <= u < num_vertices and 0 <= v < num_vertices):
            raise ValueError(f"edge {ei} endpoint out of range: ({u},{v})")
        key = (min(u, v), max(u, v))
        if key in seen_edges:
            raise ValueError(f"edge {ei} duplicates {key}; graph must be simple")
        seen_edges.add(key)
        incident.setdefault(u, []).append(ei)
        incident.setdefault(v, []).append(ei)
    sets = tuple(
        tuple(sorted(incident[v])) for v in sorted(incident) if incident[v]
    )
    fn = CoverageFunction(sets)
    return _require_valid(
        CoverageInstance(n=len(edges), functions=(fn,)), "gen_edge_coverage"
    )


def gen_random(
    n: int,
    m: int,
    t: int,
    size_range: tuple[int, int] = (2, 4),
    seed: int = 0,
) -> CoverageInstance:
    """Random valid instance with sparsity at most t, deterministic per seed.

    Dual sets are drawn one at a time with sizes uniform in size_range and
    members uniform among items that still have membership capacity left
    (each item may join at most t sets).  Sets are dealt to the functions
    round-robin, so every function receives a set while capacity lasts.
    """
    lo, hi = int(size_range[0]), int(size_range[1])
    if n < 1 or m < 1 or t < 1:
        raise ValueError(f"need n, m, t >= 1, got n={n} m={m} t={t}")
    if not (1 <= lo <= hi <= n):
        raise ValueError(f"size range must satisfy 1 <= lo <= hi <= n, got ({lo},{hi})")
    if t * n < m * lo:
        raise ValueError(
            f"infeasible: capacity t*n={t * n} cannot host one set of size {lo} "
            f"per function (m={m})"
        )
    rng = np.random.default_rng(seed)
    capacity = np.full(n, t, dtype=np.int64)
    mean_size = (lo + hi) / 2.0
    target = max(m, int(0.85 * t * n / mean_size))
    per_function: list[list[tuple[int, ...]]] = [[] for _ in range(m)]
    for idx in range(target):
        size = int(rng.integers(lo, hi + 1))
        eligible = np.flatnonzero(capacity > 0)
        if eligible.size < size:
            break
        members = rng.choice(eligible, size=size, replace=False)
        capacity[members] -= 1
        per_function[idx % m].append(tuple(sorted(int(j) for j in members)))
    functions = tuple(CoverageFunction(tuple(sets)) for sets in per_function)
    return _require_valid(
        CoverageInstance(n=n, functions=functions), "gen_random"
    )


# ---------------------------------------------------------------------------
# Serialization (UTF-8 JSON)
#
# {"n": int, "functions": [{"sets": [[int, ...], ...]}, ...],
#  "meta": {"seed": int, "generator": str}}        # meta optional
#
# Sets are written sorted ascending; the parser accepts unsorted input and
# canonicalizes (sort + dedup).  Unknown top-level keys other than "meta"
# are rejected.


def read_instance(text: str) -> CoverageInstance:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceFormatError(
            f"invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from exc
    if not isinstance(data, dict):
        raise InstanceFormatError("top level must be a JSON object")
    unknown = set(data) - {"n", "functions", "meta"}
    if unknown:
        raise InstanceFormatError(f"unknown top-level keys: {sorted(unknown)}")
    if "n" not in data:
        raise InstanceFormatError("missing field 'n'")
    if not isinstance(data["n"], int):
        raise InstanceFormatError(f"field 'n' must be an integer, got {data['n']!r}")
    if "functions" not in data:
        raise InstanceFormatError("missing field 'functions'")
    if not isinstance(data["functions"], list) or not data["functions"]:
        raise InstanceFormatError("field 'functions' must be a nonempty list")
    functions = []
    for i, fobj in enumerate(data["functions"]):
        if not isinstance(fobj, dict) or set(fobj) != {"sets"}:
            raise InstanceFormatError(
                f"functions[{i}] must be an object with exactly one key 'sets'"
            )
        sets = fobj["sets"]
        if not isinstance(sets, list):
            raise InstanceFormatError(f"functions[{i}].sets must be a list")
        canon = []
        for si, s in enumerate(sets):
            if not isinstance(s, list) or not all(isinstance(j, int) for j in s):
                raise InstanceFormatError(
                    f"functions[{i}].sets[{si}] must be a list of integers"
                )
            canon.append(_canonical_set(s))
        functions.append(CoverageFunction(tuple(canon)))
    meta = data.get("meta")
    if meta is not None and not isinstance(meta, dict):
        raise InstanceFormatError("field 'meta' must be an object")
    inst = CoverageInstance(n=data["n"], functions=tuple(functions), meta=meta)
    return _require_valid(inst, "instance file")


def write_instance(inst: CoverageInstance) -> str:
    obj: dict[str, object] = {
        "n": inst.n,
        "functions": [
            {"sets": [sorted(s) for s in fn.sets]} for fn in inst.functions
        ],
    }
    if inst.meta is not None:
        obj["meta"] = {key: inst.meta[key] for key in sorted(inst.meta)}
    return json.dumps(obj, separators=(",", ":")) + "\n"
