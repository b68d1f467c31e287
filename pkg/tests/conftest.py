"""Shared helpers: random instance builders and the acceptance summary."""

from __future__ import annotations

import numpy as np

import sparsedisc as sd

_acceptance_results: list[str] = []


def record_acceptance(name: str, passed: bool, detail: str = "") -> None:
    status = "PASS" if passed else "FAIL"
    line = f"[{status}] {name}"
    if detail:
        line += f"  ({detail})"
    _acceptance_results.append(line)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if _acceptance_results:
        terminalreporter.section("acceptance criteria")
        for line in _acceptance_results:
            terminalreporter.write_line(line)


def merge_instances(*insts: sd.CoverageInstance) -> sd.CoverageInstance:
    """Stack the function lists of instances over the same item universe."""
    n = insts[0].n
    assert all(i.n == n for i in insts)
    functions = tuple(fn for inst in insts for fn in inst.functions)
    return sd.CoverageInstance(n=n, functions=functions)


def random_function(rng: np.random.Generator, n: int, max_sets: int = 5,
                    max_size: int | None = None) -> sd.CoverageFunction:
    """Random coverage function over [0, n) with a few modest dual sets."""
    cap = max_size if max_size is not None else max(1, n // 2)
    sets = []
    for _ in range(int(rng.integers(1, max_sets + 1))):
        size = int(rng.integers(1, min(n, cap) + 1))
        members = rng.choice(n, size=size, replace=False)
        sets.append(tuple(sorted(int(j) for j in members)))
    return sd.CoverageFunction(tuple(sets))


def random_row_stochastic(rng: np.random.Generator, n: int, k: int) -> np.ndarray:
    Y = rng.uniform(0.05, 1.0, size=(n, k))
    return Y / Y.sum(axis=1, keepdims=True)


def independent_items(fn: sd.CoverageFunction, rng: np.random.Generator,
                      n: int, want: int) -> list[int]:
    """Greedily pick items no dual set holds two of (valid restriction set)."""
    order = rng.permutation(n)
    chosen: list[int] = []
    for j in order:
        j = int(j)
        if any(j in s and any(c in s for c in chosen) for s in fn.sets):
            continue
        chosen.append(j)
        if len(chosen) >= want:
            break
    return sorted(chosen)


def mixed_instance(n: int, t: int, k: int, seed: int) -> sd.CoverageInstance:
    """Mixed small/big instance with total sparsity at most t.

    Small sets consume t-1 membership slots per item; one extra function
    holds two disjoint sets larger than the split threshold (one slot).
    """
    import math

    assert t >= 2
    small = sd.gen_random(n, 2, t - 1, (2, 8), seed=seed)
    s_split = math.ceil(24.0 * k * math.log(n * t * k))  # threshold of the merge
    assert s_split + 1 <= n, "universe too small for any big set"
    rng = np.random.default_rng(seed + 1)
    margin = int(rng.integers(40, 160))
    want = 2 if 2 * (s_split + 1) <= n else 1
    size = min(s_split + margin, n // want)
    perm = rng.permutation(n)
    big = tuple(
        tuple(sorted(int(j) for j in perm[i * size : (i + 1) * size]))
        for i in range(want)
    )
    big_fn = sd.CoverageFunction(big)
    return merge_instances(small, sd.CoverageInstance(n=n, functions=(big_fn,)))
