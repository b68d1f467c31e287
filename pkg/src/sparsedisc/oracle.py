"""Brute-force ground truth for small instances.

min_discrepancy_exhaustive enumerates all k^n colorings in blocks and
returns the exact optimum; eval_F_enumeration sums the defining
expectation of the multilinear extension over every subset of a
function's support.  Both are guarded by state-count limits that the
SPARSEDISC_MAX_ENUM environment variable can raise.
"""

from __future__ import annotations

import os

import numpy as np

from .coloring import IntegralColoring
from .instance import CoverageFunction, CoverageInstance

__all__ = ["min_discrepancy_exhaustive", "eval_F_enumeration"]

MAX_COLORINGS = 10**7
MAX_SUBSET_BITS = 20
_BLOCK = 1 << 16


def _env_limit() -> int | None:
    raw = os.environ.get("SPARSEDISC_MAX_ENUM")
    return int(raw) if raw else None


def min_discrepancy_exhaustive(
    inst: CoverageInstance, k: int, max_states: int | None = None
) -> tuple[float, IntegralColoring]:
    """Exact minimum discrepancy over all k^n colorings.

    Colorings are enumerated as base-k counters with the smallest item
    index cycling fastest; among optimal colorings the lexicographically
    smallest (read item 0 first) is returned.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    limit = max_states if max_states is not None else (_env_limit() or MAX_COLORINGS)
    states = k**inst.n
    if states > limit:
        raise ValueError(
            f"k^n = {states} colorings exceed the enumeration guard {limit}; "
            "shrink the instance or set SPARSEDISC_MAX_ENUM"
        )
    n, m = inst.n, inst.m
    place = k ** np.arange(n, dtype=np.int64)
    lex_key = k ** (n - 1 - np.arange(n, dtype=np.int64))
    per_function = [
        [np.asarray(s, dtype=np.int64) for s in fn.sets] for fn in inst.functions
    ]

    best_val: int | None = None
    best_key: int | None = None
    best_chi: np.ndarray | None = None
    for start in range(0, states, _BLOCK):
        ids = np.arange(start, min(states, start + _BLOCK), dtype=np.int64)
        digits = (ids[:, None] // place[None, :]) % k
        worst = np.zeros(ids.size, dtype=np.int64)
        values = np.zeros((ids.size, k), dtype=np.int64)
        for fsets in per_function:
            values[:] = 0
            for s in fsets:
                sub = digits[:, s]
                for c in range(k):
                    values[:, c] += (sub == c).any(axis=1)
            spread = values.max(axis=1) - values.min(axis=1)
            np.maximum(worst, spread, out=worst)
        block_best = int(worst.min())
        if best_val is not None and block_best > best_val:
            continue
        achievers = np.flatnonzero(worst == block_best)
        keys = digits[achievers] @ lex_key
        pick = int(np.argmin(keys))
        cand_key = int(keys[pick])
        if best_val is None or block_best < best_val or cand_key < best_key:
            best_val = block_best
            best_key = cand_key
            best_chi = digits[achievers[pick]].copy()
    return float(best_val), IntegralColoring(chi=best_chi, k=k)


def eval_F_enumeration(
    fn: CoverageFunction, x, max_bits: int | None = None
) -> float:
    """Multilinear extension by full expectation over the support:
    sum_T f(T) * prod_{i in T} x_i * prod_{j not in T} (1 - x_j)."""
    x = np.asarray(x, dtype=float)
    support = fn.support()
    limit = max_bits if max_bits is not None else MAX_SUBSET_BITS
    env = _env_limit()
    if env is not None and max_bits is None:
        limit = max(limit, int(np.log2(env)))
    u = len(support)
    if u > limit:
        raise ValueError(
            f"support of size {u} exceeds the {limit}-bit enumeration guard"
        )
    pos = {j: p for p, j in enumerate(support)}
    masks = np.arange(1 << u, dtype=np.int64)
    weights = np.ones(1 << u)
    for p, j in enumerate(support):
        bit = (masks >> p) & 1
        weights *= np.where(bit == 1, x[j], 1.0 - x[j])
    fvals = np.zeros(1 << u)
    for s in fn.sets:
        smask = 0
        for j in s:
            smask |= 1 << pos[j]
        fvals += (masks & smask) != 0
    return float(fvals @ weights)
