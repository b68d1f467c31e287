"""Combined solver for families with dual sets of every size.

Sets are split at the size threshold s_split = ceil(24*k*ln(n*t*k)):
sets at most that large are kept whole, bigger ones are truncated to a
representative of exactly s_split items.  The items are then partitioned
into independent batches by a greedy (max degree + 1) vertex coloring of
the dependency graph, so every dual set meets each batch at most once.

Starting from the uniform coloring, batches are rounded one at a time by
an expectation-preserving LP walk.  Within a batch, value-preservation
rows are kept only for functions that still have more than 3t fractional
occurrences; once a function drops below that threshold its remaining
error is at most 3t, and unbiased steps make the per-function value
sequence a martingale with increments bounded by 3t.  An Azuma bound
then caps the small-set discrepancy at 12*sqrt(t^3*s_split*ln(ntk)),
while the independently rounded representatives of the big sets are
rainbow with high probability, which forces their discrepancy to zero.
Both facts are verified per attempt and the attempt is retried if either
check fails.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .coloring import (
    FRAC_TOL,
    IntegralColoring,
    discrepancy,
    fractional_rows,
    snap_rows,
    uniform_coloring,
)
from .instance import CoverageFunction, CoverageInstance, ThresholdSet
from .lp import LinearSystem, round_in_expectation
from .report import SolveReport

__all__ = [
    "SplitFamily",
    "Batches",
    "split",
    "batch_partition",
    "round_batch",
    "solve_all_sets",
]


@dataclass(frozen=True)
class SplitFamily:
    """Size-split view of an instance.

    `small` holds the per-function sets of size at most s_split, `big_truncated`
    the representatives (exactly s_split items, lowest indices of each sorted
    big set) and `big_original` the untruncated big sets.  The rounding
    family is small + truncated and is what the batched LP pass preserves.
    """

    n: int
    small: tuple[tuple[tuple[int, ...], ...], ...]
    big_original: tuple[tuple[tuple[int, ...], ...], ...]
    big_truncated: tuple[tuple[tuple[int, ...], ...], ...]
    s_split: int
    t: int

    @property
    def m(self) -> int:
        return len(self.small)

    @cached_property
    def rounding_sets(self) -> tuple[tuple[tuple[int, ...], ...], ...]:
        return tuple(
            small + trunc for small, trunc in zip(self.small, self.big_truncated)
        )

    @cached_property
    def rounding_instance(self) -> CoverageInstance:
        return CoverageInstance(
            n=self.n,
            functions=tuple(CoverageFunction(sets) for sets in self.rounding_sets),
        )

    @cached_property
    def _flat(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(flat item array, per-set start offsets, per-set owner function)."""
        items: list[int] = []
        offsets: list[int] = []
        owners: list[int] = []
        for i, sets in enumerate(self.rounding_sets):
            for s in sets:
                offsets.append(len(items))
                owners.append(i)
                items.extend(s)
        return (
            np.asarray(items, dtype=np.int64),
            np.asarray(offsets, dtype=np.int64),
            np.asarray(owners, dtype=np.int64),
        )

    @cached_property
    def item_sets(self) -> list[list[int]]:
        """For each item, the ids of rounding sets containing it."""
        incidence: list[list[int]] = [[] for _ in range(self.n)]
        sid = 0
        for sets in self.rounding_sets:
            for s in sets:
                for j in s:
                    incidence[j].append(sid)
                sid += 1
        return incidence

    @cached_property
    def set_members(self) -> list[np.ndarray]:
        out = []
        for sets in self.rounding_sets:
            for s in sets:
                out.append(np.asarray(s, dtype=np.int64))
        return out


def split(inst: CoverageInstance, k: int) -> SplitFamily:
    """Partition every function's sets at the s_split size threshold and
    truncate the big ones to their first s_split sorted items."""
    thresholds = ThresholdSet.from_instance(inst, k)
    s_split = thresholds.s_split
    small, big, trunc = [], [], []
    for fn in inst.functions:
        sm, bg, tr = [], [], []
        for s in fn.sets:
            if len(s) <= s_split:
                sm.append(s)
            else:
                bg.append(s)
                tr.append(tuple(sorted(s)[:s_split]))
        small.append(tuple(sm))
        big.append(tuple(bg))
        trunc.append(tuple(tr))
    return SplitFamily(
        n=inst.n,
        small=tuple(small),
        big_original=tuple(big),
        big_truncated=tuple(trunc),
        s_split=s_split,
        t=max(1, inst.t),
    )


@dataclass(frozen=True)
class Batches:
    """Ordered disjoint independent sets covering all items."""

    batches: tuple[np.ndarray, ...]

    def __len__(self) -> int:
        return len(self.batches)

    def __iter__(self):
        return iter(self.batches)


def batch_partition(family: SplitFamily) -> Batches:
    """Greedy sequential vertex coloring of the dependency graph.

    Items sharing a rounding set are adjacent; each item takes the
    smallest color unused by earlier neighbors, so the number of batches
    is at most (max degree + 1) <= t*s_split + 1.
    """
    n = family.n
    color = np.full(n, -1, dtype=np.int64)
    members = family.set_members
    for v in range(n):
        used: set[int] = set()
        for sid in family.item_sets[v]:
            for u in members[sid]:
                cu = color[u]
                if cu >= 0:
                    used.add(int(cu))
        c = 0
        while c in used:
            c += 1
        color[v] = c
    count = int(color.max()) + 1 if n else 0
    cap = family.t * family.s_split + 1
    if count > cap:
        raise RuntimeError(f"greedy coloring used {count} > t*s+1 = {cap} batches")
    return Batches(
        batches=tuple(np.flatnonzero(color == c) for c in range(count))
    )


def family_values(family: SplitFamily, Y: np.ndarray) -> np.ndarray:
    """(m, k) multilinear values of the rounding family at each color column."""
    flat, offsets, owners = family._flat
    m, k = family.m, Y.shape[1]
    values = np.zeros((m, k))
    if flat.size == 0:
        return values
    for c in range(k):
        w = 1.0 - Y[flat, c]
        prods = np.multiply.reduceat(w, offsets)
        values[:, c] = np.bincount(owners, weights=1.0 - prods, minlength=m)
    return values


@dataclass
class BatchStats:
    rounded: int = 0
    inner_iterations: int = 0
    forced_steps: int = 0
    max_active: int = 0
    value_change: float = 0.0

    def merge(self, other: "BatchStats") -> None:
        self.rounded += other.rounded
        self.inner_iterations += other.inner_iterations
        self.forced_steps += other.forced_steps
        self.max_active = max(self.max_active, other.max_active)
        self.value_change = max(self.value_change, other.value_change)


def _batch_coefficients(
    family: SplitFamily, Y: np.ndarray, D: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Affine coefficients of every restricted extension on the batch.

    Returns (C, W): C[i, p, c] is the coefficient of item D[p] in function
    i's extension at color c (the product of (1 - Y) over the rest of each
    set through D[p]); W[i, p] counts the sets of function i containing
    D[p].  Every set may meet D at most once.
    """
    flat, offsets, owners = family._flat
    m, k = family.m, Y.shape[1]
    pos = {int(d): p for p, d in enumerate(D)}
    C = np.zeros((m, len(D), k))
    W = np.zeros((m, len(D)), dtype=np.int64)
    seen_sets: set[int] = set()
    touching: list[tuple[int, int]] = []  # (set id, batch position)
    for p, d in enumerate(D):
        for sid in family.item_sets[int(d)]:
            if sid in seen_sets:
                other = [x for x in family.set_members[sid] if x in pos and x != d]
                raise ValueError(
                    f"batch is not independent: set {sid} contains items "
                    f"{[int(d)] + [int(o) for o in other]}"
                )
            seen_sets.add(sid)
            touching.append((sid, p))
            W[owners[sid], p] += 1
    if not touching:
        return C, W
    for c in range(k):
        w = 1.0 - Y[flat, c]
        w[np.isin(flat, D)] = 1.0  # leave out the batch's own factors
        prods = np.multiply.reduceat(w, offsets)
        for sid, p in touching:
            C[owners[sid], p, c] += prods[sid]
    return C, W


def round_batch(
    family: SplitFamily,
    Y: np.ndarray,
    D,
    rng: np.random.Generator,
    tolerance: float = 1e-6,
) -> tuple[np.ndarray, BatchStats]:
    """Integrally color one independent batch, unbiased in expectation.

    All rows of D become 0/1 unit vectors, E[Y'] = Y coordinatewise, and
    every rounding-family value moves by at most 3t per color.  Value
    rows are kept only for functions whose fractional occurrence count
    within the batch still exceeds 3t; dropped constraints free kernel
    directions so each inner pass makes progress.
    """
    Y = np.asarray(Y, dtype=float)
    D = np.sort(np.asarray(list(D), dtype=np.int64))
    n, k = Y.shape
    m = family.m
    drop = 3 * family.t
    frac_before = set(fractional_rows(Y).tolist())
    missing = [int(d) for d in D if int(d) not in frac_before]
    if missing:
        raise ValueError(f"batch items must be fractional rows; got {missing[:5]}")
    C, W = _batch_coefficients(family, Y, D)

    X = Y[D].copy()
    stats = BatchStats(rounded=len(D))
    max_inner = 2 * len(D) * k + 2 * m * k + 16

    def frac_elements() -> list[int]:
        out = []
        for p in range(len(D)):
            row = X[p]
            if np.any((row > FRAC_TOL) & (row < 1.0 - FRAC_TOL)):
                out.append(p)
        return out

    frac = frac_elements()
    while frac:
        stats.inner_iterations += 1
        if stats.inner_iterations > max_inner:
            raise RuntimeError("batch rounding failed to converge")
        occ = W[:, frac].sum(axis=1)
        active = np.flatnonzero(occ > drop)
        stats.max_active = max(stats.max_active, int(active.size))
        nv = len(frac) * k
        A = np.zeros((active.size * k + len(frac), nv))
        for a, i in enumerate(active):
            for c in range(k):
                A[a * k + c, c::k] = C[i, frac, c]
        for e in range(len(frac)):
            A[active.size * k + e, e * k : (e + 1) * k] = 1.0
        x0 = X[frac].reshape(-1)
        b = A @ x0
        x1 = round_in_expectation(LinearSystem(A, b), x0, rng)
        if np.array_equal(x1, x0):
            # the point is a vertex of the relaxed polytope and nothing can
            # be dropped: force one unbiased two-color step (possible only
            # for k >= 4, where the fractional support can reach r k rows)
            p = frac[0]
            fcols = np.flatnonzero((X[p] > FRAC_TOL) & (X[p] < 1.0 - FRAC_TOL))
            c1, c2 = int(fcols[0]), int(fcols[1])
            d_plus = min(1.0 - X[p, c1], X[p, c2])
            d_minus = min(X[p, c1], 1.0 - X[p, c2])
            if rng.random() < d_minus / (d_plus + d_minus):
                X[p, c1] += d_plus
                X[p, c2] -= d_plus
            else:
                X[p, c1] -= d_minus
                X[p, c2] += d_minus
            X[p] = snap_rows(X[p : p + 1])[0]
            stats.forced_steps += 1
        else:
            X[frac] = snap_rows(x1.reshape(len(frac), k))
        frac = frac_elements()

    out = Y.copy()
    out[D] = X
    after = fractional_rows(out).size
    if after != len(frac_before) - len(D):
        raise RuntimeError(
            f"fractional count went {len(frac_before)} -> {after}, "
            f"expected a drop of exactly {len(D)}"
        )
    before_vals = family_values(family, Y)
    after_vals = family_values(family, out)
    worst = float(np.max(np.abs(after_vals - before_vals))) if family.m else 0.0
    stats.value_change = worst
    if worst > drop + tolerance:
        raise RuntimeError(
            f"batch changed a function value by {worst:.6f} > 3t = {drop}"
        )
    return out, stats


BOUND_CONSTANT = 12.0  # twice the Azuma radius constant


def azuma_radius(n: int, t: int, k: int, s_split: int) -> float:
    """Concentration radius of the per-function martingale:
    6*sqrt(t^3*s_split*ln(ntk))."""
    return 6.0 * math.sqrt(t**3 * s_split * math.log(n * t * k))


def small_part_bound(n: int, t: int, k: int, s_split: int) -> float:
    """Certified discrepancy bound for the rounding family: twice the
    Azuma radius (triangle inequality over a color pair)."""
    return BOUND_CONSTANT * math.sqrt(t**3 * s_split * math.log(n * t * k))


def solve_all_sets(
    inst: CoverageInstance,
    k: int,
    seed: int = 0,
    retry_limit: int = 20,
    tolerance: float = 1e-6,
) -> tuple[IntegralColoring, SolveReport]:
    """Split, batch, round, verify; retry on a failed certificate.

    Success requires every truncated big set to be rainbow (which forces
    zero discrepancy on the original big sets) and the rounding-family
    discrepancy to stay within the Azuma bound.  Reruns with the same
    seed reproduce the attempt sequence exactly.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if retry_limit < 1:
        raise ValueError("retry_limit must be >= 1")
    t = max(1, inst.t)
    thresholds = ThresholdSet.from_instance(inst, k)

    if k == 1:
        chi = np.zeros(inst.n, dtype=np.int64)
        disc, witness = discrepancy(inst, chi, k)
        report = SolveReport(
            algorithm="all",
            n=inst.n,
            m=inst.m,
            t=t,
            k=k,
            seed=seed,
            success=True,
            discrepancy=float(disc),
            bound=0.0,
            retries=0,
            thresholds=thresholds.as_dict(),
            phases={"batches": 0},
            verification={"all_big_rainbow": True, "witness": list(witness)},
        )
        return IntegralColoring(chi=chi, k=k), report

    family = split(inst, k)
    if family.s_split < k:
        raise ValueError(
            f"split threshold {family.s_split} is below k={k}; truncated sets "
            "could never be rainbow - use solve_small_sets instead"
        )
    batches = batch_partition(family)
    bound = small_part_bound(inst.n, t, k, family.s_split)
    big_count = sum(len(b) for b in family.big_original)

    rng = np.random.default_rng(seed)
    best = None  # (key, chi, disc_full, disc_small, rainbow_ok, witness)
    attempts = 0
    success = False
    totals = BatchStats()
    max_value_change = 0.0
    while attempts < retry_limit and not success:
        attempts += 1
        try:
            Y = uniform_coloring(inst.n, k)
            for D in batches:
                Y, bstats = round_batch(family, Y, D, rng, tolerance=tolerance)
                totals.merge(bstats)
                max_value_change = max(max_value_change, bstats.value_change)
            chi = np.argmax(Y, axis=1).astype(np.int64)
            if fractional_rows(Y).size:
                raise RuntimeError("coloring still fractional after all batches")
        except RuntimeError:
            continue
        rainbow_ok = all(
            np.unique(chi[list(s)]).size == k
            for trunc in family.big_truncated
            for s in trunc
        )
        if rainbow_ok:
            # superset monotonicity: the untruncated big sets must follow
            for big in family.big_original:
                for s in big:
                    assert np.unique(chi[list(s)]).size == k
        disc_small, _ = discrepancy(family.rounding_instance, chi, k)
        disc_full, witness = discrepancy(inst, chi, k)
        key = (not rainbow_ok, disc_small > bound, disc_full)
        if best is None or key < best[0]:
            best = (key, chi, disc_full, disc_small, rainbow_ok, witness)
        success = rainbow_ok and disc_small <= bound

    if best is None:
        raise RuntimeError("every attempt failed before producing a coloring")
    _, chi, disc_full, disc_small, rainbow_ok, witness = best
    report = SolveReport(
        algorithm="all",
        n=inst.n,
        m=inst.m,
        t=t,
        k=k,
        seed=seed,
        success=success,
        discrepancy=float(disc_full),
        bound=bound,
        retries=attempts - 1,
        thresholds=thresholds.as_dict(),
        phases={
            "batches": len(batches),
            "big_sets": big_count,
            "inner_iterations": totals.inner_iterations,
            "forced_steps": totals.forced_steps,
            "max_active_constraints": totals.max_active,
            "max_batch_value_change": max_value_change,
        },
        verification={
            "all_big_rainbow": bool(rainbow_ok),
            "small_part_discrepancy": float(disc_small),
            "witness": list(witness),
            "azuma_radius": azuma_radius(inst.n, t, k, family.s_split),
            "bound_constant": BOUND_CONSTANT,
        },
    )
    return IntegralColoring(chi=chi, k=k), report
