"""Zero-discrepancy solver for families whose dual sets are all big.

A coloring under which every dual set contains every color (a "rainbow"
set) has discrepancy exactly zero: each set contributes one covered
element to every color class.  When every set has at least s_big items,
a uniformly random coloring misses a color in any fixed size-s_big
subset with probability at most k*(1-1/k)^s_big, and each such event
depends on at most t*s_big others, so the symmetric local-lemma
condition holds and Moser-Tardos resampling finds a rainbow coloring
fast: color everything uniformly, and while some representative subset
misses a color, recolor just that subset.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .coloring import IntegralColoring, discrepancy
from .instance import CoverageInstance, ThresholdSet
from .report import SolveReport

__all__ = [
    "RainbowProblem",
    "is_rainbow",
    "lll_threshold",
    "solve_big_sets",
]

_SCAN_CAP = 10**6


def is_rainbow(S, chi, k: int) -> bool:
    """True iff every color in [0, k) appears among the items of S."""
    chi = np.asarray(chi, dtype=np.int64)
    members = np.asarray(list(S), dtype=np.int64)
    if members.size < k:
        return False
    return np.unique(chi[members]).size == k


def lll_threshold(t: int, k: int) -> int:
    """Smallest set size s for which uniform recoloring provably works.

    Uses the symmetric local-lemma condition with weight 1/(t*s + 1):
    k * exp(-s/k) * e * (t*s + 1) <= 1.  Nondecreasing in both t and k.
    For k = 1 any nonempty set already holds the only color, so s = 1.
    """
    if t < 1:
        raise ValueError(f"t must be >= 1, got {t}")
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if k == 1:
        return 1
    for s in range(1, _SCAN_CAP + 1):
        if math.log(k) + 1.0 + math.log(t * s + 1.0) - s / k <= 0.0:
            return s
    raise RuntimeError(f"no feasible set-size threshold below {_SCAN_CAP}")


@dataclass(frozen=True)
class RainbowProblem:
    """Resampling problem: one size-s_big representative per dual set."""

    representatives: tuple[tuple[int, ...], ...]
    k: int
    seed: int

    @classmethod
    def from_instance(cls, inst: CoverageInstance, k: int, seed: int) -> "RainbowProblem":
        t = max(1, inst.t)
        s_big = lll_threshold(t, k)
        reps = []
        for i, dual in inst.all_sets():
            if len(dual) < s_big:
                raise ValueError(
                    f"set {list(dual)} in function {i} has size {len(dual)} "
                    f"< required minimum {s_big} for t={t}, k={k}"
                )
            reps.append(tuple(sorted(dual)[:s_big]))
        return cls(representatives=tuple(reps), k=k, seed=seed)


def solve_big_sets(
    inst: CoverageInstance,
    k: int,
    seed: int = 0,
    budget_factor: int = 1000,
) -> tuple[IntegralColoring, SolveReport]:
    """Moser-Tardos resampling until every representative is rainbow.

    Always resamples the lowest-indexed violated representative.  On
    success every original set is rainbow (supersets of rainbow sets are
    rainbow) and the discrepancy is exactly zero.  The resample budget is
    `budget_factor` times the expected-work expression
    n * (#sets) / (t * s_big); exceeding it marks the report failed.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    t = max(1, inst.t)
    problem = RainbowProblem.from_instance(inst, k, seed)
    s_big = lll_threshold(t, k)
    thresholds = ThresholdSet.from_instance(inst, k)
    reps = [np.asarray(p, dtype=np.int64) for p in problem.representatives]

    expected_work = inst.n * len(reps) / (t * s_big)
    budget = max(1000, math.ceil(budget_factor * expected_work))

    rng = np.random.default_rng(seed)
    chi = (
        np.zeros(inst.n, dtype=np.int64)
        if k == 1
        else rng.integers(0, k, size=inst.n)
    )
    resamples = 0
    finished = False
    while not finished:
        finished = True
        for p in reps:
            if np.unique(chi[p]).size < k:
                if resamples >= budget:
                    finished = True
                    break
                chi[p] = rng.integers(0, k, size=p.size)
                resamples += 1
                finished = False
                break

    all_rainbow = all(np.unique(chi[p]).size == k for p in reps)
    if all_rainbow:
        # supersets of rainbow representatives must be rainbow themselves
        for i, dual in inst.all_sets():
            if not is_rainbow(dual, chi, k):
                raise RuntimeError(
                    f"set {list(dual)} in function {i} is not rainbow although "
                    "its representative is"
                )
    disc, witness = discrepancy(inst, chi, k)
    success = all_rainbow and disc == 0.0

    report = SolveReport(
        algorithm="big",
        n=inst.n,
        m=inst.m,
        t=t,
        k=k,
        seed=seed,
        success=success,
        discrepancy=float(disc),
        bound=0.0,
        retries=0,
        thresholds=thresholds.as_dict(),
        phases={
            "resamples": resamples,
            "budget": budget,
            "expected_work": expected_work,
            "sets": len(reps),
        },
        verification={
            "all_rainbow": bool(all_rainbow),
            "witness": list(witness),
        },
    )
    return IntegralColoring(chi=chi, k=k), report
