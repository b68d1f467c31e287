"""Colorings, discrepancy evaluation, and the multilinear extension.

A fractional k-coloring is an n-by-k row-stochastic matrix: row j is the
color distribution of item j.  The multilinear extension of a coverage
function evaluates, for a vector x in [0, 1]^n, the expected function
value when item j is included independently with probability x_j; for
dual sets this has the closed form sum_S (1 - prod_{j in S} (1 - x_j)).

Restricting the extension to an item set D that meets every dual set at
most once makes it affine in the D-coordinates; the affine form is what
the LP-based rounding passes preserve.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .instance import CoverageFunction, CoverageInstance

__all__ = [
    "ROW_TOL",
    "FRAC_TOL",
    "FractionalColoring",
    "IntegralColoring",
    "RestrictedLinearForm",
    "uniform_coloring",
    "eval_f",
    "eval_F",
    "discrepancy",
    "frac_discrepancy",
    "restricted_form",
    "read_coloring",
    "write_coloring",
]

ROW_TOL = 1e-9  # allowed drift of a row sum away from 1
FRAC_TOL = 1e-9  # entries within this of {0, 1} count as integral


@dataclass
class IntegralColoring:
    """Assignment of one color in [0, k) to every item."""

    chi: np.ndarray
    k: int

    def __post_init__(self):
        self.chi = np.asarray(self.chi, dtype=np.int64)
        if self.chi.ndim != 1:
            raise ValueError("chi must be one-dimensional")
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")
        if self.chi.size and (self.chi.min() < 0 or self.chi.max() >= self.k):
            raise ValueError(f"colors must lie in [0, {self.k})")

    @property
    def n(self) -> int:
        return int(self.chi.size)

    def color_class(self, color: int) -> np.ndarray:
        return np.flatnonzero(self.chi == color)


@dataclass
class FractionalColoring:
    """Row-stochastic n-by-k matrix of color probabilities."""

    Y: np.ndarray

    def __post_init__(self):
        self.Y = np.asarray(self.Y, dtype=float)
        if self.Y.ndim != 2:
            raise ValueError("Y must be an n-by-k matrix")

    @property
    def n(self) -> int:
        return self.Y.shape[0]

    @property
    def k(self) -> int:
        return self.Y.shape[1]

    def validate(self) -> list[str]:
        bad = []
        if np.any(self.Y < -FRAC_TOL) or np.any(self.Y > 1 + FRAC_TOL):
            bad.append("entries must lie in [0, 1]")
        drift = np.abs(self.Y.sum(axis=1) - 1.0)
        if np.any(drift > ROW_TOL):
            rows = np.flatnonzero(drift > ROW_TOL)[:5].tolist()
            bad.append(f"rows do not sum to 1 within {ROW_TOL}: {rows}")
        return bad

    def fractional_items(self) -> np.ndarray:
        return fractional_rows(self.Y)

    def is_integral(self) -> bool:
        return fractional_rows(self.Y).size == 0

    def to_integral(self) -> IntegralColoring:
        if not self.is_integral():
            raise ValueError("coloring still has fractional rows")
        return IntegralColoring(chi=np.argmax(self.Y, axis=1), k=self.k)


def uniform_coloring(n: int, k: int) -> np.ndarray:
    """The all-1/k fractional coloring as a raw (n, k) matrix."""
    return np.full((n, k), 1.0 / k, dtype=float)


def fractional_rows(Y: np.ndarray) -> np.ndarray:
    """Indices of rows with at least one entry strictly inside (tol, 1-tol)."""
    Y = np.asarray(Y, dtype=float)
    frac = (Y > FRAC_TOL) & (Y < 1.0 - FRAC_TOL)
    return np.flatnonzero(frac.any(axis=1))


def snap_rows(Y: np.ndarray) -> np.ndarray:
    """Clamp near-integral entries to exact {0, 1} and renormalize rows
    whose sum drifted beyond the row tolerance."""
    out = np.where(np.abs(Y) <= FRAC_TOL, 0.0, Y)
    out = np.where(np.abs(out - 1.0) <= FRAC_TOL, 1.0, out)
    sums = out.sum(axis=1)
    bad = np.abs(sums - 1.0) > ROW_TOL
    if np.any(bad):
        out[bad] = out[bad] / sums[bad, None]
    return out


def _matrix(Y) -> np.ndarray:
    if isinstance(Y, FractionalColoring):
        return Y.Y
    return np.asarray(Y, dtype=float)


def _colors(chi) -> tuple[np.ndarray, int | None]:
    if isinstance(chi, IntegralColoring):
        return chi.chi, chi.k
    return np.asarray(chi, dtype=np.int64), None


# ---------------------------------------------------------------------------
# Function evaluation


def eval_f(fn: CoverageFunction, items: Iterable[int]) -> int:
    """Number of dual sets hit by the item set."""
    T = set(int(j) for j in items)
    return sum(1 for s in fn.sets if not T.isdisjoint(s))


def eval_F(fn: CoverageFunction, x: Sequence[float]) -> float:
    """Multilinear extension in closed form: sum_S (1 - prod_{j in S}(1 - x_j)).

    Products are taken left-to-right over the stored (sorted) set order so
    repeated evaluations are bit-for-bit reproducible.
    """
    x = np.asarray(x, dtype=float)
    one_minus = 1.0 - x
    total = 0.0
    for s in fn.sets:
        prod = 1.0
        for j in s:
            prod *= one_minus[j]
        total += 1.0 - prod
    return total


def function_color_values(inst: CoverageInstance, chi: np.ndarray, k: int) -> np.ndarray:
    """(m, k) matrix of f_i evaluated on every color class."""
    chi = np.asarray(chi, dtype=np.int64)
    values = np.zeros((inst.m, k), dtype=np.int64)
    for i, fn in enumerate(inst.functions):
        for s in fn.sets:
            present = np.unique(chi[list(s)])
            values[i, present] += 1
    return values


def discrepancy(inst: CoverageInstance, chi, k: int | None = None):
    """Largest pairwise color imbalance, with a witness triple.

    Returns (value, (i, l, l')) where the witness is the lexicographically
    smallest triple attaining the maximum.  For k = 1 the value is 0 with
    witness (0, 0, 0).
    """
    colors, file_k = _colors(chi)
    if k is None:
        k = file_k
    if k is None:
        raise ValueError("k is required when chi is a bare array")
    if colors.size != inst.n:
        raise ValueError(f"coloring length {colors.size} != n={inst.n}")
    if k == 1:
        return 0.0, (0, 0, 0)
    values = function_color_values(inst, colors, k)
    spreads = values.max(axis=1) - values.min(axis=1)
    best = int(spreads.max()) if inst.m else 0
    witness = (0, 0, 0)
    for i in range(inst.m):
        if spreads[i] != best:
            continue
        found = False
        for a in range(k):
            for b in range(a + 1, k):
                if abs(int(values[i, a]) - int(values[i, b])) == best:
                    witness = (i, a, b)
                    found = True
                    break
            if found:
                break
        break
    return float(best), witness


def frac_discrepancy(inst: CoverageInstance, Y) -> float:
    """Largest pairwise gap of multilinear values across color columns."""
    Y = _matrix(Y)
    worst = 0.0
    for fn in inst.functions:
        vals = [eval_F(fn, Y[:, c]) for c in range(Y.shape[1])]
        worst = max(worst, max(vals) - min(vals))
    return worst


# ---------------------------------------------------------------------------
# Restricted multilinear extension


@dataclass
class RestrictedLinearForm:
    """Affine form of the multilinear extension in the coordinates of D.

    For each color column the extension equals
    const[l] + sum_d coef[pos(d), l] * x_{d l}, valid because every dual
    set meets D in at most one item.  Evaluating at the fixed coloring
    reproduces the unrestricted value.
    """

    items: tuple[int, ...]
    const: np.ndarray  # (k,)
    coef: np.ndarray  # (|D|, k)

    def value(self, X_D: np.ndarray) -> np.ndarray:
        X_D = np.asarray(X_D, dtype=float)
        return self.const + (self.coef * X_D).sum(axis=0)


def restricted_form(fn: CoverageFunction, Y, D: Iterable[int]) -> RestrictedLinearForm:
    """Build the affine form of the extension restricted to D.

    Raises ValueError naming the first dual set that meets D more than
    once (the restriction is only affine for independent D).
    """
    Y = _matrix(Y)
    items = tuple(sorted(int(d) for d in D))
    pos = {d: idx for idx, d in enumerate(items)}
    k = Y.shape[1]
    const = np.zeros(k)
    coef = np.zeros((len(items), k))
    dset = set(items)
    for si, s in enumerate(fn.sets):
        inside = [j for j in s if j in dset]
        if len(inside) > 1:
            raise ValueError(
                f"set {si} = {list(s)} meets D in {inside}; restriction "
                "requires at most one shared item per set"
            )
        for c in range(k):
            if inside:
                d = inside[0]
                p = 1.0
                for j in s:
                    if j != d:
                        p *= 1.0 - Y[j, c]
                const[c] += 1.0 - p
                coef[pos[d], c] += p
            else:
                p = 1.0
                for j in s:
                    p *= 1.0 - Y[j, c]
                const[c] += 1.0 - p
    return RestrictedLinearForm(items=items, const=const, coef=coef)


# ---------------------------------------------------------------------------
# Serialization
#
# Integral:   {"k": int, "chi": [int, ...]}
# Fractional: {"k": int, "Y": [[float x k], ...]}


def read_coloring(text: str):
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValueError(
            f"invalid coloring JSON at line {exc.lineno}: {exc.msg}"
        ) from exc
    if not isinstance(data, dict) or "k" not in data:
        raise ValueError("coloring file must be an object with a 'k' field")
    k = data["k"]
    if not isinstance(k, int) or k < 1:
        raise ValueError(f"'k' must be a positive integer, got {k!r}")
    if "chi" in data:
        chi = np.asarray(data["chi"], dtype=np.int64)
        return IntegralColoring(chi=chi, k=k)
    if "Y" in data:
        Y = np.asarray(data["Y"], dtype=float)
        if Y.ndim != 2 or Y.shape[1] != k:
            raise ValueError("'Y' must be an n-by-k matrix")
        drift = np.abs(Y.sum(axis=1) - 1.0)
        if np.any(drift > 1e-6):
            raise ValueError("rows of 'Y' must sum to 1 within 1e-6")
        sums = Y.sum(axis=1)
        fix = np.abs(sums - 1.0) > ROW_TOL
        if np.any(fix):
            Y[fix] = Y[fix] / sums[fix, None]
        return FractionalColoring(Y=Y)
    raise ValueError("coloring file needs either 'chi' or 'Y'")


def write_coloring(coloring) -> str:
    if isinstance(coloring, IntegralColoring):
        obj = {"k": coloring.k, "chi": coloring.chi.tolist()}
    elif isinstance(coloring, FractionalColoring):
        obj = {"k": coloring.k, "Y": coloring.Y.tolist()}
    else:
        raise TypeError(f"cannot serialize {type(coloring).__name__}")
    return json.dumps(obj, separators=(",", ":")) + "\n"
