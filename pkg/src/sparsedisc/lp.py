"""Vertex solutions and expectation-preserving rounding for equality
systems over the unit box.

Both operations move a feasible point x of {x in [0,1]^v : Ax = b} along
kernel directions of A restricted to the fractional coordinates of x.
Each step walks to the nearest box facet, so at least one coordinate
becomes integral per step and feasibility is preserved exactly.  The walk
stops when the columns of A indexed by the remaining fractional
coordinates are linearly independent, which caps their number at the row
count of A.

vertex_solution always steps in the +direction (deterministic).
round_in_expectation picks the sign randomly with probabilities that make
every step mean zero, so the returned point is an unbiased sample of the
input: E[X] = x0, AX = b, and at most r coordinates fractional.

The kernel basis is computed once per call by column-pivoted elimination
(pivot tolerance 1e-10, free columns in ascending order) and then updated
incrementally: when a coordinate hits a bound, its component is
eliminated from the remaining basis vectors.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

__all__ = [
    "LinearSystem",
    "NumericalRankError",
    "FEAS_TOL",
    "PIVOT_TOL",
    "vertex_solution",
    "round_in_expectation",
]

FEAS_TOL = 1e-7  # max allowed infinity-norm residual of Ax - b
PIVOT_TOL = 1e-10  # elimination pivot threshold
FRAC_TOL = 1e-9  # coordinates within this of {0, 1} count as integral
_SNAP = 1e-12  # bound-hit detection distance
_KERNEL_RESID = 1e-8  # max allowed ||A lambda||_inf for a walk direction


class NumericalRankError(RuntimeError):
    """Raised when elimination produces a direction that is not in the
    kernel to working precision, or feasibility degrades beyond FEAS_TOL."""


@dataclass(frozen=True)
class LinearSystem:
    """Equality system A x = b with box constraints x in [0, 1]^v."""

    A: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "A", np.asarray(self.A, dtype=float))
        object.__setattr__(self, "b", np.asarray(self.b, dtype=float))
        if self.A.ndim != 2:
            raise ValueError("A must be a matrix")
        if self.b.shape != (self.A.shape[0],):
            raise ValueError(
                f"b has shape {self.b.shape}, expected ({self.A.shape[0]},)"
            )

    @property
    def rows(self) -> int:
        return self.A.shape[0]

    @property
    def vars(self) -> int:
        return self.A.shape[1]


def _kernel_basis(M: np.ndarray, pivot_tol: float = PIVOT_TOL) -> np.ndarray:
    """Kernel basis of M, columns ordered by ascending free column index.

    Columns are processed left to right with row partial pivoting.  The
    basis vector for free column c has a 1 at c and back-substituted
    entries at the pivot columns.
    """
    r, f = M.shape
    R = M.copy()
    piv_rows: list[int] = []
    piv_cols: list[int] = []
    row = 0
    for col in range(f):
        if row < r:
            sub = np.abs(R[row:, col])
            imax = int(np.argmax(sub))
            if sub[imax] > pivot_tol:
                if imax != 0:
                    R[[row, row + imax]] = R[[row + imax, row]]
                R[row] = R[row] / R[row, col]
                others = np.abs(R[:, col]) > 0
                others[row] = False
                if np.any(others):
                    R[others] -= np.outer(R[others, col], R[row])
                piv_rows.append(row)
                piv_cols.append(col)
                row += 1
    piv_set = set(piv_cols)
    free_cols = np.asarray([c for c in range(f) if c not in piv_set], dtype=int)
    K = np.zeros((f, free_cols.size))
    if free_cols.size:
        K[free_cols, np.arange(free_cols.size)] = 1.0
        if piv_cols:
            K[np.asarray(piv_cols)] = -R[np.asarray(piv_rows)][:, free_cols]
    return K


def _tidy_columns(K: np.ndarray) -> np.ndarray:
    """Scale each column to max-abs 1; drop numerically dead columns."""
    if K.shape[1] == 0:
        return K
    mx = np.max(np.abs(K), axis=0)
    keep = mx > PIVOT_TOL
    return K[:, keep] / mx[keep]


def _walk(
    system: LinearSystem,
    x0: np.ndarray,
    rng: np.random.Generator | None,
    on_step: Callable[[np.ndarray], None] | None,
) -> np.ndarray:
    A, b = system.A, system.b
    x = np.asarray(x0, dtype=float).copy()
    if x.shape != (system.vars,):
        raise ValueError(f"x0 has shape {x.shape}, expected ({system.vars},)")
    if np.any(x < -FRAC_TOL) or np.any(x > 1 + FRAC_TOL):
        raise ValueError("x0 must lie in the unit box")
    np.clip(x, 0.0, 1.0, out=x)
    if system.rows:
        residual = float(np.max(np.abs(A @ x - b)))
        if residual > FEAS_TOL:
            raise ValueError(f"x0 is infeasible: ||Ax-b||_inf = {residual:.3e}")

    frac = np.flatnonzero((x > FRAC_TOL) & (x < 1.0 - FRAC_TOL))
    if frac.size == 0:
        return x
    active = frac.tolist()  # global indices of still-walkable coordinates
    M = A[:, frac].copy()  # kept in sync with `active`
    K = _tidy_columns(_kernel_basis(M))

    while K.shape[1] > 0:
        lam = K[:, 0]
        if system.rows:
            drift = float(np.max(np.abs(M @ lam)))
            if drift > _KERNEL_RESID:
                raise NumericalRankError(
                    f"direction leaves the kernel: ||A lambda||_inf = {drift:.3e} "
                    f"(pivot tolerance {PIVOT_TOL:g} too coarse for this system)"
                )
        # columns are scaled to max-abs 1, so the step below is at most 1
        moving = lam != 0.0
        idx = np.asarray(active)
        lam_m = lam[moving]
        x_m = x[idx[moving]]
        # distance to the nearest bound in the +lam and -lam directions
        up = np.where(lam_m > 0, (1.0 - x_m) / lam_m, x_m / -lam_m)
        down = np.where(lam_m > 0, x_m / lam_m, (1.0 - x_m) / -lam_m)
        d_plus = float(up.min())
        d_minus = float(down.min())
        if rng is None:
            step = d_plus
        else:
            p_plus = d_minus / (d_plus + d_minus)
            step = d_plus if rng.random() < p_plus else -d_minus
        x[idx] += step * lam
        hits = np.flatnonzero((x[idx] <= _SNAP) | (x[idx] >= 1.0 - _SNAP))
        if hits.size == 0:
            # the minimizing coordinate lands on its bound; force-retire it
            cand = up if step > 0 else down
            hits = np.asarray([np.flatnonzero(moving)[int(np.argmin(cand))]])
        if on_step is not None:
            on_step(x.copy())
        for local in sorted(hits.tolist(), reverse=True):
            g = active[local]
            x[g] = 0.0 if x[g] < 0.5 else 1.0
            rowvals = K[local, :]
            if rowvals.size and np.max(np.abs(rowvals)) > PIVOT_TOL:
                pivot = int(np.argmax(np.abs(rowvals)))
                others = np.arange(K.shape[1]) != pivot
                factor = rowvals[others] / rowvals[pivot]
                K[:, others] -= np.outer(K[:, pivot], factor)
                K = np.delete(K, pivot, axis=1)
            K = np.delete(K, local, axis=0)
            M = np.delete(M, local, axis=1)
            del active[local]
        K = _tidy_columns(K)

    if system.rows:
        residual = float(np.max(np.abs(A @ x - b)))
        if residual > FEAS_TOL:
            sing = np.linalg.svd(A, compute_uv=False)
            cond = sing[0] / sing[-1] if sing[-1] > 0 else np.inf
            raise NumericalRankError(
                f"walk lost feasibility: ||Ax-b||_inf = {residual:.3e} "
                f"(cond(A) ~ {cond:.3e})"
            )
    return x


def vertex_solution(
    system: LinearSystem,
    x0: np.ndarray,
    on_step: Callable[[np.ndarray], None] | None = None,
) -> np.ndarray:
    """Deterministic walk to a vertex of {x in [0,1]^v : Ax = b}.

    The output is feasible and its fractional coordinates index linearly
    independent columns of A (hence at most rank(A) of them).  A point
    that is already a vertex is returned unchanged.
    """
    return _walk(system, x0, rng=None, on_step=on_step)


def round_in_expectation(
    system: LinearSystem,
    x0: np.ndarray,
    rng: np.random.Generator,
    on_step: Callable[[np.ndarray], None] | None = None,
) -> np.ndarray:
    """Unbiased random rounding: E[X] = x0, AX = b, and at most rank(A)
    fractional coordinates.

    Every step moves to one of the two nearest facets with probabilities
    proportional to the opposite distances, so each step is mean zero and
    the whole walk is a martingale.  Identical rng state yields an
    identical sample.
    """
    return _walk(system, x0, rng=rng, on_step=on_step)
