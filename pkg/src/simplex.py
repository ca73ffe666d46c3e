"""
Simplex module for noma-lab
Two-phase tableau simplex with Bland's least-index rule for small dense LPs
"""
import enum
import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np

from config.settings import settings

logger = logging.getLogger(__name__)


class LpStatus(str, enum.Enum):
    OPTIMAL = 'optimal'
    INFEASIBLE = 'infeasible'
    UNBOUNDED = 'unbounded'


@dataclass(frozen=True, eq=False)
class LpProblem:
    """
    minimize c.x  subject to  A x <= b,  0 <= x <= upper.

    ``upper`` entries may be inf for unbounded variables; None means no upper
    bounds at all.
    """
    c: np.ndarray
    A: np.ndarray
    b: np.ndarray
    upper: Optional[np.ndarray] = None

    def __post_init__(self):
        c = np.asarray(self.c, dtype=float).reshape(-1)
        n_vars = c.size
        A = np.asarray(self.A, dtype=float)
        if A.size == 0:
            A = A.reshape(0, n_vars)
        b = np.asarray(self.b, dtype=float).reshape(-1)
        if A.ndim != 2 or A.shape[1] != n_vars:
            raise ValueError(f"A must have shape (rows, {n_vars}), got {A.shape}")
        if b.size != A.shape[0]:
            raise ValueError(f"b has {b.size} entries for {A.shape[0]} rows")
        if not (np.all(np.isfinite(c)) and np.all(np.isfinite(A)) and np.all(np.isfinite(b))):
            raise ValueError("LP data must be finite")
        upper = self.upper
        if upper is not None:
            upper = np.asarray(upper, dtype=float).reshape(-1)
            if upper.size != n_vars:
                raise ValueError(f"upper has {upper.size} entries for {n_vars} variables")
            if np.any(np.isnan(upper)) or np.any(upper < 0):
                raise ValueError("upper bounds must be nonnegative")
        object.__setattr__(self, 'c', c)
        object.__setattr__(self, 'A', A)
        object.__setattr__(self, 'b', b)
        object.__setattr__(self, 'upper', upper)

    @property
    def n_vars(self) -> int:
        return self.c.size

    @property
    def n_rows(self) -> int:
        return self.A.shape[0]


@dataclass(frozen=True, eq=False)
class LpResult:
    status: LpStatus
    x: Optional[np.ndarray] = None
    objective: Optional[float] = None
    iterations: int = 0

    @property
    def is_optimal(self) -> bool:
        return self.status is LpStatus.OPTIMAL


class _Tableau:
    """Dense tableau B^-1 [A | I | artificials] with basis bookkeeping"""

    def __init__(self, matrix: np.ndarray, rhs: np.ndarray, basis: List[int], tol: float):
        self.T = matrix
        self.rhs = rhs
        self.basis = basis
        self.tol = tol
        self.iterations = 0

    def run(self, cost: np.ndarray, allowed: np.ndarray, limit: int) -> LpStatus:
        while True:
            if self.iterations > limit:
                raise RuntimeError(f"Simplex exceeded {limit} pivots")
            reduced = cost - cost[self.basis] @ self.T
            candidates = np.flatnonzero((reduced < -self.tol) & allowed)
            if candidates.size == 0:
                return LpStatus.OPTIMAL
            col = int(candidates[0])
            column = self.T[:, col]
            rows = np.flatnonzero(column > self.tol)
            if rows.size == 0:
                return LpStatus.UNBOUNDED
            ratios = self.rhs[rows] / column[rows]
            best = ratios.min()
            ties = rows[ratios <= best + self.tol * max(1.0, abs(best))]
            row = int(min(ties, key=lambda i: self.basis[i]))
            self.pivot(row, col)

    def pivot(self, row: int, col: int):
        scale = self.T[row, col]
        self.T[row] = self.T[row] / scale
        self.rhs[row] = self.rhs[row] / scale
        for i in range(self.T.shape[0]):
            if i != row and self.T[i, col] != 0.0:
                factor = self.T[i, col]
                self.T[i] -= factor * self.T[row]
                self.rhs[i] -= factor * self.rhs[row]
        self.basis[row] = col
        self.iterations += 1
        logger.debug(f"Pivot {self.iterations}: column {col} enters at row {row}")

    def drop_row(self, row: int):
        self.T = np.delete(self.T, row, axis=0)
        self.rhs = np.delete(self.rhs, row)
        del self.basis[row]


def _standard_rows(problem: LpProblem, tol: float):
    """Append upper bounds as rows and scale every row to unit max coefficient"""
    A = problem.A
    b = problem.b
    if problem.upper is not None:
        bounded = np.flatnonzero(np.isfinite(problem.upper))
        if bounded.size:
            A = np.vstack([A, np.eye(problem.n_vars)[bounded]])
            b = np.concatenate([b, problem.upper[bounded]])

    rows, rhs = [], []
    for a_row, bound in zip(A, b):
        scale = np.max(np.abs(a_row)) if a_row.size else 0.0
        if scale <= tol:
            if bound < -tol:
                return None, None
            continue
        rows.append(a_row / scale)
        rhs.append(bound / scale)
    if not rows:
        return np.zeros((0, problem.n_vars)), np.zeros(0)
    return np.array(rows), np.array(rhs)


def solve_lp(problem: LpProblem, tol: Optional[float] = None) -> LpResult:
    """
    Solve ``problem`` exactly up to pivot arithmetic.

    Phase I minimizes the artificial variables of rows with a negative bound;
    both phases enter the least-index improving column and break ratio ties
    by least basic index, so the method cannot cycle.
    """
    tol = settings.LP_TOLERANCE if tol is None else tol
    n_vars = problem.n_vars
    A, b = _standard_rows(problem, tol)
    if A is None:
        logger.debug("LP has an all-zero row with a negative bound")
        return LpResult(LpStatus.INFEASIBLE)

    n_rows = A.shape[0]
    negative = np.flatnonzero(b < 0)
    n_art = negative.size
    total = n_vars + n_rows + n_art

    matrix = np.zeros((n_rows, total))
    matrix[:, :n_vars] = A
    matrix[:, n_vars:n_vars + n_rows] = np.eye(n_rows)
    rhs = b.copy()
    basis = list(range(n_vars, n_vars + n_rows))
    for k, i in enumerate(negative):
        matrix[i] = -matrix[i]
        rhs[i] = -rhs[i]
        matrix[i, n_vars + n_rows + k] = 1.0
        basis[i] = n_vars + n_rows + k

    tableau = _Tableau(matrix, rhs, basis, tol)
    limit = 50 * (total + n_rows) + 1000
    is_artificial = np.zeros(total, dtype=bool)
    is_artificial[n_vars + n_rows:] = True

    if n_art:
        phase_one = is_artificial.astype(float)
        tableau.run(phase_one, np.ones(total, dtype=bool), limit)
        infeasibility = float(phase_one[tableau.basis] @ tableau.rhs)
        if infeasibility > tol * (1.0 + float(np.max(np.abs(b), initial=0.0))):
            logger.debug(f"LP infeasible: phase I residual {infeasibility:.3e}")
            return LpResult(LpStatus.INFEASIBLE, iterations=tableau.iterations)

        for row in reversed(range(len(tableau.basis))):
            if not is_artificial[tableau.basis[row]]:
                continue
            entries = np.flatnonzero((np.abs(tableau.T[row]) > tol) & ~is_artificial)
            if entries.size:
                tableau.pivot(row, int(entries[0]))
            else:
                tableau.drop_row(row)

    cost = np.zeros(total)
    cost[:n_vars] = problem.c
    status = tableau.run(cost, ~is_artificial, limit)
    if status is LpStatus.UNBOUNDED:
        logger.debug("LP unbounded")
        return LpResult(status, iterations=tableau.iterations)

    solution = np.zeros(total)
    solution[tableau.basis] = tableau.rhs
    x = np.maximum(solution[:n_vars], 0.0)
    return LpResult(LpStatus.OPTIMAL, x, float(problem.c @ x), tableau.iterations)


def lp_from_rows(c: Sequence[float], rows: Sequence[Sequence[float]], bounds: Sequence[float],
                 upper: Optional[Sequence[float]] = None) -> LpProblem:
    """Convenience constructor from plain row lists"""
    c = np.asarray(c, dtype=float)
    A = np.asarray(rows, dtype=float).reshape(len(rows), c.size)
    return LpProblem(c, A, np.asarray(bounds, dtype=float),
                     None if upper is None else np.asarray(upper, dtype=float))
