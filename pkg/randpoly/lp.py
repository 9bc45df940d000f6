"""
Dense two-phase simplex solver

The geometric oracle behind gauge, radial and membership queries on vertex
polytopes. Problems come in standard form

    maximize c.x  subject to  A x = b,  x >= 0

and are solved on a dense tableau. Entering columns follow Dantzig's rule
(most negative reduced cost, lowest index on ties) until `bland_after`
pivots have been made, after which Bland's rule takes over so degenerate
instances terminate.

Functions:
    StandardFormLP(A, b, c):   Problem data (validated, immutable)
    SimplexSolver(...):        Configured solver; .solve(lp)
    solve(lp, tol):            Solve with a default-configured solver

Results:

| Type       | Fields                                  |
|------------|-----------------------------------------|
| Optimal    | value, solution, pivots                 |
| Infeasible | artificial_objective, pivots            |
| Unbounded  | column, pivots                          |
"""
import logging
from dataclasses import dataclass, field
from typing import List, Union

import numpy as np

from randpoly.errors import CycleLimitExceeded, NumericalBreakdown

log = logging.getLogger(__name__)

DEFAULT_TOL = 1e-9


@dataclass(frozen=True)
class StandardFormLP:
    """maximize c.x s.t. A x = b, x >= 0."""
    A: np.ndarray
    b: np.ndarray
    c: np.ndarray

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        b = np.asarray(self.b, dtype=float).reshape(-1)
        c = np.asarray(self.c, dtype=float).reshape(-1)
        if A.shape != (b.size, c.size):
            raise ValueError(f"shape mismatch: A {A.shape}, b {b.size}, c {c.size}")
        if A.shape[0] > A.shape[1]:
            raise ValueError("more constraints than variables")
        if not (np.all(np.isfinite(A)) and np.all(np.isfinite(b))
                and np.all(np.isfinite(c))):
            raise ValueError("non-finite LP data")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "c", c)

    @property
    def shape(self):
        return self.A.shape


@dataclass(frozen=True)
class Optimal:
    value: float
    solution: np.ndarray
    pivots: int = 0


@dataclass(frozen=True)
class Infeasible:
    artificial_objective: float
    pivots: int = 0


@dataclass(frozen=True)
class Unbounded:
    column: int
    pivots: int = 0


LPResult = Union[Optimal, Infeasible, Unbounded]


@dataclass
class SimplexSolver:
    """
    Dense tableau simplex.

    The tableau is local to each call, but the pivot counter is instance
    state: one instance must not be shared between concurrent solves.
    """
    tol: float = DEFAULT_TOL
    pivot_floor: float = 1e-11
    bland_after: int = 50
    max_pivots: int = 20000
    pivots: int = field(default=0, init=False)

    def solve(self, lp: StandardFormLP) -> LPResult:
        if self.tol <= 0:
            raise ValueError("tol must be positive")
        self.pivots = 0
        A, b, c = lp.A.copy(), lp.b.copy(), lp.c
        m, d = A.shape
        scale_b = 1.0 + (np.max(np.abs(b)) if b.size else 0.0)

        # Phase one: artificials on every row, rhs made nonnegative.
        neg = b < 0
        A[neg] *= -1.0
        b[neg] *= -1.0
        T = np.zeros((m + 1, d + m + 1))
        T[:m, :d] = A
        T[:m, d:d + m] = np.eye(m)
        T[:m, -1] = b
        T[m, :d] = -A.sum(axis=0)
        T[m, -1] = -b.sum()
        basis = list(range(d, d + m))

        status = self._iterate(T, basis, ncols=d + m)
        if isinstance(status, Unbounded):
            # Phase one is bounded above by zero; this is numerical trouble.
            raise NumericalBreakdown("phase one reported unbounded")
        artificial = -T[m, -1]
        if artificial > self.tol * scale_b:
            log.debug("lp infeasible: artificial objective %.3e after %d pivots",
                      artificial, self.pivots)
            return Infeasible(float(artificial), self.pivots)

        T, basis = self._drop_artificials(T, basis, d)

        # Phase two: reduced costs of the real objective.
        rows = T.shape[0] - 1
        T[rows, :] = 0.0
        T[rows, :d] = -c
        for i, j in enumerate(basis):
            if c[j] != 0.0:
                T[rows, :] += c[j] * T[i, :]

        status = self._iterate(T, basis, ncols=d)
        if isinstance(status, Unbounded):
            return status

        x = np.zeros(d)
        for i, j in enumerate(basis):
            x[j] = T[i, -1]
        x[x < 0] = 0.0
        residual = np.max(np.abs(lp.A @ x - lp.b)) if m else 0.0
        if residual > self.tol * scale_b:
            raise NumericalBreakdown(f"primal residual {residual:.3e}")
        log.debug("lp optimal %.12g after %d pivots", T[rows, -1], self.pivots)
        return Optimal(float(c @ x), x, self.pivots)

    def _iterate(self, T: np.ndarray, basis: List[int], ncols: int):
        last = T.shape[0] - 1
        while True:
            costs = T[last, :ncols]
            if self.pivots < self.bland_after:
                j = int(np.argmin(costs))
                if costs[j] >= -self.tol:
                    return None
            else:
                improving = np.flatnonzero(costs < -self.tol)
                if improving.size == 0:
                    return None
                j = int(improving[0])

            column = T[:last, j]
            candidates = np.flatnonzero(column > self.tol)
            if candidates.size == 0:
                return Unbounded(j, self.pivots)
            ratios = T[candidates, -1] / column[candidates]
            best = ratios.min()
            ties = candidates[ratios <= best + self.tol * (1.0 + abs(best))]
            # Bland tie-break on the leaving variable's index.
            r = int(min(ties, key=lambda i: basis[i]))

            pivot = T[r, j]
            if abs(pivot) < self.pivot_floor * max(1.0, np.max(np.abs(column))):
                raise NumericalBreakdown(f"pivot {pivot:.3e} below floor")
            self._pivot(T, r, j)
            basis[r] = j
            self.pivots += 1
            if self.pivots > self.max_pivots:
                raise CycleLimitExceeded(
                    f"{self.pivots} pivots; perturb the input")

    @staticmethod
    def _pivot(T: np.ndarray, r: int, j: int):
        T[r, :] /= T[r, j]
        col = T[:, j].copy()
        col[r] = 0.0
        T -= np.outer(col, T[r, :])

    def _drop_artificials(self, T: np.ndarray, basis: List[int], d: int):
        m = T.shape[0] - 1
        keep = []
        for r in range(m):
            if basis[r] < d:
                keep.append(r)
                continue
            row = T[r, :d]
            nonzero = np.flatnonzero(np.abs(row) > self.pivot_floor * 1e3)
            if nonzero.size:
                j = int(nonzero[0])
                self._pivot(T, r, j)
                basis[r] = j
                self.pivots += 1
                keep.append(r)
            # else: redundant row, dropped
        T2 = np.vstack([T[keep][:, list(range(d)) + [T.shape[1] - 1]],
                        np.zeros((1, d + 1))])
        return T2, [basis[r] for r in keep]


def solve(lp: StandardFormLP, tol: float = DEFAULT_TOL) -> LPResult:
    """Solve with a fresh default-configured solver."""
    return SimplexSolver(tol=tol).solve(lp)
