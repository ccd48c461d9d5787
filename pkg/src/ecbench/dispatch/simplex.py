"""Dense two-phase tableau simplex with Bland's anti-cycling rule.

Solves ``min c@x  s.t.  A_ub x <= b_ub,  A_eq x == b_eq,  lb <= x <= ub``
with finite lower bounds (upper bounds may be ``inf``).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

PIVOT_TOL = 1e-9
FEAS_TOL = 1e-7


@dataclass
class LPResult:
    status: str  # "optimal" | "infeasible" | "unbounded"
    x: np.ndarray | None
    fun: float
    n_pivots: int
    infeasible_row: int | None = None  # index into the stacked rows [ub; eq; upper bounds]


class SimplexError(RuntimeError):
    pass


def _pivot(T: np.ndarray, basis: list, r: int, c: int) -> None:
    T[r] /= T[r, c]
    col = T[:, c].copy()
    col[r] = 0.0
    T -= np.outer(col, T[r])
    basis[r] = c


def _run(T: np.ndarray, basis: list, n_cols: int, max_pivots: int) -> tuple[str, int]:
    """Iterate on tableau ``T`` whose last row is the reduced-cost row and last column the rhs.

    Only the first ``n_cols`` columns may enter.
    """
    pivots = 0
    while True:
        cost = T[-1, :n_cols]
        entering = np.flatnonzero(cost < -PIVOT_TOL)
        if entering.size == 0:
            return "optimal", pivots
        c = int(entering[0])  # Bland: smallest index
        col = T[:-1, c]
        rows = np.flatnonzero(col > PIVOT_TOL)
        if rows.size == 0:
            return "unbounded", pivots
        ratios = T[rows, -1] / col[rows]
        best = ratios.min()
        ties = rows[ratios <= best + PIVOT_TOL * max(1.0, abs(best))]
        r = int(min(ties, key=lambda i: basis[i]))  # Bland: smallest basic index leaves
        _pivot(T, basis, r, c)
        pivots += 1
        if pivots > max_pivots:
            raise SimplexError(f"simplex exceeded {max_pivots} pivots")


def linprog(c, A_ub=None, b_ub=None, A_eq=None, b_eq=None, lb=None, ub=None, max_pivots: int = 50_000) -> LPResult:
    c = np.asarray(c, dtype=float)
    n = c.size
    A_ub = np.zeros((0, n)) if A_ub is None else np.asarray(A_ub, dtype=float).reshape(-1, n)
    b_ub = np.zeros(0) if b_ub is None else np.asarray(b_ub, dtype=float)
    A_eq = np.zeros((0, n)) if A_eq is None else np.asarray(A_eq, dtype=float).reshape(-1, n)
    b_eq = np.zeros(0) if b_eq is None else np.asarray(b_eq, dtype=float)
    lb = np.zeros(n) if lb is None else np.asarray(lb, dtype=float)
    ub = np.full(n, np.inf) if ub is None else np.asarray(ub, dtype=float)
    if not np.all(np.isfinite(lb)):
        raise ValueError("lower bounds must be finite")
    if np.any(ub < lb - FEAS_TOL):
        bad = int(np.flatnonzero(ub < lb - FEAS_TOL)[0])
        return LPResult("infeasible", None, np.inf, 0, infeasible_row=A_ub.shape[0] + A_eq.shape[0] + bad)

    # shift to x' = x - lb >= 0; finite upper bounds become rows
    bounded = np.flatnonzero(np.isfinite(ub))
    A_bd = np.zeros((bounded.size, n))
    A_bd[np.arange(bounded.size), bounded] = 1.0
    A_le = np.vstack([A_ub, A_bd])
    b_le = np.concatenate([b_ub - A_ub @ lb, (ub - lb)[bounded]])
    b_e = b_eq - A_eq @ lb
    m_le, m_eq = A_le.shape[0], A_eq.shape[0]
    m = m_le + m_eq
    row_label = np.concatenate([np.arange(A_ub.shape[0]), A_ub.shape[0] + m_eq + np.arange(bounded.size),
                                A_ub.shape[0] + np.arange(m_eq)]).astype(int)  # fmt: skip

    # columns: x' (n) | slacks (m_le) | artificials (m)
    A = np.zeros((m, n + m_le))
    A[:m_le, :n] = A_le
    A[:m_le, n:] = np.eye(m_le)
    A[m_le:, :n] = A_eq
    rhs = np.concatenate([b_le, b_e])
    flip = rhs < 0
    A[flip] *= -1
    rhs[flip] *= -1

    basis = []
    art_rows = []
    for i in range(m):
        if i < m_le and not flip[i]:
            basis.append(n + i)
        else:
            basis.append(-1)
            art_rows.append(i)
    n_art = len(art_rows)
    width = n + m_le + n_art
    T = np.zeros((m + 1, width + 1))
    T[:m, : n + m_le] = A
    T[:m, -1] = rhs
    for j, i in enumerate(art_rows):
        T[i, n + m_le + j] = 1.0
        basis[i] = n + m_le + j
    pivots = 0

    if n_art:
        # phase 1: minimise the sum of artificials
        T[-1, :] = 0.0
        for i in art_rows:
            T[-1, :] -= T[i, :]
        T[-1, n + m_le : width] = 0.0
        _, p = _run(T, basis, width, max_pivots)
        pivots += p
        if -T[-1, -1] > FEAS_TOL * max(1.0, np.abs(rhs).max()):
            arts = [i for i, b in enumerate(basis) if b >= n + m_le and T[i, -1] > FEAS_TOL]
            row = int(row_label[arts[0]]) if arts else None
            return LPResult("infeasible", None, np.inf, pivots, infeasible_row=row)
        # drive remaining (zero-level) artificials out of the basis
        keep = np.ones(m, dtype=bool)
        for i in range(m):
            if basis[i] >= n + m_le:
                cand = np.flatnonzero(np.abs(T[i, : n + m_le]) > PIVOT_TOL)
                if cand.size:
                    _pivot(T, basis, i, int(cand[0]))
                    pivots += 1
                else:
                    keep[i] = False  # redundant row
        T = np.vstack([T[:-1][keep], T[-1:]])
        basis = [b for b, k in zip(basis, keep) if k]
        T = np.delete(T, np.s_[n + m_le : width], axis=1)
        width = n + m_le

    # phase 2
    T[-1, :] = 0.0
    T[-1, :n] = c
    for i, b in enumerate(basis):
        if T[-1, b] != 0.0:
            T[-1, :] -= T[-1, b] * T[i, :]
    status, p = _run(T, basis, width, max_pivots)
    pivots += p
    if status == "unbounded":
        return LPResult("unbounded", None, -np.inf, pivots)
    xs = np.zeros(width)
    for i, b in enumerate(basis):
        xs[b] = T[i, -1]
    x = xs[:n] + lb
    return LPResult("optimal", x, float(c @ x), pivots)
