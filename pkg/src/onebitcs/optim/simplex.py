"""Dense two-phase tableau simplex.

Problems are stated as::

    minimize    c^T v
    subject to  G v  = h
                P v >= q
                v_j >= 0   for j in nonneg

and are reduced to standard form ``min c^T x, M x = b, x >= 0``.  When an
LP has far more constraints than variables (the one-bit programs have one
row per measurement), the dual is solved instead and the primal point is
read off the optimal dual basis by one linear solve.

Pricing picks the most negative reduced cost per unit column length
(a steepest-edge variant) and falls back on Bland's rule after a streak of
degenerate pivots.  Phase two runs on slightly lifted basic values to break
ratio-test ties; the true right-hand side is restored at the end and any
basic variable that went negative is repaired by dual simplex pivots.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

__all__ = [
    "LinearProgramStd",
    "SolverReport",
    "solve_lp",
    "dump_lp",
    "OPTIMAL",
    "INFEASIBLE",
    "UNBOUNDED",
    "ITERATION_LIMIT",
]

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"
ITERATION_LIMIT = "iteration_limit"

FEAS_TOL = 1e-8
_PIV_TOL = 1e-10
_OPT_TOL = 1e-10
_DEGENERATE_STREAK = 30
_REFACTOR_EVERY = 100
_PERTURB = 1e-7


@dataclass
class SolverReport:
    status: str
    iterations: int
    objective_value: float = float("nan")
    max_constraint_violation: float = float("nan")
    route: str = ""
    extra: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.status == OPTIMAL


def _as_block(M, ncols, name):
    if M is None:
        return np.zeros((0, ncols))
    M = np.atleast_2d(np.asarray(M, dtype=float))
    if M.shape[1] != ncols:
        raise ValueError(f"{name} has {M.shape[1]} columns, expected {ncols}")
    return M


def _as_rhs(v, nrows, name):
    if v is None:
        v = np.zeros(nrows)
    v = np.asarray(v, dtype=float).reshape(-1)
    if v.shape != (nrows,):
        raise ValueError(f"{name} has length {v.size}, expected {nrows}")
    return v


@dataclass(eq=False)
class LinearProgramStd:
    """``min c^T v`` s.t. ``G v = h``, ``P v >= q``; variables are free unless
    flagged in ``nonneg``."""

    c: np.ndarray
    G: Optional[np.ndarray] = None
    h: Optional[np.ndarray] = None
    P: Optional[np.ndarray] = None
    q: Optional[np.ndarray] = None
    nonneg: Optional[np.ndarray] = None

    def __post_init__(self):
        self.c = np.asarray(self.c, dtype=float).reshape(-1)
        nv = self.c.size
        self.G = _as_block(self.G, nv, "G")
        self.h = _as_rhs(self.h, self.G.shape[0], "h")
        self.P = _as_block(self.P, nv, "P")
        self.q = _as_rhs(self.q, self.P.shape[0], "q")
        if self.nonneg is None:
            self.nonneg = np.zeros(nv, dtype=bool)
        self.nonneg = np.asarray(self.nonneg, dtype=bool).reshape(-1)
        if self.nonneg.shape != (nv,):
            raise ValueError("nonneg mask must have one entry per variable")
        for name in ("c", "G", "h", "P", "q"):
            if not np.all(np.isfinite(getattr(self, name))):
                raise ValueError(f"{name} has non-finite entries")

    @property
    def num_vars(self) -> int:
        return self.c.size

    @property
    def num_constraints(self) -> int:
        return self.G.shape[0] + self.P.shape[0]

    def violation(self, v) -> float:
        parts = [0.0]
        if self.G.shape[0]:
            parts.append(np.max(np.abs(self.G @ v - self.h)))
        if self.P.shape[0]:
            parts.append(np.max(self.q - self.P @ v))
        if self.nonneg.any():
            parts.append(np.max(-v[self.nonneg]))
        return float(max(parts))


class _Result:
    __slots__ = ("status", "basis", "rows", "iterations")

    def __init__(self, status, basis=None, rows=None, iterations=0):
        self.status = status
        self.basis = basis
        self.rows = rows
        self.iterations = iterations


def _standard_simplex(M, b, c, max_iter, phase_one_only=False):
    """Minimise ``c x`` over ``M x = b, x >= 0``.

    Returns the final basis (column indices) and the surviving row indices;
    redundant equality rows found during phase one are dropped.
    """
    M = np.array(M, dtype=float)
    b = np.array(b, dtype=float)
    c = np.array(c, dtype=float)
    nrows, ncols = M.shape

    flip = np.where(b < 0, -1.0, 1.0)
    M *= flip[:, None]
    b *= flip

    # equilibrate rows, then columns, to unit max-magnitude
    rmax = np.abs(M).max(axis=1) if ncols else np.zeros(nrows)
    empty = rmax == 0
    if np.any(empty & (np.abs(b) > 0)):
        return _Result(INFEASIBLE)
    rows = np.flatnonzero(~empty)
    M, b, rmax = M[rows], b[rows], rmax[rows]
    M /= rmax[:, None]
    b /= rmax
    cmax = np.abs(M).max(axis=0) if M.shape[0] else np.zeros(ncols)
    cmax[cmax == 0] = 1.0
    M /= cmax
    c = c / cmax
    cnorm = np.abs(c).max()
    if cnorm > 0:
        c = c / cnorm
    nr = M.shape[0]
    if nr == 0:
        status = UNBOUNDED if (not phase_one_only and np.any(c < 0)) else OPTIMAL
        return _Result(status, np.zeros(0, dtype=int), rows, 0)

    # slack-like unit columns give a free starting basis for their rows
    basis = -np.ones(nr, dtype=int)
    nz = np.count_nonzero(M, axis=0)
    for j in np.flatnonzero(nz == 1):
        i = int(np.flatnonzero(M[:, j])[0])
        if basis[i] < 0 and M[i, j] > 0:
            basis[i] = j
    art_rows = np.flatnonzero(basis < 0)
    nart = art_rows.size

    T = np.zeros((nr + 1, ncols + nart + 1))
    T[:nr, :ncols] = M
    T[:nr, -1] = b
    for k, i in enumerate(art_rows):
        T[i, ncols + k] = 1.0
        basis[i] = ncols + k
    for i in range(nr):
        j = basis[i]
        if j < ncols and T[i, j] != 1.0:
            T[i, :] /= T[i, j]

    iters = 0

    def run(ncols_active, cost):
        nonlocal T, iters
        # cost row: reduced costs of the current basis
        T[-1, :] = 0.0
        T[-1, : cost.size] = cost
        cb = np.zeros(nr)
        for i in range(T.shape[0] - 1):
            j = basis[i]
            cb[i] = cost[j] if j < cost.size else 0.0
        T[-1, :] -= cb @ T[:-1, :]
        streak = 0
        since_refactor = 0
        while True:
            d = T[-1, :ncols_active]
            if streak >= _DEGENERATE_STREAK:
                cand = np.flatnonzero(d < -_OPT_TOL)
                if cand.size == 0:
                    return OPTIMAL
                q = int(cand[0])
            else:
                neg = np.flatnonzero(d < -_OPT_TOL)
                if neg.size == 0:
                    return OPTIMAL
                # steepest-edge style: reduced cost per unit column length
                norms = np.sqrt(1.0 + np.einsum("ij,ij->j", T[:-1, neg], T[:-1, neg]))
                q = int(neg[np.argmin(d[neg] / norms)])
            if iters >= max_iter:
                return ITERATION_LIMIT
            col = T[:-1, q]
            pos = col > _PIV_TOL
            if not np.any(pos):
                return UNBOUNDED
            idx = np.flatnonzero(pos)
            ratios = T[idx, -1] / col[idx]
            best = ratios.min()
            ties = idx[ratios <= best + 1e-12 * max(1.0, abs(best))]
            if streak >= _DEGENERATE_STREAK:
                r = int(ties[np.argmin(basis[ties])])
            else:
                r = int(ties[np.argmax(col[ties])])
            streak = streak + 1 if best <= 1e-12 else 0
            _pivot(T, r, q)
            basis[r] = q
            iters += 1
            since_refactor += 1
            if since_refactor >= _REFACTOR_EVERY:
                since_refactor = 0
                _refactor(T, basis, M, b_run, cost)

    def _refactor(T, basis, M, b, cost, clamp=True):
        # rebuild the body from the original scaled data to stop drift
        nb = T.shape[0] - 1
        full = np.zeros((nb, T.shape[1]))
        full[:, :ncols] = M[live]
        full[:, -1] = b[live]
        for k, i in enumerate(art_rows_live):
            full[i, ncols + k] = 1.0
        B = full[:, basis]
        try:
            body = np.linalg.solve(B, full)
        except np.linalg.LinAlgError:
            return
        if clamp:
            body[:, -1] = np.maximum(body[:, -1], 0.0)
        T[:-1, :] = body
        cb = np.array([cost[j] if j < cost.size else 0.0 for j in basis])
        T[-1, :] = 0.0
        T[-1, : cost.size] = cost
        T[-1, :] -= cb @ T[:-1, :]

    def dual_cleanup(cost):
        # the basis is dual feasible; pivot out basics that went negative
        nonlocal iters
        while True:
            rhs = T[:-1, -1]
            r = int(np.argmin(rhs))
            if rhs[r] >= -_PIV_TOL:
                T[:-1, -1] = np.maximum(rhs, 0.0)
                return OPTIMAL
            if iters >= max_iter:
                return ITERATION_LIMIT
            row = T[r, :ncols]
            cand = np.flatnonzero(row < -_PIV_TOL)
            if cand.size == 0:
                return INFEASIBLE
            ratios = np.maximum(T[-1, cand], 0.0) / -row[cand]
            q = int(cand[np.argmin(ratios)])
            _pivot(T, r, q)
            basis[r] = q
            iters += 1

    live = np.arange(nr)
    art_rows_live = art_rows.copy()
    b_run = b

    if nart:
        cost1 = np.zeros(ncols + nart)
        cost1[ncols:] = 1.0
        status = run(ncols + nart, cost1)
        if status == ITERATION_LIMIT:
            return _Result(ITERATION_LIMIT, iterations=iters)
        if -T[-1, -1] > 1e-9 * max(1.0, np.abs(b).max()):
            return _Result(INFEASIBLE, iterations=iters)
        # drive remaining artificials out of the basis or drop their rows
        keep = np.ones(T.shape[0] - 1, dtype=bool)
        for i in range(T.shape[0] - 1):
            if basis[i] >= ncols:
                row = T[i, :ncols]
                j = int(np.argmax(np.abs(row)))
                if abs(row[j]) > 1e-7:
                    _pivot(T, i, j)
                    basis[i] = j
                else:
                    keep[i] = False
        if not keep.all():
            T = np.vstack([T[:-1][keep], T[-1:]])
            basis = basis[keep]
            live = live[keep]
        T = np.hstack([T[:, :ncols], T[:, -1:]])
        art_rows_live = np.zeros(0, dtype=int)
    if phase_one_only:
        return _Result(OPTIMAL, basis.copy(), rows[live], iters)

    # Lift every basic value by a small distinct amount.  This is the same as
    # solving with b + B delta, which stays consistent and feasible, and it
    # removes the ratio-test ties that make degenerate LPs stall.
    delta = _PERTURB * (1.0 + (np.arange(basis.size) * 0.6180339887498949) % 1.0)
    b_run = b.copy()
    b_run[live] = b[live] + M[np.ix_(live, basis)] @ delta
    T[:-1, -1] += delta
    status = run(ncols, c)
    b_run = b
    for _ in range(3):
        if status != OPTIMAL:
            break
        _refactor(T, basis, M, b, c, clamp=False)
        status = dual_cleanup(c)
        if status != OPTIMAL or not np.any(T[-1, :ncols] < -_OPT_TOL):
            break
        status = run(ncols, c)
    return _Result(status, basis.copy(), rows[live], iters)


def _pivot(T, r, q):
    T[r, :] /= T[r, q]
    col = T[:, q].copy()
    col[r] = 0.0
    T -= np.outer(col, T[r, :])


def _basic_solution(M, b, res):
    x = np.zeros(M.shape[1])
    if res.basis.size:
        B = M[np.ix_(res.rows, res.basis)]
        x[res.basis] = np.linalg.lstsq(B, b[res.rows], rcond=None)[0]
    return x


def _primal_form(lp):
    free = ~lp.nonneg
    Gf, Pf = lp.G[:, free], lp.P[:, free]
    Gn, Pn = lp.G[:, lp.nonneg], lp.P[:, lp.nonneg]
    ne, ni = lp.G.shape[0], lp.P.shape[0]
    M = np.block(
        [
            [Gf, -Gf, Gn, np.zeros((ne, ni))],
            [Pf, -Pf, Pn, -np.eye(ni)],
        ]
    )
    b = np.concatenate([lp.h, lp.q])
    c = np.concatenate([lp.c[free], -lp.c[free], lp.c[lp.nonneg], np.zeros(ni)])

    def recover(x):
        nf = int(free.sum())
        v = np.zeros(lp.num_vars)
        v[free] = x[:nf] - x[nf : 2 * nf]
        v[lp.nonneg] = x[2 * nf : 2 * nf + int(lp.nonneg.sum())]
        return v

    return M, b, c, recover


def _dual_form(lp):
    # one row per primal variable; columns mu+, mu-, lambda, rho (nonneg vars)
    nv = lp.num_vars
    nn = np.flatnonzero(lp.nonneg)
    R = np.zeros((nv, nn.size))
    R[nn, np.arange(nn.size)] = 1.0
    M = np.hstack([lp.G.T, -lp.G.T, lp.P.T, R])
    cost = np.concatenate([-lp.h, lp.h, -lp.q, np.zeros(nn.size)])
    return M, lp.c.copy(), cost


def solve_lp(lp: LinearProgramStd, route: str = "auto", max_iter: Optional[int] = None):
    """Solve ``lp``; returns ``(v, SolverReport)``.

    ``route`` is ``"primal"``, ``"dual"`` or ``"auto"`` (dual when
    constraints outnumber variables).  ``v`` is ``None`` unless the status
    is optimal.
    """
    if max_iter is None:
        max_iter = 50 * (lp.num_vars + lp.num_constraints)
    if route == "auto":
        route = "dual" if lp.num_constraints > lp.num_vars else "primal"
    if route not in ("primal", "dual"):
        raise ValueError(f"unknown route {route!r}")
    v, report = _solve_route(lp, route, max_iter)
    scale = max(1.0, np.abs(lp.h).max(initial=0.0), np.abs(lp.q).max(initial=0.0))
    if report.ok and report.max_constraint_violation > FEAS_TOL * scale:
        # loss of accuracy in one route: try the other before giving up
        other = "dual" if route == "primal" else "primal"
        v2, report2 = _solve_route(lp, other, max_iter)
        report2.iterations += report.iterations
        if report2.ok and report2.max_constraint_violation <= FEAS_TOL * scale:
            return v2, report2
        report.extra["warning"] = "post-solve feasibility check failed on both routes"
        report.status = ITERATION_LIMIT
        return None, report
    return v, report


def _solve_route(lp, route, max_iter):
    if route == "primal":
        M, b, c, recover = _primal_form(lp)
        res = _standard_simplex(M, b, c, max_iter)
        if res.status != OPTIMAL:
            return None, SolverReport(res.status, res.iterations, route=route)
        v = recover(_basic_solution(M, b, res))
        iters = res.iterations
    else:
        Md, bd, cd = _dual_form(lp)
        res = _standard_simplex(Md, bd, cd, max_iter)
        iters = res.iterations
        if res.status == UNBOUNDED:
            return None, SolverReport(INFEASIBLE, iters, route=route)
        if res.status == INFEASIBLE:
            # primal is infeasible or unbounded; a feasibility pass decides
            M, b, c, _ = _primal_form(lp)
            feas = _standard_simplex(M, b, c, max_iter, phase_one_only=True)
            status = UNBOUNDED if feas.status == OPTIMAL else INFEASIBLE
            return None, SolverReport(status, iters + feas.iterations, route=route)
        if res.status != OPTIMAL:
            return None, SolverReport(res.status, iters, route=route)
        pi = np.zeros(lp.num_vars)
        if res.basis.size:
            B = Md[np.ix_(res.rows, res.basis)]
            pi[res.rows] = np.linalg.lstsq(B.T, cd[res.basis], rcond=None)[0]
        v = -pi

    return v, SolverReport(OPTIMAL, iters, float(lp.c @ v), lp.violation(v), route=route)


def dump_lp(lp: LinearProgramStd, path) -> None:
    """Plain-text dump: an ``obj`` line, then one comma-separated line per constraint."""
    fmt = lambda row: ",".join(f"{v:.17g}" for v in row)
    lines = ["obj," + fmt(lp.c)]
    lines.append("nonneg," + ",".join(str(int(v)) for v in lp.nonneg))
    for row, rhs in zip(lp.G, lp.h):
        lines.append("eq," + fmt(row) + f",{rhs:.17g}")
    for row, rhs in zip(lp.P, lp.q):
        lines.append("ge," + fmt(row) + f",{rhs:.17g}")
    Path(path).write_text("\n".join(lines) + "\n")
