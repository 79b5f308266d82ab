"""Independent reference implementations used only by the tests.

Nothing here imports the solver internals: each oracle is a brute-force or
closed-form route to the same answer.
"""
import itertools

import numpy as np


def best_t_term(x, t):
    """Best t-term approximation by exhaustive search over supports.

    Among supports with maximal retained energy the lexicographically first
    (in ``itertools.combinations`` order) wins, which is the lower-index tie
    rule.
    """
    x = np.asarray(x, dtype=float)
    best, best_e = None, -1.0
    for S in itertools.combinations(range(x.size), t):
        e = float(np.sum(x[list(S)] ** 2))
        if e > best_e:
            best, best_e = S, e
    out = np.zeros_like(x)
    out[list(best)] = x[list(best)]
    return out


def lp_by_vertices(c, G=None, h=None, P=None, q=None, nonneg=None):
    """Minimum of ``c^T v`` over ``Gv = h, Pv >= q, v[nonneg] >= 0`` by vertex enumeration.

    Assumes the feasible set is a polytope (bounded), so an optimum sits at a
    vertex.  Returns ``None`` when no vertex is feasible.
    """
    c = np.asarray(c, dtype=float)
    n = c.size
    G = np.zeros((0, n)) if G is None else np.atleast_2d(np.asarray(G, dtype=float))
    h = np.zeros(0) if h is None else np.asarray(h, dtype=float)
    rows = [] if P is None else list(np.atleast_2d(np.asarray(P, dtype=float)))
    rhs = [] if q is None else list(np.asarray(q, dtype=float))
    if nonneg is not None:
        for j in np.flatnonzero(nonneg):
            e = np.zeros(n)
            e[j] = 1.0
            rows.append(e)
            rhs.append(0.0)
    rows = np.array(rows).reshape(-1, n)
    rhs = np.array(rhs)
    k = n - G.shape[0]
    if k < 0:
        return None
    subsets = np.array(list(itertools.combinations(range(rows.shape[0]), k)), dtype=int).reshape(-1, k)
    if subsets.shape[0] == 0:
        return None
    M = np.concatenate([np.broadcast_to(G, (subsets.shape[0],) + G.shape), rows[subsets]], axis=1)
    b = np.concatenate([np.broadcast_to(h, (subsets.shape[0], h.size)), rhs[subsets]], axis=1)
    ok = np.abs(np.linalg.det(M)) > 1e-10
    if not ok.any():
        return None
    V = np.linalg.solve(M[ok], b[ok][..., None])[..., 0]
    feas = np.all(V @ rows.T >= rhs - 1e-9, axis=1)
    if G.shape[0]:
        feas &= np.all(np.abs(V @ G.T - h) <= 1e-9, axis=1)
    if not feas.any():
        return None
    return float(np.min(V[feas] @ c))


def l1_on_sign_line_2d(A, y):
    """``min ||h||_1`` over ``y_i <a_i, h> >= 0``, ``sum_i y_i <a_i, h> = 1`` in two dimensions.

    The feasible set is a segment or ray of the line ``w^T h = 1`` with
    ``w = A^T y``; the piecewise-linear objective is minimised at one of the
    points where the line meets a constraint boundary or a coordinate axis.
    """
    A = np.asarray(A, dtype=float)
    w = A.T @ y
    cands = []
    for normal in list(y[:, None] * A) + [np.array([1.0, 0.0]), np.array([0.0, 1.0])]:
        M = np.array([w, normal])
        if abs(np.linalg.det(M)) > 1e-12:
            cands.append(np.linalg.solve(M, [1.0, 0.0]))
    best = None
    for h in cands:
        if np.all(y * (A @ h) >= -1e-12):
            val = np.abs(h).sum()
            if best is None or val < best[0]:
                best = (val, h)
    return best
