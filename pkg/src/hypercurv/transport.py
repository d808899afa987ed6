"""Lazy random walks, L1-Wasserstein distance and LLY curvature on graphs.

The transport problem is solved by a small dense two-phase simplex with
Bland's anti-cycling rule, and the Kantorovich-Rubinstein dual (maximise
``sum f (mu - nu)`` over 1-Lipschitz ``f``) by HiGHS.  The two values are
required to agree.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog

from .exceptions import LPFailure, NonStabilized, NotAGraph
from .hypergraph import Hypergraph

PIVOT_TOL = 1e-12
DUALITY_TOL = 1e-8

__all__ = [
    "simplex",
    "random_walk_measure",
    "w1",
    "w1_full",
    "TransportResult",
    "lly_curvature",
    "lly_table",
]


def simplex(c, A_eq, b_eq, max_iter: int = 50_000):
    """Minimise ``c @ x`` subject to ``A_eq x = b_eq, x >= 0``.

    Two-phase tableau simplex with Bland's rule.  Returns ``(x, value)``.
    Redundant equality rows are detected after phase one and dropped.
    """
    c = np.asarray(c, dtype=float)
    A = np.array(A_eq, dtype=float)
    b = np.array(b_eq, dtype=float)
    m, n = A.shape
    neg = b < 0
    A[neg] *= -1
    b[neg] *= -1

    # tableau: m rows of [A | I | b]; artificial columns n..n+m-1
    T = np.zeros((m, n + m + 1))
    T[:, :n] = A
    T[:, n:n + m] = np.eye(m)
    T[:, -1] = b
    basis = list(range(n, n + m))

    def run(cost, allowed):
        it = 0
        while True:
            it += 1
            if it > max_iter:
                raise LPFailure("simplex iteration limit reached")
            cb = cost[basis]
            red = cost[:-1] - cb @ T[:, :-1]
            enter = -1
            for j in allowed:
                if red[j] < -1e-11:
                    enter = j
                    break
            if enter < 0:
                return
            col = T[:, enter]
            rows = np.where(col > PIVOT_TOL)[0]
            if rows.size == 0:
                raise LPFailure("LP is unbounded")
            ratios = T[rows, -1] / col[rows]
            best = ratios.min()
            cand = rows[ratios <= best + 1e-12 * (1 + abs(best))]
            leave = min(cand, key=lambda r: basis[r])
            pivot(leave, enter)

    def pivot(r, j):
        T[r] /= T[r, j]
        for i in range(T.shape[0]):
            if i != r and T[i, j] != 0.0:
                T[i] -= T[i, j] * T[r]
        basis[r] = j

    # phase one
    cost1 = np.zeros(n + m + 1)
    cost1[n:n + m] = 1.0
    run(cost1, range(n + m))
    infeas = sum(T[i, -1] for i in range(len(basis)) if basis[i] >= n)
    if infeas > 1e-9 * (1 + np.abs(b).sum()):
        raise LPFailure("LP is infeasible")
    # drive artificials out of the basis or drop their rows
    keep = []
    for i in range(len(basis)):
        if basis[i] < n:
            keep.append(i)
            continue
        nz = [j for j in range(n) if abs(T[i, j]) > 1e-9]
        if nz:
            pivot(i, nz[0])
            keep.append(i)
    T = T[keep]
    basis = [basis[i] for i in keep]
    T = np.delete(T, np.s_[n:n + m], axis=1)

    cost2 = np.zeros(n + 1)
    cost2[:n] = c
    run(cost2, range(n))
    x = np.zeros(n)
    for i, j in enumerate(basis):
        x[j] = T[i, -1]
    x[x < 0] = 0.0
    return x, float(c @ x)


def _require_graph(g: Hypergraph):
    if not g.is_graph():
        raise NotAGraph("operation needs a graph: every hyperedge must have exactly two vertices")


def random_walk_measure(g: Hypergraph, x: int, lam: float) -> np.ndarray:
    """``m_x^lambda``: mass ``1 - lambda`` at ``x`` and ``lambda w_xy / d_x`` at each neighbour."""
    _require_graph(g)
    if not 0.0 <= lam <= 1.0:
        raise ValueError("lambda must lie in [0, 1]")
    m = np.zeros(g.n)
    m[x] = 1.0 - lam
    for (a, b), w in zip(g.edges, g.weights):
        if a == x:
            m[b] += lam * w / g.deg[x]
        elif b == x:
            m[a] += lam * w / g.deg[x]
    return m


@dataclass
class TransportResult:
    value: float
    dual: float
    coupling: np.ndarray
    potential: np.ndarray


def _check_measure(g, mu):
    mu = np.asarray(mu, dtype=float)
    if mu.shape != (g.n,) or np.any(mu < -1e-15) or abs(mu.sum() - 1.0) > 1e-12:
        raise ValueError("not a probability measure on the vertices")
    return np.clip(mu, 0.0, None)


def _dual_lp(g, mu, nu, extra=None):
    n = g.n
    D = g.dist
    rows, rhs = [], []
    for a in range(n):
        for b in range(n):
            if a != b:
                r = np.zeros(n)
                r[a], r[b] = 1.0, -1.0
                rows.append(r)
                rhs.append(D[a, b])
    A = np.array(rows).reshape(-1, n)
    bvec = np.array(rhs, dtype=float)
    obj = -(mu - nu)
    if extra is not None:
        obj, A2, b2 = extra
        A = np.vstack([A, A2])
        bvec = np.concatenate([bvec, b2])
    bounds = [(0.0, 0.0)] + [(None, None)] * (n - 1)
    res = linprog(obj, A_ub=A, b_ub=bvec, bounds=bounds, method="highs")
    if res.status != 0:
        raise LPFailure(f"dual LP failed: {res.message}")
    return res.x


def w1_full(g: Hypergraph, mu, nu) -> TransportResult:
    mu = _check_measure(g, mu)
    nu = _check_measure(g, nu)
    n = g.n
    src = np.where(mu > 0)[0]
    dst = np.where(nu > 0)[0]
    D = g.dist
    k, l = len(src), len(dst)
    A = np.zeros((k + l, k * l))
    for i in range(k):
        A[i, i * l:(i + 1) * l] = 1.0
    for j in range(l):
        A[k + j, j::l] = 1.0
    cost = D[np.ix_(src, dst)].ravel().astype(float)
    x, val = simplex(cost, A, np.concatenate([mu[src], nu[dst]]))
    coupling = np.zeros((n, n))
    coupling[np.ix_(src, dst)] = x.reshape(k, l)
    f = _dual_lp(g, mu, nu)
    dual = float(f @ (mu - nu))
    if abs(val - dual) > DUALITY_TOL:
        raise LPFailure(f"primal {val!r} and dual {dual!r} transport values disagree")
    return TransportResult(val, dual, coupling, f)


def w1(g: Hypergraph, mu, nu) -> float:
    """L1-Wasserstein distance for the hop metric of ``g``."""
    return w1_full(g, mu, nu).value


def slack_potential(g: Hypergraph, mu, nu, x: int, y: int, value: float | None = None) -> np.ndarray:
    """Optimal dual potential maximising ``f(x) - f(y)`` among all optimal ones."""
    mu = _check_measure(g, mu)
    nu = _check_measure(g, nu)
    if value is None:
        value = w1(g, mu, nu)
    obj = np.zeros(g.n)
    obj[x], obj[y] = -1.0, 1.0
    A2 = -(mu - nu)[None, :]
    b2 = np.array([-(value - 1e-10)])
    return _dual_lp(g, mu, nu, extra=(obj, A2, b2))


def lly_table(g: Hypergraph, x: int, y: int, kmax: int = 30, tol: float = 1e-9):
    """Per-lambda values of ``(1 - W1(m_x, m_y) / d(x, y)) / lambda`` for ``lambda = 2^-k``."""
    _require_graph(g)
    if x == y:
        raise ValueError("x and y must differ")
    d = g.dist[x, y]
    table = []
    for k in range(1, kmax + 1):
        lam = 2.0 ** -k
        W = w1(g, random_walk_measure(g, x, lam), random_walk_measure(g, y, lam))
        table.append((lam, (1.0 - W / d) / lam))
        if len(table) >= 2 and abs(table[-1][1] - table[-2][1]) <= tol:
            return table, True
    return table, False


def lly_curvature(g: Hypergraph, x: int, y: int) -> float:
    """Lin-Lu-Yau curvature, read off once the divided difference is constant in lambda."""
    table, ok = lly_table(g, x, y)
    if not ok:
        raise NonStabilized(f"LLY curvature of ({x}, {y}) did not stabilise by lambda = 2^-30", table)
    return table[-1][1]
