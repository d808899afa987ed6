"""Weighted 1-Lipschitz regions in potential coordinates.

A vertex function ``f`` is weighted 1-Lipschitz when its potential
``u = f / d`` satisfies ``u(a) - u(b) <= d(a, b)`` for all vertex pairs.
Every region here is anchored at ``u(y) = 0``, which removes the constant
direction and makes ``max u <= diam`` automatic.
"""

from __future__ import annotations

import numpy as np
from scipy.optimize import linprog

from .exceptions import LPFailure
from .hypergraph import Hypergraph

FLAVORS = ("lip", "tlip", "lip_xy", "tlip_xy", "two_level")


def twin_classes(h: Hypergraph, fixed=()) -> np.ndarray:
    """Label vertices by incidence pattern; ``fixed`` vertices get singleton labels.

    Permuting vertices inside a class is an automorphism of ``h`` fixing
    every vertex in ``fixed``.
    """
    inc = h.incidence
    labels = np.empty(h.n, dtype=int)
    seen = {}
    for v in range(h.n):
        key = ("fixed", v) if v in fixed else inc[:, v].tobytes()
        labels[v] = seen.setdefault(key, len(seen))
    return labels


class LipschitzRegion:
    """Polytope ``{u : A u <= b, u[y] = 0}`` with optional ``u[x] = d(x, y)``.

    Parameters
    ----------
    h : Hypergraph
    x, y : int
        Anchor pair. ``y`` is pinned to level 0.
    flavor : str
        ``"tlip"`` or ``"lip"`` (same set once anchored), ``"tlip_xy"`` /
        ``"lip_xy"`` add ``u[x] - u[y] = d(x, y)``. ``"two_level"`` is the
        finite subset of ``lip_xy`` with every ``u[v]`` in ``{0, d(x, y)}``.
    """

    def __init__(self, h: Hypergraph, x: int, y: int, flavor: str = "tlip"):
        if flavor not in FLAVORS:
            raise ValueError(f"unknown flavor {flavor!r}")
        self.h = h
        self.x, self.y = int(x), int(y)
        self.flavor = flavor
        self.fixed = {self.y: 0.0}
        if flavor in ("lip_xy", "tlip_xy", "two_level"):
            self.fixed[self.x] = float(h.dist[self.x, self.y])
        n = h.n
        rows, rhs = [], []
        D = h.dist
        for a in range(n):
            for b in range(n):
                if a != b:
                    r = np.zeros(n)
                    r[a], r[b] = 1.0, -1.0
                    rows.append(r)
                    rhs.append(D[a, b])
        self.A = np.array(rows).reshape(-1, n)
        self.b = np.array(rhs, dtype=float)

    @property
    def free(self) -> np.ndarray:
        return np.array([v for v in range(self.h.n) if v not in self.fixed], dtype=int)

    def contains(self, u, tol: float = 1e-9) -> bool:
        u = np.asarray(u, dtype=float)
        if any(abs(u[v] - c) > tol for v, c in self.fixed.items()):
            return False
        if self.flavor == "two_level":
            dx = self.fixed[self.x]
            if not np.all((np.abs(u) <= tol) | (np.abs(u - dx) <= tol)):
                return False
        return bool(np.all(u[:, None] - u[None, :] <= self.h.dist + tol))

    def bounds(self):
        return [(c, c) if v in self.fixed else (None, None) for v, c in
                ((v, self.fixed.get(v)) for v in range(self.h.n))]

    def lp_max(self, c) -> np.ndarray:
        """Vertex of the polytope maximising ``c @ u`` (HiGHS dual simplex)."""
        res = linprog(-np.asarray(c, dtype=float), A_ub=self.A, b_ub=self.b,
                      bounds=self.bounds(), method="highs-ds")
        if res.status != 0:
            raise LPFailure(f"Lipschitz LP failed: {res.message}")
        return self._snap(res.x)

    def _snap(self, u):
        # LP vertices are integral here (distances are integers, the constraint
        # matrix is a network matrix); remove solver round-off
        r = np.round(u)
        return r if np.allclose(r, u, atol=1e-7) else u

    def integer_points(self, limit: int = 200_000, symmetric: bool = False) -> np.ndarray:
        """All integer points of the region, by depth-first search over vertices.

        Integer points include every vertex of the polytope.  With
        ``symmetric=True`` only one point per orbit of twin permutations is
        kept (values nondecreasing inside each twin class).  Enumeration
        stops with ``OverflowError`` past ``limit`` points.
        """
        h = self.h
        n = h.n
        D = h.dist
        cls = twin_classes(h, (self.x, self.y)) if symmetric else np.arange(n)
        order = [self.y] + ([self.x] if self.x in self.fixed else [])
        rest = sorted((v for v in range(n) if v not in order), key=lambda v: (D[self.y, v], cls[v], v))
        order += rest
        prev = {}
        last = {}
        for v in rest:
            if cls[v] in last:
                prev[v] = last[cls[v]]
            last[cls[v]] = v
        out = []
        u = np.zeros(n)
        two = self.flavor == "two_level"

        def rec(k):
            if k == n:
                out.append(u.copy())
                if len(out) > limit:
                    raise OverflowError("too many integer points")
                return
            v = order[k]
            if v in self.fixed:
                cands = [self.fixed[v]]
            else:
                placed = order[:k]
                lo = max(u[a] - D[a, v] for a in placed)
                hi = min(u[a] + D[v, a] for a in placed)
                cands = range(int(np.ceil(lo - 1e-9)), int(np.floor(hi + 1e-9)) + 1)
                if two:
                    cands = [c for c in cands if c in (0, self.fixed[self.x])]
                if v in prev:
                    cands = [c for c in cands if c >= u[prev[v]]]
            for c in cands:
                if all(abs(u[a] - c) <= D[a, v] + 1e-9 for a in order[:k]):
                    u[v] = c
                    rec(k + 1)
            u[v] = 0.0

        rec(0)
        return np.array(out)

    def random_vertices(self, count: int, rng=None) -> np.ndarray:
        rng = np.random.default_rng(rng)
        pts = [self.lp_max(rng.standard_normal(self.h.n)) for _ in range(count)]
        return np.unique(np.array(pts).reshape(-1, self.h.n), axis=0)

    def sample(self, count: int, rng=None, perturb: float = 0.5) -> np.ndarray:
        """Random vertices followed by random convex mixtures of them."""
        rng = np.random.default_rng(rng)
        k = max(1, count // 2)
        verts = self.random_vertices(k, rng)
        out = list(verts[:count])
        while len(out) < count:
            i, j = rng.integers(len(verts), size=2)
            t = rng.uniform(0, perturb) if perturb > 0 else 0.0
            out.append((1 - t) * verts[i] + t * verts[j])
        return np.array(out)
