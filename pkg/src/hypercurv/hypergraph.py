"""Weighted hypergraphs: data model, metric caches, family generators and file format.

Vertices are the dense indices ``0..n-1``.  Optional human-readable names are
carried along only so that generated files can be followed by hand; no
computation depends on them.
"""

from __future__ import annotations

import itertools
import math
from collections import deque
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .exceptions import Disconnected, InvalidSpec, ParseError, ValidationError

__all__ = [
    "Hypergraph",
    "MetricCache",
    "FamilySpec",
    "FAMILIES",
    "distance_matrix",
    "clique_expansion",
    "generate",
    "parse",
    "serialize",
]


@dataclass(frozen=True)
class MetricCache:
    """Weighted degrees and hop distances of a connected hypergraph."""

    deg: np.ndarray
    dist: np.ndarray
    diam: int
    vol: float


class Hypergraph:
    """A finite connected weighted hypergraph.

    Parameters
    ----------
    n : int
        Number of vertices.
    edges : iterable of vertex collections
        Each hyperedge is a nonempty set of vertex indices.
    weights : sequence of float, optional
        Positive hyperedge weights, default all ones.
    allow_multi : bool
        Permit two hyperedges with the same vertex set.
    names : sequence of str, optional
        Display names for the vertices.
    """

    def __init__(self, n, edges, weights=None, allow_multi=False, names=None):
        n = int(n)
        if n < 1:
            raise ValidationError("a hypergraph needs at least one vertex")
        edge_list = []
        for k, e in enumerate(edges):
            verts = tuple(sorted({int(v) for v in e}))
            if not verts:
                raise ValidationError(f"hyperedge {k} is empty")
            if verts[0] < 0 or verts[-1] >= n:
                raise ValidationError(f"hyperedge {k} has a vertex outside 0..{n - 1}")
            edge_list.append(verts)
        if not edge_list:
            raise ValidationError("a hypergraph needs at least one hyperedge")
        if weights is None:
            w = np.ones(len(edge_list))
        else:
            w = np.asarray(weights, dtype=float).copy()
            if w.shape != (len(edge_list),):
                raise ValidationError("one weight per hyperedge is required")
        if not np.all(np.isfinite(w)) or np.any(w <= 0):
            raise ValidationError("hyperedge weights must be finite and strictly positive")
        if not allow_multi and len(set(edge_list)) != len(edge_list):
            raise ValidationError("duplicate hyperedge (pass allow_multi=True to permit)")
        if names is not None:
            names = tuple(str(s) for s in names)
            if len(names) != n or len(set(names)) != n:
                raise ValidationError("names must be unique and one per vertex")
        w.setflags(write=False)
        self._n = n
        self._edges = tuple(edge_list)
        self._weights = w
        self._allow_multi = bool(allow_multi)
        self._names = names
        # fail fast on disconnected input
        self.metrics  # noqa: B018

    @property
    def n(self) -> int:
        return self._n

    @property
    def edges(self) -> tuple:
        return self._edges

    @property
    def weights(self) -> np.ndarray:
        return self._weights

    @property
    def allow_multi(self) -> bool:
        return self._allow_multi

    @property
    def names(self):
        return self._names

    @property
    def n_edges(self) -> int:
        return len(self._edges)

    def name(self, v: int) -> str:
        return self._names[v] if self._names else str(v)

    def index(self, label) -> int:
        """Resolve a vertex given as an index or a display name."""
        if isinstance(label, (int, np.integer)):
            v = int(label)
        elif self._names and label in self._names:
            return self._names.index(label)
        else:
            try:
                v = int(label)
            except (TypeError, ValueError):
                raise KeyError(f"unknown vertex {label!r}") from None
        if not 0 <= v < self._n:
            raise KeyError(f"vertex {label!r} out of range")
        return v

    @cached_property
    def metrics(self) -> MetricCache:
        return distance_matrix(self)

    @property
    def deg(self) -> np.ndarray:
        return self.metrics.deg

    @property
    def dist(self) -> np.ndarray:
        return self.metrics.dist

    @property
    def diam(self) -> int:
        return self.metrics.diam

    @property
    def vol(self) -> float:
        return self.metrics.vol

    @cached_property
    def incidence(self) -> np.ndarray:
        """Boolean matrix of shape (n_edges, n)."""
        m = np.zeros((self.n_edges, self._n), dtype=bool)
        for k, e in enumerate(self._edges):
            m[k, list(e)] = True
        m.setflags(write=False)
        return m

    def is_graph(self) -> bool:
        return all(len(e) == 2 for e in self._edges)

    def covering_edges(self) -> list:
        """Indices of the hyperedges containing every vertex."""
        return [k for k, e in enumerate(self._edges) if len(e) == self._n]

    def edge_weight(self, a: int, b: int) -> float:
        """Total weight of the hyperedges containing both ``a`` and ``b``."""
        return float(sum(w for e, w in zip(self._edges, self._weights) if a in e and b in e))

    def __eq__(self, other):
        if not isinstance(other, Hypergraph):
            return NotImplemented
        return (
            self._n == other._n
            and self._edges == other._edges
            and np.array_equal(self._weights, other._weights)
        )

    def __hash__(self):
        return hash((self._n, self._edges, self._weights.tobytes()))

    def __repr__(self):
        return f"Hypergraph(n={self._n}, edges={list(self._edges)}, weights={self._weights.tolist()})"


def distance_matrix(h: Hypergraph) -> MetricCache:
    """Hop distances, weighted degrees, diameter and volume of ``h``.

    Raises
    ------
    Disconnected
        If some pair of vertices is not joined by a chain of hyperedges.
    """
    n = h.n
    deg = np.zeros(n)
    nbrs = [set() for _ in range(n)]
    for e, w in zip(h.edges, h.weights):
        for v in e:
            deg[v] += w
            nbrs[v].update(e)
    dist = np.full((n, n), -1, dtype=int)
    for s in range(n):
        dist[s, s] = 0
        queue = deque([s])
        while queue:
            a = queue.popleft()
            for b in nbrs[a]:
                if dist[s, b] < 0:
                    dist[s, b] = dist[s, a] + 1
                    queue.append(b)
        missing = np.flatnonzero(dist[s] < 0)
        if missing.size:
            raise Disconnected(s, int(missing[0]))
    deg.setflags(write=False)
    dist.setflags(write=False)
    return MetricCache(deg=deg, dist=dist, diam=int(dist.max()), vol=float(deg.sum()))


def clique_expansion(h: Hypergraph) -> Hypergraph:
    """Unweighted graph joining every pair of distinct co-member vertices."""
    pairs = sorted({p for e in h.edges for p in itertools.combinations(e, 2)})
    if not pairs:
        raise ValidationError("clique expansion of a single vertex has no edges")
    return Hypergraph(h.n, pairs, names=h.names)


# -- families ---------------------------------------------------------------

FAMILIES = ("kn", "cn", "kh", "r1", "fig1", "fig2", "fig3")


@dataclass(frozen=True)
class FamilySpec:
    """Parameters of a generated hypergraph family.

    ``kn``/``cn``/``kh``/``r1`` take ``n``; ``r1`` also takes the single weight
    ``w``.  The ``fig*`` families take ``A``, ``B`` and the weights ``w_ev`` of
    the covering hyperedge and ``w_e`` of the second one.
    """

    family: str
    n: int | None = None
    A: int | None = None
    B: int | None = None
    w: float = 1.0
    w_ev: float = 1.0
    w_e: float = 1.0
    allow_multi: bool = False

    def validate(self):
        if self.family not in FAMILIES:
            raise InvalidSpec(f"unknown family {self.family!r}; expected one of {FAMILIES}")
        if self.family.startswith("fig"):
            if self.A is None or self.B is None:
                raise InvalidSpec("fig families need A and B")
            if self.A < 0 or self.B < 0 or self.A + self.B < 1:
                raise InvalidSpec("fig families need A, B >= 0 and A + B >= 1")
            if self.family == "fig3" and self.A < 1:
                raise InvalidSpec("fig3 needs A >= 1")
            if self.w_ev <= 0 or self.w_e <= 0:
                raise InvalidSpec("weights must be positive")
            if self.family == "fig1" and self.B == 0 and not self.allow_multi:
                raise InvalidSpec("fig1 with B = 0 duplicates the covering hyperedge; set allow_multi")
        else:
            if self.n is None:
                raise InvalidSpec(f"{self.family} needs n")
            lo = {"kn": 2, "cn": 3, "kh": 2, "r1": 2}[self.family]
            if self.n < lo:
                raise InvalidSpec(f"{self.family} needs n >= {lo}")
            if self.w <= 0:
                raise InvalidSpec("weights must be positive")
        return self


def fig_names(A: int, B: int) -> list:
    return ["x", "y"] + [f"p{i}" for i in range(1, A + 1)] + [f"q{j}" for j in range(1, B + 1)]


def generate(spec: FamilySpec) -> Hypergraph:
    """Build the hypergraph described by ``spec``.

    The fig families use the vertex order ``x, y, p_1..p_A, q_1..q_B`` and put
    the covering hyperedge first.
    """
    spec.validate()
    fam = spec.family
    if fam == "kn":
        return Hypergraph(spec.n, itertools.combinations(range(spec.n), 2), [spec.w] * math.comb(spec.n, 2))
    if fam == "cn":
        n = spec.n
        return Hypergraph(n, [(i, (i + 1) % n) for i in range(n)], [spec.w] * n)
    if fam == "kh":
        # all subsets of size >= 2, unit weights (see README on this convention)
        subsets = [c for r in range(2, spec.n + 1) for c in itertools.combinations(range(spec.n), r)]
        return Hypergraph(spec.n, subsets)
    if fam == "r1":
        return Hypergraph(spec.n, [range(spec.n)], [spec.w])
    A, B = spec.A, spec.B
    n = A + B + 2
    ps = list(range(2, 2 + A))
    second = {"fig1": [0, 1] + ps, "fig2": [0] + ps, "fig3": ps}[fam]
    return Hypergraph(
        n,
        [range(n), second],
        [spec.w_ev, spec.w_e],
        allow_multi=spec.allow_multi,
        names=fig_names(A, B),
    )


# -- file format ------------------------------------------------------------


def parse(text: str, allow_multi: bool = False) -> Hypergraph:
    """Read the line-oriented text format.

    ``# vertex <i> <name>`` comments, when present, name the vertices; every
    other comment is ignored.
    """
    n = None
    edges, weights = [], []
    names = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            tok = line[1:].split()
            if len(tok) == 3 and tok[0] == "vertex":
                try:
                    names[int(tok[1])] = tok[2]
                except ValueError:
                    pass
            continue
        tok = line.split()
        if n is None:
            if tok[0] != "vertices" or len(tok) != 2:
                raise ParseError("expected 'vertices <n>'", lineno)
            try:
                n = int(tok[1])
            except ValueError:
                raise ParseError(f"bad vertex count {tok[1]!r}", lineno) from None
            continue
        if tok[0] != "edge" or len(tok) < 3:
            raise ParseError("expected 'edge <w> <v1> ... <vk>'", lineno)
        try:
            w = float(tok[1])
        except ValueError:
            raise ParseError(f"bad weight {tok[1]!r}", lineno) from None
        try:
            verts = [int(t) for t in tok[2:]]
        except ValueError:
            raise ParseError("vertex indices must be integers", lineno) from None
        if not math.isfinite(w) or w <= 0:
            raise ValidationError(f"line {lineno}: weight must be positive, got {tok[1]}")
        edges.append(verts)
        weights.append(w)
    if n is None:
        raise ParseError("missing 'vertices <n>' line")
    name_list = None
    if names and set(names) == set(range(n)):
        name_list = [names[i] for i in range(n)]
    return Hypergraph(n, edges, weights, allow_multi=allow_multi, names=name_list)


def serialize(h: Hypergraph) -> str:
    lines = []
    if h.names:
        lines += [f"# vertex {i} {s}" for i, s in enumerate(h.names)]
    lines.append(f"vertices {h.n}")
    for e, w in zip(h.edges, h.weights):
        lines.append("edge " + format(float(w), ".17g") + " " + " ".join(map(str, e)))
    return "\n".join(lines) + "\n"


def potential(h: Hypergraph, f) -> np.ndarray:
    """The rescaled function u(v) = f(v) / d_v."""
    return np.asarray(f, dtype=float) / h.deg


def inner(h: Hypergraph, f, g) -> float:
    """Weighted inner product sum_v f(v) g(v) / d_v."""
    return float(np.dot(np.asarray(f, dtype=float) / h.deg, g))


def norm(h: Hypergraph, f) -> float:
    return math.sqrt(max(inner(h, f, f), 0.0))
