"""Base-polytope faces, the energy functional and the set-valued hypergraph Laplacian.

For a vertex function ``f`` with potential ``u = f / d`` every hyperedge ``e``
contributes ``w_e * alpha_e * b_e`` where ``alpha_e`` is the spread of ``u``
on ``e`` and ``b_e`` is a unit flow from the top level set of ``u`` on ``e``
to its bottom level set.  The set of all such sums is ``L f``; its element of
least ``D^-1`` norm is computed here with Wolfe's minimum-norm-point method,
whose linear minimisation oracle splits edge by edge.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .exceptions import SolverFailure
from .hypergraph import Hypergraph, potential

TIE_TOL = 1e-9
QP_TOL = 1e-10
MAX_ITER = 1_000_000

__all__ = [
    "FaceSpec",
    "LaplacianSelection",
    "argmax_face",
    "faces",
    "energy",
    "laplacian_l0",
    "laplacian_members",
    "TIE_TOL",
]


@dataclass
class FaceSpec:
    """Argmax face of the base polytope of one hyperedge.

    ``top_weights``/``bottom_weights`` are simplex weights over ``top`` and
    ``bottom``; they encode the point ``sum_p l_p delta_p - sum_q m_q delta_q``.
    """

    edge: int
    gap: float
    top: tuple
    bottom: tuple
    top_weights: np.ndarray = None
    bottom_weights: np.ndarray = None

    def __post_init__(self):
        if self.top_weights is None:
            self.top_weights = np.full(len(self.top), 1.0 / len(self.top))
        if self.bottom_weights is None:
            self.bottom_weights = np.full(len(self.bottom), 1.0 / len(self.bottom))

    @property
    def active(self) -> bool:
        return self.gap > TIE_TOL

    def point(self, n: int) -> np.ndarray:
        b = np.zeros(n)
        if not self.active:
            return b
        np.add.at(b, list(self.top), self.top_weights)
        np.add.at(b, list(self.bottom), -self.bottom_weights)
        return b


@dataclass
class LaplacianSelection:
    value: np.ndarray
    flows: list
    norm: float
    gap: float = 0.0
    iterations: int = 0


def argmax_face(h: Hypergraph, f, e: int, tol: float = TIE_TOL) -> FaceSpec:
    u = potential(h, f)
    verts = np.asarray(h.edges[e])
    vals = u[verts]
    hi, lo = vals.max(), vals.min()
    gap = float(hi - lo)
    if gap <= tol:
        members = tuple(int(v) for v in verts)
        return FaceSpec(e, 0.0, members, members)
    top = tuple(int(v) for v in verts[vals >= hi - tol])
    bottom = tuple(int(v) for v in verts[vals <= lo + tol])
    return FaceSpec(e, gap, top, bottom)


def faces(h: Hypergraph, f, tol: float = TIE_TOL) -> list:
    return [argmax_face(h, f, k, tol) for k in range(h.n_edges)]


def energy(h: Hypergraph, f) -> float:
    """Half the weighted sum of squared spreads of the potential over hyperedges."""
    u = potential(h, f)
    total = 0.0
    for e, w in zip(h.edges, h.weights):
        vals = u[list(e)]
        total += w * (vals.max() - vals.min()) ** 2
    return 0.5 * total


def _affine_minimizer(P):
    """Barycentric coefficients of the least-norm point in the affine hull of the rows of P."""
    m = P.shape[0]
    K = np.empty((m + 1, m + 1))
    K[:m, :m] = P @ P.T
    K[:m, m] = 1.0
    K[m, :m] = 1.0
    K[m, m] = 0.0
    rhs = np.zeros(m + 1)
    rhs[m] = 1.0
    sol = np.linalg.lstsq(K, rhs, rcond=None)[0]
    beta = sol[:m]
    return beta / beta.sum()


def laplacian_l0(h: Hypergraph, f, tol: float = QP_TOL, max_iter: int = MAX_ITER) -> LaplacianSelection:
    """Minimum ``D^-1``-norm element of ``L f``.

    The feasible set is the Minkowski sum over active hyperedges of
    ``w_e alpha_e (simplex(top) - simplex(bottom))``.  Wolfe's algorithm keeps
    a corral of vertices of that sum and returns the exact affine minimiser of
    the final corral; the Frank-Wolfe gap ``<x, x - s>`` certifies optimality.
    """
    n = h.n
    fl = faces(h, f)
    act = [fs for fs in fl if fs.active]
    if not act:
        return LaplacianSelection(np.zeros(n), fl, 0.0)
    sq = np.sqrt(h.deg)
    coef = np.array([h.weights[fs.edge] * fs.gap for fs in act])
    tops = [np.asarray(fs.top) for fs in act]
    bots = [np.asarray(fs.bottom) for fs in act]

    def atom_vec(choice):
        v = np.zeros(n)
        for c, (p, q) in zip(coef, choice):
            v[p] += c
            v[q] -= c
        return v / sq

    def lmo(x):
        # x is in scaled coordinates; <x, s> is minimised edge by edge
        eta = x / sq
        return tuple(
            (int(t[np.argmin(eta[t])]), int(b[np.argmax(eta[b])])) for t, b in zip(tops, bots)
        )

    atoms = [lmo(np.zeros(n))]
    P = atom_vec(atoms[0])[None, :]
    lam = np.array([1.0])
    x = P[0].copy()
    scale = float(np.sum(coef) ** 2 / h.deg.min())
    stop = min(tol, 1e-13 * max(scale, 1.0))
    gap = math.inf
    it = 0
    while it < max_iter:
        it += 1
        s_atom = lmo(x)
        s = atom_vec(s_atom)
        gap = float(x @ x - x @ s)
        if gap <= stop or s_atom in atoms:
            break
        atoms.append(s_atom)
        P = np.vstack([P, s])
        lam = np.append(lam, 0.0)
        while True:
            beta = _affine_minimizer(P)
            if np.all(beta > 1e-14):
                lam = beta
                x = lam @ P
                break
            mask = beta < lam
            theta = np.min(lam[mask] / (lam[mask] - beta[mask]))
            lam = lam + theta * (beta - lam)
            keep = lam > 1e-14
            if keep.all():
                keep[np.argmin(lam)] = False
            atoms = [a for a, k in zip(atoms, keep) if k]
            P = P[keep]
            lam = lam[keep] / lam[keep].sum()
            x = lam @ P
    else:
        if gap > tol:
            raise SolverFailure(f"min-norm solve stopped with gap {gap:.3e} after {it} iterations")
    gap = max(float(x @ x - x @ atom_vec(lmo(x))), 0.0)
    if gap > tol:
        raise SolverFailure(f"min-norm solve ended with gap {gap:.3e} > {tol:.1e}")

    value = x * sq
    for k, fs in enumerate(act):
        tw = np.zeros(len(fs.top))
        bw = np.zeros(len(fs.bottom))
        for a, l in zip(atoms, lam):
            p, q = a[k]
            tw[fs.top.index(p)] += l
            bw[fs.bottom.index(q)] += l
        fs.top_weights, fs.bottom_weights = tw, bw
    return LaplacianSelection(value, fl, float(np.sqrt(x @ x)), gap, it)


def selection_from_flows(h: Hypergraph, flows) -> LaplacianSelection:
    """Assemble ``sum_e w_e alpha_e b_e`` from explicit face points."""
    value = np.zeros(h.n)
    for fs in flows:
        value += h.weights[fs.edge] * fs.gap * fs.point(h.n)
    return LaplacianSelection(value, flows, float(np.sqrt(np.sum(value**2 / h.deg))))


def laplacian_members(h: Hypergraph, f, samples: int = 1, cap: int = 4096, rng=None) -> list:
    """Members of ``L f``: face-vertex choices (up to ``cap``) plus random convex mixtures."""
    if samples < 1:
        raise ValueError("samples must be >= 1")
    rng = np.random.default_rng(rng)
    fl = faces(h, f)
    act = [fs for fs in fl if fs.active]
    out = []
    choices = itertools.product(*[itertools.product(fs.top, fs.bottom) for fs in act])
    for choice in itertools.islice(choices, cap):
        flows = []
        for fs, (p, q) in zip(act, choice):
            tw = np.array([1.0 if v == p else 0.0 for v in fs.top])
            bw = np.array([1.0 if v == q else 0.0 for v in fs.bottom])
            flows.append(FaceSpec(fs.edge, fs.gap, fs.top, fs.bottom, tw, bw))
        out.append(selection_from_flows(h, flows))
    if any(len(fs.top) > 1 or len(fs.bottom) > 1 for fs in act):
        for _ in range(samples):
            flows = [
                FaceSpec(
                    fs.edge,
                    fs.gap,
                    fs.top,
                    fs.bottom,
                    rng.dirichlet(np.ones(len(fs.top))),
                    rng.dirichlet(np.ones(len(fs.bottom))),
                )
                for fs in act
            ]
            out.append(selection_from_flows(h, flows))
    return out
