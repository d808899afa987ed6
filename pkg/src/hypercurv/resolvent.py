"""Resolvent ``J_lambda = (I + lambda L)^-1`` as the proximal map of the energy.

The prox problem

    min_g  ||f - g||^2_{D^-1} / (2 lambda) + E(g)

is a convex QP in the variables ``(u, alpha)`` with ``g = D u`` and one
epigraph variable per hyperedge::

    min  sum_v d_v u_v^2 / (2 lambda) - f.u / lambda + sum_e w_e alpha_e^2 / 2
    s.t. alpha_e >= u_a - u_b   for a != b in e.

It is solved exactly by the Goldfarb-Idnani active-set method and then
polished by re-solving the linear system of the detected level-set
structure.  The KKT multipliers give a dual point, hence a duality gap.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import quadprog

from .exceptions import SolverFailure
from .hypergraph import Hypergraph, inner, norm, potential
from .laplacian import laplacian_l0

PROX_TOL = 1e-12

__all__ = ["ProxProblem", "ProxResult", "PsiDiagnostic", "resolve", "resolve_full", "psi", "probe_liminf"]


@dataclass(frozen=True)
class ProxProblem:
    h: Hypergraph
    f: np.ndarray
    lam: float
    eps: float = PROX_TOL

    def __post_init__(self):
        f = np.asarray(self.f, dtype=float)
        if f.shape != (self.h.n,):
            raise ValueError(f"f must have shape ({self.h.n},), got {f.shape}")
        if not np.all(np.isfinite(f)):
            raise ValueError("f must be finite")
        if not self.lam > 0:
            raise ValueError("lambda must be positive")
        if not self.eps > 0:
            raise ValueError("eps must be positive")
        object.__setattr__(self, "f", f)


@dataclass
class ProxResult:
    g: np.ndarray
    gap: float
    groups: np.ndarray  # level-group label of each vertex, or None if unpolished
    active: list  # (top group, bottom group, weight) per active hyperedge
    M: np.ndarray  # group system matrix, or None

    def potential(self, h):
        return self.g / h.deg

    def pairing_gradient(self, h, x, y, lam):
        """Gradient in ``u`` of ``<J f, delta_x - delta_y>`` on the current smooth piece."""
        if self.M is None:
            return None
        k = self.M.shape[0]
        rhs = np.zeros(k)
        rhs[self.groups[x]] += 1.0
        rhs[self.groups[y]] -= 1.0
        r = np.linalg.solve(self.M, rhs)
        return h.deg * r[self.groups] / lam


def _qp_data(h: Hypergraph):
    """Constraint matrix for the epigraph QP, cached per hypergraph."""
    cache = h.__dict__.setdefault("_prox_cache", {})
    if "C" in cache:
        return cache["C"], cache["big"]
    n = h.n
    big = [k for k, e in enumerate(h.edges) if len(e) >= 2]
    cols = []
    for j, k in enumerate(big):
        e = h.edges[k]
        for a in e:
            for b in e:
                if a != b:
                    c = np.zeros(n + len(big))
                    c[n + j] = 1.0
                    c[a] -= 1.0
                    c[b] += 1.0
                    cols.append((c, j, a, b))
    cache["C"], cache["big"] = cols, big
    cache["Cm"] = np.array([c for c, *_ in cols]).T
    return cols, big


def _primal(h, f, lam, g):
    r = f - g
    return float(np.sum(r * r / h.deg) / (2 * lam) + _energy_u(h, g / h.deg))


def _energy_u(h, u):
    tot = 0.0
    for e, w in zip(h.edges, h.weights):
        vals = u[list(e)]
        tot += w * (vals.max() - vals.min()) ** 2
    return 0.5 * tot


def _dual(h, f, lam, s, b):
    """Dual value at ``z = sum_e s_e b_e`` (``b`` rows are unit flows)."""
    z = (s[:, None] * b).sum(axis=0) if len(s) else np.zeros(h.n)
    w = np.array([h.weights[k] for k in _qp_data(h)[1]])
    return float(inner(h, f, z) - 0.5 * lam * inner(h, z, z) - np.sum(s * s / (2 * w)))


def _group_solve(h, f, lam, u, tol):
    """Re-solve on the level-set structure of ``u``; returns (g, groups, active, M)."""
    n = h.n
    parent = list(range(n))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    def union(a, b):
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)

    scale = tol * (1.0 + np.max(np.abs(u)))
    for e in h.edges:
        if len(e) < 2:
            continue
        vals = u[list(e)]
        hi, lo = vals.max(), vals.min()
        if hi - lo <= scale:
            for v in e[1:]:
                union(e[0], v)
            continue
        top = [v for v in e if u[v] >= hi - scale]
        bot = [v for v in e if u[v] <= lo + scale]
        for v in top[1:]:
            union(top[0], v)
        for v in bot[1:]:
            union(bot[0], v)
    roots = sorted({find(v) for v in range(n)})
    label = {r: i for i, r in enumerate(roots)}
    groups = np.array([label[find(v)] for v in range(n)])
    k = len(roots)
    M = np.zeros((k, k))
    rhs = np.zeros(k)
    np.add.at(M, (groups, groups), h.deg / lam)
    np.add.at(rhs, groups, f / lam)
    active = []
    for e, w in zip(h.edges, h.weights):
        if len(e) < 2:
            continue
        vals = u[list(e)]
        hi, lo = vals.max(), vals.min()
        if hi - lo <= scale:
            continue
        t = groups[e[int(np.argmax(vals))]]
        b = groups[e[int(np.argmin(vals))]]
        M[t, t] += w
        M[b, b] += w
        M[t, b] -= w
        M[b, t] -= w
        active.append((t, b, w))
    c = np.linalg.solve(M, rhs)
    return h.deg * c[groups], groups, active, M


def resolve_full(p: ProxProblem) -> ProxResult:
    h, f, lam = p.h, p.f, p.lam
    n = h.n
    C, big = _qp_data(h)
    m = len(big)
    if m == 0:
        return ProxResult(f.copy(), 0.0, np.arange(n), [], np.diag(h.deg / lam))
    w = np.array([h.weights[k] for k in big])
    G = np.diag(np.concatenate([h.deg / lam, w]))
    a = np.concatenate([f / lam, np.zeros(m)])
    Cm = h.__dict__["_prox_cache"]["Cm"]
    try:
        sol, _, _, _, lagr, _ = quadprog.solve_qp(G, a, Cm, np.zeros(Cm.shape[1]))
    except ValueError as exc:
        raise SolverFailure(f"prox QP failed: {exc}") from exc
    u = sol[:n]
    # dual point from the multipliers
    s = np.zeros(m)
    b = np.zeros((m, n))
    for mu, (_, j, a_, b_) in zip(lagr, C):
        if mu > 0:
            s[j] += mu
            b[j, a_] += mu
            b[j, b_] -= mu
    nz = s > 0
    b[nz] /= s[nz, None]
    g_qp = h.deg * u
    p_qp = _primal(h, f, lam, g_qp)
    dual = _dual(h, f, lam, s, b)
    best = ProxResult(g_qp, max(p_qp - dual, 0.0), None, [], None)
    try:
        g_pol, groups, active, M = _group_solve(h, f, lam, u, 1e-9)
    except np.linalg.LinAlgError:
        g_pol = None
    if g_pol is not None and np.max(np.abs(g_pol - g_qp)) <= 1e-6 * (1 + np.max(np.abs(g_qp))):
        p_pol = _primal(h, f, lam, g_pol)
        if p_pol <= p_qp + 1e-15 * (1 + abs(p_qp)):
            best = ProxResult(g_pol, max(min(p_pol, p_qp) - dual, 0.0), groups, active, M)
    p_best = min(p_qp, _primal(h, f, lam, best.g))
    if best.gap > max(p.eps, 1e-13 * (1.0 + abs(p_best))):
        raise SolverFailure(f"prox solve gap {best.gap:.3e} exceeds {p.eps:.1e}")
    return best


def resolve(p: ProxProblem) -> np.ndarray:
    """``J_lambda f``: the minimiser of ``||f-g||^2_{D^-1}/(2 lambda) + E(g)``."""
    return resolve_full(p).g


@dataclass
class PsiDiagnostic:
    lam: float
    psi: np.ndarray
    h: Hypergraph

    def pairing(self, x, y) -> float:
        u = potential(self.h, self.psi)
        return float(u[x] - u[y])

    def scaled_norm(self) -> float:
        return norm(self.h, self.psi) / self.lam


def psi(h: Hypergraph, f, lam: float, eps: float = PROX_TOL) -> PsiDiagnostic:
    """``(f - J_lambda f) - lambda L0 f``."""
    f = np.asarray(f, dtype=float)
    g = resolve(ProxProblem(h, f, lam, eps))
    l0 = laplacian_l0(h, f).value
    return PsiDiagnostic(lam, (f - g) - lam * l0, h)


def probe_liminf(h: Hypergraph, x: int, y: int, lambdas=(1e-2, 1e-3, 1e-4), sample_count: int = 200, rng=0) -> list:
    """Sampled infimum over ``tLip`` of ``<psi_f^lambda, delta_x - delta_y> / lambda``.

    This is numerical evidence only: the infimum is taken over a finite
    sample (random polytope vertices and mixtures of them).
    """
    from .lipschitz import LipschitzRegion

    if x == y:
        raise ValueError("x and y must differ")
    region = LipschitzRegion(h, x, y, "tlip")
    pts = region.sample(sample_count, rng)
    rows = []
    for lam in lambdas:
        vals = np.array([psi(h, h.deg * u, lam).pairing(x, y) / lam for u in pts])
        i = int(np.argmin(vals))
        rows.append({
            "lambda": float(lam),
            "inf": float(vals[i]),
            "mean": float(vals.mean()),
            "samples": int(len(vals)),
            "argmin": pts[i].tolist(),
        })
    return rows
