"""Variable-length graphs and their walk growth rate lambda_1.

Each edge of a VLG carries a weight function of a formal variable z:
``Monomial(l)`` is z**l and ``ScaledTreeSeries(c, d)`` is c * S_d(z), where
S_d(z) = (1 - sqrt(1 - 4(d-1) z^2)) / 2 is the generating function of
returns to the root of a (d-1)-ary branch.

lambda_1 is 1/z* with z* = sup{z : Perron(Z(z)) < 1}.  For monomial-only
graphs this is also the reciprocal of the smallest positive root of
det(I - Z(z)).

In an undirected VLG a monomial self-loop ``u == v`` is a whole-loop and
contributes twice to Z[u, u] (once per direction); ``half=True`` marks a
half-loop which contributes once.  Tree-series entries sit on the diagonal
and contribute once.
"""
from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .errors import BudgetError, ConvergenceError, InvalidInputError
from .graph import LabeledGraph, build_graph


@dataclass(frozen=True)
class Monomial:
    length: int

    def __post_init__(self):
        if int(self.length) < 1:
            raise InvalidInputError("edge lengths are positive integers")

    def __call__(self, z: float) -> float:
        return z ** self.length


def tree_series(z, d):
    """S_d(z) with the radicand clamped at zero at the branch point."""
    r = z / branch_point(d)
    rad = max(0.0, (1.0 - r) * (1.0 + r))
    return (1.0 - np.sqrt(rad)) / 2.0


def branch_point(d) -> float:
    return 1.0 / (2.0 * np.sqrt(d - 1))


@dataclass(frozen=True)
class ScaledTreeSeries:
    c: float
    d: float

    def __post_init__(self):
        if self.c < 0 or self.d <= 2:
            raise InvalidInputError("tree series needs c >= 0 and d > 2")

    def __call__(self, z: float) -> float:
        return self.c * tree_series(z, self.d)


@dataclass(frozen=True)
class VLGEdge:
    u: int
    v: int
    weight: Monomial | ScaledTreeSeries
    half: bool = False


@dataclass(frozen=True)
class VLG:
    n: int
    edges: tuple = field(default_factory=tuple)
    directed: bool = False

    def __post_init__(self):
        for e in self.edges:
            if not (0 <= e.u < self.n and 0 <= e.v < self.n):
                raise InvalidInputError("edge endpoint out of range")
            if isinstance(e.weight, ScaledTreeSeries) and e.u != e.v:
                raise InvalidInputError("tree-series weights live on the diagonal")
            if e.half and (e.u != e.v or self.directed):
                raise InvalidInputError("half-loops are undirected self-loops")
            if e.half and isinstance(e.weight, Monomial) and e.weight.length != 1:
                raise InvalidInputError("half-loops must have length one")

    @property
    def monomial_only(self) -> bool:
        return all(isinstance(e.weight, Monomial) for e in self.edges)

    def domain_max(self) -> float:
        """Largest z where every weight is defined (inf if none is restricted)."""
        zs = [branch_point(e.weight.d) for e in self.edges
              if isinstance(e.weight, ScaledTreeSeries) and e.weight.c > 0]
        return min(zs) if zs else np.inf

    def z_matrix(self, z: float) -> np.ndarray:
        m = np.zeros((self.n, self.n))
        for e in self.edges:
            w = e.weight(z)
            if self.directed or isinstance(e.weight, ScaledTreeSeries) or e.half:
                m[e.u, e.v] += w
            elif e.u == e.v:
                m[e.u, e.u] += 2 * w
            else:
                m[e.u, e.v] += w
                m[e.v, e.u] += w
        return m

    def has_cycle(self) -> bool:
        """Whether some closed walk of positive length exists."""
        if not self.edges:
            return False
        if not self.directed:
            return True
        rows = [e.u for e in self.edges]
        cols = [e.v for e in self.edges]
        if any(r == c for r, c in zip(rows, cols)):
            return True
        adj = csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(self.n, self.n))
        k, lab = connected_components(adj, directed=True, connection="strong")
        return bool(np.any(np.bincount(lab, minlength=k) > 1))

    def cyclic_blocks(self) -> list[np.ndarray]:
        """Vertex sets of the strongly connected components that carry a cycle."""
        rows = [e.u for e in self.edges] + ([] if self.directed else [e.v for e in self.edges])
        cols = [e.v for e in self.edges] + ([] if self.directed else [e.u for e in self.edges])
        adj = csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(self.n, self.n))
        k, lab = connected_components(adj, directed=True, connection="strong")
        loops = {e.u for e in self.edges if e.u == e.v}
        blocks = []
        for c in range(k):
            idx = np.flatnonzero(lab == c)
            if len(idx) > 1 or int(idx[0]) in loops:
                blocks.append(idx)
        return blocks


def perron(m: np.ndarray) -> float:
    """Spectral radius of a small nonnegative matrix."""
    if m.size == 0:
        return 0.0
    return float(np.max(np.abs(np.linalg.eigvals(m))))


@dataclass
class ShannonResult:
    lambda1: float
    z_star: float
    z_err: float
    boundary: bool

    @property
    def lambda_err(self) -> float:
        if self.z_star == 0 or not np.isfinite(self.z_star):
            return 0.0
        return self.z_err / self.z_star**2


def shannon(g: VLG, xtol: float = 1e-14) -> ShannonResult:
    """Locate z* = sup{z : Perron(Z(z)) < 1} by safeguarded bisection."""
    if not g.has_cycle():
        return ShannonResult(0.0, np.inf, 0.0, False)
    # the spectral radius of Z is the largest over its strongly connected
    # blocks; within a block the Perron root is simple, so it is well
    # conditioned even when two blocks share the same threshold
    blocks = g.cyclic_blocks()

    def f(z):
        m = g.z_matrix(z)
        return max(perron(m[np.ix_(b, b)]) for b in blocks) - 1.0

    zmax = g.domain_max()
    if np.isfinite(zmax):
        if f(zmax) < 0:
            return ShannonResult(1.0 / zmax, zmax, 0.0, True)
        hi = zmax
    else:
        # any closed walk has weight >= 1 at z = 1, so the root is at most 1
        hi, step = 1.0, 1e-12
        while f(hi) < 0:
            hi = 1.0 + step
            step *= 10
            if step > 1:
                raise ConvergenceError("no sign change for Perron(Z(z)) - 1")
    z, info = brentq(f, 0.0, hi, xtol=xtol, rtol=4 * np.finfo(float).eps, full_output=True)
    if not info.converged:
        raise ConvergenceError("bisection for the Shannon threshold failed")
    return ShannonResult(1.0 / z, z, xtol, False)


def lambda1_vlg(g: VLG) -> float:
    """Growth rate of closed walks counted by total length."""
    return shannon(g).lambda1


def det_polynomial(g: VLG):
    """det(I - Z(z)) as a sympy polynomial with integer coefficients."""
    import sympy

    if not g.monomial_only:
        raise InvalidInputError("determinant criterion needs monomial weights")
    z = sympy.Symbol("z")
    m = sympy.zeros(g.n, g.n)
    for e in g.edges:
        w = z ** e.weight.length
        if g.directed or e.half:
            m[e.u, e.v] += w
        elif e.u == e.v:
            m[e.u, e.u] += 2 * w
        else:
            m[e.u, e.v] += w
            m[e.v, e.u] += w
    det = (sympy.eye(g.n) - m).det(method="berkowitz")
    return sympy.Poly(sympy.expand(det), z)


def lambda1_det(g: VLG) -> float:
    """1 / (smallest positive real root of det(I - Z(z))), by exact root isolation."""
    import sympy

    poly = det_polynomial(g)
    if poly.degree() <= 0:
        return 0.0
    eps = sympy.Rational(1, 10**18)
    roots = [iv for iv, _ in poly.intervals(eps=eps, inf=0) if iv[1] > 0]
    if not roots:
        return 0.0
    lo, hi = min(roots, key=lambda iv: iv[0])
    return float(2 / (sympy.Rational(lo) + sympy.Rational(hi)))


# -- structural operations ----------------------------------------------

def graph_to_vlg(g: LabeledGraph) -> VLG:
    """Unit-length undirected VLG of a labeled graph."""
    edges = tuple(VLGEdge(int(u), int(v), Monomial(1), half=bool(lp == 2))
                  for u, v, lp in zip(g.pu, g.pv, g.ploop))
    return VLG(g.n, edges, directed=False)


def vlg_to_graph(g: VLG) -> LabeledGraph:
    """Unlabeled multigraph of an undirected VLG whose lengths are all one."""
    if g.directed:
        raise InvalidInputError("only undirected VLGs correspond to graphs")
    spec = []
    for e in g.edges:
        if not isinstance(e.weight, Monomial) or e.weight.length != 1:
            raise InvalidInputError("subdivide first: lengths must be one")
        kind = "half" if e.half else ("whole" if e.u == e.v else "normal")
        spec.append((e.u, e.v, None, kind))
    return build_graph(g.n, spec)


def subdivide(g: VLG) -> VLG:
    """Replace each length-l edge by a path through l-1 new beads."""
    if not g.monomial_only:
        raise InvalidInputError("cannot subdivide tree-series edges")
    n = g.n
    edges = []
    for e in g.edges:
        ell = e.weight.length
        if ell == 1:
            edges.append(VLGEdge(e.u, e.v, Monomial(1), e.half))
            continue
        if e.half:
            raise InvalidInputError("half-loops of length >= 2 are not subdivided")
        chain = [e.u] + list(range(n, n + ell - 1)) + [e.v]
        n += ell - 1
        edges.extend(VLGEdge(a, b, Monomial(1)) for a, b in zip(chain, chain[1:]))
    return VLG(n, tuple(edges), g.directed)


def realize(g: VLG, keep, max_length: int = 64) -> VLG:
    """Realisation of ``g`` on the vertex subset ``keep``.

    Directed graphs: one edge u -> v of length l for every walk of length l
    from u to v whose interior avoids ``keep`` (walks longer than
    ``max_length`` are dropped with a warning when the rest has cycles).

    Undirected graphs: suppression of beads, i.e. every maximal path whose
    interior vertices lie outside ``keep`` becomes one edge of the summed
    length.  Every vertex outside ``keep`` must have degree two.
    """
    if not g.monomial_only:
        raise InvalidInputError("realisation needs monomial weights")
    keep = sorted(set(int(x) for x in keep))
    if not keep:
        raise InvalidInputError("keep at least one vertex")
    index = {x: i for i, x in enumerate(keep)}
    if g.directed:
        return _realize_directed(g, index, max_length)
    return _suppress(g, index)


def _realize_directed(g: VLG, index, max_length, budget: int = 100_000) -> VLG:
    """Walk counts by length through the dropped vertices, one edge per walk."""
    out = [[] for _ in range(g.n)]
    for e in g.edges:
        out[e.u].append((e.v, e.weight.length))
    edges = []
    truncated = False
    for u in index:
        # pending[L][x]: walks of length L from u to x with interior avoiding keep
        pending = [dict() for _ in range(max_length + 1)]
        for v, ell in out[u]:
            if ell <= max_length:
                pending[ell][v] = pending[ell].get(v, 0) + 1
            else:
                truncated = True
        for length in range(1, max_length + 1):
            for x, c in pending[length].items():
                if x in index:
                    if len(edges) + c > budget:
                        raise BudgetError(f"realisation has more than {budget} edges")
                    edges.extend([VLGEdge(index[u], index[x], Monomial(length))] * c)
                    continue
                for y, ell in out[x]:
                    if length + ell <= max_length:
                        pending[length + ell][y] = pending[length + ell].get(y, 0) + c
                    else:
                        truncated = True
    if truncated:
        warnings.warn(f"realisation truncated at length {max_length}", RuntimeWarning)
    return VLG(len(index), tuple(edges), directed=True)


def _suppress(g: VLG, index) -> VLG:
    inc = [[] for _ in range(g.n)]
    for i, e in enumerate(g.edges):
        inc[e.u].append(i)
        if e.v != e.u:
            inc[e.v].append(i)
    for x in range(g.n):
        if x in index:
            continue
        loops = any(g.edges[i].u == g.edges[i].v for i in inc[x])
        if loops or len(inc[x]) != 2:
            raise InvalidInputError(f"vertex {x} is not a bead (degree two, no loop)")
    seen = set()
    edges = []
    for u in index:
        for i0 in inc[u]:
            e = g.edges[i0]
            if e.u == e.v:
                if frozenset([i0]) not in seen:
                    seen.add(frozenset([i0]))
                    edges.append(VLGEdge(index[u], index[u], e.weight, e.half))
                continue
            used = [i0]
            length = e.weight.length
            x = e.v if e.u == u else e.u
            while x not in index:
                nxt = inc[x][0] if inc[x][0] != used[-1] else inc[x][1]
                used.append(nxt)
                f = g.edges[nxt]
                length += f.weight.length
                x = f.v if f.u == x else f.u
                if len(used) > len(g.edges):
                    raise InvalidInputError("beads form a cycle avoiding the kept set")
            key = frozenset(used)
            if key in seen:
                continue
            seen.add(key)
            edges.append(VLGEdge(index[u], index[x], Monomial(length)))
    covered = set().union(*seen) if seen else set()
    if any(x not in index and inc[x][0] not in covered for x in range(g.n)):
        raise InvalidInputError("beads form a cycle avoiding the kept set")
    return VLG(len(index), tuple(edges), directed=False)


def nonbacktracking_vlg(g: VLG) -> VLG:
    """Directed VLG on directed edges; the arc e1 -> e2 has the length of e2."""
    if g.directed or not g.monomial_only:
        raise InvalidInputError("needs an undirected monomial VLG")
    tails, heads, lens, opp = [], [], [], []
    for e in g.edges:
        base = len(tails)
        tails.append(e.u)
        heads.append(e.v)
        lens.append(e.weight.length)
        if e.half:
            opp.append(base)
        else:
            tails.append(e.v)
            heads.append(e.u)
            lens.append(e.weight.length)
            opp.extend([base + 1, base])
    edges = []
    for a in range(len(tails)):
        for b in range(len(tails)):
            if heads[a] == tails[b] and b != opp[a]:
                edges.append(VLGEdge(a, b, Monomial(lens[b])))
    return VLG(len(tails), tuple(edges), directed=True)


def lambda_irred_vlg(g: VLG) -> float:
    return lambda1_vlg(nonbacktracking_vlg(g))


# -- Tree_d ---------------------------------------------------------------

def tree_d_vlg(x: LabeledGraph, d: float) -> VLG:
    deg = x.degrees
    if np.any(deg > d + 1e-12):
        raise InvalidInputError("every vertex degree must be at most d")
    base = graph_to_vlg(x)
    extra = tuple(VLGEdge(v, v, ScaledTreeSeries((d - deg[v]) / (d - 1), d))
                  for v in range(x.n) if d - deg[v] > 0)
    return VLG(x.n, base.edges + extra, directed=False)


def tree_d_norm(x: LabeledGraph, d: float) -> float:
    """Spectral radius of Tree_d(x): x with (d-1)-ary trees hung to make it d-regular."""
    if not x.is_connected():
        raise InvalidInputError("x must be connected")
    return lambda1_vlg(tree_d_vlg(x, d))


def hypercritical_rho(mu: float, d: float) -> float:
    """mu + (d-1)/mu, the Tree_d norm for lambda_irred = mu > sqrt(d-1)."""
    return mu + (d - 1) / mu


# -- limits -----------------------------------------------------------------

@dataclass
class LimitReport:
    lengths: list
    values: list
    limit: float
    target: float
    monotone: bool
    gap: float
    passed: bool


def limit_convergence_check(base: VLG, growing, lengths, tol: float = 1e-6) -> LimitReport:
    """lambda_1 as the ``growing`` edges get longer, against the limit graph.

    The limit graph drops the growing edges.  Every graph with a cycle has
    lambda_1 >= 1, so the target is max(lambda_1(limit), 1) when the
    growing family has cycles; it equals lambda_1(limit) whenever the
    limit graph keeps a cycle.
    """
    growing = set(growing)
    lengths = list(lengths)
    values = []
    for ell in lengths:
        edges = tuple(VLGEdge(e.u, e.v, Monomial(ell), e.half) if i in growing else e
                      for i, e in enumerate(base.edges))
        values.append(lambda1_vlg(VLG(base.n, edges, base.directed)))
    rest = VLG(base.n, tuple(e for i, e in enumerate(base.edges) if i not in growing),
               base.directed)
    limit = lambda1_vlg(rest)
    target = max(limit, 1.0) if base.has_cycle() else limit
    monotone = all(b <= a + 1e-12 for a, b in zip(values, values[1:]))
    above = all(v >= target - 1e-9 for v in values)
    gap = abs(values[-1] - target) if values else 0.0
    return LimitReport(lengths, values, limit, target, monotone and above, gap,
                       monotone and above and gap <= tol)


# -- JSON ---------------------------------------------------------------------

def vlg_to_dict(g: VLG) -> dict:
    edges = []
    for e in g.edges:
        item = {"u": e.u + 1, "v": e.v + 1}
        if isinstance(e.weight, Monomial):
            item["len"] = int(e.weight.length)
        else:
            item["tree_series"] = {"c": e.weight.c, "d": e.weight.d}
        if e.half:
            item["half"] = True
        edges.append(item)
    return {"directed": g.directed, "vertices": g.n, "edges": edges}


def vlg_from_dict(obj: dict) -> VLG:
    try:
        edges = []
        for item in obj["edges"]:
            if "tree_series" in item:
                ts = item["tree_series"]
                w = ScaledTreeSeries(float(ts["c"]), float(ts["d"]))
            else:
                w = Monomial(int(item["len"]))
            edges.append(VLGEdge(int(item["u"]) - 1, int(item["v"]) - 1, w,
                                 bool(item.get("half", False))))
        return VLG(int(obj["vertices"]), tuple(edges), bool(obj["directed"]))
    except (KeyError, TypeError) as exc:
        raise InvalidInputError(f"malformed VLG file: {exc}") from exc


def load_vlg(path) -> VLG:
    with open(path) as fh:
        return vlg_from_dict(json.load(fh))


def save_vlg(g: VLG, path) -> None:
    with open(path, "w") as fh:
        json.dump(vlg_to_dict(g), fh, indent=1)
