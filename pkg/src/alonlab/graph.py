"""Labeled multigraphs with whole-loops and half-loops.

A graph is stored as a list of undirected edge *pairs*.  Each pair is either
a normal edge ``u -- v`` (two directed edges, opposite to each other), a
whole-loop at ``v`` (two directed self-edges, opposite to each other) or a
half-loop at ``v`` (one directed self-edge which is its own opposite).

Labels say which generator of the random model produced an edge.  A pair
``(u, v, perm(j))`` means pi_j(u) = v, so the directed edge u -> v carries
``perm(j)`` and v -> u carries ``perm_inv(j)``.  Matching labels and half-loop
labels are their own inverses.

Vertices are 0-based in the Python API; the JSON file format is 1-based.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, NamedTuple, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from .errors import ConvergenceError, InvalidInputError

PERM, PERM_INV, MATCH, HALFLOOP = "perm", "perm_inv", "match", "halfloop"
KINDS = (PERM, PERM_INV, MATCH, HALFLOOP)
_KIND_INDEX = {k: i for i, k in enumerate(KINDS)}
_INV_KIND = np.array([1, 0, 2, 3])
_LETTER_OFFSET = np.array([0, 1, 2, 2])

NORMAL, WHOLE, HALF = "normal", "whole", "half"
LOOP_KINDS = (NORMAL, WHOLE, HALF)
_LOOP_INDEX = {k: i for i, k in enumerate(LOOP_KINDS)}


@dataclass(frozen=True, order=True)
class Label:
    """Generator label of a directed edge."""

    kind: str
    j: int

    def __post_init__(self):
        if self.kind not in _KIND_INDEX:
            raise InvalidInputError(f"unknown label kind {self.kind!r}")
        if int(self.j) < 1:
            raise InvalidInputError("generator index is 1-based")

    def inverse(self) -> "Label":
        return Label(KINDS[_INV_KIND[_KIND_INDEX[self.kind]]], self.j)

    @property
    def code(self) -> int:
        return 4 * (self.j - 1) + _KIND_INDEX[self.kind]

    @property
    def letter(self) -> int:
        """Generator letter; matching and half-loop labels share a letter."""
        return 3 * (self.j - 1) + int(_LETTER_OFFSET[_KIND_INDEX[self.kind]])

    @staticmethod
    def from_code(code: int) -> "Label | None":
        if code < 0:
            return None
        return Label(KINDS[code % 4], code // 4 + 1)

    def __str__(self):
        return f"{self.kind}({self.j})"


def perm(j: int) -> Label:
    return Label(PERM, j)


def perm_inv(j: int) -> Label:
    return Label(PERM_INV, j)


def match(j: int) -> Label:
    return Label(MATCH, j)


def halfloop(j: int) -> Label:
    return Label(HALFLOOP, j)


class EdgePair(NamedTuple):
    u: int
    v: int
    label: Label | None
    loop: str


def _label_code(label) -> int:
    return -1 if label is None else label.code


def _inverse_code(codes: np.ndarray) -> np.ndarray:
    out = codes.copy()
    mask = codes >= 0
    out[mask] = 4 * (codes[mask] // 4) + _INV_KIND[codes[mask] % 4]
    return out


def _letter_of_code(codes: np.ndarray) -> np.ndarray:
    out = np.full(codes.shape, -1, dtype=np.int64)
    mask = codes >= 0
    out[mask] = 3 * (codes[mask] // 4) + _LETTER_OFFSET[codes[mask] % 4]
    return out


class LabeledGraph:
    """Immutable labeled multigraph.

    Use :func:`build_graph` (or :func:`from_arrays` for bulk construction)
    rather than calling the constructor directly.
    """

    def __init__(self, n: int, pu, pv, plab, ploop, d=None, model=None):
        self.n = int(n)
        self.d = None if d is None else d
        self.model = model
        self.pu = np.asarray(pu, dtype=np.int64)
        self.pv = np.asarray(pv, dtype=np.int64)
        self.plab = np.asarray(plab, dtype=np.int64)
        self.ploop = np.asarray(ploop, dtype=np.int8)
        for arr in (self.pu, self.pv, self.plab, self.ploop):
            arr.setflags(write=False)
        self._build_directed()

    def _build_directed(self):
        half = self.ploop == 2
        width = np.where(half, 1, 2)
        start = (np.cumsum(width) - width).astype(np.int64)
        m = int(width.sum())
        tail = np.empty(m, dtype=np.int64)
        head = np.empty(m, dtype=np.int64)
        lab = np.empty(m, dtype=np.int64)
        pair_of = np.empty(m, dtype=np.int64)
        opp = np.empty(m, dtype=np.int64)
        fwd = start
        tail[fwd] = self.pu
        head[fwd] = self.pv
        lab[fwd] = self.plab
        pair_of[fwd] = np.arange(len(self.pu))
        full = ~half
        rev = start[full] + 1
        tail[rev] = self.pv[full]
        head[rev] = self.pu[full]
        lab[rev] = _inverse_code(self.plab[full])
        pair_of[rev] = np.flatnonzero(full)
        opp[fwd] = np.where(half, fwd, fwd + 1)
        opp[rev] = rev - 1
        self.tail, self.head, self.dlab = tail, head, lab
        self.pair_of, self.opp = pair_of, opp
        self.first_edge = start
        for arr in (tail, head, lab, pair_of, opp, start):
            arr.setflags(write=False)

    # -- basic counts -------------------------------------------------
    @property
    def num_pairs(self) -> int:
        return len(self.pu)

    @property
    def num_directed(self) -> int:
        return len(self.tail)

    @property
    def num_whole_loops(self) -> int:
        return int(np.count_nonzero(self.ploop == 1))

    @property
    def num_half_loops(self) -> int:
        return int(np.count_nonzero(self.ploop == 2))

    @cached_property
    def degrees(self) -> np.ndarray:
        deg = np.bincount(self.tail, minlength=self.n)
        deg.setflags(write=False)
        return deg

    @cached_property
    def letters(self) -> np.ndarray:
        return _letter_of_code(self.dlab)

    @property
    def pairs(self) -> list[EdgePair]:
        return [
            EdgePair(int(u), int(v), Label.from_code(int(c)), LOOP_KINDS[int(lp)])
            for u, v, c, lp in zip(self.pu, self.pv, self.plab, self.ploop)
        ]

    def label(self, e: int) -> Label | None:
        """Label of directed edge ``e``."""
        return Label.from_code(int(self.dlab[e]))

    def regular_degree(self) -> int | None:
        """The common vertex degree, or None if the graph is not regular."""
        if self.n == 0:
            return None
        deg = self.degrees
        return int(deg[0]) if np.all(deg == deg[0]) else None

    def adjacency(self, sparse: bool = False):
        """Adjacency matrix; whole-loops add 2 to the diagonal, half-loops 1."""
        data = np.ones(self.num_directed, dtype=np.int64)
        a = sp.coo_matrix((data, (self.tail, self.head)), shape=(self.n, self.n)).tocsr()
        a.sum_duplicates()
        return a if sparse else a.toarray()

    def degree_matrix(self) -> np.ndarray:
        return np.diag(self.degrees.astype(np.int64))

    def is_connected(self) -> bool:
        if self.n <= 1:
            return True
        k, _ = connected_components(self.adjacency(sparse=True), directed=False)
        return k == 1

    @cached_property
    def successor_table(self) -> np.ndarray | None:
        """``table[letter, x]`` = head of the edge leaving x with that letter.

        Entries are -1 where no such edge exists.  Returns None when some
        vertex has two outgoing edges with the same letter, or an edge is
        unlabeled (the graph is then not label-deterministic).
        """
        let = self.letters
        if np.any(let < 0):
            return None
        nl = int(let.max()) + 1 if len(let) else 0
        key = let * self.n + self.tail
        if len(np.unique(key)) != len(key):
            return None
        table = np.full((nl, self.n), -1, dtype=np.int64)
        table[let, self.tail] = self.head
        table.setflags(write=False)
        return table

    @cached_property
    def edge_table(self) -> np.ndarray | None:
        """Like :attr:`successor_table` but holding directed edge ids."""
        if self.successor_table is None:
            return None
        table = np.full(self.successor_table.shape, -1, dtype=np.int64)
        table[self.letters, self.tail] = np.arange(self.num_directed)
        table.setflags(write=False)
        return table

    def subgraph_pairs(self, keep: Sequence[int]) -> "LabeledGraph":
        """Graph on the same vertex set with only the listed edge pairs."""
        keep = np.asarray(keep, dtype=np.int64)
        return LabeledGraph(self.n, self.pu[keep], self.pv[keep], self.plab[keep],
                            self.ploop[keep], model=self.model)

    def induced(self, vertices: Sequence[int]) -> "LabeledGraph":
        """Induced subgraph, vertices renumbered in the given order."""
        vertices = list(vertices)
        new = np.full(self.n, -1, dtype=np.int64)
        new[vertices] = np.arange(len(vertices))
        keep = (new[self.pu] >= 0) & (new[self.pv] >= 0)
        return LabeledGraph(len(vertices), new[self.pu[keep]], new[self.pv[keep]],
                            self.plab[keep], self.ploop[keep], model=self.model)

    def same_as(self, other: "LabeledGraph") -> bool:
        """Identical vertex count, edge list (in order) and metadata."""
        return (self.n == other.n and self.d == other.d and self.model == other.model
                and np.array_equal(self.pu, other.pu) and np.array_equal(self.pv, other.pv)
                and np.array_equal(self.plab, other.plab)
                and np.array_equal(self.ploop, other.ploop))

    def __repr__(self):
        return (f"LabeledGraph(n={self.n}, pairs={self.num_pairs}, d={self.d}, "
                f"model={self.model!r})")


def from_arrays(n, pu, pv, plab, ploop, d=None, model=None, check=True) -> LabeledGraph:
    """Bulk constructor from edge-pair arrays (label codes, loop codes 0/1/2)."""
    g = LabeledGraph(n, pu, pv, plab, ploop, d=d, model=model)
    if check:
        _validate(g)
    return g


def build_graph(n: int, edge_spec: Iterable, d: int | None = None,
                model: str | None = None) -> LabeledGraph:
    """Build and validate a labeled multigraph.

    ``edge_spec`` holds tuples ``(u, v, label)`` or ``(u, v, label, loop_kind)``
    with 0-based vertices.  ``label`` may be None for unlabeled graphs.  When
    ``loop_kind`` is omitted, ``u == v`` means a whole-loop.
    """
    pu, pv, plab, ploop = [], [], [], []
    for item in edge_spec:
        if len(item) == 3:
            u, v, label = item
            kind = WHOLE if u == v else NORMAL
        else:
            u, v, label, kind = item
        if kind not in _LOOP_INDEX:
            raise InvalidInputError(f"unknown loop kind {kind!r}")
        if kind == HALF and u != v:
            raise InvalidInputError("a half-loop must have u == v")
        if kind == NORMAL and u == v:
            raise InvalidInputError("a normal edge must join distinct vertices")
        if kind == WHOLE and u != v:
            raise InvalidInputError("a whole-loop must have u == v")
        pu.append(u)
        pv.append(v)
        plab.append(_label_code(label))
        ploop.append(_LOOP_INDEX[kind])
    return from_arrays(n, np.array(pu, dtype=np.int64), np.array(pv, dtype=np.int64),
                       np.array(plab, dtype=np.int64), np.array(ploop, dtype=np.int8),
                       d=d, model=model)


def _validate(g: LabeledGraph):
    if g.n < 0:
        raise InvalidInputError("negative vertex count")
    if g.num_pairs:
        if g.pu.min() < 0 or g.pv.min() < 0 or max(g.pu.max(), g.pv.max()) >= g.n:
            raise InvalidInputError("vertex index out of range")
        loops = g.ploop != 0
        if np.any(loops & (g.pu != g.pv)) or np.any(~loops & (g.pu == g.pv)):
            raise InvalidInputError("loop flags inconsistent with endpoints")
        half = g.ploop == 2
        if np.any(half & (g.plab >= 0) & (g.plab % 4 <= 1)):
            raise InvalidInputError("a half-loop cannot carry a permutation label")
    if g.d is not None and np.any(g.degrees != g.d):
        bad = int(np.flatnonzero(g.degrees != g.d)[0])
        raise InvalidInputError(
            f"degree violation: vertex {bad} has degree {int(g.degrees[bad])}, declared d={g.d}")


# -- JSON ---------------------------------------------------------------

def graph_to_dict(g: LabeledGraph) -> dict:
    edges = []
    for p in g.pairs:
        u, v, label = p.u, p.v, p.label
        if label is not None and label.kind == PERM_INV:
            u, v, label = v, u, label.inverse()
        edges.append({
            "u": u + 1,
            "v": v + 1,
            "label": None if label is None else {"kind": label.kind, "j": label.j},
            "loop": p.loop,
        })
    return {"n": g.n, "d": g.d, "model": g.model, "edges": edges}


def graph_from_dict(obj: dict) -> LabeledGraph:
    try:
        n = int(obj["n"])
        spec = []
        for e in obj["edges"]:
            lab = e.get("label")
            label = None if lab is None else Label(lab["kind"], int(lab["j"]))
            u, v = int(e["u"]) - 1, int(e["v"]) - 1
            loop = e.get("loop", WHOLE if u == v else NORMAL)
            spec.append((u, v, label, loop))
        return build_graph(n, spec, d=obj.get("d"), model=obj.get("model"))
    except (KeyError, TypeError) as exc:
        raise InvalidInputError(f"malformed graph file: {exc}") from exc


def save_graph(g: LabeledGraph, path) -> None:
    with open(path, "w") as fh:
        json.dump(graph_to_dict(g), fh, indent=1)


def load_graph(path) -> LabeledGraph:
    with open(path) as fh:
        return graph_from_dict(json.load(fh))


# -- small constructions ------------------------------------------------

def bouquet(m: int, labels: Sequence[Label] | None = None, half: int = 0) -> LabeledGraph:
    """One vertex with ``m`` whole-loops (and ``half`` half-loops)."""
    labels = labels if labels is not None else [None] * m
    spec = [(0, 0, lab, WHOLE) for lab in labels]
    spec += [(0, 0, None, HALF) for _ in range(half)]
    return build_graph(1, spec)


def multi_edge(m: int, labels: Sequence[Label] | None = None) -> LabeledGraph:
    """Two vertices joined by ``m`` parallel edges."""
    labels = labels if labels is not None else [None] * m
    return build_graph(2, [(0, 1, lab) for lab in labels])


def cycle_graph(k: int, label: Label | None = None) -> LabeledGraph:
    """Cycle C_k with every edge oriented i -> i+1 and carrying ``label``."""
    if k == 1:
        return build_graph(1, [(0, 0, label, WHOLE)])
    return build_graph(k, [(i, (i + 1) % k, label) for i in range(k)])


def path_graph(k: int) -> LabeledGraph:
    return build_graph(k, [(i, i + 1, None) for i in range(k - 1)])


def complete_graph(k: int) -> LabeledGraph:
    return build_graph(k, [(i, j, None) for i in range(k) for j in range(i + 1, k)])


# -- structural operations ----------------------------------------------

def order(g: LabeledGraph) -> int:
    """|E| - |V| with every loop (whole or half) counted as one edge."""
    return g.num_pairs - g.n


def prune_completely(g: LabeledGraph) -> LabeledGraph:
    """Repeatedly strip degree-one vertices together with their edge."""
    deg = g.degrees.copy()
    alive_v = np.ones(g.n, dtype=bool)
    alive_p = np.ones(g.num_pairs, dtype=bool)
    incident: list[list[int]] = [[] for _ in range(g.n)]
    for p, (u, v) in enumerate(zip(g.pu, g.pv)):
        incident[u].append(p)
        if v != u:
            incident[v].append(p)
    stack = [x for x in range(g.n) if deg[x] == 1]
    while stack:
        x = stack.pop()
        if not alive_v[x] or deg[x] != 1:
            continue
        if alive_v.sum() == 1:
            break
        p = next(q for q in incident[x] if alive_p[q])
        alive_p[p] = False
        alive_v[x] = False
        deg[x] = 0
        other = int(g.pv[p] if g.pu[p] == x else g.pu[p])
        if other != x:
            deg[other] -= 1
            if deg[other] == 1:
                stack.append(other)
    keep_v = np.flatnonzero(alive_v)
    new = np.full(g.n, -1, dtype=np.int64)
    new[keep_v] = np.arange(len(keep_v))
    kp = np.flatnonzero(alive_p)
    return LabeledGraph(len(keep_v), new[g.pu[kp]], new[g.pv[kp]], g.plab[kp], g.ploop[kp],
                        model=g.model)


def _merge_vertices(g: LabeledGraph, u: int, v: int, drop_pair: int) -> LabeledGraph:
    """Identify v into u, drop one pair, renumber vertices densely."""
    keep = np.ones(g.num_pairs, dtype=bool)
    keep[drop_pair] = False
    pu = np.where(g.pu == v, u, g.pu)[keep]
    pv = np.where(g.pv == v, u, g.pv)[keep]
    ploop = g.ploop[keep].copy()
    ploop[(ploop == 0) & (pu == pv)] = 1
    shift = lambda a: np.where(a > v, a - 1, a)
    return LabeledGraph(g.n - 1, shift(pu), shift(pv), g.plab[keep], ploop, model=g.model)


def contract_edge(g: LabeledGraph, e: int) -> LabeledGraph:
    """Discard edge pair ``e`` and identify its two endpoints.

    Other edges between the endpoints become whole-loops.
    """
    u, v = int(g.pu[e]), int(g.pv[e])
    if u == v:
        raise InvalidInputError("cannot contract a loop")
    u, v = min(u, v), max(u, v)
    return _merge_vertices(g, u, v, e)


def contract_distance_two(g: LabeledGraph, u: int, v: int, w: int) -> LabeledGraph:
    """Identify non-adjacent u, v sharing the neighbour w; drop one w--u edge."""
    if u == v:
        raise InvalidInputError("u and v must differ")
    between = ((g.pu == u) & (g.pv == v)) | ((g.pu == v) & (g.pv == u))
    if np.any(between):
        raise InvalidInputError("u and v must not be adjacent")
    wu = np.flatnonzero(((g.pu == u) & (g.pv == w)) | ((g.pu == w) & (g.pv == u)))
    wv = np.flatnonzero(((g.pu == v) & (g.pv == w)) | ((g.pu == w) & (g.pv == v)))
    if w in (u, v) or len(wu) == 0 or len(wv) == 0:
        raise InvalidInputError("w must be a common neighbour of u and v")
    lo, hi = min(u, v), max(u, v)
    return _merge_vertices(g, lo, hi, int(wu[0]))


# -- non-backtracking structure -----------------------------------------

@dataclass(frozen=True)
class NonBacktrackingGraph:
    """Directed graph on directed edges; ``matrix[e1, e2] = 1`` iff e1 e2 is irreducible."""

    graph: LabeledGraph
    matrix: sp.csr_matrix

    @property
    def num_nodes(self) -> int:
        return self.matrix.shape[0]

    def out_degrees(self) -> np.ndarray:
        return np.diff(self.matrix.indptr)


def nonbacktracking(g: LabeledGraph) -> NonBacktrackingGraph:
    m = g.num_directed
    order_ = np.argsort(g.tail, kind="stable")
    ptr = np.concatenate(([0], np.cumsum(np.bincount(g.tail, minlength=g.n))))
    lens = g.degrees[g.head]
    rows = np.repeat(np.arange(m), lens)
    starts = np.repeat(ptr[g.head], lens)
    within = np.arange(lens.sum()) - np.repeat(np.cumsum(lens) - lens, lens)
    cols = order_[starts + within] if m else np.zeros(0, dtype=np.int64)
    keep = cols != g.opp[rows]
    rows, cols = rows[keep], cols[keep]
    mat = sp.csr_matrix((np.ones(len(rows), dtype=np.int64), (rows, cols)), shape=(m, m))
    return NonBacktrackingGraph(g, mat)


def perron_value(mat: sp.spmatrix, tol: float = 1e-10, max_iter: int = 100_000) -> float:
    """Perron value of a nonnegative square matrix, max over strong components.

    Each nontrivial strong component is handled by power iteration on M + I
    with Collatz-Wielandt bounds as the stopping rule.
    """
    mat = sp.csr_matrix(mat)
    if mat.shape[0] == 0 or mat.nnz == 0:
        return 0.0
    ncomp, comp = connected_components(mat, directed=True, connection="strong")
    best = 0.0
    for c in range(ncomp):
        idx = np.flatnonzero(comp == c)
        sub = mat[idx][:, idx]
        if sub.nnz == 0:
            continue
        outdeg = np.diff(sub.indptr)
        if np.all(outdeg == 1) and np.all(sub.data == 1):
            best = max(best, 1.0)  # a single directed cycle
            continue
        best = max(best, _power_iteration(sub, tol, max_iter))
    return best


def _power_iteration(sub: sp.csr_matrix, tol: float, max_iter: int) -> float:
    shifted = (sub + sp.identity(sub.shape[0], format="csr", dtype=sub.dtype)).astype(float)
    x = np.ones(sub.shape[0])
    for _ in range(max_iter):
        y = shifted @ x
        ratio = y / x
        lo, hi = ratio.min(), ratio.max()
        if hi - lo <= tol * hi:
            return 0.5 * (lo + hi) - 1.0
        x = y / y.max()
    raise ConvergenceError(f"power iteration did not converge in {max_iter} steps")


def lambda_irred(g: LabeledGraph, tol: float = 1e-10, max_iter: int = 100_000) -> float:
    """Perron value of the non-backtracking graph (0 for a forest)."""
    return perron_value(nonbacktracking(g).matrix, tol=tol, max_iter=max_iter)


def has_cycle(g: LabeledGraph) -> bool:
    """True unless every component is a tree (loops count as cycles)."""
    if g.num_pairs == 0:
        return False
    k, _ = connected_components(g.adjacency(sparse=True), directed=False)
    return g.num_pairs > g.n - k


def lambda_irred_ihara(g: LabeledGraph) -> float:
    """Largest real root mu of det(mu^2 I - mu A + (D - I)) = 0.

    Equivalently 1/y for the smallest positive root y of
    det(I - yA + y^2 (D - I)); loopless graphs only.
    """
    if np.any(g.ploop != 0):
        raise InvalidInputError("the quadratic identity is only used for loopless graphs")
    if not has_cycle(g):
        raise InvalidInputError("graph has no cycle")
    a = g.adjacency().astype(float)
    n = g.n
    dm = np.diag(g.degrees.astype(float)) - np.eye(n)
    comp = np.block([[a, -dm], [np.eye(n), np.zeros((n, n))]])
    ev = np.linalg.eigvals(comp)
    scale = max(1.0, float(np.abs(ev).max()))
    real = ev.real[np.abs(ev.imag) <= 1e-7 * scale]
    return float(real.max())


def is_loopy(g: LabeledGraph) -> bool:
    """Connected graph with |E| >= |V| (loops counted once)."""
    return g.num_pairs >= g.n


def _components_loopy(g: LabeledGraph) -> bool:
    k, comp = connected_components(g.adjacency(sparse=True), directed=False)
    vcount = np.bincount(comp, minlength=k)
    ecount = np.bincount(comp[g.pu], minlength=k) if g.num_pairs else np.zeros(k, int)
    return bool(np.all(ecount >= vcount))


def is_one_loopy(g: LabeledGraph) -> tuple[bool, bool, bool]:
    """The three equivalent conditions for a connected graph.

    Returns (1-loopy, non-backtracking graph strongly connected,
    not a cycle and minimum degree >= 2).
    """
    if g.n == 0 or not g.is_connected():
        raise InvalidInputError("is_one_loopy needs a connected graph")
    one_loopy = is_loopy(g) and all(
        _components_loopy(g.subgraph_pairs(np.delete(np.arange(g.num_pairs), p)))
        for p in range(g.num_pairs))

    nb = nonbacktracking(g)
    if nb.num_nodes == 0:
        strong = False
    else:
        k, _ = connected_components(nb.matrix, directed=True, connection="strong")
        strong = k == 1 and (nb.num_nodes > 1 or nb.matrix.nnz > 0)

    deg = g.degrees
    is_cycle = bool(np.all(deg == 2)) and g.num_pairs == g.n
    cond3 = (not is_cycle) and bool(deg.min() >= 2)
    return one_loopy, strong, cond3
