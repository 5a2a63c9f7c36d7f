"""Label-preserving inclusions of a small pattern graph into a host graph.

An inclusion is an injective map on vertices together with an injective
map on edge pairs that respects endpoints, loop kinds, labels and the
pairing of directed edges.  Two engines are provided:

* a vectorised label-following engine for label-deterministic graphs
  (every vertex has at most one outgoing edge per generator letter), where
  the image of one anchor vertex fixes the whole inclusion;
* a backtracking engine for everything else (unlabeled or repeated labels).
"""
from __future__ import annotations

from collections import Counter, defaultdict
from math import perm as falling

import numpy as np

from .graph import LabeledGraph

_WHOLE, _HALF = 1, 2


def _bfs_tree(t: LabeledGraph):
    """BFS order from vertex 0 plus (parent, directed edge) for each vertex."""
    out = defaultdict(list)
    for e in range(t.num_directed):
        out[int(t.tail[e])].append(e)
    parent = {0: (None, None)}
    order = [0]
    i = 0
    while i < len(order):
        a = order[i]
        i += 1
        for e in out[a]:
            b = int(t.head[e])
            if b not in parent:
                parent[b] = (a, e)
                order.append(b)
    if len(order) != t.n:
        raise ValueError("pattern graph must be connected")
    return order, parent


def _fast_images(t: LabeledGraph, g: LabeledGraph) -> np.ndarray | None:
    """Images of all pattern vertices for every anchor, or None if not applicable.

    Returns an array ``img`` of shape (t.n, k) holding one column per valid
    anchor.  Only usable when both graphs are label-deterministic.
    """
    succ = g.successor_table
    if succ is None or t.successor_table is None:
        return None
    order, parent = _bfs_tree(t)
    let = t.letters
    if t.num_directed and int(let.max()) >= succ.shape[0]:
        return np.zeros((t.n, 0), dtype=np.int64)
    img = np.full((t.n, g.n), -1, dtype=np.int64)
    img[0] = np.arange(g.n)
    for b in order[1:]:
        a, e = parent[b]
        src = img[a]
        ok = src >= 0
        img[b] = -1
        img[b, ok] = succ[let[e], src[ok]]
    valid = np.all(img >= 0, axis=0)
    for e in range(t.num_directed):
        x, y = int(t.tail[e]), int(t.head[e])
        src = np.where(valid, img[x], 0)
        valid &= succ[let[e], src] == img[y]
    if t.n > 1:
        cols = np.sort(img[:, valid], axis=0)
        distinct = np.all(np.diff(cols, axis=0) != 0, axis=0)
        idx = np.flatnonzero(valid)
        valid[idx[~distinct]] = False
    return img[:, valid]


def _pair_key(u, v, code, loop):
    """Orientation-free signature of an edge pair after mapping its endpoints."""
    if loop == _HALF:
        return (u, u, code, loop)
    inv = -1 if code < 0 else 4 * (code // 4) + (1, 0, 2, 3)[code % 4]
    return min((u, v, code, loop), (v, u, inv, loop))


def _flip_factor(code, loop) -> int:
    """Ways to map a pair onto an equal-signature pair (2 for symmetric whole-loops)."""
    if loop != _WHOLE:
        return 1
    if code < 0 or code % 4 >= 2:
        return 2
    return 1


class _Host:
    def __init__(self, g: LabeledGraph, pair_ids=None):
        ids = range(g.num_pairs) if pair_ids is None else pair_ids
        self.key_count = Counter()
        self.key_pairs = defaultdict(list)
        self.nbrs = defaultdict(set)  # (vertex, directed code) -> heads
        self.vertices = set()
        for p in ids:
            u, v = int(g.pu[p]), int(g.pv[p])
            code, loop = int(g.plab[p]), int(g.ploop[p])
            key = _pair_key(u, v, code, loop)
            self.key_count[key] += 1
            self.key_pairs[key].append(p)
            self.vertices.update((u, v))
            self.nbrs[(u, code)].add(v)
            if loop != _HALF:
                inv = -1 if code < 0 else 4 * (code // 4) + (1, 0, 2, 3)[code % 4]
                self.nbrs[(v, inv)].add(u)


def _iter_vertex_maps(t: LabeledGraph, host: _Host, anchors=None):
    """Yield (vertex map, needed pair keys) for every consistent vertex map."""
    order, parent = _bfs_tree(t)
    tp = [(int(t.pu[p]), int(t.pv[p]), int(t.plab[p]), int(t.ploop[p]))
          for p in range(t.num_pairs)]
    by_vertex = defaultdict(list)
    pos = {v: i for i, v in enumerate(order)}
    for idx, (u, v, _, _) in enumerate(tp):
        later = u if pos[u] >= pos[v] else v
        by_vertex[later].append(idx)
    psi = {}
    used = set()
    need = Counter()

    def rec(i):
        if i == len(order):
            yield dict(psi), need
            return
        b = order[i]
        if i == 0:
            cands = sorted(host.vertices) if anchors is None else anchors
        else:
            a, e = parent[b]
            cands = sorted(host.nbrs.get((psi[a], int(t.dlab[e])), ()))
        for x in cands:
            if x in used:
                continue
            psi[b] = x
            used.add(x)
            added = []
            ok = True
            for idx in by_vertex[b]:
                u, v, code, loop = tp[idx]
                key = _pair_key(psi[u], psi[v], code, loop)
                need[key] += 1
                added.append(key)
                if need[key] > host.key_count.get(key, 0):
                    ok = False
                    break
            if ok:
                yield from rec(i + 1)
            for key in added:
                need[key] -= 1
            used.discard(x)
            del psi[b]

    yield from rec(0)


def _edge_injections(t: LabeledGraph, need: Counter, host: _Host) -> int:
    total = 1
    for key, k in need.items():
        if k == 0:
            continue
        total *= falling(host.key_count[key], k) * _flip_factor(key[2], key[3]) ** k
    return total


def count_inclusions(t: LabeledGraph, g: LabeledGraph, pair_ids=None) -> int:
    """Number of label-preserving inclusions of pattern ``t`` into ``g``.

    ``pair_ids`` restricts the host to a subset of its edge pairs (the
    host vertices are then the endpoints of those pairs).
    """
    if t.n == 0:
        return 1
    if pair_ids is None:
        fast = _fast_images(t, g)
        if fast is not None:
            return int(fast.shape[1])
    host = _Host(g, pair_ids)
    return sum(_edge_injections(t, need, host) for _, need in _iter_vertex_maps(t, host))


def contains(t: LabeledGraph, g: LabeledGraph, pair_ids=None) -> bool:
    """Whether at least one inclusion of ``t`` into (a part of) ``g`` exists."""
    if pair_ids is not None and len(pair_ids) < t.num_pairs:
        return False
    host = _Host(g, pair_ids)
    for _ in _iter_vertex_maps(t, host):
        return True
    return False


def find_inclusion(t: LabeledGraph, g: LabeledGraph):
    """One inclusion as (vertex map array, host pair id per pattern pair), or None."""
    fast = _fast_images(t, g)
    if fast is not None:
        if fast.shape[1] == 0:
            return None
        img = fast[:, 0]
        etab = g.edge_table
        pairs = []
        for p in range(t.num_pairs):
            e = int(t.first_edge[p])
            he = etab[t.letters[e], img[t.tail[e]]]
            pairs.append(int(g.pair_of[he]))
        return img.copy(), np.array(pairs, dtype=np.int64)
    host = _Host(g)
    for psi, _ in _iter_vertex_maps(t, host):
        img = np.array([psi[v] for v in range(t.n)], dtype=np.int64)
        taken = defaultdict(int)
        pairs = []
        for p in range(t.num_pairs):
            key = _pair_key(int(img[t.pu[p]]), int(img[t.pv[p]]), int(t.plab[p]), int(t.ploop[p]))
            pairs.append(host.key_pairs[key][taken[key]])
            taken[key] += 1
        return img, np.array(pairs, dtype=np.int64)
    return None
