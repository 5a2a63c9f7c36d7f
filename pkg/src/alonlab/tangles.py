"""Tangles: small labeled graphs that can occur in a random model.

A tangle is *supercritical* when its irreducible growth rate reaches
sqrt(d-1), *hypercritical* when it exceeds it.  tau_fund is the smallest
order |E| - |V| of a supercritical tangle feasible for the model.
"""
from __future__ import annotations

import itertools
import json
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from importlib import resources
from math import isqrt, sqrt

import numpy as np

from .errors import BudgetError, InvalidInputError
from .graph import (LabeledGraph, build_graph, graph_from_dict, graph_to_dict, halfloop,
                    lambda_irred, match, nonbacktracking, order, perm, prune_completely)
from .matching import count_inclusions, find_inclusion
from .models import check_model, graph_from_generators, max_workers, rng_for, sample_generators

CRITICAL_TOL = 1e-9


@dataclass(frozen=True)
class Tangle:
    graph: LabeledGraph
    model: str

    def __post_init__(self):
        object.__setattr__(self, "model", self.model.lower())
        if not self.graph.is_connected() or self.graph.n == 0:
            raise InvalidInputError("a tangle is a nonempty connected graph")


# -- feasibility --------------------------------------------------------

def feasibility_problem(g: LabeledGraph, model: str, d: int) -> str | None:
    """Why ``g`` cannot occur in the model with degree d (None if it can)."""
    model = model.lower()
    kinds = {int(c) % 4 for c in g.plab}
    if np.any(g.plab < 0):
        return "unlabeled edge"
    js = g.plab // 4 + 1
    if np.any(g.degrees > d):
        return "degree exceeds d"
    if model in "gh":
        if kinds - {0, 1}:
            return "permutation models use perm labels"
        if js.size and js.max() > d // 2:
            return "generator index exceeds d/2"
        if model == "h" and np.any(g.ploop != 0):
            return "model H has no loops"
    else:
        if kinds - {2, 3}:
            return "matching models use match/halfloop labels"
        if js.size and js.max() > d:
            return "generator index exceeds d"
        if np.any(g.ploop == 1):
            return "matching models have no whole-loops"
        if model == "i" and np.any(g.ploop == 2):
            return "model I has no half-loops"
        half_j = js[g.ploop == 2]
        if len(set(half_j.tolist())) != len(half_j):
            return "two half-loops with the same generator"
        if np.any((g.ploop == 2) & (g.plab % 4 != 3)) or np.any((g.ploop == 0) & (g.plab % 4 == 3)):
            return "halfloop labels belong on half-loops"
    if g.successor_table is None:
        return "some generator is not a partial injection"
    if model == "h":
        succ = g.successor_table
        for j in range(d // 2):
            row = 3 * j
            if row >= succ.shape[0]:
                break
            for start in range(g.n):
                x, steps = succ[row, start], 0
                while x >= 0 and x != start and steps <= g.n:
                    x, steps = succ[row, x], steps + 1
                if x == start:
                    return "generator edges close a cycle"
    return None


def check_tangle(t: Tangle, d: int) -> None:
    why = feasibility_problem(t.graph, t.model, d)
    if why:
        raise InvalidInputError(f"infeasible tangle for model {t.model.upper()}: {why}")


# -- classification -----------------------------------------------------

@dataclass(frozen=True)
class Criticality:
    kind: str            # subcritical | critical | hypercritical
    value: float         # lambda_irred of the complete pruning
    threshold: float     # sqrt(d-1)
    exact: bool

    @property
    def supercritical(self) -> bool:
        return self.kind != "subcritical"

    @property
    def hypercritical(self) -> bool:
        return self.kind == "hypercritical"


def exact_lambda_irred(g: LabeledGraph) -> int | None:
    """Integer lambda_irred for loop bouquets (2m-1) and parallel pairs (m-1)."""
    if g.n == 1 and g.num_pairs and np.all(g.ploop == 1):
        return 2 * g.num_pairs - 1
    if g.n == 2 and g.num_pairs and np.all(g.ploop == 0):
        return g.num_pairs - 1
    return None


def classify_graph(g: LabeledGraph, d: float) -> Criticality:
    p = prune_completely(g)
    thr = sqrt(d - 1)
    lam = exact_lambda_irred(p)
    if lam is not None:
        sq = lam * lam
        if float(d - 1).is_integer():
            diff = sq - int(d - 1)
        else:
            diff = sq - (d - 1)
        kind = "critical" if diff == 0 else ("hypercritical" if diff > 0 else "subcritical")
        return Criticality(kind, float(lam), thr, True)
    val = lambda_irred(p)
    if abs(val - thr) <= CRITICAL_TOL:
        warnings.warn(f"lambda_irred = {val} is within {CRITICAL_TOL} of sqrt(d-1); "
                      "reported as critical", RuntimeWarning)
        kind = "critical"
    else:
        kind = "hypercritical" if val > thr else "subcritical"
    return Criticality(kind, val, thr, False)


def classify(t: Tangle, d: float) -> Criticality:
    if float(d).is_integer():
        check_tangle(t, int(d))
    return classify_graph(t.graph, d)


# -- witnesses and tau_fund ----------------------------------------------

def tau_fund_value(model: str, d: int) -> int:
    model = model.lower()
    r = isqrt(d - 1)
    root_ceil = r if r * r == d - 1 else r + 1          # ceil(sqrt(d-1)), exactly
    if model == "g":
        # ceil((sqrt(d-1)+1)/2) - 1 = smallest tau with 2 tau + 1 >= sqrt(d-1)
        tau = 0
        while (2 * tau + 1) ** 2 < d - 1:
            tau += 1
        return tau
    return root_ceil - 1


def g_bouquet(m: int) -> LabeledGraph:
    return build_graph(1, [(0, 0, perm(j), "whole") for j in range(1, m + 1)])


def parallel_tangle(model: str, m: int) -> LabeledGraph:
    lab = perm if model in "gh" else match
    return build_graph(2, [(0, 1, lab(j)) for j in range(1, m + 1)])


def h_chain_d4() -> LabeledGraph:
    return build_graph(3, [(0, 1, perm(1)), (0, 1, perm(2)), (1, 2, perm(1)), (1, 2, perm(2))])


def h_tangle_d6() -> LabeledGraph:
    return build_graph(3, [(0, 1, perm(1)), (0, 1, perm(2)), (0, 1, perm(3)),
                           (1, 2, perm(1)), (1, 2, perm(2))])


def witness(model: str, d: int) -> Tangle:
    model = model.lower()
    tau = tau_fund_value(model, d)
    if model == "g":
        return Tangle(g_bouquet(tau + 1), "g")
    if model == "h" and d == 4:
        return Tangle(h_chain_d4(), "h")
    if model == "h" and d == 6:
        return Tangle(h_tangle_d6(), "h")
    return Tangle(parallel_tangle(model, tau + 2), model)


def tau_fund(model: str, d: int) -> tuple[int, Tangle]:
    """tau_fund and a supercritical witness of that order, re-verified."""
    model = model.lower()
    check_model(model, 2 * d + (1 if model == "j" else 0), d)
    tau = tau_fund_value(model, d)
    t = witness(model, d)
    crit = classify(t, d)
    if order(t.graph) != tau or not crit.supercritical:
        raise AssertionError(f"witness for ({model}, {d}) failed to verify: "
                             f"order {order(t.graph)}, {crit}")
    return tau, t


def load_bundled_witnesses() -> dict:
    """Named tangles shipped with the package: name -> (Tangle, d or None)."""
    text = resources.files("alonlab").joinpath("data/witnesses.json").read_text()
    out = {}
    for item in json.loads(text):
        out[item["name"]] = (Tangle(graph_from_dict(item["graph"]), item["model"]), item.get("d"))
    return out


def bundled_witness_records() -> list[dict]:
    """The records written to the bundled data file."""
    items = [
        ("g_bouquet_2", "g", 4, g_bouquet(2)),
        ("g_bouquet_3", "g", 6, g_bouquet(3)),
        ("h_chain_d4", "h", 4, h_chain_d4()),
        ("h_tangle_d6", "h", 6, h_tangle_d6()),
        ("h_parallel_4", "h", 8, parallel_tangle("h", 4)),
        ("i_parallel_3", "i", 3, parallel_tangle("i", 3)),
        ("j_parallel_3", "j", 3, parallel_tangle("j", 3)),
    ]
    recs = []
    for name, model, d, g in items:
        obj = graph_to_dict(g)
        obj["model"] = model
        recs.append({"name": name, "model": model, "d": d, "graph": obj})
    return recs


# -- bounded search ------------------------------------------------------

def _slots(nv: int, model: str):
    slots = [(u, v, "normal") for u in range(nv) for v in range(u + 1, nv)]
    if model == "g":
        slots += [(v, v, "whole") for v in range(nv)]
    if model == "j":
        slots += [(v, v, "half") for v in range(nv)]
    return slots


def _canonical(nv, edges):
    best = None
    for p in itertools.permutations(range(nv)):
        enc = tuple(sorted((min(p[u], p[v]), max(p[u], p[v]), k) for u, v, k in edges))
        if best is None or enc < best:
            best = enc
    return best


def _find_labeling(nv, edges, model, d):
    """Backtracking search for a feasible labeling; returns the label list or None."""
    ngen = d // 2 if model in "gh" else d
    out_used = [set() for _ in range(ngen)]
    in_used = [set() for _ in range(ngen)]
    half_used = [False] * ngen
    labels = []

    def h_acyclic(j):
        nxt = {}
        for (u, v, _), lab in zip(edges, labels):
            if lab[0] == j:
                a, b = (u, v) if lab[1] else (v, u)
                nxt[a] = b
        for s in nxt:
            x, steps = nxt.get(s), 0
            while x is not None and x != s and steps <= nv:
                x, steps = nxt.get(x), steps + 1
            if x == s:
                return False
        return True

    def rec(i, max_j):
        if i == len(edges):
            return True
        u, v, kind = edges[i]
        for j in range(min(ngen, max_j + 2)):
            if model in "gh":
                orients = [True] if kind == "whole" else [True, False]
                for fwd in orients:
                    a, b = (u, v) if fwd else (v, u)
                    if a in out_used[j] or b in in_used[j]:
                        continue
                    out_used[j].add(a)
                    in_used[j].add(b)
                    labels.append((j, fwd))
                    if (model != "h" or h_acyclic(j)) and rec(i + 1, max(max_j, j)):
                        return True
                    labels.pop()
                    out_used[j].discard(a)
                    in_used[j].discard(b)
            else:
                if kind == "half":
                    if half_used[j] or u in out_used[j]:
                        continue
                    half_used[j] = True
                    out_used[j].add(u)
                    labels.append((j, True))
                    if rec(i + 1, max(max_j, j)):
                        return True
                    labels.pop()
                    out_used[j].discard(u)
                    half_used[j] = False
                else:
                    if u in out_used[j] or v in out_used[j]:
                        continue
                    out_used[j].update((u, v))
                    labels.append((j, True))
                    if rec(i + 1, max(max_j, j)):
                        return True
                    labels.pop()
                    out_used[j].difference_update((u, v))
        return False

    return list(labels) if rec(0, -1) else None


def _labeled_graph(nv, edges, labs, model):
    spec = []
    for (u, v, kind), (j, fwd) in zip(edges, labs):
        if model in "gh":
            a, b = (u, v) if fwd else (v, u)
            spec.append((a, b, perm(j + 1), kind))
        else:
            lab = halfloop(j + 1) if kind == "half" else match(j + 1)
            spec.append((u, v, lab, kind))
    return build_graph(nv, spec)


@dataclass
class SearchReport:
    model: str
    d: int
    tau: int
    v_max: int
    examined: int
    feasible: int
    max_lambda: float
    supercritical: list
    passed: bool


def bounded_minimality_search(model: str, d: int, tau: int, v_max: int) -> SearchReport:
    """Look for supercritical pruned tangles of order < tau on <= v_max vertices.

    Underlying multigraphs are enumerated up to isomorphism; each one that
    admits a feasible labeling is classified (lambda_irred does not depend
    on the labels).  Finding none is evidence, not proof, that tau is minimal.
    """
    model = model.lower()
    if v_max > 4:
        raise BudgetError("bounded search is limited to v_max <= 4")
    seen = set()
    examined = feasible = 0
    best = 0.0
    bad = []
    thr2 = d - 1
    for nv in range(1, v_max + 1):
        slots = _slots(nv, model)
        for ne in range(nv, nv + tau):
            for combo in itertools.combinations_with_replacement(range(len(slots)), ne):
                edges = [slots[c] for c in combo]
                deg = [0] * nv
                for u, v, kind in edges:
                    if kind == "normal":
                        deg[u] += 1
                        deg[v] += 1
                    else:
                        deg[u] += 2 if kind == "whole" else 1
                if min(deg) < 2 or max(deg) > d:
                    continue
                g0 = build_graph(nv, [(u, v, None, k) for u, v, k in edges])
                if not g0.is_connected():
                    continue
                key = _canonical(nv, edges)
                if key in seen:
                    continue
                seen.add(key)
                examined += 1
                labs = _find_labeling(nv, edges, model, d)
                if labs is None:
                    continue
                feasible += 1
                lam = lambda_irred(g0)
                best = max(best, lam)
                if lam * lam >= thr2 - 1e-9:
                    bad.append(Tangle(_labeled_graph(nv, edges, labs, model), model))
    return SearchReport(model, d, tau, v_max, examined, feasible, best, bad, not bad)


# -- occurrences and automorphisms --------------------------------------

def automorphism_count(t: Tangle) -> int:
    return count_inclusions(t.graph, t.graph)


def count_occurrences(g: LabeledGraph, t: Tangle) -> int:
    return count_inclusions(t.graph, g)


def _sample_counts(args):
    model, n, d, tgraph, seed, a, b = args
    return [count_inclusions(tgraph, graph_from_generators(
        model, sample_generators(model, n, d, rng_for(seed, i)), d)) for i in range(a, b)]


def occurrence_counts(t: Tangle, n: int, d: int, samples: int, seed: int = 0,
                      workers: int | None = None) -> np.ndarray:
    """Occurrences of ``t`` in ``samples`` independent draws (sample i uses stream i)."""
    model = check_model(t.model, n, d)
    w = max_workers(workers)
    bounds = np.linspace(0, samples, min(samples, 16 * w) + 1).astype(int)
    tasks = [(model, n, d, t.graph, seed, a, b) for a, b in zip(bounds, bounds[1:])]
    if w == 1:
        chunks = map(_sample_counts, tasks)
        return np.array([c for chunk in chunks for c in chunk], dtype=np.int64)
    with ProcessPoolExecutor(max_workers=w) as ex:
        chunks = list(ex.map(_sample_counts, tasks))
    return np.array([c for chunk in chunks for c in chunk], dtype=np.int64)


def mean_occurrences(t: Tangle, n: int, d: int, samples: int, seed: int = 0,
                     workers: int | None = None) -> tuple[float, float]:
    """Monte Carlo mean and standard error of occurrences of ``t`` in the model."""
    counts = occurrence_counts(t, n, d, samples, seed, workers)
    se = counts.std(ddof=1) / np.sqrt(samples) if samples > 1 else float("nan")
    return float(counts.mean()), float(se)


# -- eigenvalue certificate ---------------------------------------------

@dataclass
class Certificate:
    bound: float
    radius_used: int
    rayleigh_tangle: float
    rayleigh_complement: float


def _ball_vector(t: LabeledGraph, d: int, r: int):
    """Perron vector of Tree_d(t) truncated at depth r, in radial coordinates.

    Returns (mu, f0, f) where f0[v] is the value on tangle vertex v and
    f[v][j-1] the (common) value on each depth-j vertex of the trees hung
    at v.  The radial reduction is exact: the Perron vector of the ball is
    constant on every level of every hanging tree.
    """
    nt = t.n
    c = d - t.degrees
    chains = [v for v in range(nt) if c[v] > 0]
    size = nt + len(chains) * r
    m = np.zeros((size, size))
    m[:nt, :nt] = t.adjacency().astype(float)
    idx = {}
    k = nt
    for v in chains:
        for j in range(1, r + 1):
            idx[(v, j)] = k
            k += 1
        if r >= 1:
            a, b = v, idx[(v, 1)]
            m[a, b] = m[b, a] = np.sqrt(c[v])
        for j in range(2, r + 1):
            a, b = idx[(v, j - 1)], idx[(v, j)]
            m[a, b] = m[b, a] = np.sqrt(d - 1)
    w, vecs = np.linalg.eigh(m)
    phi = np.abs(vecs[:, -1])
    f0 = phi[:nt]
    f = {}
    for v in chains:
        f[v] = np.array([phi[idx[(v, j)]] / np.sqrt(c[v] * (d - 1) ** (j - 1))
                         for j in range(1, r + 1)])
    return float(w[-1]), f0, f


def _rayleigh(a, x) -> float:
    return float(x @ (a @ x) / (x @ x))


def certificate_detail(g: LabeledGraph, t: Tangle, radius: int) -> Certificate:
    """Certified lower bound on lambda_2(g) from an occurrence of ``t``.

    A Dirichlet eigenvector on the radius-r ball of Tree_d(t) is pushed
    to g through the covering map at the occurrence, giving u with
    R(u) >= the ball eigenvalue.  Any w orthogonal to both u and Au then
    gives lambda_2 >= min(R(u), R(w)).  Two choices of w are tried: the
    indicator of the vertices at distance >= 2 from supp(u), and the
    constant vector projected off span(u, Au).  The best bound over
    radii 0..radius is returned.
    """
    d = g.regular_degree()
    if d is None:
        raise InvalidInputError("certificates need a regular host graph")
    found = find_inclusion(t.graph, g)
    if found is None:
        raise InvalidInputError("the tangle does not occur in g")
    img, pairs = found
    a = g.adjacency(sparse=True).astype(float)
    bt = nonbacktracking(g).matrix.T.tocsr().astype(float)
    in_image = np.zeros(g.num_pairs, dtype=bool)
    in_image[pairs] = True
    tg = t.graph
    c = d - tg.degrees
    # walk counts of the hanging trees, aggregated by host vertex
    reach = {}
    for v in range(tg.n):
        if c[v] <= 0:
            continue
        start = (g.tail == img[v]) & ~in_image[g.pair_of]
        if start.sum() != c[v]:
            raise InvalidInputError("host degree does not match d at the occurrence")
        w = start.astype(float)
        levels = []
        for _ in range(radius):
            levels.append(np.bincount(g.head, weights=w, minlength=g.n))
            w = bt @ w
        reach[v] = levels
    ones = np.ones(g.n)
    best = Certificate(-np.inf, 0, np.nan, np.nan)
    for r in range(radius + 1):
        _, f0, f = _ball_vector(tg, d, r)
        u = np.zeros(g.n)
        np.add.at(u, img, f0)
        for v, vals in f.items():
            for j in range(r):
                u += vals[j] * reach[v][j]
        ru = _rayleigh(a, u)
        au = a @ u
        others = []
        supp = u > 0
        near = supp | (a @ supp.astype(float) > 0)
        h = (~near).astype(float)
        if h.sum() > 0:
            others.append(_rayleigh(a, h))
        q, rr = np.linalg.qr(np.column_stack([u, au]))
        keep = np.abs(np.diag(rr)) > 1e-12 * np.abs(rr).max()
        q = q[:, keep]
        proj = ones - q @ (q.T @ ones)
        if proj @ proj > 1e-9 * g.n:
            others.append(_rayleigh(a, proj))
        if not others:
            continue
        ro = max(others)
        bound = min(ru, ro)
        if bound > best.bound:
            best = Certificate(bound, r, ru, ro)
    if not np.isfinite(best.bound):
        raise InvalidInputError("no vector orthogonal to the certificate could be formed")
    return best


def lambda2_certificate(g: LabeledGraph, t: Tangle, radius: int) -> float:
    return certificate_detail(g, t, radius).bound
