import json

import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from alonlab.errors import InvalidInputError
from alonlab.graph import (Label, bouquet, build_graph, complete_graph, contract_distance_two,
                           contract_edge, cycle_graph, graph_from_dict, graph_to_dict, halfloop,
                           is_one_loopy, lambda_irred, lambda_irred_ihara, load_graph, match,
                           multi_edge, nonbacktracking, order, path_graph, perm, perm_inv,
                           prune_completely, save_graph)

from conftest import random_multigraph


def test_label_inverses():
    assert perm(2).inverse() == perm_inv(2)
    assert perm_inv(2).inverse() == perm(2)
    assert match(3).inverse() == match(3)
    assert halfloop(1).inverse() == halfloop(1)
    for lab in (perm(1), perm_inv(4), match(2), halfloop(5)):
        assert Label.from_code(lab.code) == lab


def test_loop_diagonal_conventions():
    g = build_graph(1, [(0, 0, perm(1), "whole")])
    assert g.adjacency()[0, 0] == 2
    h = build_graph(1, [(0, 0, match(1), "half")])
    assert h.adjacency()[0, 0] == 1


def test_degree_violation_rejected():
    with pytest.raises(InvalidInputError):
        build_graph(2, [(0, 1, perm(1), "normal")], d=4)


def test_bad_loop_kinds_rejected():
    with pytest.raises(InvalidInputError):
        build_graph(2, [(0, 1, None, "half")])
    with pytest.raises(InvalidInputError):
        build_graph(2, [(0, 0, None, "normal")])


def test_directed_edges_pair_with_opposites():
    g = build_graph(2, [(0, 1, perm(1)), (0, 0, perm(2), "whole"), (1, 1, match(1), "half")])
    assert g.num_directed == 2 * g.num_pairs - 1
    for e in range(g.num_directed):
        o = g.opp[e]
        assert g.opp[o] == e
        assert g.tail[o] == g.head[e] and g.head[o] == g.tail[e]
        lab, olab = g.label(e), g.label(o)
        assert olab == lab.inverse()
    half = np.flatnonzero(g.opp == np.arange(g.num_directed))
    assert len(half) == 1


def test_json_round_trip(tmp_path):
    g = build_graph(3, [(0, 1, perm(1)), (2, 1, perm_inv(2)), (2, 2, perm(3), "whole")], d=None)
    path = tmp_path / "g.json"
    save_graph(g, path)
    h = load_graph(path)
    # perm_inv edges are written reversed as perm edges, so compare normal forms
    assert graph_to_dict(h) == graph_to_dict(g)
    save_graph(h, tmp_path / "h.json")
    assert load_graph(tmp_path / "h.json").same_as(h)
    obj = json.loads(path.read_text())
    assert all(e["label"]["kind"] != "perm_inv" for e in obj["edges"])
    assert min(min(e["u"], e["v"]) for e in obj["edges"]) == 1
    assert graph_from_dict(graph_to_dict(h)).same_as(h)


def test_prune_examples():
    assert prune_completely(path_graph(3)).n == 1
    assert prune_completely(path_graph(3)).num_pairs == 0
    c5 = cycle_graph(5)
    assert prune_completely(c5).same_as(c5)
    g = build_graph(4, [(0, 1, None), (1, 2, None), (2, 0, None), (2, 3, None)])
    p = prune_completely(g)
    assert (p.n, p.num_pairs) == (3, 3)


def test_contract_examples():
    g = contract_edge(build_graph(2, [(0, 1, None)]), 0)
    assert (g.n, g.num_pairs) == (1, 0)
    h = contract_edge(multi_edge(3), 0)
    assert h.n == 1 and h.num_whole_loops == 2
    with pytest.raises(InvalidInputError):
        contract_edge(bouquet(1), 0)


def test_order_examples():
    assert order(bouquet(2)) == 1
    assert order(cycle_graph(7)) == 0
    assert order(path_graph(5)) == -1


def test_nonbacktracking_examples():
    nb = nonbacktracking(bouquet(1))
    assert nb.num_nodes == 2
    assert nb.matrix.nnz == 2 and nb.matrix.diagonal().sum() == 2
    assert lambda_irred(bouquet(1)) == pytest.approx(1.0)
    half = nonbacktracking(bouquet(0, half=1))
    assert half.num_nodes == 1 and half.matrix.nnz == 0
    k4 = nonbacktracking(complete_graph(4))
    assert k4.num_nodes == 12 and np.all(k4.out_degrees() == 2)


def test_lambda_irred_examples():
    assert lambda_irred(bouquet(2)) == pytest.approx(3.0, abs=1e-9)
    assert lambda_irred(multi_edge(3)) == pytest.approx(2.0, abs=1e-9)
    h6 = build_graph(3, [(0, 1, None)] * 3 + [(1, 2, None)] * 2)
    assert lambda_irred(h6) == pytest.approx(np.sqrt((5 + np.sqrt(57)) / 2), abs=1e-9)
    assert lambda_irred(path_graph(4)) == 0.0


def test_ihara_examples():
    assert lambda_irred_ihara(complete_graph(4)) == pytest.approx(2.0, abs=1e-9)
    assert lambda_irred_ihara(multi_edge(3)) == pytest.approx(2.0, abs=1e-9)
    assert lambda_irred_ihara(cycle_graph(5)) == pytest.approx(1.0, abs=1e-6)
    with pytest.raises(InvalidInputError):
        lambda_irred_ihara(bouquet(2))


def test_one_loopy_examples():
    assert is_one_loopy(complete_graph(4)) == (True, True, True)
    assert is_one_loopy(cycle_graph(6)) == (False, False, False)
    barbell = build_graph(7, [(0, 1, None), (1, 2, None), (2, 0, None), (2, 3, None),
                              (3, 4, None), (4, 5, None), (5, 6, None), (6, 4, None)])
    # the bridge path has degree-2 interior vertices, which the pruned form keeps
    assert is_one_loopy(barbell) == (True, True, True)


def test_degree_sum_convention(rng):
    for _ in range(20):
        g = random_multigraph(rng, 6, 8, loops=True)
        a = g.adjacency()
        assert a.sum() == g.degrees.sum()
        assert np.all(np.asarray(a.sum(axis=1)).ravel() == g.degrees)
        assert g.degrees.sum() == 2 * g.num_pairs - g.num_half_loops


@st.composite
def multigraphs(draw, max_n=8, loops=True):
    n = draw(st.integers(1, max_n))
    m = draw(st.integers(0, 2 * n))
    seed = draw(st.integers(0, 2**32 - 1))
    return random_multigraph(np.random.default_rng(seed), n, m, loops=loops)


@settings(max_examples=60, deadline=None)
@given(multigraphs())
def test_pruning_preserves_order_and_growth(g):
    p = prune_completely(g)
    if g.num_pairs >= g.n:
        assert order(p) == order(g)
    assert lambda_irred(p) == pytest.approx(lambda_irred(g), abs=1e-9)


@settings(max_examples=60, deadline=None)
@given(multigraphs())
def test_contraction_never_decreases_growth(g):
    lam = lambda_irred(g)
    for e in range(g.num_pairs):
        if g.pu[e] != g.pv[e]:
            assert lam <= lambda_irred(contract_edge(g, e)) + 1e-9


@settings(max_examples=60, deadline=None)
@given(multigraphs())
def test_distance_two_identification(g):
    lam = lambda_irred(g)
    adj = g.adjacency()
    for w in range(g.n):
        nbrs = [x for x in np.flatnonzero(adj[w]) if x != w]
        for i, u in enumerate(nbrs):
            for v in nbrs[i + 1:]:
                if adj[u, v] == 0:
                    h = contract_distance_two(g, int(u), int(v), w)
                    assert lam <= lambda_irred(h) + 1e-9


@settings(max_examples=80, deadline=None)
@given(multigraphs(max_n=10, loops=False))
def test_ihara_agrees_on_one_loopy(g):
    if is_one_loopy(g)[0]:
        assert abs(lambda_irred(g) - lambda_irred_ihara(g)) <= 1e-7


def test_one_loopy_conditions_agree(rng):
    for _ in range(1000):
        n = int(rng.integers(1, 11))
        g = random_multigraph(rng, n, int(rng.integers(0, 2 * n)), loops=bool(rng.integers(2)))
        a, b, c = is_one_loopy(g)
        assert a == b == c


def test_pruning_matches_networkx_two_core():
    for seed in range(50):
        sg = nx.gnm_random_graph(9, 10, seed=seed)
        if not nx.is_connected(sg) or nx.is_tree(sg):
            continue
        g = build_graph(9, [(u, v, None) for u, v in sg.edges()])
        core = nx.k_core(sg, 2)
        p = prune_completely(g)
        assert (p.n, p.num_pairs) == (core.number_of_nodes(), core.number_of_edges())
