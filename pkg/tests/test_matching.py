import networkx as nx
import numpy as np
import pytest
from networkx.algorithms.isomorphism import GraphMatcher

from alonlab.graph import bouquet, build_graph, complete_graph, cycle_graph, match, multi_edge, perm
from alonlab.matching import contains, count_inclusions, find_inclusion
from alonlab.models import sample


def _from_nx(g):
    idx = {v: i for i, v in enumerate(g.nodes())}
    return build_graph(g.number_of_nodes(), [(idx[u], idx[v], None) for u, v in g.edges()])


@pytest.mark.parametrize("g", [nx.complete_graph(4), nx.petersen_graph(), nx.cycle_graph(6),
                               nx.path_graph(5), nx.star_graph(4), nx.cubical_graph()])
def test_automorphisms_match_networkx(g):
    expected = sum(1 for _ in GraphMatcher(g, g).isomorphisms_iter())
    lg = _from_nx(g)
    assert count_inclusions(lg, lg) == expected


def test_inclusions_match_networkx_monomorphisms():
    rng = np.random.default_rng(0)
    patterns = [nx.cycle_graph(3), nx.cycle_graph(4), nx.path_graph(3), nx.complete_graph(4)]
    for seed in range(8):
        host = nx.gnm_random_graph(8, 14, seed=int(rng.integers(10**6)))
        for pat in patterns:
            expected = sum(1 for _ in GraphMatcher(host, pat).subgraph_monomorphisms_iter())
            assert count_inclusions(_from_nx(pat), _from_nx(host)) == expected


def test_labeled_automorphism_examples():
    assert count_inclusions(bouquet(2, [perm(1), perm(2)]), bouquet(2, [perm(1), perm(2)])) == 1
    c3 = cycle_graph(3, perm(1))
    assert count_inclusions(c3, c3) == 3
    i2 = multi_edge(2, [match(1), match(2)])
    assert count_inclusions(i2, i2) == 2
    # unlabeled whole-loops can be mapped in either direction
    assert count_inclusions(bouquet(2), bouquet(2)) == 8


def test_fast_and_slow_paths_agree():
    t = bouquet(2, [perm(1), perm(2)])
    path = build_graph(3, [(0, 1, perm(1)), (1, 2, perm(2))])
    for i in range(20):
        g = sample("g", 12, 4, seed=1, index=i)
        every = list(range(g.num_pairs))
        assert count_inclusions(t, g) == count_inclusions(t, g, every)
        assert count_inclusions(path, g) == count_inclusions(path, g, every)


def test_bouquet_occurrences_are_common_fixed_points():
    t = bouquet(2, [perm(1), perm(2)])
    for i in range(30):
        g = sample("g", 5, 4, seed=2, index=i)
        fixed = sum(1 for v in range(g.n)
                    if np.sum((g.pu == v) & (g.pv == v)) == 2)
        assert count_inclusions(t, g) == fixed


def test_find_inclusion_is_consistent():
    k4 = complete_graph(4)
    img, pairs = find_inclusion(cycle_graph(3), k4)
    assert len(set(img.tolist())) == 3 and len(set(pairs.tolist())) == 3
    assert contains(cycle_graph(3), k4)
    assert not contains(cycle_graph(5), k4)
    assert find_inclusion(cycle_graph(5), k4) is None
