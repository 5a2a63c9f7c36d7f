import numpy as np
import pytest

from alonlab.graph import build_graph


def random_multigraph(rng, n, m, loops=False, connected=True):
    """A random unlabeled multigraph on n vertices with m extra edges.

    With ``connected`` a random spanning tree is laid down first.
    """
    spec = []
    if connected:
        for v in range(1, n):
            spec.append((int(rng.integers(v)), v, None))
    for _ in range(m):
        u, v = (int(x) for x in rng.integers(n, size=2))
        if u == v:
            if loops:
                spec.append((u, u, None, "whole"))
            continue
        spec.append((u, v, None))
    return build_graph(n, spec)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_vlg(rng, n_max=5, directed=None, max_len=4):
    """A random all-monomial VLG with at least one cycle."""
    from alonlab.vlg import VLG, Monomial, VLGEdge

    while True:
        n = int(rng.integers(1, n_max + 1))
        is_dir = bool(rng.integers(2)) if directed is None else directed
        m = int(rng.integers(1, 2 * n + 2))
        edges = []
        for _ in range(m):
            u, v = (int(x) for x in rng.integers(n, size=2))
            edges.append(VLGEdge(u, v, Monomial(int(rng.integers(1, max_len + 1)))))
        g = VLG(n, tuple(edges), is_dir)
        if g.has_cycle():
            return g


def random_tangle_graph(rng, n_max=5, max_deg=4):
    """A random connected unlabeled multigraph with a cycle and degrees <= max_deg."""
    while True:
        n = int(rng.integers(1, n_max + 1))
        g = random_multigraph(rng, n, int(rng.integers(1, 2 * n + 1)), loops=True)
        if g.num_pairs >= g.n and g.degrees.max() <= max_deg:
            return g
