"""Seeded samplers for the four random d-regular models.

* ``g``: d/2 independent uniform permutations; pi_j(i) = i gives a whole-loop.
* ``h``: d/2 independent uniform permutations with a single n-cycle.
* ``i``: d independent uniform perfect matchings (n even).
* ``j``: d independent near-perfect matchings, the unmatched vertex of each
  getting a half-loop (n odd).

Every sample is addressed by ``(root seed, index)``: the stream seed is
``splitmix64(root ^ index)`` and feeds numpy's PCG64 generator.
"""
from __future__ import annotations

import os

import numpy as np

from .errors import InvalidInputError
from .graph import LabeledGraph, from_arrays

MODELS = ("g", "h", "i", "j")
_MASK64 = (1 << 64) - 1


def splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


def stream_seed(root: int, index: int) -> int:
    return splitmix64((int(root) ^ int(index)) & _MASK64)


def rng_for(root: int, index: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(stream_seed(root, index)))


def max_workers(requested: int | None = None) -> int:
    """Worker count honouring the ALONLAB_THREADS cap."""
    cap = os.environ.get("ALONLAB_THREADS")
    n = requested if requested else (os.cpu_count() or 1)
    if cap:
        n = min(n, max(1, int(cap)))
    return max(1, n)


def check_model(model: str, n: int, d: int) -> str:
    model = model.lower()
    if model not in MODELS:
        raise InvalidInputError(f"unknown model {model!r}")
    if n < 1:
        raise InvalidInputError("n must be positive")
    if model in "gh":
        if d < 4 or d % 2:
            raise InvalidInputError(f"model {model.upper()} needs even d >= 4")
    elif d < 3:
        raise InvalidInputError(f"model {model.upper()} needs d >= 3")
    if model == "i" and n % 2:
        raise InvalidInputError("model I needs n even")
    if model == "j" and n % 2 == 0:
        raise InvalidInputError("model J needs n odd")
    return model


def uniform_single_cycle(n: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform permutation whose cycle decomposition is one n-cycle."""
    if n == 1:
        return np.zeros(1, dtype=np.int64)
    order = np.concatenate(([0], 1 + rng.permutation(n - 1)))
    perm = np.empty(n, dtype=np.int64)
    perm[order] = np.roll(order, -1)
    return perm


def uniform_matching(n: int, rng: np.random.Generator) -> np.ndarray:
    """Involution of a uniform (near-)perfect matching; the odd one out is fixed."""
    order = rng.permutation(n)
    mate = np.arange(n, dtype=np.int64)
    a, b = order[0:n - 1:2], order[1:n:2]
    mate[a] = b
    mate[b] = a
    return mate


def sample_generators(model: str, n: int, d: int, rng: np.random.Generator) -> np.ndarray:
    """Raw generator arrays: shape (d/2, n) for G/H, (d, n) for I/J."""
    if model == "g":
        return np.stack([rng.permutation(n) for _ in range(d // 2)])
    if model == "h":
        return np.stack([uniform_single_cycle(n, rng) for _ in range(d // 2)])
    return np.stack([uniform_matching(n, rng) for _ in range(d)])


def graph_from_generators(model: str, gens: np.ndarray, d: int | None = None) -> LabeledGraph:
    """Assemble the labeled graph from permutation or matching arrays."""
    gens = np.asarray(gens, dtype=np.int64)
    k, n = gens.shape
    x = np.arange(n)
    pu, pv, lab, loop = [], [], [], []
    for j in range(k):
        y = gens[j]
        if model in "gh":
            pu.append(x)
            pv.append(y)
            lab.append(np.full(n, 4 * j + 0))
            loop.append(np.where(x == y, 1, 0))
        else:
            keep = x <= y
            xs, ys = x[keep], y[keep]
            fixed = xs == ys
            pu.append(xs)
            pv.append(ys)
            lab.append(np.where(fixed, 4 * j + 3, 4 * j + 2))
            loop.append(np.where(fixed, 2, 0))
    cat = lambda parts: np.concatenate(parts) if parts else np.zeros(0, np.int64)
    deg = d if d is not None else (2 * k if model in "gh" else k)
    return from_arrays(n, cat(pu), cat(pv), cat(lab), cat(loop).astype(np.int8),
                       d=deg, model=model, check=False)


def sample(model: str, n: int, d: int, seed: int = 0, index: int = 0) -> LabeledGraph:
    """Sample ``index`` of the campaign rooted at ``seed``."""
    model = check_model(model, n, d)
    rng = rng_for(seed, index)
    return graph_from_generators(model, sample_generators(model, n, d, rng), d)


def plant_bouquet(model: str, gens: np.ndarray, vertex: int, m: int) -> np.ndarray:
    """Force the first ``m`` generators to fix ``vertex`` (G model only).

    ``vertex`` is spliced out of its cycle (its preimage is sent to its
    old image) and becomes a fixed point; the other vertices keep their
    relative cycle structure.
    """
    if model != "g":
        raise InvalidInputError("bouquets of whole-loops only occur in model G")
    gens = np.array(gens, copy=True)
    if m > gens.shape[0]:
        raise InvalidInputError("not enough generators for the bouquet")
    for j in range(m):
        p = gens[j]
        if p[vertex] == vertex:
            continue
        pre = int(np.flatnonzero(p == vertex)[0])
        img = int(p[vertex])
        p[pre] = img
        p[vertex] = vertex
    return gens
