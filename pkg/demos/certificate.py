"""A planted bouquet certifies a lower bound on lambda_2.

Run with ``python demos/certificate.py``.
"""
import numpy as np

from alonlab.experiments import spectrum
from alonlab.graph import bouquet, perm
from alonlab.models import graph_from_generators, plant_bouquet, rng_for, sample_generators
from alonlab.tangles import Tangle, certificate_detail

n, d, m = 1000, 8, 3
gens = plant_bouquet("g", sample_generators("g", n, d, rng_for(5, 0)), 0, m)
g = graph_from_generators("g", gens, d)
t = Tangle(bouquet(m, [perm(j) for j in range(1, m + 1)]), "g")

lam2 = spectrum(g).lambda2
alpha = (2 * m - 1) + (d - 1) / (2 * m - 1)
print(f"n={n}, d={d}, a vertex fixed by {m} of the {d // 2} permutations")
print(f"Ramanujan bound 2 sqrt(d-1) = {2 * np.sqrt(d - 1):.4f}, limit value {alpha:.4f}")
print(f"lambda_2 from the eigensolver   {lam2:.4f}")
for radius in (1, 2, 4, 8):
    c = certificate_detail(g, t, radius)
    print(f"certificate with radius {radius:2d}    {c.bound:.4f}")
