"""Counting closed walks three ways on a random 4-regular graph.

Run with ``python demos/trace_identities.py``.
"""
import numpy as np

from alonlab.models import sample
from alonlab.traces import trace_table, verify_identities

g = sample("g", 60, 4, seed=1)
print(f"sampled a {g.regular_degree()}-regular graph on {g.n} vertices "
      f"({g.num_whole_loops} whole-loops)")

# Plain closed walks, non-backtracking ones, and those whose last step
# does not undo the first.
tab = trace_table(g, 8)
print(" k   Tr(A^k)   irreducible   strongly irreducible")
for k in range(1, 9):
    print(f"{k:2d} {tab.power[k]:9d} {tab.irred[k]:13d} {tab.sit[k]:22d}")

# Each count is also a polynomial function of the spectrum.
rows = verify_identities(g, 8)
worst = max(r.abs_err for r in rows)
print(f"\nall {len(rows)} identity checks pass: {all(r.passed for r in rows)}"
      f" (largest absolute error {worst:.2e})")

eig = np.linalg.eigvalsh(g.adjacency().astype(float))
print(f"lambda_2 = {eig[-2]:.4f} against 2*sqrt(3) = {2 * np.sqrt(3):.4f}")
