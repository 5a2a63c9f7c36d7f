"""Small dense subgraphs that push lambda_2 above the Ramanujan bound.

Run with ``python demos/tangles_and_tau.py``.
"""
import warnings

import numpy as np

from alonlab.graph import bouquet, cycle_graph, perm
from alonlab.tangles import Tangle, bounded_minimality_search, classify, tau_fund
from alonlab.vlg import tree_d_norm

d = 4
for name, x in [("triangle", cycle_graph(3, perm(1))),
                ("two-loop bouquet", bouquet(2, [perm(1), perm(2)]))]:
    c = classify(Tangle(x, "g"), d)
    print(f"{name:18s} lambda_irred = {c.value:.4f}  threshold sqrt(d-1) = {c.threshold:.4f}"
          f"  -> {c.kind}; Tree_d norm {tree_d_norm(x, d):.4f}"
          f" (2 sqrt(d-1) = {2 * np.sqrt(d - 1):.4f})")

print("\nsmallest order of a supercritical tangle, per model:")
print(" d   G   H   I   J")
with warnings.catch_warnings():
    warnings.simplefilter("ignore", RuntimeWarning)
    for d in range(3, 13):
        cells = []
        for model in "ghij":
            if model in "gh" and d % 2:
                cells.append(" -")
                continue
            tau, _ = tau_fund(model, d)
            rep = bounded_minimality_search(model, d, tau, 3)
            cells.append(f"{tau:2d}" + ("" if rep.passed else "!"))
        print(f"{d:2d}  " + "  ".join(cells))
