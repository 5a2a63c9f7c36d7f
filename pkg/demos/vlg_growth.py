"""Walk growth rates of graphs whose edges have lengths.

Run with ``python demos/vlg_growth.py``.
"""
from alonlab.vlg import (VLG, Monomial, VLGEdge, lambda1_det, lambda1_vlg, limit_convergence_check,
                         subdivide)

# two loops of lengths 2 and 3: walks grow like the real root of z^3 + z^2 = 1
g = VLG(1, (VLGEdge(0, 0, Monomial(2)), VLGEdge(0, 0, Monomial(3))), directed=True)
print(f"loops 2 and 3: lambda_1 = {lambda1_vlg(g):.10f} (determinant root {lambda1_det(g):.10f})")
print(f"after subdividing into unit edges: {lambda1_vlg(subdivide(g)):.10f}")

# stretching one loop of a figure-eight: the growth rate falls to that of the other loop
eight = VLG(1, (VLGEdge(0, 0, Monomial(1)), VLGEdge(0, 0, Monomial(1))), directed=True)
rep = limit_convergence_check(eight, [1], [2**p for p in range(1, 27)])
for ell, val in list(zip(rep.lengths, rep.values))[::5]:
    print(f"  loop length {ell:>9d}: lambda_1 = {val:.9f}")
print(f"limit {rep.target}, gap {rep.gap:.1e}, monotone convergence: {rep.passed}")
