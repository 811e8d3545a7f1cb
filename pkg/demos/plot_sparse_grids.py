"""
Monotone sets and sparse grids
==============================

Total-degree and hyperbolic-cross index sets, the combination-technique
coefficients that express the sparse operator as a signed sum of tensor
interpolants, and the number of distinct Gauss-Hermite points involved.
"""

from sparse_hermite import MonotoneSet, MultiIndex, combination_coefficients, count_points, hc_set, neighbors, td_set
from sparse_hermite.multi_index import sparse_grid_points

###############################################################################
# A small total-degree set in two variables and its combination coefficients.
lam = td_set(3, 2)
print("TD(3) in 2-D:", [idx.dense(2) for idx in lam])
for k, c in combination_coefficients(lam).items():
    print(f"  c{k.dense(2)} = {c:+d}")

###############################################################################
# The origin is the only node shared between rules of different size, so the
# sparse grid is much smaller than the sum of the tensor grids.
pts = sparse_grid_points(lam)
print("\n", len(pts), "distinct points; tensor grids would total",
      sum(k.n_points() for k in lam))

###############################################################################
# Point counts against the bound |Lambda|(|Lambda|+1)/2.
for make, name, w0 in [(td_set, "TD", 0), (hc_set, "HC", 1)]:
    print(f"\n{name}, M = 4")
    for w in range(w0, 7):
        s = make(w, 4)
        exact, bound = count_points(s)
        print(f"  w={w}  |Lambda|={len(s):4d}  points={exact:5d}  bound={bound:6d}")

###############################################################################
# Admissible neighbors of {0, e_1}: growth is possible in dimension 1 and in
# every new dimension within the buffer.
print("\nneighbors:", neighbors(MonotoneSet([MultiIndex(), MultiIndex.unit(1)]), 3))
