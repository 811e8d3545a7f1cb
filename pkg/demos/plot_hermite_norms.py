"""
Interpolation norms of Hermite polynomials
==========================================

Gauss-Hermite interpolation of degree i applied to the orthonormal Hermite
polynomial H_nu. Below the diagonal (i >= nu) the polynomial is reproduced,
on the first sub-diagonal it vanishes at every node, and in between the norm
stays below one.
"""

import numpy as np

from sparse_hermite import gauss_hermite, norm_Delta_H, norm_U_H

###############################################################################
# A 5-point rule: symmetric nodes, positive weights summing to one, and
# exact moments E[x^2] = 1, E[x^4] = 3, ... up to degree 9.
rule = gauss_hermite(5)
print("nodes  ", np.round(rule.nodes, 6))
print("weights", np.round(rule.weights, 6))
print("moments", [round(float(rule.weights @ rule.nodes**p), 10) for p in (2, 4, 6, 8)])

###############################################################################
# Table of ||U_i H_nu|| for small levels.
size = 8
U = np.array([[norm_U_H(i, nu) for nu in range(size)] for i in range(size)])
np.set_printoptions(precision=3, suppress=True, linewidth=100)
print("\nrows i, columns nu: ||U_i H_nu||")
print(U)

###############################################################################
# The detail operators Delta_i = U_i - U_{i-1} stay bounded too, well below
# sqrt(2) over the whole range 0..39.
D = np.array([[norm_Delta_H(i, nu) for nu in range(40)] for i in range(40)])
print("\nmax ||Delta_i H_nu|| over 0..39:", D.max().round(4))
i, nu = np.unravel_index(D.argmax(), D.shape)
print("attained at i =", i, "nu =", nu)
