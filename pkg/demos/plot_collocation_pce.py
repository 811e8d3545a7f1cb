"""
Sparse collocation and its Hermite expansion
============================================

Interpolate a smooth function of three Gaussian variables on a monotone set,
check that polynomials in the set are reproduced, convert the interpolant to
Hermite (polynomial chaos) coefficients, and read off a best-N-term curve.
"""

import math

import numpy as np

from sparse_hermite import build, td_set, to_hermite
from sparse_hermite.collocation import SampledError, best_n_term_curve

rng = np.random.default_rng(0)

###############################################################################
# Polynomials of total degree 4 are reproduced exactly.
lam = td_set(4, 3)
p = lambda xi: 1 + xi[0] * xi[1] ** 2 - 0.5 * xi[2] ** 4  # noqa: E731
sc = build(lam, p, dim=3)
X = rng.normal(size=(1000, 3))
print("points:", sc.store.n_evaluations)
print("max error on a degree-4 polynomial:", np.abs(sc.evaluate_many(X) - [p(x) for x in X]).max())

###############################################################################
# A non-polynomial function: the interpolant is only an approximation, and
# its error decays as the total degree grows.
f = lambda xi: np.exp(0.3 * xi[0] - 0.2 * xi[1] + 0.1 * xi[2])  # noqa: E731
ref = np.array([f(x) for x in X])
for w in range(1, 7):
    sc = build(td_set(w, 3), f, dim=3)
    print(f"w={w}  points={sc.store.n_evaluations:4d}  mean abs error={np.mean(np.abs(sc.evaluate_many(X) - ref)):.2e}")

###############################################################################
# Hermite coefficients of the last interpolant. For exp(a.xi) they are known
# in closed form: exp(|a|^2/2) prod a_m^k / sqrt(k!).
he = to_hermite(sc)
a = np.array([0.3, -0.2, 0.1])
for nu in list(he.terms)[:6]:
    exact = np.exp(a @ a / 2) * math.prod(a[m - 1] ** k / math.sqrt(math.factorial(k)) for m, k in nu.items)
    print(f"{nu!r:28s} computed {float(he.terms[nu][0]):+.8f}  exact {exact:+.8f}")

###############################################################################
# Truncating to the N largest coefficients.
curve = best_n_term_curve(he, SampledError(X, ref))
for n, err in curve[:10]:
    print(f"N={n:2d}  error={err:.3e}")
