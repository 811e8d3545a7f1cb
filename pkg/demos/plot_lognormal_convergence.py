"""
Adaptive collocation for a lognormal diffusion problem
======================================================

-(a u')' = f on [0, 1] with log a a sine series in 64 Gaussian variables.
The a-posteriori algorithm grows the index set by estimated profit, the
a-priori one by fixed weights; both errors are Monte Carlo estimates of the
mean H^1_0 distance to a reference solution.
"""

import numpy as np

from sparse_hermite import FieldConfig, h10_norm, solve
from sparse_hermite.experiments import DESK, ExperimentConfig, cmd_converge

###############################################################################
# The deterministic problem at xi = 0 has a closed-form solution.
u = solve(FieldConfig())
print("||u(0)|| =", h10_norm(u), " closed form", 0.03 / (2 * np.pi * np.sqrt(2)))

###############################################################################
# Laptop-scale convergence runs (M_ref = 64, 60 steps, 500 samples).
results = {}
for algo in ("aposteriori", "apriori"):
    cfg = ExperimentConfig(**DESK, q=2.0, seed=1, algo=algo)
    results[algo] = cmd_converge(cfg)
    print(f"{algo:12s} rate vs |Lambda| {results[algo].rates['n_indices']:.2f}")

post = results["aposteriori"]
print("\n   N  points  extended  active      a-post      a-prio")
for rec, rec_p in zip(post.records[::6], results["apriori"].records[::6]):
    print(f"{rec.N:4d} {rec.n_points:7d} {rec.n_points_extended:9d} {rec.n_active:7d} "
          f"{rec.error:11.3e} {rec_p.error:11.3e}")

###############################################################################
# Truncations of the Hermite expansion computed from the extended grid.
bnt = dict(post.best_n_term)
for rec in post.records[9::10]:
    print(f"N={rec.N:3d}  a-posteriori {rec.error:.3e}   best-N-term {bnt[rec.N]:.3e}")
