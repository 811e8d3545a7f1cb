"""Greedy construction of nested monotone index sets.

Both drivers start from ``{0}`` and repeatedly add the admissible neighbor
with the largest selection criterion:

* :func:`run_apriori` ranks neighbors by the dominating weights
  :func:`c_hat`, without touching the model;
* :func:`run_aposteriori` ranks them by the profit
  ``max_k rho(xi_k) ||Delta_nu u(xi_k)|| / |Xi^(nu)|`` estimated on the
  tensor grid of each candidate, with ``rho`` the unnormalized Gaussian
  density.

Ties go to the lexicographically smallest multi-index.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .collocation import ValueStore, delta_values
from .multi_index import (
    ZERO,
    MonotoneSet,
    MultiIndex,
    is_admissible,
    key_to_point,
    tensor_grid_keys,
)

__all__ = [
    "APrioriWeights",
    "StepRecord",
    "AdaptiveState",
    "c_hat",
    "b_weight",
    "run_apriori",
    "run_aposteriori",
    "profit",
]


@dataclass(frozen=True)
class APrioriWeights:
    """Parameters of the a-priori criterion.

    ``tau_m = m^(q-1)``, ``theta = 1`` for Gauss-Hermite points, and by
    default ``r = 10 + 4 (q - 1)``.
    """

    q: float
    theta: float = 1.0
    r: float | None = None

    def __post_init__(self):
        if self.q < 1:
            raise ValueError(f"q must be >= 1, got {self.q}")
        if self.r is None:
            object.__setattr__(self, "r", 10.0 + 4.0 * (self.q - 1.0))

    def tau(self, m: int) -> float:
        return float(m) ** (self.q - 1.0)


def c_hat(nu: MultiIndex, w: APrioriWeights) -> float:
    """Dominating weight ``prod_{m in supp} nu_m^(2 theta + 2 - r) tau_m^(-2)``.

    Factors for inactive dimensions are one, so ``c_hat(0) == 1``.
    """
    expo = 2.0 * w.theta + 2.0 - w.r
    out = 1.0
    for m, k in nu.items:
        out *= float(k) ** expo * w.tau(m) ** -2.0
    return out


def b_weight(nu: MultiIndex, tau: Callable[[int], float], r: int) -> float:
    """``prod_m sum_{l=0}^{r} binom(nu_m, l) tau_m^(2l)``."""
    if r < 0:
        raise ValueError("r must be nonnegative")
    out = 1.0
    for m, k in nu.items:
        t2 = tau(m) ** 2
        out *= sum(math.comb(k, l) * t2**l for l in range(min(k, int(r)) + 1))
    return out


@dataclass
class StepRecord:
    N: int
    nu: MultiIndex
    criterion: float
    n_points: int
    n_points_extended: int
    n_active: int


@dataclass
class AdaptiveState:
    """Result of a greedy run: the final set and one record per insertion."""

    lam: MonotoneSet
    history: list[StepRecord] = field(default_factory=list)
    store: ValueStore | None = None
    criteria: dict[MultiIndex, float] = field(default_factory=dict)
    n_criterion_evaluations: int = 0

    @property
    def order(self) -> list[MultiIndex]:
        """Indices in insertion order, starting with 0."""
        return [ZERO] + [rec.nu for rec in self.history]

    def lambda_at(self, N: int) -> MonotoneSet:
        return MonotoneSet(self.order[:N], check=False)


class _Frontier:
    """Admissible-neighbor bookkeeping, updated incrementally on insertion."""

    def __init__(self, m_buffer: int, max_dim: int | None):
        if m_buffer < 1:
            raise ValueError("m_buffer must be positive")
        self.m_buffer = m_buffer
        self.max_dim = max_dim
        self.members: set[MultiIndex] = {ZERO}
        self.top = 0
        self.candidates: set[MultiIndex] = set()
        self._extend(ZERO, 0)

    def reach(self) -> int:
        r = self.top + self.m_buffer
        return r if self.max_dim is None else min(r, self.max_dim)

    def _extend(self, nu: MultiIndex, old_reach: int) -> None:
        reach = self.reach()
        for m in range(1, reach + 1):
            cand = nu.shift(m)
            if cand not in self.members and is_admissible(cand, self.members):
                self.candidates.add(cand)
        for m in range(old_reach + 1, reach + 1):
            self.candidates.add(MultiIndex.unit(m))

    def add(self, nu: MultiIndex) -> None:
        old = self.reach()
        self.members.add(nu)
        self.candidates.discard(nu)
        self.top = max(self.top, nu.max_dim)
        self._extend(nu, old)


def _select(candidates, crit: dict) -> MultiIndex:
    return min(candidates, key=lambda nu: (-crit[nu], nu.items))


def run_apriori(
    w: APrioriWeights, m_buffer: int = 5, n_max: int = 60, max_dim: int | None = None
) -> AdaptiveState:
    """Grow ``{0}`` to `n_max` indices by maximal :func:`c_hat`."""
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    front = _Frontier(m_buffer, max_dim)
    state = AdaptiveState(MonotoneSet([ZERO], check=False))
    keys = set(tensor_grid_keys(ZERO))
    for N in range(2, n_max + 1):
        if not front.candidates:
            break
        for nu in front.candidates:
            if nu not in state.criteria:
                state.criteria[nu] = c_hat(nu, w)
                state.n_criterion_evaluations += 1
        best = _select(front.candidates, state.criteria)
        front.add(best)
        keys.update(tensor_grid_keys(best))
        state.history.append(
            StepRecord(N, best, state.criteria[best], len(keys), len(keys), front.top)
        )
    state.lam = MonotoneSet(front.members, check=False)
    return state


def _default_norm(V: np.ndarray) -> np.ndarray:
    return np.linalg.norm(V.reshape(V.shape[0], -1), axis=1)


def profit(nu: MultiIndex, store: ValueStore, error_norm=None) -> float:
    """Estimated ``||Delta_nu u||_{L^inf_mu} / |Xi^(nu)|``; the needed grids must be stored."""
    error_norm = error_norm or _default_norm
    keys = tensor_grid_keys(nu)
    d = nu.max_dim
    X = np.stack([key_to_point(key, d) for key in keys])
    surplus = delta_values(nu, store, X)
    rho = np.exp(-0.5 * np.sum(X * X, axis=1))
    return float(np.max(rho * error_norm(surplus))) / nu.n_points()


def run_aposteriori(
    model,
    m_buffer: int = 5,
    n_max: int = 60,
    error_norm=None,
    max_dim: int | None = None,
    cache: bool = True,
    max_workers: int | None = None,
) -> AdaptiveState:
    """Grow ``{0}`` to `n_max` indices by maximal estimated profit.

    Parameters
    ----------
    model : callable or ValueStore
        ``xi -> vector``. A :class:`ValueStore` is reused as is.
    error_norm : callable, optional
        Row-wise norm of an array of output vectors; Euclidean by default.
    cache : bool
        Profits depend only on the candidate index, so they are computed once
        per candidate. ``cache=False`` recomputes every candidate at each
        step (reference behaviour for testing).
    """
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    store = model if isinstance(model, ValueStore) else ValueStore(model, max_workers)
    error_norm = error_norm or _default_norm
    store.require_grid(ZERO)
    scale = float(np.max(error_norm(store.stack(tensor_grid_keys(ZERO)))))
    floor = 64.0 * np.finfo(float).eps * scale

    front = _Frontier(m_buffer, max_dim)
    state = AdaptiveState(MonotoneSet([ZERO], check=False), store=store)
    grid_keys = set(tensor_grid_keys(ZERO))
    ext_keys = set(grid_keys)
    for N in range(2, n_max + 1):
        if not front.candidates:
            break
        todo = sorted(front.candidates) if not cache else sorted(
            nu for nu in front.candidates if nu not in state.criteria
        )
        new_keys = [key for nu in todo for key in tensor_grid_keys(nu)]
        store.require(new_keys)
        ext_keys.update(new_keys)
        for nu in todo:
            p = profit(nu, store, error_norm)
            # rounding-level surpluses count as exact zeros so ties resolve lexicographically
            state.criteria[nu] = p if p > floor else 0.0
            state.n_criterion_evaluations += 1
        best = _select(front.candidates, state.criteria)
        front.add(best)
        grid_keys.update(tensor_grid_keys(best))
        state.history.append(
            StepRecord(N, best, state.criteria[best], len(grid_keys), len(ext_keys), front.top)
        )
    state.lam = MonotoneSet(front.members, check=False)
    return state
