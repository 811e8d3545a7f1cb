"""Sparse collocation on Gauss-Hermite grids.

The operator ``U_Lambda = sum_{i in Lambda} Delta_i`` is stored in
combination-technique form, ``sum_k c_k U_k``, where every ``U_k`` is a full
tensor Lagrange interpolant. Model outputs are real vectors (a scalar model
is treated as a length-one vector) and are kept in a :class:`ValueStore`
keyed by the symbolic point identity of :mod:`.multi_index`, so each
distinct grid point is evaluated exactly once however the index set grows.
"""
from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable

import numpy as np

from .hermite import delta_coefficients, gauss_hermite, hermite_table, lagrange_basis, norm_Delta_H
from .multi_index import (
    MonotoneSet,
    MultiIndex,
    combination_coefficients,
    envelope,
    key_to_point,
    tensor_grid_keys,
)

__all__ = [
    "ModelEvaluationError",
    "ValueStore",
    "SparseCollocation",
    "Surplus",
    "HermiteExpansion",
    "SampledError",
    "build",
    "evaluate",
    "delta_apply",
    "delta_values",
    "tensor_interp",
    "to_hermite",
    "best_n_term_curve",
    "c_nu_bruteforce",
    "delta_norm_sum",
]

Model = Callable[[np.ndarray], "np.ndarray | float"]


class ModelEvaluationError(RuntimeError):
    """The model failed at a collocation point; `xi` holds that point."""

    def __init__(self, xi: np.ndarray, cause: BaseException):
        self.xi = np.asarray(xi)
        super().__init__(f"model evaluation failed at xi={self.xi.tolist()}: {cause}")


class ValueStore:
    """Model values keyed by symbolic grid point.

    Parameters
    ----------
    model : callable
        Maps a parameter vector ``xi`` (length = largest active dimension of
        the point, missing coordinates are zero) to a scalar or 1-D array.
    max_workers : int, optional
        Evaluate new points on a thread pool. Results are inserted in
        request order, so the store content never depends on scheduling.
    dim : int, optional
        Pad every parameter vector with zeros to this length.
    """

    def __init__(self, model: Model, max_workers: int | None = None, dim: int | None = None):
        self.model = model
        self.max_workers = max_workers
        self.dim = dim
        self.values: dict[tuple, np.ndarray] = {}
        self.scalar: bool | None = None

    def __len__(self) -> int:
        return len(self.values)

    def __contains__(self, key) -> bool:
        return key in self.values

    @property
    def n_evaluations(self) -> int:
        return len(self.values)

    def _call(self, key):
        xi = key_to_point(key, self.dim)
        try:
            out = self.model(xi)
        except Exception as exc:
            raise ModelEvaluationError(xi, exc) from exc
        return np.asarray(out, dtype=float)

    def require(self, keys: Iterable[tuple]) -> None:
        """Evaluate the model at every key not yet stored."""
        todo = list(dict.fromkeys(k for k in keys if k not in self.values))
        if not todo:
            return
        if self.max_workers and len(todo) > 1:
            with ThreadPoolExecutor(self.max_workers) as pool:
                results = list(pool.map(self._call, todo))
        else:
            results = [self._call(k) for k in todo]
        for key, out in zip(todo, results):
            if self.scalar is None:
                self.scalar = out.ndim == 0
            self.values[key] = np.atleast_1d(out)

    def require_grid(self, k: MultiIndex) -> None:
        self.require(tensor_grid_keys(k))

    def stack(self, keys) -> np.ndarray:
        return np.stack([self.values[key] for key in keys])


def _as_samples(X, d: int) -> np.ndarray:
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[1] < d:
        X = np.hstack([X, np.zeros((X.shape[0], d - X.shape[1]))])
    return X


def tensor_weights(k: MultiIndex, X: np.ndarray) -> np.ndarray:
    """Row-wise Kronecker product of the 1-D Lagrange bases of `k` at the rows of `X`.

    Column order matches :func:`tensor_grid_keys`.
    """
    W = np.ones((X.shape[0], 1))
    for m, level in k.items:
        L = lagrange_basis(level, X[:, m - 1])
        W = (W[:, :, None] * L[:, None, :]).reshape(X.shape[0], -1)
    return W


def tensor_interp(k: MultiIndex, store: ValueStore, X: np.ndarray) -> np.ndarray:
    """Full tensor interpolant ``U_k`` of the stored values at the rows of `X`."""
    X = _as_samples(X, k.max_dim)
    keys = tensor_grid_keys(k)
    return tensor_weights(k, X) @ store.stack(keys)


def _delta_terms(nu: MultiIndex):
    """Yield ``(sign, k)`` for ``Delta_nu = sum_{nu-1 <= k <= nu} (-1)^|nu-k| U_k``."""
    dims = nu.support
    for z in itertools.product((0, 1), repeat=len(dims)):
        k = nu
        for m, zm in zip(dims, z):
            if zm:
                k = k.shift(m, -1)
        yield (-1) ** sum(z), k


def delta_values(nu: MultiIndex, store: ValueStore, X) -> np.ndarray:
    """``(Delta_nu f)`` at the rows of `X`; the needed tensor grids must be stored."""
    X = _as_samples(X, nu.max_dim)
    out = None
    for sign, k in _delta_terms(nu):
        term = tensor_interp(k, store, X)
        out = sign * term if out is None else out + sign * term
    return out


def _maybe_scalar(store: ValueStore, arr: np.ndarray):
    return arr[..., 0] if store.scalar else arr


@dataclass
class SparseCollocation:
    """Sparse collocation operator applied to a model.

    Attributes
    ----------
    lam : MonotoneSet
        Index set.
    coeffs : dict
        Combination-technique coefficients ``{k: c_k}``.
    store : ValueStore
        Model values; covers the sparse grid of `lam` (and possibly more).
    """

    lam: MonotoneSet
    coeffs: dict[MultiIndex, int]
    store: ValueStore

    @property
    def dims_active(self) -> int:
        return self.lam.max_dim

    def evaluate_many(self, X) -> np.ndarray:
        X = _as_samples(X, self.dims_active)
        out = 0.0
        for k, c in self.coeffs.items():
            out = out + c * tensor_interp(k, self.store, X)
        return _maybe_scalar(self.store, np.asarray(out))

    def __call__(self, xi):
        return self.evaluate_many(np.atleast_1d(np.asarray(xi, dtype=float))[None, :])[0]


def build(
    lam: MonotoneSet,
    model: Model | ValueStore,
    max_workers: int | None = None,
    dim: int | None = None,
) -> SparseCollocation:
    """Evaluate `model` on the sparse grid of `lam` and return the collocation operator.

    Passing an existing :class:`ValueStore` reuses every value it already holds.
    With `dim` the model always receives vectors of that length.
    """
    if not isinstance(lam, MonotoneSet):
        lam = MonotoneSet(lam)
    if isinstance(model, ValueStore):
        store = model
    else:
        store = ValueStore(model, max_workers, dim=max(dim, lam.max_dim) if dim else None)
    for k in lam:
        store.require_grid(k)
    return SparseCollocation(lam, combination_coefficients(lam), store)


def evaluate(sc: SparseCollocation, xi):
    """Value of the sparse interpolant at a single parameter point."""
    return sc(xi)


class Surplus:
    """Detail operator ``Delta_nu f`` as a callable, built from at most 2^|nu|_0 tensor interpolants."""

    def __init__(self, nu: MultiIndex, store: ValueStore):
        self.nu = nu
        self.store = store
        for _, k in _delta_terms(nu):
            store.require_grid(k)

    def at(self, X) -> np.ndarray:
        return _maybe_scalar(self.store, delta_values(self.nu, self.store, X))

    def __call__(self, xi):
        return self.at(np.atleast_1d(np.asarray(xi, dtype=float))[None, :])[0]

    def at_nodes(self) -> tuple[np.ndarray, np.ndarray]:
        """Tensor nodes of ``Xi^(nu)`` and the surplus values there."""
        keys = tensor_grid_keys(self.nu)
        d = self.nu.max_dim
        X = np.stack([key_to_point(key, d) for key in keys]) if d else np.zeros((1, 0))
        return X, _maybe_scalar(self.store, delta_values(self.nu, self.store, X))


def delta_apply(nu: MultiIndex, model: Model | ValueStore, dim: int | None = None) -> Surplus:
    """Return the surplus operator ``Delta_nu`` applied to `model`."""
    store = model if isinstance(model, ValueStore) else ValueStore(model, dim=dim)
    return Surplus(nu, store)


@dataclass
class HermiteExpansion:
    """Finite Hermite expansion ``f(xi) = sum_nu f_nu H_nu(xi)`` with vector coefficients."""

    terms: dict[MultiIndex, np.ndarray] = field(default_factory=dict)
    scalar: bool = False

    def __len__(self) -> int:
        return len(self.terms)

    @property
    def max_dim(self) -> int:
        return max((nu.max_dim for nu in self.terms), default=0)

    def basis_matrix(self, X, indices: list[MultiIndex] | None = None) -> np.ndarray:
        """Values ``H_nu(x)`` for the rows of `X` (columns follow `indices`)."""
        indices = list(self.terms) if indices is None else indices
        d = max((nu.max_dim for nu in indices), default=0)
        X = _as_samples(X, d)
        tables = {}
        for nu in indices:
            for m, k in nu.items:
                tables[m] = max(tables.get(m, 0), k)
        tables = {m: hermite_table(k, X[:, m - 1]) for m, k in tables.items()}
        B = np.ones((X.shape[0], len(indices)))
        for j, nu in enumerate(indices):
            for m, k in nu.items:
                B[:, j] *= tables[m][k]
        return B

    def evaluate_many(self, X) -> np.ndarray:
        indices = list(self.terms)
        C = np.stack([self.terms[nu] for nu in indices])
        out = self.basis_matrix(X, indices) @ C
        return out[..., 0] if self.scalar else out


def to_hermite(sc: SparseCollocation) -> HermiteExpansion:
    """Convert a sparse interpolant into its Hermite expansion.

    Each tensor term is projected with its own rules dimension by dimension,
    which is exact because the interpolant has degree ``k_m`` in dimension m.
    """
    terms: dict[MultiIndex, np.ndarray] = {}
    for k, c in sc.coeffs.items():
        dims = k.support
        shape = tuple(level + 1 for _, level in k.items)
        V = sc.store.stack(tensor_grid_keys(k))
        T = V.reshape(shape + V.shape[1:])
        for axis, (_, level) in enumerate(k.items):
            rule = gauss_hermite(level + 1)
            P = hermite_table(level, rule.nodes) * rule.weights
            T = np.moveaxis(np.tensordot(P, T, axes=(1, axis)), 0, axis)
        for idx in np.ndindex(*shape):
            nu = MultiIndex(dict(zip(dims, idx)))
            if nu in terms:
                terms[nu] = terms[nu] + c * T[idx]
            else:
                terms[nu] = c * T[idx]
    return HermiteExpansion(dict(sorted(terms.items())), scalar=bool(sc.store.scalar))


class SampledError:
    """Mean error norm over fixed samples: ``mean_k norm(reference_k - approx_k)``.

    This is the error protocol accepted by :func:`best_n_term_curve`: an
    object with a ``samples`` array and a ``__call__(approx) -> float``.
    """

    def __init__(self, samples: np.ndarray, reference: np.ndarray, norm=None):
        self.samples = np.asarray(samples, dtype=float)
        self.reference = np.asarray(reference, dtype=float)
        self.norm = norm if norm is not None else (lambda v: np.linalg.norm(v, axis=-1))

    def __call__(self, approx: np.ndarray) -> float:
        diff = self.reference - approx
        if diff.ndim == 1:
            return float(np.mean(np.abs(diff)))
        return float(np.mean(self.norm(diff)))


def best_n_term_curve(he: HermiteExpansion, error_metric, coef_norm=None, n_max: int | None = None):
    """Errors of the truncations of `he` to its N largest terms, N = 1, 2, ...

    Terms are ranked by decreasing `coef_norm` of their coefficient vectors
    (Euclidean by default); ties go to the lexicographically smaller index.
    Returns a list of ``(N, error)``.
    """
    if not len(he):
        raise ValueError("empty expansion")
    if coef_norm is None:
        coef_norm = np.linalg.norm
    ranked = sorted(he.terms, key=lambda nu: (-float(coef_norm(he.terms[nu])), nu.items))
    if n_max is not None:
        ranked = ranked[:n_max]
    B = he.basis_matrix(error_metric.samples, ranked)
    approx = np.zeros((B.shape[0],) + np.shape(he.terms[ranked[0]]))
    curve = []
    for j, nu in enumerate(ranked):
        approx += np.multiply.outer(B[:, j], he.terms[nu])
        out = approx[..., 0] if he.scalar else approx
        curve.append((j + 1, error_metric(out)))
    return curve


MAX_BRUTEFORCE_ENVELOPE = 12


def c_nu_bruteforce(nu: MultiIndex) -> float:
    """Worst-case error ``max_{Lambda subset R_nu} ||(I - U_Lambda) H_nu||`` by enumeration.

    All 2^|R_nu| subsets are visited, monotone or not.
    """
    R = envelope(nu)
    if len(R) > MAX_BRUTEFORCE_ENVELOPE:
        raise ValueError(
            f"envelope of {nu!r} has {len(R)} members; enumeration is capped at "
            f"{MAX_BRUTEFORCE_ENVELOPE} (2^{MAX_BRUTEFORCE_ENVELOPE} subsets)"
        )
    # Delta_i H_nu factorizes; its Hermite coefficient tensor is an outer product
    rows = []
    for i in R:
        vec = np.ones(1)
        for m, level in nu.items:
            vec = np.multiply.outer(vec, delta_coefficients(i[m], level)).ravel()
        rows.append(vec)
    D = np.stack(rows)
    n = len(rows)
    masks = ((np.arange(2**n)[:, None] >> np.arange(n)[None, :]) & 1).astype(float)
    return float(np.linalg.norm(masks @ D, axis=1).max())


def delta_norm_sum(nu: MultiIndex) -> float:
    """``sum_{i in R_nu} ||Delta_i H_nu||``, the first upper bound for c_nu."""
    return float(
        sum(math.prod(norm_Delta_H(i[m], level) for m, level in nu.items) for i in envelope(nu))
    )
