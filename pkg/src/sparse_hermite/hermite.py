"""Orthonormal Hermite polynomials and Gauss-Hermite rules for N(0, 1).

All polynomials here are the probabilists' Hermite polynomials normalized
in L2 of the standard Gaussian measure, so that

    E[H_n(X) H_m(X)] = delta_{nm},   X ~ N(0, 1).

They are generated by the three-term recurrence

    H_0 = 1,  H_1 = x,  H_{n+1} = (x H_n - sqrt(n) H_{n-1}) / sqrt(n + 1),

which never forms the (huge) unnormalized values.
"""
from __future__ import annotations

import math
import threading
from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh_tridiagonal

__all__ = [
    "GaussHermiteRule",
    "QuadratureError",
    "gauss_hermite",
    "hermite_eval",
    "hermite_table",
    "lagrange_basis",
    "interp_univariate",
    "hermite_coefficients",
    "norm_U_H",
    "norm_Delta_H",
    "CRAMER_C",
    "GROWTH_K",
]

#: Constant in Cramer's inequality for Hermite functions.
CRAMER_C = 1.086435
#: Growth constant K = 2 c sqrt(e) of the bound ||Delta_i H_nu|| <= 1 + K nu.
GROWTH_K = 2.0 * CRAMER_C * math.sqrt(math.e)


class QuadratureError(RuntimeError):
    """Raised when a Gauss-Hermite rule cannot be constructed."""


def hermite_eval(nu: int, xi):
    """Evaluate the orthonormal Hermite polynomial of degree `nu` at `xi`.

    `xi` may be a scalar or an array; the result has the same shape.
    """
    if nu < 0:
        raise ValueError(f"degree must be nonnegative, got {nu}")
    x = np.asarray(xi, dtype=float)
    h_prev = np.ones_like(x)
    if nu == 0:
        return h_prev if x.ndim else float(h_prev)
    h = x.copy()
    for n in range(1, nu):
        h, h_prev = (x * h - math.sqrt(n) * h_prev) / math.sqrt(n + 1), h
    return h if x.ndim else float(h)


def hermite_table(nmax: int, xi) -> np.ndarray:
    """Return H_0..H_nmax at the points `xi` as an array of shape (nmax+1, *xi.shape)."""
    x = np.asarray(xi, dtype=float)
    out = np.empty((nmax + 1,) + x.shape)
    out[0] = 1.0
    if nmax >= 1:
        out[1] = x
    for n in range(1, nmax):
        out[n + 1] = (x * out[n] - math.sqrt(n) * out[n - 1]) / math.sqrt(n + 1)
    return out


@dataclass(frozen=True)
class GaussHermiteRule:
    """n-point Gauss rule for the standard Gaussian weight.

    Nodes are sorted increasingly and exactly symmetric; weights sum to one.
    `bary` holds barycentric interpolation weights for the nodes, scaled so
    that the largest has unit magnitude.
    """

    n: int
    nodes: np.ndarray
    weights: np.ndarray
    bary: np.ndarray

    @property
    def center(self) -> int | None:
        """Position of the node at the origin, or None for even n."""
        return self.n // 2 if self.n % 2 else None


def _build_rule(n: int) -> GaussHermiteRule:
    if n == 1:
        nodes = np.zeros(1)
    else:
        # Jacobi matrix of the orthonormal recurrence: zero diagonal, off-diagonal sqrt(k)
        off = np.sqrt(np.arange(1, n, dtype=float))
        try:
            nodes = eigh_tridiagonal(np.zeros(n), off, eigvals_only=True)
        except np.linalg.LinAlgError as exc:
            raise QuadratureError(
                f"tridiagonal eigenvalue solve failed for the {n}-point Gauss-Hermite rule"
            ) from exc
        nodes = np.sort(nodes)
        # a couple of Newton steps on H_n polish the eigenvalues to full accuracy
        for _ in range(2):
            tab = hermite_table(n, nodes)
            # H_n' = sqrt(n) H_{n-1} for the orthonormal family
            nodes = nodes - tab[n] / (math.sqrt(n) * tab[n - 1])
        nodes = 0.5 * (nodes - nodes[::-1])
        if n % 2:
            nodes[n // 2] = 0.0
    if not np.all(np.isfinite(nodes)):
        raise QuadratureError(f"non-finite nodes for the {n}-point Gauss-Hermite rule")

    # Christoffel numbers 1 / sum_j H_j(x)^2 keep tiny tail weights relatively accurate
    tab = hermite_table(n - 1, nodes)
    weights = 1.0 / np.sum(tab**2, axis=0)
    weights = 0.5 * (weights + weights[::-1])
    weights /= weights.sum()

    diff = nodes[:, None] - nodes[None, :]
    np.fill_diagonal(diff, 1.0)
    logw = -np.sum(np.log(np.abs(diff)), axis=1)
    sign = np.where(np.arange(n) % 2 == (n - 1) % 2, 1.0, -1.0)
    bary = sign * np.exp(logw - logw.max())
    for arr in (nodes, weights, bary):
        arr.setflags(write=False)
    return GaussHermiteRule(n, nodes, weights, bary)


_RULES: dict[int, GaussHermiteRule] = {}
_RULES_LOCK = threading.Lock()


def gauss_hermite(n: int) -> GaussHermiteRule:
    """Return the cached n-point Gauss-Hermite rule (exact up to degree 2n-1)."""
    rule = _RULES.get(n)
    if rule is not None:
        return rule
    if n < 1:
        raise ValueError(f"point count must be positive, got {n}")
    with _RULES_LOCK:
        rule = _RULES.get(n)
        if rule is None:
            rule = _build_rule(n)
            _RULES[n] = rule
    return rule


def lagrange_basis(level: int, x) -> np.ndarray:
    """Lagrange basis of the (level+1)-point rule evaluated at `x`.

    Returns an array of shape (len(x), level+1) whose rows sum to one.
    Points that coincide with a node get the exact unit vector.
    """
    rule = gauss_hermite(level + 1)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if level == 0:
        return np.ones((x.size, 1))
    diff = x[:, None] - rule.nodes[None, :]
    hit = diff == 0.0
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = rule.bary / diff
        basis = terms / terms.sum(axis=1, keepdims=True)
    rows = hit.any(axis=1)
    if rows.any():
        basis[rows] = hit[rows].astype(float)
    return basis


def interp_univariate(level: int, values, xi):
    """Evaluate the degree-`level` interpolant through `values` at `xi`.

    `values` are taken at the nodes of ``gauss_hermite(level + 1)`` and may
    carry trailing axes (vector-valued data).
    """
    values = np.asarray(values, dtype=float)
    if values.shape[0] != level + 1:
        raise ValueError(
            f"level {level} needs {level + 1} nodal values, got {values.shape[0]}"
        )
    scalar = np.ndim(xi) == 0
    out = np.tensordot(lagrange_basis(level, xi), values, axes=(1, 0))
    return out[0] if scalar else out


def hermite_coefficients(level: int, values) -> np.ndarray:
    """Hermite coefficients of the interpolant through `values` on the (level+1)-point rule.

    Gauss quadrature with level+1 points is exact for the product of the
    interpolant and H_j (degree <= 2*level), so the discrete projection is
    the exact expansion. Returns shape (level+1, *values.shape[1:]).
    """
    rule = gauss_hermite(level + 1)
    proj = hermite_table(level, rule.nodes) * rule.weights
    return np.tensordot(proj, np.asarray(values, dtype=float), axes=(1, 0))


def _coeffs_U_H(i: int, nu: int) -> np.ndarray:
    """Hermite coefficients (length i+1) of U_i H_nu."""
    if i >= nu:
        c = np.zeros(i + 1)
        c[nu] = 1.0
        return c
    rule = gauss_hermite(i + 1)
    return hermite_coefficients(i, hermite_eval(nu, rule.nodes))


def norm_U_H(i: int, nu: int) -> float:
    """L2(N(0,1)) norm of the level-i interpolant of H_nu."""
    if i >= nu:
        return 1.0
    if i == nu - 1:
        # the nodes are the zeros of H_nu
        return 0.0
    rule = gauss_hermite(i + 1)
    return math.sqrt(float(np.dot(hermite_eval(nu, rule.nodes) ** 2, rule.weights)))


def delta_coefficients(i: int, nu: int) -> np.ndarray:
    """Hermite coefficients of (U_i - U_{i-1}) H_nu, padded to length max(i, nu) + 1."""
    size = max(i, nu) + 1
    out = np.zeros(size)
    cur = _coeffs_U_H(i, nu)
    out[: cur.size] += cur
    if i > 0:
        prev = _coeffs_U_H(i - 1, nu)
        out[: prev.size] -= prev
    return out


def norm_Delta_H(i: int, nu: int) -> float:
    """L2(N(0,1)) norm of (U_i - U_{i-1}) H_nu via Parseval."""
    return float(np.linalg.norm(delta_coefficients(i, nu)))
