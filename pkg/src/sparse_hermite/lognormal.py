"""One-dimensional lognormal diffusion test problem.

Solves ``-(a(x, xi) u')' = f`` on [0, 1] with ``u(0) = u(1) = 0`` and

    log a(x, xi) = sigma * sum_{m=1}^{M} sqrt(2) (pi m)^(-q) sin(m pi x) xi_m

through the closed-form solution

    u(x) = int_0^x (K - F(y)) / a(y) dy,   F(x) = int_0^x f,
    K = int_0^1 F / a  /  int_0^1 1 / a.

Every integral uses the composite trapezoidal rule on the same uniform grid,
so the discrete u(1) vanishes up to rounding.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np

__all__ = [
    "FieldConfig",
    "LognormalModelError",
    "default_forcing",
    "grid",
    "log_diffusion",
    "solve",
    "solve_many",
    "h10_norm",
    "LognormalDiffusion",
    "truncation_count",
]

log = logging.getLogger(__name__)

_truncated_calls = 0


def truncation_count() -> int:
    """Number of calls so far whose parameter vector had more than M coordinates."""
    return _truncated_calls


class LognormalModelError(ArithmeticError):
    """The diffusion coefficient overflowed for the given parameter."""


@dataclass(frozen=True)
class FieldConfig:
    q: float = 2.0
    sigma: float = 0.1
    M: int = 64
    nx: int = 1024

    def __post_init__(self):
        if self.M < 1:
            raise ValueError(f"M must be >= 1, got {self.M}")
        if self.nx < 16 or self.nx & (self.nx - 1):
            raise ValueError(f"nx must be a power of two >= 16, got {self.nx}")
        if not self.sigma > 0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")
        if self.q < 1:
            raise ValueError(f"q must be >= 1, got {self.q}")


def default_forcing(x):
    return 0.03 * np.sin(2.0 * np.pi * x)


def grid(nx: int) -> np.ndarray:
    return np.linspace(0.0, 1.0, nx + 1)


@lru_cache(maxsize=32)
def _basis(cfg: FieldConfig) -> np.ndarray:
    """sigma * phi_m(x_j), shape (M, nx + 1)."""
    x = grid(cfg.nx)
    m = np.arange(1, cfg.M + 1, dtype=float)[:, None]
    phi = cfg.sigma * math.sqrt(2.0) * (np.pi * m) ** (-cfg.q) * np.sin(m * np.pi * x[None, :])
    phi[:, 0] = 0.0
    phi[:, -1] = 0.0
    phi.setflags(write=False)
    return phi


def _coords(cfg: FieldConfig, xi) -> np.ndarray:
    global _truncated_calls
    xi = np.asarray(xi, dtype=float)
    n = xi.shape[-1] if xi.ndim else 0
    if n > cfg.M:
        _truncated_calls += 1
        log.debug("ignoring %d coordinates beyond M=%d", n - cfg.M, cfg.M)
        return xi[..., : cfg.M]
    if n < cfg.M:
        pad = [(0, 0)] * (xi.ndim - 1) + [(0, cfg.M - n)]
        return np.pad(np.atleast_1d(xi), pad)
    return xi


def log_diffusion(cfg: FieldConfig, xi) -> np.ndarray:
    """``log a`` at the grid nodes; `xi` may be a single vector or a (n, d) batch."""
    return _coords(cfg, xi) @ _basis(cfg)


def _cumtrapz(y: np.ndarray, dx: float) -> np.ndarray:
    out = np.zeros_like(y)
    np.cumsum(0.5 * dx * (y[..., 1:] + y[..., :-1]), axis=-1, out=out[..., 1:])
    return out


@lru_cache(maxsize=32)
def _antiderivative(nx: int, forcing: Callable) -> np.ndarray:
    F = _cumtrapz(np.asarray(forcing(grid(nx)), dtype=float), 1.0 / nx)
    F.setflags(write=False)
    return F


def solve_many(cfg: FieldConfig, xi, forcing: Callable = default_forcing) -> np.ndarray:
    """Solutions for a batch of parameters, shape (n, nx + 1)."""
    xi = np.atleast_2d(np.asarray(xi, dtype=float))
    dx = 1.0 / cfg.nx
    with np.errstate(over="ignore"):
        inv_a = np.exp(-log_diffusion(cfg, xi))
    bad = ~np.all(np.isfinite(inv_a) & (inv_a > 0), axis=1)
    if bad.any():
        k = int(np.argmax(bad))
        raise LognormalModelError(
            f"diffusion coefficient not finite for parameter with |xi| = {np.linalg.norm(xi[k]):.6g}"
        )
    F = _antiderivative(cfg.nx, forcing)
    trap = np.full(cfg.nx + 1, dx)
    trap[[0, -1]] = 0.5 * dx
    K = (inv_a * F) @ trap / (inv_a @ trap)
    u = _cumtrapz((K[:, None] - F) * inv_a, dx)
    u[:, 0] = 0.0
    return u


def solve(cfg: FieldConfig, forcing: Callable = default_forcing, xi=()) -> np.ndarray:
    """Solution u(., xi) at the grid nodes."""
    return solve_many(cfg, np.atleast_1d(np.asarray(xi, dtype=float))[None, :], forcing)[0]


def h10_norm(v, nx: int | None = None) -> np.ndarray | float:
    """Discrete H^1_0 seminorm by forward differences (along the last axis)."""
    v = np.asarray(v, dtype=float)
    if nx is None:
        nx = v.shape[-1] - 1
    dx = 1.0 / nx
    d = np.diff(v, axis=-1) / dx
    out = np.sqrt(np.sum(d * d, axis=-1) * dx)
    return float(out) if out.ndim == 0 else out


class LognormalDiffusion:
    """Callable model ``xi -> u(., xi)`` for use with the collocation routines."""

    def __init__(self, cfg: FieldConfig, forcing: Callable = default_forcing):
        self.cfg = cfg
        self.forcing = forcing
        self.n_calls = 0

    def __call__(self, xi) -> np.ndarray:
        self.n_calls += 1
        return solve(self.cfg, self.forcing, xi)

    def many(self, X) -> np.ndarray:
        return solve_many(self.cfg, X, self.forcing)

    def norm(self, v):
        return h10_norm(v, self.cfg.nx)
