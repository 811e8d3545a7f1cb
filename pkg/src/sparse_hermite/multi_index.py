r"""Multi-indices, monotone sets and sparse-grid point bookkeeping.

A multi-index is a finitely supported map from dimensions ``m = 1, 2, ...``
to levels in :math:`\mathbb{N}_0`. Only nonzero entries are stored, so a
multi-index never refers to an ambient dimension count.

Ordering
--------
Multi-indices are totally ordered by comparing their canonical
``((dim, level), ...)`` tuples lexicographically. This puts ``0`` first and
``e_1`` before ``e_2``; it is the tie-breaking order used everywhere.

Sparse-grid points
------------------
A point of a tensor grid is identified symbolically by the triples
``(dim, rule_size, node_position)`` of its coordinates. The origin is the
only node shared between Gauss-Hermite rules of different sizes (it is the
middle node of every odd-size rule), so coordinates equal to zero are simply
dropped from the key. Two keys are equal iff the points coincide.
"""
from __future__ import annotations

import itertools
import math
from typing import Iterable, Iterator, Mapping

import numpy as np

from .hermite import gauss_hermite

__all__ = [
    "MultiIndex",
    "MonotoneSet",
    "NotMonotoneError",
    "leq",
    "envelope",
    "neighbors",
    "td_set",
    "hc_set",
    "combination_coefficients",
    "tensor_grid_keys",
    "sparse_grid_keys",
    "sparse_grid_points",
    "count_points",
    "key_to_point",
]

PointKey = tuple  # tuple of (dim, rule_size, position) triples, sorted by dim


class MultiIndex:
    """Immutable, hashable, finitely supported multi-index."""

    __slots__ = ("items", "_hash")

    def __init__(self, levels: Iterable[int] | Mapping[int, int] = ()):
        """Build from a dense sequence ``(nu_1, nu_2, ...)`` or a ``{dim: level}`` map."""
        if isinstance(levels, Mapping):
            pairs = levels.items()
        else:
            pairs = enumerate(levels, start=1)
        items = []
        for m, k in pairs:
            m, k = int(m), int(k)
            if m < 1:
                raise ValueError(f"dimensions are 1-based, got {m}")
            if k < 0:
                raise ValueError(f"levels must be nonnegative, got {k} in dimension {m}")
            if k:
                items.append((m, k))
        items.sort()
        self.items: tuple[tuple[int, int], ...] = tuple(items)
        self._hash = hash(self.items)

    @classmethod
    def _from_items(cls, items: tuple) -> "MultiIndex":
        obj = cls.__new__(cls)
        obj.items = items
        obj._hash = hash(items)
        return obj

    @classmethod
    def unit(cls, m: int, k: int = 1) -> "MultiIndex":
        """The multi-index ``k * e_m``."""
        return cls({m: k})

    def __getitem__(self, m: int) -> int:
        for d, k in self.items:
            if d == m:
                return k
            if d > m:
                break
        return 0

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(m for m, _ in self.items)

    @property
    def max_dim(self) -> int:
        """Largest active dimension, 0 for the zero index."""
        return self.items[-1][0] if self.items else 0

    @property
    def l1(self) -> int:
        return sum(k for _, k in self.items)

    @property
    def l0(self) -> int:
        return len(self.items)

    def dense(self, d: int | None = None) -> tuple[int, ...]:
        d = self.max_dim if d is None else d
        out = [0] * d
        for m, k in self.items:
            if m <= d:
                out[m - 1] = k
        return tuple(out)

    def shift(self, m: int, delta: int = 1) -> "MultiIndex":
        """Return ``self + delta * e_m``."""
        k = self[m] + delta
        if k < 0:
            raise ValueError(f"level would become negative in dimension {m}")
        pairs = dict(self.items)
        pairs[m] = k
        return MultiIndex(pairs)

    def n_points(self) -> int:
        """Size of the tensor grid, prod(1 + nu_m)."""
        return math.prod(k + 1 for _, k in self.items)

    def __eq__(self, other):
        if not isinstance(other, MultiIndex):
            return NotImplemented
        return self.items == other.items

    def __lt__(self, other: "MultiIndex") -> bool:
        return self.items < other.items

    def __le__(self, other: "MultiIndex") -> bool:
        return self.items <= other.items

    def __gt__(self, other: "MultiIndex") -> bool:
        return self.items > other.items

    def __ge__(self, other: "MultiIndex") -> bool:
        return self.items >= other.items

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        if not self.items:
            return "MultiIndex(0)"
        return "MultiIndex({" + ", ".join(f"{m}: {k}" for m, k in self.items) + "})"


ZERO = MultiIndex()


def leq(a: MultiIndex, b: MultiIndex) -> bool:
    """Componentwise partial order ``a <= b``."""
    return all(k <= b[m] for m, k in a.items)


class NotMonotoneError(ValueError):
    """Raised when a multi-index collection is not downward closed."""


class MonotoneSet:
    """Immutable downward-closed finite set of multi-indices.

    Members are kept in lexicographic order; membership tests are O(1).
    """

    __slots__ = ("members", "_lookup", "max_dim")

    def __init__(self, indices: Iterable[MultiIndex], *, check: bool = True):
        lookup = frozenset(indices)
        if check:
            for nu in lookup:
                for m in nu.support:
                    if nu.shift(m, -1) not in lookup:
                        raise NotMonotoneError(
                            f"{nu!r} is present but its lower neighbor in dimension {m} is not"
                        )
        self._lookup = lookup
        self.members: tuple[MultiIndex, ...] = tuple(sorted(lookup))
        self.max_dim = max((nu.max_dim for nu in lookup), default=0)

    def __contains__(self, nu) -> bool:
        return nu in self._lookup

    def __iter__(self) -> Iterator[MultiIndex]:
        return iter(self.members)

    def __len__(self) -> int:
        return len(self.members)

    def __eq__(self, other):
        if not isinstance(other, MonotoneSet):
            return NotImplemented
        return self._lookup == other._lookup

    def __hash__(self):
        return hash(self._lookup)

    def __repr__(self) -> str:
        return f"MonotoneSet({list(self.members)!r})"

    def with_index(self, nu: MultiIndex) -> "MonotoneSet":
        """Return a new set with `nu` added; `nu` must keep the set monotone."""
        if nu in self._lookup:
            return self
        for m in nu.support:
            if nu.shift(m, -1) not in self._lookup:
                raise NotMonotoneError(f"adding {nu!r} would break monotonicity")
        return MonotoneSet(self._lookup | {nu}, check=False)

    def union(self, other: Iterable[MultiIndex]) -> "MonotoneSet":
        return MonotoneSet(self._lookup.union(other))


def envelope(nu: MultiIndex) -> MonotoneSet:
    """Rectangular envelope ``R_nu = {k : k <= nu}``."""
    dims = nu.support
    ranges = [range(k + 1) for _, k in nu.items]
    members = [MultiIndex(dict(zip(dims, levels))) for levels in itertools.product(*ranges)]
    return MonotoneSet(members, check=False)


def is_admissible(nu: MultiIndex, lam) -> bool:
    """True when every lower neighbor of `nu` is in `lam`."""
    return all(nu.shift(m, -1) in lam for m in nu.support)


def neighbors(lam: MonotoneSet, m_buffer: int, max_dim: int | None = None) -> list[MultiIndex]:
    """Admissible neighbors of `lam`, restricted to the first ``max(supp) + m_buffer`` dimensions.

    `max_dim`, when given, additionally caps the reachable dimensions.
    Returned in lexicographic order.
    """
    if len(lam) == 0:
        raise ValueError("neighbors of an empty set are undefined")
    if m_buffer < 1:
        raise ValueError("m_buffer must be positive")
    reach = lam.max_dim + m_buffer
    if max_dim is not None:
        reach = min(reach, max_dim)
    found = set()
    for nu in lam:
        for m in range(1, reach + 1):
            cand = nu.shift(m)
            if cand not in lam and is_admissible(cand, lam):
                found.add(cand)
    return sorted(found)


def td_set(w: int, M: int) -> MonotoneSet:
    """Total-degree set ``{nu : sum(nu) <= w}`` in the first M dimensions."""
    if w < 0 or M < 1:
        raise ValueError("need w >= 0 and M >= 1")
    out = []

    def rec(m, left, acc):
        if m > M:
            out.append(MultiIndex(acc))
            return
        for k in range(left + 1):
            rec(m + 1, left - k, acc + [k])

    rec(1, w, [])
    return MonotoneSet(out, check=False)


def hc_set(w: int, M: int) -> MonotoneSet:
    """Hyperbolic-cross set ``{nu : prod(nu_m + 1) <= w}`` in the first M dimensions."""
    if w < 1 or M < 1:
        raise ValueError("need w >= 1 and M >= 1")
    out = []

    def rec(m, budget, acc):
        if m > M:
            out.append(MultiIndex(acc))
            return
        k = 0
        while (k + 1) <= budget:
            rec(m + 1, budget // (k + 1), acc + [k])
            k += 1

    rec(1, w, [])
    return MonotoneSet(out, check=False)


def combination_coefficients(lam: MonotoneSet) -> dict[MultiIndex, int]:
    """Combination-technique coefficients: ``sum_{i in lam} Delta_i = sum_k c_k U_k``.

    ``c_k = sum over z in {0,1}^supp-window with k + z in lam of (-1)^|z|``;
    zero coefficients are dropped. Keys come out in lexicographic order.
    """
    # scatter from each member mu onto mu - z, z over subsets of supp(mu);
    # monotonicity guarantees mu - z is in lam, and the cost is sum_mu 2^|mu|_0
    acc: dict[MultiIndex, int] = {}
    for mu in lam:
        dims = mu.support
        for z in itertools.product((0, 1), repeat=len(dims)):
            items = tuple((m, k - zm) for (m, k), zm in zip(mu.items, z) if k - zm)
            k = MultiIndex._from_items(items)
            acc[k] = acc.get(k, 0) + (-1) ** sum(z)
    return {k: c for k, c in sorted(acc.items()) if c}


def tensor_grid_keys(k: MultiIndex) -> list[PointKey]:
    """Symbolic keys of the tensor grid of `k`, in C order over its active dimensions."""
    axes = []
    for m, level in k.items:
        n = level + 1
        center = n // 2 if n % 2 else -1
        axes.append([() if j == center else ((m, n, j),) for j in range(n)])
    return [sum(parts, ()) for parts in itertools.product(*axes)]


def key_to_point(key: PointKey, d: int | None = None) -> np.ndarray:
    """Coordinates of the point with symbolic `key` in R^d (default: last active dimension)."""
    need = key[-1][0] if key else 0
    if d is None:
        d = need
    elif d < need:
        raise ValueError(f"point is active in dimension {need} but d={d}")
    xi = np.zeros(d)
    for m, n, j in key:
        xi[m - 1] = gauss_hermite(n).nodes[j]
    return xi


def sparse_grid_keys(lam: Iterable[MultiIndex]) -> list[PointKey]:
    """Deduplicated keys of the union of tensor grids, in first-seen order over sorted `lam`."""
    seen = {}
    for k in sorted(lam):
        for key in tensor_grid_keys(k):
            seen.setdefault(key, None)
    return list(seen)


def sparse_grid_points(lam: MonotoneSet) -> np.ndarray:
    """Points of the sparse grid as an array of shape (n_points, max_dim)."""
    keys = sparse_grid_keys(lam)
    d = max(lam.max_dim, 0)
    if d == 0:
        return np.zeros((len(keys), 0))
    return np.stack([key_to_point(key, d) for key in keys])


def count_points(lam: MonotoneSet) -> tuple[int, int]:
    """Exact number of distinct sparse-grid points and the bound ``|lam|(|lam|+1)/2``."""
    seen = set()
    for k in lam:
        seen.update(tensor_grid_keys(k))
    n = len(lam)
    return len(seen), n * (n + 1) // 2
