"""Index signatures, the orbit pseudo-metric ``d_n`` and partial dynamical balls.

``I_n(x)`` is the set of times ``i < n`` at which ``alpha_i(x)`` is defined and

    d_n(x, y) = max over i in I_n(x) & I_n(y) of d(alpha_i(x), alpha_i(y)).

``d_n`` is symmetric and vanishes on the diagonal, but it is only a metric on
each class of points sharing one signature.

:class:`OrbitTable` precomputes ``alpha_i`` over a carrier once and serves the
"too-close" graphs ``{x ~ y : d_n(x, y) < eps}`` that the counting code runs
on. Small carriers use a dense ``d_n`` matrix updated incrementally in ``n``;
large ones keep a sparse edge list per ``eps`` and only re-test surviving
edges at each new time, since ``d_n`` is nondecreasing in ``n``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Hashable, Iterable

import numpy as np
from scipy import sparse

from .core import UNDEF, FinitePartialSystem

DENSE_LIMIT = 3000
_BLOCK_ENTRIES = 4_000_000


@dataclass(frozen=True)
class IndexSignature:
    n: int
    members: frozenset

    def __post_init__(self):
        if 0 not in self.members:
            raise ValueError("0 always belongs to an index signature")

    def as_mask(self) -> int:
        return sum(1 << i for i in self.members)


@dataclass(frozen=True)
class DnValue:
    value: float
    support: frozenset


def index_signature(sys: FinitePartialSystem, x: Hashable, n: int) -> IndexSignature:
    """``I_n(x) = {i < n : x in X_{-i}}``."""
    _check_horizon(sys, n)
    k = sys.index(x)
    return IndexSignature(n, frozenset(i for i in range(n) if sys.mask(-i)[k]))


def d_n(sys: FinitePartialSystem, x: Hashable, y: Hashable, n: int) -> DnValue:
    _check_horizon(sys, n)
    i, j = sys.index(x), sys.index(y)
    support = frozenset(t for t in range(n) if sys.mask(-t)[i] and sys.mask(-t)[j])
    value = max((float(sys.metric.pairwise(sys.map(t)[i], sys.map(t)[j])) for t in support),
                default=0.0)
    return DnValue(value, support)


def partial_ball(sys: FinitePartialSystem, x: Hashable, n: int, eps: float) -> frozenset:
    """Intersection over ``i in I_n(x)`` of ``alpha_i^{-1}(B_eps(alpha_i(x)) & X_i)``."""
    _check_eps(eps)
    _check_horizon(sys, n)
    k = sys.index(x)
    inside = np.ones(sys.size, dtype=bool)
    for i in range(n):
        f = sys.map(i)
        if f[k] == UNDEF:
            continue
        ok = f != UNDEF
        close = np.zeros(sys.size, dtype=bool)
        close[ok] = sys.metric.pairwise(f[ok], f[k]) < eps
        inside &= close
    return sys.labels(np.flatnonzero(inside))


def signature_neighborhood(sys: FinitePartialSystem, x: Hashable, n: int, eps: float,
                           carrier: Iterable[Hashable] | None = None) -> frozenset:
    """``U(x, n, eps) = {y in K : I_n(y) = I_n(x), d_n(x, y) < eps}``."""
    _check_eps(eps)
    table = OrbitTable(sys, carrier, n)
    k = table.position(sys.index(x))
    codes = table.signature_codes(n)
    row = table.dn_row(k, n)
    hit = (codes == codes[k]) & (row < eps)
    return sys.labels(table.carrier[hit])


def _check_eps(eps: float):
    if not eps > 0:
        raise ValueError("eps must be positive")


def _check_horizon(sys: FinitePartialSystem, n: int):
    if n < 1:
        raise ValueError("horizon n must be at least 1")
    if n - 1 > sys.window:
        raise ValueError(f"horizon {n} needs alpha_{n - 1}, beyond the stored window {sys.window}")


class OrbitTable:
    """``alpha_i`` for ``i < horizon`` over a carrier, plus cached ``d_n`` data."""

    def __init__(self, sys: FinitePartialSystem, carrier: Iterable[Hashable] | np.ndarray | None,
                 horizon: int, dense_limit: int = DENSE_LIMIT):
        _check_horizon(sys, horizon)
        self.sys = sys
        if carrier is None:
            self.carrier = np.arange(sys.size, dtype=np.int64)
        elif isinstance(carrier, np.ndarray) and carrier.dtype.kind in "iu":
            self.carrier = np.asarray(carrier, dtype=np.int64)
        else:
            self.carrier = sys.indices(carrier)
        if len(self.carrier) == 0:
            raise ValueError("carrier must be nonempty")
        if len(np.unique(self.carrier)) != len(self.carrier):
            raise ValueError("carrier has repeated points")
        self.horizon = horizon
        self.orbit = np.stack([sys.map(i)[self.carrier] for i in range(horizon)])
        self.defined = self.orbit != UNDEF
        self.dense = len(self.carrier) <= dense_limit
        self._pos = None
        self._dn = {}
        self._dn_top = None
        self._edges = {}

    def __len__(self):
        return len(self.carrier)

    def position(self, point_index: int) -> int:
        if self._pos is None:
            self._pos = {int(p): k for k, p in enumerate(self.carrier)}
        return self._pos[int(point_index)]

    def signature_codes(self, n: int) -> np.ndarray:
        """Signature ``I_n`` of each carrier point as an integer bitmask."""
        self._check(n)
        if n > 62:
            return np.array([hash(tuple(col)) for col in self.defined[:n].T])
        weights = (np.int64(1) << np.arange(n, dtype=np.int64))
        return (self.defined[:n].astype(np.int64) * weights[:, None]).sum(axis=0)

    def step_distance(self, i: int, r: np.ndarray, c: np.ndarray) -> np.ndarray:
        """``d(alpha_i(x), alpha_i(y))`` where both are defined, else 0."""
        both = self.defined[i, r] & self.defined[i, c]
        out = np.zeros(np.broadcast(r, c).shape)
        rb, cb = np.broadcast_arrays(r, c)
        if both.any():
            out[both] = self.sys.metric.pairwise(self.orbit[i, rb[both]], self.orbit[i, cb[both]])
        return out

    def dn_row(self, k: int, n: int) -> np.ndarray:
        self._check(n)
        others = np.arange(len(self))
        row = np.zeros(len(self))
        for i in range(n):
            row = np.maximum(row, self.step_distance(i, np.full(len(self), k), others))
        return row

    def dn_matrix(self, n: int) -> np.ndarray:
        """Dense ``d_n`` over the carrier (small carriers only)."""
        self._check(n)
        if not self.dense:
            raise MemoryError("carrier too large for a dense d_n matrix")
        if n in self._dn:
            return self._dn[n]
        start, D = (0, None) if self._dn_top is None else self._dn_top
        if start > n:
            start, D = 0, None
        idx = np.arange(len(self))
        r, c = idx[:, None], idx[None, :]
        for i in range(start, n):
            step = self.step_distance(i, r, c)
            D = step if D is None else np.maximum(D, step)
        self._dn_top = (n, D)
        self._dn[n] = D
        return D

    def close_pairs(self, n: int, eps: float) -> tuple[np.ndarray, np.ndarray]:
        """Pairs ``r < c`` of carrier positions with ``d_n < eps``."""
        self._check(n)
        _check_eps(eps)
        if self.dense:
            D = self.dn_matrix(n)
            r, c = np.nonzero(np.triu(D < eps, k=1))
            return r.astype(np.int64), c.astype(np.int64)
        key = float(eps)
        if key not in self._edges:
            self._edges[key] = (1, *self._time_zero_pairs(eps))
        done, r, c = self._edges[key]
        if done > n:
            done, (r, c) = 1, self._time_zero_pairs(eps)
        for i in range(done, n):
            keep = self.step_distance(i, r, c) < eps
            r, c = r[keep], c[keep]
        self._edges[key] = (max(done, n), r, c)
        return r, c

    def close_graph(self, n: int, eps: float) -> sparse.csr_matrix:
        r, c = self.close_pairs(n, eps)
        m = len(self)
        data = np.ones(2 * len(r), dtype=bool)
        return sparse.csr_matrix((data, (np.concatenate([r, c]), np.concatenate([c, r]))),
                                 shape=(m, m))

    def _time_zero_pairs(self, eps):
        m = len(self)
        block = max(1, _BLOCK_ENTRIES // m)
        rows, cols = [], []
        pts = self.carrier
        for lo in range(0, m, block):
            hi = min(m, lo + block)
            dist = self.sys.metric.pairwise(pts[lo:hi, None], pts[None, :])
            rr, cc = np.nonzero(dist < eps)
            rr = rr + lo
            keep = cc > rr
            rows.append(rr[keep])
            cols.append(cc[keep])
        return np.concatenate(rows).astype(np.int64), np.concatenate(cols).astype(np.int64)

    def _check(self, n):
        if not 1 <= n <= self.horizon:
            raise ValueError(f"horizon {n} outside [1, {self.horizon}]")
