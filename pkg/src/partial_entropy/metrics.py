"""Metrics on finite carriers.

A metric is evaluated on integer point indices and broadcasts like a numpy
ufunc, so counting code can ask for whole blocks of distances at once
without ever materialising an ``|X| x |X|`` table for large products.
"""

from __future__ import annotations

from typing import Callable

import numpy as np


class MetricError(ValueError):
    """Raised when a distance table is not a metric."""


class Metric:
    """Base class. Subclasses implement :meth:`pairwise` and ``size``."""

    size: int

    def pairwise(self, i, j) -> np.ndarray:
        raise NotImplementedError

    def __call__(self, i, j):
        return self.pairwise(i, j)

    def table(self) -> np.ndarray:
        idx = np.arange(self.size)
        return self.pairwise(idx[:, None], idx[None, :])

    def diameter(self) -> float:
        if self.size <= 1:
            return 0.0
        return float(max(self.pairwise(np.array([i]), np.arange(self.size)).max()
                         for i in range(self.size)))

    def restrict(self, indices) -> "Metric":
        return SubMetric(self, np.asarray(indices, dtype=np.int64))

    def validate(self, atol: float = 0.0) -> None:
        """Check the metric axioms, raising :class:`MetricError` on failure."""
        validate_table(self.table(), atol=atol)


def validate_table(table: np.ndarray, atol: float = 0.0) -> None:
    t = np.asarray(table, dtype=float)
    if t.ndim != 2 or t.shape[0] != t.shape[1]:
        raise MetricError(f"metric table must be square, got shape {t.shape}")
    if not np.all(np.isfinite(t)):
        raise MetricError("metric table has non-finite entries")
    if np.any(t < 0):
        i, j = np.argwhere(t < 0)[0]
        raise MetricError(f"negative distance d({i},{j}) = {t[i, j]}")
    if not np.array_equal(t, t.T):
        i, j = np.argwhere(t != t.T)[0]
        raise MetricError(f"asymmetric distances d({i},{j}) != d({j},{i})")
    if np.any(np.diag(t) != 0):
        i = int(np.flatnonzero(np.diag(t) != 0)[0])
        raise MetricError(f"nonzero self-distance at {i}")
    off = t + np.eye(len(t))
    if np.any(off <= 0):
        i, j = np.argwhere(off <= 0)[0]
        raise MetricError(f"distinct points {i},{j} at distance zero")
    # rounding in sums of distances is not a violation
    slack = atol + 1e-12 * float(t.max(initial=0.0))
    # one pass per intermediate point keeps memory at O(|X|^2)
    for k in range(len(t)):
        via = t[:, k][:, None] + t[k, :][None, :]
        bad = t > via + slack
        if bad.any():
            i, j = np.argwhere(bad)[0]
            raise MetricError(
                f"triangle inequality fails: d({i},{j}) > d({i},{k}) + d({k},{j})")


class TableMetric(Metric):
    """Explicit distance table.

    ``trusted`` skips the cubic triangle-inequality pass in :meth:`validate`
    for tables built by a construction known to produce a metric.
    """

    def __init__(self, table, trusted: bool = False):
        self._table = np.ascontiguousarray(table, dtype=float)
        self.size = len(self._table)
        self.trusted = trusted

    def validate(self, atol=0.0):
        if self.trusted:
            t = self._table
            if t.ndim != 2 or t.shape[0] != t.shape[1] or not np.array_equal(t, t.T):
                raise MetricError("trusted table is not square and symmetric")
            return
        validate_table(self._table, atol=atol)

    def pairwise(self, i, j):
        return self._table[i, j]

    def table(self):
        return self._table

    def diameter(self):
        return float(self._table.max()) if self.size else 0.0

    def restrict(self, indices):
        idx = np.asarray(indices, dtype=np.int64)
        return TableMetric(self._table[np.ix_(idx, idx)], self.trusted)


class DiscreteMetric(Metric):
    def __init__(self, size: int):
        self.size = int(size)

    def pairwise(self, i, j):
        return (np.asarray(i) != np.asarray(j)).astype(float)

    def diameter(self):
        return 1.0 if self.size > 1 else 0.0

    def restrict(self, indices):
        return DiscreteMetric(len(indices))

    def validate(self, atol=0.0):
        pass


class SubMetric(Metric):
    def __init__(self, base: Metric, indices: np.ndarray):
        self.base = base
        self.indices = indices
        self.size = len(indices)

    def pairwise(self, i, j):
        return self.base.pairwise(self.indices[i], self.indices[j])


class ProductMetric(Metric):
    """Max metric on a product, points indexed row-major ``i * nb + j``."""

    def __init__(self, a: Metric, b: Metric):
        self.a, self.b = a, b
        self.nb = b.size
        self.size = a.size * b.size

    def pairwise(self, i, j):
        i = np.asarray(i)
        j = np.asarray(j)
        return np.maximum(self.a.pairwise(i // self.nb, j // self.nb),
                          self.b.pairwise(i % self.nb, j % self.nb))

    def diameter(self):
        return max(self.a.diameter(), self.b.diameter())

    def validate(self, atol=0.0):
        self.a.validate(atol)
        self.b.validate(atol)


class TransformedMetric(Metric):
    """``g(d)`` for a nondecreasing subadditive ``g`` with ``g(0) = 0``.

    Such ``g`` always yields a metric uniformly equivalent to ``d``.
    """

    def __init__(self, base: Metric, func: Callable[[np.ndarray], np.ndarray], name: str = ""):
        self.base = base
        self.func = func
        self.name = name
        self.size = base.size

    def pairwise(self, i, j):
        return self.func(self.base.pairwise(i, j))

    def validate(self, atol=0.0):
        self.base.validate(atol)


def bounded(metric: Metric) -> TransformedMetric:
    """``d / (1 + d)``."""
    return TransformedMetric(metric, lambda d: d / (1.0 + d), "d/(1+d)")


def doubled_capped(metric: Metric) -> TransformedMetric:
    """``min(1, 2 d)``."""
    return TransformedMetric(metric, lambda d: np.minimum(1.0, 2.0 * d), "min(1,2d)")


class BlockMetric(Metric):
    """Disjoint union: each block keeps its metric, distinct blocks sit at ``gap``."""

    def __init__(self, blocks: list[Metric], gap: float):
        self.blocks = list(blocks)
        sizes = [b.size for b in self.blocks]
        self.offsets = np.concatenate([[0], np.cumsum(sizes)]).astype(np.int64)
        self.size = int(self.offsets[-1])
        self.gap = float(gap)
        self._block_of = np.repeat(np.arange(len(sizes)), sizes)

    def pairwise(self, i, j):
        i = np.asarray(i)
        j = np.asarray(j)
        bi, bj = self._block_of[i], self._block_of[j]
        i_b, j_b = np.broadcast_arrays(i, j)
        bi_b, bj_b = np.broadcast_arrays(bi, bj)
        out = np.full(i_b.shape, self.gap, dtype=float)
        for k, block in enumerate(self.blocks):
            sel = (bi_b == k) & (bj_b == k)
            if sel.any():
                out[sel] = block.pairwise(i_b[sel] - self.offsets[k], j_b[sel] - self.offsets[k])
        out[i_b == j_b] = 0.0
        return out

    def validate(self, atol=0.0):
        for b in self.blocks:
            b.validate(atol)
        if self.gap * 2 < max((b.diameter() for b in self.blocks), default=0.0) - atol:
            raise MetricError("block gap below half a block diameter breaks the triangle inequality")


class LayeredMetric(Metric):
    """Copies of one base metric stacked in layers; distinct layers sit at ``gap``.

    ``rep[k]`` is the base point representing point ``k`` and ``layer[k]`` its
    layer. Within a layer distances are base distances of representatives.
    """

    def __init__(self, base: Metric, rep, layer, gap: float):
        self.base = base
        self.rep = np.asarray(rep, dtype=np.int64)
        self.layer = np.asarray(layer, dtype=np.int64)
        self.size = len(self.rep)
        self.gap = float(gap)

    def pairwise(self, i, j):
        same = self.layer[i] == self.layer[j]
        return np.where(same, self.base.pairwise(self.rep[i], self.rep[j]), self.gap)

    def validate(self, atol=0.0):
        self.base.validate(atol)
        if 2 * self.gap < self.base.diameter() - atol:
            raise MetricError("layer gap below half the base diameter breaks the triangle inequality")


def as_metric(metric, size: int | None = None) -> Metric:
    """Coerce a table, a :class:`Metric` or the string ``"discrete"``."""
    if isinstance(metric, Metric):
        return metric
    if isinstance(metric, str):
        if metric != "discrete":
            raise ValueError(f"unknown metric name {metric!r}")
        if size is None:
            raise ValueError("discrete metric needs a size")
        return DiscreteMetric(size)
    return TableMetric(np.asarray(metric, dtype=float))


def chebyshev(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Chebyshev distance between coordinate arrays of shape ``(..., dim)``."""
    return np.max(np.abs(np.asarray(p) - np.asarray(q)), axis=-1)
