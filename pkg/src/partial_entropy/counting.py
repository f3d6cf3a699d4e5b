"""Separated, spanning and cover counts.

Everything runs on the too-close graph ``G = {x ~ y : d_n(x, y) < eps}``
over the carrier ``K``:

* an ``(n, eps)``-separated set is an independent set of ``G``;
* an ``(n, eps)``-spanning set is a dominating set of ``G`` restricted to
  edges joining points with equal index signature ("strict"), or of ``G``
  itself ("weak", the notion a maximal separated set satisfies);
* an ``(n, eps)``-cover is a cover of ``K`` by cliques of ``G`` (sets of
  ``d_n``-diameter below ``eps``).

Greedy passes in carrier order give bounds. Exact values are solved per
connected component: a component that is a clique contributes exactly one,
any other component is solved by branch and bound when it has at most
``exact_threshold`` points. Counts are exact whenever every component is
handled, so large carriers with clustered ``d_n`` stay exact.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Hashable, Iterable

import numpy as np
from scipy import sparse
from scipy.sparse.csgraph import connected_components

from . import search
from .core import FinitePartialSystem
from .orbit import OrbitTable

EXACT_THRESHOLD = 64
KINDS = ("sep", "span", "span_weak", "cov")


class ExactTooLarge(RuntimeError):
    """A component exceeds the exact-search threshold."""


class ChainViolation(AssertionError):
    """An inequality between exact counts that always holds has failed."""


@dataclass
class CountReport:
    n: int
    eps: float
    carrier_size: int
    sep_lower: int
    sep_exact: int | None
    span_upper: int
    span_exact: int | None
    span_weak_upper: int
    span_weak_exact: int | None
    cov_upper: int
    cov_exact: int | None
    cov2_upper: int
    cov2_exact: int | None
    chain: dict = field(default_factory=dict)

    @property
    def exact(self) -> bool:
        return None not in (self.sep_exact, self.span_exact, self.span_weak_exact,
                            self.cov_exact, self.cov2_exact)

    @property
    def exact_flags(self) -> str:
        if self.exact:
            return "exact"
        names = [k for k in ("sep", "span", "span_weak", "cov", "cov2")
                 if getattr(self, f"{k}_exact") is None]
        return "inexact:" + "+".join(names)

    def value(self, kind: str) -> int:
        """Best available count of ``kind``: exact if known, else the greedy bound."""
        exact = getattr(self, f"{kind}_exact")
        if exact is not None:
            return exact
        return getattr(self, "sep_lower" if kind == "sep" else f"{kind}_upper")

    def is_exact(self, kind: str) -> bool:
        return getattr(self, f"{kind}_exact") is not None


# inequalities that hold for exact counts whatever the partial action;
# ``tight`` links mix span notions and may fail, see chain_links()
PROVABLE_LINKS = ("cov2<=span", "span_weak<=sep", "sep<=cov")
STATED_LINKS = ("cov2<=span", "span<=sep", "sep<=cov", "cov2<=span_weak")


def chain_links(r: CountReport) -> dict[str, bool | None]:
    """Each link of ``cov(2e) <= span(e) <= sep(e) <= cov(e)`` on exact counts.

    ``span`` is the strict notion. The chain as usually stated also needs
    ``span <= sep`` (only guaranteed for the weak notion) and, read with the
    weak notion, ``cov(2e) <= span_weak`` (only guaranteed for the strict
    one); both are reported but only :data:`PROVABLE_LINKS` always hold.
    """
    def le(a, b):
        return None if a is None or b is None else a <= b

    return {
        "cov2<=span": le(r.cov2_exact, r.span_exact),
        "span<=sep": le(r.span_exact, r.sep_exact),
        "span_weak<=sep": le(r.span_weak_exact, r.sep_exact),
        "sep<=cov": le(r.sep_exact, r.cov_exact),
        "cov2<=span_weak": le(r.cov2_exact, r.span_weak_exact),
    }


class Counter:
    """Count engine bound to one system, carrier and maximal horizon."""

    def __init__(self, sys: FinitePartialSystem, carrier=None, horizon: int | None = None,
                 exact_threshold: int = EXACT_THRESHOLD):
        self.sys = sys
        horizon = horizon if horizon is not None else sys.window + 1
        self.table = OrbitTable(sys, carrier, horizon)
        self.exact_threshold = exact_threshold
        self._cache = {}

    @property
    def carrier(self) -> np.ndarray:
        return self.table.carrier

    def labels(self, positions) -> frozenset:
        return self.sys.labels(self.table.carrier[np.asarray(list(positions), dtype=np.int64)])

    # graphs ---------------------------------------------------------------

    def graph(self, n: int, eps: float, strict: bool = False) -> sparse.csr_matrix:
        key = ("g", n, float(eps), strict)
        if key not in self._cache:
            r, c = self.table.close_pairs(n, eps)
            if strict:
                codes = self.table.signature_codes(n)
                keep = codes[r] == codes[c]
                r, c = r[keep], c[keep]
            m = len(self.table)
            data = np.ones(2 * len(r), dtype=bool)
            g = sparse.csr_matrix((data, (np.concatenate([r, c]), np.concatenate([c, r]))),
                                  shape=(m, m))
            g.sum_duplicates()
            self._cache[key] = g
        return self._cache[key]

    # greedy ---------------------------------------------------------------

    def greedy_separated(self, n: int, eps: float) -> list[int]:
        """Maximal independent set in carrier order (also a weak spanning set)."""
        return _greedy_dominating(self.graph(n, eps))

    def greedy_spanning(self, n: int, eps: float, strict: bool = True) -> list[int]:
        return _greedy_dominating(self.graph(n, eps, strict))

    def greedy_cover(self, n: int, eps: float) -> list[list[int]]:
        return _greedy_clique_partition(self.graph(n, eps))

    # exact ----------------------------------------------------------------

    def exact_separated(self, n: int, eps: float) -> int:
        return self._per_component(self.graph(n, eps), _mis_size)

    def exact_spanning(self, n: int, eps: float, strict: bool = True) -> int:
        return self._per_component(self.graph(n, eps, strict), _mds_size)

    def exact_cover(self, n: int, eps: float) -> int:
        return self._per_component(self.graph(n, eps), _mcc_size)

    def _per_component(self, g: sparse.csr_matrix, solve) -> int:
        ncomp, labels = connected_components(g, directed=False)
        sizes = np.bincount(labels, minlength=ncomp)
        deg = np.diff(g.indptr)
        edges = np.bincount(labels, weights=deg, minlength=ncomp) / 2
        cliques = edges == sizes * (sizes - 1) / 2
        hard = np.flatnonzero(~cliques)
        if len(hard) and sizes[hard].max() > self.exact_threshold:
            raise ExactTooLarge(
                f"component of {int(sizes[hard].max())} points exceeds exact threshold "
                f"{self.exact_threshold}")
        total = int(cliques.sum())
        if len(hard):
            order = np.argsort(labels, kind="stable")
            bounds = np.concatenate([[0], np.cumsum(sizes)])
            for comp in hard:
                members = order[bounds[comp]:bounds[comp + 1]]
                total += solve(_bitset_graph(g, members))
        return total

    def _maybe(self, fn, *args):
        try:
            return fn(*args)
        except ExactTooLarge:
            return None

    def count(self, kind: str, n: int, eps: float, exact: bool = True) -> tuple[int, bool]:
        """One count as ``(value, is_exact)``; ``kind`` is sep, span, span_weak or cov.

        Falls back to the greedy bound when exact search is off or refused.
        """
        key = ("c", kind, n, float(eps), exact)
        if key in self._cache:
            return self._cache[key]
        if kind not in KINDS:
            raise ValueError(f"unknown count kind {kind!r}; expected one of {KINDS}")
        solvers = {
            "sep": (self.exact_separated, lambda: self.greedy_separated(n, eps)),
            "span": (lambda n, e: self.exact_spanning(n, e, True),
                     lambda: self.greedy_spanning(n, eps, True)),
            "span_weak": (lambda n, e: self.exact_spanning(n, e, False),
                          lambda: self.greedy_spanning(n, eps, False)),
            "cov": (self.exact_cover, lambda: self.greedy_cover(n, eps)),
        }
        solve, greedy = solvers[kind]
        value = self._maybe(solve, n, eps) if exact else None
        out = (value, True) if value is not None else (len(greedy()), False)
        self._cache[key] = out
        return out

    # report ---------------------------------------------------------------

    def report(self, n: int, eps: float, exact: bool = True, check: bool = True) -> CountReport:
        key = ("r", n, float(eps), exact)
        if key in self._cache:
            return self._cache[key]
        ex = (lambda fn, *a: self._maybe(fn, *a)) if exact else (lambda fn, *a: None)
        r = CountReport(
            n=n, eps=float(eps), carrier_size=len(self.table),
            sep_lower=len(self.greedy_separated(n, eps)),
            sep_exact=ex(self.exact_separated, n, eps),
            span_upper=len(self.greedy_spanning(n, eps, True)),
            span_exact=ex(self.exact_spanning, n, eps, True),
            span_weak_upper=len(self.greedy_spanning(n, eps, False)),
            span_weak_exact=ex(self.exact_spanning, n, eps, False),
            cov_upper=len(self.greedy_cover(n, eps)),
            cov_exact=ex(self.exact_cover, n, eps),
            cov2_upper=len(self.greedy_cover(n, 2 * eps)),
            cov2_exact=ex(self.exact_cover, n, 2 * eps),
        )
        r.chain = chain_links(r)
        if check:
            _check_bounds(r)
            broken = [k for k in PROVABLE_LINKS if r.chain[k] is False]
            if broken:
                raise ChainViolation(
                    f"count inequality {', '.join(broken)} fails at n={n}, eps={eps}: {r}")
        self._cache[key] = r
        return r


def _check_bounds(r: CountReport):
    pairs = [("sep", r.sep_lower, r.sep_exact, False), ("span", r.span_upper, r.span_exact, True),
             ("span_weak", r.span_weak_upper, r.span_weak_exact, True),
             ("cov", r.cov_upper, r.cov_exact, True), ("cov2", r.cov2_upper, r.cov2_exact, True)]
    for name, greedy, exact, upper in pairs:
        if exact is None:
            continue
        if (greedy < exact) if upper else (greedy > exact):
            raise ChainViolation(f"greedy {name} bound {greedy} on wrong side of exact {exact}")


def _greedy_dominating(g: sparse.csr_matrix) -> list[int]:
    m = g.shape[0]
    covered = np.zeros(m, dtype=bool)
    chosen = []
    ptr, ind = g.indptr, g.indices
    for v in range(m):
        if not covered[v]:
            chosen.append(v)
            covered[v] = True
            covered[ind[ptr[v]:ptr[v + 1]]] = True
    return chosen


def _greedy_clique_partition(g: sparse.csr_matrix) -> list[list[int]]:
    m = g.shape[0]
    used = np.zeros(m, dtype=bool)
    ptr, ind = g.indptr, g.indices
    parts = []
    for v in range(m):
        if used[v]:
            continue
        clique = [v]
        used[v] = True
        cand = np.zeros(m, dtype=bool)
        cand[ind[ptr[v]:ptr[v + 1]]] = True
        cand &= ~used
        while True:
            nxt = np.flatnonzero(cand)
            if not len(nxt):
                break
            u = int(nxt[0])
            clique.append(u)
            used[u] = True
            keep = np.zeros(m, dtype=bool)
            keep[ind[ptr[u]:ptr[u + 1]]] = True
            cand &= keep & ~used
        parts.append(clique)
    return parts


def _bitset_graph(g: sparse.csr_matrix, members: np.ndarray) -> list[int]:
    local = {int(v): k for k, v in enumerate(members)}
    nbr = [0] * len(members)
    for k, v in enumerate(members):
        mask = 0
        for u in g.indices[g.indptr[v]:g.indptr[v + 1]]:
            mask |= 1 << local[int(u)]
        nbr[k] = mask
    return nbr


def _full(nbr):
    return (1 << len(nbr)) - 1


def _mis_size(nbr):
    return search.popcount(search.max_independent_set(nbr, _full(nbr)))


def _mds_size(nbr):
    return len(search.min_dominating_set(nbr, _full(nbr)))


def _mcc_size(nbr):
    return len(search.min_clique_cover(nbr, _full(nbr)))


# label-level operations -----------------------------------------------------


def _counter(sys, K, n, exact_threshold=EXACT_THRESHOLD) -> Counter:
    if K is not None:
        K = list(K)
        if not K:
            raise ValueError("carrier K must be nonempty")
    return Counter(sys, K, n, exact_threshold)


def greedy_separated(sys: FinitePartialSystem, K: Iterable[Hashable] | None, n: int, eps: float) -> frozenset:
    c = _counter(sys, K, n)
    return c.labels(c.greedy_separated(n, eps))


def exact_separated(sys: FinitePartialSystem, K, n: int, eps: float,
                    exact_threshold: int = EXACT_THRESHOLD) -> int:
    """Maximum cardinality of an ``(n, eps)``-separated subset of ``K``.

    Raises :class:`ExactTooLarge` when a non-clique component of the
    too-close graph has more than ``exact_threshold`` points.
    """
    return _counter(sys, K, n, exact_threshold).exact_separated(n, eps)


def greedy_spanning(sys: FinitePartialSystem, K, n: int, eps: float, strict: bool = True) -> frozenset:
    c = _counter(sys, K, n)
    return c.labels(c.greedy_spanning(n, eps, strict))


def exact_spanning(sys: FinitePartialSystem, K, n: int, eps: float, strict: bool = True,
                   exact_threshold: int = EXACT_THRESHOLD) -> int:
    return _counter(sys, K, n, exact_threshold).exact_spanning(n, eps, strict)


def exact_cover_count(sys: FinitePartialSystem, K, n: int, eps: float,
                      exact_threshold: int = EXACT_THRESHOLD) -> tuple[int, bool]:
    """Minimum number of subsets of ``K`` of ``d_n``-diameter below ``eps`` covering ``K``.

    Returns ``(count, exact)``; past the threshold the count is the greedy
    clique-partition upper bound and ``exact`` is false.
    """
    c = _counter(sys, K, n, exact_threshold)
    try:
        return c.exact_cover(n, eps), True
    except ExactTooLarge:
        return len(c.greedy_cover(n, eps)), False


def greedy_cover(sys: FinitePartialSystem, K, n: int, eps: float) -> list[frozenset]:
    c = _counter(sys, K, n)
    return [c.labels(part) for part in c.greedy_cover(n, eps)]


def count_report(sys: FinitePartialSystem, K, n: int, eps: float,
                 exact_threshold: int = EXACT_THRESHOLD) -> CountReport:
    return _counter(sys, K, n, exact_threshold).report(n, eps)
