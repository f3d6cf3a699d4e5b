"""Open-cover entropy of a finite partial system.

On a finite discrete space every subset is open, so any family of subsets
whose union is the space is an admissible cover. For a cover ``U`` and time
``n`` the pulled-back family is

    U_n   = { alpha_n^{-1}(V & X_n) : V in U }       (nonempty members)
    U_n^c = { V in U : V meets X minus X_{-n} }

whose union again covers the space. ``N(U, n)`` is the smallest subcover of
the join of the pulled-back families for times ``0..n-1``. Sets are handled
as Python-int bitsets over the point indices.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Hashable, Iterable, Sequence

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from . import search
from .core import UNDEF, FinitePartialSystem
from .counting import EXACT_THRESHOLD, Counter
from .entropy import SweepConfig, fit_counts


class CoverError(ValueError):
    """A family of sets fails to cover the space."""


@dataclass(frozen=True)
class FiniteCover:
    sets: tuple  # of frozensets of labels

    @classmethod
    def of(cls, sets: Iterable[Iterable[Hashable]]) -> "FiniteCover":
        out, seen = [], set()
        for s in sets:
            fs = frozenset(s)
            if not fs:
                raise CoverError("cover members must be nonempty")
            if fs not in seen:
                seen.add(fs)
                out.append(fs)
        return cls(tuple(out))

    def check(self, sys: FinitePartialSystem) -> "FiniteCover":
        missing = set(sys.points) - set().union(*self.sets) if self.sets else set(sys.points)
        if missing:
            raise CoverError(f"points {sorted(missing, key=repr)[:5]} are not covered")
        return self

    def __len__(self):
        return len(self.sets)


def _masks(sys: FinitePartialSystem, cover: FiniteCover) -> list[int]:
    out = []
    for s in cover.sets:
        m = 0
        for i in sys.indices(s):
            m |= 1 << int(i)
        out.append(m)
    return out


def _from_masks(sys: FinitePartialSystem, masks: Iterable[int]) -> FiniteCover:
    return FiniteCover.of(sys.labels(search.bits(m)) for m in masks if m)


def _pull_masks(sys: FinitePartialSystem, masks: list[int], n: int) -> tuple[list[int], list[int]]:
    f = sys.map(n)
    src = np.flatnonzero(f != UNDEF)
    inv = {int(f[x]): int(x) for x in src}  # alpha_n^{-1} on X_n
    outside = 0
    for x in np.flatnonzero(~sys.mask(-n)):
        outside |= 1 << int(x)
    main, comp = [], []
    for m in masks:
        pre = 0
        for y in search.bits(m):
            x = inv.get(y)
            if x is not None:
                pre |= 1 << x
        if pre:
            main.append(pre)
        if m & outside:
            comp.append(m)
    return main, comp


@dataclass(frozen=True)
class PulledBack:
    main: FiniteCover
    complement: FiniteCover

    @property
    def cover(self) -> FiniteCover:
        return FiniteCover.of(self.main.sets + self.complement.sets)


def pull_back(sys: FinitePartialSystem, U: FiniteCover, n: int) -> PulledBack:
    """The two pulled-back families at time ``n``; their union covers the space."""
    U.check(sys)
    main, comp = _pull_masks(sys, _masks(sys, U), n)
    out = PulledBack(_from_masks(sys, main), _from_masks(sys, comp))
    try:
        out.cover.check(sys)
    except CoverError as e:
        raise AssertionError(f"pulled-back family at n={n} fails to cover: {e}") from None
    return out


def _join_masks(a: list[int], b: list[int]) -> list[int]:
    return list(dict.fromkeys(x & y for x in a for y in b if x & y))


def _prune(masks: list[int]) -> list[int]:
    """Drop members contained in another member; minimum subcover size is unchanged."""
    order = sorted(set(masks), key=search.popcount, reverse=True)
    kept: list[int] = []
    for m in order:
        if not any(m & ~k == 0 for k in kept):
            kept.append(m)
    return kept


def join(covers: Sequence[FiniteCover], sys: FinitePartialSystem | None = None) -> FiniteCover:
    """All nonempty intersections taking one member from each cover."""
    if not covers:
        raise ValueError("join of no covers")
    if sys is None:
        labels = sorted(set().union(*[set().union(*c.sets) for c in covers]), key=repr)
        index = {p: i for i, p in enumerate(labels)}
        to_mask = lambda s: sum(1 << index[p] for p in s)
        back = lambda m: frozenset(labels[i] for i in search.bits(m))
    else:
        to_mask = lambda s: sum(1 << int(i) for i in sys.indices(s))
        back = lambda m: sys.labels(search.bits(m))
    acc = [to_mask(s) for s in covers[0].sets]
    for c in covers[1:]:
        acc = _join_masks(acc, [to_mask(s) for s in c.sets])
    return FiniteCover.of(back(m) for m in acc)


def joined_masks(sys: FinitePartialSystem, U: FiniteCover, n: int, prune: bool = True) -> list[int]:
    """Members of the join over times ``0..n-1`` (dominated members dropped by default)."""
    if n < 1:
        raise ValueError("n must be at least 1")
    if n - 1 > sys.window:
        raise ValueError(f"time {n - 1} beyond the stored window {sys.window}")
    base = _masks(sys, U.check(sys))
    acc = base
    for i in range(1, n):
        main, comp = _pull_masks(sys, base, i)
        acc = _join_masks(acc, main + comp)
        if prune:
            acc = _prune(acc)
    return _prune(acc) if prune else acc


def min_subcover(universe: int, masks: list[int], exact_threshold: int = EXACT_THRESHOLD,
                 ) -> tuple[int, bool]:
    """Minimum subcover size, solved per connected block of the set system.

    A block covered by a single member counts one; other blocks of at most
    ``exact_threshold`` points are solved exactly and larger ones greedily.
    """
    masks = _prune([m & universe for m in masks if m & universe])
    elems = sorted(search.bits(universe))
    pos = {e: k for k, e in enumerate(elems)}
    rows, cols = [], []
    for s, m in enumerate(masks):
        members = [pos[e] for e in search.bits(m)]
        rows += [members[0]] * len(members)
        cols += members
    g = coo_matrix((np.ones(len(rows)), (rows, cols)), shape=(len(elems),) * 2)
    ncomp, lab = connected_components(g, directed=False)
    block_sets: dict[int, list[int]] = {}
    for m in masks:
        block_sets.setdefault(int(lab[pos[(m & -m).bit_length() - 1]]), []).append(m)
    total, exact = 0, True
    for b in range(ncomp):
        sets = block_sets.get(b, [])
        block = sum(1 << elems[k] for k in np.flatnonzero(lab == b))
        if any(s == block for s in sets):
            total += 1
        elif search.popcount(block) <= exact_threshold:
            total += len(search.min_set_cover(block, sets))
        else:
            total += len(search.greedy_set_cover(block, sets))
            exact = False
    return total, exact


def N_of(sys: FinitePartialSystem, U: FiniteCover, n: int,
         exact_threshold: int = EXACT_THRESHOLD) -> tuple[int, bool]:
    """Minimal subcover cardinality of the ``n``-step join, with an exactness flag."""
    universe = (1 << sys.size) - 1
    return min_subcover(universe, joined_masks(sys, U, n), exact_threshold)


# covers from the metric -----------------------------------------------------


def ball_cover(sys: FinitePartialSystem, eps: float) -> FiniteCover:
    """Open ``eps``-balls around a greedy net; a partition for ultrametrics."""
    D = sys.metric.table()
    covered = np.zeros(sys.size, dtype=bool)
    balls = []
    for i in range(sys.size):
        if not covered[i]:
            ball = D[i] < eps
            balls.append(sys.labels(np.flatnonzero(ball)))
            covered |= ball
    return FiniteCover.of(balls)


def lebesgue_number(sys: FinitePartialSystem, U: FiniteCover) -> float:
    """Largest ``r`` such that every open ``r``-ball lies inside some member.

    Computed as ``min_x max_{V containing x} dist(x, complement of V)``;
    infinite when some member is the whole space.
    """
    D = sys.metric.table()
    masks = [np.isin(np.arange(sys.size), sys.indices(s)) for s in U.sets]
    best = np.zeros(sys.size)
    for inside in masks:
        if inside.all():
            return math.inf
        reach = np.where(inside, D[:, ~inside].min(axis=1), 0.0)
        best = np.maximum(best, reach)
    return float(best.min())


def cover_diameter(sys: FinitePartialSystem, U: FiniteCover) -> float:
    D = sys.metric.table()
    return max(float(D[np.ix_(idx, idx)].max()) for idx in (sys.indices(s) for s in U.sets))


@dataclass
class CoverBoundsReport:
    n: int
    eps: float | None
    delta: float
    N: int
    N_exact: bool
    span_delta: int | None
    sep_eps: int | None
    upper_ok: bool | None  # N <= span(n, delta)
    lower_ok: bool | None  # sep(n, eps) <= N
    lower_applies: bool  # the lower bound is guaranteed only for global actions

    @property
    def passed(self) -> bool:
        return self.upper_ok is not False and not (self.lower_applies and self.lower_ok is False)


def cover_count_bounds(sys: FinitePartialSystem, U: FiniteCover, n: int, eps: float | None = None,
                       exact_threshold: int = EXACT_THRESHOLD) -> CoverBoundsReport:
    """Compare ``N(U, n)`` with spanning counts at the Lebesgue number and separated counts at ``eps``.

    ``N <= span(n, delta)`` holds for every partial action. With ``eps`` above
    every member diameter, ``sep(n, eps) <= N`` holds for global actions;
    members of the complement families can break it otherwise, so for
    partial actions the comparison is reported but not asserted.
    """
    N, N_exact = N_of(sys, U, n, exact_threshold)
    delta = lebesgue_number(sys, U)
    counter = Counter(sys, None, n, exact_threshold)
    # any radius above the diameter gives the same graph as an infinite one
    span_val, span_exact = counter.count("span", n, min(delta, 2 * sys.metric.diameter() + 1.0))
    upper = (N <= span_val) if (N_exact and span_exact) else None
    sep_val = lower = None
    if eps is not None:
        diam = cover_diameter(sys, U)
        if diam >= eps:
            raise ValueError(f"cover diameter {diam} is not below eps={eps}")
        sep_val, sep_exact = counter.count("sep", n, eps)
        lower = (sep_val <= N) if (N_exact and sep_exact) else None
        sep_val = sep_val if sep_exact else None
    return CoverBoundsReport(n, eps, delta, N, N_exact, span_val if span_exact else None,
                             sep_val, upper, lower, sys.is_global())


# estimates ------------------------------------------------------------------


@dataclass
class CoverFit:
    cover_name: str
    counts: list
    exact: list
    slope: float
    saturated: bool


@dataclass
class CoverEntropyEstimate:
    fits: list
    hbar_top: float  # largest slope over the cover family: a lower bound for the supremum


def h_cover(sys: FinitePartialSystem, U: FiniteCover, cfg: SweepConfig = SweepConfig(),
            name: str = "") -> CoverFit:
    n_max = min(cfg.n_max, sys.window + 1)
    ns = list(range(cfg.n_min, n_max + 1))
    vals = [N_of(sys, U, n, cfg.exact_threshold) for n in ns]
    counts = [v for v, _ in vals]
    if all(c == 1 for c in counts):
        return CoverFit(name, counts, [e for _, e in vals], 0.0, False)
    res = fit_counts(ns, counts, sys.size, cfg.fit)
    if res is None:
        return CoverFit(name, counts, [e for _, e in vals], math.nan, True)
    return CoverFit(name, counts, [e for _, e in vals], res[0], False)


def hbar_top(sys: FinitePartialSystem, cfg: SweepConfig = SweepConfig(),
             covers: dict | None = None) -> CoverEntropyEstimate:
    """Largest cover-growth slope over a family of covers (default: ball covers on the grid)."""
    if covers is None:
        covers = {f"balls({e:g})": ball_cover(sys, e) for e in cfg.eps_grid}
    fits = [h_cover(sys, U, cfg, name) for name, U in covers.items()]
    usable = [f.slope for f in fits if not f.saturated]
    if not usable:
        raise ValueError("every cover saturates the space; use coarser covers")
    return CoverEntropyEstimate(fits, max(0.0, max(usable)))
