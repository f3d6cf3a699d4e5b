"""Partial actions of the integers on finite and sampled metric spaces.

A :class:`FinitePartialSystem` stores, for every ``n`` in ``[-N, N]``, the
domain ``X_n`` as a boolean mask and the partial bijection
``alpha_n : X_{-n} -> X_n`` as an index array with ``-1`` marking points
outside ``X_{-n}``. Everything is integer-indexed internally; public helpers
accept and return point labels.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable, Hashable, Iterable, Mapping, Sequence

import numpy as np
from scipy.spatial import cKDTree

from .metrics import (
    BlockMetric,
    DiscreteMetric,
    Metric,
    MetricError,
    ProductMetric,
    TableMetric,
    as_metric,
    chebyshev,
)

UNDEF = -1


class AxiomError(ValueError):
    """A system failed the partial-action axioms where they were required."""

    def __init__(self, message: str, report: "AxiomReport | None" = None):
        super().__init__(message)
        self.report = report


@dataclass(frozen=True)
class Restriction:
    """Provenance of a system built by restricting a global permutation.

    ``artificial`` marks ambient points that only exist to close a finite
    model into a permutation (e.g. the return arc of a translation); orbits
    through them do not count as genuine returns.
    """

    ambient_points: tuple
    perm: np.ndarray
    subset: np.ndarray
    artificial: np.ndarray


@dataclass(frozen=True, eq=False)
class FinitePartialSystem:
    points: tuple
    metric: Metric
    window: int
    domain: np.ndarray  # (2N+1, |X|) bool, row n+N is X_n
    maps: np.ndarray  # (2N+1, |X|) int, row n+N is alpha_n, UNDEF off X_{-n}
    provenance: Restriction | None = None
    name: str = ""
    covers: Mapping[str, frozenset] = field(default_factory=dict)
    _index: dict = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self._index is None:
            object.__setattr__(self, "_index", {p: i for i, p in enumerate(self.points)})
        if len(self._index) != len(self.points):
            raise ValueError("point labels must be distinct")
        if self.metric.size != len(self.points):
            raise ValueError("metric size does not match the number of points")
        shape = (2 * self.window + 1, len(self.points))
        if self.domain.shape != shape or self.maps.shape != shape:
            raise ValueError(f"domain/map arrays must have shape {shape}")
        self.domain.setflags(write=False)
        self.maps.setflags(write=False)

    # construction ---------------------------------------------------------

    @classmethod
    def build(cls, points: Sequence[Hashable], metric, window: int,
              domains: Mapping[int, Iterable[Hashable]],
              maps: Mapping[int, Mapping[Hashable, Hashable]], **kw) -> "FinitePartialSystem":
        """Build from label-level data. Missing indices mean empty domains/maps."""
        points = tuple(points)
        if window < 1:
            raise ValueError("window must be at least 1")
        index = {p: i for i, p in enumerate(points)}
        if len(index) != len(points):
            raise ValueError("point labels must be distinct")
        m = len(points)
        dom = np.zeros((2 * window + 1, m), dtype=bool)
        mp = np.full((2 * window + 1, m), UNDEF, dtype=np.int64)
        for n, ids in domains.items():
            if abs(n) > window:
                raise ValueError(f"domain index {n} outside window {window}")
            for p in ids:
                dom[n + window, _lookup(index, p)] = True
        for n, table in maps.items():
            if abs(n) > window:
                raise ValueError(f"map index {n} outside window {window}")
            for p, q in table.items():
                mp[n + window, _lookup(index, p)] = _lookup(index, q)
        return cls(points, as_metric(metric, m), int(window), dom, mp, **kw)

    # label-level access -----------------------------------------------------

    @property
    def size(self) -> int:
        return len(self.points)

    def index(self, label) -> int:
        return _lookup(self._index, label)

    def indices(self, labels: Iterable[Hashable]) -> np.ndarray:
        return np.array([self.index(p) for p in labels], dtype=np.int64)

    def labels(self, idx: Iterable[int]) -> frozenset:
        return frozenset(self.points[int(i)] for i in idx)

    def mask(self, n: int) -> np.ndarray:
        """Boolean membership mask of ``X_n``."""
        self._check_index(n)
        return self.domain[n + self.window]

    def map(self, n: int) -> np.ndarray:
        """Index array of ``alpha_n`` (``UNDEF`` off ``X_{-n}``)."""
        self._check_index(n)
        return self.maps[n + self.window]

    def X(self, n: int) -> frozenset:
        return self.labels(np.flatnonzero(self.mask(n)))

    def alpha(self, n: int, x):
        """``alpha_n(x)`` as a label, or ``None`` when ``x`` is outside ``X_{-n}``."""
        y = self.map(n)[self.index(x)]
        return None if y == UNDEF else self.points[y]

    def distance(self, x, y) -> float:
        return float(self.metric.pairwise(self.index(x), self.index(y)))

    def _check_index(self, n: int):
        if abs(n) > self.window:
            raise IndexError(f"index {n} outside stored window [-{self.window}, {self.window}]")

    def with_metric(self, metric: Metric, name: str | None = None) -> "FinitePartialSystem":
        return FinitePartialSystem(self.points, metric, self.window, self.domain, self.maps,
                                   self.provenance, name if name is not None else self.name,
                                   self.covers)

    def truncate(self, window: int) -> "FinitePartialSystem":
        if window > self.window:
            raise ValueError("cannot extend a stored window")
        lo, hi = self.window - window, self.window + window + 1
        return FinitePartialSystem(self.points, self.metric, window, self.domain[lo:hi].copy(),
                                   self.maps[lo:hi].copy(), self.provenance, self.name,
                                   self.covers)

    def is_global(self) -> bool:
        return bool(self.domain.all())

    def __repr__(self):
        label = f"{self.name!r}, " if self.name else ""
        return f"FinitePartialSystem({label}{self.size} points, window={self.window})"


def _lookup(index: dict, label):
    try:
        return index[label]
    except KeyError:
        raise KeyError(f"unknown point {label!r}") from None


# ---------------------------------------------------------------------------
# axioms


@dataclass
class AxiomReport:
    passed: bool
    violations: list[tuple[str, tuple]]

    def by_axiom(self, axiom: str) -> list[tuple]:
        return [w for a, w in self.violations if a == axiom]

    def __bool__(self):
        return self.passed

    def summary(self, limit: int = 5) -> str:
        if self.passed:
            return "all partial-action axioms hold"
        head = "; ".join(f"axiom ({a}) at {w}" for a, w in self.violations[:limit])
        more = len(self.violations) - limit
        return head + (f"; ... {more} more" if more > 0 else "")


AXIOM_NAMES = {
    "def": "alpha_n is a bijection X_{-n} -> X_n",
    "i": "X_0 = X and alpha_0 = id",
    "ii": "alpha_n(X_{-n} & X_m) = X_n & X_{n+m}",
    "iii": "alpha_n(alpha_m(x)) = alpha_{n+m}(x) on X_{-m} & X_{-m-n}",
}


def check_axioms(sys: FinitePartialSystem, check_metric: bool = True) -> AxiomReport:
    """Exhaustively test the partial-action axioms over the stored window.

    A malformed metric raises :class:`MetricError` instead of being reported
    as an axiom violation. Witnesses are label tuples: ``(n, x)`` for the
    bijection and identity checks, ``(n, m, x)`` for the other two.
    """
    if sys.window < 1:
        raise ValueError("window must be at least 1")
    if check_metric:
        sys.metric.validate()
    N, P = sys.window, sys.points
    out: list[tuple[str, tuple]] = []

    for n in range(-N, N + 1):
        f = sys.map(n)
        defined = f != UNDEF
        for x in np.flatnonzero(defined != sys.mask(-n)):
            out.append(("def", (n, P[x])))
        img = f[defined]
        bad_img = ~sys.mask(n)[img]
        for x in np.flatnonzero(defined)[bad_img]:
            out.append(("def", (n, P[x])))
        uniq, first, counts = np.unique(img, return_index=True, return_counts=True)
        if (counts > 1).any():
            src = np.flatnonzero(defined)
            for y in uniq[counts > 1]:
                for x in src[img == y][1:]:
                    out.append(("def", (n, P[x])))
        hit = np.zeros(sys.size, dtype=bool)
        hit[img] = True
        for y in np.flatnonzero(sys.mask(n) & ~hit):
            out.append(("def", (n, P[y])))

    ident = np.arange(sys.size)
    for x in np.flatnonzero(~sys.mask(0) | (sys.map(0) != ident)):
        out.append(("i", (0, P[x])))

    for n in range(-N, N + 1):
        f = sys.map(n)
        for m in range(-N, N + 1):
            if abs(n + m) > N:
                continue
            src = sys.mask(-n) & sys.mask(m) & (f != UNDEF)
            lhs = np.zeros(sys.size, dtype=bool)
            lhs[f[src]] = True
            rhs = sys.mask(n) & sys.mask(n + m)
            for y in np.flatnonzero(lhs != rhs):
                out.append(("ii", (n, m, P[y])))

    for m in range(-N, N + 1):
        fm = sys.map(m)
        for n in range(-N, N + 1):
            if abs(n + m) > N:
                continue
            fn, fnm = sys.map(n), sys.map(n + m)
            xs = np.flatnonzero(sys.mask(-m) & sys.mask(-m - n))
            y = fm[xs]
            z = np.where(y != UNDEF, fn[np.where(y != UNDEF, y, 0)], UNDEF)
            w = fnm[xs]
            bad = (y == UNDEF) | (z == UNDEF) | (w == UNDEF) | (z != w)
            for x in xs[bad]:
                out.append(("iii", (n, m, P[x])))

    return AxiomReport(not out, out)


def require_axioms(sys: FinitePartialSystem, check_metric: bool = True) -> FinitePartialSystem:
    report = check_axioms(sys, check_metric=check_metric)
    if not report.passed:
        raise AxiomError(f"not a partial action: {report.summary()}", report)
    return sys


# ---------------------------------------------------------------------------
# constructors


def _perm_array(points: Sequence, f) -> np.ndarray:
    index = {p: i for i, p in enumerate(points)}
    if isinstance(f, Mapping):
        perm = np.array([_lookup(index, f[p]) for p in points], dtype=np.int64)
    elif callable(f):
        perm = np.array([_lookup(index, f(p)) for p in points], dtype=np.int64)
    else:
        perm = np.asarray(f, dtype=np.int64)
    if perm.shape != (len(points),) or not np.array_equal(np.sort(perm), np.arange(len(points))):
        raise ValueError("f must be a bijection of the point set")
    return perm


def perm_powers(perm: np.ndarray, window: int) -> np.ndarray:
    """Rows ``n + window`` hold ``perm^n`` for ``n`` in ``[-window, window]``."""
    m = len(perm)
    inv = np.empty_like(perm)
    inv[perm] = np.arange(m)
    out = np.empty((2 * window + 1, m), dtype=np.int64)
    out[window] = np.arange(m)
    for n in range(1, window + 1):
        out[window + n] = perm[out[window + n - 1]]
        out[window - n] = inv[out[window - n + 1]]
    return out


def restrict_global(points: Sequence[Hashable], metric, f, Y: Iterable[Hashable], window: int,
                    artificial: Iterable[Hashable] = (), name: str = "") -> FinitePartialSystem:
    """Restrict the global action generated by the bijection ``f`` to ``Y``.

    The result lives on ``Y`` (in the ambient point order) with
    ``X_n = Y & f^n(Y)`` and ``alpha_n = f^n`` there.
    """
    points = tuple(points)
    perm = _perm_array(points, f)
    index = {p: i for i, p in enumerate(points)}
    y_set = {_lookup(index, p) for p in Y}
    if not y_set:
        raise ValueError("restriction set Y must be nonempty")
    if window < 1:
        raise ValueError("window must be at least 1")
    sub = np.array(sorted(y_set), dtype=np.int64)
    in_y = np.zeros(len(points), dtype=bool)
    in_y[sub] = True
    pos = np.full(len(points), UNDEF, dtype=np.int64)
    pos[sub] = np.arange(len(sub))

    powers = perm_powers(perm, window)
    dom = np.zeros((2 * window + 1, len(sub)), dtype=bool)
    mp = np.full((2 * window + 1, len(sub)), UNDEF, dtype=np.int64)
    for n in range(-window, window + 1):
        img = powers[n + window][sub]
        ok = in_y[img]
        mp[n + window, ok] = pos[img[ok]]
        dom[-n + window] = ok  # X_{-n} = Y & f^{-n}(Y)
    metric = as_metric(metric, len(points))
    art = np.zeros(len(points), dtype=bool)
    for p in artificial:
        art[_lookup(index, p)] = True
    prov = Restriction(points, perm, sub, art)
    return FinitePartialSystem(tuple(points[i] for i in sub), metric.restrict(sub), window,
                               dom, mp, provenance=prov, name=name)


def global_system(points: Sequence[Hashable], metric, f, window: int, name: str = "") -> FinitePartialSystem:
    return restrict_global(points, metric, f, points, window, name=name)


def restrict(sys: FinitePartialSystem, subset: Iterable[Hashable], name: str = "") -> FinitePartialSystem:
    """Induced partial action on ``subset``: ``alpha_n`` wherever it stays inside."""
    sub = np.array(sorted({sys.index(p) for p in subset}), dtype=np.int64)
    if len(sub) == 0:
        raise ValueError("cannot restrict to an empty set")
    pos = np.full(sys.size, UNDEF, dtype=np.int64)
    pos[sub] = np.arange(len(sub))
    W = sys.window
    mp = sys.maps[:, sub]
    mp = np.where(mp != UNDEF, pos[np.where(mp != UNDEF, mp, 0)], UNDEF)
    dom = np.zeros_like(mp, dtype=bool)
    for n in range(-W, W + 1):
        dom[-n + W] = mp[n + W] != UNDEF
    prov = None
    if sys.provenance is not None:
        p = sys.provenance
        prov = Restriction(p.ambient_points, p.perm, p.subset[sub], p.artificial)
    return FinitePartialSystem(tuple(sys.points[i] for i in sub), sys.metric.restrict(sub), W,
                               dom, mp, provenance=prov, name=name or sys.name)


def product(a: FinitePartialSystem, b: FinitePartialSystem, name: str = "") -> FinitePartialSystem:
    """Cartesian product with domains ``X_n x Y_n`` and the max metric."""
    W = min(a.window, b.window)
    a, b = (a.truncate(W) if a.window > W else a), (b.truncate(W) if b.window > W else b)
    nb = b.size
    dom = (a.domain[:, :, None] & b.domain[:, None, :]).reshape(2 * W + 1, -1)
    fa = a.maps[:, :, None]
    fb = b.maps[:, None, :]
    mp = np.where((fa != UNDEF) & (fb != UNDEF), fa * nb + fb, UNDEF).reshape(2 * W + 1, -1)
    points = tuple((p, q) for p in a.points for q in b.points)
    prov = None
    if a.provenance is not None and b.provenance is not None:
        pa, pb = a.provenance, b.provenance
        nb_amb = len(pb.perm)
        amb = tuple((p, q) for p in pa.ambient_points for q in pb.ambient_points)
        perm = (pa.perm[:, None] * nb_amb + pb.perm[None, :]).ravel()
        sub = (pa.subset[:, None] * nb_amb + pb.subset[None, :]).ravel()
        art = (pa.artificial[:, None] | pb.artificial[None, :]).ravel()
        prov = Restriction(amb, perm, sub, art)
    return FinitePartialSystem(points, ProductMetric(a.metric, b.metric), W, dom, mp,
                               provenance=prov, name=name or f"{a.name}x{b.name}")


def disjoint_union(systems: Sequence[FinitePartialSystem], tags: Sequence[Hashable] | None = None,
                   gap: float | None = None, name: str = "") -> FinitePartialSystem:
    """Disjoint union; labels become ``(tag, label)`` and blocks sit ``gap`` apart."""
    tags = list(range(len(systems))) if tags is None else list(tags)
    W = min(s.window for s in systems)
    systems = [s.truncate(W) if s.window > W else s for s in systems]
    if gap is None:
        gap = max([s.metric.diameter() for s in systems] + [1.0])
    offs = np.concatenate([[0], np.cumsum([s.size for s in systems])])
    dom = np.concatenate([s.domain for s in systems], axis=1)
    mp = np.concatenate([np.where(s.maps != UNDEF, s.maps + o, UNDEF)
                         for s, o in zip(systems, offs[:-1])], axis=1)
    points = tuple((t, p) for t, s in zip(tags, systems) for p in s.points)
    return FinitePartialSystem(points, BlockMetric([s.metric for s in systems], gap), W, dom, mp,
                               name=name)


def relabel(sys: FinitePartialSystem, h: Mapping[Hashable, Hashable] | Callable,
            name: str = "") -> FinitePartialSystem:
    """Conjugate copy under the relabeling ``h``; the metric is carried along.

    Point order is preserved (point ``k`` of the copy is ``h`` of point ``k``),
    so order-dependent greedy counts agree with the original.
    """
    hf = h.__getitem__ if isinstance(h, Mapping) else h
    points = tuple(hf(p) for p in sys.points)
    return FinitePartialSystem(points, sys.metric, sys.window, sys.domain.copy(), sys.maps.copy(),
                               name=name or sys.name)


def one_point(window: int = 1, label: Hashable = 0) -> FinitePartialSystem:
    return global_system([label], np.zeros((1, 1)), [0], window, name="one_point")


# ---------------------------------------------------------------------------
# sampled systems


@dataclass(frozen=True, eq=False)
class SampledPartialSystem:
    """Partial action induced by a homeomorphism ``f : A -> f(A)`` on real points.

    ``in_domain`` tests membership in the open set ``A`` and ``in_image`` in
    ``f(A)``, the domain of ``f_inv``; both act on ``(k, dim)`` arrays.
    ``X_0`` is the whole sample space, and for ``n != 0`` a point lies in
    ``X_{-n}`` when its first ``|n|`` iterates (in the direction of ``n``)
    all stay in ``A``, so ``X_n = A & f^n(A)``.
    """

    f: Callable[[np.ndarray], np.ndarray]
    f_inv: Callable[[np.ndarray], np.ndarray]
    in_domain: Callable[[np.ndarray], np.ndarray]
    in_image: Callable[[np.ndarray], np.ndarray]
    samples: np.ndarray
    window: int
    metric: Callable[[np.ndarray, np.ndarray], np.ndarray] = chebyshev
    tol: float = 1e-9
    name: str = ""
    sample_labels: tuple | None = None

    def orbit(self, p, n: int) -> np.ndarray | None:
        """``alpha_n(p)`` computed by iteration, or ``None`` when undefined."""
        q = np.atleast_2d(np.asarray(p, dtype=float))
        if n == 0:
            return q[0]
        step, inside = (self.f, self.in_domain) if n > 0 else (self.f_inv, self.in_image)
        if not self.in_domain(q)[0]:
            return None
        for _ in range(abs(n)):
            if not inside(q)[0]:
                return None
            q = step(q)
        # the final point must itself lie in A for p to be in X_{-n}
        return q[0] if self.in_domain(q)[0] else None

    def closure(self) -> tuple[FinitePartialSystem, np.ndarray]:
        """Finite partial system on the window-orbit closure of the samples.

        Returns the system and the indices of the samples in it. Iterates are
        snapped to already-known points within ``tol`` at every step so that
        rounding does not accumulate along periodic orbits. The system is the
        induced action on the finite closure, which is exact for the samples
        at every horizon up to the window.
        """
        W = self.window
        pts = np.asarray(self.samples, dtype=float)
        store = _PointStore(pts, self.tol)
        sample_idx = store.match(pts)
        for direction in (1, -1):
            frontier = pts.copy()
            alive = self.in_domain(frontier)
            for _ in range(W):
                frontier, alive = self._step(frontier, alive, direction)
                if not alive.any():
                    break
                ids = store.add(frontier[alive])
                frontier[alive] = store.coords[ids]
        coords = store.coords
        M = len(coords)
        maps = np.full((2 * W + 1, M), UNDEF, dtype=np.int64)
        maps[W] = np.arange(M)
        tree = cKDTree(coords)
        for direction in (1, -1):
            cur = coords.copy()
            alive = self.in_domain(cur)  # X_{-n} lies inside A for n != 0
            for k in range(1, W + 1):
                cur, alive = self._step(cur, alive, direction)
                dist, idx = tree.query(cur, p=np.inf, distance_upper_bound=self.tol)
                ok = alive & np.isfinite(dist) & self.in_domain(cur)
                row = np.where(ok, idx, UNDEF)
                maps[W + direction * k] = row
                cur[ok] = coords[idx[ok]]
        dom = np.zeros_like(maps, dtype=bool)
        for n in range(-W, W + 1):
            dom[-n + W] = maps[n + W] != UNDEF
        table = self.metric(coords[:, None, :], coords[None, :, :])
        labels = list(range(M))
        if self.sample_labels is not None:
            for i, lab in zip(sample_idx, self.sample_labels):
                labels[i] = lab
        sys = FinitePartialSystem(tuple(labels), TableMetric(table), W, dom, maps,
                                  name=self.name or "sampled")
        object.__setattr__(sys, "coords", coords)
        return sys, sample_idx

    def _step(self, q, alive, direction):
        inside = self.in_domain if direction > 0 else self.in_image
        step = self.f if direction > 0 else self.f_inv
        ok = alive & inside(q)
        out = q.copy()
        if ok.any():
            out[ok] = step(q[ok])
        return out, ok


class _PointStore:
    """Growing point set with snapping to existing points within ``tol``."""

    def __init__(self, initial: np.ndarray, tol: float):
        self.tol = tol
        self.coords = np.empty((0, initial.shape[1]))
        self.add(initial)

    def match(self, q: np.ndarray) -> np.ndarray:
        dist, idx = cKDTree(self.coords).query(q, p=np.inf, distance_upper_bound=self.tol)
        if not np.all(np.isfinite(dist)):
            raise ValueError("point not in store")
        return idx.astype(np.int64)

    def add(self, q: np.ndarray) -> np.ndarray:
        out = np.full(len(q), UNDEF, dtype=np.int64)
        if len(self.coords):
            dist, idx = cKDTree(self.coords).query(q, p=np.inf, distance_upper_bound=self.tol)
            known = np.isfinite(dist)
            out[known] = idx[known]
        new = np.flatnonzero(out == UNDEF)
        if len(new):
            # first occurrence wins among near-duplicates in the batch
            groups = cKDTree(q[new]).query_ball_point(q[new], r=self.tol, p=np.inf)
            base = len(self.coords)
            fresh = []
            owner = {}
            for k, grp in zip(new, groups):
                lead = min(grp)
                if lead not in owner:
                    owner[lead] = base + len(fresh)
                    fresh.append(new[lead])
                out[k] = owner[lead]
            self.coords = np.vstack([self.coords, q[fresh]])
        return out


def check_sampled_axioms(sys: SampledPartialSystem) -> AxiomReport:
    finite, _ = sys.closure()
    return check_axioms(finite)
