"""Globalization of a finite partial action over a bounded window, and conjugacy checks.

The globalization lives on ``Z x X`` modulo

    (r, x) ~ (s, y)  iff  x in X_{s-r} and alpha_{r-s}(x) = y,

with the global action ``gamma_t(r, x) = (t + r, x)`` and ``X`` embedded as
the classes of ``(0, x)``. Here ``r`` is confined to ``[-R, R]``, classes are
found with a connected-components pass over the relation's edges, and the
induced action is defined wherever a representative stays inside the
window.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Hashable, Mapping

import numpy as np
from scipy import sparse
from scipy.sparse.csgraph import connected_components

from .core import UNDEF, FinitePartialSystem, check_axioms, global_system
from .entropy import SweepConfig, hbar
from .metrics import DiscreteMetric, LayeredMetric


class GlobalizationError(RuntimeError):
    """The window relation is not an equivalence, or the induced action is ill defined."""


@dataclass
class GlobalizationResult:
    sys: FinitePartialSystem
    R: int
    class_of: np.ndarray  # (2R+1, |X|) class id of (r, x)
    classes: list  # class id -> sorted list of (r, label)
    action: dict  # t -> array over classes, UNDEF where gamma_t leaves the window
    closed: bool  # gamma_{+1} and gamma_{-1} defined on every class
    vanish_index: int | None  # smallest N0 with X_n empty for N0 < |n| <= window
    extends_by_zero: bool  # empty domains beyond the window still give a partial action
    notes: list = field(default_factory=list)

    @property
    def window_exact(self) -> bool:
        """The truncation loses nothing.

        Either the classes are closed under the action, or the stored data is
        itself a partial action of Z once every domain beyond the window is
        taken empty. The second reading is ruled out for restrictions of a
        genuine finite permutation: there every point returns to ``Y`` at
        multiples of its period, so domains never vanish.
        """
        if self.closed:
            return True
        prov = self.sys.provenance
        genuine_permutation = prov is not None and not prov.artificial.any()
        return self.extends_by_zero and not genuine_permutation

    @property
    def n_classes(self) -> int:
        return len(self.classes)

    def embedding(self, x: Hashable) -> int:
        return int(self.class_of[self.R, self.sys.index(x)])

    def cls(self, r: int, x: Hashable) -> int:
        if abs(r) > self.R:
            raise IndexError(f"layer {r} outside [-{self.R}, {self.R}]")
        return int(self.class_of[r + self.R, self.sys.index(x)])

    def canonical(self, c: int) -> tuple[int, Hashable]:
        """Representative with the smallest ``|r|`` (ties broken towards ``r >= 0``)."""
        return min(self.classes[c], key=lambda p: (abs(p[0]), p[0] < 0))

    def metric(self, kind: str = "layered"):
        """Metric on classes.

        ``"layered"`` copies ``d`` between classes whose canonical
        representatives share a layer and puts other pairs at the base
        diameter (or 1), so the embedded copy of ``X`` is isometric.
        ``"discrete"`` is the discrete metric.
        """
        if kind == "discrete":
            return DiscreteMetric(self.n_classes)
        if kind != "layered":
            raise ValueError("class metric must be 'layered' or 'discrete'")
        reps = [self.canonical(c) for c in range(self.n_classes)]
        rep = [self.sys.index(x) for _, x in reps]
        layer = [r for r, _ in reps]
        gap = self.sys.metric.diameter() or 1.0
        return LayeredMetric(self.sys.metric, rep, layer, gap)

    def system(self, metric: str = "layered", window: int | None = None) -> FinitePartialSystem:
        """The globalized action on the window classes.

        When the classes are closed under the action this is a global
        action; otherwise it is the restriction of the globalization to the
        window classes, which is still a partial action.
        """
        W = self.R if window is None else window
        if W > self.R:
            raise ValueError("window beyond the globalization radius")
        labels = [self.canonical(c) for c in range(self.n_classes)]
        m = self.metric(metric)
        if self.closed:
            perm = self.action[1]
            if not np.array_equal(np.sort(perm), np.arange(self.n_classes)):
                raise GlobalizationError("shift by one is not a bijection of the classes")
            return global_system(labels, m, perm, W, name=f"globalization({self.sys.name})")
        dom = np.zeros((2 * W + 1, self.n_classes), dtype=bool)
        maps = np.full((2 * W + 1, self.n_classes), UNDEF, dtype=np.int64)
        for t in range(-W, W + 1):
            maps[t + W] = self.action[t]
            dom[-t + W] = self.action[t] != UNDEF
        out = FinitePartialSystem(tuple(labels), m, W, dom, maps,
                                  name=f"globalization({self.sys.name})")
        report = check_axioms(out, check_metric=False)
        if not report.passed:
            raise GlobalizationError(f"window restriction is not a partial action: {report.summary()}")
        return out


def _vanish_index(sys: FinitePartialSystem) -> int | None:
    empty = [not sys.mask(n).any() and not sys.mask(-n).any() for n in range(sys.window + 1)]
    if not empty[sys.window]:
        return None
    k = sys.window
    while k > 0 and empty[k]:
        k -= 1
    return k


def _extends_by_zero(sys: FinitePartialSystem) -> bool:
    """``X_a & X_b`` is empty whenever ``|a - b|`` exceeds the window.

    This is exactly what the axioms need when every ``X_n`` beyond the window
    is empty. A restriction with a nonempty ``X_a & X_b`` for such a pair has
    nonempty domains past the window that the stored data cannot see.
    """
    W = sys.window
    for a in range(-W, W + 1):
        for b in range(-W, W + 1):
            if abs(a - b) > W and (sys.mask(a) & sys.mask(b)).any():
                return False
    return True


def globalize(sys: FinitePartialSystem, R: int | None = None) -> GlobalizationResult:
    R = sys.window if R is None else R
    if not 1 <= R <= sys.window:
        raise ValueError(f"radius R must lie in [1, {sys.window}]")
    m, L = sys.size, 2 * R + 1
    node = lambda r, x: (r + R) * m + x
    rows, cols = [], []
    for r in range(-R, R + 1):
        for s in range(-R, R + 1):
            if r == s or abs(s - r) > sys.window:
                continue
            f = sys.map(r - s)
            xs = np.flatnonzero(sys.mask(s - r) & (f != UNDEF))
            rows.append(node(r, xs))
            cols.append(node(s, f[xs]))
    rows = np.concatenate(rows) if rows else np.zeros(0, dtype=np.int64)
    cols = np.concatenate(cols) if cols else np.zeros(0, dtype=np.int64)
    g = sparse.coo_matrix((np.ones(len(rows)), (rows, cols)), shape=(L * m, L * m))
    _, lab = connected_components(g, directed=False)
    # renumber classes in order of first appearance
    _, first, inv = np.unique(lab, return_index=True, return_inverse=True)
    order = np.argsort(first)
    rank = np.empty_like(order)
    rank[order] = np.arange(len(order))
    class_of = rank[inv].reshape(L, m)
    n_cls = len(order)

    _verify_relation(sys, R, class_of)

    classes: list[list] = [[] for _ in range(n_cls)]
    for r in range(-R, R + 1):
        for x in range(m):
            classes[class_of[r + R, x]].append((r, sys.points[x]))

    action = {}
    for t in range(-R, R + 1):
        img = np.full(n_cls, UNDEF, dtype=np.int64)
        for r in range(max(-R, -R - t), min(R, R - t) + 1):
            src, dst = class_of[r + R], class_of[r + t + R]
            clash = (img[src] != UNDEF) & (img[src] != dst)
            if clash.any():
                x = int(np.flatnonzero(clash)[0])
                raise GlobalizationError(
                    f"shift by {t} is ill defined on the class of ({r}, {sys.points[x]!r})")
            img[src] = dst
        action[t] = img
    closed = bool((action[1] != UNDEF).all() and (action[-1] != UNDEF).all())
    return GlobalizationResult(sys, R, class_of, classes, action, closed, _vanish_index(sys),
                               _extends_by_zero(sys))


def _verify_relation(sys: FinitePartialSystem, R: int, class_of: np.ndarray):
    """Every pair inside one class at layer distance within the window must be related."""
    m = sys.size
    for r in range(-R, R + 1):
        for s in range(-R, R + 1):
            if abs(s - r) > sys.window:
                continue
            f = sys.map(r - s)
            same = class_of[r + R][:, None] == class_of[s + R][None, :]
            xs, ys = np.nonzero(same)
            ok = sys.mask(s - r)[xs] & (f[xs] == ys)
            if not ok.all():
                k = int(np.flatnonzero(~ok)[0])
                raise GlobalizationError(
                    f"({r}, {sys.points[xs[k]]!r}) and ({s}, {sys.points[ys[k]]!r}) share a class "
                    "but are not related")


# equivalence ----------------------------------------------------------------


@dataclass
class EquivalenceWitness:
    h: dict
    failures: list  # (condition, n, x)

    @property
    def passed(self) -> bool:
        return not self.failures


def check_equivalence(a: FinitePartialSystem, b: FinitePartialSystem,
                      h: Mapping[Hashable, Hashable] | Callable) -> EquivalenceWitness:
    """Check that ``h`` maps ``X_n`` onto ``Y_n`` and intertwines ``alpha_n`` with ``beta_n``."""
    hf = h.__getitem__ if isinstance(h, Mapping) else h
    hmap = {x: hf(x) for x in a.points}
    fails = []
    if sorted(map(repr, hmap.values())) != sorted(map(repr, b.points)) or len(set(hmap.values())) != a.size:
        fails.append(("bijection", 0, None))
        return EquivalenceWitness(hmap, fails)
    W = min(a.window, b.window)
    hidx = np.array([b.index(hmap[x]) for x in a.points])
    for n in range(-W, W + 1):
        img = np.zeros(b.size, dtype=bool)
        img[hidx[a.mask(n)]] = True
        for y in np.flatnonzero(img != b.mask(n)):
            x = np.flatnonzero(hidx == y)[0]
            fails.append(("domain", n, a.points[x]))
        fa, fb = a.map(n), b.map(n)
        for x in np.flatnonzero(fa != UNDEF):
            lhs = hidx[fa[x]]
            rhs = fb[hidx[x]]
            if lhs != rhs:
                fails.append(("conjugacy", n, a.points[x]))
    return EquivalenceWitness(hmap, fails)


# entropy comparison ---------------------------------------------------------


@dataclass
class GlobalizationGap:
    hbar_partial: float
    h_global: float
    gap: float
    tolerance: float
    n_classes: int

    @property
    def passed(self) -> bool:
        return self.gap >= -self.tolerance


def globalization_entropy_gap(sys: FinitePartialSystem, R: int | None = None,
                              cfg: SweepConfig = SweepConfig(), tolerance: float = 0.05,
                              metric: str = "layered") -> GlobalizationGap:
    """Partial estimate against the estimate for the globalization; the gap should be >= 0."""
    res = globalize(sys, R)
    if not res.window_exact:
        raise ValueError("window truncation is lossy here (classes not closed and some domains "
                         "continue past the stored window); increase R or the stored window")
    part = hbar(sys, None, cfg).hbar
    whole = hbar(res.system(metric), None, cfg).hbar
    return GlobalizationGap(part, whole, whole - part, tolerance, res.n_classes)
