"""Concrete systems: small hand-checkable examples and desk-scale models.

Every constructor returns an immutable system that passes the axiom check.
:data:`REGISTRY` maps CLI names to constructors.
"""

from __future__ import annotations

import itertools
from typing import Callable

import numpy as np

from .core import (
    FinitePartialSystem,
    SampledPartialSystem,
    global_system,
    one_point,
    restrict_global,
)
from .metrics import TableMetric

CARRIER_CAP = 20_000


# hand-sized systems ---------------------------------------------------------


def cycle_y(window: int = 3) -> FinitePartialSystem:
    """The 4-cycle ``i -> i+1 mod 4`` restricted to ``Y = {0, 1}``, discrete metric."""
    return restrict_global(range(4), "discrete", lambda i: (i + 1) % 4, [0, 1], window,
                           name="cycle_y")


def swap_fixed(window: int = 3) -> FinitePartialSystem:
    """``0 <-> 1`` and ``2`` fixed, restricted to ``Y = {0, 2}``."""
    return restrict_global(range(3), "discrete", {0: 1, 1: 0, 2: 2}, [0, 2], window,
                           name="swap_fixed")


def cycle_global(m: int = 4, window: int = 3) -> FinitePartialSystem:
    return global_system(range(m), "discrete", lambda i: (i + 1) % m, window, name="cycle")


def no_return_system(s: int = 10, window: int = 4, y: int | None = None) -> FinitePartialSystem:
    """Translation ``i -> i+1`` on ``0..s-1`` restricted to the singleton ``{y}``.

    The path is closed into a permutation by a return arc of ``window + 1``
    extra points (marked artificial), so no orbit returns to ``y`` within the
    window and ``X_n`` is empty for ``0 < |n| <= window``. Points sit on a line
    at unit spacing.
    """
    y = s // 2 - 1 if y is None else y
    if not 0 <= y < s:
        raise ValueError("y must lie on the path")
    total = s + window + 1
    coords = np.arange(total, dtype=float)
    table = np.abs(coords[:, None] - coords[None, :])
    return restrict_global(range(total), TableMetric(table), lambda i: (i + 1) % total, [y],
                           window, artificial=range(s, total), name="no_return")


def translation_path(s: int = 10, window: int = 4, ys=None) -> FinitePartialSystem:
    """Same translation as :func:`no_return_system` restricted to a set ``ys`` of path points."""
    ys = range(s) if ys is None else ys
    total = s + window + 1
    coords = np.arange(total, dtype=float)
    table = np.abs(coords[:, None] - coords[None, :])
    return restrict_global(range(total), TableMetric(table), lambda i: (i + 1) % total, ys,
                           window, artificial=range(s, total), name="translation_path")


# symbolic models ------------------------------------------------------------


def _word_metric(words: np.ndarray) -> np.ndarray:
    """``2^-j`` with ``j`` the smallest ``|i|`` at which two cyclic words differ."""
    L = words.shape[1]
    offsets = sorted(range(-(L // 2), (L + 1) // 2), key=abs)
    table = np.zeros((len(words), len(words)))
    undecided = ~np.eye(len(words), dtype=bool)
    for i in offsets:
        col = words[:, i % L]
        differ = (col[:, None] != col[None, :]) & undecided
        table[differ] = 2.0 ** -abs(i)
        undecided &= ~differ
    return table


def cyclic_shift_model(k: int = 2, L: int = 10, window: int | None = None) -> FinitePartialSystem:
    """All ``k^L`` cyclic words with the left shift, as a global action.

    Labels are strings over ``0..k-1``; the metric is the ultrametric
    ``2^-j`` reading word positions cyclically in ``[-L//2, (L+1)//2)``.
    """
    if L < 2:
        raise ValueError("word length L must be at least 2")
    if k < 1:
        raise ValueError("alphabet size k must be positive")
    window = L - 1 if window is None else window
    if not 1 <= window < L:
        raise ValueError("window must satisfy 1 <= window < L")
    if k ** L > CARRIER_CAP:
        raise ValueError(f"{k}^{L} words exceeds the carrier cap {CARRIER_CAP}")
    if k == 1:
        return one_point(window, "0" * L)
    words = np.array(list(itertools.product(range(k), repeat=L)), dtype=np.int64)
    labels = ["".join(map(str, w)) for w in words]
    # shifting left moves digit 0 to the end: index arithmetic in base k
    codes = np.arange(k ** L)
    lead = codes // k ** (L - 1)
    perm = (codes % k ** (L - 1)) * k + lead
    metric = TableMetric(_word_metric(words), trusted=True)
    return global_system(labels, metric, perm, window, name=f"cyclic_shift(k={k},L={L})")


def cylinder_restriction(model: FinitePartialSystem | None = None, pattern: str = "01",
                         **model_kw) -> FinitePartialSystem:
    """Restrict a cyclic-shift model to the cylinder of words starting with ``pattern``."""
    if model is None:
        model = cyclic_shift_model(**model_kw)
    p = model.provenance
    words = p.ambient_points
    Y = [w for w in words if w.startswith(pattern)]
    if not Y:
        raise ValueError(f"no word starts with {pattern!r}")
    return restrict_global(words, TableMetric(model.metric.table(), trusted=True), p.perm, Y,
                           model.window, name=f"cylinder[{pattern}]")


def ball_partition(sys: FinitePartialSystem, eps: float) -> list[frozenset]:
    """Partition into open ``eps``-balls, valid when the metric is an ultrametric."""
    D = sys.metric.table()
    left = np.ones(sys.size, dtype=bool)
    parts = []
    for i in range(sys.size):
        if left[i]:
            ball = (D[i] < eps) & left
            parts.append(sys.labels(np.flatnonzero(ball)))
            left &= ~ball
    return parts


# horseshoe ------------------------------------------------------------------

_Y_SHIFT = (1.0, 4.0)  # branch s maps the strip ((1+3s)/6, (2+3s)/6) onto (0, 1) in y
_X_SHIFT = (4.0, 1.0)  # branch s sends x to (x + _X_SHIFT[s]) / 6


def _strip(v, lo):
    return (v > lo) & (v < lo + 1 / 6)


def horseshoe_map(p: np.ndarray) -> np.ndarray:
    x, y = p[..., 0], p[..., 1]
    lower = y < 0.5
    nx = np.where(lower, (x + 4) / 6, (x + 1) / 6)
    ny = np.where(lower, 6 * y - 1, 6 * y - 4)
    return np.stack([nx, ny], axis=-1)


def horseshoe_inverse(p: np.ndarray) -> np.ndarray:
    x, y = p[..., 0], p[..., 1]
    right = x > 0.5
    nx = np.where(right, 6 * x - 4, 6 * x - 1)
    ny = np.where(right, (y + 1) / 6, (y + 4) / 6)
    return np.stack([nx, ny], axis=-1)


def horseshoe_domain(p: np.ndarray) -> np.ndarray:
    """The open set ``A``: two horizontal strips of the open unit square."""
    x, y = p[..., 0], p[..., 1]
    return (x > 0) & (x < 1) & (_strip(y, 1 / 6) | _strip(y, 4 / 6))


def horseshoe_image(p: np.ndarray) -> np.ndarray:
    """``f(A)``: two vertical strips."""
    x, y = p[..., 0], p[..., 1]
    return (y > 0) & (y < 1) & (_strip(x, 1 / 6) | _strip(x, 4 / 6))


def periodic_point(code) -> np.ndarray:
    """The point of the invariant Cantor set whose itinerary repeats ``code``.

    Forward iterates satisfy ``y_j = (y_{j+1} + c) / 6`` and
    ``x_{j+1} = (x_j + a) / 6`` with branch constants ``c`` and ``a``, so both
    coordinates are fixed points of affine contractions composed around the
    cycle.
    """
    code = [int(s) for s in code]
    if not code:
        raise ValueError("empty itinerary")
    a, b = 1.0, 0.0
    for s in reversed(code):
        a, b = a / 6, (b + _Y_SHIFT[s]) / 6
    y0 = b / (1 - a)
    a, b = 1.0, 0.0
    for s in code:
        a, b = a / 6, (b + _X_SHIFT[s]) / 6
    x0 = b / (1 - a)
    return np.array([x0, y0])


def horseshoe_samples(m: int, grid: int = 8) -> tuple[np.ndarray, int]:
    """All ``2^m`` period-``m`` points, then a ``grid x grid`` lattice on the square.

    Returns the coordinates and how many leading rows are itinerary points.
    """
    cyc = np.array([periodic_point(c) for c in itertools.product((0, 1), repeat=m)])
    g = (np.arange(grid) + 0.5) / grid
    lattice = np.stack(np.meshgrid(g, g, indexing="ij"), axis=-1).reshape(-1, 2)
    return np.vstack([cyc, lattice]), len(cyc)


def horseshoe(m: int = 10, window: int = 12, grid: int = 8) -> SampledPartialSystem:
    """Two-branch affine horseshoe on the unit square, sampled at itinerary points.

    Branch 0 sends the strip ``1/6 < y < 2/6`` by ``(x, y) -> ((x+4)/6, 6y-1)``
    and branch 1 the strip ``4/6 < y < 5/6`` by ``((x+1)/6, 6y-4)``.
    """
    if not 1 <= m <= 12:
        raise ValueError("itinerary depth must lie in [1, 12]")
    samples, n_cyc = horseshoe_samples(m, grid)
    labels = tuple("".join(map(str, c)) for c in itertools.product((0, 1), repeat=m)) + tuple(
        f"grid{k}" for k in range(len(samples) - n_cyc))
    return SampledPartialSystem(horseshoe_map, horseshoe_inverse, horseshoe_domain,
                                horseshoe_image, samples, window, name=f"horseshoe(m={m})",
                                sample_labels=labels)


# random systems -------------------------------------------------------------


def random_metric(m: int, rng: np.random.Generator, kind: str = "path") -> np.ndarray:
    """Random metric table: shortest paths of a random complete graph, or the discrete metric."""
    if kind == "discrete":
        return 1.0 - np.eye(m)
    from scipy.sparse.csgraph import shortest_path

    w = rng.uniform(0.1, 3.0, size=(m, m))
    w = np.triu(w, 1)
    w = w + w.T
    return shortest_path(w, method="FW", directed=False)


def random_restriction(rng: np.random.Generator, max_points: int = 12, window: int | None = None,
                       metric: str = "path", keep: float = 0.7) -> FinitePartialSystem:
    """A random permutation of up to ``max_points + 4`` ambient points restricted to a random subset.

    The subset has at most ``max_points`` points and the metric lives on the ambient set.
    """
    m = int(rng.integers(2, max_points + 5))
    perm = rng.permutation(m)
    Y = [i for i in range(m) if rng.random() < keep][:max_points] or [int(rng.integers(m))]
    window = int(rng.integers(1, 5)) if window is None else window
    return restrict_global(range(m), TableMetric(random_metric(m, rng, metric)), perm, Y, window,
                           name="random")


# registry -------------------------------------------------------------------

REGISTRY: dict[str, Callable] = {
    "cycle_y": cycle_y,
    "swap_fixed": swap_fixed,
    "cycle": cycle_global,
    "one_point": lambda window=3: one_point(window),
    "no_return": no_return_system,
    "translation_path": translation_path,
    "cyclic_shift": cyclic_shift_model,
    "cylinder": cylinder_restriction,
    "horseshoe": horseshoe,
}

SAMPLED = {"horseshoe"}


def make(name: str, **params):
    try:
        ctor = REGISTRY[name]
    except KeyError:
        raise KeyError(f"unknown gallery system {name!r}; known: {', '.join(sorted(REGISTRY))}") from None
    return ctor(**params)
