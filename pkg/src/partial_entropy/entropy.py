"""Growth-rate estimates of separated, spanning and cover counts.

``h_eps`` fits the slope of ``log count(n, eps)`` against ``n``; ``hbar``
sweeps a decreasing ``eps`` grid and keeps the slope at the smallest ``eps``
whose counts have not filled the whole carrier. A count equal to ``|K|`` is a
boundary effect rather than growth, so such points are dropped from the fit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Hashable, Iterable, Sequence

import numpy as np

from .core import FinitePartialSystem, SampledPartialSystem, product, relabel, restrict
from .counting import EXACT_THRESHOLD, KINDS, Counter
from .metrics import bounded, doubled_capped

DEFAULT_EPS = tuple(2.0 ** -k for k in range(1, 7))


class SaturationError(ValueError):
    """Every scale in the grid saturates the carrier; no growth rate is visible."""


class InvarianceError(ValueError):
    """A proposed piece is not partially invariant."""

    def __init__(self, message, witness):
        super().__init__(message)
        self.witness = witness


@dataclass(frozen=True)
class SweepConfig:
    eps_grid: tuple = DEFAULT_EPS
    n_min: int = 2
    n_max: int = 10
    count_kind: str = "sep"
    fit: str = "lstsq"
    exact: bool = True
    exact_threshold: int = EXACT_THRESHOLD

    def __post_init__(self):
        grid = tuple(float(e) for e in self.eps_grid)
        object.__setattr__(self, "eps_grid", grid)
        if not grid or any(e <= 0 for e in grid):
            raise ValueError("eps grid must be nonempty and positive")
        if any(b >= a for a, b in zip(grid, grid[1:])):
            raise ValueError("eps grid must be strictly decreasing")
        if self.n_min < 1 or self.n_max < self.n_min:
            raise ValueError("need 1 <= n_min <= n_max")
        if self.count_kind not in KINDS:
            raise ValueError(f"count kind must be one of {KINDS}")
        if self.fit not in ("lstsq", "max-slope"):
            raise ValueError("fit must be 'lstsq' or 'max-slope'")

    def with_(self, **kw) -> "SweepConfig":
        return replace(self, **kw)


@dataclass
class EpsFit:
    eps: float
    slope: float
    intercept: float
    residual: float
    n_range: tuple
    count_kind: str
    ns: list
    counts: list
    exact: list
    max_stat: float
    saturated: bool = False  # fewer than two usable points
    degenerate: bool = False  # every count is one

    @property
    def usable(self) -> bool:
        return self.degenerate or not self.saturated


@dataclass
class EntropyEstimate:
    per_eps: list
    hbar: float
    eps_used: float | None
    carrier_size: int
    count_kind: str
    monotone: bool
    notes: list = field(default_factory=list)

    def fit_at(self, eps: float) -> EpsFit:
        for f in self.per_eps:
            if math.isclose(f.eps, eps):
                return f
        raise KeyError(eps)


def finite_view(sys, K=None) -> tuple[FinitePartialSystem, np.ndarray | None]:
    """A finite system plus carrier indices; sampled systems are replaced by their closure."""
    if isinstance(sys, SampledPartialSystem):
        fin, idx = sys.closure()
        if K is not None:
            raise ValueError("pass sample subsets as a new sampled system, not as a carrier")
        return fin, idx
    if K is None:
        return sys, None
    return sys, sys.indices(K)


def fit_counts(ns: Sequence[int], counts: Sequence[int], carrier_size: int, fit: str = "lstsq"):
    """Slope, intercept, residual and usable ``n`` values for one count sequence."""
    ns = np.asarray(ns, dtype=float)
    c = np.asarray(counts, dtype=float)
    keep = c < carrier_size
    x, y = ns[keep], np.log(c[keep])
    if len(x) < 2:
        return None
    if fit == "max-slope":
        slopes = np.diff(y) / np.diff(x)
        k = int(np.argmax(slopes))
        slope = float(slopes[k])
        return slope, float(y[k] - slope * x[k]), 0.0, x
    A = np.stack([x, np.ones_like(x)], axis=1)
    (slope, intercept), *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = float(np.sqrt(np.mean((A @ [slope, intercept] - y) ** 2)))
    return float(slope), float(intercept), resid, x


def _counter(sys, K, cfg: SweepConfig) -> tuple[Counter, int]:
    fin, idx = finite_view(sys, K)
    n_max = min(cfg.n_max, fin.window + 1)
    if n_max < cfg.n_min:
        raise ValueError(f"window {fin.window} too small for n_min={cfg.n_min}")
    return Counter(fin, idx, n_max, cfg.exact_threshold), n_max


def h_eps(sys, K, eps: float, cfg: SweepConfig = SweepConfig(), counter: Counter | None = None,
          ) -> tuple[float, EpsFit]:
    """Finite-``n`` proxy for the exponential growth rate of counts at scale ``eps``."""
    if counter is None:
        counter, n_max = _counter(sys, K, cfg)
    else:
        n_max = min(cfg.n_max, counter.table.horizon)
    ns = list(range(cfg.n_min, n_max + 1))
    vals = [counter.count(cfg.count_kind, n, eps, cfg.exact) for n in ns]
    counts = [v for v, _ in vals]
    exact = [e for _, e in vals]
    size = len(counter.table)
    max_stat = max(math.log(c) / n for n, c in zip(ns, counts))
    base = dict(eps=float(eps), count_kind=cfg.count_kind, ns=ns, counts=counts, exact=exact,
                max_stat=max_stat)
    if all(c == 1 for c in counts):
        trace = EpsFit(slope=0.0, intercept=0.0, residual=0.0, n_range=(ns[0], ns[-1]),
                       degenerate=True, **base)
        return 0.0, trace
    res = fit_counts(ns, counts, size, cfg.fit)
    if res is None:
        trace = EpsFit(slope=math.nan, intercept=math.nan, residual=math.nan, n_range=(),
                       saturated=True, **base)
        return math.nan, trace
    slope, intercept, resid, used = res
    trace = EpsFit(slope=slope, intercept=intercept, residual=resid,
                   n_range=(int(used[0]), int(used[-1])), **base)
    return slope, trace


def hbar(sys, K=None, cfg: SweepConfig = SweepConfig(), counter: Counter | None = None,
         ) -> EntropyEstimate:
    """Entropy estimate: the slope at the smallest unsaturated ``eps`` of the grid.

    With ``K=None`` the carrier is every point of a finite system, or the
    sample set of a sampled one.
    """
    if counter is None:
        counter, _ = _counter(sys, K, cfg)
    fits = [h_eps(sys, K, e, cfg, counter)[1] for e in cfg.eps_grid]
    usable = [f for f in fits if f.usable]
    if not usable:
        raise SaturationError(
            f"every eps in {cfg.eps_grid} saturates the carrier of {len(counter.table)} points; "
            "use a larger carrier or larger eps")
    best = usable[-1]
    notes = []
    if best.slope < 0:
        notes.append(f"negative slope {best.slope:.4g} clipped to 0")
    # slopes should not decrease as eps shrinks
    slopes = [f.slope for f in usable]
    monotone = all(b >= a - 0.1 for a, b in zip(slopes, slopes[1:]))
    return EntropyEstimate(fits, max(0.0, best.slope), best.eps, len(counter.table),
                           cfg.count_kind, monotone, notes)


def count_table(sys, K=None, cfg: SweepConfig = SweepConfig()) -> list[tuple]:
    """``(n, eps, value, exact)`` rows over the sweep grid."""
    counter, n_max = _counter(sys, K, cfg)
    return [(n, e, *counter.count(cfg.count_kind, n, e, cfg.exact))
            for e in cfg.eps_grid for n in range(cfg.n_min, n_max + 1)]


# experiments ----------------------------------------------------------------


@dataclass
class ChainSweep:
    estimates: dict
    spread: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.spread <= self.tolerance


def verify_chain_sweep(sys, K=None, cfg: SweepConfig = SweepConfig(), tolerance: float = 0.1,
                       kinds: Iterable[str] = ("sep", "span", "cov")) -> ChainSweep:
    """Estimates from several count kinds, which should agree."""
    est = {}
    for kind in kinds:
        est[kind] = hbar(sys, K, cfg.with_(count_kind=kind)).hbar
    vals = list(est.values())
    return ChainSweep(est, max(vals) - min(vals), tolerance)


@dataclass
class ProductReport:
    hbar_a: float
    hbar_b: float
    hbar_ab: float
    gap: float
    tolerance: float
    # (n, eps, sep_a, sep_b, sep_ab, span_a, span_b, span_ab, exact, span_ok, sep_ok, ok)
    count_checks: list

    @property
    def counts_ok(self) -> bool:
        return all(row[-1] for row in self.count_checks)

    @property
    def passed(self) -> bool:
        return abs(self.gap) <= self.tolerance and self.counts_ok


def product_experiment(a: FinitePartialSystem, b: FinitePartialSystem, cfg: SweepConfig = SweepConfig(),
                       tolerance: float = 0.15, check_counts: bool = True,
                       check_ns: Sequence[int] | None = None) -> ProductReport:
    """Compare the product estimate with the sum of the factor estimates.

    With ``check_counts`` the exact counts are also compared at every sampled
    ``(n, eps)``. Products of strict spanning sets always span, so
    ``span_ab <= span_a * span_b`` is required. Products of separated sets
    only stay separated when no times of definition are lost, so
    ``sep_ab >= sep_a * sep_b`` is recorded everywhere but required only
    when both factors are global.
    """
    ab = product(a, b)
    ea, eb, eab = hbar(a, None, cfg), hbar(b, None, cfg), hbar(ab, None, cfg)
    rows = []
    if check_counts:
        n_top = min(cfg.n_max, ab.window + 1)
        ns = list(check_ns) if check_ns is not None else list(range(cfg.n_min, n_top + 1))
        both_global = a.is_global() and b.is_global()
        ca, cb, cab = (Counter(s, None, max(ns), cfg.exact_threshold) for s in (a, b, ab))
        for e in cfg.eps_grid:
            for n in ns:
                sa, sb, sab = (c.count("sep", n, e) for c in (ca, cb, cab))
                pa, pb, pab = (c.count("span", n, e) for c in (ca, cb, cab))
                exact = all(x[1] for x in (sa, sb, sab, pa, pb, pab))
                span_ok = (not exact) or pab[0] <= pa[0] * pb[0]
                sep_ok = (not exact) or sab[0] >= sa[0] * sb[0]
                ok = span_ok and (sep_ok or not both_global)
                rows.append((n, e, sa[0], sb[0], sab[0], pa[0], pb[0], pab[0], exact,
                             span_ok, sep_ok, ok))
    return ProductReport(ea.hbar, eb.hbar, eab.hbar, eab.hbar - ea.hbar - eb.hbar, tolerance, rows)


def invariance_witness(sys: FinitePartialSystem, piece: Iterable[Hashable]) -> tuple | None:
    """First ``(n, x)`` with ``x`` in the piece and ``X_{-n}`` but ``alpha_n(x)`` outside the piece."""
    inside = np.zeros(sys.size, dtype=bool)
    inside[sys.indices(piece)] = True
    for n in range(-sys.window, sys.window + 1):
        f = sys.map(n)
        src = np.flatnonzero(inside & (f != -1))
        bad = src[~inside[f[src]]]
        if len(bad):
            return n, sys.points[int(bad[0])]
    return None


@dataclass
class DecompositionReport:
    hbar_full: float
    hbar_pieces: list
    gap: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return abs(self.gap) <= self.tolerance


def decomposition_experiment(sys: FinitePartialSystem, pieces: Sequence[Iterable[Hashable]],
                             cfg: SweepConfig = SweepConfig(), tolerance: float = 0.1,
                             ) -> DecompositionReport:
    """Full estimate against the largest estimate over partially invariant pieces."""
    pieces = [list(p) for p in pieces]
    covered = set().union(*map(set, pieces)) if pieces else set()
    if covered != set(sys.points):
        raise ValueError("pieces must cover the system")
    for p in pieces:
        w = invariance_witness(sys, p)
        if w is not None:
            raise InvarianceError(f"piece is not partially invariant: alpha_{w[0]}({w[1]!r}) leaves it", w)
    full = hbar(sys, None, cfg).hbar
    parts = [hbar(restrict(sys, p), None, cfg).hbar for p in pieces]
    return DecompositionReport(full, parts, full - max(parts), tolerance)


@dataclass
class MetricInvarianceReport:
    estimates: dict
    spread: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.spread <= self.tolerance


def metric_variants(sys: FinitePartialSystem) -> dict:
    return {"d": sys, "d/(1+d)": sys.with_metric(bounded(sys.metric)),
            "min(1,2d)": sys.with_metric(doubled_capped(sys.metric))}


def metric_invariance_experiment(sys: FinitePartialSystem, cfg: SweepConfig = SweepConfig(),
                                 tolerance: float = 0.1) -> MetricInvarianceReport:
    """Estimates under ``d``, ``d/(1+d)`` and ``min(1, 2d)``; all three should agree."""
    est = {k: hbar(s, None, cfg).hbar for k, s in metric_variants(sys).items()}
    vals = list(est.values())
    return MetricInvarianceReport(est, max(vals) - min(vals), tolerance)


def conjugate_count_tables(sys: FinitePartialSystem, h, cfg: SweepConfig = SweepConfig()):
    """Count tables of ``sys`` and of its relabeled copy under ``h``."""
    return count_table(sys, None, cfg), count_table(relabel(sys, h), None, cfg)
