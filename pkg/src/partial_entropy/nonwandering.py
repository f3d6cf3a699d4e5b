"""The partially non-wandering set and the concentration of entropy on it.

A point ``x`` is partially non-wandering when ``alpha_{n_i}(x) -> x`` along
times ``n_i -> infinity`` with ``x in X_{-n_i}``. A finite window can only
offer surrogates:

* exact mode, for restrictions of a finite permutation: ``x`` qualifies iff
  its cycle is genuine (avoids points marked artificial), because then
  ``alpha_{kp}(x) = x`` for every multiple ``kp`` of its period;
* approximate mode: some ``n`` in ``[n_lo, window]`` brings ``x`` back within
  ``eps``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import UNDEF, FinitePartialSystem, SampledPartialSystem
from .entropy import SweepConfig, hbar


@dataclass
class OmegaSet:
    members: frozenset
    evidence: dict  # label -> list of (n, d(alpha_n(x), x))
    mode: str
    window_limited: frozenset = frozenset()  # periodic members with no witness inside the window
    eps: float | None = None
    n_lo: int | None = None

    def __contains__(self, x):
        return x in self.members

    def __len__(self):
        return len(self.members)


def _periods(perm: np.ndarray, artificial: np.ndarray) -> np.ndarray:
    """Cycle length of every ambient point; 0 for cycles through an artificial point."""
    m = len(perm)
    period = np.full(m, -1, dtype=np.int64)
    for start in range(m):
        if period[start] >= 0:
            continue
        cyc = [start]
        x = perm[start]
        while x != start:
            cyc.append(int(x))
            x = perm[x]
        p = 0 if artificial[cyc].any() else len(cyc)
        period[cyc] = p
    return period


def omega_exact(sys: FinitePartialSystem) -> OmegaSet:
    if sys.provenance is None:
        raise ValueError("exact mode needs a system restricted from a finite permutation; "
                         "use omega_approx")
    prov = sys.provenance
    period = _periods(prov.perm, prov.artificial)[prov.subset]
    members, evidence, limited = [], {}, []
    for k, x in enumerate(sys.points):
        p = int(period[k])
        if p == 0:
            continue
        members.append(x)
        ev = [(n, 0.0) for n in range(p, sys.window + 1, p)]
        evidence[x] = ev
        if not ev:
            limited.append(x)
    return OmegaSet(frozenset(members), evidence, "exact", frozenset(limited))


def omega_approx(sys: FinitePartialSystem, eps: float, n_lo: int | None = None,
                 carrier=None) -> OmegaSet:
    """Points returning within ``eps`` at some time in ``[n_lo, window]``."""
    if not eps > 0:
        raise ValueError("eps must be positive")
    n_lo = max(1, sys.window // 2) if n_lo is None else n_lo
    if n_lo < 1:
        raise ValueError("n_lo must be at least 1")
    idx = np.arange(sys.size) if carrier is None else sys.indices(carrier)
    evidence: dict = {}
    for n in range(n_lo, sys.window + 1):
        f = sys.map(n)[idx]
        ok = f != UNDEF
        d = np.full(len(idx), math.inf)
        d[ok] = sys.metric.pairwise(f[ok], idx[ok])
        for k in np.flatnonzero(d < eps):
            evidence.setdefault(sys.points[idx[k]], []).append((n, float(d[k])))
    return OmegaSet(frozenset(evidence), evidence, "approx", eps=eps, n_lo=n_lo)


def invariance_failures(sys: FinitePartialSystem, omega: OmegaSet) -> list[tuple]:
    """``(i, x)`` with ``x`` in the set and ``alpha_i(x)`` defined but outside it."""
    inside = np.zeros(sys.size, dtype=bool)
    if omega.members:
        inside[sys.indices(omega.members)] = True
    out = []
    for i in range(-sys.window, sys.window + 1):
        f = sys.map(i)
        src = np.flatnonzero(inside & (f != UNDEF))
        for x in src[~inside[f[src]]]:
            out.append((i, sys.points[x]))
    return out


@dataclass
class ConcentrationReport:
    hbar_full: float
    hbar_omega: float
    omega_size: int
    carrier_size: int
    mode: str
    tolerance: float
    anomaly: bool = False
    notes: list = field(default_factory=list)

    @property
    def gap(self) -> float:
        return self.hbar_full - self.hbar_omega

    @property
    def passed(self) -> bool:
        return not self.anomaly and abs(self.gap) <= self.tolerance


def concentration_experiment(sys, cfg: SweepConfig = SweepConfig(), mode: str = "auto",
                             eps: float = 1e-6, n_lo: int | None = None,
                             tolerance: float = 0.15) -> ConcentrationReport:
    """Entropy estimate on the whole carrier against the estimate on its non-wandering part.

    ``mode`` is ``exact``, ``approx`` or ``auto`` (exact when the system
    records a permutation it was restricted from). Sampled systems use their
    finite closure and keep only sample points in both carriers.
    """
    notes = []
    if isinstance(sys, SampledPartialSystem):
        fin, samples = sys.closure()
        carrier = [fin.points[i] for i in samples]
        notes.append("sampled system: compactness of the closure is assumed, not checked")
    else:
        fin, carrier = sys, list(sys.points)
    if mode == "auto":
        mode = "exact" if fin.provenance is not None else "approx"
    if mode == "exact":
        omega = omega_exact(fin)
    elif mode == "approx":
        omega = omega_approx(fin, eps, n_lo, carrier)
    else:
        raise ValueError("mode must be exact, approx or auto")
    in_omega = [p for p in carrier if p in omega.members]
    full = hbar(fin, carrier, cfg).hbar
    if not in_omega:
        part = 0.0
        anomaly = full > tolerance
        if anomaly:
            notes.append("empty non-wandering set but positive entropy: window artifact")
    else:
        part = hbar(fin, in_omega, cfg).hbar
        anomaly = False
    return ConcentrationReport(full, part, len(in_omega), len(carrier), omega.mode, tolerance,
                               anomaly, notes)
