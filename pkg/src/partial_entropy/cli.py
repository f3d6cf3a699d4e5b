"""Command-line front end.

Exit status is 0 when every checked property holds, 1 when one fails and 2
on bad input (unreadable system, axiom failure of an input, bad options).
"""

from __future__ import annotations

import argparse
import csv
import io
import inspect
import json
import math
import sys as _sys
from pathlib import Path

import numpy as np

from . import gallery
from .core import AxiomError, FinitePartialSystem, SampledPartialSystem, check_axioms, relabel
from .counting import ChainViolation, Counter, PROVABLE_LINKS
from .cover_entropy import FiniteCover, ball_cover, hbar_top
from .entropy import (
    SaturationError,
    SweepConfig,
    decomposition_experiment,
    finite_view,
    hbar,
    metric_invariance_experiment,
    product_experiment,
)
from .globalization import check_equivalence, globalization_entropy_gap, globalize
from .metrics import MetricError
from .nonwandering import concentration_experiment, invariance_failures, omega_approx, omega_exact
from .textio import ParseError, load_system

CSV_COLUMNS = ["n", "eps", "sep_lower", "sep_exact", "span_upper", "span_exact",
               "cov_upper", "cov_exact", "exact_flags"]


class InputError(Exception):
    pass


# system selection -----------------------------------------------------------


def _value(tok: str):
    for cast in (int, float):
        try:
            return cast(tok)
        except ValueError:
            pass
    return tok


def load(selector: str, check: bool = True):
    """A gallery selector ``name`` or ``name:key=value,...``, or a path to a system file."""
    name, _, params = selector.partition(":")
    if name in gallery.REGISTRY:
        kw = {}
        for item in filter(None, params.split(",")):
            k, eq, v = item.partition("=")
            if not eq:
                raise InputError(f"bad gallery parameter {item!r}; expected key=value")
            kw[k.strip()] = _value(v.strip())
        try:
            return gallery.make(name, **kw)
        except TypeError as e:
            raise InputError(f"bad parameters for {name}: {e}") from None
    path = Path(selector)
    if not path.exists():
        raise InputError(f"{selector!r} is neither a gallery system nor a file")
    return load_system(path, check=check)


def _finite(system) -> tuple[FinitePartialSystem, list | None]:
    fin, idx = finite_view(system)
    return fin, (None if idx is None else [fin.points[i] for i in idx])


# output ---------------------------------------------------------------------


class Output:
    def __init__(self, out: str | None):
        self.dir = Path(out) if out else None
        if self.dir:
            self.dir.mkdir(parents=True, exist_ok=True)

    def text(self, name: str, content: str):
        if self.dir:
            (self.dir / name).write_text(content)
        else:
            print(content, end="" if content.endswith("\n") else "\n")

    def summary(self, record: dict):
        self.text("summary.json", json.dumps(_jsonable(record), indent=2, sort_keys=True) + "\n")


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple, set, frozenset)):
        items = [_jsonable(v) for v in x]
        return sorted(items, key=repr) if isinstance(x, (set, frozenset)) else items
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else repr(x)
    if isinstance(x, (bool, int, str)) or x is None:
        return x
    return repr(x)


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in rows:
        w.writerow([_fmt(v) for v in r])
    return buf.getvalue()


def _cfg(args, **kw) -> SweepConfig:
    base = dict(n_min=args.n_min, n_max=args.n_max, exact_threshold=args.exact_threshold)
    if args.eps:
        base["eps_grid"] = tuple(args.eps)
    base.update(kw)
    return SweepConfig(**base)


def _plots(out: Output, est):
    for f in est.per_eps:
        lines = [f"{n} {math.log(c)!r}" for n, c in zip(f.ns, f.counts)]
        out.text(f"logcount_eps{f.eps:g}.dat", "\n".join(lines) + "\n")


# subcommands ----------------------------------------------------------------


def cmd_check_axioms(args, out):
    system = load(args.system, check=False)
    fin, _ = _finite(system)
    report = check_axioms(fin)
    lines = [report.summary()] + [f"axiom ({a}) witness {w}" for a, w in report.violations]
    out.text("axioms.txt", "\n".join(lines) + "\n")
    out.summary({"system": fin.name, "passed": report.passed, "violations": report.violations})
    return 0 if report.passed else 1


def cmd_counts(args, out):
    fin, carrier = _finite(load(args.system))
    cfg = _cfg(args)
    n_top = min(cfg.n_max, fin.window + 1)
    counter = Counter(fin, carrier, n_top, args.exact_threshold)
    rows, chains, failures = [], [], []
    for e in cfg.eps_grid:
        for n in range(cfg.n_min, n_top + 1):
            try:
                r = counter.report(n, e)
            except ChainViolation as exc:
                failures.append(str(exc))
                r = counter.report(n, e, check=False)
            rows.append((n, e, r.sep_lower, r.sep_exact, r.span_upper, r.span_exact,
                         r.cov_upper, r.cov_exact, r.exact_flags))
            chains.append({"n": n, "eps": e, "span_weak": r.span_weak_exact,
                           "cov_2eps": r.cov2_exact, "links": r.chain})
    out.text("counts.csv", _csv(rows))
    out.summary({"system": fin.name, "carrier_size": len(counter.table),
                 "asserted_links": list(PROVABLE_LINKS), "chain": chains,
                 "failures": failures, "passed": not failures})
    return 1 if failures else 0


def cmd_entropy(args, out):
    system = load(args.system)
    kind = args.mode or "sep"
    est = hbar(system, None, _cfg(args, count_kind=kind))
    _plots(out, est)
    out.summary({"hbar": est.hbar, "eps_used": est.eps_used, "count_kind": kind,
                 "carrier_size": est.carrier_size, "monotone": est.monotone, "notes": est.notes,
                 "per_eps": [{"eps": f.eps, "slope": f.slope, "residual": f.residual,
                              "n_range": f.n_range, "counts": f.counts, "exact": f.exact,
                              "max_stat": f.max_stat, "saturated": f.saturated,
                              "degenerate": f.degenerate} for f in est.per_eps],
                 "passed": est.hbar >= 0})
    return 0


def cmd_cover_entropy(args, out):
    fin, carrier = _finite(load(args.system))
    if carrier is not None:
        raise InputError("cover entropy is defined here for finite systems only")
    cfg = _cfg(args)
    if fin.covers:
        covers = {k: FiniteCover.of(v) for k, v in fin.covers.items()}
    else:
        covers = {f"balls({e:g})": ball_cover(fin, e) for e in cfg.eps_grid}
    top = hbar_top(fin, cfg, covers)
    sep = hbar(fin, None, cfg).hbar
    gap = top.hbar_top - sep
    ok = abs(gap) <= args.tol
    out.summary({"hbar_top": top.hbar_top, "hbar_sep": sep, "gap": gap, "tolerance": args.tol,
                 "covers": [{"name": f.cover_name, "counts": f.counts, "exact": f.exact,
                             "slope": f.slope, "saturated": f.saturated} for f in top.fits],
                 "passed": ok})
    return 0 if ok else 1


def cmd_globalize(args, out):
    fin, _ = _finite(load(args.system))
    res = globalize(fin, args.window)
    lines = [" ".join(f"({r},{x})" for r, x in sorted(c, key=lambda p: (p[0], repr(p[1]))))
             for c in res.classes]
    out.text("classes.txt", "\n".join(lines) + "\n")
    record = {"classes": res.n_classes, "radius": res.R, "closed": res.closed,
              "window_exact": res.window_exact}
    ok = True
    if args.gap:
        if not res.window_exact:
            raise InputError("globalization is not window-exact; increase --window")
        gap = globalization_entropy_gap(fin, res.R, _cfg(args), args.tol,
                                        metric=args.mode or "layered")
        record.update(hbar_partial=gap.hbar_partial, h_global=gap.h_global, gap=gap.gap)
        ok = gap.passed
    record["passed"] = ok
    out.summary(record)
    return 0 if ok else 1


def _parse_map(text: str) -> dict:
    out = {}
    for item in filter(None, text.replace(",", " ").split()):
        a, arrow, b = item.partition("->")
        if not arrow:
            raise InputError(f"bad map entry {item!r}")
        out[_value(a)] = _value(b)
    return out


def cmd_equivalence(args, out):
    a, _ = _finite(load(args.system))
    b, _ = _finite(load(args.system2 or args.system))
    h = _parse_map(args.map) if args.map else {p: p for p in a.points}
    w = check_equivalence(a, b, h)
    out.summary({"passed": w.passed, "failures": w.failures})
    return 0 if w.passed else 1


def cmd_omega(args, out):
    fin, carrier = _finite(load(args.system))
    mode = args.mode or ("exact" if fin.provenance is not None else "approx")
    if mode == "exact":
        om = omega_exact(fin)
    elif mode == "approx":
        eps = args.eps[-1] if args.eps else 1e-6
        om = omega_approx(fin, eps, args.n_lo, carrier)
    else:
        raise InputError("omega mode must be exact or approx")
    shown = carrier if carrier is not None else list(fin.points)
    out.text("omega.csv", "point,in_omega\n" + "".join(f"{p},{int(p in om)}\n" for p in shown))
    bad = invariance_failures(fin, om) if mode == "exact" else []
    out.summary({"mode": mode, "size": len(om), "window_limited": om.window_limited,
                 "invariance_failures": bad, "passed": not bad})
    return 1 if bad else 0


def cmd_concentration(args, out):
    system = load(args.system)
    rep = concentration_experiment(system, _cfg(args), args.mode or "auto",
                                   eps=args.eps_omega, n_lo=args.n_lo, tolerance=args.tol)
    out.summary({"hbar_full": rep.hbar_full, "hbar_omega": rep.hbar_omega, "gap": rep.gap,
                 "omega_size": rep.omega_size, "carrier_size": rep.carrier_size,
                 "mode": rep.mode, "anomaly": rep.anomaly, "notes": rep.notes,
                 "passed": rep.passed})
    return 0 if rep.passed else 1


def cmd_product(args, out):
    a, _ = _finite(load(args.system))
    b, _ = _finite(load(args.system2 or args.system))
    rep = product_experiment(a, b, _cfg(args), args.tol)
    out.summary({"hbar_a": rep.hbar_a, "hbar_b": rep.hbar_b, "hbar_ab": rep.hbar_ab,
                 "gap": rep.gap, "count_checks": rep.count_checks, "passed": rep.passed})
    return 0 if rep.passed else 1


def orbit_components(fin: FinitePartialSystem) -> list[list]:
    """Points linked by some ``alpha_n``; each component is partially invariant."""
    from scipy import sparse
    from scipy.sparse.csgraph import connected_components

    rows, cols = [], []
    for n in range(1, fin.window + 1):
        f = fin.map(n)
        src = np.flatnonzero(f != -1)
        rows.append(src)
        cols.append(f[src])
    r, c = np.concatenate(rows), np.concatenate(cols)
    g = sparse.coo_matrix((np.ones(len(r)), (r, c)), shape=(fin.size, fin.size))
    k, lab = connected_components(g, directed=False)
    return [[fin.points[i] for i in np.flatnonzero(lab == j)] for j in range(k)]


def cmd_decompose(args, out):
    fin, _ = _finite(load(args.system))
    if args.pieces:
        pieces = [[_value(t) for t in part.split()] for part in args.pieces.split(";")]
    elif fin.points and isinstance(fin.points[0], tuple) and len(fin.points[0]) == 2:
        tags = list(dict.fromkeys(p[0] for p in fin.points))
        pieces = [[p for p in fin.points if p[0] == t] for t in tags]
    else:
        pieces = orbit_components(fin)
    rep = decomposition_experiment(fin, pieces, _cfg(args), args.tol)
    out.summary({"hbar_full": rep.hbar_full, "hbar_pieces": rep.hbar_pieces, "gap": rep.gap,
                 "pieces": len(pieces), "passed": rep.passed})
    return 0 if rep.passed else 1


def cmd_metric_invariance(args, out):
    fin, _ = _finite(load(args.system))
    cfg = _cfg(args)
    rep = metric_invariance_experiment(fin, cfg, args.tol)
    shifted = relabel(fin, lambda p: ("copy", p))
    a = hbar(fin, None, cfg)
    b = hbar(shifted, None, cfg)
    same = [f.counts for f in a.per_eps] == [f.counts for f in b.per_eps]
    out.summary({"estimates": rep.estimates, "spread": rep.spread, "relabel_identical": same,
                 "passed": rep.passed and same})
    return 0 if rep.passed and same else 1


def cmd_gallery_list(args, out):
    lines = []
    for name, ctor in sorted(gallery.REGISTRY.items()):
        params = ", ".join(f"{p.name}={p.default!r}" for p in inspect.signature(ctor).parameters.values()
                           if p.default is not inspect.Parameter.empty and p.name != "model")
        lines.append(f"{name}({params})")
    out.text("gallery.txt", "\n".join(lines) + "\n")
    return 0


COMMANDS = {
    "check-axioms": cmd_check_axioms,
    "counts": cmd_counts,
    "entropy": cmd_entropy,
    "cover-entropy": cmd_cover_entropy,
    "globalize": cmd_globalize,
    "equivalence": cmd_equivalence,
    "omega": cmd_omega,
    "concentration": cmd_concentration,
    "product": cmd_product,
    "decompose": cmd_decompose,
    "metric-invariance": cmd_metric_invariance,
    "gallery-list": cmd_gallery_list,
}


def _eps_list(text: str) -> list[float]:
    try:
        vals = [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad eps list {text!r}") from None
    if not vals or any(v <= 0 for v in vals):
        raise argparse.ArgumentTypeError("eps values must be positive")
    return sorted(set(vals), reverse=True)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="partial-entropy",
                                description="Entropy of partial actions of Z on finite metric spaces.")
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("--system", help="gallery selector like cyclic_shift:k=2,L=10, or a system file")
    p.add_argument("--system2", help="second system for product and equivalence")
    p.add_argument("--n-min", type=int, default=2)
    p.add_argument("--n-max", type=int, default=10)
    p.add_argument("--eps", type=_eps_list, help="comma-separated eps grid")
    p.add_argument("--window", type=int, help="globalization radius R")
    p.add_argument("--mode", help="count kind (entropy), exact/approx (omega, concentration), "
                                  "layered/discrete (globalize)")
    p.add_argument("--out", help="directory for CSV, summary and plot files (default: stdout)")
    p.add_argument("--seed", type=int,
                   help="accepted for reproducible scripting; every subcommand is deterministic")
    p.add_argument("--exact-threshold", type=int, default=64)
    p.add_argument("--tol", type=float, default=0.15, help="tolerance for the asserted property")
    p.add_argument("--n-lo", type=int, help="earliest return time for approximate omega")
    p.add_argument("--eps-omega", type=float, default=1e-6, help="return radius for approximate omega")
    p.add_argument("--map", help="bijection for equivalence, e.g. '0->1,1->0'")
    p.add_argument("--pieces", help="pieces for decompose, ';'-separated lists of point ids")
    p.add_argument("--gap", action="store_true", help="globalize: also compare entropies")
    return p


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return 2 if e.code else 0
    if args.command != "gallery-list" and not args.system:
        print("error: --system is required", file=_sys.stderr)
        return 2
    if args.n_min < 1 or args.n_max < args.n_min or args.exact_threshold < 1:
        print("error: need 1 <= n-min <= n-max and a positive exact threshold", file=_sys.stderr)
        return 2
    try:
        return COMMANDS[args.command](args, Output(args.out))
    except (InputError, ParseError, AxiomError, MetricError, SaturationError, KeyError,
            ValueError) as e:
        print(f"error: {e}", file=_sys.stderr)
        return 2


def main():
    raise SystemExit(run())


if __name__ == "__main__":
    main()
