"""Plain-text description of a finite partial system.

::

    # comments run to end of line
    window 3
    points : 0 1
    metric discrete            # or one "D <id> : <row>" line per point
    X 0 : 0 1
    X 1 : 1
    X -1 : 0
    A 0 : 0->0 1->1
    A 1 : 0->1
    A -1 : 1->0
    U singletons : 0           # optional named cover members, repeatable
    U singletons : 1

An optional ``labels text`` line keeps every identifier a string.
Missing ``X``/``A`` lines mean empty domains and maps. Identifiers written
as canonical integers become ints. A parsed system must satisfy the
partial-action axioms.
"""

from __future__ import annotations

import re
from pathlib import Path

import numpy as np

from .core import AxiomError, FinitePartialSystem, check_axioms
from .metrics import DiscreteMetric, MetricError, TableMetric


class ParseError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        super().__init__(f"line {line}: {message}" if line else message)
        self.line = line


_TOKEN = re.compile(r"^[^\s:#]+$")


def _ident(tok: str, text_labels: bool = False):
    """Canonical integer spellings become ints; anything else (e.g. ``"001"``) stays a string."""
    if text_labels:
        return tok
    try:
        v = int(tok)
    except ValueError:
        return tok
    return v if str(v) == tok else tok


def parse_system(text: str, name: str = "", check: bool = True) -> FinitePartialSystem:
    window = points = metric_mode = None
    rows: dict = {}
    domains: dict = {}
    maps: dict = {}
    covers: dict = {}
    text_labels = any(raw.split("#", 1)[0].split() == ["labels", "text"]
                      for raw in text.splitlines())
    ident = lambda tok: _ident(tok, text_labels)
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head, _, rest = line.partition(":")
        words = head.split()
        body = rest.split()
        try:
            key = words[0]
            if key == "window" and len(words) == 2 and not rest:
                window = int(words[1])
            elif key == "labels" and words == ["labels", "text"] and not rest:
                pass
            elif key == "points" and len(words) == 1:
                points = [ident(t) for t in body]
            elif key == "metric" and len(words) == 2 and not rest:
                metric_mode = words[1]
            elif key == "D" and len(words) == 2:
                rows[ident(words[1])] = [float(t) for t in body]
            elif key == "X" and len(words) == 2:
                n = int(words[1])
                if n in domains:
                    raise ParseError(f"duplicate domain line for X {n}", lineno)
                domains[n] = [ident(t) for t in body]
            elif key == "A" and len(words) == 2:
                n = int(words[1])
                table = maps.setdefault(n, {})
                for pair in body:
                    a, arrow, b = pair.partition("->")
                    if not arrow or not a or not b:
                        raise ParseError(f"bad map entry {pair!r}", lineno)
                    if ident(a) in table:
                        raise ParseError(f"alpha_{n} defined twice at {a}", lineno)
                    table[ident(a)] = ident(b)
            elif key == "U" and len(words) == 2:
                covers.setdefault(words[1], []).append(frozenset(ident(t) for t in body))
            else:
                raise ParseError(f"unrecognised line {raw.strip()!r}", lineno)
        except ValueError as e:
            if isinstance(e, ParseError):
                raise
            raise ParseError(str(e), lineno) from None
    if window is None:
        raise ParseError("missing 'window' line")
    if points is None:
        raise ParseError("missing 'points' line")
    if metric_mode not in (None, "discrete"):
        raise ParseError(f"unknown metric {metric_mode!r}")
    if metric_mode == "discrete":
        if rows:
            raise ParseError("give either 'metric discrete' or D rows, not both")
        metric = DiscreteMetric(len(points))
    else:
        if set(rows) != set(points):
            raise ParseError("need exactly one D row per point")
        table = np.array([rows[p] for p in points])
        if table.shape != (len(points), len(points)):
            raise ParseError("metric rows must have one entry per point")
        metric = TableMetric(table)
    try:
        sys = FinitePartialSystem.build(points, metric, window, domains, maps, name=name,
                                        covers={k: tuple(v) for k, v in covers.items()})
    except (KeyError, ValueError) as e:
        raise ParseError(str(e)) from None
    if check:
        report = check_axioms(sys)  # MetricError propagates unchanged
        if not report.passed:
            raise AxiomError(f"not a partial action: {report.summary()}", report)
    return sys


def load_system(path, check: bool = True) -> FinitePartialSystem:
    p = Path(path)
    return parse_system(p.read_text(), name=p.stem, check=check)


def _tok(label) -> str:
    s = str(label)
    if not _TOKEN.match(s) or "->" in s:
        raise ValueError(f"label {label!r} cannot be written as a token")
    return s


def _num(v: float) -> str:
    return repr(float(v))


def dump_system(sys: FinitePartialSystem) -> str:
    P = sys.points
    out = [f"window {sys.window}"]
    if all(isinstance(p, str) for p in P):
        out.append("labels text")
    elif any(isinstance(p, str) and _ident(p) != p for p in P):
        raise ValueError("mixed labels: a string label reads back as an integer")
    out.append("points : " + " ".join(_tok(p) for p in P))
    if isinstance(sys.metric, DiscreteMetric):
        out.append("metric discrete")
    else:
        table = sys.metric.table()
        for i, p in enumerate(P):
            out.append(f"D {_tok(p)} : " + " ".join(_num(v) for v in table[i]))
    W = sys.window
    for n in range(-W, W + 1):
        members = np.flatnonzero(sys.mask(n))
        if len(members):
            out.append(f"X {n} : " + " ".join(_tok(P[i]) for i in members))
    for n in range(-W, W + 1):
        f = sys.map(n)
        src = np.flatnonzero(f != -1)
        if len(src):
            out.append(f"A {n} : " + " ".join(f"{_tok(P[i])}->{_tok(P[f[i]])}" for i in src))
    for name, sets in sys.covers.items():
        for s in sets:
            out.append(f"U {name} : " + " ".join(_tok(p) for p in sorted(s, key=P.index)))
    return "\n".join(out) + "\n"


__all__ = ["ParseError", "parse_system", "load_system", "dump_system", "MetricError"]
