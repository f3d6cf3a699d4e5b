import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import oracles
from partial_entropy import gallery
from partial_entropy.core import restrict_global
from partial_entropy.counting import (
    PROVABLE_LINKS,
    Counter,
    ExactTooLarge,
    chain_links,
    count_report,
    exact_cover_count,
    exact_separated,
    exact_spanning,
    greedy_cover,
    greedy_separated,
    greedy_spanning,
)
from partial_entropy.metrics import TableMetric
from partial_entropy.orbit import d_n


@pytest.fixture
def cy():
    return gallery.cycle_y()


def circle(m=8, step=2, half=None):
    ang = 2 * np.pi * np.arange(m) / m
    xy = np.stack([np.cos(ang), np.sin(ang)], axis=1)
    table = np.linalg.norm(xy[:, None] - xy[None, :], axis=-1)
    Y = range(m // 2) if half is None else half
    return restrict_global(range(m), TableMetric(table), lambda i: (i + step) % m, Y, 3)


def random_case(seed, max_points=8):
    rng = np.random.default_rng(seed)
    s = gallery.random_restriction(rng, max_points=max_points)
    n = int(rng.integers(1, s.window + 2))
    eps = float(rng.choice([0.2, 0.5, 1.0, 1.7, 2.5, 4.0]))
    return s, n, eps


# worked values --------------------------------------------------------------


def test_cycle_restriction_counts(cy):
    assert greedy_separated(cy, [0, 1], 2, 0.5) == {0, 1}
    assert exact_separated(cy, [0, 1], 2, 0.5) == 2
    assert greedy_spanning(cy, [0, 1], 2, 0.5) == {0, 1}
    assert exact_spanning(cy, [0, 1], 2, 0.5) == 2
    assert exact_cover_count(cy, [0, 1], 2, 0.5) == (2, True)
    assert exact_cover_count(cy, [0, 1], 2, 1.0) == (2, True)


def test_cycle_restriction_report_chain(cy):
    r = count_report(cy, None, 2, 0.5)
    assert (r.cov2_exact, r.span_exact, r.sep_exact, r.cov_exact) == (2, 2, 2, 2)
    assert all(r.chain.values()) and r.exact_flags == "exact"


@pytest.mark.parametrize("eps", [0.3, 0.5 * 2 * math.sin(math.pi / 8), 0.8, 1.0, 1.5])
def test_circle_half_separated_matches_oracle(eps):
    s = circle()
    assert exact_separated(s, None, 1, eps) == oracles.sep(s, s.points, 1, eps)
    assert len(greedy_separated(s, None, 1, eps)) <= oracles.sep(s, s.points, 1, eps)


def test_trivial_constant_counts():
    s = gallery.cycle_global(4, 3)
    for n in range(1, 5):
        assert exact_separated(s, None, n, 5.0) == 1
        assert exact_cover_count(s, None, n, 5.0) == (1, True)


# oracle agreement -------------------------------------------------------------


@given(st.integers(0, 100_000))
def test_exact_counts_match_oracles(seed):
    s, n, eps = random_case(seed)
    K = s.points
    assert exact_separated(s, K, n, eps) == oracles.sep(s, K, n, eps)
    assert exact_spanning(s, K, n, eps) == oracles.span(s, K, n, eps, strict=True)
    assert exact_spanning(s, K, n, eps, strict=False) == oracles.span(s, K, n, eps, strict=False)


@settings(max_examples=25)
@given(st.integers(0, 100_000))
def test_cover_count_matches_oracle(seed):
    s, n, eps = random_case(seed, max_points=6)
    assert exact_cover_count(s, s.points, n, eps) == (oracles.cov(s, s.points, n, eps), True)


@given(st.integers(0, 100_000))
def test_greedy_witnesses_are_valid_and_bound_exact_counts(seed):
    s, n, eps = random_case(seed)
    K = list(s.points)
    S = greedy_separated(s, K, n, eps)
    assert all(d_n(s, a, b, n).value >= eps for a in S for b in S if a != b)
    # a maximal separated set spans in the weak sense
    assert all(any(d_n(s, x, y, n).value < eps for y in S) for x in K)
    B = greedy_spanning(s, K, n, eps, strict=True)
    assert all(any(d_n(s, x, y, n).value < eps
                   and oracles.signature(s, x, n) == oracles.signature(s, y, n) for y in B)
               for x in K)
    parts = greedy_cover(s, K, n, eps)
    assert set().union(*parts) == set(K)
    assert all(d_n(s, a, b, n).value < eps for P in parts for a in P for b in P)
    assert len(S) <= exact_separated(s, K, n, eps) <= len(parts)


@given(st.integers(0, 100_000))
def test_provable_links_hold(seed):
    s, n, eps = random_case(seed, max_points=12)
    r = count_report(s, None, n, eps)  # raises on any broken provable link
    assert all(r.chain[k] for k in PROVABLE_LINKS)


def test_strict_span_can_exceed_sep():
    # x and y never share a time of definition beyond 0, so d_n(x, y) = d(x, y) is small,
    # but their signatures differ: each needs its own strict spanning point
    s = gallery.cycle_y()
    r = count_report(s, None, 2, 2.0)
    assert r.sep_exact == 1 and r.span_exact == 2 and r.span_weak_exact == 1
    assert chain_links(r)["span<=sep"] is False


# thresholds and caching -------------------------------------------------------------


def test_cluster_components_stay_exact_past_threshold():
    s = gallery.cyclic_shift_model(2, 10)
    c = Counter(s, None, 6, exact_threshold=4)
    assert c.count("sep", 3, 0.25) == (2 ** 7, True)


def test_large_component_falls_back_to_greedy():
    s = circle(m=40, step=1, half=range(40))
    c = Counter(s, None, 1, exact_threshold=5)
    with pytest.raises(ExactTooLarge):
        c.exact_separated(1, 0.5)
    value, exact = c.count("sep", 1, 0.5)
    assert not exact and value == len(c.greedy_separated(1, 0.5))
    r = c.report(1, 0.5)
    assert not r.exact and r.exact_flags.startswith("inexact:")
    assert r.value("sep") == r.sep_lower


def test_unknown_kind_rejected(cy):
    with pytest.raises(ValueError):
        Counter(cy).count("entropy", 1, 0.5)


def test_empty_carrier_rejected(cy):
    with pytest.raises(ValueError):
        exact_separated(cy, [], 1, 0.5)
