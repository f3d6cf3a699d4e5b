import numpy as np
import pytest
from hypothesis import given, strategies as st

import oracles
from partial_entropy import gallery
from partial_entropy.core import (
    UNDEF,
    AxiomError,
    FinitePartialSystem,
    check_axioms,
    disjoint_union,
    global_system,
    one_point,
    product,
    relabel,
    require_axioms,
    restrict,
    restrict_global,
)
from partial_entropy.metrics import MetricError, TableMetric


def cycle4(window=3):
    return global_system(range(4), "discrete", lambda i: (i + 1) % 4, window)


def mutate(sys, kind, n, x, value=None):
    dom, mp = sys.domain.copy(), sys.maps.copy()
    row = n + sys.window
    if kind == "domain":
        dom[row, x] = not dom[row, x]
    else:
        mp[row, x] = value
    return FinitePartialSystem(sys.points, sys.metric, sys.window, dom, mp)


# restriction examples --------------------------------------------------------


def test_cycle_restriction_domains():
    s = gallery.cycle_y()
    assert s.X(1) == {1} and s.X(-1) == {0}
    assert s.X(2) == set() and s.X(0) == {0, 1}
    assert s.alpha(1, 0) == 1 and s.alpha(1, 1) is None
    assert check_axioms(s).passed


def test_swap_restriction_domains():
    s = gallery.swap_fixed()
    assert s.X(1) == {2} and s.X(2) == {0, 2}
    assert check_axioms(s).passed


def test_full_restriction_is_global():
    s = restrict_global(range(5), "discrete", lambda i: (i + 2) % 5, range(5), 3)
    assert s.is_global()
    assert all(s.X(n) == set(range(5)) for n in range(-3, 4))


def test_empty_restriction_rejected():
    with pytest.raises(ValueError):
        restrict_global(range(3), "discrete", [1, 2, 0], [], 2)


def test_identity_action_passes():
    s = global_system(range(3), "discrete", lambda i: i, 2)
    assert check_axioms(s).passed


# axiom violations -------------------------------------------------------------


def test_rewired_cycle_fails_composition_at_documented_witness():
    s = cycle4()
    bad = mutate(s, "map", 1, 1, 1)  # alpha_1(1) := 1
    rep = check_axioms(bad)
    assert not rep.passed
    assert (1, 1, 0) in rep.by_axiom("iii")
    for axiom, w in rep.violations:
        assert oracles.violation_is_real(bad, axiom, w), (axiom, w)


def test_missing_identity_is_axiom_i():
    s = gallery.cycle_y()
    bad = mutate(s, "domain", 0, 1)
    rep = check_axioms(bad)
    assert ("i", (0, 1)) in rep.violations


def test_bad_metric_raises_distinct_error():
    s = restrict_global(range(3), TableMetric(np.array([[0, 1, 5], [1, 0, 1], [5, 1, 0.]])),
                        [1, 2, 0], range(3), 1)
    with pytest.raises(MetricError):
        check_axioms(s)
    assert check_axioms(s, check_metric=False).passed


def test_require_axioms_raises_with_report():
    bad = mutate(cycle4(), "map", 1, 1, 1)
    with pytest.raises(AxiomError) as e:
        require_axioms(bad)
    assert e.value.report.violations


@pytest.mark.parametrize("seed", range(20))
def test_single_entry_mutations_fail_with_real_witnesses(seed):
    rng = np.random.default_rng(seed)
    base = gallery.cycle_y()
    n = int(rng.integers(-base.window, base.window + 1))
    x = int(rng.integers(base.size))
    if rng.random() < 0.5:
        bad = mutate(base, "domain", n, x)
    else:
        choices = [v for v in (UNDEF, 0, 1) if v != base.map(n)[x]]
        bad = mutate(base, "map", n, x, int(rng.choice(choices)))
    rep = check_axioms(bad)
    assert not rep.passed
    assert all(oracles.violation_is_real(bad, a, w) for a, w in rep.violations)


@given(st.integers(0, 10_000))
def test_checker_agrees_with_literal_oracle_on_mutants(seed):
    rng = np.random.default_rng(seed)
    s = gallery.random_restriction(rng, max_points=5, window=2)
    if rng.random() < 0.7:
        n = int(rng.integers(-2, 3))
        x = int(rng.integers(s.size))
        if rng.random() < 0.5:
            s = mutate(s, "domain", n, x)
        else:
            s = mutate(s, "map", n, x, int(rng.integers(-1, s.size)))
    expected = oracles.axioms_hold(s.points, s.window, oracles.domains(s), oracles.maps(s))
    assert check_axioms(s, check_metric=False).passed == expected


# constructions ------------------------------------------------------------------


@given(st.integers(0, 10_000))
def test_random_restrictions_are_partial_actions(seed):
    s = gallery.random_restriction(np.random.default_rng(seed))
    assert check_axioms(s).passed


@given(st.integers(0, 10_000), st.integers(0, 10_000))
def test_products_of_partial_actions_are_partial_actions(s1, s2):
    a = gallery.random_restriction(np.random.default_rng(s1), max_points=4)
    b = gallery.random_restriction(np.random.default_rng(s2), max_points=4)
    p = product(a, b)
    assert check_axioms(p).passed
    W = p.window
    for n in range(-W, W + 1):
        assert p.X(n) == {(x, y) for x in a.X(n) for y in b.X(n)}


def test_cycle_restriction_squared_domains():
    s = gallery.cycle_y()
    p = product(s, s)
    assert p.X(1) == {(1, 1)}
    assert p.X(-1) == {(0, 0)}


def test_product_with_one_point_is_a_copy():
    s = gallery.swap_fixed()
    p = product(s, one_point(s.window))
    for n in range(-s.window, s.window + 1):
        assert p.X(n) == {(x, 0) for x in s.X(n)}
        for x in s.X(-n):
            assert p.alpha(n, (x, 0)) == (s.alpha(n, x), 0)
    assert p.distance((0, 0), (2, 0)) == s.distance(0, 2)


def test_two_global_cycles_give_global_product():
    a = global_system(range(2), "discrete", [1, 0], 2)
    p = product(a, a)
    assert p.is_global() and check_axioms(p).passed


def test_product_truncates_to_smaller_window():
    p = product(gallery.cycle_y(window=3), gallery.swap_fixed(window=2))
    assert p.window == 2


def test_disjoint_union_keeps_blocks_apart():
    u = disjoint_union([gallery.cycle_y(), gallery.swap_fixed()], ["a", "b"])
    assert check_axioms(u).passed
    assert u.X(1) == {("a", 1), ("b", 2)}
    assert u.distance(("a", 0), ("b", 0)) >= 1.0


def test_induced_restriction_matches_definition():
    s = gallery.cyclic_shift_model(2, 4)
    Y = [w for w in s.points if w[0] == "0"]
    r = restrict(s, Y)
    assert check_axioms(r).passed
    for n in range(-r.window, r.window + 1):
        assert r.X(n) == {w for w in Y if s.alpha(-n, w) in set(Y)}


def test_relabel_preserves_structure():
    s = gallery.cycle_y()
    t = relabel(s, {0: "a", 1: "b"})
    assert t.X(1) == {"b"} and t.alpha(1, "a") == "b"
    assert check_axioms(t).passed


def test_build_from_labels_roundtrips():
    s = gallery.cycle_y()
    b = FinitePartialSystem.build(s.points, "discrete", s.window,
                                  {n: s.X(n) for n in range(-3, 4)},
                                  {n: {x: s.alpha(n, x) for x in s.X(-n)} for n in range(-3, 4)})
    assert np.array_equal(b.maps, s.maps) and np.array_equal(b.domain, s.domain)


def test_unknown_point_is_an_error():
    s = gallery.cycle_y()
    with pytest.raises(KeyError):
        s.index(7)
    with pytest.raises(IndexError):
        s.mask(4)


# sampled systems -----------------------------------------------------------------


def test_horseshoe_branch_formulas():
    p = np.array([[0.5, 0.25], [0.5, 0.75]])
    out = gallery.horseshoe_map(p)
    assert np.allclose(out, [[0.75, 0.5], [0.25, 0.5]])
    assert np.allclose(gallery.horseshoe_inverse(out), p)


def test_horseshoe_closure_passes_axioms():
    h = gallery.horseshoe(m=5, window=6)
    fin, idx = h.closure()
    assert check_axioms(fin, check_metric=False).passed
    assert len(idx) == len(h.samples)


def test_grid_point_outside_strips_never_moves():
    h = gallery.horseshoe(m=3, window=4)
    q = np.array([0.5, 0.05])
    assert h.orbit(q, 1) is None and h.orbit(q, -1) is None
    assert np.allclose(h.orbit(q, 0), q)


def test_sampled_orbit_agrees_with_closure():
    h = gallery.horseshoe(m=4, window=6)
    fin, idx = h.closure()
    coords = fin.coords
    for k in idx[:16]:
        for n in range(-6, 7):
            direct = h.orbit(coords[k], n)
            j = fin.map(n)[k]
            if direct is None:
                assert j == UNDEF
            else:
                assert j != UNDEF and np.allclose(coords[j], direct, atol=1e-9)
