import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import oracles
from partial_entropy import gallery
from partial_entropy.core import disjoint_union, global_system
from partial_entropy.entropy import (
    InvarianceError,
    SaturationError,
    SweepConfig,
    count_table,
    decomposition_experiment,
    fit_counts,
    h_eps,
    hbar,
    invariance_witness,
    metric_invariance_experiment,
    product_experiment,
    verify_chain_sweep,
)

COARSE = SweepConfig(eps_grid=(4.0, 2.0, 1.0, 0.5, 0.25), n_min=1, n_max=4)
LOG2, LOG3 = math.log(2), math.log(3)


def test_config_validation():
    with pytest.raises(ValueError):
        SweepConfig(eps_grid=(0.1, 0.5))
    with pytest.raises(ValueError):
        SweepConfig(eps_grid=())
    with pytest.raises(ValueError):
        SweepConfig(n_min=3, n_max=2)
    with pytest.raises(ValueError):
        SweepConfig(count_kind="bogus")
    assert SweepConfig().with_(n_max=4).n_max == 4


def test_fit_counts_recovers_exponential_rate():
    ns = [1, 2, 3, 4]
    slope, _, resid, used = fit_counts(ns, [3 ** n for n in ns], 10 ** 6)
    assert slope == pytest.approx(LOG3) and resid == pytest.approx(0, abs=1e-12)
    assert list(used) == ns


def test_fit_counts_drops_saturated_points():
    slope, *_, used = fit_counts([1, 2, 3, 4], [2, 4, 8, 8], 8)
    assert list(used) == [1, 2] and slope == pytest.approx(LOG2)
    assert fit_counts([1, 2], [8, 8], 8) is None


def test_one_point_has_zero_entropy():
    s = global_system([0], "discrete", [0], 5)
    est = hbar(s, None, COARSE)
    assert est.hbar == 0.0 and all(f.degenerate for f in est.per_eps)


def test_finite_rotation_has_zero_entropy():
    est = hbar(gallery.cycle_global(4, 6), None, COARSE.with_(n_max=6))
    assert est.hbar == pytest.approx(0.0, abs=1e-12)


def test_cycle_restriction_counts_are_constant():
    s = gallery.cycle_y()
    rows = count_table(s, None, COARSE)
    assert {(n, e): v for n, e, v, _ in rows}[(2, 0.5)] == 2
    assert hbar(s, None, COARSE).hbar == 0.0


def test_every_scale_saturated_is_an_error():
    s = gallery.cyclic_shift_model(2, 4)
    with pytest.raises(SaturationError):
        hbar(s, None, SweepConfig(eps_grid=(1e-3,), n_min=1, n_max=3))


def test_full_shift_separated_counts_double():
    s = gallery.cyclic_shift_model(2, 10)
    slope, fit = h_eps(s, None, 0.25, SweepConfig(n_min=2, n_max=6))
    assert fit.counts == [2 ** (n + 4) for n in range(2, 7)]
    assert all(fit.exact)
    assert slope == pytest.approx(LOG2, abs=1e-9)


def test_full_shift_on_three_symbols():
    est = hbar(gallery.cyclic_shift_model(3, 7), None,
               SweepConfig(eps_grid=(0.5, 0.25), n_min=1, n_max=4))
    assert est.hbar == pytest.approx(LOG3, abs=0.1)


def test_count_kinds_agree_on_full_shift():
    sweep = verify_chain_sweep(gallery.cyclic_shift_model(2, 8), None,
                               SweepConfig(eps_grid=(0.5, 0.25), n_min=1, n_max=4))
    assert sweep.passed, sweep.estimates


@settings(max_examples=30)
@given(st.integers(0, 10_000))
def test_estimates_are_nonnegative_and_traced(seed):
    s = gallery.random_restriction(np.random.default_rng(seed), max_points=8)
    try:
        est = hbar(s, None, COARSE)
    except SaturationError:
        return
    assert est.hbar >= 0
    for f in est.per_eps:
        assert len(f.ns) == len(f.counts) == len(f.exact)
        assert all(c == oracles.sep(s, s.points, n, f.eps) for n, c in zip(f.ns, f.counts))


def test_product_of_small_shifts():
    a = gallery.cyclic_shift_model(2, 5)
    rep = product_experiment(a, a, SweepConfig(eps_grid=(0.5,), n_min=1, n_max=3))
    assert rep.counts_ok
    assert rep.hbar_ab == pytest.approx(2 * LOG2, abs=0.15)


@settings(max_examples=15)
@given(st.integers(0, 10_000), st.integers(0, 10_000))
def test_product_count_inequalities(s1, s2):
    a = gallery.random_restriction(np.random.default_rng(s1), max_points=5, window=2)
    b = gallery.random_restriction(np.random.default_rng(s2), max_points=5, window=2)
    try:
        rep = product_experiment(a, b, SweepConfig(eps_grid=(2.0, 1.0, 0.5), n_min=1, n_max=3))
    except SaturationError:
        return
    assert rep.counts_ok, [r for r in rep.count_checks if not r[-1]]
    assert all(r[9] for r in rep.count_checks)


def test_separated_product_can_shrink_for_partial_factors():
    a = gallery.random_restriction(np.random.default_rng(0), max_points=5, window=2)
    b = gallery.random_restriction(np.random.default_rng(4), max_points=5, window=2)
    rep = product_experiment(a, b, SweepConfig(eps_grid=(2.0, 1.0, 0.5), n_min=1, n_max=3))
    shrunk = [r for r in rep.count_checks if not r[10]]
    assert shrunk and rep.counts_ok
    n, e, sa, sb, sab = shrunk[0][:5]
    assert sab < sa * sb


def test_decomposition_of_cycle_and_fixed_point():
    s = global_system(range(3), "discrete", [1, 0, 2], 3)
    rep = decomposition_experiment(s, [[0, 1], [2]], COARSE)
    assert rep.hbar_full == 0.0 and rep.hbar_pieces == [0.0, 0.0] and rep.passed


def test_decomposition_rejects_non_invariant_piece():
    s = gallery.cycle_global(4, 3)
    assert invariance_witness(s, [0, 1]) is not None
    with pytest.raises(InvarianceError) as e:
        decomposition_experiment(s, [[0, 1], [2, 3]], COARSE)
    n, x = e.value.witness
    assert s.alpha(n, x) not in {0, 1} or x not in {0, 1}


def test_decomposition_pieces_must_cover():
    with pytest.raises(ValueError):
        decomposition_experiment(gallery.swap_fixed(), [[0, 1]], COARSE)


def test_decomposition_of_shifts_on_two_and_three_symbols():
    u = disjoint_union([gallery.cyclic_shift_model(2, 6), gallery.cyclic_shift_model(3, 5)],
                       ["k2", "k3"])
    pieces = [[p for p in u.points if p[0] == tag] for tag in ("k2", "k3")]
    rep = decomposition_experiment(u, pieces, SweepConfig(eps_grid=(1.0, 0.5, 0.25),
                                                          n_min=1, n_max=4), tolerance=0.15)
    assert rep.hbar_pieces[0] == pytest.approx(LOG2, abs=0.1)
    assert rep.hbar_pieces[1] == pytest.approx(LOG3, abs=0.15)
    assert rep.passed


def test_metric_invariance_on_full_shift():
    rep = metric_invariance_experiment(gallery.cyclic_shift_model(2, 8),
                                       SweepConfig(eps_grid=(0.5, 0.25), n_min=1, n_max=5))
    assert rep.passed, rep.estimates
    assert rep.estimates["d"] == pytest.approx(LOG2, abs=0.1)
