import numpy as np
import pytest
from hypothesis import given, strategies as st

from partial_entropy.metrics import (
    BlockMetric,
    DiscreteMetric,
    LayeredMetric,
    MetricError,
    ProductMetric,
    TableMetric,
    as_metric,
    bounded,
    doubled_capped,
    validate_table,
)


def line(*xs):
    x = np.array(xs, dtype=float)
    return np.abs(x[:, None] - x[None, :])


@pytest.mark.parametrize("table, message", [
    (np.array([[0, 1], [2, 0]]), "asymmetric"),
    (np.array([[0, -1], [-1, 0]]), "negative"),
    (np.array([[1, 1], [1, 0]]), "self-distance"),
    (np.array([[0, 0], [0, 0]]), "distance zero"),
    (np.array([[0, 1, 5], [1, 0, 1], [5, 1, 0]]), "triangle"),
    (np.ones((2, 3)), "square"),
])
def test_malformed_tables_are_rejected(table, message):
    with pytest.raises(MetricError, match=message):
        validate_table(table)


def test_trusted_table_skips_triangle_pass_only():
    bad = np.array([[0, 1, 5], [1, 0, 1], [5, 1, 0]], dtype=float)
    TableMetric(bad, trusted=True).validate()
    with pytest.raises(MetricError):
        TableMetric(np.array([[0, 1], [2, 0]]), trusted=True).validate()


def test_discrete_and_coercion():
    d = as_metric("discrete", 3)
    assert isinstance(d, DiscreteMetric)
    assert d.table().tolist() == (1 - np.eye(3)).tolist()
    assert d.diameter() == 1.0
    with pytest.raises(ValueError):
        as_metric("euclid", 3)


def test_product_metric_is_max_in_row_major_order():
    a, b = TableMetric(line(0, 1)), TableMetric(line(0, 3, 4))
    p = ProductMetric(a, b)
    # (1, 0) vs (0, 2) -> max(1, 4)
    assert p.pairwise(1 * 3 + 0, 0 * 3 + 2) == 4.0
    validate_table(p.table())


def test_block_and_layered_metrics_are_metrics():
    base = TableMetric(line(0, 1, 3))
    blk = BlockMetric([base, DiscreteMetric(2)], gap=3.0)
    validate_table(blk.table())
    lay = LayeredMetric(base, rep=[0, 1, 2, 0, 2], layer=[0, 0, 0, 1, 1], gap=3.0)
    validate_table(lay.table())
    with pytest.raises(MetricError):
        LayeredMetric(base, [0, 1], [0, 1], gap=1.0).validate()


@given(st.lists(st.floats(-10, 10, allow_nan=False), min_size=2, max_size=7, unique=True))
def test_transformed_metrics_stay_metrics_and_keep_order(xs):
    base = TableMetric(line(*xs))
    for m in (bounded(base), doubled_capped(base)):
        validate_table(m.table(), atol=1e-12)
        t, b = m.table(), base.table()
        # nondecreasing transforms keep the order of distances
        assert np.all((b[:, :, None, None] <= b[None, None]) <= (t[:, :, None, None] <= t[None, None]))


def test_restrict_keeps_distances():
    m = TableMetric(line(0, 2, 5, 9))
    r = m.restrict([1, 3])
    assert r.table().tolist() == [[0.0, 7.0], [7.0, 0.0]]
