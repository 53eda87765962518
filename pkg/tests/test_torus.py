from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from krongap.torus import L1, L2, LINF, Metric, coord_norm, distance_key, parse_metric, parse_metrics

rationals = st.fractions(min_value=-3, max_value=3, max_denominator=50)
points = st.tuples(rationals, rationals)


@pytest.mark.parametrize("x, n", [(Fraction(3, 4), Fraction(1, 4)), (0, 0), (Fraction(17, 5), Fraction(2, 5))])
def test_coord_norm(x, n):
    assert coord_norm(x) == n


def test_distance_key_examples():
    x, y = (0, 0), (Fraction(3, 4), Fraction(1, 2))
    assert distance_key(x, x, L2) == 0
    assert distance_key(x, y, L2) == Fraction(5, 16)
    assert distance_key(x, y, LINF) == Fraction(1, 2)
    assert distance_key(x, y, L1) == Fraction(3, 4)


def test_dimension_mismatch():
    with pytest.raises(ValueError):
        distance_key((0,), (0, 0), L2)


def test_metric_parsing():
    assert parse_metrics("1,2,inf") == (L1, L2, LINF)
    assert parse_metric("∞") == LINF and str(LINF) == "inf" and LINF.name == "Linf"
    for bad in ["0", "-1", "x", "1.5"]:
        with pytest.raises(ValueError):
            parse_metric(bad)


@given(rationals)
def test_norm_symmetries(x):
    n = coord_norm(x)
    assert 0 <= n <= Fraction(1, 2)
    assert n == coord_norm(-x) == coord_norm(x + 1)


@given(points, points, points, st.sampled_from([L1, L2, LINF, Metric(3)]))
def test_translation_invariance_and_symmetry(x, y, t, m):
    k = distance_key(x, y, m)
    assert k == distance_key(y, x, m)
    assert k == distance_key([a + b for a, b in zip(x, t)], [a + b for a, b in zip(y, t)], m)
    assert (k == 0) == all(coord_norm(a - b) == 0 for a, b in zip(x, y))


def _sqrt_le_sum(a, b, c):
    """sqrt(a) <= sqrt(b) + sqrt(c), exactly, for nonnegative rationals."""
    s = a - b - c
    return s <= 0 or s * s <= 4 * b * c


@given(points, points, points)
def test_triangle_inequality(x, y, z):
    for m in (L1, LINF):
        assert distance_key(x, z, m) <= distance_key(x, y, m) + distance_key(y, z, m)
    assert _sqrt_le_sum(distance_key(x, z, L2), distance_key(x, y, L2), distance_key(y, z, L2))


@given(st.lists(st.fractions(min_value=0, max_value=Fraction(1, 2), max_denominator=60), min_size=2, max_size=8))
def test_diagonal_key_order_agrees_across_metrics(ts):
    # points whose difference from the origin has equal coordinate norms
    pts = [(t, 1 - t) for t in ts]
    orders = []
    for m in (L1, L2, LINF, Metric(3)):
        keys = [distance_key((0, 0), p, m) for p in pts]
        orders.append(sorted(range(len(pts)), key=lambda i: (keys[i], i)))
    assert all(o == orders[0] for o in orders)
