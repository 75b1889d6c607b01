import pytest
from hypothesis import given, strategies as st

from metricldp.domain import (
    DomainSpec,
    RangeQuery,
    flat_index,
    parse_range,
    point_of_index,
)
from metricldp.errors import DomainError


def test_total_size():
    assert DomainSpec((3, 4, 2)).total_size == 24
    assert DomainSpec((1,)).total_size == 1


def test_bad_dims_rejected():
    with pytest.raises(DomainError):
        DomainSpec(())
    with pytest.raises(DomainError):
        DomainSpec((0, 3))


def test_flat_index_examples():
    # ind(x) = 1 + sum_d (prod_{j<d} m_j)(x[d]-1)
    assert flat_index((2, 3), DomainSpec((3, 3))) == 8
    assert flat_index((1, 1, 1), DomainSpec((4, 4, 4))) == 1
    assert flat_index((2, 3), DomainSpec((2, 3))) == 6


def test_points_order_matches_flat_index():
    domain = DomainSpec((3, 2, 2))
    for i, x in enumerate(domain.points(), start=1):
        assert flat_index(x, domain) == i
        assert point_of_index(i, domain) == x


@given(st.lists(st.integers(1, 5), min_size=1, max_size=4).map(tuple), st.randoms())
def test_flat_index_bijection(dims, rnd):
    domain = DomainSpec(dims)
    x = tuple(rnd.randint(1, m) for m in dims)
    idx = flat_index(x, domain)
    assert 1 <= idx <= domain.total_size
    assert point_of_index(idx, domain) == x


def test_out_of_domain_rejected():
    domain = DomainSpec((3, 3))
    with pytest.raises(DomainError):
        flat_index((4, 1), domain)
    with pytest.raises(DomainError):
        flat_index((1,), domain)


def test_extended_adds_one_dummy_per_dimension():
    assert DomainSpec((3, 5)).extended().dims == (4, 6)


def test_range_query_validation():
    domain = DomainSpec((4, 4))
    RangeQuery(((1, 4), (2, 3))).validate(domain)
    with pytest.raises(DomainError):
        RangeQuery(((2, 1),))
    with pytest.raises(DomainError):
        RangeQuery(((1, 5), (1, 4))).validate(domain)


def test_nontrivial_count():
    domain = DomainSpec((4, 4, 4))
    q = RangeQuery(((1, 4), (2, 4), (1, 3)))
    assert q.nontrivial_count(domain) == 2
    # every original-coordinate query is nontrivial after dummy extension
    assert q.nontrivial_count(domain.extended()) == 3


def test_range_points_and_contains():
    q = RangeQuery(((2, 3), (1, 2)))
    pts = list(q.points())
    assert pts == [(2, 1), (3, 1), (2, 2), (3, 2)]
    assert q.contains((3, 2)) and not q.contains((1, 1))


def test_parse_range():
    assert parse_range("1:3,2:2").bounds == ((1, 3), (2, 2))
    with pytest.raises(DomainError):
        parse_range("1-3")
