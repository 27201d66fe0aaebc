import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from genwreath.errors import CapExceeded, ValidationError
from genwreath.perm import (
    Permutation,
    compose,
    conjugate,
    format_cycles,
    inverse,
    parse_cycles,
    set_degree_cap,
)


def perms(degree):
    return st.permutations(range(degree)).map(Permutation)


def test_compose_applies_right_factor_first():
    p = parse_cycles("(0 1)", 3)
    q = parse_cycles("(1 2)", 3)
    pq = compose(p, q)
    # pointwise: x -> p(q(x))
    assert [pq(x) for x in range(3)] == [p(q(x)) for x in range(3)] == [1, 2, 0]
    assert pq == parse_cycles("(0 1 2)", 3)


def test_inverse_examples():
    e = Permutation.identity(4)
    assert inverse(e) == e
    assert inverse(parse_cycles("(0 1 2)", 3)) == parse_cycles("(0 2 1)", 3)


def test_conjugate_examples():
    g = parse_cycles("(0 1)", 3)
    h = parse_cycles("(0 2)", 3)
    assert conjugate(g, Permutation.identity(3)) == g
    assert conjugate(Permutation.identity(3), h) == Permutation.identity(3)
    assert conjugate(g, h) == parse_cycles("(1 2)", 3)


def test_degree_mismatch():
    with pytest.raises(ValidationError):
        compose(Permutation.identity(2), Permutation.identity(3))
    with pytest.raises(ValidationError):
        conjugate(Permutation.identity(2), Permutation.identity(3))


def test_parse_and_format():
    assert parse_cycles("()", 5).is_identity()
    five = parse_cycles("(0 1 2 3 4)", 5)
    assert [five(i) for i in range(5)] == [1, 2, 3, 4, 0]
    assert format_cycles(parse_cycles("(3 4)(2 0 1)", 5)) == "(0 1 2)(3 4)"


@pytest.mark.parametrize("text", ["(0 1", "0 1)", "(0 a)", "(0 1)(1 2)", "(0 5)", ""])
def test_parse_rejects(text):
    with pytest.raises(ValidationError):
        parse_cycles(text, 5)


def test_not_a_bijection():
    with pytest.raises(ValidationError):
        Permutation([0, 0, 1])


def test_degree_cap():
    previous = set_degree_cap(8)
    try:
        with pytest.raises(CapExceeded):
            Permutation.identity(9)
    finally:
        set_degree_cap(previous)


@given(perms(7), perms(7), perms(7))
def test_group_laws(p, q, r):
    e = Permutation.identity(7)
    assert compose(compose(p, q), r) == compose(p, compose(q, r))
    assert compose(p, e) == p == compose(e, p)
    assert compose(p, inverse(p)) == e
    assert inverse(inverse(p)) == p
    assert compose(p, q).support() <= p.support() | q.support()


@given(perms(9))
def test_cycle_round_trip(p):
    text = format_cycles(p)
    assert parse_cycles(text, 9) == p
    assert format_cycles(parse_cycles(text, 9)) == text


def test_json_form_is_image_array():
    p = parse_cycles("(0 2)", 3)
    assert p.to_json() == [2, 1, 0]
    assert np.array_equal(Permutation(p.to_json()).images, p.images)
