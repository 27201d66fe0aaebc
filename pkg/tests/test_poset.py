import itertools
import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from genwreath.errors import CapExceeded, ValidationError
from genwreath.poset import (
    Poset,
    all_posets,
    downsets,
    is_down_closed,
    is_isomorphic,
    is_linear,
    is_up_closed,
    make_antichain,
    make_chain,
    opposite,
    parse_poset_json,
    posets_up_to_isomorphism,
    restrict,
)


def subset_oracle(p):
    """Down-sets by filtering all 2^n subsets through the closure predicate."""
    out = []
    for r in range(p.n + 1):
        for s in itertools.combinations(range(p.n), r):
            if all(i in s for j in s for i in range(p.n) if p.leq[i, j]):
                out.append(frozenset(s))
    return out


@st.composite
def posets(draw, max_n=6):
    """Random posets as the order generated by random pairs i < j (so acyclic)."""
    n = draw(st.integers(1, max_n))
    pairs = draw(st.lists(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)), max_size=10))
    perm = draw(st.permutations(range(n)))
    leq = np.eye(n, dtype=bool)
    for a, b in pairs:
        if a < b:
            leq[perm[a], perm[b]] = True
    for k in range(n):
        leq |= leq[:, k : k + 1] & leq[k : k + 1, :]
    return Poset(leq)


def test_chain_basics():
    c1 = make_chain(1)
    assert c1.n == 1 and c1.leq[0, 0]
    c2 = make_chain(2)
    assert c2.leq[0, 1] and not c2.leq[1, 0]


def test_antichain_basics():
    assert make_antichain(1) == make_chain(1)
    assert not make_antichain(2).leq[0, 1]


@pytest.mark.parametrize("maker", [make_chain, make_antichain])
def test_zero_elements_rejected(maker):
    with pytest.raises(ValidationError):
        maker(0)


def test_invalid_relations_rejected():
    with pytest.raises(ValidationError):
        Poset([[True, True], [True, True]])
    with pytest.raises(ValidationError):
        Poset([[False]])
    with pytest.raises(ValidationError):
        Poset([[1, 1, 0], [0, 1, 1], [0, 0, 1]])


def test_downset_counts_match_subset_oracle():
    assert len(downsets(make_chain(3))) == len(subset_oracle(make_chain(3))) == 4
    assert len(downsets(make_antichain(2))) == len(subset_oracle(make_antichain(2))) == 4
    for n in range(1, 6):
        assert len(downsets(make_chain(n))) == n + 1
        assert len(downsets(make_antichain(n))) == 2**n


def test_downset_order_is_canonical():
    keys = [d.key for d in downsets(make_antichain(3))]
    assert keys == sorted(keys)
    members = [d.sorted_members() for d in downsets(make_antichain(2))]
    assert members == [[], [0], [1], [0, 1]]


def test_downset_size_guard():
    with pytest.raises(CapExceeded):
        downsets(make_antichain(21))


def test_is_down_closed_examples():
    c2 = make_chain(2)
    assert not is_down_closed(c2, {1})
    assert is_down_closed(c2, {0})
    assert is_down_closed(make_antichain(3), set())


def test_is_linear_examples():
    assert is_linear(make_chain(4))
    assert not is_linear(make_antichain(2))
    assert is_linear(make_chain(1))


def test_opposite_examples():
    assert opposite(make_antichain(3)) == make_antichain(3)
    assert opposite(make_chain(2)).leq[1, 0]


def test_restrict_examples():
    p = make_chain(3)
    assert restrict(p, range(3)) == p
    assert restrict(p, {0, 2}) == make_chain(2)
    assert restrict(make_antichain(3), {1, 2}) == make_antichain(2)


@settings(max_examples=60, deadline=None)
@given(posets())
def test_downsets_form_a_lattice(p):
    sets = [d.members for d in downsets(p)]
    assert set(sets) == set(subset_oracle(p))
    assert frozenset() in sets and frozenset(range(p.n)) in sets
    lookup = set(sets)
    for a in sets:
        for b in sets:
            assert a | b in lookup and a & b in lookup


@settings(max_examples=60, deadline=None)
@given(posets())
def test_opposite_involution_and_complements(p):
    assert opposite(opposite(p)) == p
    op_sets = {d.members for d in downsets(opposite(p))}
    full = frozenset(range(p.n))
    ups = {frozenset(s) for s in subset_oracle(opposite(p)) if is_up_closed(p, s)}
    assert op_sets == ups
    assert {full - s for s in op_sets} == {d.members for d in downsets(p)}


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 7))
def test_linear_downsets_are_a_chain(n):
    sets = downsets(make_chain(n))
    assert all(a.members < b.members for a, b in zip(sets, sets[1:]))


def test_poset_file_loader_closes_covers():
    p = parse_poset_json(json.dumps({"elements": ["a", "b", "c"], "covers": [["a", "b"], ["b", "c"]]}))
    assert p == make_chain(3)
    assert p.names == ("a", "b", "c")
    with pytest.raises(ValidationError):
        parse_poset_json({"elements": ["a", "b"], "covers": [["a", "b"], ["b", "a"]]})
    with pytest.raises(ValidationError):
        parse_poset_json({"elements": ["a"], "covers": [["a", "z"]]})


def test_isomorphism_small_and_guard():
    p = Poset([[1, 0, 0], [0, 1, 1], [0, 0, 1]])
    q = Poset([[1, 1, 0], [0, 1, 0], [0, 0, 1]])
    assert is_isomorphic(p, q)
    assert not is_isomorphic(p, make_chain(3))
    with pytest.raises(CapExceeded):
        is_isomorphic(make_chain(9), make_chain(9))


def test_poset_counts_on_small_sets():
    # labelled posets: 1, 3, 19; unlabelled: 1, 2, 5
    assert [len(all_posets(n)) for n in (1, 2, 3)] == [1, 3, 19]
    assert [len(posets_up_to_isomorphism(n)) for n in (1, 2, 3)] == [1, 2, 5]
