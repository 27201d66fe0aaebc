import itertools
import math

import numpy as np
import pytest

from genwreath.bsgs import build_group, closure_enumerate, is_normalized_by
from genwreath.errors import CapExceeded, ValidationError, WellDefinednessViolation
from genwreath.group_core import builtin_group
from genwreath.perm import Permutation, compose, conjugate, set_degree_cap
from genwreath.poset import Poset, all_posets, downsets, is_down_closed, make_antichain, make_chain
from genwreath.wreath import (
    WreathGroup,
    classes_mod_gamma,
    classify_normal_subgroups_small,
    config_space,
    d_gamma_group,
    d_gamma_membership,
    kernel_order_formula,
    quotient_action,
    quotient_iso_check,
    subgroup_h_gamma,
    verify_kernel,
    xi,
)

from conftest import make_wreath


def xi_by_formula(space, lam, h):
    """Pointwise evaluation of the generator, one configuration at a time."""
    factor = space.factors[lam]
    images = []
    for index in range(space.total):
        x = list(space.decode(index))
        if not any(space.lam.lt(lam, eta) and x[eta] != 0 for eta in range(space.lam.n)):
            x[lam] = int(factor.mul[h, x[lam]])
        images.append(space.encode(x))
    return Permutation(images)


def test_config_space_sizes():
    a5 = builtin_group("A5")
    assert config_space(make_chain(2), [a5, a5]).total == 3600
    z2 = builtin_group("Z2")
    assert config_space(make_antichain(3), [z2] * 3).total == 8
    assert config_space(make_chain(3), [a5] * 3).total == 216000


def test_config_space_degree_cap_names_product():
    previous = set_degree_cap(1000)
    try:
        with pytest.raises(CapExceeded) as err:
            config_space(make_chain(2), [builtin_group("A5")] * 2)
        assert "60" in str(err.value)
    finally:
        set_degree_cap(previous)


def test_config_space_rejects_wrong_factor_count():
    with pytest.raises(ValidationError):
        config_space(make_chain(2), [builtin_group("Z2")])


def test_mixed_radix_round_trip():
    space = config_space(make_chain(3), [builtin_group(n) for n in ("Z2", "S3", "Z3")])
    assert space.total == 36
    assert space.decode(1) == (1, 0, 0)
    for i in range(space.total):
        assert space.encode(space.decode(i)) == i


@pytest.mark.parametrize("poset", [make_chain(2), make_antichain(2), make_chain(3), Poset([[1, 1, 1], [0, 1, 0], [0, 0, 1]])])
@pytest.mark.parametrize("name", ["Z2", "S3"])
def test_xi_matches_pointwise_formula(poset, name):
    w = make_wreath(poset, name)
    for lam in range(poset.n):
        for h in range(w.space.radices[lam]):
            assert w.xi(lam, h) == xi_by_formula(w.space, lam, h)


def test_xi_hand_values():
    chain = make_wreath(make_chain(2), "Z2")
    s = chain.space
    g = chain.xi(0, 1)
    assert g(s.encode((0, 1))) == s.encode((0, 1))
    assert g(s.encode((0, 0))) == s.encode((1, 0))
    anti = make_wreath(make_antichain(2), "Z2")
    flip = anti.xi(0, 1)
    for i in range(anti.space.total):
        x = anti.space.decode(i)
        assert anti.space.decode(flip(i)) == (1 - x[0], x[1])


def test_xi_identity_and_bad_index():
    w = make_wreath(make_chain(2), "S3")
    assert w.xi(1, 0).is_identity() and w.xi(0, 0).is_identity()
    with pytest.raises(ValidationError):
        xi(w.space, 0, 6)
    with pytest.raises(ValidationError):
        xi(w.space, 2, 1)


@pytest.mark.parametrize("poset", [make_chain(2), make_antichain(2), make_chain(3)])
def test_homomorphism_locality_freezing(poset):
    w = make_wreath(poset, "S3")
    coords = w.space.coords
    for lam in range(poset.n):
        f = w.space.factors[lam]
        frozen = w.space.frozen(lam)
        for h in range(f.size):
            g = w.xi(lam, h)
            moved = coords[g.images]
            others = np.delete(np.arange(poset.n), lam)
            assert np.array_equal(moved[:, others], coords[:, others])
            assert np.array_equal(moved[frozen, lam], coords[frozen, lam])
            for k in range(f.size):
                assert compose(g, w.xi(lam, k)) == w.xi(lam, int(f.mul[h, k]))


@pytest.mark.parametrize(
    "poset,name,expected",
    [
        (make_antichain(2), "Z2", 4),
        (make_chain(2), "Z2", 8),
        (make_chain(3), "Z2", 128),
        (make_antichain(3), "Z2", 8),
        (make_chain(2), "Z3", 3**3 * 3),
        (Poset([[1, 1, 1], [0, 1, 0], [0, 0, 1]]), "Z2", None),
    ],
)
def test_orders_match_closure_enumeration(poset, name, expected):
    w = make_wreath(poset, name)
    enumerated = len(closure_enumerate(w.generators(), w.degree, limit=10**6))
    assert w.order() == enumerated
    if expected is not None:
        assert enumerated == expected


def test_chain2_z2_is_nonabelian():
    w = make_wreath(make_chain(2), "Z2")
    a, b = w.xi(0, 1), w.xi(1, 1)
    assert compose(a, b) != compose(b, a)


def test_iterated_wreath_order_on_three_chain():
    # (Z2 wr Z2) wr Z2 acting on 8 points: |Z2 wr Z2|^2 * 2 = 128, the association
    # with the bottom factor innermost; the other association gives 2^4 * 8 = 128 too,
    # so the closure count is recorded rather than a formula asserted.
    w = make_wreath(make_chain(3), "Z2")
    assert len(closure_enumerate(w.generators(), 8)) == 128


def test_h_gamma_basics():
    w = make_wreath(make_chain(2), "Z2")
    assert build_group(subgroup_h_gamma(w, []), w.degree).order() == 1
    assert build_group(subgroup_h_gamma(w, [0, 1]), w.degree).order() == 8
    with pytest.raises(ValidationError):
        subgroup_h_gamma(w, [5])


def test_h_gamma_bottom_is_not_normal(chain2_a5):
    w = chain2_a5
    h = build_group(subgroup_h_gamma(w, [0]), w.degree)
    assert h.order() == 60
    ok, witness = is_normalized_by(h, w.generators())
    assert not ok and witness is not None


def test_classes_mod_gamma():
    w = make_wreath(make_chain(2), "Z2")
    assert classes_mod_gamma(w.space, []).count == 4
    assert classes_mod_gamma(w.space, [0, 1]).count == 1
    part = classes_mod_gamma(w.space, [0])
    assert part.count == 2 and all(len(m) == 2 for m in part.members())
    assert part.representatives.tolist() == [min(m) for m in part.members()]
    with pytest.raises(ValidationError):
        classes_mod_gamma(w.space, [1])


def test_quotient_action_trivial_cases():
    w = make_wreath(make_chain(2), "S3")
    g = compose(w.xi(0, 1), w.xi(1, 2))
    assert quotient_action(w, g, []) == g
    assert quotient_action(w, g, [0, 1]).is_identity()


def test_quotient_action_top_generator_is_translation(chain2_a5):
    w = chain2_a5
    a5 = w.space.factors[1]
    part = classes_mod_gamma(w.space, [0])
    top = w.space.coords[part.representatives, 1]
    for h in (1, 17, 59):
        induced = quotient_action(w, w.xi(1, h), [0], part)
        assert np.array_equal(top[induced.images], a5.mul[h, top])


def test_downward_closure_necessity_on_small_posets():
    # every non-downward-closed subset of every labelled poset with at most
    # four elements has a generator that splits some class
    z2 = builtin_group("Z2")
    never = []
    checked = 0
    for n in range(1, 5):
        for p in all_posets(n):
            w = WreathGroup(config_space(p, [z2] * n))
            for r in range(n + 1):
                for s in itertools.combinations(range(n), r):
                    if is_down_closed(p, s):
                        continue
                    checked += 1
                    violated = False
                    for g in w.generators():
                        try:
                            quotient_action(w, g, s)
                        except WellDefinednessViolation:
                            violated = True
                            break
                    if not violated:
                        never.append((p.leq.tolist(), s))
    assert checked == 1882
    assert never == []


def test_membership_examples():
    w = make_wreath(make_chain(3), "Z2")
    for gamma in ([], [0], [0, 1], [0, 1, 2]):
        assert d_gamma_membership(w, Permutation.identity(w.degree), gamma)
    assert d_gamma_membership(w, w.xi(1, 1), [0, 1])
    assert not d_gamma_membership(w, w.xi(2, 1), [0, 1])


def test_d_gamma_extremes():
    w = make_wreath(make_chain(2), "S3")
    assert d_gamma_group(w, []).order() == 1
    assert d_gamma_group(w, [0, 1]).order() == w.order()
    with pytest.raises(ValidationError):
        d_gamma_group(w, [1])


@pytest.mark.parametrize("poset", [make_chain(2), make_antichain(2), make_chain(3), make_antichain(3)])
@pytest.mark.parametrize("name", ["Z2", "S3"])
def test_d_gamma_is_normal_and_fixes_outside(poset, name):
    w = make_wreath(poset, name)
    for ds in downsets(poset):
        d = d_gamma_group(w, ds)
        assert is_normalized_by(d, w.generators())[0]
        assert all(d_gamma_membership(w, g, ds.members) for g in d.gens)


def test_d_gamma_against_conjugate_enumeration():
    w = make_wreath(make_chain(2), "Z2")
    everything = [Permutation(np.frombuffer(b, dtype=np.int32)) for b in closure_enumerate(w.generators(), w.degree)]
    seeds = subgroup_h_gamma(w, [0])
    conj = [conjugate(s, a) for s in seeds for a in everything]
    assert d_gamma_group(w, [0]).order() == len(closure_enumerate(conj, w.degree)) == 4


@pytest.mark.parametrize(
    "poset,name",
    [(make_chain(3), "Z2"), (make_antichain(2), "Z3"), (make_chain(2), "Z3"), (Poset([[1, 1, 1], [0, 1, 0], [0, 0, 1]]), "Z2")],
)
def test_kernel_element_scan(poset, name):
    w = make_wreath(poset, name)
    for ds in downsets(poset):
        check = verify_kernel(w, ds)
        assert check.method == "element-scan" and check.verified


def test_kernel_formula():
    w = make_wreath(make_chain(2), "S3")
    assert kernel_order_formula(w.space, [0]) == 6**6
    assert kernel_order_formula(w.space, [0, 1]) == 6**7
    assert kernel_order_formula(make_wreath(make_chain(3), "Z2").space, [0]) is None


def test_chain2_a5_order_and_bottom_kernel(chain2_a5):
    assert chain2_a5.order() == 60**61
    d = d_gamma_group(chain2_a5, [0])
    assert d.order() == 60**60
    check = verify_kernel(chain2_a5, [0])
    assert check.method == "order-formula" and check.verified


def test_antichain_a5_order(antichain2_a5):
    assert antichain2_a5.order() == 3600


@pytest.mark.parametrize("poset", [make_chain(2), make_chain(3), make_antichain(3)])
def test_quotient_iso_all_downsets(poset):
    w = make_wreath(poset, "Z2")
    for ds in downsets(poset):
        check = quotient_iso_check(w, ds)
        assert check.ok, check.mismatch
    assert quotient_iso_check(w, []).relabeling == list(range(w.degree))


def test_quotient_iso_chain2_a5(chain2_a5):
    for gamma in ([], [0], [0, 1]):
        assert quotient_iso_check(chain2_a5, gamma).ok


def test_normal_subgroups_are_kernels_simple_factors(antichain2_a5):
    report = classify_normal_subgroups_small(antichain2_a5)
    assert report.normal_subgroup_count == 4
    assert len(report.matched) == 4 and not report.unmatched and not report.collisions


def test_normal_subgroups_abelian_factors_unmatched():
    report = classify_normal_subgroups_small(make_wreath(make_chain(2), "Z2"))
    assert report.normal_subgroup_count == 6
    assert len(report.unmatched) == 3 and len(report.matched) == 3


def test_chain1_a5_normal_subgroups():
    report = classify_normal_subgroups_small(make_wreath(make_chain(1), "A5"))
    assert report.normal_subgroup_count == 2 and len(report.matched) == 2


def test_classification_guard(chain2_a5):
    with pytest.raises(CapExceeded):
        classify_normal_subgroups_small(chain2_a5)


def test_threads_do_not_change_generators():
    a = make_wreath(make_chain(2), "S3")
    b = WreathGroup(config_space(make_chain(2), [builtin_group("S3")] * 2), threads=4)
    assert a.generators() == b.generators()
    assert a.order() == b.order() == math.prod([6**6, 6])


@pytest.mark.parametrize("n", [2, 3])
def test_upset_action_is_faithful(n):
    # on every labelled poset with more than one minimal element, the smaller
    # action is an injective homomorphism of the full element list
    for p in all_posets(n):
        w = make_wreath(p, "Z2")
        if w.upset_degree >= w.degree:
            continue
        elements = w.handle.elements()
        images = [w.upset_image(g) for g in elements]
        assert all(Permutation(im.images).degree == w.upset_degree for im in images)
        assert len(set(images)) == len(elements)
        for a, b in itertools.islice(itertools.product(range(len(elements)), repeat=2), 2000):
            assert w.upset_image(compose(elements[a], elements[b])) == compose(images[a], images[b])
        assert w.order_handle.order() == w.handle.order()


def test_upset_action_keeps_chain_degree():
    w = make_wreath(make_chain(2), "Z2")
    assert w.upset_degree == w.degree and w.order_handle is w.handle


def test_antichain3_a5_order_via_upset_action():
    w = make_wreath(make_antichain(3), "A5")
    assert w.upset_degree == 180
    assert w.order() == 60**3


@pytest.mark.parametrize(
    "poset,names",
    [
        (make_chain(2), ("S3",)),
        (make_chain(2), ("D4", "S3")),
        (make_chain(3), ("S3",)),
        (make_chain(3), ("Z2", "Z3", "V4")),
        (Poset([[1, 1, 1], [0, 1, 0], [0, 0, 1]]), ("S3",)),
        (Poset([[1, 0, 1], [0, 1, 1], [0, 0, 1]]), ("Z3", "Z2", "S3")),
    ],
)
def test_orders_against_sympy(poset, names):
    # an independent Schreier-Sims implementation, for orders beyond enumeration
    combinatorics = pytest.importorskip("sympy.combinatorics")
    w = make_wreath(poset, *names)
    gens = [combinatorics.Permutation(g.images.tolist()) for g in w.generators()]
    assert w.order() == w.handle.order() == combinatorics.PermutationGroup(gens).order()
