"""Tests for finite groups: permutation words, Cayley tables, subgroups,
double cosets, and exact-factorization predicates.

Expected values are frozen up front.  Where a value is not forced by a
definition it is cross-checked against an independent brute-force oracle
computed inside the test (set enumeration, commutator closure,
inversion-count parity), never against the module under test.
"""

import random
from functools import lru_cache

import pytest

from gkac.groups import (
    FiniteGroup,
    Subgroup,
    abelian_invariants,
    compose_perms,
    conjugate_subgroup,
    cycle_notation,
    cycle_type,
    cyclic_group,
    double_cosets,
    group_from_descriptor,
    group_to_descriptor,
    identity_perm,
    inverse_perm,
    is_exact_group_factorization,
    parse_perm_word,
    subgroup_cycle_types,
    subgroup_from_descriptor,
    subgroup_generated,
    subgroup_to_descriptor,
    symmetric_group,
    trivially_intersects_all_conjugates,
)
from gkac.intlinalg import FinAbGroup, InvalidInput, ResourceBound

KLEIN_TABLE = [[0, 1, 2, 3], [1, 0, 3, 2], [2, 3, 0, 1], [3, 2, 1, 0]]


@lru_cache(maxsize=None)
def _sym(n):
    return symmetric_group(n)


# ---------------------------------------------------------------------------
# brute-force oracles (independent of the module under test)
# ---------------------------------------------------------------------------

def oracle_closure(g, seed):
    """Subgroup generated by `seed`, by plain breadth-first multiplication."""
    elems = {g.identity}
    frontier = [g.identity]
    gens = list(seed)
    while frontier:
        new = []
        for x in frontier:
            for s in gens:
                y = g.mul(x, s)
                if y not in elems:
                    elems.add(y)
                    new.append(y)
        frontier = new
    return elems


def oracle_double_cosets(g, v_elems, h_elems):
    """Set of V\\D/H classes, each a frozenset, by direct enumeration."""
    classes = set()
    seen = set()
    for x in range(g.order):
        if x in seen:
            continue
        cls = frozenset(g.mul(g.mul(a, x), b) for a in v_elems for b in h_elems)
        seen |= cls
        classes.add(cls)
    return classes


def oracle_parity(p):
    """Permutation parity by inversion count (0 = even, 1 = odd)."""
    inv = 0
    for i in range(len(p)):
        for j in range(i + 1, len(p)):
            if p[i] > p[j]:
                inv += 1
    return inv % 2


# ---------------------------------------------------------------------------
# permutation words
# ---------------------------------------------------------------------------

def test_parse_perm_word_basic():
    assert parse_perm_word("(1 2 3 4)", 4) == (1, 2, 3, 0)
    assert parse_perm_word("(1 2)(3 4)", 4) == (1, 0, 3, 2)
    assert parse_perm_word("(2 4)(1 3)", 4) == (2, 3, 0, 1)
    assert parse_perm_word("()", 3) == (0, 1, 2)
    assert parse_perm_word("", 3) == (0, 1, 2)
    # fixed points may be omitted
    assert parse_perm_word("(1 2)", 4) == (1, 0, 2, 3)


def test_parse_perm_word_rejects_bad_input():
    with pytest.raises(InvalidInput):
        parse_perm_word("(1 2 5)", 4)  # point out of range
    with pytest.raises(InvalidInput):
        parse_perm_word("(1 2 1)", 4)  # repeated point in one cycle
    with pytest.raises(InvalidInput):
        parse_perm_word("(0 1)", 4)  # points are 1-based
    with pytest.raises(InvalidInput):
        parse_perm_word("1 2 3", 4)  # missing parentheses


def test_composition_order_is_left_to_right():
    # Permutations act on the right of points: under sigma*tau a point
    # moves through sigma first, then tau.
    sigma = parse_perm_word("(1 2)", 3)
    tau = parse_perm_word("(2 3)", 3)
    assert compose_perms(sigma, tau) == parse_perm_word("(1 3 2)", 3)
    assert compose_perms(tau, sigma) == parse_perm_word("(1 2 3)", 3)
    # point 1 (index 0): sigma sends it to 2, then tau sends 2 to 3
    assert compose_perms(sigma, tau)[0] == 2


def test_inverse_perm_and_identity():
    p = parse_perm_word("(1 2 3 4)", 4)
    q = inverse_perm(p)
    assert compose_perms(p, q) == identity_perm(4)
    assert compose_perms(q, p) == identity_perm(4)
    assert inverse_perm(identity_perm(5)) == identity_perm(5)


def test_cycle_notation_roundtrip_all_of_s4():
    s4 = _sym(4)
    for p in s4.labels:
        assert parse_perm_word(cycle_notation(p), 4) == p
    assert cycle_notation(identity_perm(4)) == "()"
    assert cycle_notation(parse_perm_word("(2 4)(1 3)", 4)) == "(1 3)(2 4)"


def test_cycle_type():
    assert cycle_type(parse_perm_word("(1 2)(3 4)", 5)) == (2, 2, 1)
    assert cycle_type(parse_perm_word("(1 2 3 4)", 4)) == (4,)
    assert cycle_type(identity_perm(3)) == (1, 1, 1)
    assert cycle_type(parse_perm_word("(1 2)", 6)) == (2, 1, 1, 1, 1)
    assert cycle_type(parse_perm_word("(1 2)(3 4)(5 6)", 6)) == (2, 2, 2)


# ---------------------------------------------------------------------------
# group constructors
# ---------------------------------------------------------------------------

def test_symmetric_group_small():
    s3 = _sym(3)
    assert s3.order == 6
    e = s3.identity
    # identity and inverse laws on every element, associativity on all triples
    for a in range(6):
        assert s3.mul(e, a) == a
        assert s3.mul(a, e) == a
        assert s3.mul(a, s3.inv(a)) == e
        assert s3.mul(s3.inv(a), a) == e
    for a in range(6):
        for b in range(6):
            for c in range(6):
                assert s3.mul(s3.mul(a, b), c) == s3.mul(a, s3.mul(b, c))
    # the table realizes composition of the permutation labels
    for a in range(6):
        for b in range(6):
            assert s3.labels[s3.mul(a, b)] == compose_perms(s3.labels[a], s3.labels[b])


def test_cyclic_group():
    c12 = cyclic_group(12)
    assert c12.order == 12
    assert c12.identity == 0
    for a in range(12):
        for b in range(12):
            assert c12.mul(a, b) == (a + b) % 12
    assert c12.element_order(1) == 12
    assert c12.element_order(6) == 2
    assert c12.element_order(4) == 3
    assert c12.element_order(0) == 1


def test_element_order_in_s4():
    s4 = _sym(4)
    assert s4.element_order(s4.index_of_word("(1 2 3 4)")) == 4
    assert s4.element_order(s4.index_of_word("(1 2)(3 4)")) == 2
    assert s4.element_order(s4.index_of_word("(1 2 3)")) == 3
    assert s4.element_order(s4.identity) == 1


def test_order_bound_rejections():
    with pytest.raises(ResourceBound):
        symmetric_group(8)  # 40320 > 5040
    with pytest.raises(ResourceBound):
        cyclic_group(5041)
    with pytest.raises(ResourceBound):
        cyclic_group(10, bound=9)
    assert cyclic_group(10, bound=10).order == 10


def test_from_table_klein_group():
    k = FiniteGroup.from_table(KLEIN_TABLE)
    assert k.order == 4
    assert k.identity == 0
    assert all(k.element_order(a) in (1, 2) for a in range(4))


def test_from_table_rejects_non_group():
    # latin square of order 5 with an identity that is not associative
    loop = [
        [0, 1, 2, 3, 4],
        [1, 0, 3, 4, 2],
        [2, 3, 4, 0, 1],
        [3, 4, 1, 2, 0],
        [4, 2, 0, 1, 3],
    ]
    with pytest.raises(InvalidInput):
        FiniteGroup.from_table(loop)
    with pytest.raises(InvalidInput):
        FiniteGroup.from_table([[0, 0], [0, 0]])  # no identity
    with pytest.raises(InvalidInput):
        FiniteGroup.from_table([[0, 1], [1, 2]])  # entry out of range


# ---------------------------------------------------------------------------
# subgroups
# ---------------------------------------------------------------------------

def test_subgroup_generated_order_four_cyclic():
    s4 = _sym(4)
    h = subgroup_generated(s4, [s4.index_of_word("(1 2 3 4)")])
    assert h.order == 4
    assert set(h.elements) == oracle_closure(s4, [s4.index_of_word("(1 2 3 4)")])
    assert abelian_invariants(h) == FinAbGroup(0, [4])


def test_subgroup_generated_order_four_exponent_two():
    s4 = _sym(4)
    gens = [s4.index_of_word("(2 4)(1 3)"), s4.index_of_word("(3 4)(1 2)")]
    hp = subgroup_generated(s4, gens)
    assert hp.order == 4
    assert all(s4.element_order(a) in (1, 2) for a in hp.elements)
    assert abelian_invariants(hp) == FinAbGroup(0, [2, 2])
    # the two order-4 subgroups are genuinely different abelian groups
    assert abelian_invariants(hp) != FinAbGroup(0, [4])


def test_stabilizer_copy_of_s3_inside_s4():
    s4 = _sym(4)
    v = subgroup_generated(s4, [s4.index_of_word("(1 2)"), s4.index_of_word("(1 2 3)")])
    assert v.order == 6
    # every element fixes the point 4 (index 3)
    assert all(s4.labels[a][3] == 3 for a in v.elements)


def test_subgroup_validation():
    s4 = _sym(4)
    with pytest.raises(InvalidInput):
        Subgroup(s4, [s4.identity, s4.index_of_word("(1 2 3 4)")])  # not closed
    with pytest.raises(InvalidInput):
        Subgroup(s4, [s4.index_of_word("(1 2)")])  # missing identity
    # a valid subgroup passes and sorts its elements
    v = Subgroup(s4, reversed(subgroup_generated(s4, [s4.index_of_word("(1 2)")]).elements))
    assert list(v.elements) == sorted(v.elements)


def test_subgroup_as_group():
    s4 = _sym(4)
    h = subgroup_generated(s4, [s4.index_of_word("(1 2 3 4)")])
    g = h.as_group()
    assert g.order == 4
    assert abelian_invariants(g) == FinAbGroup(0, [4])
    # multiplication agrees with the parent's through the element list
    for i in range(4):
        for j in range(4):
            assert h.elements[g.mul(i, j)] == s4.mul(h.elements[i], h.elements[j])


def test_alternating_subgroup_of_s6():
    s6 = _sym(6)
    gens = [s6.index_of_word("(1 2 3)"), s6.index_of_word("(2 3 4 5 6)")]
    a6 = subgroup_generated(s6, gens)
    assert a6.order == 360
    evens = {i for i, lab in enumerate(s6.labels) if oracle_parity(lab) == 0}
    assert set(a6.elements) == evens


# ---------------------------------------------------------------------------
# double cosets
# ---------------------------------------------------------------------------

def test_double_cosets_whole_group_single_class():
    s3 = _sym(3)
    whole = Subgroup(s3, range(6))
    classes = double_cosets(whole, whole)
    assert len(classes) == 1
    rep, members = classes[0]
    assert rep == s3.identity
    assert members == tuple(range(6))


def test_double_cosets_in_z12():
    c12 = cyclic_group(12)
    v = subgroup_generated(c12, [6])  # order 2
    h = subgroup_generated(c12, [4])  # order 3
    classes = double_cosets(v, h)
    assert len(classes) == 2
    # V + g + H for even g is the evens, for odd g the odds
    assert classes[0] == (0, (0, 2, 4, 6, 8, 10))
    assert classes[1] == (1, (1, 3, 5, 7, 9, 11))
    assert {frozenset(m) for _, m in classes} == oracle_double_cosets(
        c12, v.elements, h.elements
    )


def test_double_cosets_s4_single_class():
    s4 = _sym(4)
    v = subgroup_generated(s4, [s4.index_of_word("(1 2)"), s4.index_of_word("(1 2 3)")])
    h = subgroup_generated(s4, [s4.index_of_word("(1 2 3 4)")])
    classes = double_cosets(v, h)
    assert len(classes) == 1
    assert classes[0][0] == s4.identity
    assert len(classes[0][1]) == 24


def test_double_cosets_coprime_pair_in_s4():
    s4 = _sym(4)
    v = subgroup_generated(s4, [s4.index_of_word("(1 2 3 4)")])  # order 4
    h = subgroup_generated(s4, [s4.index_of_word("(1 2 3)")])  # order 3
    classes = double_cosets(v, h)
    assert len(classes) == 2
    assert {frozenset(m) for _, m in classes} == oracle_double_cosets(
        s4, v.elements, h.elements
    )
    # coprime orders force trivial intersections with every conjugate
    assert trivially_intersects_all_conjugates(v, h)


def test_double_cosets_identity_class_representative_rule():
    # relabeled Z/4 whose identity sits at index 2: the identity's class
    # keeps the identity as representative even when it is not minimal
    val = [1, 2, 0, 3]
    idx = {w: i for i, w in enumerate(val)}
    table = [[idx[(val[i] + val[j]) % 4] for j in range(4)] for i in range(4)]
    g = FiniteGroup.from_table(table)
    assert g.identity == 2
    v = Subgroup(g, sorted([idx[0], idx[2]]))  # {0, 2} as values
    h = Subgroup(g, [g.identity])
    classes = double_cosets(v, h)
    assert classes == [(0, (0, 3)), (2, (1, 2))]
    assert {frozenset(m) for _, m in classes} == oracle_double_cosets(
        g, v.elements, h.elements
    )


def test_double_cosets_random_against_oracle():
    rng = random.Random(20260816)
    pool = [_sym(4), cyclic_group(12), _sym(3)]
    for _ in range(20):
        g = rng.choice(pool)
        v = subgroup_generated(g, rng.sample(range(g.order), rng.randint(1, 2)))
        h = subgroup_generated(g, rng.sample(range(g.order), rng.randint(1, 2)))
        classes = double_cosets(v, h)
        assert {frozenset(m) for _, m in classes} == oracle_double_cosets(
            g, v.elements, h.elements
        )
        # representatives: identity for the identity's class, else minimum
        for rep, members in classes:
            if g.identity in members:
                assert rep == g.identity
            else:
                assert rep == members[0]
        # classes partition the group
        all_members = [x for _, m in classes for x in m]
        assert sorted(all_members) == list(range(g.order))


def test_double_cosets_rejects_mismatched_parents():
    s3 = _sym(3)
    s4 = _sym(4)
    v = Subgroup(s3, range(6))
    h = Subgroup(s4, [s4.identity])
    with pytest.raises(InvalidInput):
        double_cosets(v, h)


# ---------------------------------------------------------------------------
# factorization predicates
# ---------------------------------------------------------------------------

def _s4_standard_pair():
    s4 = _sym(4)
    v = subgroup_generated(s4, [s4.index_of_word("(1 2)"), s4.index_of_word("(1 2 3)")])
    h = subgroup_generated(s4, [s4.index_of_word("(1 2 3 4)")])
    return s4, v, h


def test_trivially_intersects_trivial_h():
    s4 = _sym(4)
    v = subgroup_generated(s4, [s4.index_of_word("(1 2 3)")])
    h = Subgroup(s4, [s4.identity])
    assert trivially_intersects_all_conjugates(v, h)


def test_trivially_intersects_s4_pair():
    s4, v, h = _s4_standard_pair()
    assert trivially_intersects_all_conjugates(v, h)
    # direct oracle: V meets every conjugate of H only at the identity
    for g in range(24):
        conj = {s4.mul(s4.mul(g, x), s4.inv(g)) for x in h.elements}
        assert set(v.elements) & conj == {s4.identity}


def test_trivially_intersects_fails_for_shared_transposition():
    s4, v, _ = _s4_standard_pair()
    h = subgroup_generated(s4, [s4.index_of_word("(1 2)")])
    assert not trivially_intersects_all_conjugates(v, h)


def test_exact_factorization_s4():
    s4, v, h = _s4_standard_pair()
    assert is_exact_group_factorization(s4, v, h)
    # product-count oracle: the 24 products v*h are pairwise distinct
    products = {s4.mul(a, b) for a in v.elements for b in h.elements}
    assert len(products) == 24
    # swapped roles (cyclic factor times a point stabilizer)
    assert is_exact_group_factorization(s4, h, v)


def test_exact_factorization_fails_on_order_count():
    s4, v, _ = _s4_standard_pair()
    h = subgroup_generated(s4, [s4.index_of_word("(1 2)")])
    assert not is_exact_group_factorization(s4, v, h)


def test_exact_factorization_fails_on_intersection():
    s4 = _sym(4)
    # |V| * |H| = 24, but the double transposition sits in both factors
    v = subgroup_generated(s4, [s4.index_of_word("(1 2)(3 4)")])
    a4 = subgroup_generated(
        s4, [s4.index_of_word("(1 2 3)"), s4.index_of_word("(1 2)(3 4)")]
    )
    assert a4.order == 12
    assert v.order * a4.order == 24
    products = {s4.mul(a, b) for a in v.elements for b in a4.elements}
    assert len(products) < 24  # oracle: decomposition not unique
    assert not is_exact_group_factorization(s4, v, a4)


def test_conjugation_preserves_exactness():
    s4, v, h = _s4_standard_pair()
    for g in range(24):
        hg = conjugate_subgroup(h, g)
        assert is_exact_group_factorization(s4, v, hg)
    # and the klein-type exact factor conjugates too
    hp = subgroup_generated(
        s4, [s4.index_of_word("(2 4)(1 3)"), s4.index_of_word("(3 4)(1 2)")]
    )
    assert is_exact_group_factorization(s4, v, hp)
    for g in range(24):
        assert is_exact_group_factorization(s4, v, conjugate_subgroup(hp, g))


def test_index_identity_on_trivially_intersecting_pairs():
    # #classes * |V| * |H| = |D| whenever V meets all conjugates trivially
    s4, v, h = _s4_standard_pair()
    cases = [
        (s4, v, h),
        (cyclic_group(12), None, None),
        (s4, subgroup_generated(s4, [s4.index_of_word("(1 2 3 4)")]),
         subgroup_generated(s4, [s4.index_of_word("(1 2 3)")])),
    ]
    c12 = cases[1][0]
    cases[1] = (c12, subgroup_generated(c12, [6]), subgroup_generated(c12, [4]))
    for d, vv, hh in cases:
        assert trivially_intersects_all_conjugates(vv, hh)
        n_classes = len(double_cosets(vv, hh))
        assert n_classes * vv.order * hh.order == d.order


def test_s6_twin_exact_factors():
    s6 = _sym(6)
    a6 = subgroup_generated(
        s6, [s6.index_of_word("(1 2 3)"), s6.index_of_word("(2 3 4 5 6)")]
    )
    h1 = subgroup_generated(s6, [s6.index_of_word("(1 2)")])
    h2 = subgroup_generated(s6, [s6.index_of_word("(1 2)(3 4)(5 6)")])
    assert is_exact_group_factorization(s6, a6, h1)
    assert is_exact_group_factorization(s6, a6, h2)
    # both factors are order 2, hence isomorphic as groups
    assert abelian_invariants(h1) == abelian_invariants(h2) == FinAbGroup(0, [2])
    # but neither is conjugate to the other: cycle types separate them
    assert subgroup_cycle_types(h1) == ((2, 1, 1, 1, 1),)
    assert subgroup_cycle_types(h2) == ((2, 2, 2),)
    assert subgroup_cycle_types(h1) != subgroup_cycle_types(h2)
    # brute-force confirmation: no conjugate of h1 equals h2
    x = h1.elements[-1] if h1.elements[-1] != s6.identity else h1.elements[0]
    y = h2.elements[-1] if h2.elements[-1] != s6.identity else h2.elements[0]
    assert all(s6.mul(s6.mul(g, x), s6.inv(g)) != y for g in range(720))


# ---------------------------------------------------------------------------
# abelian invariants
# ---------------------------------------------------------------------------

def test_abelian_invariants_of_s4_is_sign_quotient():
    s4 = _sym(4)
    inv = abelian_invariants(s4)
    assert inv == FinAbGroup(0, [2])
    # oracle: the commutator closure has index 2
    comms = {
        s4.mul(s4.mul(a, b), s4.inv(s4.mul(b, a)))
        for a in range(24)
        for b in range(24)
    }
    derived = oracle_closure(s4, comms)
    assert s4.order // len(derived) == 2


def test_abelian_invariants_basics():
    assert abelian_invariants(cyclic_group(12)) == FinAbGroup(0, [12])
    assert abelian_invariants(FiniteGroup.from_table(KLEIN_TABLE)) == FinAbGroup(0, [2, 2])
    s4 = _sym(4)
    assert abelian_invariants(Subgroup(s4, [s4.identity])) == FinAbGroup(0, [])
    s3 = _sym(3)
    assert abelian_invariants(s3) == FinAbGroup(0, [2])


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

def test_group_descriptor_roundtrip():
    for g in (_sym(4), cyclic_group(12), FiniteGroup.from_table(KLEIN_TABLE)):
        desc = group_to_descriptor(g)
        assert desc["kind"] in ("symmetric", "cyclic", "table")
        g2 = group_from_descriptor(desc)
        assert g2.order == g.order
        assert g2.cayley == g.cayley
    assert group_to_descriptor(_sym(4)) == {"kind": "symmetric", "n": 4}
    assert group_to_descriptor(cyclic_group(12)) == {"kind": "cyclic", "n": 12}


def test_subgroup_descriptor_words():
    s4 = _sym(4)
    h = subgroup_from_descriptor(s4, ["(1 2 3 4)"])
    assert h == subgroup_generated(s4, [s4.index_of_word("(1 2 3 4)")])
    desc = subgroup_to_descriptor(h)
    assert h == subgroup_from_descriptor(s4, desc)
    # integer entries are element indices (residues for cyclic groups)
    c12 = cyclic_group(12)
    v = subgroup_from_descriptor(c12, [6])
    assert v.elements == (0, 6)


def test_group_invalid_descriptor():
    with pytest.raises(InvalidInput):
        group_from_descriptor({"kind": "sporadic"})
