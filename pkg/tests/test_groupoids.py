"""Tests for finite groupoids: connected models over a group, wide
subgroupoids, skeletons, similarity of functors, and module bundles.

Frozen counts come first (arrow counts are forced by |D|*|P|^2 and by
(#class)^2*|H_U|); structural laws are checked exhaustively on small
instances.
"""

import pytest

from gkac.groupoids import (
    FiniteGroupoid,
    GroupoidMorphism,
    ModuleBundle,
    connected_components,
    connected_model,
    groupoid_from_descriptor,
    groupoid_to_descriptor,
    identity_morphism,
    is_similar,
    skeleton,
    trivial_bundle,
    vertex_group,
    wide_subgroupoid,
)
from gkac.groups import cyclic_group, subgroup_generated, symmetric_group
from gkac.intlinalg import FinAbGroup, InvalidInput, InvariantViolation
from gkac.groups import abelian_invariants


def discrete_groupoid(objs):
    arrows = [(p, p, "e") for p in objs]
    return FiniteGroupoid(objs, arrows, lambda a, b: "e", lambda p: "e")


@pytest.fixture(scope="module")
def z12_model():
    return connected_model(cyclic_group(12), [0, 1], 0)


# ---------------------------------------------------------------------------
# basic structure
# ---------------------------------------------------------------------------

def test_discrete_groupoid_components_and_vertices():
    g = discrete_groupoid([0, 1, 2])
    g.check()
    assert connected_components(g) == [(0,), (1,), (2,)]
    for p in (0, 1, 2):
        assert vertex_group(g, p).order == 1


def test_connected_model_counts(z12_model):
    g = z12_model
    assert len(g.objects) == 2
    assert g.n_arrows == 48  # |D| * |P|^2
    assert connected_components(g) == [(0, 1)]
    g.check()


def test_connected_model_vertex_group(z12_model):
    vg = vertex_group(z12_model, 0)
    assert vg.order == 12
    assert abelian_invariants(vg) == FinAbGroup(0, [12])
    vg1 = vertex_group(z12_model, 1)
    assert vg1.order == 12


def test_connected_model_trivial_group_is_coarse():
    g = connected_model(cyclic_group(1), [0, 1, 2], 0)
    assert g.n_arrows == 9  # one arrow per ordered pair of objects
    g.check()
    assert connected_components(g) == [(0, 1, 2)]
    assert vertex_group(g, 2).order == 1


def test_connected_model_s3_vertex_groups():
    g = connected_model(symmetric_group(3), [0, 1], 0)
    assert g.n_arrows == 6 * 4
    for p in (0, 1):
        vg = vertex_group(g, p)
        assert vg.order == 6
        assert abelian_invariants(vg) == FinAbGroup(0, [2])
    g.check()


def test_groupoid_laws_via_compose(z12_model):
    g = z12_model
    # composition is defined exactly when target matches source
    a = g.hom(0, 1)[0]
    b = g.hom(1, 0)[0]
    c = g.compose(a, b)
    assert g.src[c] == 0 and g.tgt[c] == 0
    with pytest.raises(InvalidInput):
        g.compose(a, a)  # target 1 != source 0
    # inverse law on every arrow
    for i in range(g.n_arrows):
        j = g.inverse[i]
        assert g.compose(i, j) == g.identity_of[g.src[i]]
        assert g.compose(j, i) == g.identity_of[g.tgt[i]]


def test_explicit_groupoid_without_inverses_is_rejected():
    # one object, payloads {e, a} with a*a = a: no inverse for a
    table = {("e", "e"): "e", ("e", "a"): "a", ("a", "e"): "a", ("a", "a"): "a"}
    with pytest.raises(InvalidInput):
        FiniteGroupoid(
            [0],
            [(0, 0, "e"), (0, 0, "a")],
            lambda x, y: table[x, y],
            lambda p: "e",
        )


def test_check_catches_broken_associativity():
    # latin-compatible relabeling of Z/3 with one product redirected
    table = {
        ("e", "e"): "e", ("e", "a"): "a", ("e", "b"): "b",
        ("a", "e"): "a", ("a", "a"): "b", ("a", "b"): "e",
        ("b", "e"): "b", ("b", "a"): "e", ("b", "b"): "b",  # should be "a"
    }
    g = FiniteGroupoid(
        [0],
        [(0, 0, "e"), (0, 0, "a"), (0, 0, "b")],
        lambda x, y: table[x, y],
        lambda p: "e",
    )
    with pytest.raises((InvalidInput, InvariantViolation)):
        g.check()


# ---------------------------------------------------------------------------
# wide subgroupoids
# ---------------------------------------------------------------------------

def test_wide_subgroupoid_whole_model(z12_model):
    c12 = z12_model.meta["group"]
    whole = subgroup_generated(c12, [1])
    h = wide_subgroupoid(z12_model, [((0, 1), whole, {0: 0, 1: 0})])
    assert h.n_arrows == z12_model.n_arrows
    assert {(h.src[i], h.tgt[i], h.payload[i]) for i in range(h.n_arrows)} == {
        (z12_model.src[i], z12_model.tgt[i], z12_model.payload[i])
        for i in range(z12_model.n_arrows)
    }


def test_wide_subgroupoid_single_class_z3(z12_model):
    c12 = z12_model.meta["group"]
    h_u = subgroup_generated(c12, [4])  # {0, 4, 8}
    h = wide_subgroupoid(z12_model, [((0, 1), h_u, {0: 0, 1: 0})])
    assert h.n_arrows == 12  # (#class)^2 * |H_U| = 4 * 3
    h.check()
    assert connected_components(h) == [(0, 1)]
    vg = vertex_group(h, 0)
    assert vg.order == 3
    assert abelian_invariants(vg) == FinAbGroup(0, [3])
    # wideness: all identities present
    for p in (0, 1):
        assert h.identity_of[p] is not None


def test_wide_subgroupoid_shifted_lambda(z12_model):
    c12 = z12_model.meta["group"]
    h_u = subgroup_generated(c12, [4])
    h = wide_subgroupoid(z12_model, [((0, 1), h_u, {0: 0, 1: 1})])
    assert h.n_arrows == 12
    h.check()
    # arrows 0 -> 1 carry -lambda_0 + a + lambda_1 = a + 1
    payloads = {h.payload[i] for i in h.hom(0, 1)}
    assert payloads == {1, 5, 9}
    # loops at 0 are H_U itself
    assert {h.payload[i] for i in h.hom(0, 0)} == {0, 4, 8}


def test_wide_subgroupoid_rejects_bad_base_lambda(z12_model):
    c12 = z12_model.meta["group"]
    h_u = subgroup_generated(c12, [4])
    with pytest.raises(InvalidInput):
        wide_subgroupoid(z12_model, [((0, 1), h_u, {0: 1, 1: 0})])


def test_wide_subgroupoid_identity_relation(z12_model):
    c12 = z12_model.meta["group"]
    h = wide_subgroupoid(
        z12_model,
        [
            ((0,), subgroup_generated(c12, [4]), {0: 0}),
            ((1,), subgroup_generated(c12, [6]), {1: 0}),
        ],
    )
    assert h.n_arrows == 3 + 2
    assert connected_components(h) == [(0,), (1,)]
    assert vertex_group(h, 0).order == 3
    assert vertex_group(h, 1).order == 2
    h.check()


def test_wide_subgroupoid_rejects_bad_partition(z12_model):
    c12 = z12_model.meta["group"]
    h_u = subgroup_generated(c12, [4])
    with pytest.raises(InvalidInput):
        wide_subgroupoid(z12_model, [((0,), h_u, {0: 0})])  # misses object 1


# ---------------------------------------------------------------------------
# skeleton and similarity
# ---------------------------------------------------------------------------

def test_skeleton_of_connected_model():
    d = symmetric_group(3)
    g = connected_model(d, [0, 1, 2], 0)
    sk = skeleton(g)
    assert tuple(sk.groupoid.objects) == (0,)
    assert vertex_group(sk.groupoid, 0).order == 6
    # exact equations from the skeleton contract
    for k in range(sk.groupoid.n_arrows):
        assert sk.phi.arrow_map[sk.psi.arrow_map[k]] == k
    for i in range(g.n_arrows):
        lhs = g.compose(sk.psi.arrow_map[sk.phi.arrow_map[i]], sk.tau[g.tgt[i]])
        rhs = g.compose(sk.tau[g.src[i]], i)
        assert lhs == rhs
    # tau at the base is the identity arrow
    assert sk.tau[0] == g.identity_of[0]


def test_skeleton_of_coarse_groupoid():
    g = connected_model(cyclic_group(1), [0, 1, 2], 0)
    sk = skeleton(g)
    assert vertex_group(sk.groupoid, 0).order == 1
    assert sk.groupoid.n_arrows == 1


def test_skeleton_of_disconnected_groupoid(z12_model):
    c12 = z12_model.meta["group"]
    h = wide_subgroupoid(
        z12_model,
        [
            ((0,), subgroup_generated(c12, [4]), {0: 0}),
            ((1,), subgroup_generated(c12, [6]), {1: 0}),
        ],
    )
    sk = skeleton(h)
    assert tuple(sk.groupoid.objects) == (0, 1)
    assert vertex_group(sk.groupoid, 0).order == 3
    assert vertex_group(sk.groupoid, 1).order == 2
    assert sk.groupoid.n_arrows == 5


def test_skeleton_one_object_groupoid_is_itself():
    g = connected_model(cyclic_group(4), [7], 7)
    sk = skeleton(g)
    assert sk.groupoid.n_arrows == 4
    assert tuple(sk.groupoid.objects) == (7,)


def test_is_similar_identity_pair(z12_model):
    g = z12_model
    ident = identity_morphism(g)
    tau = is_similar(ident, ident)
    assert tau is not None
    for i in range(g.n_arrows):
        assert g.compose(i, tau[g.tgt[i]]) == g.compose(tau[g.src[i]], i)


def test_is_similar_lemma_pair(z12_model):
    g = z12_model
    sk = skeleton(g)
    round_trip = sk.phi.then(sk.psi)  # apply phi, then the inclusion
    tau = is_similar(round_trip, identity_morphism(g))
    assert tau is not None
    for i in range(g.n_arrows):
        lhs = g.compose(round_trip.arrow_map[i], tau[g.tgt[i]])
        rhs = g.compose(tau[g.src[i]], i)
        assert lhs == rhs


def test_is_similar_none_across_discrete_codomain():
    dom = discrete_groupoid([0])
    cod = discrete_groupoid([0, 1])
    to0 = GroupoidMorphism(dom, cod, [cod.identity_of[0]])
    to1 = GroupoidMorphism(dom, cod, [cod.identity_of[1]])
    assert is_similar(to0, to1) is None
    assert is_similar(to0, to0) is not None


def test_morphism_validation_rejects_non_functor():
    g = connected_model(cyclic_group(3), [0], 0)
    # send the generator loop to the identity but its square to itself
    bad = [0] * g.n_arrows
    x = g.hom(0, 0)[1]
    bad[x] = g.identity_of[0]
    x2 = g.compose(x, x)
    bad[x2] = x2
    bad[g.identity_of[0]] = g.identity_of[0]
    with pytest.raises(InvalidInput):
        GroupoidMorphism(g, g, bad)


# ---------------------------------------------------------------------------
# module bundles
# ---------------------------------------------------------------------------

def test_trivial_bundle_checks(z12_model):
    b = trivial_bundle(z12_model, (6,))
    b.check()
    i = z12_model.hom(0, 1)[3]
    assert b.apply(i, (5,)) == (5,)


def test_sign_action_bundle():
    g = connected_model(cyclic_group(2), [0], 0)
    loops = g.hom(0, 0)
    x = next(i for i in loops if g.payload[i] != g.meta["group"].identity)
    actions = {g.identity_of[0]: ((1,),), x: ((-1,),)}
    b = ModuleBundle(g, {0: (3,)}, actions)
    b.check()
    assert b.apply(x, (1,)) == (2,)  # negation mod 3


def test_bundle_rejects_broken_functoriality():
    g = connected_model(cyclic_group(3), [0], 0)
    ident = g.identity_of[0]
    actions = {}
    for i in g.hom(0, 0):
        actions[i] = ((1,),) if i == ident else ((-1,),)
    # (-1)^3 = -1 != 1 mod 5, so x, x^2 both acting by -1 breaks g*h law
    b = ModuleBundle(g, {0: (5,)}, actions)
    with pytest.raises(InvalidInput):
        b.check()


def test_bundle_rejects_non_identity_at_identity(z12_model):
    moduli = {0: (6,), 1: (6,)}
    actions = {i: ((1,),) for i in range(z12_model.n_arrows)}
    actions[z12_model.identity_of[0]] = ((5,),)
    b = ModuleBundle(z12_model, moduli, actions)
    with pytest.raises(InvalidInput):
        b.check()


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

def test_groupoid_descriptor_roundtrip(z12_model):
    desc = groupoid_to_descriptor(z12_model)
    assert desc == {
        "model": {"group": {"kind": "cyclic", "n": 12}, "points": 2, "base": 0}
    }
    g2 = groupoid_from_descriptor(desc)
    assert g2.n_arrows == 48
    assert tuple(g2.objects) == (0, 1)


def test_groupoid_descriptor_rejects_unknown():
    with pytest.raises(InvalidInput):
        groupoid_from_descriptor({"mystery": 1})
