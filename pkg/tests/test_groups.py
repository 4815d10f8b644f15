from __future__ import annotations

import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fixedloci.groups import (
    FiniteGroup,
    GroupError,
    GroupHom,
    Subgroup,
    abelian,
    center,
    cyclic,
    dihedral,
    direct_product,
    find_isomorphism,
    generated_subgroup,
    group_from_json,
    invariant_factors_of_abelian,
    is_isomorphic,
    label,
    named_group,
    quaternion8,
    quotient,
    subgroups,
    symmetric3,
    trivial_group,
    trivial_subgroup,
    whole,
)
from fixedloci.lattice import DivisorChain
from oracles import chain_from_census

NAMES = ["C1", "C2", "C3", "C4", "C6", "C2xC2", "C2xC4", "C2xC2xC2", "Q8", "S3", "D4", "C2xS3", "Q8xC2"]


def commutes_with_all(G, z):
    return all(G.mul(z, g) == G.mul(g, z) for g in G.elements())


# ---------------------------------------------------------------- examples


def test_named_groups_are_valid():
    for name in NAMES:
        G = named_group(name)
        G.validate()


def test_center_examples():
    assert len(center(cyclic(6))) == 6
    assert center(symmetric3()).elements == (symmetric3().identity,)
    Q = quaternion8()
    Z = center(Q)
    assert Z.elements == (0, 1)  # 1 and -1
    assert label(Z.as_group()[0]) == "C2"
    # brute-force commutation check agrees
    assert [z for z in Q.elements() if commutes_with_all(Q, z)] == [0, 1]


def test_quotient_examples():
    C4 = cyclic(4)
    Q, proj = quotient(C4, Subgroup(C4, (0, 2)))
    assert Q.order == 2 and is_isomorphic(Q, cyclic(2))
    assert proj.is_homomorphism() and proj.is_surjective()
    Q8 = quaternion8()
    K, _ = quotient(Q8, center(Q8))
    assert is_isomorphic(K, abelian((2, 2)))
    G = dihedral(4)
    same, _ = quotient(G, trivial_subgroup(G))
    assert is_isomorphic(same, G)


def test_quotient_rejects_non_normal():
    S3 = symmetric3()
    transposition = next(g for g in S3.elements() if S3.element_orders[g] == 2)
    with pytest.raises(GroupError, match="not normal"):
        quotient(S3, generated_subgroup(S3, [transposition]))


def test_isomorphism_examples():
    assert not is_isomorphic(abelian((2, 2)), cyclic(4))
    assert is_isomorphic(cyclic(6), abelian((2, 3)))
    assert is_isomorphic(dihedral(4), dihedral(4))
    assert not is_isomorphic(dihedral(4), quaternion8())


def test_isomorphism_is_a_hom():
    phi = find_isomorphism(named_group("C2xC4"), abelian((4, 2)))
    assert phi is not None and phi.is_homomorphism() and phi.is_injective()


def test_isomorphism_search_bound():
    big = cyclic(65)
    with pytest.raises(GroupError, match="search bound exceeded"):
        is_isomorphic(big, big)


def test_direct_product_examples():
    V = direct_product(cyclic(2), cyclic(2))
    assert is_isomorphic(V, abelian((2, 2)))
    assert is_isomorphic(direct_product(trivial_group(), dihedral(4)), dihedral(4))
    assert is_isomorphic(direct_product(cyclic(2), cyclic(3)), cyclic(6))


def test_invariant_factors_examples():
    assert invariant_factors_of_abelian(cyclic(4)) == DivisorChain((4,))
    G = abelian((6, 4))
    assert invariant_factors_of_abelian(G) == DivisorChain((2, 12))
    assert chain_from_census(G.element_orders) == (2, 12)
    assert invariant_factors_of_abelian(trivial_group()).canonical() == ()
    with pytest.raises(GroupError):
        invariant_factors_of_abelian(symmetric3())


def test_subgroup_counts():
    # known subgroup counts
    assert len(subgroups(quaternion8())) == 6
    assert len(subgroups(dihedral(4))) == 10
    assert len(subgroups(symmetric3())) == 6
    assert len(subgroups(abelian((2, 2)))) == 5
    for H in subgroups(dihedral(4)):
        assert H.is_closed()


def test_group_from_json():
    G = group_from_json({"order": 2, "table": [[0, 1], [1, 0]]})
    assert is_isomorphic(G, cyclic(2))
    with pytest.raises(GroupError):
        group_from_json({"table": [[0, 1], [0, 1]]})
    with pytest.raises(GroupError):
        group_from_json({"order": 3, "table": [[0, 1], [1, 0]]})
    with pytest.raises(GroupError):
        group_from_json("Z7")


def test_hom_checks():
    C4, C2 = cyclic(4), cyclic(2)
    f = GroupHom(C4, C2, (0, 1, 0, 1))
    assert f.is_homomorphism() and f.kernel().elements == (0, 2)
    assert not GroupHom(C4, C2, (0, 1, 1, 0)).is_homomorphism()
    with pytest.raises(GroupError):
        GroupHom(C4, C2, (0, 1))


def test_labels():
    assert label(named_group("C2xC2xC2")) == "C2xC2xC2"
    assert label(direct_product(cyclic(3), cyclic(4))) == "C12"
    assert label(dihedral(4)) == "D4"
    assert label(quaternion8()) == "Q8"


# ---------------------------------------------------------------- properties

groups = st.sampled_from(NAMES).map(named_group)


@settings(max_examples=40, deadline=None)
@given(groups, groups)
def test_center_of_product_is_product_of_centers(G, H):
    if G.order * H.order > 64:
        return
    assert len(center(direct_product(G, H))) == len(center(G)) * len(center(H))


@settings(max_examples=30, deadline=None)
@given(groups)
def test_quotient_round_trips(G):
    same, _ = quotient(G, trivial_subgroup(G))
    assert is_isomorphic(same, G)
    point, _ = quotient(G, whole(G))
    assert point.order == 1


@settings(max_examples=30, deadline=None)
@given(groups)
def test_normal_subgroup_quotient_orders(G):
    for N in subgroups(G):
        if N.is_normal():
            Q, proj = quotient(G, N)
            Q.validate()
            assert Q.order * N.order == G.order
            assert proj.kernel().elements == N.elements


@settings(max_examples=30, deadline=None)
@given(groups, groups, groups)
def test_isomorphism_equivalence_relation(A, B, C):
    assert is_isomorphic(A, A)
    ab, bc, ac = is_isomorphic(A, B), is_isomorphic(B, C), is_isomorphic(A, C)
    assert ab == is_isomorphic(B, A)
    if ab and bc:
        assert ac


@settings(max_examples=40, deadline=None)
@given(st.lists(st.integers(1, 6), min_size=1, max_size=3), st.randoms(use_true_random=False))
def test_relabelled_groups_are_isomorphic(moduli, rnd):
    G = abelian(moduli)
    if G.order > 64:
        return
    perm = list(G.elements())
    rnd.shuffle(perm)
    inv = {p: i for i, p in enumerate(perm)}
    table = tuple(tuple(perm[G.mul(inv[a], inv[b])] for b in G.elements()) for a in G.elements())
    H = FiniteGroup(table, perm[G.identity])
    H.validate()
    assert is_isomorphic(G, H)
    assert invariant_factors_of_abelian(H).canonical() == chain_from_census(G.element_orders)


def test_abelian_invariants_exhaustive_against_census():
    for moduli in itertools.product(range(1, 7), repeat=2):
        G = abelian(moduli)
        assert invariant_factors_of_abelian(G).canonical() == chain_from_census(G.element_orders)
