from __future__ import annotations

import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fixedloci.lattice import (
    DivisorChain,
    FinAbGroup,
    IntMatrix,
    LatticeError,
    coker_structure,
    invariants_from_orders,
    normalize_divisor_chain,
    smith_normal_form,
    torus_kernel,
    torus_points_kernel_oracle,
)
from oracles import determinantal_factors, element_order, torus_kernel_bruteforce


def matrices(max_dim=4, bound=5, square=False):
    def build(shape):
        m, n = shape
        return st.lists(st.lists(st.integers(-bound, bound), min_size=n, max_size=n), min_size=m, max_size=m)

    dims = st.integers(1, max_dim)
    shapes = dims.map(lambda k: (k, k)) if square else st.tuples(dims, dims)
    return shapes.flatmap(build).map(IntMatrix.from_rows)


def is_snf_diagonal(D: IntMatrix) -> bool:
    k = min(D.rows, D.cols)
    off = all(D[i, j] == 0 for i in range(D.rows) for j in range(D.cols) if i != j)
    diag = [D[i, i] for i in range(k)]
    chain = all(d >= 0 for d in diag) and all(
        (b == 0) if a == 0 else b % a == 0 for a, b in zip(diag, diag[1:])
    )
    return off and chain


# ---------------------------------------------------------------- examples


def test_snf_already_diagonal():
    snf = smith_normal_form(IntMatrix.diag([2, 4]))
    assert snf.D == IntMatrix.diag([2, 4])
    assert snf.factors.moduli == (2, 4)


def test_snf_identity():
    snf = smith_normal_form(IntMatrix.identity(2))
    assert snf.D == IntMatrix.identity(2)
    assert snf.factors.moduli == (1, 1)


def test_snf_frozen_oracle_value():
    # determinantal divisors: d1 = gcd(entries) = 2, d1 d2 = |det| = 8
    A = IntMatrix.parse("2,4;6,8")
    assert determinantal_factors(A.to_lists()) == (2, 4)
    assert smith_normal_form(A).factors.moduli == (2, 4)


def test_snf_zero_and_rectangular():
    Z = IntMatrix(2, 3, (0,) * 6)
    snf = smith_normal_form(Z)
    assert snf.factors.moduli == (0, 0)
    R = IntMatrix.parse("2,0,0;0,3,0")
    assert smith_normal_form(R).factors.moduli == (1, 6)
    assert coker_structure(R) == FinAbGroup(0, DivisorChain((6,)))


def test_snf_empty_matrix():
    snf = smith_normal_form(IntMatrix(0, 0, ()))
    assert snf.factors.moduli == ()


def test_torus_kernel_diagonal():
    assert torus_kernel(IntMatrix.diag([2, 4])).as_mu() == "mu_2 x mu_4"
    assert torus_kernel(IntMatrix.diag([3])).as_mu() == "mu_3"


def test_torus_kernel_identity_is_trivial():
    K = torus_kernel(IntMatrix.identity(3))
    assert K.is_trivial()
    assert K.as_mu() == "1"


def test_torus_kernel_frozen_oracle_value():
    A = IntMatrix.parse("2,1;0,3")
    assert torus_kernel_bruteforce(A.to_lists(), 6) == (6,)
    assert torus_kernel(A) == FinAbGroup(0, DivisorChain((6,)))


def test_torus_kernel_errors():
    with pytest.raises(LatticeError, match="not an isogeny"):
        torus_kernel(IntMatrix.parse("1,2;2,4"))
    with pytest.raises(LatticeError):
        torus_kernel(IntMatrix.parse("1,2,3;4,5,6"))


def test_normalize_divisor_chain_examples():
    assert normalize_divisor_chain([4, 2]).moduli == (2, 4)
    assert normalize_divisor_chain([6, 4]).moduli == (2, 12)
    assert normalize_divisor_chain([1]).moduli == (1,)
    census = [element_order(x, (6, 4)) for x in itertools.product(range(6), range(4))]
    assert invariants_from_orders(census) == DivisorChain((2, 12))
    with pytest.raises(LatticeError):
        normalize_divisor_chain([0, 2])


def test_coker_examples():
    assert coker_structure(IntMatrix.diag([2, 4])) == FinAbGroup(0, DivisorChain((2, 4)))
    assert coker_structure(IntMatrix.identity(2)).is_trivial()
    assert coker_structure(IntMatrix.parse("2,4;6,8")) == FinAbGroup(0, DivisorChain((2, 4)))
    assert coker_structure(IntMatrix.parse("2;0")) == FinAbGroup(1, DivisorChain((2,)))


def test_oracle_examples():
    assert torus_points_kernel_oracle(IntMatrix.diag([2, 4]), 8).as_mu() == "mu_2 x mu_4"
    assert torus_points_kernel_oracle(IntMatrix.identity(2), 5).is_trivial()
    assert torus_points_kernel_oracle(IntMatrix.parse("2,1;0,3"), 6).as_mu() == "mu_6"


def test_finabgroup_round_trip():
    for text in ("Z^2 x Z/2 x Z/4", "Z", "Z/3", "0"):
        assert str(FinAbGroup.parse(text)) == text
    with pytest.raises(LatticeError):
        FinAbGroup.parse("Q")


def test_matrix_parse_errors():
    with pytest.raises(LatticeError):
        IntMatrix.parse("1,2;3")
    with pytest.raises(LatticeError):
        IntMatrix.parse("a,b")
    with pytest.raises(LatticeError):
        IntMatrix.parse("")


def test_divisor_chain_validation():
    with pytest.raises(LatticeError):
        DivisorChain((4, 2))
    assert DivisorChain((1, 2)) == DivisorChain((2,))
    assert DivisorChain((2, 0)).order() == 0


# ---------------------------------------------------------------- properties


@settings(max_examples=300, deadline=None)
@given(matrices())
def test_snf_decomposition_property(A):
    snf = smith_normal_form(A)
    assert snf.U @ A @ snf.V == snf.D
    assert abs(snf.U.det()) == 1 and abs(snf.V.det()) == 1
    assert is_snf_diagonal(snf.D)
    assert snf.factors.moduli == tuple(snf.D[i, i] for i in range(min(A.rows, A.cols)))


@settings(max_examples=200, deadline=None)
@given(matrices(max_dim=3, bound=5))
def test_snf_matches_determinantal_divisors(A):
    assert smith_normal_form(A).factors.moduli == determinantal_factors(A.to_lists())


@settings(max_examples=200, deadline=None)
@given(matrices())
def test_transpose_stability(A):
    assert smith_normal_form(A).factors == smith_normal_form(A.T).factors


@settings(max_examples=200, deadline=None)
@given(matrices(square=True))
def test_product_of_factors_is_abs_det(A):
    d = A.det()
    if d != 0:
        assert smith_normal_form(A).factors.order() == abs(d)
        assert torus_kernel(A).order() == abs(d)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.integers(1, 40), min_size=1, max_size=5), st.randoms(use_true_random=False))
def test_normalize_idempotent_and_order_free(moduli, rnd):
    chain = normalize_divisor_chain(moduli)
    assert normalize_divisor_chain(chain.moduli) == chain
    shuffled = list(moduli)
    rnd.shuffle(shuffled)
    assert normalize_divisor_chain(shuffled) == chain
    assert chain.order() == _prod(moduli)


@settings(max_examples=60, deadline=None)
@given(matrices(max_dim=2, bound=5, square=True), st.integers(1, 2))
def test_oracle_agrees_with_torus_kernel(A, k):
    d = abs(A.det())
    if d == 0 or d > 60:
        return
    assert torus_points_kernel_oracle(A, d * k) == torus_kernel(A)


def _prod(xs):
    out = 1
    for x in xs:
        out *= x
    return out
