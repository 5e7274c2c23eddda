import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from gqm import fixtures
from gqm.abelian import (
    FinAbGroup,
    abelianization,
    check_freeindex,
    determinant,
    diagonal,
    identity_matrix,
    matmul,
    mixed_quotient_presentation,
    smith_normal_form,
    tensor,
)
from gqm.errors import ResourceLimit


def is_diagonal(D):
    return all(D[i][j] == 0 for i in range(len(D)) for j in range(len(D[0])) if i != j)


def test_snf_examples():
    D, U, V = smith_normal_form(identity_matrix(3))
    assert D == identity_matrix(3)
    assert diagonal(smith_normal_form([[2, 0], [0, 3]])[0]) == [1, 6]
    Z = [[0, 0], [0, 0]]
    assert smith_normal_form(Z)[0] == Z


def test_snf_hand_computed():
    # gcd of entries is 2; |det| = 2·6·12 = 144 → diag(2, 6, 12)
    M = [[2, 4, 4], [-6, 6, 12], [10, -4, -16]]
    D, U, V = smith_normal_form(M)
    assert diagonal(D) == [2, 6, 12]
    assert abs(determinant(M)) == 144


matrices = st.integers(1, 4).flatmap(
    lambda m: st.integers(1, 4).flatmap(
        lambda n: st.lists(st.lists(st.integers(-9, 9), min_size=n, max_size=n), min_size=m, max_size=m)))


@given(matrices)
def test_snf_round_trip(M):
    D, U, V = smith_normal_form(M)
    assert matmul(matmul(U, M), V) == D
    assert is_diagonal(D)
    assert determinant(U) in (1, -1) and determinant(V) in (1, -1)
    d = diagonal(D)
    assert all(x >= 0 for x in d)
    for a, b in zip(d, d[1:]):
        assert (b == 0) if a == 0 else b % a == 0


@given(st.lists(st.lists(st.integers(-9, 9), min_size=2, max_size=2), min_size=2, max_size=2))
def test_snf_2x2_oracle(M):
    # d1 = gcd of entries, d1·d2 = |det|
    d = diagonal(smith_normal_form(M)[0])
    g = math.gcd(*[x for row in M for x in row])
    assert d[0] == g
    assert d[0] * d[1] == abs(M[0][0] * M[1][1] - M[0][1] * M[1][0])


def test_abelianization_examples():
    assert abelianization(fixtures.cyclic(5)).invariants == (5,)
    assert abelianization(fixtures.symmetric3()).invariants == (2,)
    assert abelianization(fixtures.klein_four()).invariants == (2, 2)
    assert abelianization(fixtures.dihedral(4)).invariants == (2, 2)
    assert abelianization(fixtures.dihedral(3)).invariants == (2,)


def test_tensor_examples():
    Z = lambda *ds: FinAbGroup.from_diagonal(ds)
    assert tensor(Z(2), Z(3)).invariants == ()
    assert tensor(Z(2), Z(2)).invariants == (2,)
    assert tensor(Z(4), Z(6)).invariants == (2,)
    assert tensor(Z(0), Z(6)).invariants == (6,)
    assert str(Z()) == "0" and Z(2, 3).invariants == (6,)


small = st.lists(st.integers(0, 12), max_size=3)


@given(small, small)
def test_tensor_symmetric(a, b):
    A, B = FinAbGroup.from_diagonal(a), FinAbGroup.from_diagonal(b)
    assert tensor(A, B) == tensor(B, A)


@given(small, small, small)
def test_tensor_distributes(a, b, c):
    A, B, C = (FinAbGroup.from_diagonal(x) for x in (a, b, c))
    left = tensor(A, FinAbGroup.from_diagonal(list(B.invariants) + list(C.invariants)))
    right = FinAbGroup.from_diagonal(list(tensor(A, B).invariants) + list(tensor(A, C).invariants))
    assert left == right


def test_presentation_examples():
    C = fixtures.cyclic
    assert mixed_quotient_presentation(C(2), C(2)).invariants == (2,)
    assert mixed_quotient_presentation(C(2), C(3)).invariants == ()
    assert mixed_quotient_presentation(C(4), C(6)).invariants == (2,)
    with pytest.raises(ResourceLimit):
        mixed_quotient_presentation(C(6), C(6), budget=10)


def test_freeindex_examples():
    ok, left, _ = check_freeindex(fixtures.symmetric3(), fixtures.cyclic(2))
    assert ok and left.invariants == (2,)
    ok, left, _ = check_freeindex(fixtures.cyclic(2), fixtures.cyclic(3))
    assert ok and left.invariants == ()


groups = st.one_of(st.integers(1, 6).map(fixtures.cyclic), st.integers(2, 4).map(fixtures.dihedral))


@given(groups, groups)
def test_freeindex_sweep(A, B):
    ok, left, right = check_freeindex(A, B)
    assert ok, (left, right)
