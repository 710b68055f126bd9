from fractions import Fraction

import pytest
import sympy
from hypothesis import given, settings, strategies as st

from ratmodel.exactq import (MatQ, SparseEchelon, DimensionError, bilinear_transport, block_diag,
                             format_rational, hstack, kernel_basis, kronecker, parse_rational,
                             solve_exact, vstack)

small = st.fractions(min_value=-4, max_value=4, max_denominator=3)


def matrices(max_r=4, max_c=4):
    return st.integers(1, max_r).flatmap(
        lambda r: st.integers(1, max_c).flatmap(
            lambda c: st.lists(st.lists(small, min_size=c, max_size=c), min_size=r, max_size=r)))


def to_sympy(A: MatQ):
    return sympy.Matrix(A.rows, A.cols, lambda i, j: sympy.Rational(A[i, j].numerator, A[i, j].denominator))


def test_kernel_examples():
    K = kernel_basis(MatQ([[1, 1], [1, 1]]))
    assert K.cols == 1
    assert K[0, 0] == -K[1, 0] != 0
    assert kernel_basis(MatQ.identity(3)).cols == 0
    assert kernel_basis(MatQ.zeros(2, 3)).cols == 3


def test_solve_examples():
    b = MatQ([[1, 2], [3, 4]])
    assert solve_exact(MatQ.identity(2), b) == b
    assert solve_exact(MatQ([[2]]), MatQ([[1]])) == MatQ([[Fraction(1, 2)]])
    assert solve_exact(MatQ([[1], [1]]), MatQ([[0], [1]])) is None


def test_kronecker_examples():
    assert kronecker(MatQ.identity(2), MatQ.identity(3)) == MatQ.identity(6)
    A = MatQ([[1, 2], [3, 4]])
    assert kronecker(A, MatQ([[5]])) == A.scale(5)


def test_shape_errors():
    with pytest.raises(DimensionError):
        MatQ([[1, 2]]) @ MatQ([[1, 2]])
    with pytest.raises(DimensionError):
        MatQ([[1, 2], [3]])


@settings(max_examples=60, deadline=None)
@given(matrices())
def test_rank_matches_sympy(rows):
    A = MatQ(rows)
    assert A.rank() == to_sympy(A).rank()
    K = A.kernel()
    assert K.cols == A.cols - A.rank()
    assert (A @ K).is_zero()


@settings(max_examples=40, deadline=None)
@given(matrices(2, 2), matrices(2, 2))
def test_kron_rank_is_product(a, b):
    A, B = MatQ(a), MatQ(b)
    assert kronecker(A, B).rank() == to_sympy(A).rank() * to_sympy(B).rank()


@settings(max_examples=40, deadline=None)
@given(st.lists(st.lists(small, min_size=3, max_size=3), min_size=3, max_size=3))
def test_inverse_matches_sympy(rows):
    A = MatQ(rows)
    S = to_sympy(A)
    if S.det() == 0:
        assert not A.is_invertible()
        return
    Ai = A.inverse()
    assert A @ Ai == MatQ.identity(3)
    assert to_sympy(Ai) == S.inv()


@settings(max_examples=40, deadline=None)
@given(matrices(3, 3), st.lists(small, min_size=3, max_size=3))
def test_solve_is_consistent(rows, xs):
    A = MatQ(rows)
    x = MatQ([[v] for v in xs[:A.cols]], cols=1)
    b = A @ x
    sol = solve_exact(A, b)
    assert sol is not None and A @ sol == b


def test_bilinear_transport_is_kron():
    T = MatQ([[1, 0, 0, 2], [0, 1, 1, 0]])
    A, B = MatQ([[1, 1], [0, 1]]), MatQ([[2, 0], [1, 1]])
    assert bilinear_transport(T, A, B) == T @ kronecker(A, B)


def test_stacking():
    A, B = MatQ([[1, 2]]), MatQ([[3, 4]])
    assert vstack([A, B]) == MatQ([[1, 2], [3, 4]])
    assert hstack([A, B]) == MatQ([[1, 2, 3, 4]])
    assert block_diag([A, B]).shape == (2, 4)


@settings(max_examples=40, deadline=None)
@given(matrices(5, 4))
def test_sparse_echelon_rank(rows):
    A = MatQ(rows)
    E = SparseEchelon(A.cols)
    for r in rows:
        E.add({j: x for j, x in enumerate(r) if x})
    assert len(E) == A.rank()
    assert len(E.complement()) == A.cols - A.rank()
    for r in rows:
        assert E.contains({j: x for j, x in enumerate(r) if x})


def test_rational_text_roundtrip():
    for x in [Fraction(0), Fraction(-3, 7), Fraction(5)]:
        assert parse_rational(format_rational(x)) == x
    assert MatQ.from_json(MatQ([[1, Fraction(1, 2)]]).to_json()) == MatQ([[1, Fraction(1, 2)]])
    with pytest.raises(ValueError):
        parse_rational("1/0")
