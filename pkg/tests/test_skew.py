import itertools
import random

import pytest
from hypothesis import given, settings, strategies as st

from _factories import qc3_involution, rand_invertible, random_twisted_module
from ratmodel.exactq import MatQ, kernel_basis, kronecker, vstack
from ratmodel.permgrp import group_from_spec
from ratmodel.skew import (AlgebraError, AlgebraModule, InvolutionError, Involution, TwistError,
                           TwistedModule, dihedral_iso_check, group_algebra, identity_involution,
                           inversion_involution, is_twisted_map, module_hom_dim, regular_twisted,
                           skew_group_ring, skew_to_twist, tensor_symmetry_map, tensor_unit_map,
                           twist_to_skew, twisted_hom_dim, twisted_tensor)

seeds = st.integers(0, 2 ** 32 - 1)


def class_count(G):
    seen, n = set(), 0
    for g in range(G.order):
        if g not in seen:
            n += 1
            seen |= {G.conj(h, g) for h in range(G.order)}
    return n


def hom_dim_oracle(As, Bs, m, n):
    """Solve B X = X A for every generator pair; X is n x m, row-major unknowns."""
    if m * n == 0:
        return 0
    eqs = [kronecker(B, MatQ.identity(m)) - kronecker(MatQ.identity(n), A.T) for A, B in zip(As, Bs)]
    return kernel_basis(vstack(eqs)).cols


@pytest.mark.parametrize("n", range(1, 7))
def test_dihedral_iso(n):
    rep = dihedral_iso_check(n)
    assert rep.verified
    assert rep.dim == 2 * n
    assert rep.to_text().startswith(f"iso verified, dim {2 * n}")
    # independent invariant: center dimension equals the class number of D_2n
    w = inversion_involution(group_from_spec(f"C{n}"), prefix="c")
    S = skew_group_ring(w.algebra, w)
    assert S.algebra.center_dim() == class_count(group_from_spec(f"D{2 * n}"))


def test_skew_ring_examples():
    w = qc3_involution()
    S = skew_group_ring(w.algebra, w)
    S.algebra.check()
    assert S.algebra.dim == 6 and not S.algebra.is_commutative()
    assert S.algebra.center_dim() == 3
    R = group_algebra(group_from_spec("C3"))
    T = skew_group_ring(R, identity_involution(R))
    assert T.algebra.is_commutative()
    # h r h = w(r)
    h = S.h_element
    for i in range(3):
        r = tuple(int(k == i) for k in range(3))
        assert S.algebra.mul(S.algebra.mul(h, S.one(r)), h) == S.one(w(r))


def test_involution_errors():
    R = group_algebra(group_from_spec("C3"))
    with pytest.raises(InvolutionError):
        Involution(R, MatQ.identity(3).scale(2)).check()
    # the cyclic shift g -> g^2 does not square to the identity on C3 algebra generators
    shift = MatQ.permutation([1, 2, 0])
    assert not Involution(R, shift).is_valid()


def test_twist_errors():
    w = qc3_involution()
    M = regular_twisted(w)
    with pytest.raises(TwistError):
        TwistedModule(w, M.action, MatQ.identity(3)).check()
    with pytest.raises(TwistError):
        TwistedModule(w, M.action, M.u.scale(2)).check()
    other = inversion_involution(group_from_spec("C3"))
    with pytest.raises(TwistError):
        twisted_tensor(M, regular_twisted(other))
    QS3 = group_algebra(group_from_spec("S3"))
    with pytest.raises(AlgebraError):
        twisted_tensor(regular_twisted(identity_involution(QS3)), regular_twisted(identity_involution(QS3)))


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_twist_skew_roundtrip(seed):
    rng = random.Random(seed)
    w = qc3_involution()
    S = skew_group_ring(w.algebra, w)
    M = random_twisted_module(rng, w)
    N = twist_to_skew(M, S)
    back = skew_to_twist(N, S)
    assert back.action == M.action and back.u == M.u
    again = twist_to_skew(back, S)
    assert again.action == N.action


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_hom_dims_agree(seed):
    rng = random.Random(seed)
    w = qc3_involution()
    S = skew_group_ring(w.algebra, w)
    M, N = random_twisted_module(rng, w), random_twisted_module(rng, w)
    d = twisted_hom_dim(M, N)
    assert d == module_hom_dim(twist_to_skew(M, S), twist_to_skew(N, S))
    assert d == hom_dim_oracle(list(M.action) + [M.u], list(N.action) + [N.u], M.dim, N.dim)


def test_hom_dim_examples():
    w = qc3_involution()
    R = regular_twisted(w)
    plus = TwistedModule(w, tuple(MatQ([[1]]) for _ in range(3)), MatQ([[1]]))
    minus = TwistedModule(w, plus.action, MatQ([[-1]]))
    assert twisted_hom_dim(R, R) == 2
    assert twisted_hom_dim(plus, minus) == 0
    assert twisted_hom_dim(plus, R) == 1


def test_twisted_tensor():
    w = qc3_involution()
    R = regular_twisted(w)
    T = twisted_tensor(R, R)
    assert T.module.dim == 3
    rng = random.Random(5)
    for _ in range(5):
        M = random_twisted_module(rng, w)
        TM = twisted_tensor(M, R)
        f = tensor_unit_map(TM, M)
        assert f.is_invertible()
        assert is_twisted_map(f, TM.module, M)
        N = random_twisted_module(rng, w)
        A, B = twisted_tensor(M, N), twisted_tensor(N, M)
        s = tensor_symmetry_map(A, B)
        assert is_twisted_map(s, A.module, B.module)
        assert (tensor_symmetry_map(B, A) @ s).is_identity()


def test_algebra_module_check():
    w = qc3_involution()
    R = w.algebra
    M = AlgebraModule(R, R.left)
    M.check()
    with pytest.raises(AlgebraError):
        AlgebraModule(R, tuple(A.scale(2) for A in R.left)).check()
    P = rand_invertible(random.Random(1), 3)
    assert module_hom_dim(M, AlgebraModule(R, tuple(P @ A @ P.inverse() for A in R.left))) == 3
    for i, j in itertools.product(range(3), repeat=2):
        assert R.basis_product(i, j) == R.basis_product(j, i)
