import random

import pytest
from hypothesis import given, settings, strategies as st

from _factories import adjunction_triple, augmentation_complex, disk_complex, random_c2_complex
from ratmodel.dgmod import (ComplexError, DGMap, DGModule, GroupMismatch, chain_map_space_dim,
                            cover_degree_zero, equivariant_hom_dim, fixed_subcomplex, hom_complex,
                            hom_matrices_to_vector, hom_vector_to_matrices, homology, homology_dims,
                            induced_map, is_quasi_iso, tensor, tensor_symmetry)
from ratmodel.exactq import MatQ
from ratmodel.permgrp import group_from_spec

C2 = group_from_spec("C2")
seeds = st.integers(0, 2 ** 32 - 1)


def convolve(a: dict, b: dict) -> dict:
    out = {}
    for p, x in a.items():
        for q, y in b.items():
            out[p + q] = out.get(p + q, 0) + x * y
    return {n: v for n, v in out.items() if v}


def test_examples():
    Q = DGModule.trivial(C2)
    R = DGModule.regular(C2)
    assert homology_dims(augmentation_complex(C2)) == {1: 1}
    assert homology_dims(disk_complex(C2)) == {0: 1}
    assert fixed_subcomplex(R).module.dims == (1,)
    assert equivariant_hom_dim(R, R) == 2
    assert equivariant_hom_dim(Q, R) == 1
    assert homology(R.shift(3)).graded_dims() == {3: 2}


def test_check_rejects_bad_data():
    with pytest.raises(ComplexError):
        DGModule(C2, 0, 2, (1, 1, 1), {1: MatQ([[1]]), 2: MatQ([[1]])}).check()
    sign = {1: {0: MatQ([[-1]]), 1: MatQ([[1]])}}
    with pytest.raises(ComplexError):
        DGModule(C2, 0, 1, (1, 1), {1: MatQ([[1]])}, sign).check()
    with pytest.raises(GroupMismatch):
        tensor(DGModule.trivial(C2), DGModule.trivial(group_from_spec("C3")))


@settings(max_examples=50, deadline=None)
@given(seeds)
def test_random_complex_invariants(seed):
    rng = random.Random(seed)
    X = random_c2_complex(rng)
    Y = random_c2_complex(rng, max_dim=3, max_len=3)
    assert X.lo >= -3 and X.hi <= 5 and max(X.dims) <= 4
    X.check()
    # Kunneth over a field
    T = tensor(X, Y)
    T.check()
    assert homology_dims(T) == convolve(homology_dims(X), homology_dims(Y))
    # homology of fixed points against fixed points of homology
    H = homology(X)
    H.check()
    FX = fixed_subcomplex(X)
    HF = homology(FX.module)
    assert HF.graded_dims() == H.fixed_dims()
    incl = DGMap(FX.module, X, dict(FX.inclusion))
    ind = {n: H.proj[n] @ incl.at(n) @ HF.reps[n] for n in X.degrees}
    for n in X.degrees:
        A = ind[n]
        assert A.rank() == HF.dim(n)
        # the image is fixed by the action on homology
        for g in range(1, C2.order):
            assert H.act(g, n) @ A == A


def test_tensor_hom_adjunction():
    rng = random.Random(2024)
    nontrivial = 0
    for _ in range(60):
        X, Y, Z = adjunction_triple(rng)
        Hom = hom_complex(Y, Z)
        Hom.check()
        d = chain_map_space_dim(tensor(X, Y), Z)
        assert d == chain_map_space_dim(X, Hom)
        nontrivial += d > 0
    assert nontrivial >= 10


@settings(max_examples=25, deadline=None)
@given(seeds)
def test_chain_maps_are_fixed_cycles(seed):
    rng = random.Random(seed)
    X = random_c2_complex(rng, max_dim=3, max_len=3)
    Y = random_c2_complex(rng, max_dim=3, max_len=3)
    F = fixed_subcomplex(hom_complex(X, Y)).module
    z0 = F.dim(0) - F.diff(0).rank()
    assert chain_map_space_dim(X, Y) == z0


@settings(max_examples=25, deadline=None)
@given(seeds)
def test_hom_vectors_roundtrip_and_sign(seed):
    rng = random.Random(seed)
    X = random_c2_complex(rng, max_dim=2, max_len=3)
    Y = random_c2_complex(rng, max_dim=2, max_len=3)
    Hm = hom_complex(X, Y)
    for n in Hm.degrees:
        for j in range(Hm.dim(n)):
            v = tuple(1 if i == j else 0 for i in range(Hm.dim(n)))
            comps = hom_vector_to_matrices(X, Y, n, v)
            assert hom_matrices_to_vector(X, Y, n, comps) == v
            # d(f) = d f - (-1)^n f d
            df = hom_vector_to_matrices(X, Y, n - 1, Hm.diff(n).apply(v)) if n > Hm.lo else {}
            s = -1 if n % 2 else 1
            for p in X.degrees:
                want = Y.diff(p + n) @ comps.get(p, MatQ.zeros(Y.dim(p + n), X.dim(p)))
                if p - 1 in comps or X.dim(p - 1):
                    prev = comps.get(p - 1, MatQ.zeros(Y.dim(p - 1 + n), X.dim(p - 1)))
                    want = want - (prev @ X.diff(p)).scale(s)
                got = df.get(p, MatQ.zeros(Y.dim(p + n - 1), X.dim(p)))
                assert got == want


@settings(max_examples=20, deadline=None)
@given(seeds)
def test_symmetry_is_involutive_chain_iso(seed):
    rng = random.Random(seed)
    X = random_c2_complex(rng, max_dim=2, max_len=3)
    Y = random_c2_complex(rng, max_dim=2, max_len=3)
    s = tensor_symmetry(X, Y)
    s.check()
    back = tensor_symmetry(Y, X)
    assert back.compose(s).components == DGMap.identity(tensor(X, Y)).components


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_json_roundtrip(seed):
    X = random_c2_complex(random.Random(seed))
    Y = DGModule.from_json(X.to_json(group_spec="C2"))
    assert Y.dims == X.dims and Y.lo == X.lo
    for n in X.degrees:
        assert Y.diff(n) == X.diff(n)
        assert Y.act(1, n) == X.act(1, n)


def test_json_errors():
    with pytest.raises(ComplexError):
        DGModule.from_json({"group": "C2", "lo": 0})
    with pytest.raises(ComplexError):
        DGModule.from_json({"group": "C2", "lo": 0, "hi": 1, "dims": [1]})
    bad = {"group": "C2", "lo": 0, "hi": 0, "dims": [1], "action": {"5": {"0": [["1"]]}}}
    with pytest.raises(ComplexError):
        DGModule.from_json(bad)


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_cover_is_quasi_iso_when_nonnegative(seed):
    X = random_c2_complex(random.Random(seed), lo_range=(-1, 3))
    C, inc = cover_degree_zero(X)
    C.check()
    inc.check()
    negative = any(n < 0 for n in homology_dims(X))
    assert is_quasi_iso(inc) == (not negative)
    HC = homology(C)
    for n in range(0, X.hi + 1):
        if HC.dim(n):
            assert induced_map(inc)[n].is_invertible()


def test_homology_rep_iso_invariants():
    rng = random.Random(7)
    Q = DGModule.trivial(C2)
    sign = DGModule(C2, 0, 0, (1,), {}, {1: {0: MatQ([[-1]])}})
    for _ in range(10):
        X = random_c2_complex(rng, basis_change=False)
        H = homology(X)
        # an equivariant basis change keeps the class
        P = {n: MatQ.identity(X.dim(n)).scale(2) for n in X.degrees}
        assert H.is_isomorphic(homology(X.change_basis(P)))
        # counting isotypic parts through fixed points of X and X (x) sign
        triv = homology_dims(fixed_subcomplex(X).module)
        sgn = homology_dims(fixed_subcomplex(tensor(X, sign)).module)
        assert H.fixed_dims() == triv
        assert convolve(triv, {0: 1}) == homology_dims(fixed_subcomplex(tensor(X, Q)).module)
        for n in range(-4, 7):
            assert H.dim(n) == triv.get(n, 0) + sgn.get(n, 0)
        assert not H.is_isomorphic(homology(tensor(X, sign))) or triv == sgn
