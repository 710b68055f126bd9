"""Random and fixed test objects shared by the test modules."""

from __future__ import annotations

import random
from fractions import Fraction

from ratmodel.dgmod import DGModule
from ratmodel.exactq import MatQ, block_diag, kernel_basis, solve_exact
from ratmodel.permgrp import group_from_spec
from ratmodel.ringoid import (build_Ea, change_hom_bases, square_zero_algebra, tensor_with_algebra)
from ratmodel.skew import TwistedModule, inversion_involution, regular_twisted


def rand_frac(rng: random.Random, lo: int = -3, hi: int = 3) -> Fraction:
    return Fraction(rng.randint(lo, hi), rng.choice([1, 1, 1, 2, 3]))


def rand_matrix(rng: random.Random, r: int, c: int) -> MatQ:
    return MatQ([[rand_frac(rng) for _ in range(c)] for _ in range(r)], cols=c)


def rand_unimodular(rng: random.Random, n: int) -> MatQ:
    """Signed permutation times a unit upper triangular matrix with entries in {-1, 0, 1}."""
    perm = list(range(n))
    rng.shuffle(perm)
    signs = [rng.choice([1, -1]) for _ in range(n)]
    U = MatQ([[1 if i == j else (rng.choice([-1, 0, 0, 1]) if j > i else 0) for j in range(n)]
              for i in range(n)], cols=n)
    return MatQ.permutation(perm, signs) @ U


def rand_invertible(rng: random.Random, n: int) -> MatQ:
    while True:
        A = rand_matrix(rng, n, n)
        if A.is_invertible():
            return A


# -- QC2-complexes -----------------------------------------------------------------

def random_c2_complex(rng: random.Random, lo_range=(-3, 5), max_dim: int = 4,
                      max_len: int = 4, basis_change: bool = True) -> DGModule:
    """A bounded complex of QC2-modules with random equivariant differentials.

    Each degree is a sum of trivial and sign lines and the differential
    respects the isotypic splitting.  A random isotypic basis change follows,
    and optionally a change that turns a trivial-sign pair into a regular block.
    """
    G = group_from_spec("C2")
    lo = rng.randint(lo_range[0], lo_range[1])
    hi = min(lo_range[1], lo + rng.randint(0, max_len - 1))
    n = hi - lo + 1
    # per degree: number of trivial and sign summands
    parts = []
    for _ in range(n):
        d = rng.randint(0, max_dim)
        t = rng.randint(0, d)
        parts.append((t, d - t))
    dims = [t + s for t, s in parts]

    def diag(t, s):
        return MatQ.from_sparse(t + s, t + s, {(i, i): (1 if i < t else -1) for i in range(t + s)})

    # d_k lands in ker d_{k-1}, one isotypic part at a time
    d = {}
    for k in range(lo + 1, hi + 1):
        i = k - lo
        (t1, s1), (t0, s0) = parts[i], parts[i - 1]
        entries = {}
        for a1, a0, off1, off0 in ((t1, t0, 0, 0), (s1, s0, t1, t0)):
            if not a1 or not a0:
                continue
            # restrict to maps whose image lies in ker d_{k-1} on that isotype
            if k - 1 > lo:
                D = d[k - 1]
                sub = MatQ([[D[r, off0 + c] for c in range(a0)] for r in range(D.rows)], cols=a0)
                K = kernel_basis(sub) if sub.rows else MatQ.identity(a0)
            else:
                K = MatQ.identity(a0)
            if K.cols == 0:
                continue
            X = rand_matrix(rng, K.cols, a1) if rng.random() < 0.8 else MatQ.zeros(K.cols, a1)
            Y = K @ X
            for r in range(a0):
                for c in range(a1):
                    if Y[r, c]:
                        entries[(off0 + r, off1 + c)] = Y[r, c]
        d[k] = MatQ.from_sparse(dims[i - 1], dims[i], entries)
    action = {1: {lo + i: diag(*parts[i]) for i in range(n)}}
    X = DGModule(G, lo, hi, tuple(dims), d, action)
    if basis_change:
        P = {}
        for i in range(n):
            t, s = parts[i]
            A = rand_invertible(rng, t) if t else MatQ.zeros(0, 0)
            B = rand_invertible(rng, s) if s else MatQ.zeros(0, 0)
            P[lo + i] = block_diag([A, B]) if dims[i] else MatQ.zeros(0, 0)
        X = X.change_basis(P)
    # mix in a regular summand sometimes: swap basis so the generator permutes two lines
    if basis_change and rng.random() < 0.5:
        P = {}
        for i in range(n):
            t, s = parts[i]
            if t and s:
                # (e_t0, e_s0) -> (e_t0 + e_s0, e_t0 - e_s0) makes a regular block visible
                entries = {(j, j): Fraction(1) for j in range(t + s)}
                entries[(0, t)] = Fraction(1)
                entries[(t, 0)] = Fraction(1)
                entries[(t, t)] = Fraction(-1)
                P[lo + i] = MatQ.from_sparse(t + s, t + s, entries)
            else:
                P[lo + i] = MatQ.identity(t + s)
        X = X.change_basis(P)
    X.check()
    return X


def augmentation_complex(G) -> DGModule:
    """QG in degree 1 mapping onto Q in degree 0 by the augmentation."""
    R = DGModule.regular(G)
    d = MatQ([[1] * G.order])
    return DGModule(G, 0, 1, (1, G.order), {1: d},
                    {g: {0: MatQ.identity(1), 1: R.act(g, 0)} for g in range(1, G.order)})


def disk_complex(G) -> DGModule:
    """Q in degree 0 plus an acyclic QG -> QG disk in degrees 1, 2; homology is Q in degree 0."""
    R = DGModule.regular(G)
    n = G.order
    X = DGModule(G, 0, 2, (1, n, n), {1: MatQ.zeros(1, n), 2: MatQ.identity(n)},
                 {g: {0: MatQ.identity(1), 1: R.act(g, 0), 2: R.act(g, 0)} for g in range(1, n)})
    X.check()
    return X


def morita_targets(G) -> dict[str, DGModule]:
    """0, Q, QW, Q + QW and a two-term complex with homology Q in degree 0."""
    Q = DGModule.trivial(G)
    R = DGModule.regular(G)
    n = G.order
    # the augmentation ideal I (basis e_g - e_0) in degree 1 includes into QW; H = Q in degree 0
    inc = MatQ.from_columns([tuple((1 if r == g else 0) - (1 if r == 0 else 0) for r in range(n))
                             for g in range(1, n)], n)
    acts = {}
    for g in range(1, n):
        A = R.act(g, 0)
        # action on I in the basis above, obtained by solving inc X = A inc
        acts[g] = {0: A, 1: solve_exact(inc, A @ inc)}
    two = DGModule(G, 0, 1, (n, n - 1), {1: inc}, acts)
    two.check()
    return {"zero": DGModule.zero(G), "Q": Q, "QW": R, "Q+QW": Q.direct_sum(R), "two_term": two}


# -- dg categories over E(C2, 2) -----------------------------------------------------

def random_formality_category(rng: random.Random, acyclic: bool, max_power: int = 2,
                              scramble: bool = True):
    """E(C2, k) tensor a square-zero dg algebra Q + Q^r[1] + Q^s[2].

    With an invertible differential A_2 -> A_1 the positive part is acyclic;
    otherwise H_1 != 0.  The hom bases are then scrambled at random.
    """
    E = build_Ea(group_from_spec("C2"), max_power)
    r = rng.randint(1, 2)
    if acyclic:
        d12 = rand_invertible(rng, r)
        s = r
    else:
        s = rng.randint(0, r)
        # rank strictly below r so that H_1 = coker has positive dimension
        if s == 0:
            d12 = MatQ.zeros(r, 0)
        else:
            rank = rng.randint(0, min(r, s) if min(r, s) < r else r - 1)
            A = rand_matrix(rng, r, rank)
            B = rand_matrix(rng, rank, s)
            d12 = A @ B if rank else MatQ.zeros(r, s)
    C = tensor_with_algebra(E.materialize(), square_zero_algebra(d12))
    if scramble:
        P = {}
        for a in range(C.size):
            for b in range(C.size):
                H = C.hom(a, b)
                blocks = [rand_unimodular(rng, H.dim(n)) for n in H.degrees if H.dim(n)]
                P[(a, b)] = block_diag(blocks) if blocks else MatQ.zeros(0, 0)
        C = change_hom_bases(C, P)
    return C


# -- twisted modules over QC3 ---------------------------------------------------------

def qc3_involution():
    return inversion_involution(group_from_spec("C3"))


def random_twisted_module(rng: random.Random, w=None) -> TwistedModule:
    """A random sum of the basic twisted modules over (QC3, inversion), in a scrambled basis."""
    w = w or qc3_involution()
    R = w.algebra
    pieces = []
    aug = tuple(MatQ([[1]]) for _ in range(R.dim))
    for _ in range(rng.randint(1, 3)):
        kind = rng.choice(["regular", "plus", "minus", "regular_neg"])
        if kind == "regular":
            pieces.append(regular_twisted(w))
        elif kind == "regular_neg":
            M = regular_twisted(w)
            pieces.append(TwistedModule(w, M.action, M.u.scale(-1)))
        else:
            pieces.append(TwistedModule(w, aug, MatQ([[1 if kind == "plus" else -1]])))
    M = pieces[0]
    for p in pieces[1:]:
        M = M.direct_sum(p)
    if rng.random() < 0.8:
        M = M.conjugate(rand_invertible(rng, M.dim))
    M.check()
    return M


def adjunction_triple(rng: random.Random, X: DGModule | None = None):
    """(X, Y, Z) with Z shifted to overlap the degrees of X (x) Y, so that chain maps can exist."""
    X = X if X is not None else random_c2_complex(rng, max_dim=3, max_len=3)
    Y = random_c2_complex(rng, lo_range=(-1, 1), max_dim=2, max_len=2)
    Z = random_c2_complex(rng, lo_range=(0, 3), max_dim=3, max_len=3)
    Z = Z.shift(X.lo + Y.lo - Z.lo + rng.randint(-1, 1))
    return X, Y, Z
