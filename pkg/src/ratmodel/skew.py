"""Skew group rings R#C2 for an order-two ring involution, and twisted modules.

An algebra is stored by its left multiplication matrices: ``left[i]`` has
column ``j`` equal to ``e_i e_j``.  The skew ring ``R#C2`` has basis
``1.r_i`` (indices ``0..n-1``) followed by ``h.r_i`` (indices ``n..2n-1``)
with ``(g r)(g' s) = (g g')(r^{g'} s)``, where ``r^h = w(r)``.

A twisted module is an R-module ``M`` with ``u: M -> M`` such that ``u^2 = 1``
and ``u(r m) = w(r) u(m)``.  These are the same thing as R#C2-modules, with h
acting by ``u``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .exactq import (MatQ, ZERO, ONE, SparseEchelon, block_diag, kernel_basis, kronecker, unit_vector,
                     vstack)
from .permgrp import PermGroup, dihedral_generators, format_perm, group_from_spec


class AlgebraError(ValueError):
    pass


class InvolutionError(AlgebraError):
    pass


class TwistError(AlgebraError):
    pass


def _comb(mats: Sequence[MatQ], coeffs: Sequence, size: int) -> MatQ:
    out = MatQ.zeros(size, size)
    for c, A in zip(coeffs, mats):
        if c:
            out = out + A.scale(c)
    return out


@dataclass(frozen=True, eq=False)
class FinAlgebra:
    dim: int
    labels: tuple[str, ...]
    left: tuple[MatQ, ...]
    unit: tuple

    def mul(self, u: Sequence, v: Sequence) -> tuple:
        return self.left_matrix(u).apply(v)

    def left_matrix(self, u: Sequence) -> MatQ:
        return _comb(self.left, u, self.dim)

    def basis_product(self, i: int, j: int) -> tuple:
        return self.left[i].column(j)

    def check(self) -> None:
        n = self.dim
        if len(self.left) != n or any(A.shape != (n, n) for A in self.left):
            raise AlgebraError("need one n x n left multiplication matrix per basis element")
        if self.left_matrix(self.unit) != MatQ.identity(n):
            raise AlgebraError("unit is not a left unit")
        for i in range(n):
            if self.left[i].apply(self.unit) != unit_vector(n, i):
                raise AlgebraError(f"unit is not a right unit for basis element {i}")
        # (e_i e_j) x = e_i (e_j x) for all x is L_{e_i e_j} = L_i L_j
        for i in range(n):
            for j in range(n):
                if self.left_matrix(self.basis_product(i, j)) != self.left[i] @ self.left[j]:
                    raise AlgebraError(f"not associative at ({i}, {j})")

    def is_commutative(self) -> bool:
        return all(self.basis_product(i, j) == self.basis_product(j, i)
                   for i in range(self.dim) for j in range(i))

    def center(self) -> MatQ:
        """Columns spanning {x : x e_j = e_j x for all j}."""
        n = self.dim
        # x e_j = sum_i x_i e_i e_j, e_j x = L_j x
        rows = []
        for j in range(n):
            right = MatQ.from_columns([self.basis_product(i, j) for i in range(n)], n)
            rows.append(right - self.left[j])
        return kernel_basis(vstack(rows, n))

    def center_dim(self) -> int:
        return self.center().cols

    def structure_table(self) -> list[list[tuple]]:
        return [[self.basis_product(i, j) for j in range(self.dim)] for i in range(self.dim)]


def group_algebra(G: PermGroup, prefix: str = "g") -> FinAlgebra:
    n = G.order
    left = tuple(MatQ.permutation([G.mul(i, j) for j in range(n)]) for i in range(n))
    labels = tuple(f"{prefix}{i}" for i in range(n))
    return FinAlgebra(n, labels, left, unit_vector(n, 0))


def trivial_algebra() -> FinAlgebra:
    return FinAlgebra(1, ("1",), (MatQ.identity(1),), (ONE,))


@dataclass(frozen=True, eq=False)
class Involution:
    algebra: FinAlgebra
    matrix: MatQ

    def __call__(self, r: Sequence) -> tuple:
        return self.matrix.apply(r)

    def check(self) -> None:
        R, w = self.algebra, self.matrix
        if w.shape != (R.dim, R.dim):
            raise InvolutionError("involution matrix has the wrong shape")
        if w @ w != MatQ.identity(R.dim):
            raise InvolutionError("w^2 is not the identity")
        if w.apply(R.unit) != tuple(R.unit):
            raise InvolutionError("w does not fix the unit")
        for i in range(R.dim):
            for j in range(R.dim):
                lhs = w.apply(R.basis_product(i, j))
                rhs = R.mul(w.column(i), w.column(j))
                if lhs != rhs:
                    raise InvolutionError(f"w is not multiplicative at ({i}, {j})")

    def is_valid(self) -> bool:
        try:
            self.check()
        except InvolutionError:
            return False
        return True


def identity_involution(R: FinAlgebra) -> Involution:
    return Involution(R, MatQ.identity(R.dim))


def inversion_involution(G: PermGroup, prefix: str = "g") -> Involution:
    """g -> g^-1 on QG; a ring map exactly when G is abelian."""
    return Involution(group_algebra(G, prefix), MatQ.permutation([G.inv(i) for i in range(G.order)]))


@dataclass(frozen=True, eq=False)
class SkewAlgebra:
    base: FinAlgebra
    involution: Involution
    algebra: FinAlgebra

    @property
    def dim(self) -> int:
        return self.algebra.dim

    def one(self, r: Sequence) -> tuple:
        """1.r as a vector."""
        return tuple(r) + (ZERO,) * self.base.dim

    def h(self, r: Sequence) -> tuple:
        """h.r as a vector."""
        return (ZERO,) * self.base.dim + tuple(r)

    @property
    def h_element(self) -> tuple:
        return self.h(self.base.unit)


def skew_group_ring(R: FinAlgebra, w: Involution) -> SkewAlgebra:
    """R#C2 with (g r)(g' s) = (g g')(r^{g'} s)."""
    if w.algebra is not R:
        raise InvolutionError("involution belongs to a different algebra")
    w.check()
    n = R.dim
    left = []
    for gi in (0, 1):
        for i in range(n):
            cols = []
            for gj in (0, 1):
                for j in range(n):
                    r = unit_vector(n, i)
                    if gj:
                        r = w(r)
                    rs = R.mul(r, unit_vector(n, j))
                    g = gi ^ gj
                    cols.append(tuple(rs) + (ZERO,) * n if g == 0 else (ZERO,) * n + tuple(rs))
            left.append(MatQ.from_columns(cols, 2 * n))
    labels = tuple(f"1.{x}" for x in R.labels) + tuple(f"h.{x}" for x in R.labels)
    alg = FinAlgebra(2 * n, labels, tuple(left), tuple(R.unit) + (ZERO,) * n)
    alg.check()
    return SkewAlgebra(R, w, alg)


# -- dihedral identification ------------------------------------------------------

@dataclass
class DihedralReport:
    n: int
    dim: int
    verified: bool
    matrix: MatQ                    # columns: images of the group basis of QD_2n
    source_labels: tuple[str, ...]
    target_labels: tuple[str, ...]

    def to_json(self) -> dict:
        return {"n": self.n, "dim": self.dim, "verified": self.verified,
                "source": list(self.source_labels), "target": list(self.target_labels),
                "matrix": self.matrix.to_json()}

    def to_text(self) -> str:
        lines = [f"iso {'verified' if self.verified else 'FAILED'}, dim {self.dim}",
                 "\t".join(["element"] + list(self.target_labels))]
        for j, lab in enumerate(self.source_labels):
            lines.append("\t".join([lab] + [str(x) for x in self.matrix.column(j)]))
        return "\n".join(lines) + "\n"


def dihedral_iso_check(n: int) -> DihedralReport:
    """QD_2n -> QC_n # C2 sending the rotation to 1.g and the reflection to h.1."""
    D = group_from_spec(f"D{2 * n}")
    _, rot, ref = dihedral_generators(n)
    Cn = group_from_spec(f"C{n}")
    w = inversion_involution(Cn, prefix="c")
    S = skew_group_ring(w.algebra, w)
    A = S.algebra
    gen = Cn.index(tuple((x + 1) % n for x in range(n)))
    rot_img = S.one(unit_vector(n, gen))
    ref_img = S.h_element
    r_i, s_i = D.index(rot), D.index(ref)
    images: dict[int, tuple] = {}
    # every element is rot^a ref^b
    x, xi = A.unit, 0
    for a in range(n):
        for b in (0, 1):
            g = xi if b == 0 else D.mul(xi, s_i)
            img = x if b == 0 else A.mul(x, ref_img)
            images.setdefault(g, img)
        xi = D.mul(xi, r_i)
        x = A.mul(x, rot_img)
    ok = len(images) == D.order == A.dim
    dim = A.dim
    if ok:
        Phi = MatQ.from_columns([images[g] for g in range(D.order)], dim)
        ok = Phi.is_invertible() and Phi.apply(unit_vector(dim, 0)) == tuple(A.unit)
        if ok:
            for g in range(D.order):
                for k in range(D.order):
                    if images[D.mul(g, k)] != A.mul(images[g], images[k]):
                        ok = False
                        break
                if not ok:
                    break
    else:
        Phi = MatQ.zeros(dim, D.order)
    labels = tuple("e" if g == 0 else format_perm(D.elements[g]) for g in range(D.order))
    return DihedralReport(n, dim, ok, Phi, labels, A.labels)


# -- modules ----------------------------------------------------------------------

def _intertwiner_dim(As: Sequence[MatQ], Bs: Sequence[MatQ], m: int, n: int) -> int:
    """dim {X : n x m, X A_k = B_k X for all k}, X vectorized row-major."""
    if not As:
        return m * n
    rows = [kronecker(MatQ.identity(n), A.T) - kronecker(B, MatQ.identity(m)) for A, B in zip(As, Bs)]
    return kernel_basis(vstack(rows, m * n)).cols


@dataclass(frozen=True, eq=False)
class AlgebraModule:
    """A left module over a FinAlgebra, one action matrix per basis element."""
    algebra: FinAlgebra
    action: tuple[MatQ, ...]

    @property
    def dim(self) -> int:
        return self.action[0].rows if self.action else 0

    def act(self, r: Sequence) -> MatQ:
        return _comb(self.action, r, self.dim)

    def check(self) -> None:
        A = self.algebra
        if len(self.action) != A.dim:
            raise AlgebraError("need one action matrix per basis element")
        if self.act(A.unit) != MatQ.identity(self.dim):
            raise AlgebraError("unit does not act as the identity")
        for i in range(A.dim):
            for j in range(A.dim):
                if self.act(A.basis_product(i, j)) != self.action[i] @ self.action[j]:
                    raise AlgebraError(f"action is not multiplicative at ({i}, {j})")


def module_hom_dim(M: AlgebraModule, N: AlgebraModule) -> int:
    return _intertwiner_dim(M.action, N.action, M.dim, N.dim)


@dataclass(frozen=True, eq=False)
class TwistedModule:
    involution: Involution
    action: tuple[MatQ, ...]
    u: MatQ

    @property
    def algebra(self) -> FinAlgebra:
        return self.involution.algebra

    @property
    def dim(self) -> int:
        return self.u.rows

    def act(self, r: Sequence) -> MatQ:
        return _comb(self.action, r, self.dim)

    def check(self) -> None:
        AlgebraModule(self.algebra, self.action).check() if self.action else None
        n = self.dim
        if self.u @ self.u != MatQ.identity(n):
            raise TwistError("twist does not square to the identity")
        w = self.involution
        for i in range(self.algebra.dim):
            if self.u @ self.action[i] != self.act(w(unit_vector(self.algebra.dim, i))) @ self.u:
                raise TwistError(f"twist is not semilinear for basis element {i}")

    def is_valid(self) -> bool:
        try:
            self.check()
        except AlgebraError:
            return False
        return True

    def conjugate(self, P: MatQ) -> "TwistedModule":
        Pi = P.inverse()
        return TwistedModule(self.involution, tuple(P @ A @ Pi for A in self.action), P @ self.u @ Pi)

    def direct_sum(self, other: "TwistedModule") -> "TwistedModule":
        return TwistedModule(self.involution,
                             tuple(block_diag([a, b]) for a, b in zip(self.action, other.action)),
                             block_diag([self.u, other.u]))


def twisted_hom_dim(M: TwistedModule, N: TwistedModule) -> int:
    """R-linear maps commuting with the twists."""
    return _intertwiner_dim(list(M.action) + [M.u], list(N.action) + [N.u], M.dim, N.dim)


def regular_twisted(w: Involution) -> TwistedModule:
    """(R, w): R acting on itself by left multiplication, twisted by w."""
    R = w.algebra
    return TwistedModule(w, R.left, w.matrix)


def twist_to_skew(M: TwistedModule, S: SkewAlgebra) -> AlgebraModule:
    """1.r acts as r, h.r acts as u r."""
    M.check()
    if S.involution is not M.involution:
        raise TwistError("twisted module and skew ring use different involutions")
    acts = tuple(M.action) + tuple(M.u @ A for A in M.action)
    out = AlgebraModule(S.algebra, acts)
    out.check()
    return out


def skew_to_twist(N: AlgebraModule, S: SkewAlgebra) -> TwistedModule:
    """r acts as 1.r and the twist is the action of h.1."""
    N.check()
    n = S.base.dim
    acts = tuple(N.action[:n])
    u = N.act(S.h_element)
    out = TwistedModule(S.involution, acts, u)
    out.check()
    return out


# -- tensor products --------------------------------------------------------------

@dataclass
class TwistedTensor:
    module: TwistedModule
    basis: list[tuple[int, int]]          # basis pairs (i, j) of M (x) N kept in the quotient
    echelon: SparseEchelon
    left_dim: int
    right_dim: int

    def project(self, vec: dict[int, Fraction]) -> tuple:
        r = self.echelon.reduce(vec)
        pos = {i * self.right_dim + j: k for k, (i, j) in enumerate(self.basis)}
        out = [ZERO] * len(self.basis)
        for k, x in r.items():
            out[pos[k]] = x
        return tuple(out)


def twisted_tensor(M: TwistedModule, N: TwistedModule) -> TwistedTensor:
    """M (x)_R N with R acting through the left factor and twist u (x) v.

    Well-definedness of both on the quotient is checked, not assumed.
    """
    R = M.algebra
    if N.involution is not M.involution:
        raise TwistError("modules use different involutions")
    if not R.is_commutative():
        raise AlgebraError("twisted tensor product needs a commutative algebra")
    m, n = M.dim, N.dim
    ech = SparseEchelon(m * n)
    relations = []
    # r m (x) n - m (x) r n
    for r in range(R.dim):
        A, B = M.action[r], N.action[r]
        for i in range(m):
            for j in range(n):
                vec: dict = {}
                for k in range(m):
                    if A[k, i]:
                        vec[k * n + j] = vec.get(k * n + j, ZERO) + A[k, i]
                for k in range(n):
                    if B[k, j]:
                        vec[i * n + k] = vec.get(i * n + k, ZERO) - B[k, j]
                vec = {a: b for a, b in vec.items() if b}
                if vec:
                    relations.append(vec)
                    ech.add(vec)
    keep = ech.complement()
    basis = [divmod(k, n) for k in keep]
    T = TwistedTensor(None, basis, ech, m, n)   # module filled in below

    def op(L: MatQ, Rm: MatQ) -> MatQ:
        big = kronecker(L, Rm)
        for rel in relations:
            img = {}
            for k, x in rel.items():
                for t in range(m * n):
                    if big[t, k]:
                        img[t] = img.get(t, ZERO) + x * big[t, k]
            if not ech.contains({a: b for a, b in img.items() if b}):
                raise TwistError("operator does not descend to the tensor product over R")
        cols = [T.project({t: big[t, k] for t in range(m * n) if big[t, k]}) for k in keep]
        return MatQ.from_columns(cols, len(keep)) if cols else MatQ.zeros(0, 0)

    acts = tuple(op(A, MatQ.identity(n)) for A in M.action)
    u = op(M.u, N.u)
    T.module = TwistedModule(M.involution, acts, u)
    T.module.check()
    return T


def tensor_unit_map(T: TwistedTensor, M: TwistedModule) -> MatQ:
    """M (x)_R (R, w) -> M, m (x) r -> r m."""
    cols = []
    for i, j in T.basis:
        cols.append(M.action[j].column(i))
    return MatQ.from_columns(cols, M.dim) if cols else MatQ.zeros(M.dim, 0)


def tensor_symmetry_map(T: TwistedTensor, TT: TwistedTensor) -> MatQ:
    """M (x)_R N -> N (x)_R M, m (x) n -> n (x) m."""
    cols = []
    for i, j in T.basis:
        cols.append(TT.project({j * TT.right_dim + i: ONE}))
    return MatQ.from_columns(cols, len(TT.basis)) if cols else MatQ.zeros(0, 0)


def is_twisted_map(f: MatQ, M: TwistedModule, N: TwistedModule) -> bool:
    """f commutes with the R-actions and the twists."""
    if f.shape != (N.dim, M.dim):
        return False
    if f @ M.u != N.u @ f:
        return False
    return all(f @ A == B @ f for A, B in zip(M.action, N.action))
