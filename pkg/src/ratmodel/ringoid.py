"""Finite dg categories over Q and the endomorphism category E_a(W).

Every hom is a :class:`~ratmodel.dgmod.DGModule` over the trivial group.
Elements of a hom are vectors in its *total* basis: the degree-``lo`` basis
first, then degree ``lo+1`` and so on.  Composition for a triple
``(a, b, c)`` is a matrix ``T`` with ``T @ kron(f, g) = f o g`` for
``f`` in hom(b, c) and ``g`` in hom(a, b).

E_a(W) has objects ``sigma_i = Q(W^i)``.  Its homs are the W-invariant linear
maps, with basis the orbit sums of matrix units ``E_{y,x}`` (``x -> y``)
under the diagonal action ``g.(y, x) = (gy, gx)``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

from .exactq import (MatQ, ZERO, ONE, DimensionError, bilinear_transport, block_diag, kernel_basis,
                     solve_exact, unit_vector, format_rational, parse_rational)
from .dgmod import DGModule, DGMap, cover_degree_zero, homology, homology_dims, is_quasi_iso, tensor
from .permgrp import PermGroup, trivial_group

DEFAULT_SIZE_BOUND = 50_000


class CategoryError(ValueError):
    """Composition data violating a category axiom; ``where`` names the triple."""

    def __init__(self, message: str, where=None):
        super().__init__(message if where is None else f"{message} at {where}")
        self.where = where


class FunctorError(ValueError):
    def __init__(self, message: str, where=None):
        super().__init__(message if where is None else f"{message} at {where}")
        self.where = where


class TruncationError(ValueError):
    pass


# -- total-basis helpers -------------------------------------------------------

def basis_degrees(M: DGModule) -> list[int]:
    return [n for n in M.degrees for _ in range(M.dim(n))]


def degree_offsets(M: DGModule) -> dict[int, int]:
    out, off = {}, 0
    for n in M.degrees:
        out[n] = off
        off += M.dim(n)
    return out


def total_differential(M: DGModule) -> MatQ:
    off = degree_offsets(M)
    N = M.total_dim
    entries = {}
    for n in range(M.lo + 1, M.hi + 1):
        D = M.diff(n)
        for i, row in enumerate(D):
            for j, x in enumerate(row):
                if x:
                    entries[(off[n - 1] + i, off[n] + j)] = x
    return MatQ.from_sparse(N, N, entries)


def sign_matrix(M: DGModule) -> MatQ:
    degs = basis_degrees(M)
    return MatQ.permutation(list(range(len(degs))), [(-1) ** (n % 2) for n in degs])


def total_map(f: DGMap) -> MatQ:
    """Block matrix of a degree-0 chain map between total bases."""
    S, T = f.source, f.target
    so, to = degree_offsets(S), degree_offsets(T)
    entries = {}
    for n in S.degrees:
        if not T.lo <= n <= T.hi:
            continue
        for i, row in enumerate(f.at(n)):
            for j, x in enumerate(row):
                if x:
                    entries[(to[n] + i, so[n] + j)] = x
    return MatQ.from_sparse(T.total_dim, S.total_dim, entries)


def split_total_map(A: MatQ, S: DGModule, T: DGModule) -> DGMap:
    so, to = degree_offsets(S), degree_offsets(T)
    comps = {}
    for n in S.degrees:
        r = T.dim(n)
        c = S.dim(n)
        if r == 0:
            comps[n] = MatQ.zeros(0, c)
            continue
        rows = [A.row(to[n] + i)[so[n]:so[n] + c] for i in range(r)]
        comps[n] = MatQ(rows, cols=c)
    return DGMap(S, T, comps)


# -- dg categories -----------------------------------------------------------

class DGCategory:
    """A finite dg category with explicit hom complexes and composition tables."""

    def __init__(self, objects: Sequence[str], homs: Mapping[tuple[int, int], DGModule],
                 compose: Mapping[tuple[int, int, int], MatQ] | None = None,
                 identities: Mapping[int, Sequence] | None = None):
        self.objects = list(objects)
        self._homs = dict(homs)
        self._compose = dict(compose or {})
        self._ids = {a: tuple(Fraction(x) for x in v) for a, v in (identities or {}).items()}

    def __repr__(self) -> str:
        return f"<{type(self).__name__} with {len(self.objects)} objects>"

    @property
    def size(self) -> int:
        return len(self.objects)

    def hom(self, a: int, b: int) -> DGModule:
        return self._homs[(a, b)]

    def hom_dim(self, a: int, b: int) -> int:
        return self.hom(a, b).total_dim

    def compose_matrix(self, a: int, b: int, c: int) -> MatQ:
        return self._compose[(a, b, c)]

    def compose_basis(self, a: int, b: int, c: int, i: int, j: int) -> dict[int, Fraction]:
        """f_i o g_j for basis vectors f_i of hom(b, c) and g_j of hom(a, b), sparse."""
        T = self.compose_matrix(a, b, c)
        col = i * self.hom_dim(a, b) + j
        return {k: T[k, col] for k in range(T.rows) if T[k, col]}

    def compose(self, a: int, b: int, c: int, f: Sequence, g: Sequence) -> tuple:
        out = [ZERO] * self.hom_dim(a, c)
        for i, x in enumerate(f):
            if not x:
                continue
            for j, y in enumerate(g):
                if not y:
                    continue
                for k, z in self.compose_basis(a, b, c, i, j).items():
                    out[k] += x * y * z
        return tuple(out)

    def identity(self, a: int) -> tuple:
        return self._ids[a]

    def basis_degree(self, a: int, b: int, i: int) -> int:
        return basis_degrees(self.hom(a, b))[i]

    # -- validation ----------------------------------------------------

    def check(self, associativity: bool = True) -> None:
        n = self.size
        for a in range(n):
            self.hom(a, a).check()
            e = self.identity(a)
            De = total_differential(self.hom(a, a)).apply(e)
            if any(De) or any(x and d != 0 for x, d in zip(e, basis_degrees(self.hom(a, a)))):
                raise CategoryError("identity is not a degree-0 cycle", a)
        for a, b, c in itertools.product(range(n), repeat=3):
            self._check_triple(a, b, c)
        if associativity:
            for a, b, c, d in itertools.product(range(n), repeat=4):
                self._check_assoc(a, b, c, d)

    def _check_triple(self, a, b, c):
        Hab, Hbc, Hac = self.hom(a, b), self.hom(b, c), self.hom(a, c)
        T = self.compose_matrix(a, b, c)
        if T.shape != (Hac.total_dim, Hbc.total_dim * Hab.total_dim):
            raise CategoryError("composition table has the wrong shape", (a, b, c))
        dab, dbc, dac = basis_degrees(Hab), basis_degrees(Hbc), basis_degrees(Hac)
        m = len(dab)
        for k, row in enumerate(T):
            for col, x in enumerate(row):
                if x and dac[k] != dbc[col // m] + dab[col % m]:
                    raise CategoryError("composition does not preserve degree", (a, b, c))
        lhs = total_differential(Hac) @ T
        rhs = (bilinear_transport(T, total_differential(Hbc), MatQ.identity(m))
               + bilinear_transport(T, sign_matrix(Hbc), total_differential(Hab)))
        if lhs != rhs:
            raise CategoryError("composition is not a chain map", (a, b, c))
        # unit laws
        if a == b or b == c:
            for i in range(Hbc.total_dim if a == b else 0):
                f = unit_vector(Hbc.total_dim, i)
                if self.compose(a, a, c, f, self.identity(a)) != f:
                    raise CategoryError("right unit law fails", (a, b, c))
            for j in range(Hab.total_dim if b == c else 0):
                g = unit_vector(Hab.total_dim, j)
                if self.compose(a, c, c, self.identity(c), g) != g:
                    raise CategoryError("left unit law fails", (a, b, c))

    def _check_assoc(self, a, b, c, d):
        """h o (g o f) = (h o g) o f on all basis triples."""
        dab, dbc, dcd = self.hom_dim(a, b), self.hom_dim(b, c), self.hom_dim(c, d)
        for i in range(dcd):
            for j in range(dbc):
                hg = self.compose_basis(b, c, d, i, j)
                for k in range(dab):
                    gf = self.compose_basis(a, b, c, j, k)
                    left: dict = {}
                    for u, x in gf.items():
                        for t, y in self.compose_basis(a, c, d, i, u).items():
                            left[t] = left.get(t, ZERO) + x * y
                    right: dict = {}
                    for u, x in hg.items():
                        for t, y in self.compose_basis(a, b, d, u, k).items():
                            right[t] = right.get(t, ZERO) + x * y
                    if {t: v for t, v in left.items() if v} != {t: v for t, v in right.items() if v}:
                        raise CategoryError("composition is not associative", (a, b, c, d))

    def is_valid(self, associativity: bool = True) -> bool:
        try:
            self.check(associativity)
        except CategoryError:
            return False
        return True

    # -- derived categories --------------------------------------------

    def materialize(self) -> "DGCategory":
        n = self.size
        return DGCategory(self.objects, {(a, b): self.hom(a, b) for a in range(n) for b in range(n)},
                          {t: self.compose_matrix(*t) for t in itertools.product(range(n), repeat=3)},
                          {a: self.identity(a) for a in range(n)})

    def full_subcategory(self, keep: Sequence[int]) -> "DGCategory":
        keep = list(keep)
        homs = {(i, j): self.hom(a, b) for i, a in enumerate(keep) for j, b in enumerate(keep)}
        comp = {(i, j, k): self.compose_matrix(a, b, c)
                for (i, a), (j, b), (k, c) in itertools.product(enumerate(keep), repeat=3)}
        ids = {i: self.identity(a) for i, a in enumerate(keep)}
        return DGCategory([self.objects[a] for a in keep], homs, comp, ids)

    def homology_dims(self) -> dict[tuple[int, int], dict[int, int]]:
        return {(a, b): homology_dims(self.hom(a, b)) for a in range(self.size) for b in range(self.size)}

    # -- JSON ----------------------------------------------------------

    def to_json(self) -> dict:
        n = self.size
        return {
            "objects": list(self.objects),
            "homs": {f"{a},{b}": self.hom(a, b).to_json("C1") for a in range(n) for b in range(n)},
            "compose": {f"{a},{b},{c}": _sparse_json(self.compose_matrix(a, b, c))
                        for a, b, c in itertools.product(range(n), repeat=3)},
            "identities": {str(a): [format_rational(x) for x in self.identity(a)] for a in range(n)},
        }

    @classmethod
    def from_json(cls, data: dict, check: bool = True) -> "DGCategory":
        try:
            objects = list(data["objects"])
            n = len(objects)
            homs = {}
            for a in range(n):
                for b in range(n):
                    h = dict(data["homs"][f"{a},{b}"])
                    h.setdefault("group", "C1")
                    homs[(a, b)] = DGModule.from_json(h)
            comp = {}
            for a, b, c in itertools.product(range(n), repeat=3):
                shape = (homs[(a, c)].total_dim, homs[(b, c)].total_dim * homs[(a, b)].total_dim)
                comp[(a, b, c)] = _sparse_from_json(data["compose"][f"{a},{b},{c}"], shape)
            ids = {a: tuple(parse_rational(x) for x in data["identities"][str(a)]) for a in range(n)}
        except KeyError as e:
            raise CategoryError(f"missing entry {e.args[0]!r}") from None
        C = cls(objects, homs, comp, ids)
        if check:
            C.check()
        return C


def _sparse_json(T: MatQ) -> dict:
    return {"shape": [T.rows, T.cols],
            "entries": [[i, j, format_rational(x)] for i, row in enumerate(T) for j, x in enumerate(row) if x]}


def _sparse_from_json(data, shape) -> MatQ:
    if isinstance(data, list):
        return MatQ.from_json(data, *shape)
    if list(data["shape"]) != list(shape):
        raise CategoryError(f"composition shape {data['shape']} does not match {list(shape)}")
    return MatQ.from_sparse(shape[0], shape[1],
                            {(int(i), int(j)): parse_rational(x) for i, j, x in data["entries"]})


class GradedQCategory(DGCategory):
    """A dg category whose differentials all vanish."""

    def check(self, associativity: bool = True) -> None:
        for a in range(self.size):
            for b in range(self.size):
                if not total_differential(self.hom(a, b)).is_zero():
                    raise CategoryError("graded category with nonzero differential", (a, b))
        super().check(associativity)


class MonoidalDGCategory(DGCategory):
    """A dg category with a strict product on objects and a product pairing on homs."""

    def __init__(self, *args, unit: int = 0, **kw):
        super().__init__(*args, **kw)
        self.unit = unit

    def tensor_object(self, a: int, b: int) -> int:
        raise NotImplementedError

    def product_basis(self, a, c, b, d, i, j) -> dict[int, Fraction]:
        """f_i (x) g_j for f_i in hom(a, c), g_j in hom(b, d), in hom(a(x)b, c(x)d)."""
        raise NotImplementedError

    def product(self, a, c, b, d, f: Sequence, g: Sequence) -> tuple:
        ab, cd = self.tensor_object(a, b), self.tensor_object(c, d)
        out = [ZERO] * self.hom_dim(ab, cd)
        for i, x in enumerate(f):
            if x:
                for j, y in enumerate(g):
                    if y:
                        for k, z in self.product_basis(a, c, b, d, i, j).items():
                            out[k] += x * y * z
        return tuple(out)

    def symmetry(self, a: int, b: int) -> tuple:
        raise NotImplementedError


# -- E_a ---------------------------------------------------------------------

class EaCategory(MonoidalDGCategory):
    """Objects sigma_0..sigma_k with sigma_i = Q(W^i); homs are W-invariant maps.

    The basis of hom(sigma_i, sigma_j) is indexed by orbits of pairs
    ``(y, x)`` with y in W^j, x in W^i.  The normal form of an orbit is the
    concatenation ``t = y + x`` translated so that ``t[0] = e``; its index is
    the mixed-radix value of ``t[1:]``.  Composition tables are built lazily.
    """

    def __init__(self, W: PermGroup, max_power: int, size_bound: int = DEFAULT_SIZE_BOUND):
        if max_power < 0:
            raise ValueError("max_power must be non-negative")
        if W.order ** (2 * max_power - 1 if max_power else 0) > size_bound:
            raise DimensionError(f"|W|^(2k-1) = {W.order ** (2 * max_power - 1)} exceeds the size bound")
        self.W = W
        self.max_power = max_power
        super().__init__([f"sigma{i}" for i in range(max_power + 1)], {}, unit=0)
        self._cache: dict = {}
        self._comp_memo: dict = {}
        self._prod_memo: dict = {}

    # tuples <-> indices
    def _encode(self, t: Sequence[int]) -> int:
        k = 0
        for x in t:
            k = k * self.W.order + x
        return k

    def _decode(self, k: int, length: int) -> tuple[int, ...]:
        out = []
        for _ in range(length):
            k, x = divmod(k, self.W.order)
            out.append(x)
        return tuple(reversed(out))

    def _normal(self, t: Sequence[int]) -> tuple[int, ...]:
        if not t:
            return ()
        W = self.W
        gi = W.inv(t[0])
        return tuple(W.mul(gi, x) for x in t)

    def orbit_index(self, y: Sequence[int], x: Sequence[int]) -> int:
        t = self._normal(tuple(y) + tuple(x))
        return self._encode(t[1:])

    def orbit_rep(self, i: int, j: int, k: int) -> tuple[tuple[int, ...], tuple[int, ...]]:
        """Representative (y, x) of orbit k of hom(sigma_i, sigma_j), with t[0] = e."""
        if i + j == 0:
            return (), ()
        t = (0,) + self._decode(k, i + j - 1)
        return t[:j], t[j:]

    def _stab(self, length: int) -> int:
        return self.W.order if length == 0 else 1

    def hom_dim(self, a: int, b: int) -> int:
        return self.W.order ** (a + b - 1) if a + b else 1

    def hom(self, a: int, b: int) -> DGModule:
        key = ("hom", a, b)
        if key not in self._cache:
            self._cache[key] = DGModule(trivial_group(), 0, 0, (self.hom_dim(a, b),))
        return self._cache[key]

    def basis_degree(self, a, b, i) -> int:
        return 0

    def compose_basis(self, a, b, c, i, j) -> dict[int, Fraction]:
        """O_i o O_j for O_i in hom(b, c), O_j in hom(a, b).  The returned dict is shared; do not mutate."""
        key = (a, b, c, i, j)
        hit = self._comp_memo.get(key)
        if hit is None:
            hit = self._comp_memo[key] = self._compose_basis(a, b, c, i, j)
        return hit

    def _compose_basis(self, a, b, c, i, j) -> dict[int, Fraction]:
        W = self.W
        zc, yb = self.orbit_rep(b, c, i)
        ya, xa = self.orbit_rep(a, b, j)
        # O_B O_A = (1/|S_A||S_B|) sum_{u: u.yb = ya} |S_R| O(u.zc, xa)
        if b:
            u = W.mul(ya[0], W.inv(yb[0]))
            if any(W.mul(u, s) != t for s, t in zip(yb, ya)):
                return {}
            us = [u]
        else:
            us = range(W.order)
        scale = Fraction(1, self._stab(a + b) * self._stab(b + c))
        out: dict[int, Fraction] = {}
        for u in us:
            z = tuple(W.mul(u, s) for s in zc)
            k = self.orbit_index(z, xa)
            out[k] = out.get(k, ZERO) + scale * self._stab(a + c)
        return {k: v for k, v in out.items() if v}

    def compose_matrix(self, a, b, c) -> MatQ:
        key = ("comp", a, b, c)
        if key not in self._cache:
            nab, nbc = self.hom_dim(a, b), self.hom_dim(b, c)
            entries = {}
            for i in range(nbc):
                for j in range(nab):
                    for k, v in self.compose_basis(a, b, c, i, j).items():
                        entries[(k, i * nab + j)] = v
            self._cache[key] = MatQ.from_sparse(self.hom_dim(a, c), nbc * nab, entries)
        return self._cache[key]

    def identity(self, a: int) -> tuple:
        if a == 0:
            return (ONE,)
        v = [ZERO] * self.hom_dim(a, a)
        for x in itertools.product(range(self.W.order), repeat=a):
            v[self.orbit_index(x, x)] = ONE
        return tuple(v)

    # monoidal structure
    def tensor_object(self, a: int, b: int) -> int:
        if a + b > self.max_power:
            raise TruncationError(f"sigma{a} (x) sigma{b} = sigma{a + b} exceeds max power {self.max_power}")
        return a + b

    def product_basis(self, a, c, b, d, i, j) -> dict[int, Fraction]:
        self.tensor_object(a, b)
        self.tensor_object(c, d)
        key = (a, c, b, d, i, j)
        hit = self._prod_memo.get(key)
        if hit is None:
            hit = self._prod_memo[key] = self._product_basis(a, c, b, d, i, j)
        return hit

    def _product_basis(self, a, c, b, d, i, j) -> dict[int, Fraction]:
        W = self.W
        yA, xA = self.orbit_rep(a, c, i)
        yB, xB = self.orbit_rep(b, d, j)
        scale = Fraction(1, self._stab(a + c) * self._stab(b + d))
        out: dict[int, Fraction] = {}
        for u in range(W.order):
            y = yA + tuple(W.mul(u, s) for s in yB)
            x = xA + tuple(W.mul(u, s) for s in xB)
            k = self.orbit_index(y, x)
            out[k] = out.get(k, ZERO) + scale * self._stab(a + b + c + d)
        return {k: v for k, v in out.items() if v}

    def symmetry(self, a: int, b: int) -> tuple:
        """The block swap sigma_a (x) sigma_b -> sigma_b (x) sigma_a."""
        n = self.tensor_object(a, b)
        v = [ZERO] * self.hom_dim(n, n)
        for x in itertools.product(range(self.W.order), repeat=n):
            v[self.orbit_index(x[a:] + x[:a], x)] = ONE
        return tuple(v)

    # linear maps
    def hom_matrix(self, a: int, b: int, vec: Sequence) -> MatQ:
        """The |W|^b x |W|^a matrix of an element of hom(sigma_a, sigma_b)."""
        W = self.W
        entries = {}
        for k, c in enumerate(vec):
            if not c:
                continue
            y, x = self.orbit_rep(a, b, k)
            for g in range(W.order):
                gy = self._encode(tuple(W.mul(g, s) for s in y))
                gx = self._encode(tuple(W.mul(g, s) for s in x))
                # each matrix unit of the orbit appears |stab| times in the sum over g
                entries[(gy, gx)] = entries.get((gy, gx), ZERO) + c / self._stab(a + b)
        return MatQ.from_sparse(W.order ** b, W.order ** a, entries)

    def sigma(self, i: int) -> DGModule:
        """sigma_i as a W-module in degree 0, g acting diagonally by left multiplication."""
        key = ("sigma", i)
        if key not in self._cache:
            W = self.W
            n = W.order ** i

            def act(g, k):
                return self._encode(tuple(W.mul(g, s) for s in self._decode(k, i)))

            self._cache[key] = DGModule.permutation(W, n, act)
        return self._cache[key]

    def g_tilde(self, g: int) -> tuple:
        """Right multiplication x -> xg as an element of hom(sigma_1, sigma_1)."""
        v = [ZERO] * self.W.order
        v[self.orbit_index((g,), (0,))] = ONE
        return tuple(v)

    def check_monoidal(self, max_total: int | None = None) -> None:
        """Product is associative, unital and satisfies the interchange law on basis elements."""
        k = self.max_power if max_total is None else max_total
        objs = range(self.size)
        # interchange: (f' o f) (x) (g' o g) = (f' (x) g') o (f (x) g)
        for a, b, c, d, e, f in itertools.product(objs, repeat=6):
            if a + d > k or b + e > k or c + f > k:
                continue
            for i in range(self.hom_dim(a, b)):
                for i2 in range(self.hom_dim(b, c)):
                    left1 = self.compose_basis(a, b, c, i2, i)
                    for j in range(self.hom_dim(d, e)):
                        for j2 in range(self.hom_dim(e, f)):
                            left2 = self.compose_basis(d, e, f, j2, j)
                            lhs = self.product(a, c, d, f, _dense(left1, self.hom_dim(a, c)),
                                               _dense(left2, self.hom_dim(d, f)))
                            p1 = _dense(self.product_basis(b, c, e, f, i2, j2), self.hom_dim(b + e, c + f))
                            p0 = _dense(self.product_basis(a, b, d, e, i, j), self.hom_dim(a + d, b + e))
                            rhs = self.compose(a + d, b + e, c + f, p1, p0)
                            if lhs != rhs:
                                raise CategoryError("interchange law fails", (a, b, c, d, e, f))
        # unit: id_sigma0 (x) f = f
        for a, b in itertools.product(objs, repeat=2):
            for i in range(self.hom_dim(a, b)):
                f = unit_vector(self.hom_dim(a, b), i)
                if self.product(0, 0, a, b, self.identity(0), f) != f:
                    raise CategoryError("product is not unital", (a, b))
                if self.product(a, b, 0, 0, f, self.identity(0)) != f:
                    raise CategoryError("product is not unital", (a, b))


def _dense(v: Mapping[int, Fraction], n: int) -> tuple:
    out = [ZERO] * n
    for k, x in v.items():
        out[k] = x
    return tuple(out)


def build_Ea(W: PermGroup, max_power: int, size_bound: int = DEFAULT_SIZE_BOUND) -> EaCategory:
    return EaCategory(W, max_power, size_bound)


def decompose_power(W: PermGroup, i: int) -> tuple[int, MatQ]:
    """Q(W^i) as a sum of |W|^(i-1) regular modules.

    Column ``r * |W| + g`` of the returned permutation matrix is the basis
    tuple ``g . (e, r)`` where r runs over W^(i-1) in lexicographic order.
    """
    if i < 1:
        raise ValueError("power must be >= 1")
    n = W.order
    m = n ** (i - 1)
    E = EaCategory.__new__(EaCategory)
    E.W = W
    images = []
    for r in range(m):
        rep = (0,) + E._decode(r, i - 1)
        for g in range(n):
            images.append(E._encode(tuple(W.mul(g, s) for s in rep)))
    # column j of P is the basis vector images[j]
    P = MatQ.from_sparse(n ** i, n ** i, {(img, j): ONE for j, img in enumerate(images)})
    return m, P


def verify_decomposition(W: PermGroup, i: int) -> bool:
    m, P = decompose_power(W, i)
    E = build_Ea(W, max(i, 1))
    sig = E.sigma(i)
    R = DGModule.regular(W)
    Pinv = P.inverse()
    for g in range(1, W.order):
        block = block_diag([R.act(g, 0)] * m)
        if Pinv @ sig.act(g, 0) @ P != block:
            return False
    return True


# -- the ring hom(sigma_1, sigma_1) versus QW ------------------------------

def group_ring_product(W: PermGroup, u: Sequence, v: Sequence) -> tuple:
    out = [ZERO] * W.order
    for g, x in enumerate(u):
        if x:
            for h, y in enumerate(v):
                if y:
                    out[W.mul(g, h)] += x * y
    return tuple(out)


def verify_gtilde_inverse(E: EaCategory) -> bool:
    """Check that g~ -> g^-1 is a unital ring isomorphism hom(sigma_1, sigma_1) -> QW."""
    W = E.W
    images = {}
    for g in range(W.order):
        gt = E.g_tilde(g)
        # g~ is the linear map x -> xg
        M = E.hom_matrix(1, 1, gt)
        for x in range(W.order):
            if M.column(x) != unit_vector(W.order, W.mul(x, g)):
                return False
        images[gt.index(ONE)] = W.inv(g)
    if sorted(images) != list(range(W.order)):
        return False
    L = MatQ.from_sparse(W.order, W.order, {(images[k], k): ONE for k in images})
    if L.apply(E.identity(1)) != unit_vector(W.order, 0):
        return False
    for i in range(W.order):
        for j in range(W.order):
            prod = _dense(E.compose_basis(1, 1, 1, i, j), W.order)
            if L.apply(prod) != group_ring_product(W, unit_vector(W.order, images[i]),
                                                    unit_vector(W.order, images[j])):
                return False
    return True


def find_ring_isomorphism(E: EaCategory) -> dict[int, int] | None:
    """Search for a ring isomorphism hom(sigma_1, sigma_1) -> QW sending basis to group elements.

    The orbit basis of hom(sigma_1, sigma_1) is closed under composition, so
    a monomial isomorphism is a bijection of bases respecting products.  The
    search is a backtracking over generators of W in index order.
    """
    W = E.W
    n = W.order
    prod = [[next(iter(E.compose_basis(1, 1, 1, i, j))) for j in range(n)] for i in range(n)]
    one = E.identity(1).index(ONE)

    def extend(assign: dict[int, int]) -> dict[int, int] | None:
        # close under products; fail on conflict
        changed = True
        while changed:
            changed = False
            for i, gi in list(assign.items()):
                for j, gj in list(assign.items()):
                    k, g = prod[i][j], W.mul(gi, gj)
                    if k in assign:
                        if assign[k] != g:
                            return None
                    else:
                        if g in assign.values():
                            return None
                        assign[k] = g
                        changed = True
        return assign

    def search(assign):
        assign = extend(dict(assign))
        if assign is None:
            return None
        if len(assign) == n:
            return assign
        i = min(k for k in range(n) if k not in assign)
        for g in range(n):
            if g not in assign.values():
                found = search({**assign, i: g})
                if found:
                    return found
        return None

    return search({one: 0})


# -- functors ------------------------------------------------------------------

@dataclass
class DGFunctor:
    source: DGCategory
    target: DGCategory
    object_map: list[int]
    maps: dict[tuple[int, int], MatQ]

    def check(self) -> None:
        S, T, F = self.source, self.target, self.object_map
        n = S.size
        for a in range(n):
            e = self.maps[(a, a)].apply(S.identity(a))
            if e != T.identity(F[a]):
                raise FunctorError("identity not preserved", a)
        for a in range(n):
            for b in range(n):
                A = self.maps[(a, b)]
                Hs, Ht = S.hom(a, b), T.hom(F[a], F[b])
                ds, dt = basis_degrees(Hs), basis_degrees(Ht)
                for i, row in enumerate(A):
                    for j, x in enumerate(row):
                        if x and dt[i] != ds[j]:
                            raise FunctorError("map does not preserve degree", (a, b))
                if total_differential(Ht) @ A != A @ total_differential(Hs):
                    raise FunctorError("map is not a chain map", (a, b))
        for a, b, c in itertools.product(range(n), repeat=3):
            lhs = self.maps[(a, c)] @ S.compose_matrix(a, b, c)
            rhs = bilinear_transport(T.compose_matrix(F[a], F[b], F[c]), self.maps[(b, c)], self.maps[(a, b)])
            if lhs != rhs:
                raise FunctorError("composition not preserved", (a, b, c))

    def hom_map(self, a: int, b: int) -> DGMap:
        return split_total_map(self.maps[(a, b)], self.source.hom(a, b),
                               self.target.hom(self.object_map[a], self.object_map[b]))

    def compose(self, other: "DGFunctor") -> "DGFunctor":
        """self after other."""
        G = other.object_map
        maps = {(a, b): self.maps[(G[a], G[b])] @ other.maps[(a, b)] for (a, b) in other.maps}
        return DGFunctor(other.source, self.target, [self.object_map[x] for x in G], maps)

    @classmethod
    def identity(cls, C: DGCategory) -> "DGFunctor":
        n = C.size
        return cls(C, C, list(range(n)),
                   {(a, b): MatQ.identity(C.hom_dim(a, b)) for a in range(n) for b in range(n)})


def failing_homs(F: DGFunctor) -> list[tuple[int, int]]:
    bad = []
    n = F.source.size
    for a in range(n):
        for b in range(n):
            if not is_quasi_iso(_widen(F.hom_map(a, b))):
                bad.append((a, b))
    return bad


def _widen(f: DGMap) -> DGMap:
    """Pad source and target to a common degree range so homology comparisons line up."""
    S, T = f.source, f.target
    lo, hi = min(S.lo, T.lo), max(S.hi, T.hi)
    S2, T2 = _pad(S, lo, hi), _pad(T, lo, hi)
    comps = {n: f.at(n) if S.lo <= n <= S.hi else MatQ.zeros(T.dim(n), 0) for n in range(lo, hi + 1)}
    return DGMap(S2, T2, comps)


def _pad(M: DGModule, lo: int, hi: int) -> DGModule:
    if (M.lo, M.hi) == (lo, hi):
        return M
    dims = tuple(M.dim(n) for n in range(lo, hi + 1))
    d = {n: M.diff(n) for n in range(lo + 1, hi + 1)}
    return DGModule(M.group, lo, hi, dims, d, {})


def is_quasi_iso_functor(F: DGFunctor, check: bool = True) -> bool:
    if check:
        F.check()
    if sorted(F.object_map) != list(range(F.target.size)) or F.source.size != F.target.size:
        return False
    return not failing_homs(F)


# -- connective cover and homology categories ------------------------------

def _restrict_composition(C: DGCategory, incl: Mapping, a, b, c) -> MatQ:
    big = bilinear_transport(C.compose_matrix(a, b, c), incl[(b, c)], incl[(a, b)])
    x = solve_exact(incl[(a, c)], big)
    if x is None:
        raise CategoryError("composition leaves the subcomplex", (a, b, c))
    return x


def connective_cover(C: DGCategory) -> tuple[DGCategory, DGFunctor]:
    """Each hom replaced by its cover: X_n for n > 0, ker d_0 at 0, nothing below."""
    n = C.size
    homs, incl = {}, {}
    for a in range(n):
        for b in range(n):
            X = C.hom(a, b)
            C0, i = cover_degree_zero(X)
            homs[(a, b)] = C0
            incl[(a, b)] = total_map(i)
    comp = {t: _restrict_composition(C, incl, *t) for t in itertools.product(range(n), repeat=3)}
    ids = {}
    for a in range(n):
        x = solve_exact(incl[(a, a)], MatQ([[v] for v in C.identity(a)], cols=1))
        if x is None:
            raise CategoryError("identity is not in the cover", a)
        ids[a] = x.column(0)
    cover = DGCategory(C.objects, homs, comp, ids)
    return cover, DGFunctor(cover, C, list(range(n)), incl)


def homology_category(C: DGCategory) -> GradedQCategory:
    """Homs replaced by homology, composition induced on chosen representatives."""
    n = C.size
    H = {(a, b): homology(C.hom(a, b)) for a in range(n) for b in range(n)}
    homs, reps, proj = {}, {}, {}
    for key, h in H.items():
        homs[key] = DGModule(trivial_group(), h.lo, h.hi, h.dims)
        X = C.hom(*key)
        reps[key] = _total_block(X, homs[key], h.reps, rows_from_source=False)
        proj[key] = _total_block(X, homs[key], h.proj, rows_from_source=True)
    comp = {}
    for a, b, c in itertools.product(range(n), repeat=3):
        T = C.compose_matrix(a, b, c)
        comp[(a, b, c)] = proj[(a, c)] @ bilinear_transport(T, reps[(b, c)], reps[(a, b)])
        _check_well_defined(C, H, reps, proj, a, b, c)
    ids = {a: proj[(a, a)].apply(C.identity(a)) for a in range(n)}
    return GradedQCategory(C.objects, homs, comp, ids)


def _total_block(X: DGModule, Hm: DGModule, per: Mapping[int, MatQ], rows_from_source: bool) -> MatQ:
    """Assemble degreewise reps (X <- H) or projections (H <- X) into total matrices."""
    xo, ho = degree_offsets(X), degree_offsets(Hm)
    entries = {}
    for n in X.degrees:
        A = per[n]
        for i, row in enumerate(A):
            for j, x in enumerate(row):
                if x:
                    if rows_from_source:
                        entries[(ho[n] + i, xo[n] + j)] = x
                    else:
                        entries[(xo[n] + i, ho[n] + j)] = x
    if rows_from_source:
        return MatQ.from_sparse(Hm.total_dim, X.total_dim, entries)
    return MatQ.from_sparse(X.total_dim, Hm.total_dim, entries)


def _boundaries(X: DGModule) -> MatQ:
    D = total_differential(X)
    return D.column_space()


def _check_well_defined(C, H, reps, proj, a, b, c) -> None:
    """A boundary composed with a cycle is a boundary, in both slots."""
    T = C.compose_matrix(a, b, c)
    Bbc, Bab = _boundaries(C.hom(b, c)), _boundaries(C.hom(a, b))
    Dac = total_differential(C.hom(a, c))
    for left, right in ((Bbc, reps[(a, b)]), (reps[(b, c)], Bab)):
        if left.cols == 0 or right.cols == 0:
            continue
        img = bilinear_transport(T, left, right)
        if not (proj[(a, c)] @ img).is_zero() or not (Dac @ img).is_zero():
            raise CategoryError("induced composition is not well defined", (a, b, c))


def h0_category(C: DGCategory) -> DGCategory:
    """The degree-0 part of homology_category(C), as a category concentrated in degree 0."""
    HC = homology_category(C)
    n = C.size
    homs, sel = {}, {}
    for key in itertools.product(range(n), repeat=2):
        Hm = HC.hom(*key)
        off = degree_offsets(Hm)
        k = Hm.dim(0)
        homs[key] = DGModule(trivial_group(), 0, 0, (k,))
        sel[key] = [off[0] + i for i in range(k)] if 0 in off else []
    comp = {}
    for a, b, c in itertools.product(range(n), repeat=3):
        T = HC.compose_matrix(a, b, c)
        nab = HC.hom_dim(a, b)
        cols = [i * nab + j for i in sel[(b, c)] for j in sel[(a, b)]]
        comp[(a, b, c)] = MatQ([[T[r, col] for col in cols] for r in sel[(a, c)]], cols=len(cols))
    ids = {a: tuple(HC.identity(a)[i] for i in sel[(a, a)]) for a in range(n)}
    return DGCategory(C.objects, homs, comp, ids)


@dataclass
class FormalityReport:
    cover: DGCategory
    h0: DGCategory
    to_original: DGFunctor
    to_h0: DGFunctor
    original_ok: bool
    h0_ok: bool
    offending: list[tuple[int, int, dict[int, int]]] = field(default_factory=list)

    @property
    def verdict(self) -> bool:
        return self.original_ok and self.h0_ok

    def to_json(self, objects: Sequence[str]) -> dict:
        return {
            "verdict": self.verdict,
            "cover_to_original_quasi_iso": self.original_ok,
            "cover_to_h0_quasi_iso": self.h0_ok,
            "offending_homs": [{"source": objects[a], "target": objects[b],
                                "homology": {str(k): v for k, v in sorted(h.items())}}
                               for a, b, h in self.offending],
        }


def formality_zigzag(C: DGCategory, check_functors: bool = True) -> FormalityReport:
    """The zig-zag C <- C_0 C -> H_0 C with a quasi-isomorphism verdict for each leg."""
    n = C.size
    cover, incl = connective_cover(C)
    H0 = h0_category(C)
    maps = {}
    for a in range(n):
        for b in range(n):
            X = C.hom(a, b)
            h = homology(X)
            Y = cover.hom(a, b)
            off = degree_offsets(Y)
            k = H0.hom_dim(a, b)
            if k and 0 in off and Y.dim(0):
                # degree 0 of the cover is ker d_0 inside X_0; project to H_0
                basis0 = kernel_basis(X.diff(0))
                block = h.proj[0] @ basis0
                entries = {(i, off[0] + j): block[i, j] for i in range(block.rows)
                           for j in range(block.cols) if block[i, j]}
                maps[(a, b)] = MatQ.from_sparse(k, Y.total_dim, entries)
            else:
                maps[(a, b)] = MatQ.zeros(k, Y.total_dim)
    to_h0 = DGFunctor(cover, H0, list(range(n)), maps)
    if check_functors:
        incl.check()
        to_h0.check()
    bad_low = failing_homs(incl)
    bad_high = failing_homs(to_h0)
    offending = []
    for a, b in sorted(set(bad_low) | set(bad_high)):
        offending.append((a, b, {k: v for k, v in homology_dims(C.hom(a, b)).items() if k != 0}))
    return FormalityReport(cover, H0, incl, to_h0, not bad_low, not bad_high, offending)


# -- tensoring with a dg algebra -------------------------------------------------

@dataclass
class DGAlgebra:
    """A finite dg algebra: one-object dg category data."""

    module: DGModule
    mult: MatQ
    unit: tuple

    def as_category(self) -> DGCategory:
        return DGCategory(["*"], {(0, 0): self.module}, {(0, 0, 0): self.mult}, {0: self.unit})


def square_zero_algebra(d12: MatQ) -> DGAlgebra:
    """Q in degree 0, Q^r in degree 1, Q^s in degree 2, d: degree 2 -> degree 1, all positive products zero."""
    r, s = d12.shape
    dims = (1, r, s)
    M = DGModule(trivial_group(), 0, 2, dims, {1: MatQ.zeros(1, r), 2: d12}, {})
    N = 1 + r + s
    entries = {}
    for k in range(N):
        entries[(k, 0 * N + k)] = ONE  # 1 * x
        entries[(k, k * N + 0)] = ONE  # x * 1
    return DGAlgebra(M, MatQ.from_sparse(N, N * N, entries), unit_vector(N, 0))


def tensor_with_algebra(C: DGCategory, A: DGAlgebra) -> DGCategory:
    """C (x) A for C concentrated in degree 0: (f (x) x) o (g (x) y) = (f o g) (x) xy."""
    n = C.size
    homs = {}
    for a in range(n):
        for b in range(n):
            H = C.hom(a, b)
            if H.lo != 0 or H.hi != 0:
                raise ValueError("tensor_with_algebra expects a category concentrated in degree 0")
            homs[(a, b)] = tensor(H, A.module)
    NA = A.module.total_dim
    adeg = basis_degrees(A.module)
    aoff = degree_offsets(A.module)

    def pos(nh: int, f: int, x: int) -> int:
        # degree-n block of H (x) A is H_0 (x) A_n in Kronecker order
        m = adeg[x]
        return nh * aoff[m] + f * A.module.dim(m) + (x - aoff[m])

    mult_nz: dict[int, list] = {}
    for col in range(NA * NA):
        for k in range(NA):
            v = A.mult[k, col]
            if v:
                mult_nz.setdefault(col, []).append((k, v))
    comp = {}
    for a, b, c in itertools.product(range(n), repeat=3):
        T = C.compose_matrix(a, b, c)
        nab, nbc, nac = C.hom_dim(a, b), C.hom_dim(b, c), C.hom_dim(a, c)
        entries = {}
        for col in range(nbc * nab):
            nzT = [(k, T[k, col]) for k in range(nac) if T[k, col]]
            if not nzT:
                continue
            i, j = divmod(col, nab)
            for acol, nzA in mult_nz.items():
                x, y = divmod(acol, NA)
                src = pos(nbc, i, x) * (nab * NA) + pos(nab, j, y)
                for k, t in nzT:
                    for m, s in nzA:
                        key = (pos(nac, k, m), src)
                        entries[key] = entries.get(key, ZERO) + t * s
        comp[(a, b, c)] = MatQ.from_sparse(nac * NA, nbc * NA * nab * NA, entries)
    ids = {}
    for a in range(n):
        v = [ZERO] * (C.hom_dim(a, a) * NA)
        for f, p in enumerate(C.identity(a)):
            for x, q in enumerate(A.unit):
                if p and q:
                    v[pos(C.hom_dim(a, a), f, x)] += p * q
        ids[a] = tuple(v)
    return DGCategory(C.objects, homs, comp, ids)


def change_hom_bases(C: DGCategory, P: Mapping[tuple[int, int], MatQ]) -> DGCategory:
    """Rewrite C in new total bases: new vector = P[(a,b)] @ old vector.

    Each P must be block diagonal by degree so that gradings are kept.
    """
    n = C.size
    Pinv = {k: P[k].inverse() for k in P}
    homs = {}
    for (a, b), X in ((k, C.hom(*k)) for k in itertools.product(range(n), repeat=2)):
        off = degree_offsets(X)
        Pd = {}
        for m in X.degrees:
            s, e = off[m], off[m] + X.dim(m)
            Pd[m] = MatQ([P[(a, b)].row(i)[s:e] for i in range(s, e)], cols=X.dim(m)) if e > s \
                else MatQ.zeros(0, 0)
        homs[(a, b)] = X.change_basis(Pd)
    comp = {}
    for a, b, c in itertools.product(range(n), repeat=3):
        comp[(a, b, c)] = P[(a, c)] @ bilinear_transport(C.compose_matrix(a, b, c), Pinv[(b, c)], Pinv[(a, b)])
    ids = {a: P[(a, a)].apply(C.identity(a)) for a in range(n)}
    return DGCategory(C.objects, homs, comp, ids)
