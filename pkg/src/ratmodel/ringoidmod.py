"""Right modules over finite dg categories, Day convolution and the Morita functors.

A right module ``M`` over ``C`` assigns a complex ``M(o)`` (trivial group)
to each object and a pairing ``M(o) (x) hom(o', o) -> M(o')``, written
``m.f``.  Elements use total bases as in :mod:`ratmodel.ringoid`; the
action for ``(o', o)`` is a matrix ``A`` with ``A @ kron(m, f) = m.f``.

Coends and ends are computed as quotients and kernels inside explicitly
enumerated finite sums.  Quotients keep the relations in a
:class:`~ratmodel.exactq.SparseEchelon`; the non-pivot coordinates give the
canonical quotient basis.

The box product and internal hom are only built over categories concentrated
in degree 0 (such as E_a), where no Koszul signs arise from moving morphisms
past module elements.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Mapping, Sequence

from .exactq import (MatQ, ZERO, ONE, SparseEchelon, bilinear_transport, kernel_basis, solve_exact,
                     unit_vector, format_rational)
from .dgmod import DGModule, DGMap, fixed_subcomplex, hom_complex, hom_blocks, hom_vector_to_matrices
from .permgrp import PermGroup, trivial_group
from .ringoid import (DGCategory, EaCategory, MonoidalDGCategory, TruncationError, basis_degrees,
                      degree_offsets, sign_matrix, total_differential)


class ModuleError(ValueError):
    def __init__(self, message: str, where=None):
        super().__init__(message if where is None else f"{message} at {where}")
        self.where = where


def _sparse_add(acc: dict, vec: Mapping, c=ONE) -> None:
    for k, x in vec.items():
        y = acc.get(k, ZERO) + c * x
        if y:
            acc[k] = y
        else:
            acc.pop(k, None)


def _col(T: MatQ, col: int) -> dict:
    return {k: T[k, col] for k in range(T.rows) if T[k, col]}


def _dense(v: Mapping[int, Fraction], n: int) -> tuple:
    out = [ZERO] * n
    for k, x in v.items():
        out[k] = x
    return tuple(out)


# -- modules -----------------------------------------------------------------

class RightModule:
    """A right dg module over ``base``, given by values and action matrices.

    ``action`` maps ``(o2, o)`` to a matrix or is a callable producing one;
    ``generators`` optionally lists objects at which the module is generated,
    which the box product uses to decide whether the truncation suffices.
    """

    def __init__(self, base: DGCategory, values: Mapping[int, DGModule],
                 action: Mapping[tuple[int, int], MatQ] | Callable[[int, int], MatQ],
                 generators: Sequence[int] | None = None, name: str = "M"):
        self.base = base
        self.values = dict(values)
        self._action = action if callable(action) else dict(action).__getitem__
        self._cache: dict = {}
        self.generators = tuple(generators) if generators is not None else None
        self.name = name

    def __repr__(self) -> str:
        dims = [self.dim(o) for o in range(self.base.size)]
        return f"<RightModule {self.name} dims={dims}>"

    def dim(self, o: int) -> int:
        return self.values[o].total_dim

    def action_matrix(self, o2: int, o: int) -> MatQ:
        key = (o2, o)
        if key not in self._cache:
            self._cache[key] = self._action(o2, o)
        return self._cache[key]

    def act_basis(self, o2: int, o: int, m: int, f: int) -> dict:
        """m.f for basis elements m of M(o), f of hom(o2, o)."""
        A = self.action_matrix(o2, o)
        return _col(A, m * self.base.hom_dim(o2, o) + f)

    def act(self, o2: int, o: int, m: Sequence, f: Sequence) -> tuple:
        acc: dict = {}
        for i, x in enumerate(m):
            if x:
                for j, y in enumerate(f):
                    if y:
                        _sparse_add(acc, self.act_basis(o2, o, i, j), x * y)
        return _dense(acc, self.dim(o2))

    def check(self, associativity: bool = True) -> None:
        C = self.base
        objs = range(C.size)
        for o in objs:
            self.values[o].check()
            for i in range(self.dim(o)):
                e = unit_vector(self.dim(o), i)
                if self.act(o, o, e, C.identity(o)) != e:
                    raise ModuleError("identity does not act trivially", o)
        for o2, o in itertools.product(objs, repeat=2):
            A = self.action_matrix(o2, o)
            H = C.hom(o2, o)
            if A.shape != (self.dim(o2), self.dim(o) * H.total_dim):
                raise ModuleError("action matrix has the wrong shape", (o2, o))
            lhs = total_differential(self.values[o2]) @ A
            rhs = (bilinear_transport(A, total_differential(self.values[o]), MatQ.identity(H.total_dim))
                   + bilinear_transport(A, sign_matrix(self.values[o]), total_differential(H)))
            if lhs != rhs:
                raise ModuleError("action is not a chain map", (o2, o))
        if associativity:
            # (m.f).g = m.(f o g) for g: o3 -> o2, f: o2 -> o
            for o3, o2, o in itertools.product(objs, repeat=3):
                for m in range(self.dim(o)):
                    for f in range(C.hom_dim(o2, o)):
                        mf = self.act_basis(o2, o, m, f)
                        for g in range(C.hom_dim(o3, o2)):
                            left: dict = {}
                            for k, x in mf.items():
                                _sparse_add(left, self.act_basis(o3, o2, k, g), x)
                            right: dict = {}
                            for k, x in C.compose_basis(o3, o2, o, f, g).items():
                                _sparse_add(right, self.act_basis(o3, o, m, k), x)
                            if left != right:
                                raise ModuleError("action is not associative", (o3, o2, o))

    def is_valid(self) -> bool:
        try:
            self.check()
        except ModuleError:
            return False
        return True

    def restrict(self, objects: Sequence[int]) -> "RightModule":
        """Restriction to the full subcategory on ``objects``."""
        objects = list(objects)
        sub = self.base.full_subcategory(objects)
        vals = {i: self.values[o] for i, o in enumerate(objects)}
        return RightModule(sub, vals, lambda i, j: self.action_matrix(objects[i], objects[j]),
                           name=f"{self.name}|")

    def to_json(self) -> dict:
        n = self.base.size
        out = {"objects": list(self.base.objects),
               "values": {str(o): self.values[o].to_json("C1") for o in range(n)},
               "action": {}}
        for o2, o in itertools.product(range(n), repeat=2):
            A = self.action_matrix(o2, o)
            out["action"][f"{o2},{o}"] = {
                "shape": [A.rows, A.cols],
                "entries": [[i, j, format_rational(x)] for i, row in enumerate(A)
                            for j, x in enumerate(row) if x]}
        return out


@dataclass
class ModuleMap:
    source: RightModule
    target: RightModule
    maps: dict[int, MatQ]

    def check(self) -> None:
        S, T = self.source, self.target
        C = S.base
        for o in range(C.size):
            phi = self.maps[o]
            if phi.shape != (T.dim(o), S.dim(o)):
                raise ModuleError("component has the wrong shape", o)
            if total_differential(T.values[o]) @ phi != phi @ total_differential(S.values[o]):
                raise ModuleError("component is not a chain map", o)
            ds, dt = basis_degrees(S.values[o]), basis_degrees(T.values[o])
            for i, row in enumerate(phi):
                for j, x in enumerate(row):
                    if x and ds[j] != dt[i]:
                        raise ModuleError("component does not preserve degree", o)
        for o2, o in itertools.product(range(C.size), repeat=2):
            h = C.hom_dim(o2, o)
            lhs = self.maps[o2] @ S.action_matrix(o2, o)
            rhs = bilinear_transport(T.action_matrix(o2, o), self.maps[o], MatQ.identity(h))
            if lhs != rhs:
                raise ModuleError("map does not commute with the action", (o2, o))

    def is_valid(self) -> bool:
        try:
            self.check()
        except ModuleError:
            return False
        return True

    def is_iso(self) -> bool:
        return all(self.maps[o].is_invertible() for o in range(self.source.base.size))

    def compose(self, other: "ModuleMap") -> "ModuleMap":
        return ModuleMap(other.source, self.target,
                         {o: self.maps[o] @ other.maps[o] for o in other.maps})


def free_module(C: DGCategory, o: int) -> RightModule:
    """F_o(o') = hom(o', o), acting by composition."""
    if not 0 <= o < C.size:
        raise ModuleError(f"unknown object {o}")
    values = {p: C.hom(p, o) for p in range(C.size)}
    return RightModule(C, values, lambda o2, p: C.compose_matrix(o2, p, o), generators=(o,),
                       name=f"F{o}")


def yoneda_map(C: DGCategory, f: Sequence, o: int, p: int) -> ModuleMap:
    """F_o -> F_p induced by a degree-0 cycle f in hom(o, p): g -> f o g."""
    Fo, Fp = free_module(C, o), free_module(C, p)
    maps = {}
    for q in range(C.size):
        cols = [C.compose(q, o, p, f, unit_vector(C.hom_dim(q, o), j)) for j in range(C.hom_dim(q, o))]
        maps[q] = MatQ.from_columns(cols, C.hom_dim(q, p))
    return ModuleMap(Fo, Fp, maps)


def zero_module(C: DGCategory) -> RightModule:
    T = trivial_group()
    vals = {o: DGModule(T, 0, 0, (0,)) for o in range(C.size)}
    return RightModule(C, vals, lambda o2, o: MatQ.zeros(0, 0), generators=(), name="0")


# -- finite sums and quotients -----------------------------------------------

class Ambient:
    """A direct sum of tensor products of graded bases, indexed by block keys."""

    def __init__(self):
        self.blocks: dict = {}
        self.order: list = []
        self.size = 0
        self.degrees: list[int] = []

    def add(self, key, factors: Sequence[Sequence[int]]) -> None:
        """``factors`` are lists of basis degrees; the block is their Kronecker product."""
        sizes = [len(f) for f in factors]
        n = 1
        for s in sizes:
            n *= s
        self.blocks[key] = (self.size, sizes)
        self.order.append(key)
        for idx in itertools.product(*[range(s) for s in sizes]):
            self.degrees.append(sum(factors[t][i] for t, i in enumerate(idx)))
        self.size += n

    def index(self, key, *idx: int) -> int:
        off, sizes = self.blocks[key]
        k = 0
        for i, s in zip(idx, sizes):
            k = k * s + i
        return off + k

    def unindex(self, k: int):
        for key in self.order:
            off, sizes = self.blocks[key]
            n = 1
            for s in sizes:
                n *= s
            if off <= k < off + n:
                k -= off
                out = []
                for s in reversed(sizes):
                    k, r = divmod(k, s)
                    out.append(r)
                return key, tuple(reversed(out))
        raise IndexError(k)


class Quotient:
    """ambient / span(relations), with basis the non-pivot ambient indices sorted by degree."""

    def __init__(self, ambient: Ambient, keep_relations: bool = False):
        self.ambient = ambient
        self.ech = SparseEchelon(ambient.size)
        self.relations: list[dict] | None = [] if keep_relations else None
        self._basis = None

    def relate(self, vec: dict) -> None:
        if not vec:
            return
        if self.relations is not None:
            self.relations.append(dict(vec))
        self.ech.add(vec)

    def finish(self):
        comp = self.ech.complement()
        degs = self.ambient.degrees
        self._basis = sorted(comp, key=lambda k: (degs[k], k))
        self._pos = {k: i for i, k in enumerate(self._basis)}
        return self

    @property
    def basis(self) -> list[int]:
        return self._basis

    @property
    def dim(self) -> int:
        return len(self._basis)

    def project(self, vec: Mapping) -> tuple:
        r = self.ech.reduce(dict(vec))
        out = [ZERO] * self.dim
        for k, x in r.items():
            out[self._pos[k]] = x
        return tuple(out)

    def degree_range(self) -> tuple[int, int]:
        degs = [self.ambient.degrees[k] for k in self._basis]
        return (min(degs), max(degs)) if degs else (0, 0)

    def as_module(self, group: PermGroup, differential: Callable[[int], dict] | None,
                  action: Callable[[int, int], dict] | None = None) -> DGModule:
        """Complex on the quotient basis; ``differential(k)`` and ``action(g, k)`` act on ambient indices."""
        lo, hi = self.degree_range()
        degs = self.ambient.degrees
        dims = [0] * (hi - lo + 1)
        local = {}
        for k in self._basis:
            n = degs[k]
            local[k] = dims[n - lo]
            dims[n - lo] += 1
        d = {}
        if differential is not None:
            for n in range(lo + 1, hi + 1):
                entries = {}
                for k in self._basis:
                    if degs[k] != n:
                        continue
                    img = self.project(differential(k))
                    for i, x in enumerate(img):
                        if x:
                            entries[(local[self._basis[i]], local[k])] = x
                d[n] = MatQ.from_sparse(dims[n - 1 - lo], dims[n - lo], entries)
        acts = {}
        if action is not None:
            for g in range(1, group.order):
                per = {}
                for n in range(lo, hi + 1):
                    entries = {}
                    for k in self._basis:
                        if degs[k] != n:
                            continue
                        img = self.project(action(g, k))
                        for i, x in enumerate(img):
                            if x:
                                entries[(local[self._basis[i]], local[k])] = x
                    per[n] = MatQ.from_sparse(dims[n - lo], dims[n - lo], entries)
                acts[g] = per
        return DGModule(group, lo, hi, tuple(dims), d, acts)


def _module_degrees(X: DGModule) -> list[int]:
    return basis_degrees(X)


def _total_d_col(X: DGModule, i: int) -> dict:
    D = total_differential(X)
    return _col(D, i)


# -- coends -------------------------------------------------------------------

@dataclass
class CoendResult:
    module: DGModule
    quotient: Quotient
    iso: MatQ               # coend basis -> values(x) total basis
    verified: bool


def coend_collapse(M: RightModule, x: int) -> CoendResult:
    """The coend of M(c) (x) hom(x, c) over c, with its evaluation map to M(x)."""
    C = M.base
    amb = Ambient()
    for c in range(C.size):
        amb.add(c, [_module_degrees(M.values[c]), basis_degrees(C.hom(x, c))])
    Q = Quotient(amb, keep_relations=True)
    # (m.f) (x) g ~ m (x) (f o g) for m in M(c), f in hom(c2, c), g in hom(x, c2)
    for c, c2 in itertools.product(range(C.size), repeat=2):
        for m in range(M.dim(c)):
            for f in range(C.hom_dim(c2, c)):
                mf = M.act_basis(c2, c, m, f)
                for g in range(C.hom_dim(x, c2)):
                    vec: dict = {}
                    for k, v in mf.items():
                        _sparse_add(vec, {amb.index(c2, k, g): v})
                    for k, v in C.compose_basis(x, c2, c, f, g).items():
                        _sparse_add(vec, {amb.index(c, m, k): -v})
                    Q.relate(vec)
    Q.finish()

    def evaluate(k: int) -> dict:
        c, (m, g) = amb.unindex(k)
        return M.act_basis(x, c, m, g)

    def differential(k: int) -> dict:
        c, (m, g) = amb.unindex(k)
        out: dict = {}
        Dm = _total_d_col(M.values[c], m)
        for i, v in Dm.items():
            _sparse_add(out, {amb.index(c, i, g): v})
        mdeg = basis_degrees(M.values[c])[m] if M.dim(c) else 0
        sign = -1 if mdeg % 2 else 1
        for i, v in _total_d_col(C.hom(x, c), g).items():
            _sparse_add(out, {amb.index(c, m, i): sign * v})
        return out

    module = Q.as_module(trivial_group(), differential)
    iso = MatQ.from_columns([_dense(evaluate(k), M.dim(x)) for k in Q.basis], M.dim(x))
    ok = all(not _apply_sparse(evaluate, r) for r in Q.relations)
    ok = ok and iso.rows == iso.cols and iso.is_invertible()
    return CoendResult(module, Q, iso, ok)


def _apply_sparse(fn: Callable[[int], dict], vec: Mapping) -> dict:
    out: dict = {}
    for k, x in vec.items():
        _sparse_add(out, fn(k), x)
    return out


# -- box product ----------------------------------------------------------------

def _require_degree_zero(C: DGCategory) -> None:
    for a in range(C.size):
        for b in range(C.size):
            H = C.hom(a, b)
            if H.total_dim and (H.lo != 0 or H.hi != 0):
                raise ModuleError("box product and internal hom need a base concentrated in degree 0")


def _pairs(E: MonoidalDGCategory) -> list[tuple[int, int]]:
    out = []
    for p in range(E.size):
        for q in range(E.size):
            try:
                E.tensor_object(p, q)
            except TruncationError:
                continue
            out.append((p, q))
    return out


def _check_generators(E: MonoidalDGCategory, M: RightModule, N: RightModule) -> None:
    gm = M.generators if M.generators is not None else tuple(range(E.size))
    gn = N.generators if N.generators is not None else tuple(range(E.size))
    for p in gm:
        for q in gn:
            try:
                E.tensor_object(p, q)
            except TruncationError:
                raise TruncationError(f"box product needs {E.objects[p]} (x) {E.objects[q]}, "
                                      "which is outside the truncation") from None


@dataclass
class BoxProduct:
    module: RightModule
    quotients: dict[int, Quotient]
    ambients: dict[int, Ambient]
    left: RightModule
    right: RightModule


def box_product(M: RightModule, N: RightModule) -> BoxProduct:
    """(M box N)(o): coend over pairs (p, q) of M(p) (x) N(q) (x) hom(o, p (x) q)."""
    E = M.base
    if not isinstance(E, MonoidalDGCategory) or N.base is not E:
        raise ModuleError("box product needs two modules over the same monoidal category")
    _require_degree_zero(E)
    _check_generators(E, M, N)
    D = _pairs(E)
    quotients, ambients, values = {}, {}, {}
    for o in range(E.size):
        amb = Ambient()
        for p, q in D:
            amb.add((p, q), [_module_degrees(M.values[p]), _module_degrees(N.values[q]),
                             basis_degrees(E.hom(o, E.tensor_object(p, q)))])
        Q = Quotient(amb, keep_relations=True)
        for p, q in D:
            pq = E.tensor_object(p, q)
            for p2 in range(E.size):
                if (p2, q) in D:
                    _box_relations_left(E, M, N, Q, amb, o, p, q, p2)
            for q2 in range(E.size):
                if (p, q2) in D:
                    _box_relations_right(E, M, N, Q, amb, o, p, q, q2)
        Q.finish()
        quotients[o], ambients[o] = Q, amb

    def differential_for(o):
        amb = ambients[o]

        def diff(k):
            (p, q), (m, n, h) = amb.unindex(k)
            out: dict = {}
            for i, v in _total_d_col(M.values[p], m).items():
                _sparse_add(out, {amb.index((p, q), i, n, h): v})
            mdeg = basis_degrees(M.values[p])[m]
            s = -1 if mdeg % 2 else 1
            for i, v in _total_d_col(N.values[q], n).items():
                _sparse_add(out, {amb.index((p, q), m, i, h): s * v})
            return out
        return diff

    for o in range(E.size):
        values[o] = quotients[o].as_module(trivial_group(), differential_for(o))

    def action(o2, o):
        Qs, Qt = quotients[o], quotients[o2]
        amb_s, amb_t = ambients[o], ambients[o2]
        h_dim = E.hom_dim(o2, o)
        cols = []
        for k in Qs.basis:
            (p, q), (m, n, h) = amb_s.unindex(k)
            pq = E.tensor_object(p, q)
            for g in range(h_dim):
                vec: dict = {}
                for t, v in E.compose_basis(o2, o, pq, h, g).items():
                    _sparse_add(vec, {amb_t.index((p, q), m, n, t): v})
                cols.append(Qt.project(vec))
        return MatQ.from_columns(cols, Qt.dim) if cols else MatQ.zeros(Qt.dim, 0)

    gens = None
    if M.generators is not None and N.generators is not None:
        gens = tuple(sorted({E.tensor_object(p, q) for p in M.generators for q in N.generators}))
    box = RightModule(E, values, action, generators=gens, name=f"({M.name}[]{N.name})")
    return BoxProduct(box, quotients, ambients, M, N)


def _box_relations_left(E, M, N, Q, amb, o, p, q, p2):
    """(m.f) (x) n (x) h ~ m (x) n (x) ((f (x) id_q) o h) for f: p2 -> p, h in hom(o, p2 q)."""
    p2q, pq = E.tensor_object(p2, q), E.tensor_object(p, q)
    idq = E.identity(q)
    for f in range(E.hom_dim(p2, p)):
        fx = E.product(p2, p, q, q, unit_vector(E.hom_dim(p2, p), f), idq)
        post = {h: _compose_left(E, o, p2q, pq, fx, h) for h in range(E.hom_dim(o, p2q))}
        for m in range(M.dim(p)):
            mf = M.act_basis(p2, p, m, f)
            for n in range(N.dim(q)):
                for h in range(E.hom_dim(o, p2q)):
                    vec: dict = {}
                    for k, v in mf.items():
                        _sparse_add(vec, {amb.index((p2, q), k, n, h): v})
                    for t, v in post[h].items():
                        _sparse_add(vec, {amb.index((p, q), m, n, t): -v})
                    Q.relate(vec)


def _box_relations_right(E, M, N, Q, amb, o, p, q, q2):
    """m (x) (n.g) (x) h ~ m (x) n (x) ((id_p (x) g) o h) for g: q2 -> q."""
    pq2, pq = E.tensor_object(p, q2), E.tensor_object(p, q)
    idp = E.identity(p)
    for g in range(E.hom_dim(q2, q)):
        gx = E.product(p, p, q2, q, idp, unit_vector(E.hom_dim(q2, q), g))
        post = {h: _compose_left(E, o, pq2, pq, gx, h) for h in range(E.hom_dim(o, pq2))}
        for n in range(N.dim(q)):
            ng = N.act_basis(q2, q, n, g)
            for m in range(M.dim(p)):
                for h in range(E.hom_dim(o, pq2)):
                    vec: dict = {}
                    for k, v in ng.items():
                        _sparse_add(vec, {amb.index((p, q2), m, k, h): v})
                    for t, v in post[h].items():
                        _sparse_add(vec, {amb.index((p, q), m, n, t): -v})
                    Q.relate(vec)


def _compose_left(E, a, b, c, f: Sequence, h: int) -> dict:
    """f o h_basis for f in hom(b, c) (dense), h a basis index of hom(a, b)."""
    out: dict = {}
    for i, x in enumerate(f):
        if x:
            _sparse_add(out, E.compose_basis(a, b, c, i, h), x)
    return out


# -- explicit isomorphisms for the box product --------------------------------

def _box_map(B: BoxProduct, target: RightModule, image: Callable[[int, tuple], dict]) -> ModuleMap:
    """Module map out of a box product from a formula on ambient basis elements.

    ``image(o, (p, q, m, n, h))`` is a sparse vector in target(o).  The
    formula must kill all relations; this is checked.
    """
    E = B.module.base
    maps = {}
    for o in range(E.size):
        amb, Q = B.ambients[o], B.quotients[o]
        memo: dict = {}

        def img(k, o=o, amb=amb, memo=memo):
            if k not in memo:
                (p, q), (m, n, h) = amb.unindex(k)
                memo[k] = image(o, (p, q, m, n, h))
            return memo[k]

        for r in Q.relations:
            if _apply_sparse(img, r):
                raise ModuleError("formula does not factor through the box product", o)
        maps[o] = MatQ.from_columns([_dense(img(k), target.dim(o)) for k in Q.basis], target.dim(o)) \
            if Q.dim else MatQ.zeros(target.dim(o), 0)
    return ModuleMap(B.module, target, maps)


def box_unit_map(B: BoxProduct) -> ModuleMap:
    """F_unit box N -> N: [u (x) n (x) h] -> n.((u (x) id_q) o h)."""
    E = B.module.base
    N = B.right

    def image(o, key):
        p, q, u, n, h = key
        pq = E.tensor_object(p, q)
        ux = E.product(p, E.unit, q, q, unit_vector(E.hom_dim(p, E.unit), u), E.identity(q))
        arrow = _compose_left(E, o, pq, q, ux, h)
        out: dict = {}
        for t, v in arrow.items():
            _sparse_add(out, N.act_basis(o, q, n, t), v)
        return out

    return _box_map(B, N, image)


def box_free_map(B: BoxProduct, a: int, b: int) -> ModuleMap:
    """F_a box F_b -> F_{a (x) b}: [m (x) n (x) h] -> (m (x) n) o h."""
    E = B.module.base
    ab = E.tensor_object(a, b)
    F = free_module(E, ab)

    def image(o, key):
        p, q, m, n, h = key
        mn = E.product_basis(p, a, q, b, m, n)
        out: dict = {}
        pq = E.tensor_object(p, q)
        for t, v in mn.items():
            _sparse_add(out, E.compose_basis(o, pq, ab, t, h), v)
        return out

    return _box_map(B, F, image)


def box_symmetry_map(B: BoxProduct, BT: BoxProduct) -> ModuleMap:
    """M box N -> N box M: [m (x) n (x) h] -> (-1)^{|m||n|} [n (x) m (x) (tau o h)]."""
    E = B.module.base
    M, N = B.left, B.right

    def image(o, key):
        p, q, m, n, h = key
        tau = E.symmetry(p, q)
        pq, qp = E.tensor_object(p, q), E.tensor_object(q, p)
        arrow = _compose_left(E, o, pq, qp, tau, h)
        s = -1 if (basis_degrees(M.values[p])[m] * basis_degrees(N.values[q])[n]) % 2 else 1
        amb = BT.ambients[o]
        vec = {amb.index((q, p), n, m, t): s * v for t, v in arrow.items()}
        return {i: x for i, x in enumerate(BT.quotients[o].project(vec)) if x}

    return _box_map(B, BT.module, image)


class BoxCache:
    """Shares free modules and box products between several checks over one base."""

    def __init__(self, E: MonoidalDGCategory):
        self.E = E
        self._free: dict[int, RightModule] = {}
        self._box: dict[tuple[int, int], BoxProduct] = {}

    def free(self, a: int) -> RightModule:
        if a not in self._free:
            self._free[a] = free_module(self.E, a)
        return self._free[a]

    def box(self, M: RightModule, N: RightModule) -> BoxProduct:
        key = (id(M), id(N))
        if key not in self._box:
            self._box[key] = box_product(M, N)
        return self._box[key]


def box_assoc_check(E: MonoidalDGCategory, a: int, b: int, c: int, cache: BoxCache | None = None) -> bool:
    """(F_a box F_b) box F_c and F_a box (F_b box F_c) are both isomorphic to F_{a(x)b(x)c}
    through the explicit maps, so the associator is the composite of one with the inverse of the other."""
    cache = cache or BoxCache(E)
    Fa, Fb, Fc = (cache.free(x) for x in (a, b, c))
    ab, bc = E.tensor_object(a, b), E.tensor_object(b, c)
    abc = E.tensor_object(ab, c)
    B_ab = cache.box(Fa, Fb)
    mu_ab = box_free_map(B_ab, a, b)
    B_bc = cache.box(Fb, Fc)
    mu_bc = box_free_map(B_bc, b, c)
    L = cache.box(B_ab.module, Fc)
    R = cache.box(Fa, B_bc.module)
    F = cache.free(abc)

    def left_image(o, key):
        p, q, x, n, h = key
        # x in (F_a box F_b)(p) -> mu(x) in hom(p, ab); then (mu(x) (x) n) o h
        mux = mu_ab.maps[p].column(x)
        pq = E.tensor_object(p, q)
        out: dict = {}
        for i, v in enumerate(mux):
            if v:
                for t, w in E.product_basis(p, ab, q, c, i, n).items():
                    _sparse_add(out, E.compose_basis(o, pq, abc, t, h), v * w)
        return out

    def right_image(o, key):
        p, q, m, y, h = key
        muy = mu_bc.maps[q].column(y)
        pq = E.tensor_object(p, q)
        out: dict = {}
        for i, v in enumerate(muy):
            if v:
                for t, w in E.product_basis(p, a, q, bc, m, i).items():
                    _sparse_add(out, E.compose_basis(o, pq, abc, t, h), v * w)
        return out

    alpha = _box_map(L, F, left_image)
    beta = _box_map(R, F, right_image)
    for f in (mu_ab, mu_bc, alpha, beta):
        f.check()
        if not f.is_iso():
            return False
    assoc = ModuleMap(L.module, R.module, {o: beta.maps[o].inverse() @ alpha.maps[o] for o in range(E.size)})
    assoc.check()
    return assoc.is_iso()


# -- internal hom -------------------------------------------------------------

@dataclass
class InternalHom:
    module: RightModule
    objects: list[int]
    bases: dict[int, dict[int, MatQ]]   # o -> degree -> kernel basis columns
    index: dict[int, list[int]]         # o -> the p's in the end


def internal_hom(N: RightModule, P: RightModule) -> InternalHom:
    """Hom(N, P)(o) = end over p of hom(N(p), P(o (x) p)), on objects o with o (x) gens(N) in range.

    The end runs over the objects p with o (x) p in range for every such o;
    this set contains the generators of N, which is what makes it exact.
    The result is a module over the full subcategory on the allowed objects.
    """
    E = N.base
    if not isinstance(E, MonoidalDGCategory) or P.base is not E:
        raise ModuleError("internal hom needs two modules over the same monoidal category")
    _require_degree_zero(E)
    gens = N.generators if N.generators is not None else tuple(range(E.size))

    def fits(o, p):
        try:
            E.tensor_object(o, p)
            return True
        except TruncationError:
            return False

    V = [o for o in range(E.size) if all(fits(o, p) for p in gens)]
    if not V:
        raise TruncationError("no object o has o (x) generators inside the truncation")
    T = trivial_group()
    homs, layouts, bases = {}, {}, {}
    values = {}
    index = {}
    # one index set for every o, so the action never needs phi_p outside it
    common = [p for p in range(E.size) if all(fits(o, p) for o in V)]
    for o in V:
        ps = common
        index[o] = ps
        blocks = {p: hom_complex(N.values[p], P.values[E.tensor_object(o, p)]) for p in ps}
        lo = min(b.lo for b in blocks.values())
        hi = max(b.hi for b in blocks.values())
        per_degree = {}
        for d in range(lo, hi + 1):
            offs, off = {}, 0
            for p in ps:
                offs[p] = off
                off += blocks[p].dim(d)
            eqs = _naturality_equations(E, N, P, o, ps, blocks, offs, off, d)
            K = kernel_basis(eqs) if eqs.rows else MatQ.identity(off)
            per_degree[d] = (K, offs, off)
        dims = tuple(per_degree[d][0].cols for d in range(lo, hi + 1))
        dmap = {}
        for d in range(lo + 1, hi + 1):
            K, offs, size = per_degree[d]
            K1, offs1, size1 = per_degree[d - 1]
            big = MatQ.zeros(size1, size)
            entries = {}
            for p in ps:
                D = blocks[p].diff(d)
                for i, row in enumerate(D):
                    for j, x in enumerate(row):
                        if x:
                            entries[(offs1[p] + i, offs[p] + j)] = x
            big = MatQ.from_sparse(size1, size, entries)
            x = solve_exact(K1, big @ K)
            if x is None:
                raise ModuleError("end is not a subcomplex", o)
            dmap[d] = x
        values[o] = DGModule(T, lo, hi, dims, dmap)
        bases[o] = {d: per_degree[d] for d in range(lo, hi + 1)}
        layouts[o] = blocks
    sub = E.full_subcategory(V)
    pos = {o: i for i, o in enumerate(V)}

    def action(i2, i):
        o2, o = V[i2], V[i]
        # (phi.g)_p(n) = phi_p(n).(g (x) id_p) for g: o2 -> o
        cols = []
        Vo, Vo2 = values[o], values[o2]
        for k in range(Vo.total_dim):
            d, local = _locate(Vo, k)
            K, offs, size = bases[o][d]
            phi = K.column(local)
            for g in range(E.hom_dim(o2, o)):
                img = _act_end(E, N, P, o2, o, g, phi, layouts[o], offs, index[o2], d)
                K2, offs2, size2 = bases[o2][d]
                vec = _dense(img(offs2, size2), size2)
                x = solve_exact(K2, MatQ([[v] for v in vec], cols=1))
                if x is None:
                    raise ModuleError("action leaves the end", (o2, o))
                glob = degree_offsets(Vo2)[d]
                full = [ZERO] * Vo2.total_dim
                for t, v in enumerate(x.column(0)):
                    full[glob + t] = v
                cols.append(tuple(full))
        return MatQ.from_columns(cols, Vo2.total_dim) if cols else MatQ.zeros(Vo2.total_dim, 0)

    mod = RightModule(sub, {pos[o]: values[o] for o in V}, action, name=f"Hom({N.name},{P.name})")
    return InternalHom(mod, V, bases, index)


def _locate(X: DGModule, k: int) -> tuple[int, int]:
    for n in X.degrees:
        if k < X.dim(n):
            return n, k
        k -= X.dim(n)
    raise IndexError(k)


def _phi_apply(blocks, p, offs, d, vec, n_total: int, N: RightModule, P: RightModule, o_p: int) -> dict:
    """phi_p(n) for n a total-basis element of N(p), as a sparse vector in P(o (x) p)."""
    U = N.values[p]
    Vt = P.values[o_p]
    s, local = _locate(U, n_total)
    out = {}
    for q, off in hom_blocks(U, Vt, d):
        if q != s:
            continue
        r = Vt.dim(s + d)
        c = U.dim(s)
        base = degree_offsets(Vt)[s + d]
        for i in range(r):
            x = vec[offs[p] + off + i * c + local]
            if x:
                out[base + i] = x
    return out


def _naturality_equations(E, N, P, o, ps, blocks, offs, size, d) -> MatQ:
    """Rows expressing phi_{p2}(n.f) = phi_p(n).(id_o (x) f) for f: p2 -> p."""
    rows = []
    ido = E.identity(o)
    for p in ps:
        op = E.tensor_object(o, p)
        for p2 in ps:
            op2 = E.tensor_object(o, p2)
            for f in range(E.hom_dim(p2, p)):
                idf = E.product(o, o, p2, p, ido, unit_vector(E.hom_dim(p2, p), f))
                for n in range(N.dim(p)):
                    nf = N.act_basis(p2, p, n, f)
                    # coefficient of each unknown in each output coordinate
                    coeff: dict = {}
                    for k, v in nf.items():
                        for var, w in _phi_vars(N, P, p2, op2, offs, d, k).items():
                            for t, y in w.items():
                                _sparse_add(coeff.setdefault(t, {}), {var: v * y})
                    for var, w in _phi_vars(N, P, p, op, offs, d, n).items():
                        for t0, y0 in w.items():
                            img: dict = {}
                            for j, z in enumerate(idf):
                                if z:
                                    _sparse_add(img, P.act_basis(op2, op, t0, j), z)
                            for t, y in img.items():
                                _sparse_add(coeff.setdefault(t, {}), {var: -y0 * y})
                    for t, row in coeff.items():
                        if row:
                            rows.append(row)
    if not rows:
        return MatQ.zeros(0, size)
    return MatQ.from_sparse(len(rows), size, {(i, j): x for i, r in enumerate(rows) for j, x in r.items()})


def _phi_vars(N, P, p, op, offs, d, n_total) -> dict[int, dict[int, Fraction]]:
    """Unknown index -> (P(op) coordinate -> coefficient) for phi_p(n)."""
    U, Vt = N.values[p], P.values[op]
    s, local = _locate(U, n_total)
    out = {}
    for q, off in hom_blocks(U, Vt, d):
        if q != s:
            continue
        c = U.dim(s)
        base = degree_offsets(Vt)[s + d]
        for i in range(Vt.dim(s + d)):
            out[offs[p] + off + i * c + local] = {base + i: ONE}
    return out


def _act_end(E, N, P, o2, o, g, phi, blocks, offs, ps2, d):
    """(phi.g)_p(n) = phi_p(n).(g (x) id_p) as a vector in the layout for o2."""
    def build(offs2, size2):
        out: dict = {}
        for p in ps2:
            op, o2p = E.tensor_object(o, p), E.tensor_object(o2, p)
            gx = E.product(o2, o, p, p, unit_vector(E.hom_dim(o2, o), g), E.identity(p))
            U, Vt = N.values[p], P.values[o2p]
            for s, hoff in hom_blocks(U, Vt, d):
                c = U.dim(s)
                base = degree_offsets(Vt)[s + d]
                for local in range(c):
                    n_total = degree_offsets(U)[s] + local
                    val: dict = {}
                    for var, w in _phi_vars(N, P, p, op, offs, d, n_total).items():
                        x = phi[var]
                        if x:
                            for t0, y0 in w.items():
                                for j, z in enumerate(gx):
                                    if z:
                                        _sparse_add(val, P.act_basis(o2p, op, t0, j), x * y0 * z)
                    for t, v in val.items():
                        out[offs2[p] + hoff + (t - base) * c + local] = v
        return out
    return build


# -- module maps ----------------------------------------------------------------

def module_maps_dim(M: RightModule, P: RightModule) -> int:
    """Dimension of the space of degree-0 module maps M -> P (chain maps commuting with the action)."""
    C = M.base
    if P.base.size != C.size:
        raise ModuleError("modules over different categories")
    offs, size = {}, 0
    layout = {}
    for o in range(C.size):
        X, Y = M.values[o], P.values[o]
        xo, yo = degree_offsets(X), degree_offsets(Y)
        for n in X.degrees:
            if Y.lo <= n <= Y.hi:
                layout[(o, n)] = size
                size += Y.dim(n) * X.dim(n)
        offs[o] = (xo, yo)
    if size == 0:
        return 0

    def var(o, i, j):
        """Unknown for entry (target i, source j) of phi_o in total indices, or None."""
        X, Y = M.values[o], P.values[o]
        s, jl = _locate(X, j)
        t, il = _locate(Y, i)
        if s != t:
            return None
        return layout[(o, s)] + il * X.dim(s) + jl

    ech = SparseEchelon(size)
    for o in range(C.size):
        X, Y = M.values[o], P.values[o]
        DX, DY = total_differential(X), total_differential(Y)
        # chain map: DY phi = phi DX
        for j in range(X.total_dim):
            for i in range(Y.total_dim):
                row: dict = {}
                for k in range(Y.total_dim):
                    if DY[i, k]:
                        v = var(o, k, j)
                        if v is not None:
                            _sparse_add(row, {v: DY[i, k]})
                for k in range(X.total_dim):
                    if DX[k, j]:
                        v = var(o, i, k)
                        if v is not None:
                            _sparse_add(row, {v: -DX[k, j]})
                ech.add(row)
    for o2, o in itertools.product(range(C.size), repeat=2):
        # phi_{o2}(m.f) = phi_o(m).f
        for m in range(M.dim(o)):
            for f in range(C.hom_dim(o2, o)):
                mf = M.act_basis(o2, o, m, f)
                rows: dict = {}
                for k, v in mf.items():
                    for i in range(P.dim(o2)):
                        u = var(o2, i, k)
                        if u is not None:
                            _sparse_add(rows.setdefault(i, {}), {u: v})
                for k in range(P.dim(o)):
                    u = var(o, k, m)
                    if u is None:
                        continue
                    for i, v in P.act_basis(o2, o, k, f).items():
                        _sparse_add(rows.setdefault(i, {}), {u: -v})
                for row in rows.values():
                    ech.add(row)
    return size - len(ech)


# -- Morita functors --------------------------------------------------------------

def _ea(M: RightModule) -> EaCategory:
    if not isinstance(M.base, EaCategory):
        raise ModuleError("Morita functors need a module over build_Ea")
    return M.base


@dataclass
class MoritaImage:
    module: DGModule
    quotient: Quotient
    ambient: Ambient


def morita_to_module(M: RightModule) -> MoritaImage:
    """The coend of M(sigma_i) (x) sigma_i over i, with W acting on the sigma factor."""
    E = _ea(M)
    W = E.W
    amb = Ambient()
    for i in range(E.size):
        amb.add(i, [_module_degrees(M.values[i]), [0] * W.order ** i])
    Q = Quotient(amb, keep_relations=True)
    # (m.f) (x) x ~ m (x) f(x) for m in M(sigma_j), f in hom(sigma_i, sigma_j), x in sigma_i
    for i, j in itertools.product(range(E.size), repeat=2):
        for f in range(E.hom_dim(i, j)):
            F = E.hom_matrix(i, j, unit_vector(E.hom_dim(i, j), f))
            for m in range(M.dim(j)):
                mf = M.act_basis(i, j, m, f)
                for x in range(W.order ** i):
                    vec: dict = {}
                    for k, v in mf.items():
                        _sparse_add(vec, {amb.index(i, k, x): v})
                    for y in range(W.order ** j):
                        if F[y, x]:
                            _sparse_add(vec, {amb.index(j, m, y): -F[y, x]})
                    Q.relate(vec)
    Q.finish()

    def diff(k):
        i, (m, x) = amb.unindex(k)
        return {amb.index(i, t, x): v for t, v in _total_d_col(M.values[i], m).items()}

    def act(g, k):
        i, (m, x) = amb.unindex(k)
        gx = E._encode(tuple(W.mul(g, s) for s in E._decode(x, i)))
        return {amb.index(i, m, gx): ONE}

    module = Q.as_module(W, diff, act)
    return MoritaImage(module, Q, amb)


@dataclass
class MoritaModule:
    module: RightModule
    target: DGModule
    inclusions: dict[int, dict[int, MatQ]]    # i -> degree -> columns in hom_complex(sigma_i, X)
    homs: dict[int, DGModule]

    def as_map(self, i: int, k: int) -> dict[int, MatQ]:
        """Basis element k of values(sigma_i) as a matrix sigma_i -> X_n, keyed by n."""
        V = self.module.values[i]
        n, local = _locate(V, k)
        vec = self.inclusions[i][n].column(local)
        E = self.module.base
        # sigma_i sits in degree 0, so the only component lands in X_n
        return {p + n: A for p, A in hom_vector_to_matrices(E.sigma(i), self.target, n, vec).items()}


def module_to_morita(X: DGModule, E: EaCategory) -> MoritaModule:
    """values(sigma_i) = hom(sigma_i, X)^W with action by precomposition."""
    if X.group is not E.W:
        raise ModuleError("X must be a module over the Weyl group of the base")
    homs, incl, values = {}, {}, {}
    for i in range(E.size):
        H = hom_complex(E.sigma(i), X)
        fs = fixed_subcomplex(H)
        homs[i] = H
        incl[i] = fs.inclusion
        values[i] = fs.module

    def action(i, j):
        # phi in values(sigma_j), f in hom(sigma_i, sigma_j): phi o f in values(sigma_i)
        Vj, Vi = values[j], values[i]
        cols = []
        Fm = [E.hom_matrix(i, j, unit_vector(E.hom_dim(i, j), f)) for f in range(E.hom_dim(i, j))]
        oi = degree_offsets(Vi)
        for k in range(Vj.total_dim):
            n, local = _locate(Vj, k)
            vec = incl[j][n].column(local)
            # vec is Hom(sigma_j, X_n) row-major: X_n rows, |W|^j columns
            r, c = X.dim(n), E.W.order ** j
            phi = MatQ.from_flat(r, c, list(vec))
            for F in Fm:
                comp = phi @ F
                x = solve_exact(incl[i][n], MatQ([[v] for v in comp.entries], cols=1))
                if x is None:
                    raise ModuleError("precomposition leaves the invariants", (i, j))
                full = [ZERO] * Vi.total_dim
                for t, v in enumerate(x.column(0)):
                    full[oi[n] + t] = v
                cols.append(tuple(full))
        return MatQ.from_columns(cols, Vi.total_dim) if cols else MatQ.zeros(Vi.total_dim, 0)

    mod = RightModule(E, values, action, name="Hom(G,X)")
    return MoritaModule(mod, X, incl, homs)


@dataclass
class MoritaReport:
    counit_iso: bool
    counit_chain_map: bool
    counit_equivariant: bool
    unit_isos: dict[int, bool]
    coend_dims: tuple[int, ...]
    target_dims: tuple[int, ...]

    @property
    def passed(self) -> bool:
        return (self.counit_iso and self.counit_chain_map and self.counit_equivariant
                and all(self.unit_isos.values()))

    def to_json(self) -> dict:
        return {"counit_iso": self.counit_iso, "counit_chain_map": self.counit_chain_map,
                "counit_equivariant": self.counit_equivariant,
                "unit_isos": {str(k): v for k, v in sorted(self.unit_isos.items())},
                "coend_dims": list(self.coend_dims), "target_dims": list(self.target_dims),
                "passed": self.passed}


def counit(X: DGModule, E: EaCategory) -> tuple[MoritaImage, DGMap, MoritaModule]:
    """The evaluation [phi (x) x] -> phi(x) from the coend back to X, as a chain map."""
    MM = module_to_morita(X, E)
    img = morita_to_module(MM.module)
    amb, Q = img.ambient, img.quotient

    def evaluate(k) -> dict:
        i, (m, x) = amb.unindex(k)
        mats = MM.as_map(i, m)
        out = {}
        ox = degree_offsets(X)
        for n, A in mats.items():
            for r in range(A.rows):
                if A[r, x]:
                    out[ox[n] + r] = A[r, x]
        return out

    for rel in Q.relations:
        if _apply_sparse(evaluate, rel):
            raise ModuleError("evaluation does not factor through the coend")
    Y = img.module
    comps = {}
    yo = degree_offsets(Y)
    ox = degree_offsets(X)
    degs = amb.degrees
    for n in Y.degrees:
        ks = [k for k in Q.basis if degs[k] == n]
        cols = []
        for k in ks:
            v = evaluate(k)
            cols.append(tuple(v.get(ox[n] + r, ZERO) for r in range(X.dim(n))) if X.lo <= n <= X.hi
                        else ())
        comps[n] = MatQ.from_columns(cols, X.dim(n)) if cols else MatQ.zeros(X.dim(n), 0)
    return img, DGMap(Y, X, comps), MM


def unit_is_iso(E: EaCategory, a: int) -> bool:
    """F_a -> module_to_morita(morita_to_module(F_a)): f -> (x -> [f (x) x]) is bijective at each object."""
    F = free_module(E, a)
    img = morita_to_module(F)
    Y = img.module
    MM = module_to_morita(Y, E)
    for i in range(E.size):
        V = MM.module.values[i]
        n0 = 0
        if not Y.lo <= 0 <= Y.hi:
            return F.dim(i) == 0 and V.total_dim == 0
        cols = []
        for f in range(E.hom_dim(i, a)):
            # the W-map x -> [f (x) x], as a vector in Hom(sigma_i, Y_0) row-major
            r, c = Y.dim(0), E.W.order ** i
            entries = [ZERO] * (r * c)
            for x in range(c):
                col = img.quotient.project({img.ambient.index(i, f, x): ONE})
                for t, v in enumerate(col):
                    entries[t * c + x] = v
            sol = solve_exact(MM.inclusions[i][n0], MatQ([[v] for v in entries], cols=1))
            if sol is None:
                return False
            cols.append(sol.column(0))
        if V.total_dim != E.hom_dim(i, a):
            return False
        A = MatQ.from_columns(cols, V.total_dim) if cols else MatQ.zeros(V.total_dim, 0)
        if not A.is_invertible():
            return False
    return True


def morita_roundtrip_check(X: DGModule, E: EaCategory, free_units: Sequence[int] | None = None) -> MoritaReport:
    img, eps, _ = counit(X, E)
    chain = eps.is_valid()
    iso = all(eps.at(n).is_invertible() for n in img.module.degrees) and \
        all(img.module.dim(n) == X.dim(n) for n in set(X.degrees) | set(img.module.degrees))
    equi = True
    for g in range(1, E.W.order):
        for n in img.module.degrees:
            if X.act(g, n) @ eps.at(n) != eps.at(n) @ img.module.act(g, n):
                equi = False
    units = {a: unit_is_iso(E, a) for a in (free_units if free_units is not None else range(E.size))}
    lo = min(X.lo, img.module.lo)
    hi = max(X.hi, img.module.hi)
    return MoritaReport(iso, chain, equi, units,
                        tuple(img.module.dim(n) for n in range(lo, hi + 1)),
                        tuple(X.dim(n) for n in range(lo, hi + 1)))


def box_checks(E: MonoidalDGCategory) -> list[tuple[str, bool]]:
    """Unit, free, symmetry and associativity isomorphisms on all free modules inside the truncation."""
    out = []
    k = E.size - 1
    cache = BoxCache(E)
    free = cache.free

    def run(fn) -> bool:
        try:
            return bool(fn())
        except (ModuleError, TruncationError):
            return False

    for a in range(E.size):
        def unit(a=a):
            f = box_unit_map(cache.box(free(E.unit), free(a)))
            f.check()
            return f.is_iso()
        out.append((f"unit F0[]F{a} -> F{a}", run(unit)))
    for a in range(E.size):
        for b in range(E.size):
            if a + b > k:
                continue

            def fr(a=a, b=b):
                f = box_free_map(cache.box(free(a), free(b)), a, b)
                f.check()
                return f.is_iso()

            def sym(a=a, b=b):
                B, BT = cache.box(free(a), free(b)), cache.box(free(b), free(a))
                s = box_symmetry_map(B, BT)
                s.check()
                back = box_symmetry_map(BT, B)
                return s.is_iso() and all((back.maps[o] @ s.maps[o]).is_identity() for o in range(E.size))

            out.append((f"free F{a}[]F{b} -> F{a + b}", run(fr)))
            out.append((f"symmetry F{a}[]F{b} -> F{b}[]F{a}", run(sym)))
    for a, b, c in itertools.product(range(E.size), repeat=3):
        if a + b + c <= k:
            out.append((f"associativity F{a} F{b} F{c}",
                        run(lambda a=a, b=b, c=c: box_assoc_check(E, a, b, c, cache))))
    return out
