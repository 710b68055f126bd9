"""Bounded chain complexes of QG-modules.

A :class:`DGModule` lives in degrees ``lo..hi``.  ``d[n]`` maps degree ``n``
to degree ``n-1`` and ``action[g][n]`` is the matrix of group element ``g``
(an index into ``group.elements``) on degree ``n``.  The identity element is
never stored; its action is the identity matrix.

Sign conventions:

* tensor: ``d(m (x) n) = dm (x) n + (-1)^|m| m (x) dn``, basis ordered by the
  degree of the left factor and then Kronecker order;
* hom: ``d(f) = d_N f - (-1)^|f| f d_M``, a map ``M_p -> N_{p+n}`` stored as
  its row-major vectorization, blocks ordered by ``p``;
* ``(g.f) = rho_N(g) f rho_M(g^-1)``.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Mapping

from .exactq import (MatQ, DimensionError, ZERO, ONE, hstack, kernel_basis, kronecker,
                     solve_exact, vstack, block_diag)
from .permgrp import PermGroup, group_from_spec, trivial_group


class ComplexError(ValueError):
    """A chain complex or chain map fails one of its defining identities."""


class GroupMismatch(ValueError):
    pass


def _same_group(M, N):
    if M.group is not N.group:
        raise GroupMismatch(f"modules over different groups: {M.group!r}, {N.group!r}")


@dataclass(eq=False)
class DGModule:
    group: PermGroup
    lo: int
    hi: int
    dims: tuple[int, ...]
    d: dict[int, MatQ] = field(default_factory=dict)
    action: dict[int, dict[int, MatQ]] = field(default_factory=dict)

    def __post_init__(self):
        self.dims = tuple(self.dims)
        if self.hi < self.lo:
            raise DimensionError("empty degree range; use dims of zeros instead")
        if len(self.dims) != self.hi - self.lo + 1:
            raise DimensionError("dims length must equal hi - lo + 1")
        for n in range(self.lo + 1, self.hi + 1):
            if n not in self.d:
                self.d[n] = MatQ.zeros(self.dim(n - 1), self.dim(n))
            elif self.d[n].shape != (self.dim(n - 1), self.dim(n)):
                raise DimensionError(f"d_{n} has shape {self.d[n].shape}")
        for g, per in self.action.items():
            for n, a in per.items():
                if a.shape != (self.dim(n), self.dim(n)):
                    raise DimensionError(f"action of {g} in degree {n} has shape {a.shape}")
        self.action.pop(0, None)

    # -- access --------------------------------------------------------

    @property
    def degrees(self) -> range:
        return range(self.lo, self.hi + 1)

    def dim(self, n: int) -> int:
        if self.lo <= n <= self.hi:
            return self.dims[n - self.lo]
        return 0

    def diff(self, n: int) -> MatQ:
        """d_n : degree n -> degree n-1 (zero outside the stored range)."""
        if self.lo < n <= self.hi:
            return self.d[n]
        return MatQ.zeros(self.dim(n - 1), self.dim(n))

    def act(self, g: int, n: int) -> MatQ:
        """Matrix of element g in degree n; an empty action table means the trivial action."""
        if g == 0 or self.dim(n) == 0 or not self.action:
            return MatQ.identity(self.dim(n))
        try:
            return self.action[g][n]
        except KeyError:
            raise KeyError(f"no action stored for element {g} in degree {n}") from None

    @property
    def total_dim(self) -> int:
        return sum(self.dims)

    def euler_characteristic(self) -> int:
        return sum((-1) ** (n % 2) * self.dim(n) for n in self.degrees)

    # -- constructors --------------------------------------------------

    @classmethod
    def zero(cls, G: PermGroup) -> "DGModule":
        return cls(G, 0, 0, (0,))

    @classmethod
    def trivial(cls, G: PermGroup, degree: int = 0, dim: int = 1) -> "DGModule":
        """``Q^dim`` with trivial action, concentrated in one degree."""
        return cls(G, degree, degree, (dim,), {},
                   {g: {degree: MatQ.identity(dim)} for g in range(1, G.order)})

    @classmethod
    def permutation(cls, G: PermGroup, points: int, act: Callable[[int, int], int],
                    degree: int = 0) -> "DGModule":
        """Permutation module on ``points`` with ``g`` sending point x to ``act(g, x)``."""
        action = {g: {degree: MatQ.permutation([act(g, x) for x in range(points)])}
                  for g in range(1, G.order)}
        return cls(G, degree, degree, (points,), {}, action)

    @classmethod
    def regular(cls, G: PermGroup, degree: int = 0) -> "DGModule":
        """QG with G acting by left multiplication on the basis of group elements."""
        return cls.permutation(G, G.order, G.mul, degree)

    @classmethod
    def from_generators(cls, G: PermGroup, lo: int, hi: int, dims, d: Mapping[int, MatQ],
                        gen_action: Mapping[int, Mapping[int, MatQ]]) -> "DGModule":
        """Extend actions given on some elements to all of G by closure."""
        full = extend_action(G, list(range(lo, hi + 1)), list(dims), gen_action)
        return cls(G, lo, hi, tuple(dims), dict(d), full)

    def shift(self, k: int) -> "DGModule":
        """Degree shift by k; the differential picks up the sign (-1)^k."""
        s = -1 if k % 2 else 1
        d = {n + k: m.scale(s) for n, m in self.d.items()}
        action = {g: {n + k: m for n, m in per.items()} for g, per in self.action.items()}
        return DGModule(self.group, self.lo + k, self.hi + k, self.dims, d, action)

    def direct_sum(self, other: "DGModule") -> "DGModule":
        _same_group(self, other)
        lo, hi = min(self.lo, other.lo), max(self.hi, other.hi)
        dims = tuple(self.dim(n) + other.dim(n) for n in range(lo, hi + 1))
        d = {n: block_diag([self.diff(n), other.diff(n)]) for n in range(lo + 1, hi + 1)}
        action = {g: {n: block_diag([self.act(g, n), other.act(g, n)]) for n in range(lo, hi + 1)}
                  for g in range(1, self.group.order)}
        return DGModule(self.group, lo, hi, dims, d, action)

    def change_basis(self, P: Mapping[int, MatQ]) -> "DGModule":
        """Conjugate by invertible P_n (new coordinates = P_n old coordinates)."""
        Pinv = {n: P[n].inverse() for n in self.degrees}
        d = {n: P[n - 1] @ self.diff(n) @ Pinv[n] for n in range(self.lo + 1, self.hi + 1)}
        action = {g: {n: P[n] @ self.act(g, n) @ Pinv[n] for n in self.degrees}
                  for g in range(1, self.group.order)}
        return DGModule(self.group, self.lo, self.hi, self.dims, d, action)

    # -- validation ----------------------------------------------------

    def check(self, full_table: bool = True) -> None:
        """Raise ComplexError unless d^2 = 0, the action is a representation and d is equivariant."""
        for n in range(self.lo + 2, self.hi + 1):
            if not (self.diff(n - 1) @ self.diff(n)).is_zero():
                raise ComplexError(f"d_{n - 1} d_{n} != 0")
        G = self.group
        elems = range(G.order) if full_table else G.generator_indices
        for n in self.degrees:
            mats = {g: self.act(g, n) for g in range(G.order)}
            for g in elems:
                for h in range(G.order):
                    if mats[g] @ mats[h] != mats[G.mul(g, h)]:
                        raise ComplexError(f"action is not a representation in degree {n} "
                                           f"at ({g}, {h})")
        for n in range(self.lo + 1, self.hi + 1):
            for g in range(1, G.order):
                if self.diff(n) @ self.act(g, n) != self.act(g, n - 1) @ self.diff(n):
                    raise ComplexError(f"d_{n} is not equivariant for element {g}")

    def is_valid(self) -> bool:
        try:
            self.check()
        except ComplexError:
            return False
        return True

    # -- JSON ----------------------------------------------------------

    def to_json(self, group_spec: str | None = None) -> dict:
        return {
            "group": group_spec or self.group.name,
            "lo": self.lo,
            "hi": self.hi,
            "dims": list(self.dims),
            "d": {str(n): self.diff(n).to_json() for n in range(self.lo + 1, self.hi + 1)},
            "action": {str(g): {str(n): self.act(g, n).to_json() for n in self.degrees}
                       for g in range(1, self.group.order)},
        }

    @classmethod
    def from_json(cls, data: dict, check: bool = True) -> "DGModule":
        try:
            spec = data["group"]
            lo, hi = int(data["lo"]), int(data["hi"])
            dims = [int(x) for x in data["dims"]]
        except KeyError as e:
            raise ComplexError(f"missing field {e.args[0]!r}") from None
        G = group_from_spec(spec) if isinstance(spec, str) else spec
        if len(dims) != hi - lo + 1:
            raise ComplexError("dims length must equal hi - lo + 1")
        dim = lambda n: dims[n - lo] if lo <= n <= hi else 0
        d = {}
        for key, m in data.get("d", {}).items():
            n = int(key)
            if not lo < n <= hi:
                raise ComplexError(f"differential d_{n} outside degree range")
            d[n] = MatQ.from_json(m, dim(n - 1), dim(n))
        given = {}
        for key, per in data.get("action", {}).items():
            g = int(key)
            if not 0 <= g < G.order:
                raise ComplexError(f"element index {g} out of range for {G.name}")
            given[g] = {int(n): MatQ.from_json(m, dim(int(n)), dim(int(n))) for n, m in per.items()}
        action = extend_action(G, list(range(lo, hi + 1)), dims, given)
        M = cls(G, lo, hi, tuple(dims), d, action)
        if check:
            M.check()
        return M


def extend_action(G: PermGroup, degrees: list[int], dims: list[int],
                  given: Mapping[int, Mapping[int, MatQ]]) -> dict[int, dict[int, MatQ]]:
    """Fill in the action of every element from the supplied ones by closure.

    Elements not reachable from the supplied ones raise ComplexError; a
    supplied element whose matrices disagree with the closure is caught
    later by :meth:`DGModule.check`.
    """
    if G.order == 1:
        return {}
    lo = degrees[0]
    ident = {n: MatQ.identity(dims[n - lo]) for n in degrees}
    known: dict[int, dict[int, MatQ]] = {0: ident}
    for g, per in given.items():
        full = {}
        for n in degrees:
            if n in per:
                full[n] = per[n]
            elif dims[n - lo] == 0:
                full[n] = MatQ.zeros(0, 0)
            else:
                raise ComplexError(f"action of element {g} missing in degree {n}")
        known[g] = full
    gens = [g for g in given if g != 0]
    queue = deque(known)
    while queue:
        x = queue.popleft()
        for g in gens:
            y = G.mul(x, g)
            if y not in known:
                known[y] = {n: known[x][n] @ known[g][n] for n in degrees}
                queue.append(y)
    if len(known) != G.order:
        if not gens and all(k == 0 for k in dims):
            return {g: dict(ident) for g in range(1, G.order)}
        raise ComplexError("supplied actions do not generate the group")
    known.pop(0)
    return known


@dataclass(eq=False)
class DGMap:
    source: DGModule
    target: DGModule
    components: dict[int, MatQ]
    degree: int = 0

    def __post_init__(self):
        for n in self.source.degrees:
            shape = (self.target.dim(n + self.degree), self.source.dim(n))
            if n not in self.components:
                self.components[n] = MatQ.zeros(*shape)
            elif self.components[n].shape != shape:
                raise DimensionError(f"component {n} has shape {self.components[n].shape}")

    def at(self, n: int) -> MatQ:
        if n in self.components:
            return self.components[n]
        return MatQ.zeros(self.target.dim(n + self.degree), self.source.dim(n))

    def check(self) -> None:
        S, T, k = self.source, self.target, self.degree
        s = -1 if k % 2 else 1
        lo = min(S.lo, T.lo - k) - 1
        hi = max(S.hi, T.hi - k) + 1
        for n in range(lo, hi + 1):
            lhs = T.diff(n + k) @ self.at(n)
            rhs = (self.at(n - 1) @ S.diff(n)).scale(s)
            if lhs != rhs:
                raise ComplexError(f"map does not commute with d in degree {n}")
        for g in range(1, S.group.order):
            for n in S.degrees:
                if T.act(g, n + k) @ self.at(n) != self.at(n) @ S.act(g, n):
                    raise ComplexError(f"map is not equivariant for element {g} in degree {n}")

    def is_valid(self) -> bool:
        try:
            self.check()
        except ComplexError:
            return False
        return True

    def compose(self, other: "DGMap") -> "DGMap":
        """self after other."""
        comps = {n: self.at(n + other.degree) @ other.at(n) for n in other.source.degrees}
        return DGMap(other.source, self.target, comps, self.degree + other.degree)

    @classmethod
    def identity(cls, M: DGModule) -> "DGMap":
        return cls(M, M, {n: MatQ.identity(M.dim(n)) for n in M.degrees})


@dataclass(eq=False)
class GradedRep:
    group: PermGroup
    lo: int
    hi: int
    dims: tuple[int, ...]
    action: dict[int, dict[int, MatQ]]

    def dim(self, n: int) -> int:
        return self.dims[n - self.lo] if self.lo <= n <= self.hi else 0

    @property
    def degrees(self) -> range:
        return range(self.lo, self.hi + 1)

    def act(self, g: int, n: int) -> MatQ:
        if g == 0 or self.group.order == 1 or not self.lo <= n <= self.hi:
            return MatQ.identity(self.dim(n))
        return self.action[g][n]

    def graded_dims(self) -> dict[int, int]:
        return {n: self.dim(n) for n in self.degrees if self.dim(n)}

    def character(self, n: int) -> tuple[Fraction, ...]:
        return tuple(_trace(self.act(g, n)) for g in range(self.group.order))

    def fixed_dims(self) -> dict[int, int]:
        """Dimension of the invariants per degree, via the averaged trace."""
        out = {}
        for n in self.degrees:
            k = sum(self.character(n)) / self.group.order
            if k:
                out[n] = int(k)
        return out

    def is_isomorphic(self, other: "GradedRep") -> bool:
        """Isomorphism of graded representations over Q, decided by characters."""
        if self.group is not other.group:
            return False
        degs = set(self.graded_dims()) | set(other.graded_dims())
        return all(self.character(n) == other.character(n) for n in degs)

    def check(self) -> None:
        G = self.group
        for n in self.degrees:
            for g in range(G.order):
                for h in range(G.order):
                    if self.act(g, n) @ self.act(h, n) != self.act(G.mul(g, h), n):
                        raise ComplexError(f"not a representation in degree {n}")


def _trace(A: MatQ) -> Fraction:
    return sum((A[i, i] for i in range(A.rows)), ZERO)


@dataclass(eq=False)
class Homology(GradedRep):
    """Homology with chosen cycle representatives.

    ``reps[n]`` has the representative cycles as columns and ``proj[n]``
    sends any cycle of degree n to its class coordinates.
    """

    reps: dict[int, MatQ] = field(default_factory=dict)
    proj: dict[int, MatQ] = field(default_factory=dict)

    def class_of(self, n: int, cycle) -> tuple:
        return self.proj[n].apply(cycle)


# -- constructions ---------------------------------------------------------

def tensor(M: DGModule, N: DGModule) -> DGModule:
    _same_group(M, N)
    lo, hi = M.lo + N.lo, M.hi + N.hi
    blocks = {n: [(p, n - p) for p in M.degrees if N.lo <= n - p <= N.hi] for n in range(lo, hi + 1)}
    size = lambda p, q: M.dim(p) * N.dim(q)
    offsets = {}
    dims = []
    for n in range(lo, hi + 1):
        off = 0
        for p, q in blocks[n]:
            offsets[(p, q)] = off
            off += size(p, q)
        dims.append(off)
    d = {}
    for n in range(lo + 1, hi + 1):
        entries = {}
        sgn = None
        for p, q in blocks[n]:
            col0 = offsets[(p, q)]
            if M.lo <= p - 1:
                _put(entries, offsets[(p - 1, q)], col0, kronecker(M.diff(p), MatQ.identity(N.dim(q))))
            if N.lo <= q - 1:
                sgn = -1 if p % 2 else 1
                _put(entries, offsets[(p, q - 1)], col0,
                     kronecker(MatQ.identity(M.dim(p)), N.diff(q)).scale(sgn))
        d[n] = MatQ.from_sparse(dims[n - 1 - lo], dims[n - lo], entries)
    action = {}
    for g in range(1, M.group.order):
        action[g] = {n: block_diag([kronecker(M.act(g, p), N.act(g, q)) for p, q in blocks[n]])
                     if blocks[n] else MatQ.zeros(0, 0) for n in range(lo, hi + 1)}
    return DGModule(M.group, lo, hi, tuple(dims), d, action)


def _put(entries: dict, r0: int, c0: int, A: MatQ) -> None:
    for i, row in enumerate(A):
        for j, x in enumerate(row):
            if x:
                entries[(r0 + i, c0 + j)] = entries.get((r0 + i, c0 + j), ZERO) + x


def tensor_blocks(M: DGModule, N: DGModule, n: int) -> list[tuple[int, int, int]]:
    """(p, q, offset) for the summands M_p (x) N_q of degree n of M (x) N."""
    out = []
    off = 0
    for p in M.degrees:
        q = n - p
        if N.lo <= q <= N.hi:
            out.append((p, q, off))
            off += M.dim(p) * N.dim(q)
    return out


def hom_blocks(M: DGModule, N: DGModule, n: int) -> list[tuple[int, int]]:
    """(p, offset) for the summands Hom(M_p, N_{p+n}) of degree n of hom(M, N)."""
    out = []
    off = 0
    for p in M.degrees:
        if N.lo <= p + n <= N.hi:
            out.append((p, off))
            off += M.dim(p) * N.dim(p + n)
    return out


def hom_complex(M: DGModule, N: DGModule) -> DGModule:
    _same_group(M, N)
    lo, hi = N.lo - M.hi, N.hi - M.lo
    blocks = {n: hom_blocks(M, N, n) for n in range(lo, hi + 1)}
    dims = [sum(M.dim(p) * N.dim(p + n) for p, _ in blocks[n]) for n in range(lo, hi + 1)]
    d = {}
    for n in range(lo + 1, hi + 1):
        entries = {}
        tgt = dict(blocks[n - 1])
        s = -1 if n % 2 else 1
        for p, off in blocks[n]:
            # d_N f lands in Hom(M_p, N_{p+n-1})
            if p in tgt:
                _put(entries, tgt[p], off, kronecker(N.diff(p + n), MatQ.identity(M.dim(p))))
            # f d_M lands in Hom(M_{p+1}, N_{p+n})
            if p + 1 in tgt:
                _put(entries, tgt[p + 1], off,
                     kronecker(MatQ.identity(N.dim(p + n)), M.diff(p + 1).T).scale(-s))
        d[n] = MatQ.from_sparse(dims[n - 1 - lo], dims[n - lo], entries)
    action = {}
    G = M.group
    for g in range(1, G.order):
        gi = G.inv(g)
        action[g] = {n: block_diag([kronecker(N.act(g, p + n), M.act(gi, p).T) for p, _ in blocks[n]])
                     if blocks[n] else MatQ.zeros(0, 0) for n in range(lo, hi + 1)}
    return DGModule(G, lo, hi, tuple(dims), d, action)


def hom_vector_to_matrices(M: DGModule, N: DGModule, n: int, vec) -> dict[int, MatQ]:
    """Unpack a degree-n element of hom(M, N) into its components M_p -> N_{p+n}."""
    out = {}
    for p, off in hom_blocks(M, N, n):
        r, c = N.dim(p + n), M.dim(p)
        out[p] = MatQ.from_flat(r, c, list(vec[off:off + r * c]))
    return out


def hom_matrices_to_vector(M: DGModule, N: DGModule, n: int, comps: Mapping[int, MatQ]) -> tuple:
    out = []
    for p, _ in hom_blocks(M, N, n):
        A = comps.get(p)
        if A is None:
            out.extend([ZERO] * (M.dim(p) * N.dim(p + n)))
        else:
            out.extend(A.entries)
    return tuple(out)


def averaging_matrix(M: DGModule, n: int) -> MatQ:
    G = M.group
    acc = MatQ.identity(M.dim(n))
    for g in range(1, G.order):
        acc = acc + M.act(g, n)
    return acc.scale(Fraction(1, G.order))


def averaging_projector(M: DGModule) -> DGMap:
    return DGMap(M, M, {n: averaging_matrix(M, n) for n in M.degrees})


@dataclass(eq=False)
class FixedSubcomplex:
    module: DGModule
    inclusion: dict[int, MatQ]


def fixed_subcomplex(M: DGModule) -> FixedSubcomplex:
    """M^G as a complex over the trivial group, with its inclusion into M."""
    T = trivial_group()
    basis = {n: averaging_matrix(M, n).column_space() for n in M.degrees}
    d = {}
    for n in range(M.lo + 1, M.hi + 1):
        img = M.diff(n) @ basis[n]
        x = solve_exact(basis[n - 1], img)
        if x is None:
            raise ComplexError("differential does not preserve fixed points")
        d[n] = x
    dims = tuple(basis[n].cols for n in M.degrees)
    return FixedSubcomplex(DGModule(T, M.lo, M.hi, dims, d, {}), basis)


def fixed_points(M: DGModule) -> DGModule:
    return fixed_subcomplex(M).module


def _complement_columns(B: MatQ, Z: MatQ) -> list[int]:
    """Indices of columns of Z that extend a basis of span(B) to span(B, Z)."""
    if Z.cols == 0:
        return []
    _, piv = hstack([B, Z]).rref()
    return [j - B.cols for j in piv if j >= B.cols]


def homology(M: DGModule) -> Homology:
    reps, proj, dims = {}, {}, []
    for n in M.degrees:
        Z = kernel_basis(M.diff(n))
        B = M.diff(n + 1).column_space()
        keep = _complement_columns(B, Z)
        R = MatQ.from_columns([Z.column(j) for j in keep], M.dim(n))
        reps[n] = R
        # extend [B | R] to a basis of the whole degree and invert it
        basis = hstack([B, R])
        extra = _complement_columns(basis, MatQ.identity(M.dim(n)))
        full = hstack([basis, MatQ.from_columns([tuple(ONE if i == j else ZERO for i in range(M.dim(n)))
                                                for j in extra], M.dim(n))])
        inv = full.inverse() if full.rows else full
        proj[n] = MatQ([inv.row(B.cols + i) for i in range(R.cols)], cols=M.dim(n))
        dims.append(R.cols)
    action = {}
    for g in range(1, M.group.order):
        action[g] = {n: proj[n] @ M.act(g, n) @ reps[n] for n in M.degrees}
    return Homology(M.group, M.lo, M.hi, tuple(dims), action, reps, proj)


def homology_dims(M: DGModule) -> dict[int, int]:
    """Betti numbers by rank counting; independent of the representative choice in homology()."""
    out = {}
    for n in M.degrees:
        b = M.dim(n) - M.diff(n).rank() - M.diff(n + 1).rank()
        if b:
            out[n] = b
    return out


def induced_map(f: DGMap, HS: Homology | None = None, HT: Homology | None = None) -> dict[int, MatQ]:
    HS = HS or homology(f.source)
    HT = HT or homology(f.target)
    return {n: HT.proj[n + f.degree] @ f.at(n) @ HS.reps[n] if HT.lo <= n + f.degree <= HT.hi
            else MatQ.zeros(0, HS.dim(n)) for n in f.source.degrees}


def is_quasi_iso(f: DGMap) -> bool:
    if f.degree != 0:
        return False
    HS, HT = homology(f.source), homology(f.target)
    degs = set(HS.graded_dims()) | set(HT.graded_dims())
    ind = induced_map(f, HS, HT)
    for n in degs:
        if HS.dim(n) != HT.dim(n):
            return False
        if n in ind and not ind[n].is_invertible():
            return False
    return True


def tensor_symmetry(M: DGModule, N: DGModule) -> DGMap:
    """m (x) n -> (-1)^{|m||n|} n (x) m as a signed permutation."""
    MN, NM = tensor(M, N), tensor(N, M)
    comps = {}
    for n in MN.degrees:
        src = tensor_blocks(M, N, n)
        tgt = {(p, q): off for p, q, off in tensor_blocks(N, M, n)}
        images, signs = [0] * MN.dim(n), [1] * MN.dim(n)
        for p, q, off in src:
            a, b = M.dim(p), N.dim(q)
            t0 = tgt[(q, p)]
            s = -1 if (p * q) % 2 else 1
            for i in range(a):
                for j in range(b):
                    images[off + i * b + j] = t0 + j * a + i
                    signs[off + i * b + j] = s
        comps[n] = MatQ.permutation(images, signs) if images else MatQ.zeros(0, 0)
    return DGMap(MN, NM, comps)


def cover_degree_zero(M: DGModule) -> tuple[DGModule, DGMap]:
    """Subcomplex ... -> M_1 -> ker d_0 with its inclusion; truncates negative degrees."""
    if M.hi < 0:
        Z = DGModule.zero(M.group)
        return Z, DGMap(Z, M, {})
    K = kernel_basis(M.diff(0)) if M.lo <= 0 else MatQ.zeros(0, 0)
    lo = 0
    dims = [K.cols] + [M.dim(n) for n in range(1, M.hi + 1)]
    incl = {0: K}
    for n in range(1, M.hi + 1):
        incl[n] = MatQ.identity(M.dim(n))
    d = {}
    if M.hi >= 1:
        x = solve_exact(K, M.diff(1))
        d[1] = x if x is not None else MatQ.zeros(K.cols, M.dim(1))
    for n in range(2, M.hi + 1):
        d[n] = M.diff(n)
    action = {}
    for g in range(1, M.group.order):
        per = {}
        for n in range(lo, M.hi + 1):
            if n == 0:
                y = solve_exact(K, M.act(g, 0) @ K)
                per[0] = y
            else:
                per[n] = M.act(g, n)
        action[g] = per
    C = DGModule(M.group, lo, M.hi, tuple(dims), d, action)
    return C, DGMap(C, M, incl)


# -- chain maps --------------------------------------------------------------

def chain_map_space_dim(M: DGModule, N: DGModule) -> int:
    """Dimension of the space of degree-0 equivariant chain maps M -> N.

    Computed as the degree-0 cycles of hom(M, N)^G without forming the whole
    hom complex: first Hom_G(M_p, N_p) per degree, then the chain condition.
    """
    _same_group(M, N)
    G = M.group
    gens = [g for g in G.generator_indices if g != 0]
    bases = {}
    for p in M.degrees:
        a, b = M.dim(p), N.dim(p)
        if a * b == 0:
            continue
        eqs = [kronecker(N.act(g, p), MatQ.identity(a)) - kronecker(MatQ.identity(b), M.act(g, p).T)
               for g in gens]
        bases[p] = kernel_basis(vstack(eqs)) if eqs else MatQ.identity(a * b)
    total = sum(B.cols for B in bases.values())
    if total == 0:
        return 0
    order = sorted(bases)
    offs = {}
    off = 0
    for p in order:
        offs[p] = off
        off += bases[p].cols
    rows = []
    # condition in degree p: d_N f_p - f_{p-1} d_M = 0 as maps M_p -> N_{p-1}
    for p in range(M.lo, M.hi + 2):
        a, b = M.dim(p), N.dim(p - 1)
        if a * b == 0:
            continue
        cols = [MatQ.zeros(a * b, bases[q].cols) for q in order]
        if p in bases:
            T = kronecker(N.diff(p), MatQ.identity(a))
            cols[order.index(p)] = T @ bases[p]
        if p - 1 in bases:
            T = kronecker(MatQ.identity(b), M.diff(p).T)
            cols[order.index(p - 1)] = (T @ bases[p - 1]).scale(-1)
        rows.append(hstack(cols))
    if not rows:
        return total
    return total - vstack(rows).rank()


def equivariant_hom_dim(M: DGModule, N: DGModule, n: int = 0) -> int:
    """dim Hom_G(M_n, N_n) via characters."""
    G = M.group
    s = ZERO
    for g in range(G.order):
        s += _trace(M.act(G.inv(g), n)) * _trace(N.act(g, n))
    return int(s / G.order)
