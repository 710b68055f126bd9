"""Finite permutation groups and their subgroup combinatorics.

Permutations are tuples ``p`` with ``p[x]`` the image of point ``x``.  They
compose left to right: ``(p q)(x) = q(p(x))``.  A group stores its full,
lexicographically sorted element list; elements are referred to by their
index in that list, so the identity is always element ``0``.

Subgroups are enumerated by cyclic extension and grouped into conjugacy
classes in a canonical order: by order, then by the lexicographically least
sorted element list among the conjugates.
"""

from __future__ import annotations

import os
import re
from collections import deque
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

DEFAULT_ORDER_CAP = 200
ORDER_CAP_ENV = "RATMODEL_ORDER_CAP"

Perm = tuple


class GroupSpecError(ValueError):
    pass


class OrderCapExceeded(ValueError):
    pass


def default_order_cap() -> int:
    raw = os.environ.get(ORDER_CAP_ENV)
    if raw is None:
        return DEFAULT_ORDER_CAP
    try:
        return int(raw)
    except ValueError:
        raise GroupSpecError(f"{ORDER_CAP_ENV} must be an integer, got {raw!r}")


def compose(p: Perm, q: Perm) -> Perm:
    """First p, then q."""
    return tuple(q[x] for x in p)


def invert(p: Perm) -> Perm:
    out = [0] * len(p)
    for x, y in enumerate(p):
        out[y] = x
    return tuple(out)


def identity_perm(n: int) -> Perm:
    return tuple(range(n))


def format_perm(p: Perm) -> str:
    """Cycle notation, ``()`` for the identity."""
    seen = set()
    out = []
    for i in range(len(p)):
        if i in seen or p[i] == i:
            continue
        cyc = [i]
        seen.add(i)
        j = p[i]
        while j != i:
            seen.add(j)
            cyc.append(j)
            j = p[j]
        out.append("(" + " ".join(map(str, cyc)) + ")")
    return "".join(out) or "()"


def parse_cycles(text: str, degree: int | None = None) -> Perm:
    """Parse ``"(0 1 2)(3 4)"``; the degree defaults to the largest point + 1."""
    text = text.strip()
    if text in ("", "()", "e"):
        return identity_perm(degree or 1)
    if not re.fullmatch(r"(\(\s*\d+(?:[\s,]+\d+)*\s*\)\s*)+", text):
        raise GroupSpecError(f"bad cycle notation: {text!r}")
    cycles = [[int(x) for x in re.split(r"[\s,]+", c.strip())]
              for c in re.findall(r"\(([^)]*)\)", text)]
    top = max(x for c in cycles for x in c) + 1
    n = max(top, degree or 0)
    img = list(range(n))
    seen = set()
    for c in cycles:
        if len(set(c)) != len(c) or seen & set(c):
            raise GroupSpecError(f"cycles are not disjoint: {text!r}")
        seen |= set(c)
        for a, b in zip(c, c[1:] + c[:1]):
            img[a] = b
    return tuple(img)


class PermGroup:
    """A finite group of permutations of ``{0, ..., degree-1}``."""

    def __init__(self, degree: int, generators: Iterable[Sequence[int]], name: str | None = None,
                 order_cap: int | None = None):
        gens = [tuple(g) for g in generators]
        for g in gens:
            if len(g) != degree or sorted(g) != list(range(degree)):
                raise GroupSpecError(f"not a permutation of {degree} points: {g}")
        self.degree = degree
        self.generators = tuple(gens)
        self.name = name
        cap = default_order_cap() if order_cap is None else order_cap
        e = identity_perm(degree)
        found = {e}
        queue = deque([e])
        while queue:
            x = queue.popleft()
            for g in gens:
                y = compose(x, g)
                if y not in found:
                    found.add(y)
                    if len(found) > cap:
                        raise OrderCapExceeded(
                            f"group {name or ''} exceeds the order cap {cap}".replace("  ", " "))
                    queue.append(y)
        self.elements: tuple[Perm, ...] = tuple(sorted(found))
        self._index = {p: i for i, p in enumerate(self.elements)}
        n = len(self.elements)
        self.mul_table = [[self._index[compose(p, q)] for q in self.elements] for p in self.elements]
        self.inv_table = [self._index[invert(p)] for p in self.elements]
        self.generator_indices = tuple(self._index[g] for g in gens)
        self._order = n

    def __repr__(self) -> str:
        label = self.name or "PermGroup"
        return f"<{label} of order {self.order} on {self.degree} points>"

    def __len__(self) -> int:
        return self._order

    @property
    def order(self) -> int:
        return self._order

    def index(self, p: Sequence[int]) -> int:
        return self._index[tuple(p)]

    def mul(self, i: int, j: int) -> int:
        return self.mul_table[i][j]

    def inv(self, i: int) -> int:
        return self.inv_table[i]

    def conj(self, g: int, h: int) -> int:
        """g h g^-1."""
        return self.mul_table[self.mul_table[g][h]][self.inv_table[g]]

    def closure(self, gens: Iterable[int]) -> frozenset[int]:
        gens = [g for g in gens if g != 0]
        found = {0}
        queue = deque([0])
        table = self.mul_table
        while queue:
            x = queue.popleft()
            row = table[x]
            for g in gens:
                y = row[g]
                if y not in found:
                    found.add(y)
                    queue.append(y)
        return frozenset(found)

    def subgroup(self, elements: Iterable[int]) -> "Subgroup":
        return Subgroup(self, tuple(sorted(set(elements))))

    def subgroup_generated_by(self, perms: Iterable[Sequence[int]]) -> "Subgroup":
        return self.subgroup(self.closure(self.index(p) for p in perms))

    @property
    def trivial_subgroup(self) -> "Subgroup":
        return self.subgroup([0])

    @property
    def whole(self) -> "Subgroup":
        return self.subgroup(range(self.order))

    def is_abelian(self) -> bool:
        t = self.mul_table
        return all(t[i][j] == t[j][i] for i in range(self.order) for j in range(i))

    @cached_property
    def subgroups(self) -> tuple["Subgroup", ...]:
        return tuple(all_subgroups(self))

    @cached_property
    def subgroup_classes(self) -> tuple["SubgroupClass", ...]:
        return tuple(conjugacy_classes_of_subgroups(self))

    @cached_property
    def _class_lookup(self) -> dict[frozenset, int]:
        return {m.elementset: c.index for c in self.subgroup_classes for m in c.members}

    def class_of(self, H: "Subgroup | Iterable[int]") -> "SubgroupClass":
        key = H.elementset if isinstance(H, Subgroup) else frozenset(H)
        return self.subgroup_classes[self._class_lookup[key]]


@dataclass(frozen=True, eq=False)
class Subgroup:
    parent: PermGroup
    elements: tuple[int, ...]

    @cached_property
    def elementset(self) -> frozenset[int]:
        return frozenset(self.elements)

    @property
    def order(self) -> int:
        return len(self.elements)

    def __len__(self) -> int:
        return len(self.elements)

    def __contains__(self, g: int) -> bool:
        return g in self.elementset

    def __eq__(self, other) -> bool:
        return (isinstance(other, Subgroup) and self.parent is other.parent
                and self.elements == other.elements)

    def __hash__(self) -> int:
        return hash(self.elements)

    def __repr__(self) -> str:
        return f"Subgroup(order={self.order}, {self.label()})"

    def perms(self) -> list[Perm]:
        return [self.parent.elements[i] for i in self.elements]

    def label(self) -> str:
        return "[" + ",".join("e" if i == 0 else format_perm(self.parent.elements[i])
                              for i in self.elements) + "]"

    def conjugate(self, g: int) -> "Subgroup":
        """g H g^-1."""
        return Subgroup(self.parent, tuple(sorted(self.parent.conj(g, h) for h in self.elements)))

    def is_subgroup_of(self, other: "Subgroup") -> bool:
        return self.elementset <= other.elementset

    def as_group(self, name: str | None = None) -> PermGroup:
        """This subgroup as a permutation group in its own right."""
        return PermGroup(self.parent.degree, self.perms(), name=name,
                         order_cap=max(self.parent.order, 1))

    def normalizer(self) -> "Subgroup":
        G = self.parent
        return G.subgroup(g for g in range(G.order) if self.conjugate(g) == self)


@dataclass(frozen=True)
class SubgroupClass:
    representative: Subgroup
    members: tuple[Subgroup, ...]
    index: int

    @property
    def order(self) -> int:
        """Order of the subgroups in this class."""
        return self.representative.order

    def label(self) -> str:
        return self.representative.label()


# -- named groups ------------------------------------------------------

def _cyclic(n: int):
    if n < 1:
        raise GroupSpecError("cyclic group needs n >= 1")
    return n, [tuple((x + 1) % n for x in range(n))]


def _symmetric(n: int):
    if n < 1:
        raise GroupSpecError("symmetric group needs n >= 1")
    if n == 1:
        return 1, [(0,)]
    gens = [parse_cycles("(0 1)", n)]
    if n > 2:
        gens.append(tuple((x + 1) % n for x in range(n)))
    return n, gens


def _alternating(n: int):
    if n < 1:
        raise GroupSpecError("alternating group needs n >= 1")
    if n < 3:
        return n, [identity_perm(n)]
    return n, [parse_cycles(f"(0 1 {k})", n) for k in range(2, n)]


def dihedral_generators(m: int) -> tuple[int, Perm, Perm]:
    """(degree, rotation, reflection) for the dihedral group of order 2m.

    For m >= 3 the group acts on the m vertices of a polygon.  The degenerate
    cases cannot act faithfully on m points: D2 acts on 2 points (rotation
    trivial) and D4 on 4 points.
    """
    if m < 1:
        raise GroupSpecError("dihedral group needs order >= 2")
    if m == 1:
        return 2, (0, 1), (1, 0)
    if m == 2:
        return 4, (1, 0, 3, 2), (2, 3, 0, 1)
    rot = tuple((x + 1) % m for x in range(m))
    ref = tuple((-x) % m for x in range(m))
    return m, rot, ref


def _dihedral(order: int):
    if order % 2 or order < 2:
        raise GroupSpecError(f"dihedral order must be even and >= 2, got {order}")
    deg, r, s = dihedral_generators(order // 2)
    return deg, [r, s]


# quaternion units 1, i, j, k as indices 0..3; element index = 2*unit + sign
_QUNIT = {
    (0, 0): (0, 0), (0, 1): (1, 0), (0, 2): (2, 0), (0, 3): (3, 0),
    (1, 0): (1, 0), (1, 1): (0, 1), (1, 2): (3, 0), (1, 3): (2, 1),
    (2, 0): (2, 0), (2, 1): (3, 1), (2, 2): (0, 1), (2, 3): (1, 0),
    (3, 0): (3, 0), (3, 1): (2, 0), (3, 2): (1, 1), (3, 3): (0, 1),
}


def _qmul(a: int, b: int) -> int:
    ua, sa = divmod(a, 2)
    ub, sb = divmod(b, 2)
    u, s = _QUNIT[(ua, ub)]
    return 2 * u + ((sa + sb + s) % 2)


def _quaternion():
    # right regular action x -> x g on the 8 elements
    return 8, [tuple(_qmul(x, g) for x in range(8)) for g in (2, 4)]


def _direct_product(parts):
    degree = 0
    gens = []
    for deg, pg in parts:
        for g in pg:
            gens.append((degree, deg, g))
        degree += deg
    out = []
    for off, deg, g in gens:
        img = list(range(degree))
        for x in range(deg):
            img[off + x] = off + g[x]
        out.append(tuple(img))
    return degree, out


def _parse_factor(spec: str):
    m = re.fullmatch(r"([CSAD])(\d+)", spec)
    if m:
        kind, n = m.group(1), int(m.group(2))
        return {"C": _cyclic, "S": _symmetric, "A": _alternating, "D": _dihedral}[kind](n)
    if spec == "Q8":
        return _quaternion()
    raise GroupSpecError(f"unknown group spec: {spec!r}")


_SPEC_CACHE: dict[tuple[str, int], PermGroup] = {}


def group_from_spec(spec: str, order_cap: int | None = None) -> PermGroup:
    """Build a group from ``C<n>``, ``S<n>``, ``A<n>``, ``D<2m>``, ``Q8``,
    ``perm:<cycles>;<cycles>...`` or a direct product ``AxB`` of these.

    Groups are cached per spec, so equal specs give the identical object and
    modules read from separate files can be combined.
    """
    spec = spec.strip()
    cap = default_order_cap() if order_cap is None else order_cap
    key = (spec, cap)
    if key not in _SPEC_CACHE:
        _SPEC_CACHE[key] = _build_from_spec(spec, cap)
    return _SPEC_CACHE[key]


def _build_from_spec(spec: str, order_cap: int) -> PermGroup:
    if spec.startswith("perm:"):
        body = spec[5:]
        gens_txt = [g for g in body.split(";") if g.strip()]
        if not gens_txt:
            raise GroupSpecError("perm: spec needs at least one generator")
        perms = [parse_cycles(g) for g in gens_txt]
        n = max(len(p) for p in perms)
        perms = [p + tuple(range(len(p), n)) for p in perms]
        return PermGroup(n, perms, name=spec, order_cap=order_cap)
    factors = spec.split("x")
    if any(not f for f in factors):
        raise GroupSpecError(f"bad group spec: {spec!r}")
    parts = [_parse_factor(f) for f in factors]
    degree, gens = parts[0] if len(parts) == 1 else _direct_product(parts)
    return PermGroup(degree, gens, name=spec, order_cap=order_cap)


def trivial_group() -> PermGroup:
    return group_from_spec("C1")


def parse_subgroup_spec(G: PermGroup, spec: str) -> Subgroup:
    """Subgroup from a class index (``"3"``) or generators (``"gens:(0 1);(2 3)"``)."""
    spec = spec.strip()
    if spec.isdigit():
        k = int(spec)
        if k >= len(G.subgroup_classes):
            raise GroupSpecError(f"class index {k} out of range (0..{len(G.subgroup_classes) - 1})")
        return G.subgroup_classes[k].representative
    if spec.startswith("gens:"):
        perms = [parse_cycles(t, G.degree) for t in spec[5:].split(";") if t.strip()]
        try:
            return G.subgroup_generated_by(perms)
        except KeyError:
            raise GroupSpecError(f"generators are not elements of {G.name}: {spec!r}")
    raise GroupSpecError(f"bad subgroup spec: {spec!r}")


# -- subgroup enumeration --------------------------------------------------

def all_subgroups(G: PermGroup) -> list[Subgroup]:
    """Every subgroup exactly once, sorted by (order, sorted element list).

    Cyclic extension: start from the cyclic subgroups and repeatedly adjoin
    one more element, deduplicating by element set.
    """
    gens_of: dict[frozenset, tuple[int, ...]] = {}
    for g in range(G.order):
        S = G.closure([g])
        gens_of.setdefault(S, (g,))
    frontier = list(gens_of)
    while frontier:
        new = []
        for S in frontier:
            base = gens_of[S]
            for g in range(G.order):
                if g in S:
                    continue
                T = G.closure(base + (g,))
                if T not in gens_of:
                    gens_of[T] = base + (g,)
                    new.append(T)
        frontier = new
    subs = sorted((tuple(sorted(S)) for S in gens_of), key=lambda t: (len(t), t))
    for t in subs:
        if G.order % len(t):
            raise AssertionError("Lagrange violated; enumeration is broken")
    return [Subgroup(G, t) for t in subs]


def conjugacy_classes_of_subgroups(G: PermGroup) -> list[SubgroupClass]:
    subs = G.subgroups
    assigned: set[tuple] = set()
    raw = []
    for H in subs:
        if H.elements in assigned:
            continue
        orbit = sorted({H.conjugate(g).elements for g in range(G.order)}, key=lambda t: t)
        assigned.update(orbit)
        raw.append(orbit)
    raw.sort(key=lambda orb: (len(orb[0]), orb[0]))
    return [SubgroupClass(Subgroup(G, orb[0]), tuple(Subgroup(G, t) for t in orb), i)
            for i, orb in enumerate(raw)]


def is_subconjugate(G: PermGroup, K: Subgroup, H: Subgroup, strict: bool = False) -> bool:
    """Whether some G-conjugate of K lies in H (strictly: and K is not conjugate to H)."""
    if H.order % K.order:
        return False
    hs = H.elementset
    hit = any(all(G.conj(g, k) in hs for k in K.elements) for g in range(G.order))
    if strict and hit and K.order == H.order:
        return False
    return hit


def normalizer(G: PermGroup, H: Subgroup) -> Subgroup:
    return H.normalizer()


def right_cosets(G: PermGroup, H: Subgroup, within: Subgroup | None = None) -> list[tuple[int, ...]]:
    """Right cosets Hg (g in ``within``), ordered by least element."""
    pool = within.elements if within is not None else range(G.order)
    seen = set()
    out = []
    for g in pool:
        if g in seen:
            continue
        c = tuple(sorted(G.mul(h, g) for h in H.elements))
        seen.update(c)
        out.append(c)
    return out


def left_cosets(G: PermGroup, H: Subgroup) -> list[tuple[int, ...]]:
    """Left cosets gH ordered by least element."""
    seen = set()
    out = []
    for g in range(G.order):
        if g in seen:
            continue
        c = tuple(sorted(G.mul(g, h) for h in H.elements))
        seen.update(c)
        out.append(c)
    return out


def weyl_group(G: PermGroup, H: Subgroup) -> PermGroup:
    """N_G(H)/H acting on the right cosets of H in N_G(H) by right multiplication."""
    N = H.normalizer()
    cosets = right_cosets(G, H, within=N)
    where = {g: i for i, c in enumerate(cosets) for g in c}
    gens = []
    for n in N.elements:
        gens.append(tuple(where[G.mul(c[0], n)] for c in cosets))
    name = f"W({G.name or 'G'};{H.order})"
    return PermGroup(len(cosets), gens, name=name, order_cap=max(G.order, 1))


def double_cosets(G: PermGroup, H: Subgroup, K: Subgroup) -> list[tuple[int, int]]:
    """H\\G/K as (least element, size) pairs, ordered by least element."""
    seen = set()
    out = []
    for g in range(G.order):
        if g in seen:
            continue
        hg = {G.mul(h, g) for h in H.elements}
        c = {G.mul(x, k) for x in hg for k in K.elements}
        seen |= c
        out.append((g, len(c)))
    return out


def fixed_point_count(G: PermGroup, H: Subgroup, K: Subgroup) -> int:
    """|(G/H)^K|: cosets gH with K gH = gH, i.e. g^-1 K g inside H."""
    hs = H.elementset
    count = 0
    seen = set()
    for g in range(G.order):
        if g in seen:
            continue
        seen.update(G.mul(g, h) for h in H.elements)
        gi = G.inv(g)
        if all(G.conj(gi, k) in hs for k in K.elements):
            count += 1
    return count
