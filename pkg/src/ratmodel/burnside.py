"""The rational Burnside ring A(G) (x) Q of a finite group.

Elements are stored in the basis of transitive G-sets ``[G/H]``, one
coefficient per conjugacy class of subgroups in the canonical order of
:mod:`ratmodel.permgrp`.  The mark of ``x`` at ``(K)`` is
``sum_H coeff_H(x) * |(G/H)^K|``; because the canonical class order refines
subconjugacy, the table of marks is lower triangular and marks are inverted
by back substitution.

The primitive idempotents ``e_(H)`` are the elements whose mark vector is
the indicator of ``(H)``.
"""

from __future__ import annotations

from collections import Counter, deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence

from .exactq import MatQ, ZERO, ONE, format_rational, parse_rational
from .permgrp import (PermGroup, Subgroup, SubgroupClass, double_cosets, fixed_point_count,
                      left_cosets, weyl_group)

DEFAULT_POWER_BOUND = 20_000


class GroupMismatch(ValueError):
    pass


class FamilyNotClosed(ValueError):
    pass


class SizeBoundExceeded(ValueError):
    pass


@dataclass(frozen=True)
class TableOfMarks:
    group: PermGroup
    classes: tuple[SubgroupClass, ...]
    matrix: MatQ

    def mark(self, h: int, k: int) -> Fraction:
        return self.matrix[h, k]

    def to_tsv(self) -> str:
        labels = [c.label() for c in self.classes]
        lines = ["\t".join(["G/H \\ K"] + labels)]
        for i, lab in enumerate(labels):
            lines.append("\t".join([lab] + [format_rational(x) for x in self.matrix.row(i)]))
        return "\n".join(lines) + "\n"

    def to_json(self) -> dict:
        return {
            "group": self.group.name,
            "classes": [_class_json(c) for c in self.classes],
            "marks": self.matrix.to_json(),
        }


def _class_json(c: SubgroupClass) -> dict:
    return {"index": c.index, "order": c.order, "representative": c.label(),
            "size": len(c.members)}


@dataclass(frozen=True)
class BurnsideElement:
    group: PermGroup
    coefficients: tuple[Fraction, ...]

    def __post_init__(self):
        if len(self.coefficients) != len(self.group.subgroup_classes):
            raise ValueError("coefficient vector length must equal the number of classes")

    @classmethod
    def basis(cls, G: PermGroup, k: int) -> "BurnsideElement":
        v = [ZERO] * len(G.subgroup_classes)
        v[k] = ONE
        return cls(G, tuple(v))

    @classmethod
    def zero(cls, G: PermGroup) -> "BurnsideElement":
        return cls(G, (ZERO,) * len(G.subgroup_classes))

    @classmethod
    def one(cls, G: PermGroup) -> "BurnsideElement":
        return cls.basis(G, len(G.subgroup_classes) - 1)

    def _check(self, other: "BurnsideElement"):
        if other.group is not self.group:
            raise GroupMismatch("Burnside elements over different groups")

    def __add__(self, other: "BurnsideElement") -> "BurnsideElement":
        self._check(other)
        return BurnsideElement(self.group, tuple(a + b for a, b in zip(self.coefficients, other.coefficients)))

    def __sub__(self, other: "BurnsideElement") -> "BurnsideElement":
        self._check(other)
        return BurnsideElement(self.group, tuple(a - b for a, b in zip(self.coefficients, other.coefficients)))

    def __neg__(self) -> "BurnsideElement":
        return BurnsideElement(self.group, tuple(-a for a in self.coefficients))

    def scale(self, c) -> "BurnsideElement":
        c = Fraction(c)
        return BurnsideElement(self.group, tuple(c * a for a in self.coefficients))

    def __rmul__(self, c) -> "BurnsideElement":
        return self.scale(c)

    def __mul__(self, other):
        if isinstance(other, BurnsideElement):
            return multiply(self, other)
        return self.scale(other)

    def is_zero(self) -> bool:
        return not any(self.coefficients)

    def to_json(self) -> list[str]:
        return [format_rational(x) for x in self.coefficients]

    @classmethod
    def from_json(cls, G: PermGroup, data: Sequence) -> "BurnsideElement":
        return cls(G, tuple(parse_rational(x) for x in data))

    def __str__(self) -> str:
        terms = []
        for c, x in zip(self.group.subgroup_classes, self.coefficients):
            if x:
                terms.append(f"{format_rational(x)}*[G/H{c.index}]")
        return " + ".join(terms) or "0"


@dataclass(frozen=True)
class MarksVector:
    group: PermGroup
    values: tuple[Fraction, ...]

    def __mul__(self, other: "MarksVector") -> "MarksVector":
        return MarksVector(self.group, tuple(a * b for a, b in zip(self.values, other.values)))


@dataclass(frozen=True)
class SubgroupFamily:
    """A set of subgroup classes closed under subconjugacy."""

    group: PermGroup
    classes: frozenset[int]

    def __post_init__(self):
        sub = subconjugacy_matrix(self.group)
        for h in self.classes:
            for k in range(len(self.group.subgroup_classes)):
                if sub[k][h] and k not in self.classes:
                    raise FamilyNotClosed(
                        f"class {k} is subconjugate to class {h} but not in the family")

    @classmethod
    def below(cls, G: PermGroup, h: int, strict: bool = False) -> "SubgroupFamily":
        """[<= H] or, with ``strict``, [< H]."""
        sub = subconjugacy_matrix(G)
        ks = {k for k in range(len(G.subgroup_classes)) if sub[k][h] and not (strict and k == h)}
        return cls(G, frozenset(ks))

    @classmethod
    def everything(cls, G: PermGroup) -> "SubgroupFamily":
        return cls(G, frozenset(range(len(G.subgroup_classes))))


# -- table of marks --------------------------------------------------------

_TOM_CACHE: dict[int, TableOfMarks] = {}


def table_of_marks(G: PermGroup, workers: int = 1) -> TableOfMarks:
    """Marks |(G/H)^K| for canonical representatives; row (H), column (K)."""
    key = id(G)
    cached = _TOM_CACHE.get(key)
    if cached is not None and cached.group is G:
        return cached
    classes = G.subgroup_classes
    reps = [c.representative for c in classes]

    def row(H: Subgroup) -> list[int]:
        return [fixed_point_count(G, H, K) if K.order <= H.order else 0 for K in reps]

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(row, reps))
    else:
        rows = [row(H) for H in reps]
    tom = TableOfMarks(G, classes, MatQ(rows))
    _TOM_CACHE[key] = tom
    return tom


def subconjugacy_matrix(G: PermGroup) -> list[list[bool]]:
    """``sub[k][h]``: class k is subconjugate to class h (nonzero mark)."""
    m = table_of_marks(G).matrix
    n = m.rows
    return [[bool(m[h, k]) for h in range(n)] for k in range(n)]


def marks(x: BurnsideElement) -> MarksVector:
    m = table_of_marks(x.group).matrix
    n = m.rows
    vals = []
    for k in range(n):
        s = ZERO
        for h in range(k, n):
            c = x.coefficients[h]
            if c:
                s += c * m[h, k]
        vals.append(s)
    return MarksVector(x.group, tuple(vals))


def from_marks(v: MarksVector) -> BurnsideElement:
    """Solve the triangular marks system by back substitution."""
    G = v.group
    m = table_of_marks(G).matrix
    n = m.rows
    coeff = [ZERO] * n
    # mark at K only sees classes H with K subconjugate to H, i.e. h >= k
    for k in range(n - 1, -1, -1):
        s = v.values[k]
        for h in range(k + 1, n):
            if coeff[h]:
                s -= coeff[h] * m[h, k]
        coeff[k] = s / m[k, k]
    return BurnsideElement(G, tuple(coeff))


# -- products ----------------------------------------------------------------

@lru_cache(maxsize=None)
def _basis_product(G: PermGroup, h: int, k: int) -> tuple[tuple[int, int], ...]:
    """[G/H][G/K] as (class index, multiplicity) pairs via double cosets."""
    H = G.subgroup_classes[h].representative
    K = G.subgroup_classes[k].representative
    counts: Counter = Counter()
    for g, _size in double_cosets(G, H, K):
        # stabilizer of (eH, gK) is H intersected with g K g^-1
        gkg = {G.conj(g, x) for x in K.elements}
        stab = H.elementset & gkg
        counts[G.class_of(stab).index] += 1
    return tuple(sorted(counts.items()))


def multiply(x: BurnsideElement, y: BurnsideElement) -> BurnsideElement:
    x._check(y)
    G = x.group
    out = [ZERO] * len(G.subgroup_classes)
    for h, a in enumerate(x.coefficients):
        if not a:
            continue
        for k, b in enumerate(y.coefficients):
            if not b:
                continue
            for c, mult in _basis_product(G, h, k):
                out[c] += a * b * mult
    return BurnsideElement(G, tuple(out))


def multiply_via_marks(x: BurnsideElement, y: BurnsideElement) -> BurnsideElement:
    x._check(y)
    return from_marks(marks(x) * marks(y))


# -- idempotents -------------------------------------------------------------

def idempotent(G: PermGroup, h: int) -> BurnsideElement:
    n = len(G.subgroup_classes)
    return from_marks(MarksVector(G, tuple(ONE if k == h else ZERO for k in range(n))))


def idempotent_basis(G: PermGroup) -> list[BurnsideElement]:
    return [idempotent(G, h) for h in range(len(G.subgroup_classes))]


def family_idempotent(F: SubgroupFamily) -> BurnsideElement:
    G = F.group
    out = BurnsideElement.zero(G)
    for h in sorted(F.classes):
        out = out + idempotent(G, h)
    return out


def support(x: BurnsideElement) -> frozenset[int]:
    return frozenset(k for k, v in enumerate(marks(x).values) if v)


# -- restriction -------------------------------------------------------------

@dataclass
class Restriction:
    """Restriction along an inclusion H <= G, with H as a group in its own right."""

    G: PermGroup
    H: Subgroup
    group: PermGroup = field(init=False)

    def __post_init__(self):
        self.group = self.H.as_group(name=f"{self.G.name or 'G'}|H{self.H.order}")

    def to_sub(self, elements: Iterable[int]) -> frozenset[int]:
        """Translate G-element indices into indices of the restricted group."""
        return frozenset(self.group.index(self.G.elements[g]) for g in elements)

    def to_parent(self, elements: Iterable[int]) -> frozenset[int]:
        return frozenset(self.G.index(self.group.elements[g]) for g in elements)

    @property
    def basis_images(self) -> list[BurnsideElement]:
        """res [G/K] decomposed into H-orbits, for each G-class (K)."""
        cached = getattr(self, "_images", None)
        if cached is not None:
            return cached
        G, H, Hg = self.G, self.H, self.group
        out = []
        for c in G.subgroup_classes:
            K = c.representative
            coeff = [ZERO] * len(Hg.subgroup_classes)
            for g, _ in double_cosets(G, H, K):
                gkg = {G.conj(g, x) for x in K.elements}
                stab = H.elementset & gkg
                coeff[Hg.class_of(self.to_sub(stab)).index] += 1
            out.append(BurnsideElement(Hg, tuple(coeff)))
        self._images = out
        return out

    def __call__(self, x: BurnsideElement) -> BurnsideElement:
        if x.group is not self.G:
            raise GroupMismatch("element is not over the restricted group")
        out = BurnsideElement.zero(self.group)
        for a, img in zip(x.coefficients, self.basis_images):
            if a:
                out = out + img.scale(a)
        return out

    def parent_class(self, k: int) -> int:
        """G-class of the H-class with index k."""
        rep = self.group.subgroup_classes[k].representative
        return self.G.class_of(self.to_parent(rep.elements)).index


def restrict(x: BurnsideElement, H: Subgroup) -> BurnsideElement:
    return Restriction(x.group, H)(x)


# -- coset powers ------------------------------------------------------------

def power_decomposition(G: PermGroup, H: Subgroup, i: int,
                        size_bound: int = DEFAULT_POWER_BOUND) -> dict[int, int]:
    """Orbit decomposition of (G/H)^i as {class index: multiplicity}.

    Orbits are enumerated directly on the i-fold product; the stabilizer of
    each orbit's first point is the intersection of the coordinate stabilizers.
    """
    if i < 1:
        raise ValueError("power must be >= 1")
    cosets = left_cosets(G, H)
    m = len(cosets)
    if m ** i > size_bound:
        raise SizeBoundExceeded(f"|G/H|^{i} = {m ** i} exceeds the bound {size_bound}")
    where = {g: c for c, cos in enumerate(cosets) for g in cos}
    act = [[where[G.mul(g, cos[0])] for cos in cosets] for g in range(G.order)]
    gens = [g for g in G.generator_indices if g != 0] or [0]
    seen = bytearray(m ** i)

    def encode(t):
        code = 0
        for x in t:
            code = code * m + x
        return code

    def decode(code):
        t = []
        for _ in range(i):
            code, x = divmod(code, m)
            t.append(x)
        return tuple(reversed(t))

    counts: Counter = Counter()
    for start in range(m ** i):
        if seen[start]:
            continue
        seen[start] = 1
        queue = deque([start])
        while queue:
            t = decode(queue.popleft())
            for g in gens:
                c = encode(act[g][x] for x in t)
                if not seen[c]:
                    seen[c] = 1
                    queue.append(c)
        pt = decode(start)
        stab = [g for g in range(G.order) if all(act[g][x] == x for x in pt)]
        counts[G.class_of(stab).index] += 1
    return dict(sorted(counts.items()))


def power_element(G: PermGroup, H: Subgroup, i: int) -> BurnsideElement:
    """[G/H]^i computed by repeated Burnside multiplication."""
    x = BurnsideElement.basis(G, G.class_of(H).index)
    out = x
    for _ in range(i - 1):
        out = out * x
    return out


# -- splitting report --------------------------------------------------------

@dataclass
class SplitReport:
    group: PermGroup
    idempotents: list[BurnsideElement]
    labels: list[str]
    checks: dict[str, bool]

    @property
    def passed(self) -> bool:
        return all(self.checks.values())

    def to_json(self) -> dict:
        return {
            "group": self.group.name,
            "idempotents": [{"label": lab, "coefficients": e.to_json(),
                             "support": sorted(support(e))}
                            for lab, e in zip(self.labels, self.idempotents)],
            "checks": {k: ("pass" if v else "fail") for k, v in self.checks.items()},
        }

    def to_text(self) -> str:
        lines = [f"group\t{self.group.name}\torder\t{self.group.order}"]
        for lab, e in zip(self.labels, self.idempotents):
            lines.append(f"{lab}\t" + "\t".join(e.to_json()))
        for k, v in self.checks.items():
            lines.append(f"check\t{k}\t{'pass' if v else 'fail'}")
        return "\n".join(lines) + "\n"


def check_decomposition(elements: Sequence[BurnsideElement]) -> dict[str, bool]:
    """Exact checks that ``elements`` is an orthogonal idempotent splitting of 1."""
    if not elements:
        return {"idempotent": False, "orthogonal": False, "sum_is_unit": False}
    G = elements[0].group
    idem = all(multiply(e, e) == e for e in elements)
    orth = all(multiply(a, b).is_zero()
               for i, a in enumerate(elements) for j, b in enumerate(elements) if i != j)
    total = BurnsideElement.zero(G)
    for e in elements:
        total = total + e
    return {"idempotent": idem, "orthogonal": orth, "sum_is_unit": total == BurnsideElement.one(G)}


def split_unit_report(G: PermGroup, elements: Sequence[BurnsideElement] | None = None) -> SplitReport:
    if elements is None:
        elements = idempotent_basis(G)
        labels = [f"e{c.index}:{c.label()}" for c in G.subgroup_classes]
    else:
        labels = [f"x{i}" for i in range(len(elements))]
    return SplitReport(G, list(elements), labels, check_decomposition(elements))


def weyl_order(G: PermGroup, H: Subgroup) -> int:
    return weyl_group(G, H).order
