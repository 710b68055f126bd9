"""Exact rational scalars and dense matrices over Q.

Everything here is exact: entries are :class:`fractions.Fraction` and no
floating point is ever involved.  Matrices are immutable; every operation
returns a new :class:`MatQ`.

Conventions used across the package:

* vectors are plain tuples of ``Fraction``;
* a matrix acts on column vectors, ``A @ v``;
* the Kronecker product orders the basis ``u_i (x) v_j`` as ``i * dim(V) + j``;
* row reduction takes the first nonzero entry of each column as pivot.
"""

from __future__ import annotations

import re
from fractions import Fraction
from typing import Iterable, Sequence

Rational = Fraction

ZERO = Fraction(0)
ONE = Fraction(1)

_RATIONAL_RE = re.compile(r"^-?\d+(/\d+)?$")


class DimensionError(ValueError):
    """Raised when matrix shapes do not fit an operation."""


def parse_rational(value) -> Fraction:
    """Parse ``"p/q"``, ``"p"`` or an int into a reduced Fraction."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int) and not isinstance(value, bool):
        return Fraction(value)
    if isinstance(value, str) and _RATIONAL_RE.match(value.strip()):
        try:
            return Fraction(value.strip())
        except ZeroDivisionError:
            raise ValueError(f"zero denominator in {value!r}") from None
    raise ValueError(f"not a rational literal: {value!r}")


def format_rational(x) -> str:
    x = Fraction(x)
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


def _frac(x) -> Fraction:
    return x if type(x) is Fraction else Fraction(x)


def zero_vector(n: int) -> tuple:
    return (ZERO,) * n


def unit_vector(n: int, i: int) -> tuple:
    v = [ZERO] * n
    v[i] = ONE
    return tuple(v)


def kron_vector(u: Sequence, v: Sequence) -> tuple:
    return tuple(a * b for a in u for b in v)


def add_vectors(u: Sequence, v: Sequence) -> tuple:
    return tuple(a + b for a, b in zip(u, v))


def scale_vector(c, u: Sequence) -> tuple:
    c = _frac(c)
    return tuple(c * a for a in u)


def is_zero_vector(u: Sequence) -> bool:
    return not any(u)


class MatQ:
    """Immutable dense matrix with exact rational entries."""

    __slots__ = ("rows", "cols", "_r")

    def __init__(self, data: Iterable[Iterable] = (), cols: int | None = None):
        rows = tuple(tuple(_frac(x) for x in row) for row in data)
        if cols is None:
            cols = len(rows[0]) if rows else 0
        for row in rows:
            if len(row) != cols:
                raise DimensionError("ragged matrix rows")
        self.rows = len(rows)
        self.cols = cols
        self._r = rows

    @classmethod
    def _wrap(cls, rows: tuple, cols: int) -> "MatQ":
        m = object.__new__(cls)
        m.rows = len(rows)
        m.cols = cols
        m._r = rows
        return m

    # -- constructors -------------------------------------------------

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "MatQ":
        z = (ZERO,) * cols
        return cls._wrap((z,) * rows, cols)

    @classmethod
    def identity(cls, n: int) -> "MatQ":
        return cls._wrap(tuple(unit_vector(n, i) for i in range(n)), n)

    @classmethod
    def from_flat(cls, rows: int, cols: int, entries: Sequence) -> "MatQ":
        if len(entries) != rows * cols:
            raise DimensionError("entry count does not match shape")
        ent = [_frac(x) for x in entries]
        return cls._wrap(tuple(tuple(ent[i * cols:(i + 1) * cols]) for i in range(rows)), cols)

    @classmethod
    def from_columns(cls, columns: Sequence[Sequence], rows: int) -> "MatQ":
        for c in columns:
            if len(c) != rows:
                raise DimensionError("column length does not match row count")
        cols = [tuple(_frac(x) for x in c) for c in columns]
        return cls._wrap(tuple(tuple(c[i] for c in cols) for i in range(rows)), len(cols))

    @classmethod
    def from_sparse(cls, rows: int, cols: int, entries: dict) -> "MatQ":
        data = [[ZERO] * cols for _ in range(rows)]
        for (i, j), x in entries.items():
            data[i][j] = _frac(x)
        return cls._wrap(tuple(map(tuple, data)), cols)

    @classmethod
    def permutation(cls, images: Sequence[int], signs: Sequence | None = None) -> "MatQ":
        """Matrix sending basis vector j to ``signs[j] * e_{images[j]}``."""
        n = len(images)
        data = [[ZERO] * n for _ in range(n)]
        for j, i in enumerate(images):
            data[i][j] = ONE if signs is None else _frac(signs[j])
        return cls._wrap(tuple(map(tuple, data)), n)

    # -- access -------------------------------------------------------

    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    @property
    def entries(self) -> tuple:
        return tuple(x for row in self._r for x in row)

    def row(self, i: int) -> tuple:
        return self._r[i]

    def column(self, j: int) -> tuple:
        return tuple(row[j] for row in self._r)

    def columns(self) -> list[tuple]:
        return [tuple(c) for c in zip(*self._r)] if self.rows else [()] * self.cols

    def tolist(self) -> list[list[Fraction]]:
        return [list(r) for r in self._r]

    def __getitem__(self, ij):
        i, j = ij
        return self._r[i][j]

    def __iter__(self):
        return iter(self._r)

    def __repr__(self) -> str:
        body = "; ".join(" ".join(format_rational(x) for x in r) for r in self._r)
        return f"MatQ({self.rows}x{self.cols}: [{body}])"

    def __eq__(self, other) -> bool:
        if not isinstance(other, MatQ):
            return NotImplemented
        return self.cols == other.cols and self._r == other._r

    def __hash__(self) -> int:
        return hash((self.rows, self.cols, self._r))

    def is_zero(self) -> bool:
        return not any(any(r) for r in self._r)

    def is_identity(self) -> bool:
        if self.rows != self.cols:
            return False
        return all(x == (i == j) for i, r in enumerate(self._r) for j, x in enumerate(r))

    def is_integral(self) -> bool:
        return all(x.denominator == 1 for r in self._r for x in r)

    # -- arithmetic ---------------------------------------------------

    def __add__(self, other: "MatQ") -> "MatQ":
        if self.shape != other.shape:
            raise DimensionError(f"cannot add {self.shape} and {other.shape}")
        return MatQ._wrap(tuple(tuple(a + b for a, b in zip(r, s))
                                for r, s in zip(self._r, other._r)), self.cols)

    def __sub__(self, other: "MatQ") -> "MatQ":
        if self.shape != other.shape:
            raise DimensionError(f"cannot subtract {other.shape} from {self.shape}")
        return MatQ._wrap(tuple(tuple(a - b for a, b in zip(r, s))
                                for r, s in zip(self._r, other._r)), self.cols)

    def __neg__(self) -> "MatQ":
        return MatQ._wrap(tuple(tuple(-a for a in r) for r in self._r), self.cols)

    def scale(self, c) -> "MatQ":
        c = _frac(c)
        return MatQ._wrap(tuple(tuple(c * a for a in r) for r in self._r), self.cols)

    def __rmul__(self, c) -> "MatQ":
        return self.scale(c)

    def __matmul__(self, other):
        if isinstance(other, MatQ):
            return self._matmul(other)
        return self.apply(other)

    def _matmul(self, other: "MatQ") -> "MatQ":
        if self.cols != other.rows:
            raise DimensionError(f"cannot multiply {self.shape} by {other.shape}")
        n = other.cols
        brows = other._r
        # sparse view of the right factor's rows
        bnz = [[(j, x) for j, x in enumerate(r) if x] for r in brows]
        out = []
        for r in self._r:
            acc = [ZERO] * n
            for k, a in enumerate(r):
                if a:
                    for j, b in bnz[k]:
                        acc[j] += a * b
            out.append(tuple(acc))
        return MatQ._wrap(tuple(out), n)

    def apply(self, v: Sequence) -> tuple:
        if len(v) != self.cols:
            raise DimensionError(f"vector of length {len(v)} for {self.shape} matrix")
        nz = [(j, x) for j, x in enumerate(v) if x]
        return tuple(sum((r[j] * x for j, x in nz), ZERO) for r in self._r)

    @property
    def T(self) -> "MatQ":
        if not self.rows:
            return MatQ._wrap(((),) * self.cols, 0)
        return MatQ._wrap(tuple(zip(*self._r)), self.rows)

    # -- linear algebra -----------------------------------------------

    def rref(self) -> tuple["MatQ", tuple[int, ...]]:
        rows, piv = _rref(self._r, self.cols)
        return MatQ._wrap(tuple(map(tuple, rows)), self.cols), piv

    def rank(self) -> int:
        return len(_rref(self._r, self.cols)[1])

    def kernel(self) -> "MatQ":
        return kernel_basis(self)

    def column_space(self) -> "MatQ":
        """Basis of the image: the pivot columns of this matrix."""
        _, piv = _rref(self._r, self.cols)
        return MatQ._wrap(tuple(tuple(r[j] for j in piv) for r in self._r), len(piv))

    def inverse(self) -> "MatQ":
        if self.rows != self.cols:
            raise DimensionError("only square matrices are invertible")
        n = self.rows
        aug = [list(r) + list(unit_vector(n, i)) for i, r in enumerate(self._r)]
        rows, piv = _rref(aug, 2 * n)
        if piv[:n] != tuple(range(n)):
            raise ZeroDivisionError("matrix is singular")
        return MatQ._wrap(tuple(tuple(r[n:]) for r in rows[:n]), n)

    def is_invertible(self) -> bool:
        return self.rows == self.cols and self.rank() == self.rows

    # -- serialization ------------------------------------------------

    def to_json(self) -> list[list[str]]:
        return [[format_rational(x) for x in r] for r in self._r]

    @classmethod
    def from_json(cls, data, rows: int | None = None, cols: int | None = None) -> "MatQ":
        if rows is not None and rows == 0:
            return cls.zeros(0, cols or 0)
        m = cls([[parse_rational(x) for x in r] for r in data], cols=cols)
        if rows is not None and m.rows != rows:
            raise DimensionError(f"expected {rows} rows, got {m.rows}")
        if cols is not None and m.cols != cols:
            raise DimensionError(f"expected {cols} columns, got {m.cols}")
        return m


def _rref(rows_in, ncols: int):
    """Reduced row echelon form; returns (list of row lists, pivot columns)."""
    rows = [list(r) for r in rows_in]
    nrows = len(rows)
    pivots = []
    r = 0
    for c in range(ncols):
        if r == nrows:
            break
        p = r
        while p < nrows and not rows[p][c]:
            p += 1
        if p == nrows:
            continue
        if p != r:
            rows[r], rows[p] = rows[p], rows[r]
        pr = rows[r]
        lead = pr[c]
        if lead != 1:
            inv = 1 / lead
            for j in range(c, ncols):
                if pr[j]:
                    pr[j] *= inv
        nz = [(j, pr[j]) for j in range(c, ncols) if pr[j]]
        for i in range(nrows):
            if i != r:
                ri = rows[i]
                f = ri[c]
                if f:
                    for j, x in nz:
                        ri[j] -= f * x
        pivots.append(c)
        r += 1
    return rows, tuple(pivots)


def rref(A: MatQ) -> tuple[MatQ, tuple[int, ...]]:
    return A.rref()


def rank(A: MatQ) -> int:
    return A.rank()


def kernel_basis(A: MatQ) -> MatQ:
    """Matrix whose columns form a basis of ker A (cols(A) - rank(A) columns)."""
    rows, piv = _rref(A._r, A.cols)
    n = A.cols
    pivset = set(piv)
    free = [j for j in range(n) if j not in pivset]
    cols = []
    for f in free:
        v = [ZERO] * n
        v[f] = ONE
        for i, p in enumerate(piv):
            x = rows[i][f]
            if x:
                v[p] = -x
        cols.append(v)
    return MatQ.from_columns(cols, n)


def solve_exact(A: MatQ, b: MatQ) -> MatQ | None:
    """Some x with A x = b exactly, or None when b is not in the image of A.

    Free variables are set to zero, so the answer is deterministic.
    """
    if A.rows != b.rows:
        raise DimensionError(f"A has {A.rows} rows but b has {b.rows}")
    n = A.cols
    aug = [list(ra) + list(rb) for ra, rb in zip(A._r, b._r)]
    rows, piv = _rref(aug, n + b.cols)
    if piv and piv[-1] >= n:
        return None
    out = [[ZERO] * b.cols for _ in range(n)]
    for i, p in enumerate(piv):
        out[p] = rows[i][n:]
    return MatQ._wrap(tuple(map(tuple, out)), b.cols)


def kronecker(A: MatQ, B: MatQ) -> MatQ:
    out = []
    for ra in A._r:
        for rb in B._r:
            out.append(tuple(a * b for a in ra for b in rb))
    return MatQ._wrap(tuple(out), A.cols * B.cols)


def hstack(mats: Sequence[MatQ], rows: int | None = None) -> MatQ:
    if not mats:
        return MatQ.zeros(rows or 0, 0)
    r = mats[0].rows
    if any(m.rows != r for m in mats):
        raise DimensionError("hstack with different row counts")
    return MatQ._wrap(tuple(tuple(x for m in mats for x in m._r[i]) for i in range(r)),
                      sum(m.cols for m in mats))


def vstack(mats: Sequence[MatQ], cols: int | None = None) -> MatQ:
    if not mats:
        return MatQ.zeros(0, cols or 0)
    c = mats[0].cols
    if any(m.cols != c for m in mats):
        raise DimensionError("vstack with different column counts")
    return MatQ._wrap(tuple(r for m in mats for r in m._r), c)


def block_diag(mats: Sequence[MatQ]) -> MatQ:
    n = sum(m.cols for m in mats)
    out = []
    off = 0
    for m in mats:
        pre = (ZERO,) * off
        post = (ZERO,) * (n - off - m.cols)
        for r in m._r:
            out.append(pre + r + post)
        off += m.cols
    return MatQ._wrap(tuple(out), n)


def bilinear_transport(T: MatQ, A: MatQ, B: MatQ) -> MatQ:
    """Compute ``T @ kronecker(A, B)`` without forming the Kronecker product.

    ``T`` has ``A.rows * B.rows`` columns.  The contraction runs in two stages
    and skips zero entries, which matters for the sparse inclusion and
    projection matrices used by functor checks.
    """
    m, n = A.rows, B.rows
    if T.cols != m * n:
        raise DimensionError("bilinear table does not match factor sizes")
    mp, np_ = A.cols, B.cols
    bnz = [[(j, x) for j, x in enumerate(B._r[v]) if x] for v in range(n)]
    anz = [[(i, x) for i, x in enumerate(A._r[u]) if x] for u in range(m)]
    out = []
    for row in T._r:
        # stage 1: S[u][j] = sum_v row[u*n + v] * B[v][j]
        res = [ZERO] * (mp * np_)
        for u in range(m):
            if not anz[u]:
                continue
            s = [ZERO] * np_
            hit = False
            base = u * n
            for v in range(n):
                t = row[base + v]
                if t:
                    for j, x in bnz[v]:
                        s[j] += t * x
                        hit = True
            if not hit:
                continue
            snz = [(j, x) for j, x in enumerate(s) if x]
            for i, a in anz[u]:
                off = i * np_
                for j, x in snz:
                    res[off + j] += a * x
        out.append(tuple(res))
    return MatQ._wrap(tuple(out), mp * np_)


class SparseEchelon:
    """Incrementally maintained reduced echelon basis of a subspace of Q^dim.

    Vectors are dicts ``{index: Fraction}``.  Each stored row has coefficient
    one at its pivot (its smallest index) and zero at every other pivot, so a
    single pass over the pivots reduces any vector.  The non-pivot indices
    give a canonical complement, which is how quotients are realized.
    """

    def __init__(self, dim: int):
        self.dim = dim
        self.rows: dict[int, dict[int, Fraction]] = {}

    def __len__(self) -> int:
        return len(self.rows)

    def reduce(self, vec: dict) -> dict:
        v = {k: x for k, x in vec.items() if x}
        for p in [k for k in v if k in self.rows]:
            c = v.get(p)
            if not c:
                continue
            for k, x in self.rows[p].items():
                y = v.get(k, ZERO) - c * x
                if y:
                    v[k] = y
                else:
                    v.pop(k, None)
        return v

    def add(self, vec: dict) -> bool:
        v = self.reduce(vec)
        if not v:
            return False
        p = min(v)
        inv = 1 / v[p]
        if inv != 1:
            v = {k: x * inv for k, x in v.items()}
        for row in self.rows.values():
            c = row.get(p)
            if c:
                for k, x in v.items():
                    y = row.get(k, ZERO) - c * x
                    if y:
                        row[k] = y
                    else:
                        row.pop(k, None)
        self.rows[p] = v
        return True

    def complement(self) -> list[int]:
        """Indices not used as pivots, ascending."""
        return [i for i in range(self.dim) if i not in self.rows]

    def contains(self, vec: dict) -> bool:
        return not self.reduce(vec)


def dense_to_sparse(v: Sequence) -> dict:
    return {i: x for i, x in enumerate(v) if x}


def sparse_to_dense(v: dict, n: int) -> tuple:
    out = [ZERO] * n
    for i, x in v.items():
        out[i] = x
    return tuple(out)
