"""Exact rational linear algebra: scalars, vectors, matrices and subspaces.

Everything here works over :class:`fractions.Fraction`; there is deliberately
no floating point in this module.  Vectors are plain tuples of fractions,
matrices are immutable :class:`Matrix` values stored row-major.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from typing import Iterable, Optional, Sequence

__all__ = [
    "ContractViolation",
    "Vector",
    "as_fraction",
    "format_fraction",
    "parse_fraction",
    "vector",
    "unit_vector",
    "zero_vector",
    "dot",
    "vadd",
    "vsub",
    "vscale",
    "is_zero",
    "Matrix",
    "LinearMap",
    "rref",
    "nullspace",
    "solve",
    "det",
    "Subspace",
    "contains",
    "intersect",
    "dim",
    "is_rational_square",
    "rational_sqrt",
]


class ContractViolation(ValueError):
    """Raised when an operation is called with mismatched shapes or arities."""


Vector = tuple  # tuple[Fraction, ...]


# -- scalars -----------------------------------------------------------------

def as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("booleans are not scalars")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return parse_fraction(x)
    if isinstance(x, float):
        raise TypeError(f"refusing to convert float {x!r} to an exact scalar")
    # numpy integers and friends
    if hasattr(x, "__index__"):
        return Fraction(x.__index__())
    raise TypeError(f"cannot interpret {x!r} as an exact scalar")


def format_fraction(q) -> str:
    """Serialize as ``"p/q"``, dropping the denominator when it is 1."""
    q = as_fraction(q)
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


def parse_fraction(s: str) -> Fraction:
    s = s.strip()
    num, sep, den = s.partition("/")
    try:
        if sep:
            return Fraction(int(num), int(den))
        return Fraction(int(num))
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"not an exact rational: {s!r}") from exc


def is_rational_square(q) -> bool:
    q = as_fraction(q)
    if q < 0:
        return False
    n, d = q.numerator, q.denominator
    return math.isqrt(n) ** 2 == n and math.isqrt(d) ** 2 == d


def rational_sqrt(q) -> Optional[Fraction]:
    """Exact square root of a non-negative rational, or None if irrational."""
    q = as_fraction(q)
    if not is_rational_square(q):
        return None
    return Fraction(math.isqrt(q.numerator), math.isqrt(q.denominator))


# -- vectors -----------------------------------------------------------------

def vector(xs: Iterable) -> Vector:
    return tuple(as_fraction(x) for x in xs)


def zero_vector(d: int) -> Vector:
    return (Fraction(0),) * d


def unit_vector(i: int, d: int) -> Vector:
    """Standard basis vector with a 1 at 0-based position ``i``."""
    v = [Fraction(0)] * d
    v[i] = Fraction(1)
    return tuple(v)


def _same_len(u, v):
    if len(u) != len(v):
        raise ContractViolation(f"vector lengths differ: {len(u)} != {len(v)}")


def dot(u, v) -> Fraction:
    _same_len(u, v)
    return sum((a * b for a, b in zip(u, v)), Fraction(0))


def vadd(u, v) -> Vector:
    _same_len(u, v)
    return tuple(a + b for a, b in zip(u, v))


def vsub(u, v) -> Vector:
    _same_len(u, v)
    return tuple(a - b for a, b in zip(u, v))


def vscale(c, v) -> Vector:
    c = as_fraction(c)
    return tuple(c * a for a in v)


def is_zero(v) -> bool:
    return all(a == 0 for a in v)


# -- matrices ----------------------------------------------------------------

@dataclass(frozen=True)
class Matrix:
    """Immutable dense matrix of fractions, row-major.

    Also serves as a linear map on coordinate columns: ``M(v)`` is ``M @ v``.
    """

    rows: int
    cols: int
    entries: tuple

    def __post_init__(self):
        if self.rows < 0 or self.cols < 0:
            raise ContractViolation("negative matrix shape")
        entries = tuple(as_fraction(x) for x in self.entries)
        if len(entries) != self.rows * self.cols:
            raise ContractViolation(
                f"{len(entries)} entries for a {self.rows}x{self.cols} matrix"
            )
        object.__setattr__(self, "entries", entries)

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence], cols: Optional[int] = None) -> "Matrix":
        rows = [list(r) for r in rows]
        if cols is None:
            if not rows:
                raise ContractViolation("cannot infer column count of an empty matrix")
            cols = len(rows[0])
        for r in rows:
            if len(r) != cols:
                raise ContractViolation("ragged rows")
        return cls(len(rows), cols, tuple(x for r in rows for x in r))

    @classmethod
    def from_columns(cls, columns: Sequence[Sequence], rows: Optional[int] = None) -> "Matrix":
        return cls.from_rows(columns, rows).T

    @classmethod
    def zeros(cls, rows: int, cols: Optional[int] = None) -> "Matrix":
        cols = rows if cols is None else cols
        return cls(rows, cols, (Fraction(0),) * (rows * cols))

    @classmethod
    def identity(cls, n: int) -> "Matrix":
        return cls(n, n, tuple(Fraction(int(i == j)) for i in range(n) for j in range(n)))

    @classmethod
    def unit(cls, i: int, j: int, n: int) -> "Matrix":
        """Matrix unit e_ij (0-based) of size n x n."""
        e = [Fraction(0)] * (n * n)
        e[i * n + j] = Fraction(1)
        return cls(n, n, tuple(e))

    @classmethod
    def from_flat(cls, flat: Sequence, n: int) -> "Matrix":
        return cls(n, n, tuple(flat))

    @property
    def shape(self):
        return (self.rows, self.cols)

    @property
    def is_square(self) -> bool:
        return self.rows == self.cols

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i * self.cols + j]

    def row(self, i: int) -> Vector:
        return self.entries[i * self.cols:(i + 1) * self.cols]

    def col(self, j: int) -> Vector:
        return self.entries[j::self.cols]

    def to_rows(self) -> list:
        return [self.row(i) for i in range(self.rows)]

    @property
    def T(self) -> "Matrix":
        return Matrix(self.cols, self.rows, tuple(x for j in range(self.cols) for x in self.col(j)))

    def _check_shape(self, other: "Matrix"):
        if self.shape != other.shape:
            raise ContractViolation(f"shape mismatch {self.shape} vs {other.shape}")

    def __add__(self, other: "Matrix") -> "Matrix":
        self._check_shape(other)
        return Matrix(self.rows, self.cols, tuple(a + b for a, b in zip(self.entries, other.entries)))

    def __sub__(self, other: "Matrix") -> "Matrix":
        self._check_shape(other)
        return Matrix(self.rows, self.cols, tuple(a - b for a, b in zip(self.entries, other.entries)))

    def __neg__(self) -> "Matrix":
        return Matrix(self.rows, self.cols, tuple(-a for a in self.entries))

    def __mul__(self, c) -> "Matrix":
        c = as_fraction(c)
        return Matrix(self.rows, self.cols, tuple(c * a for a in self.entries))

    __rmul__ = __mul__

    def apply(self, v) -> Vector:
        if len(v) != self.cols:
            raise ContractViolation(f"vector of length {len(v)} for a {self.rows}x{self.cols} matrix")
        v = vector(v)
        nz = [(j, x) for j, x in enumerate(v) if x]
        out = []
        e = self.entries
        for i in range(self.rows):
            base = i * self.cols
            out.append(sum((e[base + j] * x for j, x in nz if e[base + j]), Fraction(0)))
        return tuple(out)

    __call__ = apply

    def __matmul__(self, other):
        if not isinstance(other, Matrix):
            return self.apply(other)
        if self.cols != other.rows:
            raise ContractViolation(f"cannot multiply {self.shape} by {other.shape}")
        cols = [other.col(j) for j in range(other.cols)]
        out = []
        for i in range(self.rows):
            r = self.row(i)
            for c in cols:
                out.append(sum((a * b for a, b in zip(r, c) if a and b), Fraction(0)))
        return Matrix(self.rows, other.cols, tuple(out))

    def is_zero(self) -> bool:
        return all(a == 0 for a in self.entries)

    def is_antisymmetric(self) -> bool:
        if not self.is_square:
            return False
        n = self.rows
        return all(self[i, j] == -self[j, i] for i in range(n) for j in range(i, n))

    def to_json(self) -> list:
        return [[format_fraction(x) for x in r] for r in self.to_rows()]

    @classmethod
    def from_json(cls, data) -> "Matrix":
        if not isinstance(data, list) or not data or not all(isinstance(r, list) for r in data):
            raise ValueError("matrix JSON must be a non-empty array of arrays")
        return cls.from_rows([[as_fraction(x) for x in r] for r in data])

    def __repr__(self):
        body = "; ".join(" ".join(format_fraction(x) for x in r) for r in self.to_rows())
        return f"Matrix({self.rows}x{self.cols}: [{body}])"


LinearMap = Matrix


# -- elimination -------------------------------------------------------------

def _integer_row(row) -> list:
    den = reduce(math.lcm, (x.denominator for x in row), 1)
    return _primitive([x.numerator * (den // x.denominator) for x in row])


def _primitive(row: list) -> list:
    g = math.gcd(*row)
    if g > 1:
        return [a // g for a in row]
    return row


def _eliminate(rows: list, ncols: int, stop_col: Optional[int] = None):
    """Fraction-free Gauss-Jordan on integer rows, in place.

    Rows are kept primitive (content divided out) after every update, which
    keeps coefficient growth in check.  Returns the pivot columns.
    """
    stop_col = ncols if stop_col is None else stop_col
    pivots = []
    r = 0
    nrows = len(rows)
    for c in range(stop_col):
        if r == nrows:
            break
        piv = next((i for i in range(r, nrows) if rows[i][c] != 0), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        prow = rows[r]
        p = prow[c]
        nzp = [k for k in range(ncols) if prow[k]]
        for i in range(nrows):
            if i == r:
                continue
            row = rows[i]
            f = row[c]
            if not f:
                continue
            new = [p * a for a in row]
            for k in nzp:
                new[k] -= f * prow[k]
            rows[i] = _primitive(new)
        pivots.append(c)
        r += 1
    return pivots


def rref(m: Matrix):
    """Reduced row-echelon form over the rationals.

    Returns ``(reduced, rank, pivot_cols)``; ``reduced`` has the same shape
    as ``m`` with zero rows at the bottom.
    """
    rows = [_integer_row(m.row(i)) for i in range(m.rows)]
    pivots = _eliminate(rows, m.cols)
    out = []
    for row, pc in zip(rows, pivots):
        p = row[pc]
        out.extend(Fraction(a, p) for a in row)
    out.extend([Fraction(0)] * ((m.rows - len(pivots)) * m.cols))
    return Matrix(m.rows, m.cols, tuple(out)), len(pivots), tuple(pivots)


def det(m: Matrix) -> Fraction:
    if not m.is_square:
        raise ContractViolation("determinant of a non-square matrix")
    n = m.rows
    a = [list(m.row(i)) for i in range(n)]
    sign = 1
    result = Fraction(1)
    for c in range(n):
        piv = next((i for i in range(c, n) if a[i][c] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != c:
            a[c], a[piv] = a[piv], a[c]
            sign = -sign
        p = a[c][c]
        result *= p
        for i in range(c + 1, n):
            f = a[i][c] / p
            if f:
                a[i] = [x - f * y for x, y in zip(a[i], a[c])]
    return sign * result


def nullspace(m: Matrix) -> "Subspace":
    """Kernel of ``m`` as a canonical subspace of Q^cols."""
    reduced, rank, pivots = rref(m)
    n = m.cols
    free = [j for j in range(n) if j not in set(pivots)]
    basis = []
    for f in free:
        v = [Fraction(0)] * n
        v[f] = Fraction(1)
        for r, pc in enumerate(pivots):
            v[pc] = -reduced[r, f]
        basis.append(v)
    return Subspace.span(basis, n)


def solve(m: Matrix, b) -> Optional[Vector]:
    """Some solution of ``m v = b`` with free variables set to zero, or None."""
    if len(b) != m.rows:
        raise ContractViolation(f"right-hand side of length {len(b)} for {m.rows} equations")
    b = vector(b)
    aug = Matrix(m.rows, m.cols + 1, tuple(
        x for i in range(m.rows) for x in m.row(i) + (b[i],)
    ))
    rows = [_integer_row(aug.row(i)) for i in range(aug.rows)]
    pivots = _eliminate(rows, aug.cols, stop_col=m.cols)
    for row in rows[len(pivots):]:
        if row[-1] != 0:
            return None
    v = [Fraction(0)] * m.cols
    for row, pc in zip(rows, pivots):
        v[pc] = Fraction(row[-1], row[pc])
    return tuple(v)


# -- subspaces ---------------------------------------------------------------

@dataclass(frozen=True)
class Subspace:
    """Linear subspace of Q^ambient_dim held by its reduced echelon basis.

    Two equal subspaces have identical ``basis`` matrices, so ``==`` is
    set equality.
    """

    ambient_dim: int
    basis: Matrix

    @classmethod
    def span(cls, vectors: Iterable, ambient_dim: int) -> "Subspace":
        vecs = [vector(v) for v in vectors]
        for v in vecs:
            if len(v) != ambient_dim:
                raise ContractViolation(f"vector of length {len(v)} in ambient dimension {ambient_dim}")
        if not vecs:
            return cls(ambient_dim, Matrix(0, ambient_dim, ()))
        reduced, rank, _ = rref(Matrix.from_rows(vecs, ambient_dim))
        return cls(ambient_dim, Matrix(rank, ambient_dim, reduced.entries[: rank * ambient_dim]))

    @classmethod
    def full(cls, d: int) -> "Subspace":
        return cls(d, Matrix.identity(d))

    @classmethod
    def zero(cls, d: int) -> "Subspace":
        return cls(d, Matrix(0, d, ()))

    @property
    def dim(self) -> int:
        return self.basis.rows

    @property
    def vectors(self) -> list:
        return self.basis.to_rows()

    def _check(self, other: "Subspace"):
        if self.ambient_dim != other.ambient_dim:
            raise ContractViolation(
                f"ambient dimensions differ: {self.ambient_dim} != {other.ambient_dim}"
            )

    def contains(self, v) -> bool:
        if len(v) != self.ambient_dim:
            raise ContractViolation(f"vector of length {len(v)} in ambient dimension {self.ambient_dim}")
        v = vector(v)
        if self.dim == 0:
            return is_zero(v)
        # reduce v against the echelon basis
        _, rank, _ = rref(Matrix.from_rows(self.vectors + [v], self.ambient_dim))
        return rank == self.dim

    def __contains__(self, v) -> bool:
        return self.contains(v)

    def issubset(self, other: "Subspace") -> bool:
        self._check(other)
        return all(other.contains(v) for v in self.vectors)

    def __add__(self, other: "Subspace") -> "Subspace":
        self._check(other)
        return Subspace.span(self.vectors + other.vectors, self.ambient_dim)

    def complement(self) -> "Subspace":
        """Orthogonal complement under the standard dot product."""
        if self.dim == 0:
            return Subspace.full(self.ambient_dim)
        return nullspace(self.basis)

    def intersect(self, other: "Subspace") -> "Subspace":
        self._check(other)
        return (self.complement() + other.complement()).complement()

    def __and__(self, other: "Subspace") -> "Subspace":
        return self.intersect(other)


def contains(s: Subspace, v) -> bool:
    return s.contains(v)


def intersect(s: Subspace, t: Subspace) -> Subspace:
    return s.intersect(t)


def dim(s: Subspace) -> int:
    return s.dim
