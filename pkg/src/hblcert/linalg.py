"""Exact linear algebra over the rationals.

Everything in this module is computed with `fractions.Fraction`; no floating
point enters. Subspaces are kept in a unique canonical form (reduced row
echelon basis) so that equality of spans is plain value equality and
subspaces can be hashed, sorted and used as graph vertices.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Sequence

Rat = Fraction

Scalar = Fraction | int | str


def frac(x: Scalar) -> Fraction:
    """Coerce ints, Fractions and strings like "-3/4" to Fraction."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, str)):
        return Fraction(x)
    raise TypeError(f"not an exact rational: {x!r}")


def _rref(rows: list[list[Fraction]], cols: int) -> tuple[list[list[Fraction]], list[int]]:
    """In-place reduced row echelon form with leading-one pivots.

    Returns the nonzero rows and the pivot column of each.
    """
    pivots: list[int] = []
    r = 0
    for c in range(cols):
        pivot_row = None
        for i in range(r, len(rows)):
            if rows[i][c] != 0:
                pivot_row = i
                break
        if pivot_row is None:
            continue
        rows[r], rows[pivot_row] = rows[pivot_row], rows[r]
        lead = rows[r][c]
        if lead != 1:
            rows[r] = [x / lead for x in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][c] != 0:
                f = rows[i][c]
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
        if r == len(rows):
            break
    return rows[:r], pivots


@dataclass(frozen=True)
class Matrix:
    """Immutable dense matrix of Fractions, row-major."""

    rows: int
    cols: int
    entries: tuple[Fraction, ...]

    def __post_init__(self) -> None:
        if self.rows < 0 or self.cols < 0:
            raise ValueError("negative matrix dimension")
        if len(self.entries) != self.rows * self.cols:
            raise ValueError(
                f"matrix needs {self.rows * self.cols} entries, got {len(self.entries)}"
            )

    @staticmethod
    def from_rows(rows: Sequence[Sequence[Scalar]], cols: int | None = None) -> Matrix:
        rows = [list(r) for r in rows]
        if rows:
            width = len(rows[0])
            if cols is not None and cols != width:
                raise ValueError(f"expected {cols} columns, got {width}")
            cols = width
        elif cols is None:
            raise ValueError("empty matrix needs an explicit column count")
        for r in rows:
            if len(r) != cols:
                raise ValueError("ragged matrix rows")
        flat = tuple(frac(x) for r in rows for x in r)
        return Matrix(len(rows), cols, flat)

    @staticmethod
    def identity(n: int) -> Matrix:
        ent = tuple(Fraction(1) if i == j else Fraction(0) for i in range(n) for j in range(n))
        return Matrix(n, n, ent)

    @staticmethod
    def zeros(rows: int, cols: int) -> Matrix:
        return Matrix(rows, cols, (Fraction(0),) * (rows * cols))

    def __getitem__(self, ij: tuple[int, int]) -> Fraction:
        i, j = ij
        return self.entries[i * self.cols + j]

    def row(self, i: int) -> tuple[Fraction, ...]:
        return self.entries[i * self.cols : (i + 1) * self.cols]

    def row_lists(self) -> list[list[Fraction]]:
        return [list(self.row(i)) for i in range(self.rows)]

    def transpose(self) -> Matrix:
        ent = tuple(self[i, j] for j in range(self.cols) for i in range(self.rows))
        return Matrix(self.cols, self.rows, ent)

    def __matmul__(self, other: Matrix) -> Matrix:
        if self.cols != other.rows:
            raise ValueError(f"cannot multiply {self.rows}x{self.cols} by {other.rows}x{other.cols}")
        out = []
        for i in range(self.rows):
            ri = self.row(i)
            for j in range(other.cols):
                out.append(sum((ri[k] * other[k, j] for k in range(self.cols)), Fraction(0)))
        return Matrix(self.rows, other.cols, tuple(out))

    def apply(self, vec: Sequence[Fraction]) -> tuple[Fraction, ...]:
        if len(vec) != self.cols:
            raise ValueError("vector length does not match column count")
        return tuple(
            sum((self[i, k] * vec[k] for k in range(self.cols)), Fraction(0))
            for i in range(self.rows)
        )

    def __add__(self, other: Matrix) -> Matrix:
        if (self.rows, self.cols) != (other.rows, other.cols):
            raise ValueError("shape mismatch")
        return Matrix(self.rows, self.cols, tuple(a + b for a, b in zip(self.entries, other.entries)))

    def __sub__(self, other: Matrix) -> Matrix:
        if (self.rows, self.cols) != (other.rows, other.cols):
            raise ValueError("shape mismatch")
        return Matrix(self.rows, self.cols, tuple(a - b for a, b in zip(self.entries, other.entries)))

    def scale(self, c: Scalar) -> Matrix:
        c = frac(c)
        return Matrix(self.rows, self.cols, tuple(c * a for a in self.entries))

    def stack(self, other: Matrix) -> Matrix:
        if self.cols != other.cols:
            raise ValueError("column mismatch in stack")
        return Matrix(self.rows + other.rows, self.cols, self.entries + other.entries)

    @cached_property
    def rank(self) -> int:
        reduced, _ = _rref(self.row_lists(), self.cols)
        return len(reduced)

    def inverse(self) -> Matrix:
        if self.rows != self.cols:
            raise ValueError("only square matrices can be inverted")
        n = self.rows
        aug = [list(self.row(i)) + [Fraction(1) if j == i else Fraction(0) for j in range(n)]
               for i in range(n)]
        reduced, pivots = _rref(aug, 2 * n)
        if pivots[:n] != list(range(n)) or len(reduced) != n:
            raise ValueError("singular matrix")
        ent = tuple(reduced[i][n + j] for i in range(n) for j in range(n))
        return Matrix(n, n, ent)

    def is_zero(self) -> bool:
        return all(x == 0 for x in self.entries)


def dot(u: Sequence[Fraction], v: Sequence[Fraction]) -> Fraction:
    if len(u) != len(v):
        raise ValueError("length mismatch in dot product")
    return sum((a * b for a, b in zip(u, v)), Fraction(0))


def norm_sq(v: Sequence[Fraction]) -> Fraction:
    return dot(v, v)


@dataclass(frozen=True)
class Subspace:
    """A subspace of Q^ambient, stored as the unique RREF basis of its span.

    Equal spans produce identical values, so `==`, `hash` and sorting all
    operate on the subspace itself rather than on one of its presentations.
    The zero subspace has a basis with no rows.
    """

    ambient: int
    basis: Matrix

    def __post_init__(self) -> None:
        if self.basis.cols != self.ambient:
            raise ValueError("basis width does not match ambient dimension")

    @staticmethod
    def zero(ambient: int) -> Subspace:
        return Subspace(ambient, Matrix.zeros(0, ambient))

    @staticmethod
    def full(ambient: int) -> Subspace:
        return Subspace(ambient, Matrix.identity(ambient))

    @property
    def dim(self) -> int:
        return self.basis.rows

    def is_zero(self) -> bool:
        return self.dim == 0

    def is_full(self) -> bool:
        return self.dim == self.ambient

    @property
    def sort_key(self) -> tuple:
        return (self.dim, self.basis.entries)

    def basis_rows(self) -> list[tuple[Fraction, ...]]:
        return [self.basis.row(i) for i in range(self.dim)]

    def contains_vector(self, vec: Sequence[Fraction]) -> bool:
        v = [frac(x) for x in vec]
        for i in range(self.dim):
            p = self.pivots[i]
            if v[p] != 0:
                f = v[p]
                row = self.basis.row(i)
                v = [a - f * b for a, b in zip(v, row)]
        return all(x == 0 for x in v)

    @cached_property
    def pivots(self) -> tuple[int, ...]:
        # Basis is already in RREF; pivots are the leading-one columns.
        out = []
        for i in range(self.dim):
            row = self.basis.row(i)
            out.append(next(j for j, x in enumerate(row) if x != 0))
        return tuple(out)

    def __add__(self, other: Subspace) -> Subspace:
        if self.ambient != other.ambient:
            raise ValueError("ambient mismatch in subspace sum")
        return canonicalize(self.basis.stack(other.basis))

    def __and__(self, other: Subspace) -> Subspace:
        # Intersection via complement duality: U cap W = (U^perp + W^perp)^perp.
        if self.ambient != other.ambient:
            raise ValueError("ambient mismatch in subspace intersection")
        return (self.perp() + other.perp()).perp()

    def __le__(self, other: Subspace) -> bool:
        return (self + other) == other

    def perp(self) -> Subspace:
        """Orthogonal complement w.r.t. the standard inner product."""
        return kernel(self.basis)

    def projector(self) -> Matrix:
        """Orthogonal projector onto this subspace: B^T (B B^T)^-1 B."""
        if self.dim == 0:
            return Matrix.zeros(self.ambient, self.ambient)
        b = self.basis
        gram = b @ b.transpose()
        return b.transpose() @ gram.inverse() @ b

    def retraction(self) -> Matrix:
        """Left inverse of the basis chart: selects pivot coordinates.

        With E = basis^T the chart Q^dim -> Q^ambient, retraction() @ E is the
        identity and E @ retraction() restricts to the identity on the
        subspace itself.
        """
        rows = []
        for p in self.pivots:
            rows.append([Fraction(1) if j == p else Fraction(0) for j in range(self.ambient)])
        return Matrix.from_rows(rows, cols=self.ambient)


def canonicalize(generators: Matrix) -> Subspace:
    """Row space of `generators` in canonical RREF form."""
    reduced, _ = _rref(generators.row_lists(), generators.cols)
    if reduced:
        basis = Matrix.from_rows(reduced)
    else:
        basis = Matrix.zeros(0, generators.cols)
    return Subspace(generators.cols, basis)


def span(vectors: Iterable[Sequence[Scalar]], ambient: int) -> Subspace:
    """Subspace spanned by the given vectors of Q^ambient."""
    rows = [[frac(x) for x in v] for v in vectors]
    for r in rows:
        if len(r) != ambient:
            raise ValueError("vector length does not match ambient dimension")
    return canonicalize(Matrix.from_rows(rows, cols=ambient))


def image(map_: Matrix, v: Subspace) -> Subspace:
    """Canonical image subspace map(v) inside Q^(map rows)."""
    if map_.cols != v.ambient:
        raise ValueError("map domain does not match subspace ambient")
    rows = [map_.apply(b) for b in v.basis_rows()]
    return span(rows, map_.rows)


def kernel(map_: Matrix) -> Subspace:
    """Null space of the map, in canonical form."""
    reduced, pivots = _rref(map_.row_lists(), map_.cols)
    pivot_set = set(pivots)
    free = [c for c in range(map_.cols) if c not in pivot_set]
    rows = []
    for f in free:
        v = [Fraction(0)] * map_.cols
        v[f] = Fraction(1)
        for k, p in enumerate(pivots):
            v[p] = -reduced[k][f]
        rows.append(v)
    return span(rows, map_.cols)


def matrix_rank(map_: Matrix) -> int:
    return map_.rank
