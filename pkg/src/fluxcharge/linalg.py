"""Exact rational linear algebra on labeled dense matrices.

Everything here works over ``fractions.Fraction``; no entry is ever a float.
Elimination uses leftmost-column / topmost-row pivots so null bases come out
the same on every run.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd
from typing import Iterable, Sequence

Vector = tuple  # tuple of Fraction

_ZERO = Fraction(0)
_ONE = Fraction(1)


def to_fraction(x) -> Fraction:
    """Convert an int, Fraction or exact decimal/ratio string to Fraction.

    Floats are refused: they would smuggle rounding into exact data.
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("booleans are not matrix entries")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    raise TypeError(f"cannot convert {type(x).__name__} to an exact rational")


class RationalMatrix:
    """Immutable dense matrix of Fractions with row and column labels."""

    __slots__ = ("_rows", "row_labels", "col_labels", "_hash")

    def __init__(self, entries: Iterable[Iterable], row_labels=None, col_labels=None):
        rows = tuple(tuple(to_fraction(x) for x in r) for r in entries)
        ncols = len(rows[0]) if rows else (len(col_labels) if col_labels is not None else 0)
        for r in rows:
            if len(r) != ncols:
                raise ValueError("ragged matrix rows")
        if row_labels is None:
            row_labels = [f"r{i + 1}" for i in range(len(rows))]
        if col_labels is None:
            col_labels = [f"c{j + 1}" for j in range(ncols)]
        row_labels = tuple(row_labels)
        col_labels = tuple(col_labels)
        if len(row_labels) != len(rows) or len(col_labels) != ncols:
            raise ValueError("label count does not match matrix shape")
        if len(set(row_labels)) != len(row_labels) or len(set(col_labels)) != len(col_labels):
            raise ValueError("duplicate labels")
        self._rows = rows
        self.row_labels = row_labels
        self.col_labels = col_labels
        self._hash = None

    @classmethod
    def zeros(cls, row_labels, col_labels):
        return cls([[0] * len(col_labels) for _ in row_labels], row_labels, col_labels)

    @classmethod
    def identity(cls, labels):
        labels = list(labels)
        n = len(labels)
        return cls([[1 if i == j else 0 for j in range(n)] for i in range(n)], labels, labels)

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[Fraction]], row_labels, col_labels):
        # trusted constructor for internal use: entries already Fractions
        m = cls.__new__(cls)
        m._rows = tuple(tuple(r) for r in rows)
        m.row_labels = tuple(row_labels)
        m.col_labels = tuple(col_labels)
        m._hash = None
        return m

    @property
    def shape(self):
        return (len(self._rows), len(self.col_labels))

    @property
    def nrows(self):
        return len(self._rows)

    @property
    def ncols(self):
        return len(self.col_labels)

    def rows(self):
        return self._rows

    def row(self, key) -> Vector:
        return self._rows[self._ri(key)]

    def col(self, key) -> Vector:
        j = self._ci(key)
        return tuple(r[j] for r in self._rows)

    def __getitem__(self, key):
        i, j = key
        return self._rows[self._ri(i)][self._ci(j)]

    def _ri(self, key):
        return key if isinstance(key, int) else self.row_labels.index(key)

    def _ci(self, key):
        return key if isinstance(key, int) else self.col_labels.index(key)

    def to_lists(self):
        return [list(r) for r in self._rows]

    def to_int_lists(self):
        out = []
        for r in self._rows:
            if any(x.denominator != 1 for x in r):
                raise ValueError("matrix has non-integer entries")
            out.append([int(x) for x in r])
        return out

    @property
    def T(self) -> "RationalMatrix":
        cols = list(zip(*self._rows)) if self._rows else [() for _ in self.col_labels]
        return RationalMatrix.from_rows(cols, self.col_labels, self.row_labels)

    def transpose(self):
        return self.T

    def submatrix(self, rows=None, cols=None) -> "RationalMatrix":
        ri = list(range(self.nrows)) if rows is None else [self._ri(r) for r in rows]
        ci = list(range(self.ncols)) if cols is None else [self._ci(c) for c in cols]
        data = [[self._rows[i][j] for j in ci] for i in ri]
        return RationalMatrix.from_rows(
            data, [self.row_labels[i] for i in ri], [self.col_labels[j] for j in ci]
        )

    def relabel(self, row_labels=None, col_labels=None):
        return RationalMatrix.from_rows(
            self._rows,
            self.row_labels if row_labels is None else row_labels,
            self.col_labels if col_labels is None else col_labels,
        )

    def __matmul__(self, other):
        if isinstance(other, RationalMatrix):
            if self.ncols != other.nrows:
                raise ValueError(f"shape mismatch {self.shape} @ {other.shape}")
            ocols = other.ncols
            out = []
            for r in self._rows:
                acc = [_ZERO] * ocols
                for k, a in enumerate(r):
                    if a:
                        orow = other._rows[k]
                        for j in range(ocols):
                            b = orow[j]
                            if b:
                                acc[j] += a * b
                out.append(acc)
            return RationalMatrix.from_rows(out, self.row_labels, other.col_labels)
        return mat_vec(self, other)

    def _binary(self, other, op):
        if self.shape != other.shape:
            raise ValueError("shape mismatch")
        data = [[op(a, b) for a, b in zip(r, s)] for r, s in zip(self._rows, other._rows)]
        return RationalMatrix.from_rows(data, self.row_labels, self.col_labels)

    def __add__(self, other):
        return self._binary(other, lambda a, b: a + b)

    def __sub__(self, other):
        return self._binary(other, lambda a, b: a - b)

    def __neg__(self):
        return self.scale(-1)

    def scale(self, c) -> "RationalMatrix":
        c = to_fraction(c)
        return RationalMatrix.from_rows(
            [[c * x for x in r] for r in self._rows], self.row_labels, self.col_labels
        )

    def is_zero(self) -> bool:
        return not any(x for r in self._rows for x in r)

    def same_entries(self, other) -> bool:
        """Entry-wise equality ignoring labels."""
        return self.shape == other.shape and self._rows == other._rows

    def __eq__(self, other):
        if not isinstance(other, RationalMatrix):
            return NotImplemented
        return (
            self._rows == other._rows
            and self.row_labels == other.row_labels
            and self.col_labels == other.col_labels
        )

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self._rows, self.row_labels, self.col_labels))
        return self._hash

    def __repr__(self):
        return f"RationalMatrix({self.nrows}x{self.ncols}, rows={list(self.row_labels)}, cols={list(self.col_labels)})"

    def __str__(self):
        return format_matrix(self)


def format_matrix(m: RationalMatrix) -> str:
    cells = [[str(x) for x in r] for r in m.rows()]
    head = [""] + list(m.col_labels)
    body = [[lab] + r for lab, r in zip(m.row_labels, cells)]
    widths = [max(len(row[j]) for row in [head] + body) for j in range(len(head))]
    lines = ["  ".join(s.rjust(w) for s, w in zip(row, widths)) for row in [head] + body]
    return "\n".join(lines)


def mat_vec(m: RationalMatrix, v) -> Vector:
    v = [to_fraction(x) for x in v]
    if len(v) != m.ncols:
        raise ValueError("vector length does not match column count")
    return tuple(sum((a * b for a, b in zip(r, v) if a and b), _ZERO) for r in m.rows())


def vec_mat(v, m: RationalMatrix) -> Vector:
    return mat_vec(m.T, v)


def _rref_rows(rows: list, ncols: int, column_order=None):
    """In-place Gauss-Jordan elimination on a list of Fraction lists.

    ``column_order`` lists the column indices in the order they are tried
    as pivots; default is left to right. Returns the pivot columns in the
    order they were taken (row i has its pivot at pivots[i]).
    """
    order = range(ncols) if column_order is None else column_order
    pivots = []
    r = 0
    nrows = len(rows)
    for c in order:
        if r == nrows:
            break
        p = next((i for i in range(r, nrows) if rows[i][c]), None)
        if p is None:
            continue
        if p != r:
            rows[p], rows[r] = rows[r], rows[p]
        prow = rows[r]
        inv = _ONE / prow[c]
        if inv != 1:
            prow = [x * inv if x else x for x in prow]
            rows[r] = prow
        nz = [j for j, x in enumerate(prow) if x]
        for i in range(nrows):
            if i == r:
                continue
            row = rows[i]
            f = row[c]
            if f:
                for j in nz:
                    row[j] -= f * prow[j]
        pivots.append(c)
        r += 1
    return pivots


def rref(m: RationalMatrix, column_order=None):
    """Reduced row echelon form and pivot column indices.

    With the default ``column_order`` pivots are strictly increasing.
    """
    rows = [list(r) for r in m.rows()]
    pivots = _rref_rows(rows, m.ncols, column_order)
    return RationalMatrix.from_rows(rows, m.row_labels, m.col_labels), pivots


def rank(m: RationalMatrix) -> int:
    return vectors_rank(m.rows(), m.ncols)


def right_nullspace(m: RationalMatrix, column_order=None) -> list:
    """Basis of {x : m x = 0}; one vector per free column, in column order."""
    red, pivots = rref(m, column_order)
    n = m.ncols
    pivset = set(pivots)
    basis = []
    for f in range(n):
        if f in pivset:
            continue
        v = [_ZERO] * n
        v[f] = _ONE
        for i, p in enumerate(pivots):
            v[p] = -red.rows()[i][f]
        basis.append(tuple(v))
    return basis


def left_nullspace(m: RationalMatrix) -> list:
    """Basis of {y : y m = 0}."""
    return right_nullspace(m.T)


def solve_affine(m: RationalMatrix, b, column_order=None):
    """Solve m x = b exactly.

    Returns ``(particular, basis)`` where free variables are zero in the
    particular solution, or ``None`` when the system is inconsistent.
    ``column_order`` controls which variables become pivots (i.e. which
    ones get expressed through the others).
    """
    b = [to_fraction(x) for x in b]
    if len(b) != m.nrows:
        raise ValueError("right-hand side length does not match row count")
    n = m.ncols
    rows = [list(r) + [bi] for r, bi in zip(m.rows(), b)]
    order = list(range(n)) if column_order is None else list(column_order)
    if sorted(order) != list(range(n)):
        raise ValueError("column_order must list every column exactly once")
    pivots = _rref_rows(rows, n + 1, order)
    for r in rows[len(pivots):]:
        if r[n]:
            return None
    x = [_ZERO] * n
    for i, p in enumerate(pivots):
        x[p] = rows[i][n]
    pivset = set(pivots)
    basis = []
    for f in order:
        if f in pivset:
            continue
        v = [_ZERO] * n
        v[f] = _ONE
        for i, p in enumerate(pivots):
            v[p] = -rows[i][f]
        basis.append(tuple(v))
    return tuple(x), basis


def solve_unique_many(m: RationalMatrix, bs):
    """Solve m x = b for several right-hand sides with one elimination.

    Returns one solution per b, or None where that system is inconsistent.
    Raises ValueError when m has a nontrivial null space.
    """
    bs = [[to_fraction(x) for x in b] for b in bs]
    n, k = m.ncols, len(bs)
    rows = [list(r) + [b[i] for b in bs] for i, r in enumerate(m.rows())]
    pivots = _rref_rows(rows, n + k, range(n))
    if len(pivots) != n:
        raise ValueError("solution is not unique")
    out = []
    for j in range(k):
        if any(r[n + j] for r in rows[n:]):
            out.append(None)
            continue
        x = [_ZERO] * n
        for i, p in enumerate(pivots):
            x[p] = rows[i][n + j]
        out.append(tuple(x))
    return out


def stack_columns(vectors, row_labels, prefix="x") -> RationalMatrix:
    """Matrix whose columns are the given vectors."""
    vectors = list(vectors)
    cols = [f"{prefix}{k + 1}" for k in range(len(vectors))]
    rows = [[v[i] for v in vectors] for i in range(len(row_labels))]
    return RationalMatrix.from_rows(rows, row_labels, cols)


def _integer_row(v):
    """Scale a rational vector to a primitive integer vector (same span)."""
    v = [x if type(x) is Fraction else to_fraction(x) for x in v]
    den = 1
    for x in v:
        if x.denominator != 1:
            den = den * x.denominator // gcd(den, x.denominator)
    return [x.numerator * (den // x.denominator) for x in v]


def _integer_rank(rows: list, ncols: int) -> int:
    """Rank by fraction-free elimination on integer rows (modified in place)."""
    r = 0
    nrows = len(rows)
    for c in range(ncols):
        if r == nrows:
            break
        p = next((i for i in range(r, nrows) if rows[i][c]), None)
        if p is None:
            continue
        rows[p], rows[r] = rows[r], rows[p]
        prow = rows[r]
        a = prow[c]
        nz = [j for j in range(c, ncols) if prow[j]]
        for i in range(r + 1, nrows):
            row = rows[i]
            f = row[c]
            if not f:
                continue
            g = gcd(a, f)
            ma, mf = a // g, f // g
            new = [x * ma for x in row] if ma != 1 else row[:]
            for j in nz:
                new[j] -= mf * prow[j]
            g = 0
            for x in new:
                if x:
                    g = gcd(g, x)
                    if g == 1:
                        break
            rows[i] = [x // g for x in new] if g > 1 else new
        r += 1
    return r


def vectors_rank(vectors, length: int) -> int:
    rows = [_integer_row(v) for v in vectors]
    if not rows:
        return 0
    return _integer_rank(rows, length)


def same_span(u, v, length: int) -> bool:
    """True when two families of vectors span the same subspace."""
    ru = vectors_rank(u, length)
    rv = vectors_rank(v, length)
    return ru == rv == vectors_rank(list(u) + list(v), length)


def in_span(x, vectors, length: int) -> bool:
    return vectors_rank(list(vectors), length) == vectors_rank(list(vectors) + [x], length)


def inverse(m: RationalMatrix) -> RationalMatrix:
    """Exact inverse; raises ValueError if singular."""
    n = m.nrows
    if n != m.ncols:
        raise ValueError("inverse of a non-square matrix")
    rows = [list(r) + [_ONE if i == j else _ZERO for j in range(n)] for i, r in enumerate(m.rows())]
    pivots = _rref_rows(rows, 2 * n, range(n))
    if len(pivots) != n:
        raise ValueError("matrix is singular")
    return RationalMatrix.from_rows([r[n:] for r in rows], m.col_labels, m.row_labels)
