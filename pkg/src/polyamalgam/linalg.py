"""Exact dense linear algebra over the rationals.

Vectors are tuples of :class:`fractions.Fraction`, matrices are tuples of
row tuples.  Everything here is deterministic: Gaussian elimination always
takes the leftmost available pivot.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Sequence

Vector = tuple[Fraction, ...]
Matrix = tuple[Vector, ...]

ZERO = Fraction(0)
ONE = Fraction(1)


def vec(values: Iterable) -> Vector:
    return tuple(Fraction(v) for v in values)


def mat(rows: Iterable[Iterable]) -> Matrix:
    return tuple(vec(r) for r in rows)


def zeros(rows: int, cols: int) -> Matrix:
    return tuple((ZERO,) * cols for _ in range(rows))


def identity(n: int) -> Matrix:
    return tuple(tuple(ONE if i == j else ZERO for j in range(n)) for i in range(n))


def shape(m: Matrix, cols: int | None = None) -> tuple[int, int]:
    """Shape of ``m``; ``cols`` disambiguates matrices with no rows."""
    if m:
        return len(m), len(m[0])
    return 0, cols or 0


def transpose(m: Matrix, cols: int = 0) -> Matrix:
    if not m:
        return tuple(() for _ in range(cols))
    return tuple(zip(*m))


def dot(a: Sequence[Fraction], b: Sequence[Fraction]) -> Fraction:
    return sum((x * y for x, y in zip(a, b)), ZERO)


def matvec(m: Matrix, x: Sequence[Fraction]) -> Vector:
    return tuple(dot(row, x) for row in m)


def vecmat(x: Sequence[Fraction], m: Matrix, cols: int) -> Vector:
    """Row vector times matrix, i.e. the functional ``x`` pulled back along ``m``."""
    out = [ZERO] * cols
    for xi, row in zip(x, m):
        if xi:
            for j, v in enumerate(row):
                if v:
                    out[j] += xi * v
    return tuple(out)


def matmul(a: Matrix, b: Matrix, inner: int | None = None, cols: int | None = None) -> Matrix:
    """Product ``a @ b``.

    ``cols`` is the column count of ``b`` and is needed only when ``b`` has no
    rows (a map out of the zero space).
    """
    if cols is None:
        cols = len(b[0]) if b else 0
    bt = transpose(b, cols)
    return tuple(tuple(dot(row, col) for col in bt) for row in a)


def add(a: Matrix, b: Matrix) -> Matrix:
    return tuple(tuple(x + y for x, y in zip(ra, rb)) for ra, rb in zip(a, b))


def sub(a: Matrix, b: Matrix) -> Matrix:
    return tuple(tuple(x - y for x, y in zip(ra, rb)) for ra, rb in zip(a, b))


def scale(m: Matrix, c: Fraction) -> Matrix:
    return tuple(tuple(c * x for x in row) for row in m)


def is_zero(m: Matrix) -> bool:
    return all(x == 0 for row in m for x in row)


def hstack(blocks: Sequence[Matrix], rows: int) -> Matrix:
    out = []
    for i in range(rows):
        r: list[Fraction] = []
        for b in blocks:
            if b:
                r.extend(b[i])
        out.append(tuple(r))
    return tuple(out)


def block_diag(blocks: Sequence[tuple[Matrix, int, int]]) -> Matrix:
    """Block diagonal matrix from ``(matrix, rows, cols)`` triples."""
    total_cols = sum(c for _, _, c in blocks)
    out = []
    offset = 0
    for m, r, c in blocks:
        for i in range(r):
            row = [ZERO] * total_cols
            row[offset:offset + c] = m[i]
            out.append(tuple(row))
        offset += c
    return tuple(out)


def rref(m: Sequence[Sequence[Fraction]], cols: int | None = None) -> tuple[Matrix, tuple[int, ...]]:
    """Reduced row echelon form with leftmost pivots.

    Returns the nonzero rows and the pivot column indices.
    """
    rows = [list(map(Fraction, r)) for r in m]
    ncols = cols if cols is not None else (len(rows[0]) if rows else 0)
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(rows)) if rows[i][c] != 0), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        p = rows[r][c]
        rows[r] = [x / p for x in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][c] != 0:
                f = rows[i][c]
                rows[i] = [x - f * y for x, y in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
        if r == len(rows):
            break
    return tuple(tuple(row) for row in rows[:r]), tuple(pivots)


def rank(m: Sequence[Sequence[Fraction]], cols: int | None = None) -> int:
    return len(rref(m, cols)[1])


def nullspace(m: Sequence[Sequence[Fraction]], cols: int) -> Matrix:
    """Basis of ``{x : m x = 0}`` returned as a tuple of column vectors."""
    reduced, pivots = rref(m, cols)
    free = [j for j in range(cols) if j not in pivots]
    basis = []
    for f in free:
        v = [ZERO] * cols
        v[f] = ONE
        for row, p in zip(reduced, pivots):
            v[p] = -row[f]
        basis.append(tuple(v))
    return tuple(basis)


def solve(a: Matrix, b: Sequence[Fraction], cols: int) -> Vector | None:
    """One solution of ``a x = b`` (free variables set to zero), or ``None``."""
    aug = [tuple(row) + (bi,) for row, bi in zip(a, b)]
    reduced, pivots = rref(aug, cols + 1)
    if pivots and pivots[-1] == cols:
        return None
    x = [ZERO] * cols
    for row, p in zip(reduced, pivots):
        x[p] = row[cols]
    return tuple(x)


def inverse(a: Matrix) -> Matrix:
    n = len(a)
    aug = [tuple(row) + identity(n)[i] for i, row in enumerate(a)]
    reduced, pivots = rref(aug, 2 * n)
    if tuple(pivots[:n]) != tuple(range(n)) or len(pivots) < n:
        raise ValueError("matrix is singular")
    return tuple(tuple(row[n:]) for row in reduced)


def left_inverse(a: Matrix, cols: int) -> Matrix | None:
    """A matrix ``L`` with ``L a = I`` if ``a`` has full column rank."""
    rows = len(a)
    if cols == 0:
        return tuple(() for _ in range(0)) if rows == 0 else ()
    at = transpose(a, cols)
    # Choose independent rows of a, invert that square block.
    _, piv_rows = rref(at, rows)
    if len(piv_rows) < cols:
        return None
    sub_a = tuple(a[i] for i in piv_rows)
    inv = inverse(sub_a)
    out = []
    for r in range(cols):
        row = [ZERO] * rows
        for k, i in enumerate(piv_rows):
            row[i] = inv[r][k]
        out.append(tuple(row))
    return tuple(out)


def extend_to_basis(columns: Sequence[Vector], dim: int) -> tuple[Vector, ...]:
    """Standard basis vectors completing ``columns`` to a basis, leftmost first."""
    current = [tuple(c) for c in columns]
    extra = []
    r = rank(current, dim) if current else 0
    for j in range(dim):
        e = tuple(ONE if k == j else ZERO for k in range(dim))
        if rank(current + [e], dim) > r:
            current.append(e)
            extra.append(e)
            r += 1
        if r == dim:
            break
    return tuple(extra)


def columns_to_matrix(columns: Sequence[Vector], rows: int) -> Matrix:
    if not columns:
        return tuple(() for _ in range(rows))
    return transpose(tuple(columns))


def primitive(v: Sequence[Fraction]) -> Vector:
    """Positive multiple of ``v`` with coprime integer entries."""
    from math import gcd, lcm

    den = 1
    for x in v:
        den = lcm(den, Fraction(x).denominator)
    ints = [int(Fraction(x) * den) for x in v]
    g = 0
    for x in ints:
        g = gcd(g, x)
    if g == 0:
        return tuple(Fraction(0) for _ in v)
    return tuple(Fraction(x // g) for x in ints)
