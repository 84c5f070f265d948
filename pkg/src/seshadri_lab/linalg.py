"""Exact linear algebra over the rationals.

Matrices are lists of rows of :class:`fractions.Fraction`.  Everything here is
deterministic: the reduced row echelon form of a matrix is unique, and the
kernel basis is the standard one read off from it (one vector per free
column, free entry 1, other free entries 0).
"""
from __future__ import annotations

from fractions import Fraction
from math import lcm
from typing import Sequence

Matrix = list[list[Fraction]]
Vector = list[Fraction]


def to_matrix(rows: Sequence[Sequence]) -> Matrix:
    return [[Fraction(x) for x in row] for row in rows]


def _integer_rows(rows: Sequence[Sequence], ncols: int) -> list[list[int]]:
    out = []
    for row in rows:
        fr = [Fraction(x) for x in row[:ncols]]
        scale = lcm(*(x.denominator for x in fr)) if fr else 1
        out.append([int(x * scale) for x in fr])
    return out


def _fraction_free_gauss_jordan(m: list[list[int]], ncols: int) -> list[int]:
    """In-place fraction-free Gauss-Jordan elimination; returns the pivot columns.

    After elimination each pivot row ``r`` is ``D * (row r of the RREF)`` for a
    common integer ``D``; every division below is exact.
    """
    nrows = len(m)
    pivots: list[int] = []
    prev = 1
    r = 0
    for c in range(ncols):
        if r == nrows:
            break
        p = next((i for i in range(r, nrows) if m[i][c]), None)
        if p is None:
            continue
        m[r], m[p] = m[p], m[r]
        prow = m[r]
        piv = prow[c]
        for i in range(nrows):
            if i == r:
                continue
            row = m[i]
            f = row[c]
            if f:
                m[i] = [(piv * a - f * b) // prev for a, b in zip(row, prow)]
            elif piv != prev:
                m[i] = [piv * a // prev for a in row]
        prev = piv
        pivots.append(c)
        r += 1
    return pivots


def rref(rows: Sequence[Sequence], ncols: int | None = None) -> tuple[Matrix, list[int]]:
    """Return ``(R, pivots)`` with ``R`` the reduced row echelon form.

    Pivot search scans columns left to right and takes the first row (from the
    current pivot row down) with a nonzero entry in that column.  Zero rows are
    dropped from ``R``, so ``len(R) == len(pivots) == rank``.  Rows are scaled
    to integers and eliminated fraction-free; the RREF itself is unique, so
    only speed depends on this.
    """
    if ncols is None:
        ncols = len(rows[0]) if rows else 0
    m = _integer_rows(rows, ncols)
    pivots = _fraction_free_gauss_jordan(m, ncols)
    R = []
    for row, c in zip(m, pivots):
        piv = row[c]
        R.append([Fraction(a, piv) if a else Fraction(0) for a in row])
    return R, pivots


# primes below 2**61; a row denominator divisible by one of them just skips it
_PRIMES = (2305843009213693951, 2305843009213693921, 2305843009213693907)


def _rank_mod(rows: Sequence[Sequence[Fraction]], ncols: int, p: int) -> int | None:
    m = []
    for row in rows:
        out = []
        for x in row[:ncols]:
            x = Fraction(x)
            if x.denominator % p == 0:
                return None
            out.append(x.numerator * pow(x.denominator, -1, p) % p)
        m.append(out)
    r = 0
    nrows = len(m)
    for c in range(ncols):
        if r == nrows:
            break
        piv = next((i for i in range(r, nrows) if m[i][c]), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        inv = pow(m[r][c], -1, p)
        prow = [x * inv % p for x in m[r]]
        m[r] = prow
        for i in range(r + 1, nrows):
            f = m[i][c]
            if f:
                m[i] = [(a - f * b) % p for a, b in zip(m[i], prow)]
        r += 1
    return r


def rank(rows: Sequence[Sequence], ncols: int | None = None) -> int:
    """Exact rank over the rationals.

    The rank modulo a prime never exceeds the rational rank, so when it
    already equals ``min(nrows, ncols)`` it is returned without exact
    elimination.  Otherwise the matrix is reduced exactly.
    """
    if not rows:
        return 0
    if ncols is None:
        ncols = len(rows[0])
    full = min(len(rows), ncols)
    for p in _PRIMES:
        r = _rank_mod(rows, ncols, p)
        if r is not None:
            if r == full:
                return r
            break
    return len(rref(rows, ncols)[1])


def nullspace(rows: Sequence[Sequence], ncols: int) -> list[Vector]:
    """Standard kernel basis of the matrix (vectors of length ``ncols``)."""
    if not rows:
        return [[Fraction(int(i == j)) for j in range(ncols)] for i in range(ncols)]
    R, pivots = rref(rows, ncols)
    pivset = set(pivots)
    basis = []
    for free in range(ncols):
        if free in pivset:
            continue
        v = [Fraction(0)] * ncols
        v[free] = Fraction(1)
        for row, pc in zip(R, pivots):
            v[pc] = -row[free]
        basis.append(v)
    return basis


def solve_many(rows: Sequence[Sequence], ncols: int, rhs: Sequence[Sequence]) -> list[Vector | None]:
    """Solve ``A x = b`` for each ``b`` in ``rhs`` (particular solution, free variables 0).

    Returns ``None`` for inconsistent right-hand sides.  ``rhs`` entries have
    length ``len(rows)``.  All systems share one elimination of the augmented
    matrix ``[A | B]``.
    """
    nb = len(rhs)
    aug = [list(row) + [rhs[j][i] for j in range(nb)] for i, row in enumerate(rows)]
    R, pivots = rref(aug, ncols + nb)
    out: list[Vector | None] = []
    for j in range(nb):
        col = ncols + j
        if col in pivots:
            out.append(None)
            continue
        x = [Fraction(0)] * ncols
        for row, pc in zip(R, pivots):
            if pc < ncols:
                x[pc] = row[col]
        out.append(x)
    return out


def matvec(rows: Sequence[Sequence], v: Sequence) -> Vector:
    return [sum((a * b for a, b in zip(row, v) if a and b), Fraction(0)) for row in rows]


def transpose(rows: Sequence[Sequence]) -> Matrix:
    return [list(col) for col in zip(*rows)]


def is_zero(v: Sequence) -> bool:
    return not any(v)
