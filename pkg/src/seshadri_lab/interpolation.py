"""Fat-point linear systems on projective space, computed exactly.

A degree-``d`` form in ``n + 1`` variables is a coefficient vector over
:func:`monomial_basis`.  Conditions at a point are Taylor coefficients of the
dehomogenised form in the point's designated affine chart, so "vanishes to
order >= m at P" means every Taylor coefficient of total degree < m is zero.
"""
from __future__ import annotations

import functools
import random
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb
from typing import Sequence, Union

from . import linalg
from .errors import InvalidConfigurationError, InvalidParameterError, SurjectivityRequiredError
from .rational import fmt

Exponent = tuple[int, ...]
Form = list[Fraction]

COORD_RANGE = 10 ** 6


@functools.lru_cache(maxsize=None)
def monomial_basis(n: int, d: int) -> tuple[Exponent, ...]:
    """Exponent vectors of degree ``d`` in ``n + 1`` variables, graded-lex order.

    >>> monomial_basis(2, 1)
    ((1, 0, 0), (0, 1, 0), (0, 0, 1))
    """
    if n < 0 or d < 0:
        raise InvalidParameterError("need n >= 0 and d >= 0")

    def rec(nvars: int, total: int):
        if nvars == 1:
            yield (total,)
            return
        for first in range(total, -1, -1):
            for rest in rec(nvars - 1, total - first):
                yield (first,) + rest

    return tuple(rec(n + 1, d))


@functools.lru_cache(maxsize=None)
def jet_monomials(n: int, max_degree: int) -> tuple[Exponent, ...]:
    """Monomials in the ``n`` local coordinates of degree <= ``max_degree``, by degree then graded-lex."""
    out: list[Exponent] = []
    for e in range(max_degree + 1):
        out.extend(monomial_basis(n - 1, e))
    return tuple(out)


# --------------------------------------------------------------------------
# point configurations


def _projectively_equal(p: Sequence[Fraction], q: Sequence[Fraction]) -> bool:
    n = len(p)
    return all(p[a] * q[b] == p[b] * q[a] for a in range(n) for b in range(a + 1, n))


@dataclass(frozen=True)
class PointConfiguration:
    """Distinct points of ``P^n`` with exact homogeneous coordinates."""

    ambient_dim: int
    points: tuple[tuple[Fraction, ...], ...]
    seed: int | None = None

    def __post_init__(self):
        pts = tuple(tuple(Fraction(x) for x in p) for p in self.points)
        object.__setattr__(self, "points", pts)
        n = self.ambient_dim
        if n < 1:
            raise InvalidParameterError("ambient_dim must be >= 1")
        for p in pts:
            if len(p) != n + 1:
                raise InvalidConfigurationError(f"point {p} needs {n + 1} coordinates")
            if not any(p):
                raise InvalidConfigurationError("all homogeneous coordinates are zero")
        for a in range(len(pts)):
            for b in range(a + 1, len(pts)):
                if _projectively_equal(pts[a], pts[b]):
                    raise InvalidConfigurationError(f"points {a + 1} and {b + 1} coincide")

    @property
    def k(self) -> int:
        return len(self.points)

    def chart(self, i: int) -> int:
        """Index of the dehomogenising coordinate at point ``i`` (0-based).

        Largest absolute numerator; ties go to the lowest index.
        """
        p = self.points[i]
        return max(range(len(p)), key=lambda j: (abs(p[j].numerator), -j))

    def local_coordinates(self, i: int) -> tuple[tuple[int, ...], tuple[Fraction, ...]]:
        """``(indices, values)``: the affine coordinates used as ``y_1..y_n`` and the point's values there."""
        c = self.chart(i)
        p = self.points[i]
        idx = tuple(j for j in range(len(p)) if j != c)
        return idx, tuple(p[j] / p[c] for j in idx)

    def to_json(self) -> dict:
        return {
            "ambient_dim": self.ambient_dim,
            "seed": self.seed,
            "points": [[fmt(x) for x in p] for p in self.points],
            "charts": [self.chart(i) for i in range(self.k)],
        }


def random_configuration(k: int, n: int = 2, seed: int = 0) -> PointConfiguration:
    """``k`` points with integer coordinates drawn uniformly from ``[-10^6, 10^6]``.

    Genericity is never assumed: callers check the rank conditions they need.
    """
    if k < 0:
        raise InvalidParameterError("k must be nonnegative")
    rng = random.Random(seed)
    pts = []
    while len(pts) < k:
        p = tuple(rng.randint(-COORD_RANGE, COORD_RANGE) for _ in range(n + 1))
        if any(p):
            pts.append(p)
    return PointConfiguration(n, tuple(pts), seed)


# --------------------------------------------------------------------------
# jets


def _taylor_rows(pts: PointConfiguration, i: int, d: int, jets: Sequence[Exponent]) -> list[list[Fraction]]:
    """Row ``beta``: Taylor coefficient of ``y^beta`` at point ``i`` for every degree-``d`` monomial."""
    idx, vals = pts.local_coordinates(i)
    powers = [[v ** e for e in range(d + 1)] for v in vals]
    cols = monomial_basis(pts.ambient_dim, d)
    rows = []
    for beta in jets:
        row = []
        for a in cols:
            coef = Fraction(1)
            for slot, j in enumerate(idx):
                aj, bj = a[j], beta[slot]
                if bj > aj:
                    coef = Fraction(0)
                    break
                coef *= comb(aj, bj) * powers[slot][aj - bj]
            row.append(coef)
        rows.append(row)
    return rows


def taylor_expansion(pts: PointConfiguration, i: int, form: Sequence, d: int, max_order: int | None = None) -> dict[Exponent, Fraction]:
    """Nonzero Taylor coefficients of ``form`` at point ``i`` up to ``max_order`` (default ``d``)."""
    n = pts.ambient_dim
    jets = jet_monomials(n, d if max_order is None else max_order)
    rows = _taylor_rows(pts, i, d, jets)
    vals = linalg.matvec(rows, [Fraction(x) for x in form])
    return {beta: v for beta, v in zip(jets, vals) if v}


def vanishing_order(pts: PointConfiguration, i: int, form: Sequence, d: int) -> int | None:
    """Order of vanishing of ``form`` at point ``i``; ``None`` for the zero form."""
    exp = taylor_expansion(pts, i, form, d)
    if not exp:
        return None
    return min(sum(beta) for beta in exp)


def homogeneous_jet(pts: PointConfiguration, i: int, form: Sequence, d: int, order: int) -> dict[Exponent, Fraction]:
    """Degree-``order`` part of the Taylor expansion, as ``{beta: coefficient}``."""
    exp = taylor_expansion(pts, i, form, d, order)
    return {beta: v for beta, v in exp.items() if sum(beta) == order}


# --------------------------------------------------------------------------
# linear systems


def conditions_matrix(pts: PointConfiguration, d: int, mult_requirements: Sequence[int]) -> list[list[Fraction]]:
    """Rows are the Taylor functionals of order < ``m_i`` at each ``P_i``, grouped by point.

    The kernel is the space of degree-``d`` forms vanishing to order >= ``m_i`` at ``P_i``.
    A requirement of 0 imposes nothing.
    """
    if d < 0:
        raise InvalidParameterError("d must be nonnegative")
    if len(mult_requirements) != pts.k:
        raise InvalidParameterError(f"{len(mult_requirements)} requirements for {pts.k} points")
    if any(m < 0 for m in mult_requirements):
        raise InvalidParameterError("multiplicity requirements must be nonnegative")
    rows: list[list[Fraction]] = []
    for i, m in enumerate(mult_requirements):
        if m > 0:
            rows.extend(_taylor_rows(pts, i, d, jet_monomials(pts.ambient_dim, m - 1)))
    return rows


@dataclass
class LinearSystem:
    """Degree-``d`` forms vanishing to order >= ``mult_requirements[i]`` at ``P_i``."""

    ambient_dim: int
    degree: int
    mult_requirements: tuple[int, ...]
    matrix: list[list[Fraction]]
    kernel_basis: list[Form]
    rank: int

    @property
    def h0(self) -> int:
        return len(self.kernel_basis)

    @property
    def ncols(self) -> int:
        return comb(self.degree + self.ambient_dim, self.ambient_dim)

    @property
    def expected_h0(self) -> int:
        """``max(0, #monomials - #conditions)``."""
        n = self.ambient_dim
        conds = sum(comb(m - 1 + n, n) for m in self.mult_requirements if m > 0)
        return max(0, self.ncols - conds)

    def to_json(self) -> dict:
        return {
            "ambient_dim": self.ambient_dim,
            "degree": self.degree,
            "mult_requirements": list(self.mult_requirements),
            "monomials": [list(a) for a in monomial_basis(self.ambient_dim, self.degree)],
            "matrix": [[fmt(x) for x in row] for row in self.matrix],
            "rank": self.rank,
            "h0": self.h0,
            "kernel_basis": [[fmt(x) for x in v] for v in self.kernel_basis],
        }


def linear_system(pts: PointConfiguration, d: int, mult_requirements: Sequence[int]) -> LinearSystem:
    A = conditions_matrix(pts, d, mult_requirements)
    ncols = comb(d + pts.ambient_dim, pts.ambient_dim)
    kernel = linalg.nullspace(A, ncols)
    return LinearSystem(pts.ambient_dim, d, tuple(mult_requirements), A, kernel, ncols - len(kernel))


def h0_linear_system(pts: PointConfiguration, d: int, mult_requirements: Sequence[int]) -> int:
    """Dimension of the space of degree-``d`` forms with the given vanishing orders."""
    return linear_system(pts, d, mult_requirements).h0


@dataclass(frozen=True)
class Surjective:
    rank: int


@dataclass(frozen=True)
class Deficient:
    corank: int
    rank: int


EvaluationVerdict = Union[Surjective, Deficient]


def jet_target_dimension(n: int, mults: Sequence[int]) -> int:
    return sum(comb(m + n, n) for m in mults)


def evaluation_surjective(pts: PointConfiguration, d: int, mults: Sequence[int]) -> EvaluationVerdict:
    """Is ``H^0(O(d)) -> sum_i O/m_{P_i}^{m_i+1}`` onto?"""
    if any(m < 0 for m in mults):
        raise InvalidParameterError("multiplicities must be nonnegative")
    A = conditions_matrix(pts, d, [m + 1 for m in mults])
    target = jet_target_dimension(pts.ambient_dim, mults)
    r = linalg.rank(A, comb(d + pts.ambient_dim, pts.ambient_dim))
    return Surjective(r) if r == target else Deficient(target - r, r)


# --------------------------------------------------------------------------
# the basis split


@dataclass
class SectionBasisSplit:
    """Basis of degree-``d`` forms adapted to the jets at the points.

    * ``B0``: forms vanishing to order >= ``m_i + 1`` at every ``P_i``;
    * ``B[i]``: one form per jet monomial ``y^beta`` (``|beta| <= m_i``) at
      ``P_i``, realising exactly that jet up to order ``m_i`` and no jet up to
      order ``m_j`` at the other points; ``jet_labels[i]`` lists the ``beta``;
    * ``Btilde[i]``: the members of ``B[i]`` with ``|beta| == m_i``.
    """

    pts: PointConfiguration
    degree: int
    mults: tuple[int, ...]
    B0: list[Form]
    B: list[list[Form]]
    jet_labels: list[list[Exponent]]
    Btilde: list[list[Form]] = field(init=False)

    def __post_init__(self):
        self.Btilde = [
            [f for f, beta in zip(Bi, labels) if sum(beta) == m]
            for Bi, labels, m in zip(self.B, self.jet_labels, self.mults)
        ]

    @property
    def n(self) -> int:
        return self.pts.ambient_dim

    @property
    def k(self) -> int:
        return len(self.mults)

    def tilde_mask(self, i: int) -> list[bool]:
        return [sum(beta) == self.mults[i] for beta in self.jet_labels[i]]

    def all_members(self) -> list[Form]:
        out = list(self.B0)
        for Bi in self.B:
            out.extend(Bi)
        return out

    def check(self) -> None:
        """Assert the cardinality invariants and that the members form a basis."""
        n, d = self.n, self.degree
        N = comb(d + n, n)
        members = self.all_members()
        assert len(members) == N, (len(members), N)
        for Bi, Bti, m in zip(self.B, self.Btilde, self.mults):
            assert len(Bi) == comb(m + n, n)
            assert len(Bti) == comb(m + n - 1, n - 1)
            assert all(any(f is g for g in Bi) for f in Bti)
        assert linalg.rank(members, N) == N

    def to_json(self) -> dict:
        enc = lambda forms: [[fmt(x) for x in f] for f in forms]  # noqa: E731
        return {
            "degree": self.degree,
            "mults": list(self.mults),
            "monomials": [list(a) for a in monomial_basis(self.n, self.degree)],
            "B0": enc(self.B0),
            "B": [enc(Bi) for Bi in self.B],
            "jet_labels": [[list(b) for b in labels] for labels in self.jet_labels],
            "Btilde_sizes": [len(b) for b in self.Btilde],
        }


def basis_split(pts: PointConfiguration, d: int, mults: Sequence[int]) -> SectionBasisSplit:
    mults = tuple(int(m) for m in mults)
    if len(mults) != pts.k:
        raise InvalidParameterError(f"{len(mults)} multiplicities for {pts.k} points")
    n = pts.ambient_dim
    N = comb(d + n, n)
    A = conditions_matrix(pts, d, [m + 1 for m in mults])
    verdict = evaluation_surjective(pts, d, mults)
    if isinstance(verdict, Deficient):
        raise SurjectivityRequiredError(
            f"jet evaluation in degree {d} has corank {verdict.corank}; increase d"
        )
    B0 = linalg.nullspace(A, N)
    R = len(A)
    rhs = [[Fraction(int(r == j)) for r in range(R)] for j in range(R)]
    sols = linalg.solve_many(A, N, rhs) if R else []
    B: list[list[Form]] = []
    labels: list[list[Exponent]] = []
    pos = 0
    for m in mults:
        jets = jet_monomials(n, m)
        B.append([sols[pos + t] for t in range(len(jets))])
        labels.append(list(jets))
        pos += len(jets)
    split = SectionBasisSplit(pts, d, mults, B0, B, labels)
    split.check()
    return split


def select_subbasis_for_blowup(split: SectionBasisSplit, i: int) -> list[Form]:
    """``B0 + Btilde_1..Btilde_i + B_{i+1}..B_k``: a basis of forms with order >= m_j at P_1..P_i."""
    if not 0 <= i <= split.k:
        raise IndexError(f"stage {i} outside 0..{split.k}")
    out = list(split.B0)
    for j in range(split.k):
        out.extend(split.Btilde[j] if j < i else split.B[j])
    return out
