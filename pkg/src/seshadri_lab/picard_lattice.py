"""Divisor classes on blow-ups of the plane, nef testing and Seshadri bounds.

A class ``d*H - sum(m_i * E_i)`` is stored as ``(d; m_1, ..., m_k)``.  The
intersection form is ``H^2 = 1``, ``E_i^2 = -1``, ``H.E_i = 0``.

Nef testing is only meaningful here for points in *general position*, which is
modelled lattice-theoretically:

* ``k <= 8``: Cremona reduction to standard form decides nefness exactly, and
  the finite set of (-1)-curves supplies obstructing witnesses.
* ``k >= 9``: a finite search over integral effective candidate classes of
  bounded degree.  Finding a violator is a proof; finding none is reported as
  :class:`UnknownUpTo`.
"""
from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb, isqrt, lcm
from typing import Iterator, Sequence, Union

import numpy as np

from .errors import (
    DimensionMismatchError,
    InvalidParameterError,
    InvalidTransformError,
    NotAnObstructionError,
    PreconditionError,
)
from .rational import fmt

#: Largest point count for which nefness is decided exactly.
EXACT_MAX_POINTS = 8
DEFAULT_DEGREE_BOUND = 20


def _exact(x) -> Fraction:
    if isinstance(x, float):
        raise TypeError(f"floating-point coefficient {x!r}; pass an int, Fraction or 'p/q' string")
    return Fraction(x)


@dataclass(frozen=True)
class DivisorClass:
    degree: Fraction
    mults: tuple[Fraction, ...]
    ambient_dim: int = 2

    def __post_init__(self):
        object.__setattr__(self, "degree", _exact(self.degree))
        object.__setattr__(self, "mults", tuple(_exact(m) for m in self.mults))
        if self.ambient_dim < 1:
            raise InvalidParameterError("ambient_dim must be positive")

    @classmethod
    def uniform(cls, k: int, eps, degree=1) -> "DivisorClass":
        return cls(degree, (eps,) * k)

    @classmethod
    def pullback(cls, k: int, degree=1) -> "DivisorClass":
        return cls(degree, (0,) * k)

    @property
    def k(self) -> int:
        return len(self.mults)

    def __str__(self):
        return f"({self.degree}; {', '.join(map(str, self.mults))})"

    def to_json(self) -> dict:
        return {"degree": fmt(self.degree), "mults": [fmt(m) for m in self.mults]}


@dataclass(frozen=True)
class CurveClass:
    """Integral class of a curve on the blow-up.

    Strict transforms of plane curves have ``degree >= 0`` and ``mults >= 0``.
    The exceptional curve ``E_i`` is represented as ``(0; 0,..,-1,..,0)`` so the
    same pairing formula applies to it.
    """

    degree: int
    mults: tuple[int, ...]
    label: str | None = field(default=None, compare=False)

    def __post_init__(self):
        if any(not isinstance(v, int) for v in (self.degree, *self.mults)):
            object.__setattr__(self, "degree", _integral(self.degree))
            object.__setattr__(self, "mults", tuple(_integral(m) for m in self.mults))
        else:
            object.__setattr__(self, "mults", tuple(self.mults))
        if self.degree == 0 and not any(self.mults):
            raise InvalidParameterError("the zero class is not a curve class")

    @classmethod
    def exceptional(cls, i: int, k: int) -> "CurveClass":
        return cls(0, tuple(-1 if j == i else 0 for j in range(k)), label=f"E{i + 1}")

    @property
    def k(self) -> int:
        return len(self.mults)

    @property
    def ambient_dim(self) -> int:
        return 2

    def key(self) -> tuple:
        return (self.degree, self.mults)

    def __str__(self):
        return f"({self.degree}; {', '.join(map(str, self.mults))})"

    def to_json(self) -> dict:
        return {"degree": self.degree, "mults": list(self.mults), "label": self.label}


def _integral(x) -> int:
    f = Fraction(x)
    if f.denominator != 1:
        raise InvalidParameterError(f"curve class coefficients must be integers, got {x!r}")
    return int(f)


AnyClass = Union[DivisorClass, CurveClass]

CANONICAL_DEGREE = -3


def canonical_class(k: int) -> DivisorClass:
    """``K = -3H + sum E_i``, i.e. ``(-3; -1, ..., -1)``."""
    return DivisorClass(CANONICAL_DEGREE, (-1,) * k)


def intersect(a: AnyClass, b: AnyClass) -> Fraction:
    if a.k != b.k:
        raise DimensionMismatchError(f"point counts differ: {a.k} vs {b.k}")
    if a.ambient_dim != 2 or b.ambient_dim != 2:
        raise DimensionMismatchError("intersection form is implemented for surfaces (ambient_dim = 2)")
    return Fraction(a.degree) * b.degree - sum((Fraction(x) * y for x, y in zip(a.mults, b.mults)), Fraction(0))


def seshadri_ratio(L: DivisorClass, C: CurveClass) -> Fraction:
    """Upper bound ``L.C / sum(mult)`` on the Seshadri constant contributed by ``C``."""
    if any(L.mults):
        raise PreconditionError("L must be a pullback class (all exceptional coefficients zero)")
    total = sum(C.mults)
    if total <= 0:
        raise NotAnObstructionError(f"{C} has no positive multiplicity at the points")
    return Fraction(L.degree) * C.degree / total


def cremona(c: AnyClass, i: int, j: int, l: int) -> AnyClass:
    """Quadratic Cremona transformation based at points ``i, j, l`` (0-based)."""
    k = c.k
    if k < 3:
        raise InvalidTransformError("Cremona transformation needs at least three points")
    if len({i, j, l}) != 3 or not all(0 <= x < k for x in (i, j, l)):
        raise InvalidTransformError(f"indices must be distinct and < {k}: {(i, j, l)}")
    d = c.degree
    m = list(c.mults)
    mi, mj, ml = m[i], m[j], m[l]
    m[i], m[j], m[l] = d - mj - ml, d - mi - ml, d - mi - mj
    d2 = 2 * d - mi - mj - ml
    if isinstance(c, CurveClass):
        return CurveClass(d2, tuple(m))
    return DivisorClass(d2, tuple(m), c.ambient_dim)


def _permute(c: AnyClass, perm: Sequence[int]) -> AnyClass:
    """New class whose slot ``s`` holds ``c.mults[perm[s]]``."""
    mults = tuple(c.mults[p] for p in perm)
    if isinstance(c, CurveClass):
        return CurveClass(c.degree, mults)
    return DivisorClass(c.degree, mults, c.ambient_dim)


def _pad(c: DivisorClass, k: int) -> DivisorClass:
    return DivisorClass(c.degree, c.mults + (Fraction(0),) * (k - c.k), c.ambient_dim)


# --------------------------------------------------------------------------
# verdicts and certificates


@dataclass(frozen=True)
class NefCertificate:
    """Why a class is nef.

    ``method`` is ``"cremona"`` (reduced to standard form ``reduced`` by
    ``steps``), ``"pencils"`` (a nonnegative combination of ``H`` and the
    pencils ``H - E_i``) or ``"support"`` (only <= 8 points carry weight and
    the Cremona test applies to those).
    """

    method: str
    reduced: DivisorClass | None = None
    steps: tuple = ()
    support: tuple[int, ...] | None = None

    def to_json(self) -> dict:
        return {
            "method": self.method,
            "reduced": None if self.reduced is None else self.reduced.to_json(),
            "steps": len(self.steps),
            "support": None if self.support is None else list(self.support),
        }


@dataclass(frozen=True)
class SearchCertificate:
    """No obstruction found among candidates of degree <= ``degree_bound``."""

    degree_bound: int
    candidates_checked: int

    def to_json(self) -> dict:
        return {"method": "search", "degree_bound": self.degree_bound,
                "candidates_checked": self.candidates_checked}


@dataclass(frozen=True)
class Nef:
    certificate: NefCertificate


@dataclass(frozen=True)
class NotNef:
    witness: CurveClass
    pairing: Fraction


@dataclass(frozen=True)
class UnknownUpTo:
    degree_bound: int
    candidates_checked: int


NefVerdict = Union[Nef, NotNef, UnknownUpTo]


@dataclass(frozen=True)
class SeshadriBounds:
    k: int
    lower: Fraction
    upper: Fraction
    lower_witness: NefCertificate | SearchCertificate
    upper_witness: CurveClass
    exact: bool
    conditional: bool

    def __post_init__(self):
        if not (0 <= self.lower <= self.upper):
            raise PreconditionError(f"inconsistent bounds {self.lower} > {self.upper}")
        if self.exact and self.lower != self.upper:
            raise PreconditionError("exact bounds must coincide")

    def to_json(self) -> dict:
        return {
            "k": self.k,
            "lower": fmt(self.lower),
            "upper": fmt(self.upper),
            "lower_witness": self.lower_witness.to_json(),
            "upper_witness": self.upper_witness.to_json(),
            "exact": self.exact,
            "conditional": self.conditional,
        }


# --------------------------------------------------------------------------
# k <= 8: Cremona reduction and (-1)-curves


def cremona_reduce(c: DivisorClass, max_steps: int = 10_000) -> tuple[DivisorClass, tuple]:
    """Reduce to standard form: mults non-increasing and ``d >= m1 + m2 + m3``.

    Classes with fewer than three points are padded with zeros first (nefness
    is unchanged by pulling back along a further blow-up).  Returns the reduced
    class and the list of steps, each ``("perm", perm)`` or ``("cremona",)``.
    Termination relies on the finiteness of the Weyl group, i.e. ``k <= 8``.
    """
    cur = _pad(c, 3) if c.k < 3 else c
    steps: list = []
    for _ in range(max_steps):
        perm = tuple(sorted(range(cur.k), key=lambda s: (-cur.mults[s], s)))
        if perm != tuple(range(cur.k)):
            cur = _permute(cur, perm)
            steps.append(("perm", perm))
        m = cur.mults
        if cur.degree >= m[0] + m[1] + m[2]:
            return cur, tuple(steps)
        cur = cremona(cur, 0, 1, 2)
        steps.append(("cremona",))
    raise InvalidParameterError("Cremona reduction did not terminate (more than 8 points?)")


@functools.lru_cache(maxsize=None)
def minus_one_curves(k: int) -> tuple[CurveClass, ...]:
    """All (-1)-curve classes on the blow-up of the plane at ``k <= 8`` general points.

    Generated as the orbit of the exceptional curves under Cremona
    transformations and transpositions; sorted by ``(degree, mults)``.
    """
    if not 0 <= k <= EXACT_MAX_POINTS:
        raise InvalidParameterError("(-1)-curves are finite only for k <= 8")
    if k == 0:
        return ()
    kk = max(k, 3)
    start = [CurveClass.exceptional(i, kk) for i in range(kk)]
    seen = {c.key(): c for c in start}
    frontier = list(start)
    triples = list(itertools.combinations(range(kk), 3))
    swaps = [(a, a + 1) for a in range(kk - 1)]
    while frontier:
        nxt = []
        for c in frontier:
            images = [cremona(c, *t) for t in triples]
            for a, b in swaps:
                perm = list(range(kk))
                perm[a], perm[b] = b, a
                images.append(_permute(c, perm))
            for img in images:
                if img.key() not in seen:
                    seen[img.key()] = img
                    nxt.append(img)
        frontier = nxt
    out = [c for c in seen.values() if all(m == 0 for m in c.mults[k:])]
    out = [CurveClass(c.degree, c.mults[:k], label=_label(c.degree, c.mults[:k])) for c in out]
    return tuple(sorted(out, key=CurveClass.key))


def _label(d: int, mults: Sequence[int]) -> str:
    if d == 0:
        return f"E{next(i for i, m in enumerate(mults) if m) + 1}"
    pts = ",".join(f"P{i + 1}" + (f"^{m}" if m > 1 else "") for i, m in enumerate(mults) if m)
    name = {1: "line", 2: "conic", 3: "cubic"}.get(d, f"degree-{d} curve")
    return f"{name} through {pts}" if pts else name


@functools.lru_cache(maxsize=None)
def effective_generators(k: int) -> tuple[CurveClass, ...]:
    """Effective classes whose dual cone is the nef cone for ``k <= 8`` general points.

    The (-1)-curves, the pencils ``H - E_i`` and ``H`` itself (the last two are
    redundant for ``k >= 2`` but make ``k <= 1`` work uniformly).
    """
    gens = {c.key(): c for c in minus_one_curves(k)}
    for i in range(k):
        c = CurveClass(1, tuple(int(j == i) for j in range(k)), label=f"line through P{i + 1}")
        gens.setdefault(c.key(), c)
    h = CurveClass(1, (0,) * k, label="line")
    gens.setdefault(h.key(), h)
    return tuple(sorted(gens.values(), key=CurveClass.key))


def _score(D: DivisorClass, C: CurveClass, p: Fraction) -> tuple:
    # exceptional curves first, then by pairing per unit degree, then lexicographically
    if C.degree == 0:
        return (0, p, C.key())
    return (1, p / C.degree, C.key())


def _best_violator(D: DivisorClass, candidates) -> NotNef | None:
    best = None
    for C in candidates:
        p = intersect(D, C)
        if p < 0:
            s = _score(D, C, p)
            if best is None or s < best[0]:
                best = (s, C, p)
    if best is None:
        return None
    return NotNef(best[1], best[2])


def _nef_exact(c: DivisorClass) -> NefVerdict:
    reduced, steps = cremona_reduce(c)
    nef = min(reduced.mults) >= 0
    violator = _best_violator(c, effective_generators(c.k))
    if nef != (violator is None):
        # the two descriptions of the nef cone must agree
        raise AssertionError(f"Cremona reduction and (-1)-curve pairing disagree on {c}")
    if nef:
        return Nef(NefCertificate("cremona", reduced, steps))
    return violator


# --------------------------------------------------------------------------
# k >= 9: bounded candidate search


def _candidate_ok(d: int, ms: Sequence[int]) -> bool:
    sq = sum(m * m for m in ms)
    if d * d - sq < -1:
        return False
    # arithmetic genus of a plane curve with these multiple points
    if (d - 1) * (d - 2) - sum(m * (m - 1) for m in ms) < 0:
        return False
    # expected dimension >= 1, so the class is effective for every choice of points
    return comb(d + 2, 2) - sum(m * (m + 1) // 2 for m in ms) >= 1


def _multisets(k: int, d: int) -> Iterator[tuple[int, ...]]:
    """Non-increasing tuples of length ``k`` in ``[0, d]`` with ``sum m^2 <= d^2 + 1``."""
    budget = d * d + 1
    out: list[int] = []

    def rec(pos: int, cap: int, left: int):
        if pos == k:
            yield tuple(out)
            return
        for m in range(min(cap, isqrt(left)), -1, -1):
            out.append(m)
            yield from rec(pos + 1, m, left - m * m)
            out.pop()

    yield from rec(0, d, budget)


@functools.lru_cache(maxsize=None)
def _candidates_of_degree(k: int, d: int) -> np.ndarray:
    rows = [ms for ms in _multisets(k, d) if ms[0] > 0 and _candidate_ok(d, ms)]
    return np.array(rows, dtype=np.int64).reshape(len(rows), k)


def obstruction_candidates(k: int, degree_bound: int) -> list[tuple[int, tuple[int, ...]]]:
    """Sorted-multiplicity candidate classes ``(d, mults)`` with ``1 <= d <= degree_bound``.

    Conditions: ``0 <= m_i <= d``, ``C^2 >= -1``, nonnegative arithmetic genus
    and expected dimension at least one (so the class is effective at any
    points; this keeps the search sound).
    """
    return [(d, tuple(int(m) for m in row))
            for d in range(1, degree_bound + 1) for row in _candidates_of_degree(k, d)]


def _nef_search(c: DivisorClass, degree_bound: int) -> NefVerdict:
    k = c.k
    # worst placement of a multiset against c: largest mults on largest weights;
    # among equal weights, later indices first (lexicographically least witness)
    order = sorted(range(k), key=lambda s: (-c.mults[s], -s))
    q = lcm(c.degree.denominator, *(m.denominator for m in c.mults))
    deg = int(c.degree * q)
    weights = [int(c.mults[s] * q) for s in order]
    # int64 is exact while |pairing| stays below 2**62
    wide = (abs(deg) + sum(abs(w) for w in weights)) * max(degree_bound, 1) >= 2 ** 62
    w = np.array(weights, dtype=object if wide else np.int64)
    best = None
    checked = 0
    for d in range(1, degree_bound + 1):
        cand = _candidates_of_degree(k, d)
        checked += len(cand)
        if not len(cand):
            continue
        pair = deg * d - (cand.astype(object) if wide else cand) @ w
        for idx in np.flatnonzero(pair < 0):
            placed = [0] * k
            for slot, m in zip(order, cand[idx]):
                placed[slot] = int(m)
            p = Fraction(int(pair[idx]), q)
            key = (p / d, d, tuple(placed))
            if best is None or key < best[0]:
                best = (key, p)
    if best is None:
        return UnknownUpTo(degree_bound, checked)
    (_, d, placed), p = best
    return NotNef(CurveClass(d, placed, label=_label(d, placed)), p)


def is_nef_general(c: DivisorClass, k: int | None = None, degree_bound: int = DEFAULT_DEGREE_BOUND) -> NefVerdict:
    """Nef test for ``c`` on the blow-up of the plane at ``k`` general points."""
    if degree_bound < 0:
        raise InvalidParameterError("degree_bound must be nonnegative")
    if k is not None and k != c.k:
        raise DimensionMismatchError(f"class has {c.k} multiplicities, expected {k}")
    if c.ambient_dim != 2:
        raise DimensionMismatchError("nef testing is implemented for the plane only")
    k = c.k
    for i, m in enumerate(c.mults):
        if m < 0:
            return NotNef(CurveClass.exceptional(i, k), m)
    if k <= EXACT_MAX_POINTS:
        return _nef_exact(c)
    if c.degree < 0:
        return NotNef(CurveClass(1, (0,) * k, label="line"), c.degree)

    support = tuple(i for i, m in enumerate(c.mults) if m)
    if len(support) <= EXACT_MAX_POINTS:
        sub = DivisorClass(c.degree, tuple(c.mults[i] for i in support))
        v = _nef_exact(sub)
        if isinstance(v, Nef):
            return Nef(NefCertificate("support", v.certificate.reduced, v.certificate.steps, support))
        lifted = [0] * k
        for i, m in zip(support, v.witness.mults):
            lifted[i] = m
        return NotNef(CurveClass(v.witness.degree, tuple(lifted), label=v.witness.label), v.pairing)
    if c.degree >= sum(c.mults):
        return Nef(NefCertificate("pencils"))
    return _nef_search(c, degree_bound)


def seshadri_constant_general(k: int, degree_bound: int = DEFAULT_DEGREE_BOUND) -> SeshadriBounds:
    """Bounds on ``eps(P^2, O(1); P_1..P_k)`` for general points, uniform weights.

    Each ``NotNef`` verdict at the current upper bound produces a witness whose
    ratio is strictly smaller, so the upper bound drops to the witness ratio;
    the loop stops as soon as the class at the upper bound is not obstructed.
    For ``k <= 8`` that class is certified nef and the value is exact; for
    ``k >= 9`` the lower bound holds only up to ``degree_bound``.
    """
    if k < 1:
        raise InvalidParameterError("k must be at least 1")
    if degree_bound < 0:
        raise InvalidParameterError("degree_bound must be nonnegative")
    upper = Fraction(1)
    witness = CurveClass(1, tuple(int(j == 0) for j in range(k)), label="line through P1")
    L = DivisorClass.pullback(k)
    while True:
        verdict = is_nef_general(DivisorClass.uniform(k, upper), k, degree_bound)
        if isinstance(verdict, NotNef):
            r = seshadri_ratio(L, verdict.witness)
            assert r < upper
            upper, witness = r, verdict.witness
            continue
        break
    if isinstance(verdict, Nef):
        return SeshadriBounds(k, upper, upper, verdict.certificate, witness, exact=True, conditional=False)
    cert = SearchCertificate(verdict.degree_bound, verdict.candidates_checked)
    return SeshadriBounds(k, upper, upper, cert, witness, exact=False, conditional=True)


def downward_closure_check(c: DivisorClass, c_prime: DivisorClass, k: int | None = None,
                           degree_bound: int = DEFAULT_DEGREE_BOUND) -> bool:
    """Shrinking exceptional weights of a nef class keeps it nef.

    Returns ``True`` unless ``c_prime`` is provably not nef.
    """
    if c.k != c_prime.k or c.degree != c_prime.degree:
        raise PreconditionError("classes must share degree and point count")
    if not all(0 < mp <= m for mp, m in zip(c_prime.mults, c.mults)):
        raise PreconditionError("need 0 < m'_i <= m_i for every i")
    if not isinstance(is_nef_general(c, k, degree_bound), Nef):
        raise PreconditionError(f"{c} is not certified nef")
    return not isinstance(is_nef_general(c_prime, k, degree_bound), NotNef)
