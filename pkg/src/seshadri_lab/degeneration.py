"""Section data on the one-parameter degeneration to the blow-up at one more point.

Stage ``i`` (1-based) works on the family over the line ``l_i``: the general
fibre is the blow-up at ``P_1..P_{i-1}``, the central fibre is the blow-up at
``P_1..P_i`` glued along ``E_i`` to a copy of ``P^n`` with homogeneous
coordinates ``[Y_1 : ... : Y_n : T]``.  Sections are represented purely by
data: a degree-``d`` form and a power of the base parameter ``t``.

Polynomials on the exceptional component are dicts ``{exponent: coeff}`` with
exponents ordered ``(alpha_1, ..., alpha_n, beta)`` for ``Y^alpha T^beta``.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb, sqrt
from typing import Sequence

from . import linalg
from .errors import InvalidParameterError, InvariantViolationError, ZeroSectionError
from .interpolation import (
    PointConfiguration,
    SectionBasisSplit,
    basis_split,
    h0_linear_system,
    homogeneous_jet,
    linear_system,
    monomial_basis,
    select_subbasis_for_blowup,
    vanishing_order,
)
from .rational import fmt

Exponent = tuple[int, ...]
Poly = dict[Exponent, Fraction]

DEFAULT_SAMPLE_TS = (Fraction(1), Fraction(1, 2), Fraction(1, 3), Fraction(1, 7))


def max_workers() -> int:
    """Thread cap for independent fibre checks (``SESHADRI_LAB_THREADS``, default 1)."""
    try:
        return max(1, int(os.environ.get("SESHADRI_LAB_THREADS", "1")))
    except ValueError:
        return 1


@dataclass(frozen=True)
class FamilySection:
    """``t^base_power * p^*(form)`` on the stage-``center_index`` family."""

    base_power: int
    form: tuple[Fraction, ...]
    degree: int
    center_index: int
    mult_at_center: int

    def __post_init__(self):
        if self.base_power < 0:
            raise InvalidParameterError("base_power must be nonnegative")


@dataclass(frozen=True)
class CentralFiberPair:
    """Restriction of a family section to ``X_i  U  E^(i)`` (glued along ``E_i``)."""

    on_blowup: tuple[Fraction, ...] | None
    on_exceptional: Poly
    agreement_jet: Poly
    kind: str

    def __post_init__(self):
        if self.on_blowup is None and not self.on_exceptional:
            raise InvariantViolationError("both components of a central-fibre pair are zero")


@dataclass(frozen=True)
class DegenerationPath:
    deltas: tuple[Fraction, ...]
    sample_ts: tuple[Fraction, ...] = DEFAULT_SAMPLE_TS

    def __post_init__(self):
        object.__setattr__(self, "deltas", tuple(Fraction(x) for x in self.deltas))
        object.__setattr__(self, "sample_ts", tuple(Fraction(x) for x in self.sample_ts))
        if any(x <= 0 for x in self.deltas):
            raise InvalidParameterError("deltas must be positive")
        if any(t == 0 for t in self.sample_ts):
            raise InvalidParameterError("sample values of t must be nonzero (t = 0 is the central fibre)")

    @classmethod
    def default(cls, k: int) -> "DegenerationPath":
        return cls((Fraction(1),) * k)


def _restrict_to_T0(poly: Poly) -> Poly:
    return {e[:-1]: c for e, c in poly.items() if e[-1] == 0}


# --------------------------------------------------------------------------


def lift_section(form: Sequence, i: int, m_i: int, pts: PointConfiguration, d: int | None = None) -> FamilySection:
    """Steps 1-3 of the lifting: multiply by ``t^(m_i - mult)`` when the form vanishes too little at ``P_i``."""
    form = tuple(Fraction(x) for x in form)
    n = pts.ambient_dim
    if d is None:
        d = _degree_of(len(form), n)
    if not 1 <= i <= pts.k:
        raise IndexError(f"center {i} outside 1..{pts.k}")
    mult = vanishing_order(pts, i - 1, form, d)
    if mult is None:
        raise ZeroSectionError("cannot lift the zero form")
    return FamilySection(max(0, m_i - mult), form, d, i, mult)


def _degree_of(ncoeffs: int, n: int) -> int:
    d = 0
    while comb(d + n, n) < ncoeffs:
        d += 1
    if comb(d + n, n) != ncoeffs:
        raise InvalidParameterError(f"{ncoeffs} coefficients is not a full space of forms in {n + 1} variables")
    return d


def restrict_central(fs: FamilySection, m_i: int, pts: PointConfiguration) -> CentralFiberPair:
    """Pair of sections on the central fibre.

    * order > ``m_i``: ``(form, 0)``, vanishing on ``E_i``;
    * order = ``m_i``: ``(form, jet)`` agreeing on ``E_i``;
    * order < ``m_i``: ``(0, T^(m_i - order) * jet)``, vanishing on ``E_i``.
    """
    i = fs.center_index
    mult = fs.mult_at_center
    if fs.base_power != max(0, m_i - mult):
        raise InvariantViolationError(
            f"base_power {fs.base_power} inconsistent with order {mult} and m_i = {m_i}"
        )
    if mult > m_i:
        return CentralFiberPair(fs.form, {}, {}, "vanishing_on_E")
    jet = homogeneous_jet(pts, i - 1, fs.form, fs.degree, mult)
    exceptional = {alpha + (m_i - mult,): c for alpha, c in jet.items()}
    if mult == m_i:
        pair = CentralFiberPair(fs.form, exceptional, dict(jet), "matching")
        blow_side = homogeneous_jet(pts, i - 1, pair.on_blowup, fs.degree, m_i)
    else:
        pair = CentralFiberPair(None, exceptional, {}, "exceptional_only")
        blow_side = {}
    if _restrict_to_T0(pair.on_exceptional) != blow_side:
        raise InvariantViolationError("central-fibre components disagree on E_i")
    return pair


def restrict_general(fs: FamilySection, t) -> tuple[Fraction, ...]:
    """``t^base_power * form`` on the fibre over ``t != 0``."""
    t = Fraction(t)
    if t == 0:
        raise InvalidParameterError("t = 0 is the central fibre; use restrict_central")
    s = t ** fs.base_power
    return tuple(s * c for c in fs.form)


def pair_agrees(pair: CentralFiberPair, pts: PointConfiguration, center: int, d: int, m_i: int) -> bool:
    """``on_exceptional`` at ``T = 0`` equals the degree-``m_i`` jet of ``on_blowup`` at ``P_center``."""
    blow = {} if pair.on_blowup is None else homogeneous_jet(pts, center - 1, pair.on_blowup, d, m_i)
    return _restrict_to_T0(pair.on_exceptional) == blow


# --------------------------------------------------------------------------
# exceptional-component normalisation


@dataclass(frozen=True)
class ScaledMonomial:
    """``sqrt(c) * Y^alpha T^beta`` with the square root kept symbolic."""

    alpha: Exponent
    beta: int
    c: int

    @property
    def coefficient(self) -> float:
        return sqrt(self.c)

    @property
    def exponent(self) -> Exponent:
        return self.alpha + (self.beta,)


def exceptional_section_targets(m_i: int, n: int) -> list[ScaledMonomial]:
    """Targets ``sqrt(c_{alpha,beta}) Y^alpha T^beta`` whose squared norms sum to ``(|Y|^2 + |T|^2)^m_i``."""
    from .kahler import fs_expansion

    if m_i < 0:
        raise InvalidParameterError("m_i must be nonnegative")
    if m_i == 0:
        return [ScaledMonomial((0,) * n, 0, 1)]
    return [ScaledMonomial(a, b, c) for a, b, c in fs_expansion(m_i, n).terms]


@dataclass(frozen=True)
class ScaledPair:
    """A central-fibre pair multiplied by ``sqrt(scale_sq)``, kept exact."""

    pair: CentralFiberPair
    scale_sq: int


def rescale_to_fs(pairs: Sequence[CentralFiberPair], m_i: int, n: int) -> list[ScaledPair]:
    """Scale pairs whose exceptional part is a single monomial ``Y^alpha T^beta`` by ``sqrt(c)``.

    Pairs vanishing on the exceptional component keep scale 1.  Scaling acts
    on both components, so agreement along ``E_i`` is preserved.
    """
    c_of = {t.exponent: t.c for t in exceptional_section_targets(m_i, n)}
    out = []
    for p in pairs:
        if not p.on_exceptional:
            out.append(ScaledPair(p, 1))
            continue
        if len(p.on_exceptional) != 1:
            raise InvariantViolationError("exceptional part is not a monomial; cannot match an FS target")
        (e, coeff), = p.on_exceptional.items()
        if coeff != 1:
            raise InvariantViolationError(f"monomial coefficient {coeff} != 1")
        out.append(ScaledPair(p, c_of[e]))
    return out


def exceptional_potential_terms(scaled: Sequence[ScaledPair]) -> dict[Exponent, int]:
    """``sum |sqrt(c) Y^alpha T^beta|^2`` collected as ``{(alpha, beta): c}``."""
    acc: dict[Exponent, int] = {}
    for sp in scaled:
        for e, coeff in sp.pair.on_exceptional.items():
            w = coeff * coeff * sp.scale_sq
            if w.denominator != 1:
                raise InvariantViolationError("non-integral squared coefficient")
            acc[e] = acc.get(e, 0) + int(w)
    return acc


# --------------------------------------------------------------------------
# trivialisation


@dataclass
class FiberReport:
    t: Fraction
    rank: int
    expected: int
    pair_counts: dict[str, int] | None = None

    @property
    def ok(self) -> bool:
        return self.rank == self.expected

    def to_json(self) -> dict:
        return {"t": fmt(self.t), "rank": self.rank, "expected": self.expected, "pair_counts": self.pair_counts}


@dataclass
class TrivializationReport:
    degree: int
    mults: tuple[int, ...]
    stage: int
    N: int
    h0_previous_stage: int
    pair_space_dim: int
    fibers: list[FiberReport]
    agreement_ok: bool
    classification_expected: dict[str, int]
    lifts: list[FamilySection] = field(repr=False, default_factory=list)
    pairs: list[CentralFiberPair] = field(repr=False, default_factory=list)

    @property
    def ok(self) -> bool:
        central = self.fibers[0].pair_counts
        return (
            all(f.ok for f in self.fibers)
            and self.agreement_ok
            and self.N == self.h0_previous_stage == self.pair_space_dim
            and central == self.classification_expected
        )

    @property
    def ranks(self) -> list[int]:
        return [f.rank for f in self.fibers]

    def to_json(self) -> dict:
        return {
            "degree": self.degree,
            "mults": list(self.mults),
            "stage": self.stage,
            "N": self.N,
            "h0_previous_stage": self.h0_previous_stage,
            "pair_space_dim": self.pair_space_dim,
            "agreement_ok": self.agreement_ok,
            "classification_expected": self.classification_expected,
            "fibers": [f.to_json() for f in self.fibers],
            "ok": self.ok,
        }


def _pair_vector(pair: CentralFiberPair, N_forms: int, exc_monomials: Sequence[Exponent]) -> list[Fraction]:
    u = list(pair.on_blowup) if pair.on_blowup is not None else [Fraction(0)] * N_forms
    return u + [pair.on_exceptional.get(e, Fraction(0)) for e in exc_monomials]


def pair_space_dimension(pts: PointConfiguration, d: int, mults: Sequence[int], i: int) -> int:
    """Dimension of ``{(u, v) : u|E_i = v|E_i}`` computed from scratch.

    ``u`` ranges over forms with order >= ``m_j`` at ``P_1..P_i``; ``v`` over
    degree-``m_i`` forms in ``Y, T``.
    """
    n = pts.ambient_dim
    m = mults[i - 1]
    reqs = [mults[j] if j < i else 0 for j in range(pts.k)]
    U = linear_system(pts, d, reqs).kernel_basis
    V = monomial_basis(n, m)
    E = monomial_basis(n - 1, m)
    cols = []
    for u in U:
        jet = homogeneous_jet(pts, i - 1, u, d, m)
        cols.append([jet.get(a, Fraction(0)) for a in E])
    for v in V:
        cols.append([Fraction(-1) if (v[-1] == 0 and v[:-1] == a) else Fraction(0) for a in E])
    R = linalg.transpose(cols) if cols else []
    return len(U) + len(V) - linalg.rank(R, len(cols))


def trivialization_check(pts: PointConfiguration, d: int, mults: Sequence[int], i: int,
                         path: DegenerationPath | None = None,
                         split: SectionBasisSplit | None = None) -> TrivializationReport:
    """Lift the stage-``(i-1)`` basis and check it restricts to a basis on every sampled fibre."""
    mults = tuple(int(m) for m in mults)
    k = pts.k
    if len(mults) != k:
        raise InvalidParameterError(f"{len(mults)} multiplicities for {k} points")
    if not 1 <= i <= k:
        raise IndexError(f"stage {i} outside 1..{k}")
    path = path or DegenerationPath.default(k)
    if len(path.deltas) != k:
        raise InvalidParameterError("need one delta per point")
    n = pts.ambient_dim
    split = split or basis_split(pts, d, mults)
    m = mults[i - 1]
    basis = select_subbasis_for_blowup(split, i - 1)
    N = len(basis)
    h0_prev = h0_linear_system(pts, d, [mults[j] if j < i - 1 else 0 for j in range(k)])
    lifts = [lift_section(f, i, m, pts, d) for f in basis]
    ncols = comb(d + n, n)

    def general(t: Fraction) -> FiberReport:
        vecs = [restrict_general(fs, t * path.deltas[i - 1]) for fs in lifts]
        return FiberReport(t, linalg.rank(vecs, ncols), h0_prev)

    with ThreadPoolExecutor(max_workers=max_workers()) as ex:
        general_reports = list(ex.map(general, path.sample_ts))

    pairs = [restrict_central(fs, m, pts) for fs in lifts]
    exc = monomial_basis(n, m)
    vecs = [_pair_vector(p, ncols, exc) for p in pairs]
    counts = {"vanishing_on_E": 0, "matching": 0, "exceptional_only": 0}
    for p in pairs:
        counts[p.kind] += 1
    pdim = pair_space_dimension(pts, d, mults, i)
    central = FiberReport(Fraction(0), linalg.rank(vecs, ncols + len(exc)), pdim, counts)
    agreement = all(pair_agrees(p, pts, i, d, m) for p in pairs)

    # three-way split of B^(i-1) by order at P_i
    n_tilde_i = len(split.Btilde[i - 1])
    expected = {
        "vanishing_on_E": N - len(split.B[i - 1]),
        "matching": n_tilde_i,
        "exceptional_only": len(split.B[i - 1]) - n_tilde_i,
    }
    return TrivializationReport(
        d, mults, i, N, h0_prev, pdim, [central] + general_reports, agreement, expected, lifts, pairs
    )


def trivialization_sweep(pts: PointConfiguration, d: int, mults: Sequence[int],
                         path: DegenerationPath | None = None) -> list[TrivializationReport]:
    """Stages ``k, k-1, ..., 1`` in the order the iterative construction uses."""
    split = basis_split(pts, d, mults)
    return [trivialization_check(pts, d, mults, i, path, split) for i in range(pts.k, 0, -1)]
