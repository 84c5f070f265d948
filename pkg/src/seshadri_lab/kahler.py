"""Fubini-Study expansions, finite-difference metrics, potential gluing and ball packings.

Numeric paths use 64-bit floats.  A "metric" is the complex Hessian
``g[j, k] = d^2 phi / dz_j dzbar_k`` of a real potential ``phi``; the
``i/(2 pi)`` normalisation only enters through volumes, where the
Fubini-Study form has total volume 1 and the unit ball has volume 1.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .errors import (
    BoundInconsistencyError,
    InvalidParameterError,
    InvariantViolationError,
    NumericalInstabilityError,
    RangeError,
)
from .interpolation import monomial_basis
from .picard_lattice import SeshadriBounds

Point = tuple[complex, ...]
Potential = Callable[[Point], float]

MAX_ABS_COORD = 1e150


def multinomial(parts: Sequence[int]) -> int:
    out, total = 1, 0
    for p in parts:
        total += p
        out *= math.comb(total, p)
    return out


@dataclass(frozen=True)
class FSExpansion:
    """``(|Y|^2 + |T|^2)^m = sum c |Y^alpha|^2 |T^beta|^2``."""

    m: int
    n: int
    terms: tuple[tuple[tuple[int, ...], int, int], ...]

    def check(self) -> None:
        if len(self.terms) != math.comb(self.m + self.n, self.n):
            raise InvariantViolationError("wrong number of terms")
        for alpha, beta, c in self.terms:
            if len(alpha) != self.n or sum(alpha) + beta != self.m or c != multinomial(alpha + (beta,)):
                raise InvariantViolationError(f"bad term {(alpha, beta, c)}")
        if sum(c for *_, c in self.terms) != (self.n + 1) ** self.m:
            raise InvariantViolationError("coefficients do not sum to (n+1)^m")

    @property
    def coefficients(self) -> list[int]:
        return [c for *_, c in self.terms]

    def evaluate(self, ys: Sequence, t) -> Fraction | float:
        """``sum c * y^alpha * t^beta`` (the expansion with squares replaced by plain variables)."""
        total = 0
        for alpha, beta, c in self.terms:
            v = c * t ** beta
            for y, a in zip(ys, alpha):
                v *= y ** a
            total += v
        return total

    def to_json(self) -> dict:
        return {
            "m": self.m,
            "n": self.n,
            "terms": [{"alpha": list(a), "beta": b, "c": c} for a, b, c in self.terms],
        }


def fs_expansion(m: int, n: int) -> FSExpansion:
    """Terms in graded-lex order on ``(Y_1, ..., Y_n, T)``.

    >>> fs_expansion(2, 1).coefficients
    [1, 2, 1]
    """
    if m < 1 or n < 1:
        raise InvalidParameterError("need m >= 1 and n >= 1")
    terms = tuple((e[:-1], e[-1], multinomial(e)) for e in monomial_basis(n, m))
    exp = FSExpansion(m, n, terms)
    exp.check()
    return exp


def potential_from_sections(exp: FSExpansion, point: Sequence[complex]) -> float:
    """``log sum c |Y^alpha|^2`` in the chart ``T = 1``."""
    if len(point) != exp.n:
        raise InvalidParameterError(f"point has {len(point)} coordinates, expected {exp.n}")
    mags = [abs(complex(z)) for z in point]
    if not all(math.isfinite(x) and x <= MAX_ABS_COORD for x in mags):
        raise RangeError("point outside the representable range")
    r2 = [x * x for x in mags]
    if max(r2, default=0.0) <= 1e10:
        # the alpha = 0 term is 1; log1p keeps small |Y| accurate
        rest = math.fsum(c * math.prod(x ** a for x, a in zip(r2, alpha))
                         for alpha, _, c in exp.terms if any(alpha))
        return math.log1p(rest)
    logs = []
    for alpha, _, c in exp.terms:
        if any(a and x == 0 for x, a in zip(r2, alpha)):
            continue
        logs.append(math.log(c) + sum(a * math.log(x) for x, a in zip(r2, alpha) if a))
    top = max(logs)
    val = top + math.log(math.fsum(math.exp(v - top) for v in logs))
    if not math.isfinite(val):
        raise RangeError("potential is not finite")
    return val


def fs_potential(m: int = 1) -> Potential:
    """``m log(1 + |z|^2)``."""
    return lambda z: m * math.log1p(sum(abs(w) ** 2 for w in z))


def flat_potential(z: Point) -> float:
    return sum(abs(w) ** 2 for w in z)


def fs_metric_closed_form(m: int, z: Sequence[complex]) -> np.ndarray:
    """``m ((1+|z|^2) delta_jk - zbar_j z_k) / (1+|z|^2)^2``."""
    z = np.asarray(z, dtype=complex)
    s = 1 + float(np.vdot(z, z).real)
    return m * (s * np.eye(len(z)) - np.outer(z.conj(), z)) / s ** 2


# --------------------------------------------------------------------------
# finite differences


def metric_fd(potential: Potential, point: Sequence[complex], h: float = 1e-4) -> np.ndarray:
    """Complex Hessian by central differences in real and imaginary parts.

    Second differences at ``h`` and ``2h`` are combined by Richardson
    extrapolation, so the truncation error is O(h^4).

    ``g_jk = (phi_xjxk + phi_yjyk + i (phi_xjyk - phi_yjxk)) / 4``.
    """
    if not 1e-6 <= h <= 1e-2:
        raise InvalidParameterError(f"step {h} outside [1e-6, 1e-2]")
    z = np.asarray(point, dtype=complex)
    n = len(z)
    base = np.concatenate([z.real, z.imag])

    def f(v: np.ndarray) -> float:
        return potential(tuple(complex(a, b) for a, b in zip(v[:n], v[n:])))

    dim = 2 * n
    f0 = f(base)

    def real_hessian(step: float) -> np.ndarray:
        # both orders of each mixed partial are evaluated, so a potential that
        # is not a function of the point shows up as an asymmetric Hessian
        H = np.empty((dim, dim))
        e = np.eye(dim) * step
        for a in range(dim):
            H[a, a] = (f(base + e[a]) - 2 * f0 + f(base - e[a])) / step ** 2
            for b in range(dim):
                if b != a:
                    H[a, b] = (
                        f(base + e[a] + e[b]) - f(base + e[a] - e[b])
                        - f(base - e[a] + e[b]) + f(base - e[a] - e[b])
                    ) / (4 * step ** 2)
        return H

    # one Richardson step cancels the h^2 error term
    H = (4 * real_hessian(h) - real_hessian(2 * h)) / 3
    if not np.all(np.isfinite(H)):
        raise NumericalInstabilityError("non-finite potential values near the sample")
    xx, yy, xy, yx = H[:n, :n], H[n:, n:], H[:n, n:], H[n:, :n]
    g = (xx + yy + 1j * (xy - yx)) / 4
    if np.max(np.abs(g - g.conj().T), initial=0.0) > 1e-8:
        raise NumericalInstabilityError("finite-difference metric is not Hermitian")
    return (g + g.conj().T) / 2


def is_positive_definite(g: np.ndarray) -> bool:
    try:
        np.linalg.cholesky(g)
    except np.linalg.LinAlgError:
        return False
    return True


def min_eigenvalue(g: np.ndarray) -> float:
    return float(np.linalg.eigvalsh(g)[0])


# --------------------------------------------------------------------------
# gluing


def smoothstep(x: float) -> float:
    """Quintic ``6x^5 - 15x^4 + 10x^3`` clamped to [0, 1]; C^2 at both ends."""
    x = min(1.0, max(0.0, x))
    return x * x * x * (x * (6 * x - 15) + 10)


def inner_weight(r: float, r_inner: float, r_outer: float) -> float:
    """1 for ``r <= r_inner``, 0 for ``r >= r_outer``."""
    return 1.0 - smoothstep((r - r_inner) / (r_outer - r_inner))


def disk_grid(size: int = 21, radius: float = 2.0) -> list[Point]:
    """``size x size`` lattice on ``[-radius, radius]^2`` kept inside the closed disk (n = 1)."""
    if size < 2:
        raise InvalidParameterError("grid size must be at least 2")
    xs = np.linspace(-radius, radius, size)
    return [(complex(x, y),) for x in xs for y in xs if x * x + y * y <= radius * radius + 1e-12]


@dataclass
class PotentialGrid:
    n: int
    points: list[Point]
    values: list[float]
    h: float

    def __post_init__(self):
        if self.h <= 0:
            raise InvalidParameterError("h must be positive")
        if not all(math.isfinite(v) for v in self.values):
            raise NumericalInstabilityError("non-finite potential sample")

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "h": self.h,
            "points": [[[w.real, w.imag] for w in p] for p in self.points],
            "values": self.values,
        }


@dataclass
class GluingReport:
    grid: PotentialGrid
    min_eigenvalues: list[float]
    unglued_min_eigenvalues: list[float]
    perturbation_sup: float
    violations: list[tuple[Point, float]] = field(default_factory=list)

    @property
    def positive(self) -> bool:
        return not self.violations

    @property
    def min_eigenvalue(self) -> float:
        return min(self.min_eigenvalues)

    @property
    def unglued_min_eigenvalue(self) -> float:
        return min(self.unglued_min_eigenvalues)

    @property
    def gap(self) -> float:
        """Largest pointwise change of the smallest eigenvalue caused by gluing."""
        return max(abs(a - b) for a, b in zip(self.min_eigenvalues, self.unglued_min_eigenvalues))

    def to_json(self, include_grid: bool = False) -> dict:
        out = {
            "positive": self.positive,
            "samples": len(self.grid.points),
            "min_eigenvalue": self.min_eigenvalue,
            "unglued_min_eigenvalue": self.unglued_min_eigenvalue,
            "gap": self.gap,
            "perturbation_sup": self.perturbation_sup,
            "violations": [{"point": [[w.real, w.imag] for w in p], "min_eigenvalue": ev}
                           for p, ev in self.violations],
        }
        if include_grid:
            out["grid"] = self.grid.to_json()
        return out


def glued_potential(s_inner: Potential, s_outer: Potential, r_inner: float, r_outer: float) -> Potential:
    """``log(rho (s_inner - s_outer) + s_outer)``, with ``rho`` the inner weight."""

    def phi(z: Point) -> float:
        r = math.sqrt(sum(abs(w) ** 2 for w in z))
        rho = inner_weight(r, r_inner, r_outer)
        so = s_outer(z)
        return math.log(rho * (s_inner(z) - so) + so) if rho else math.log(so)

    return phi


def glue_potentials(s_inner: Potential, s_outer: Potential, r_inner: float, r_outer: float,
                    grid: Sequence[Point] | None = None, h: float = 1e-4,
                    threads: int = 1, tol: float = 0.0) -> GluingReport:
    """Sample the glued potential and test positivity of its metric at every grid point.

    A sample is a violation when the smallest eigenvalue of the glued
    metric is ``<= tol``.
    """
    if not 0 < r_inner < r_outer:
        raise InvalidParameterError("need 0 < R' < R")
    grid = list(grid) if grid is not None else disk_grid()
    if not grid:
        raise InvalidParameterError("empty grid")
    phi = glued_potential(s_inner, s_outer, r_inner, r_outer)
    unglued = lambda z: math.log(s_outer(z))  # noqa: E731

    def sample(z: Point) -> tuple[float, float, float, float]:
        so, si = s_outer(z), s_inner(z)
        if so <= 0 or si <= 0:
            raise InvalidParameterError(f"potentials must be positive (at {z})")
        return phi(z), min_eigenvalue(metric_fd(phi, z, h)), min_eigenvalue(metric_fd(unglued, z, h)), abs(si - so)

    with ThreadPoolExecutor(max_workers=max(1, threads)) as ex:
        rows = list(ex.map(sample, grid))
    annulus = [abs(d) for z, (*_, d) in zip(grid, rows)
               if r_inner <= math.sqrt(sum(abs(w) ** 2 for w in z)) <= r_outer]
    violations = [(z, ev) for z, (_, ev, _, _) in zip(grid, rows) if ev <= tol]
    return GluingReport(
        PotentialGrid(len(grid[0]), grid, [r[0] for r in rows], h),
        [r[1] for r in rows],
        [r[2] for r in rows],
        max(annulus, default=0.0),
        violations,
    )


def sine_perturbation(amplitude: float, m: int = 1) -> tuple[Potential, Potential]:
    """``s_outer = (1+|z|^2)^m`` and ``s_inner = s_outer (1 + amplitude sin |z|^2)``."""

    def outer(z: Point) -> float:
        return (1 + sum(abs(w) ** 2 for w in z)) ** m

    def inner(z: Point) -> float:
        return outer(z) * (1 + amplitude * math.sin(sum(abs(w) ** 2 for w in z)))

    return inner, outer


# --------------------------------------------------------------------------
# balls and packings


def max_ball_radius(m: int, d: int) -> float:
    if m < 1 or d < 1:
        raise InvalidParameterError("need m, d >= 1")
    return math.sqrt(m / d)


def ball_volume(r: float, n: int) -> float:
    """Volume ``r^(2n)`` with the unit ball normalised to volume 1."""
    if r < 0:
        raise InvalidParameterError("radius must be nonnegative")
    return r ** (2 * n)


@dataclass(frozen=True)
class PackingReport:
    k: int
    n: int
    epsilon: SeshadriBounds
    gamma_lower: float
    gamma_upper: float
    per_ball_radius: float
    total_ball_volume: float
    ambient_volume: float

    @property
    def volume_consistent(self) -> bool:
        return self.total_ball_volume <= self.ambient_volume * (1 + 1e-12)

    def csv_rows(self) -> list[tuple[str, float, float, float, str]]:
        """``(bound, radius, ball volume, gamma, epsilon)`` for each side of the bounds."""
        rows = []
        for name, g, e in (("lower", self.gamma_lower, self.epsilon.lower),
                           ("upper", self.gamma_upper, self.epsilon.upper)):
            rows.append((name, g, ball_volume(g, self.n), g, f"{e.numerator}/{e.denominator}"))
        return rows

    def to_json(self) -> dict:
        return {
            "k": self.k,
            "n": self.n,
            "epsilon": self.epsilon.to_json(),
            "gamma_lower": self.gamma_lower,
            "gamma_upper": self.gamma_upper,
            "per_ball_radius": self.per_ball_radius,
            "total_ball_volume": self.total_ball_volume,
            "ambient_volume": self.ambient_volume,
            "volume_consistent": self.volume_consistent,
        }


def packing_report(k: int, bounds: SeshadriBounds, n: int = 2) -> PackingReport:
    """Ball radii ``gamma = sqrt(epsilon)`` and the volume check against ``L^n = 1``.

    The check ``k * lower^n <= 1`` is enforced: a lower bound is claimed
    achievable, so breaking it means a lattice bug.  An upper bound only
    has to dominate the true constant, so ``volume_consistent`` reports it
    without raising.
    """
    if k < 1 or n < 1:
        raise InvalidParameterError("need k, n >= 1")
    if bounds.k != k:
        raise InvalidParameterError(f"bounds are for k={bounds.k}, not {k}")
    if bounds.lower < 0 or bounds.lower > bounds.upper:
        raise BoundInconsistencyError(f"lower {bounds.lower} exceeds upper {bounds.upper}")
    if k * bounds.lower ** n > 1:
        raise BoundInconsistencyError(f"k * lower^n = {k * bounds.lower ** n} exceeds the volume 1")
    g_lo, g_up = math.sqrt(bounds.lower), math.sqrt(bounds.upper)
    return PackingReport(k, n, bounds, g_lo, g_up, g_up, k * float(bounds.upper) ** n, 1.0)
