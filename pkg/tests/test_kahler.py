import math
import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from seshadri_lab.errors import (
    BoundInconsistencyError,
    InvalidParameterError,
    NumericalInstabilityError,
    RangeError,
)
from seshadri_lab.kahler import (
    ball_volume,
    disk_grid,
    flat_potential,
    fs_expansion,
    fs_metric_closed_form,
    fs_potential,
    glue_potentials,
    inner_weight,
    is_positive_definite,
    max_ball_radius,
    metric_fd,
    min_eigenvalue,
    packing_report,
    potential_from_sections,
    sine_perturbation,
    smoothstep,
)
from seshadri_lab.picard_lattice import (
    CurveClass,
    SearchCertificate,
    SeshadriBounds,
    seshadri_constant_general,
)


def test_fs_expansion_examples():
    assert fs_expansion(2, 1).coefficients == [1, 2, 1]
    assert fs_expansion(1, 2).coefficients == [1, 1, 1]
    e = fs_expansion(3, 2)
    assert len(e.terms) == 10 and sum(e.coefficients) == 27
    with pytest.raises(InvalidParameterError):
        fs_expansion(0, 2)


@pytest.mark.parametrize("m", range(1, 7))
@pytest.mark.parametrize("n", range(1, 4))
def test_multinomial_identity(m, n):
    e = fs_expansion(m, n)
    assert len(e.terms) == math.comb(m + n, n)
    rng = random.Random(m * 10 + n)
    for _ in range(20):
        xs = [Fraction(rng.randint(1, 50), rng.randint(1, 50)) for _ in range(n)]
        t = Fraction(rng.randint(1, 50), rng.randint(1, 50))
        assert e.evaluate(xs, t) == (sum(xs) + t) ** m


def test_potential_examples():
    assert potential_from_sections(fs_expansion(1, 1), (0,)) == 0
    assert potential_from_sections(fs_expansion(2, 1), (1,)) == pytest.approx(2 * math.log(2), rel=1e-12)
    assert potential_from_sections(fs_expansion(2, 2), (0.3, 0.4)) == pytest.approx(2 * math.log(1.25), rel=1e-12)


@settings(max_examples=50)
@given(st.integers(1, 6), st.integers(1, 3), st.data())
def test_potential_is_m_times_fs(m, n, data):
    mag = data.draw(st.sampled_from([1e-6, 1.0, 3.0, 1e8, 1e40]))
    z = tuple(complex(data.draw(st.floats(-1, 1)), data.draw(st.floats(-1, 1))) * mag for _ in range(n))
    a = potential_from_sections(fs_expansion(m, n), z)
    b = potential_from_sections(fs_expansion(1, n), z)
    assert a == pytest.approx(m * b, rel=1e-12, abs=1e-300)


def test_potential_range():
    with pytest.raises(RangeError):
        potential_from_sections(fs_expansion(1, 1), (1e200,))
    with pytest.raises(InvalidParameterError):
        potential_from_sections(fs_expansion(1, 2), (0,))


# --------------------------------------------------------------------------
# finite-difference metrics


def test_metric_at_origin():
    for m in (1, 2, 3):
        g = metric_fd(fs_potential(m), (0, 0))
        assert np.max(np.abs(g - m * np.eye(2))) <= 1e-8


def test_flat_metric():
    g = metric_fd(flat_potential, (1 + 0.5j, -0.3j))
    assert np.max(np.abs(g - np.eye(2))) <= 1e-6


def test_metric_matches_closed_form():
    rng = random.Random(0)
    for m in (1, 2, 3):
        for _ in range(100):
            while True:
                z = tuple(complex(rng.uniform(-2, 2), rng.uniform(-2, 2)) for _ in range(2))
                if sum(abs(w) ** 2 for w in z) < 4:
                    break
            g = metric_fd(fs_potential(m), z, 1e-4)
            assert np.max(np.abs(g - fs_metric_closed_form(m, z))) <= 1e-6
            assert is_positive_definite(g)


def test_metric_via_sections_potential():
    e = fs_expansion(2, 2)
    z = (0.3 + 0.1j, -0.2 + 0.4j)
    g = metric_fd(lambda w: potential_from_sections(e, w), z)
    assert np.max(np.abs(g - fs_metric_closed_form(2, z))) <= 1e-6


def test_metric_step_bounds():
    with pytest.raises(InvalidParameterError):
        metric_fd(flat_potential, (0,), 1e-1)


def test_non_hermitian_detected():
    # not a function of the point: noise breaks the symmetry of the differences
    rng = random.Random(0)
    with pytest.raises(NumericalInstabilityError):
        metric_fd(lambda z: rng.random(), (0, 0))


def test_positive_definite_helper():
    assert is_positive_definite(np.eye(2))
    assert not is_positive_definite(np.diag([1.0, -1.0]))
    assert min_eigenvalue(np.diag([3.0, 2.0])) == 2.0


# --------------------------------------------------------------------------
# gluing


def test_cutoff_profile():
    assert smoothstep(0) == 0 and smoothstep(1) == 1 and smoothstep(0.5) == 0.5
    assert inner_weight(0.5, 1, 2) == 1 and inner_weight(2.5, 1, 2) == 0
    xs = np.linspace(1, 2, 50)
    w = [inner_weight(x, 1, 2) for x in xs]
    assert all(a >= b for a, b in zip(w, w[1:]))


def test_disk_grid():
    g = disk_grid(21, 2.0)
    assert all(abs(p[0]) <= 2 + 1e-12 for p in g)
    assert (0j,) in g and len(g) < 441


def test_identical_potentials_glue_trivially():
    _, outer = sine_perturbation(0.0)
    rep = glue_potentials(outer, outer, 1, 2)
    for p, v in zip(rep.grid.points, rep.grid.values):
        assert v == pytest.approx(math.log(outer(p)), abs=1e-15)
    assert rep.positive and rep.perturbation_sup == 0


def test_gluing_small_perturbations_stay_positive():
    gaps, mins = [], []
    unglued = None
    for a in (1e-2, 1e-3, 1e-4):
        rep = glue_potentials(*sine_perturbation(a), 1, 2)
        assert rep.positive, rep.violations[:3]
        gaps.append(rep.gap)
        mins.append(abs(rep.min_eigenvalue - rep.unglued_min_eigenvalue))
        unglued = rep.unglued_min_eigenvalue if unglued is None else unglued
        assert rep.unglued_min_eigenvalue == unglued
    assert gaps[0] > gaps[1] > gaps[2]
    assert mins[0] > mins[1] > mins[2]


def test_gluing_large_perturbation_violates():
    rep = glue_potentials(*sine_perturbation(0.5), 1, 2)
    assert not rep.positive
    z, ev = rep.violations[0]
    assert ev <= 0 and 1 <= abs(z[0]) <= 2


def test_gluing_parameters():
    inner, outer = sine_perturbation(0.1)
    with pytest.raises(InvalidParameterError):
        glue_potentials(inner, outer, 2, 1)
    with pytest.raises(InvalidParameterError):
        glue_potentials(lambda z: -1.0, outer, 1, 2)


def test_gluing_threads_are_deterministic():
    a = glue_potentials(*sine_perturbation(0.5), 1, 2, disk_grid(9)).to_json()
    b = glue_potentials(*sine_perturbation(0.5), 1, 2, disk_grid(9), threads=4).to_json()
    assert a == b


# --------------------------------------------------------------------------
# balls and packings


def test_radius_and_volume():
    assert max_ball_radius(1, 4) == 0.5
    assert max_ball_radius(1, 1) == 1
    assert max_ball_radius(2, 5) == pytest.approx(0.6324555, abs=1e-7)
    assert ball_volume(1, 3) == 1
    assert ball_volume(0.5, 2) == 1 / 16
    assert ball_volume(0, 2) == 0
    with pytest.raises(InvalidParameterError):
        ball_volume(-1, 2)


@pytest.mark.parametrize("k", range(1, 9))
def test_packing_identity(k):
    b = seshadri_constant_general(k)
    rep = packing_report(k, b, 2)
    for g, e in ((rep.gamma_lower, b.lower), (rep.gamma_upper, b.upper)):
        assert g * g == pytest.approx(float(e), rel=1e-12)
    assert rep.total_ball_volume <= 1 + 1e-12 and rep.volume_consistent
    assert k * b.upper ** 2 <= 1


def test_packing_examples():
    rep = packing_report(1, seshadri_constant_general(1), 2)
    assert rep.gamma_upper == 1 and rep.total_ball_volume == 1
    rep = packing_report(5, seshadri_constant_general(5), 2)
    assert rep.gamma_upper == pytest.approx(math.sqrt(0.4), rel=1e-12)
    assert rep.total_ball_volume == pytest.approx(0.8, rel=1e-12)


def _bounds(k, lower, upper):
    return SeshadriBounds(k, Fraction(lower), Fraction(upper), SearchCertificate(1, 1),
                          CurveClass(1, (1,) * k), exact=False, conditional=True)


def test_quarter_gives_half():
    rep = packing_report(4, _bounds(4, Fraction(1, 4), Fraction(1, 2)), 2)
    assert rep.gamma_lower == 0.5


def test_volume_violation_is_reported():
    with pytest.raises(BoundInconsistencyError):
        packing_report(5, _bounds(5, Fraction(1, 2), Fraction(1, 2)), 2)
    # a loose upper bound is flagged, not rejected
    rep = packing_report(10, _bounds(10, Fraction(3, 10), Fraction(9, 28)), 2)
    assert not rep.volume_consistent
