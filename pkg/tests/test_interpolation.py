from fractions import Fraction
from math import comb

import pytest
from hypothesis import given, settings, strategies as st

from seshadri_lab import linalg
from seshadri_lab.errors import (
    InvalidConfigurationError,
    InvalidParameterError,
    SurjectivityRequiredError,
)
from seshadri_lab.interpolation import (
    Deficient,
    PointConfiguration,
    Surjective,
    basis_split,
    conditions_matrix,
    evaluation_surjective,
    h0_linear_system,
    jet_monomials,
    linear_system,
    monomial_basis,
    random_configuration,
    select_subbasis_for_blowup,
    taylor_expansion,
    vanishing_order,
)
from oracles import general_h0, sympy_rank, sympy_taylor


def test_monomial_basis_sizes():
    assert len(monomial_basis(2, 1)) == 3
    assert len(monomial_basis(2, 3)) == 10
    assert len(monomial_basis(3, 2)) == 10
    assert monomial_basis(2, 2) == ((2, 0, 0), (1, 1, 0), (1, 0, 1), (0, 2, 0), (0, 1, 1), (0, 0, 2))


def test_jet_monomials_order():
    assert jet_monomials(2, 1) == ((0, 0), (1, 0), (0, 1))


def test_configuration_validation():
    with pytest.raises(InvalidConfigurationError):
        PointConfiguration(2, [(1, 2, 3), (2, 4, 6)])
    with pytest.raises(InvalidConfigurationError):
        PointConfiguration(2, [(0, 0, 0)])
    with pytest.raises(InvalidConfigurationError):
        PointConfiguration(2, [(1, 2)])


def test_random_configuration_is_seeded():
    assert random_configuration(4, 2, 3) == random_configuration(4, 2, 3)
    assert random_configuration(4, 2, 3) != random_configuration(4, 2, 4)


def test_chart_choice():
    P = PointConfiguration(2, [(3, -5, 5), (0, 0, 1)])
    assert P.chart(0) == 1
    assert P.chart(1) == 2


# --------------------------------------------------------------------------
# conditions and kernels


def test_conditions_matrix_examples():
    pts = random_configuration(5, 2, 0)
    A = conditions_matrix(pts, 2, [1] * 5)
    assert (len(A), len(A[0])) == (5, 6)
    assert linalg.rank(A) == sympy_rank(A, 6) == 5
    one = random_configuration(1, 2, 0)
    A = conditions_matrix(one, 1, [2])
    assert (len(A), len(A[0])) == (3, 3) and linalg.rank(A) == 3
    A = conditions_matrix(one, 0, [1])
    assert A == [[1]]


def test_h0_examples():
    assert h0_linear_system(random_configuration(5, 2, 0), 2, [1] * 5) == 1
    assert h0_linear_system(random_configuration(2, 2, 0), 3, [1, 1]) == 8
    assert h0_linear_system(random_configuration(0, 2, 0), 1, []) == 3


def test_bad_requirements():
    pts = random_configuration(2, 2, 0)
    with pytest.raises(InvalidParameterError):
        conditions_matrix(pts, 2, [1])
    with pytest.raises(InvalidParameterError):
        conditions_matrix(pts, 2, [1, -1])
    with pytest.raises(InvalidParameterError):
        conditions_matrix(pts, -1, [1, 1])


def test_linear_system_shape():
    pts = random_configuration(3, 2, 5)
    ls = linear_system(pts, 4, [2, 1, 3])
    assert ls.ncols == 15
    assert len(ls.matrix) == sum(comb(m - 1 + 2, 2) for m in (2, 1, 3))
    assert ls.h0 == ls.ncols - ls.rank
    for f in ls.kernel_basis:
        assert all(vanishing_order(pts, i, f, 4) >= m for i, m in enumerate((2, 1, 3)))


@settings(max_examples=25)
@given(st.integers(0, 10 ** 6), st.integers(0, 5), st.integers(1, 3))
def test_taylor_matches_symbolic_expansion(seed, d, order):
    pts = random_configuration(1, 2, seed)
    form = [Fraction((seed * 7 + 3 * j) % 11 - 5, 1 + j % 3) for j in range(comb(d + 2, 2))]
    ours = taylor_expansion(pts, 0, form, d, order)
    ref = sympy_taylor(pts.points[0], pts.chart(0), form, monomial_basis(2, d), order)
    assert ours == ref


@settings(max_examples=40)
@given(st.integers(0, 6), st.data())
def test_h0_at_general_points_matches_curve_oracle(k, data):
    ms = [data.draw(st.integers(1, 3)) for _ in range(k)]
    d = data.draw(st.integers(0, 10))
    pts = random_configuration(k, 2, data.draw(st.integers(0, 1000)))
    h0 = h0_linear_system(pts, d, ms)
    expected = max(0, comb(d + 2, 2) - sum(comb(m + 1, 2) for m in ms))
    assert h0 >= expected
    assert h0 == general_h0(d, ms)


def test_special_system_detected():
    # the double conic through five double points: expected 0, actual 1
    pts = random_configuration(5, 2, 2)
    assert h0_linear_system(pts, 4, [2] * 5) == general_h0(4, [2] * 5) == 1


# --------------------------------------------------------------------------
# evaluation map


def test_surjectivity_examples():
    assert evaluation_surjective(random_configuration(1, 2, 0), 1, [1]) == Surjective(3)
    v = evaluation_surjective(random_configuration(2, 2, 0), 1, [1, 1])
    assert isinstance(v, Deficient) and v.corank == 3
    assert isinstance(evaluation_surjective(random_configuration(2, 2, 0), 4, [1, 1]), Surjective)


@settings(max_examples=15)
@given(st.integers(1, 4), st.integers(0, 500), st.data())
def test_surjectivity_is_monotone(k, seed, data):
    ms = [data.draw(st.integers(0, 2)) for _ in range(k)]
    pts = random_configuration(k, 2, seed)
    verdicts = [isinstance(evaluation_surjective(pts, d, ms), Surjective) for d in range(9)]
    first = verdicts.index(True)
    assert all(verdicts[first:])


# --------------------------------------------------------------------------
# basis split


def test_split_examples():
    s = basis_split(random_configuration(1, 2, 0), 3, [1])
    assert (len(s.B0), len(s.B[0]), len(s.Btilde[0])) == (7, 3, 2)
    assert len(select_subbasis_for_blowup(s, 1)) == 9
    s = basis_split(random_configuration(1, 2, 0), 2, [2])
    assert (len(s.B0), len(s.B[0]), len(s.Btilde[0])) == (0, 6, 3)
    assert len(select_subbasis_for_blowup(s, 1)) == 3
    s = basis_split(random_configuration(0, 2, 0), 2, [])
    assert s.B0 == linalg.nullspace([], 6)
    assert len(select_subbasis_for_blowup(s, 0)) == 6


def test_split_requires_surjectivity():
    with pytest.raises(SurjectivityRequiredError):
        basis_split(random_configuration(2, 2, 0), 1, [1, 1])


def test_select_subbasis_out_of_range():
    s = basis_split(random_configuration(1, 2, 0), 3, [1])
    with pytest.raises(IndexError):
        select_subbasis_for_blowup(s, 2)


@st.composite
def split_cases(draw):
    k = draw(st.integers(1, 3))
    ms = [draw(st.integers(0, 2)) for _ in range(k)]
    d = draw(st.integers(sum(ms) + 1, sum(ms) + 3))
    return random_configuration(k, 2, draw(st.integers(0, 10 ** 6))), d, ms


@settings(max_examples=20)
@given(split_cases())
def test_split_invariants(case):
    pts, d, ms = case
    s = basis_split(pts, d, ms)
    N = comb(d + 2, 2)
    members = s.all_members()
    assert len(members) == N
    assert linalg.rank(members, N) == N
    for i, m in enumerate(ms):
        assert len(s.B[i]) == comb(m + 2, 2)
        assert len(s.Btilde[i]) == m + 1
        for f, beta in zip(s.B[i], s.jet_labels[i]):
            jet = taylor_expansion(pts, i, f, d, m)
            assert jet == {beta: 1}
            for j, mj in enumerate(ms):
                if j != i:
                    assert not taylor_expansion(pts, j, f, d, mj)
    for f in s.B0:
        assert all(vanishing_order(pts, i, f, d) is None or vanishing_order(pts, i, f, d) > m
                   for i, m in enumerate(ms))
    for i in range(len(ms) + 1):
        sub = select_subbasis_for_blowup(s, i)
        reqs = list(ms[:i]) + [0] * (len(ms) - i)
        assert len(sub) == h0_linear_system(pts, d, reqs)
        assert linalg.rank(sub, N) == len(sub)
