from fractions import Fraction

import numpy as np
import pytest
import scipy.interpolate

from pwciga.bspline import (BasisSpec, basis_table, collocation_matrix, eval_nonzero,
                            eval_nonzero_deriv, find_span, greville, make_uniform_clamped, support)

from oracles import bspline_value, uniform_clamped_knots


def test_uniform_clamped_knots_and_count():
    s = make_uniform_clamped(0, 5, 5, 2)
    np.testing.assert_array_equal(s.knots, [0, 0, 0, 1, 2, 3, 4, 5, 5, 5])
    assert s.n == 7 and s.n_elems == 5

    s = make_uniform_clamped(0, 1, 1, 0)
    np.testing.assert_array_equal(s.knots, [0, 1])
    assert s.n == 1

    s = make_uniform_clamped(0, 5, 10, 2)
    np.testing.assert_allclose(s.knots, [0, 0, 0] + list(np.arange(1, 10) * 0.5) + [5, 5, 5])
    assert s.n == 12


@pytest.mark.parametrize("args", [(1, 0, 3, 2), (0, 1, 0, 2), (0, 1, 3, 6), (0, 1, 3, -1)])
def test_make_uniform_clamped_rejects(args):
    with pytest.raises(ValueError):
        make_uniform_clamped(*args)


@pytest.mark.parametrize("knots,p", [
    ([0, 0, 1, 1, 1], 2),           # left end not clamped
    ([0, 0, 0, 2, 1, 1, 1], 2),     # decreasing
    ([0, 0, 0, 0.5, 0.5, 1, 1, 1], 2),  # repeated interior knot
])
def test_basis_spec_validation(knots, p):
    with pytest.raises(ValueError):
        BasisSpec(np.array(knots, dtype=float), p)


def test_knot_text_round_trip():
    s = make_uniform_clamped(-1.0, 2.5, 7, 3)
    assert BasisSpec.from_text(s.to_text()) == s
    assert s.to_text().split()[0] == "3"


def test_endpoint_interpolation():
    s = make_uniform_clamped(0, 5, 5, 2)
    first, vals = eval_nonzero(s, 0.0)
    assert first == 0
    np.testing.assert_array_equal(vals, [1, 0, 0])
    first, vals = eval_nonzero(s, 5.0)
    assert first == s.n - 3
    np.testing.assert_array_equal(vals, [0, 0, 1])


def test_frozen_values_quadratic():
    first, vals = eval_nonzero(make_uniform_clamped(0, 1, 4, 2), 0.375)
    assert first == 1
    np.testing.assert_allclose(vals, [1 / 8, 3 / 4, 1 / 8], atol=1e-14)


def test_frozen_values_cubic():
    first, vals = eval_nonzero(make_uniform_clamped(0, 5, 5, 3), 7 / 3)
    assert first == 2
    np.testing.assert_allclose(vals, [4 / 81, 31 / 54, 10 / 27, 1 / 162], atol=1e-14)


@pytest.mark.parametrize("p", range(6))
def test_values_match_knot_insertion_oracle(p):
    n = 5
    s = make_uniform_clamped(0, 1, n, p)
    knots = uniform_clamped_knots(0, 1, n, p, exact=True)
    for x in [Fraction(1, 7), Fraction(3, 8), Fraction(5, 9), Fraction(19, 20)]:
        first, vals = eval_nonzero(s, float(x))
        for j, v in enumerate(vals):
            assert abs(v - float(bspline_value(knots, p, first + j, x))) < 1e-12


@pytest.mark.parametrize("p", range(6))
def test_derivatives_match_scipy(p):
    s = make_uniform_clamped(0, 2, 6, p)
    x = np.linspace(0.013, 1.987, 41)
    for order in range(p + 1):
        ours = collocation_matrix(s, x, order)
        for i in range(s.n):
            c = np.zeros(s.n)
            c[i] = 1
            ref = scipy.interpolate.BSpline(s.knots, c, p)(x, nu=order)
            np.testing.assert_allclose(ours[:, i], ref, atol=1e-9 * max(1, np.abs(ref).max()))


def test_derivative_examples():
    s = make_uniform_clamped(0, 5, 5, 2)
    assert abs(eval_nonzero_deriv(s, 2.5, 1)[1].sum()) < 1e-12
    f0, v0 = eval_nonzero_deriv(s, 2.5, 0)
    f1, v1 = eval_nonzero(s, 2.5)
    assert f0 == f1 and np.array_equal(v0, v1)

    s = make_uniform_clamped(0, 1, 4, 2)
    h = 1e-6
    first, d = eval_nonzero_deriv(s, 0.3, 1)
    _, vp = eval_nonzero(s, 0.3 + h)
    _, vm = eval_nonzero(s, 0.3 - h)
    np.testing.assert_allclose(d, (vp - vm) / (2 * h), atol=1e-6)

    with pytest.raises(ValueError):
        eval_nonzero_deriv(s, 0.3, 3)


def test_out_of_domain():
    s = make_uniform_clamped(0, 1, 4, 2)
    with pytest.raises(ValueError):
        eval_nonzero(s, 1.5)
    with pytest.raises(ValueError):
        find_span(s, -0.1)


def test_supports():
    s = make_uniform_clamped(0, 5, 5, 2)
    assert support(s, 0) == (0, 1)
    assert support(s, 1) == (0, 2)
    assert support(s, 3) == (1, 4)
    # standard supports, not [2,4] / [3,4]
    assert support(s, 4) == (2, 5)
    assert support(s, 5) == (3, 5)
    assert support(s, 6) == (4, 5)
    with pytest.raises(IndexError):
        support(s, 7)


@pytest.mark.parametrize("p", range(1, 6))
def test_partition_of_unity_and_nonnegativity(p):
    s = make_uniform_clamped(-1, 3, 9, p)
    x = np.random.default_rng(p).uniform(-1, 3, 10_000)
    _, vals = basis_table(s, x)
    assert np.abs(vals[:, 0, :].sum(axis=1) - 1).max() <= 1e-12
    assert vals.min() >= -1e-15


@pytest.mark.parametrize("p", range(1, 6))
def test_first_derivatives_sum_to_zero(p):
    s = make_uniform_clamped(0, 1, 7, p)
    x = np.random.default_rng(10 + p).uniform(0, 1, 2000)
    _, vals = basis_table(s, x, 1)
    assert np.abs(vals[:, 1, :].sum(axis=1)).max() <= 1e-11


def test_local_support_consistent_with_support():
    s = make_uniform_clamped(0, 1, 6, 3)
    for x in np.random.default_rng(3).uniform(0, 1, 300):
        first, vals = eval_nonzero(s, x)
        for j, v in enumerate(vals):
            lo, hi = support(s, first + j)
            if v != 0:
                assert lo <= x <= hi


@pytest.mark.parametrize("p", [2, 3, 4])
def test_c1_continuity_at_interior_knots(p):
    s = make_uniform_clamped(0, 1, 5, p)
    eps = 1e-9
    for knot in s.breaks[1:-1]:
        left = collocation_matrix(s, [knot - eps], 1)[0]
        right = collocation_matrix(s, [knot + eps], 1)[0]
        np.testing.assert_allclose(left, right, atol=1e-6)
        left0 = collocation_matrix(s, [knot - eps])[0]
        right0 = collocation_matrix(s, [knot + eps])[0]
        np.testing.assert_allclose(left0, right0, atol=1e-8)


def test_basis_table_pads_orders_above_degree():
    s = make_uniform_clamped(0, 1, 3, 1)
    _, vals = basis_table(s, [0.2, 0.7], nder=2)
    assert vals.shape == (2, 3, 2)
    assert np.all(vals[:, 2, :] == 0)


def test_greville_reproduces_linear_functions():
    s = make_uniform_clamped(0, 2, 5, 3)
    x = np.linspace(0, 2, 17)
    np.testing.assert_allclose(collocation_matrix(s, x) @ greville(s), x, atol=1e-13)
