"""Quadrature audits against the exact simplex monomial integral.

Oracle: on the reference d-simplex {x_i >= 0, sum x_i <= 1},

    integral of x1^a1 * ... * xd^ad  =  a1! * ... * ad! / (a1+...+ad+d)!
"""

import itertools
import math

import numpy as np
import pytest

from sgfem import quadrature


def exact_monomial_integral(alpha):
    d = len(alpha)
    num = 1
    for a in alpha:
        num *= math.factorial(a)
    return num / math.factorial(sum(alpha) + d)


def monomial_values(rule, alpha):
    # cartesian coordinates of the reference simplex: drop lambda_0
    x = rule.points[:, 1:]
    vals = np.ones(rule.npoints)
    for i, a in enumerate(alpha):
        vals *= x[:, i] ** a
    return vals


def all_monomials(dim, degree):
    for total in range(degree + 1):
        for alpha in itertools.product(range(total + 1), repeat=dim):
            if sum(alpha) == total:
                yield alpha


@pytest.mark.parametrize("dim", [1, 2, 3])
@pytest.mark.parametrize("degree", range(1, 11))
def test_monomial_exactness(dim, degree):
    q = quadrature.rule(dim, degree)
    assert q.degree >= degree
    for alpha in all_monomials(dim, q.degree):
        got = q.weights @ monomial_values(q, alpha)
        exact = exact_monomial_integral(alpha)
        assert got == pytest.approx(exact, rel=1e-12), f"monomial {alpha}"


@pytest.mark.parametrize("dim", [1, 2, 3])
@pytest.mark.parametrize("degree", range(1, 11))
def test_weights_positive_and_sum_to_reference_measure(dim, degree):
    q = quadrature.rule(dim, degree)
    assert np.all(q.weights > 0)
    assert q.weights.sum() == pytest.approx(1 / math.factorial(dim), rel=1e-13)
    assert np.all(q.points >= -1e-14)
    assert np.allclose(q.points.sum(axis=1), 1.0, atol=1e-13)


def test_degree6_triangle_integrates_x3y3():
    # closed form: 3!3!/(6+2)! = 36/40320
    q = quadrature.rule(2, 6)
    got = q.weights @ monomial_values(q, (3, 3))
    assert got == pytest.approx(36 / math.factorial(8), rel=1e-12)


def test_degree8_tet_all_monomials():
    q = quadrature.rule(3, 8)
    for alpha in all_monomials(3, 8):
        got = q.weights @ monomial_values(q, alpha)
        assert got == pytest.approx(exact_monomial_integral(alpha), rel=1e-12)


def test_centroid_rule_integrates_linear():
    q = quadrature.rule(2, 1)
    got = q.weights @ (monomial_values(q, (1, 0)) + monomial_values(q, (0, 1)))
    assert got == pytest.approx(1 / 6 + 1 / 6, rel=1e-14)


def test_invalid_degrees_rejected():
    with pytest.raises(ValueError):
        quadrature.rule(2, 11)
    with pytest.raises(ValueError):
        quadrature.rule(3, 0)
    with pytest.raises(ValueError):
        quadrature.rule(4, 2)


def test_physical_mapping_scales_to_cell_volume():
    q = quadrature.rule(2, 4)
    verts = np.array([[0.0, 0.0], [2.0, 0.0], [0.0, 3.0]])
    w = q.physical_weights(3.0)  # area of the triangle above
    assert w.sum() == pytest.approx(3.0, rel=1e-13)
    pts = q.physical_points(verts)
    assert pts.shape == (q.npoints, 2)
    # integrate f(x, y) = x over the triangle: exact 2*3/2 * (2/3)/... use oracle
    # affine map: x = 2*lambda_1, integral = 2 * |K| * centroid coordinate = 2*3*(1/3)
    got = w @ pts[:, 0]
    assert got == pytest.approx(2.0, rel=1e-12)
