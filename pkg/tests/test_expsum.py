import numpy as np

from modules.expsum import ExpSum, SemiSymbolicMap, as_expsum
from modules.polycore import SparsePoly


def test_exp_of_zero_is_one():
    assert ExpSum.zero(2).exp() == ExpSum.constant(1, 2)


def test_ring_operations_collect_terms():
    x = ExpSum.variable(0, 2)
    y = ExpSum.variable(1, 2)
    e = (x * y.exp()) - (y.exp() * x)
    assert e.is_zero()
    assert (x + y).is_polynomial()
    assert not (x * y.exp()).is_polynomial()


def test_exponents_cancel_in_products():
    """exp(y) * exp(-y) collapses back to a polynomial"""
    y = ExpSum.variable(1, 2)
    product = y.exp() * (-y).exp()
    assert product == ExpSum.constant(1, 2)
    assert product.as_poly() == SparsePoly.one(2)


def test_derivative_product_rule():
    """d/dx (x exp(x)) = (1 + x) exp(x)"""
    x = ExpSum.variable(0, 1)
    f = x * x.exp()
    assert f.derivative(0) - (x + 1) * x.exp() == ExpSum.zero(1)
    assert np.isclose(f.derivative(0).evaluate([0.5]), 1.5 * np.exp(0.5))


def test_substitute_polynomial_args():
    x = ExpSum.variable(0, 2)
    y = ExpSum.variable(1, 2)
    f = x * y.exp()
    g = f.substitute([y, x + y])
    assert g == y * (x + y).exp()


def test_grid_and_point_evaluation_agree():
    x = ExpSum.variable(0, 2)
    y = ExpSum.variable(1, 2)
    f = x * y.exp() + y ** 2
    pts = np.array([[0.3, -0.2j], [1.0 + 1.0j, 0.5]])
    expected = [f.evaluate(p) for p in pts]
    assert np.allclose(f.eval_grid(pts), expected)


def test_overshear_compose_with_inverse_is_identity():
    """(x e^y, y) composed with (x e^-y, y) is the identity, symbolically"""
    x = ExpSum.variable(0, 2)
    y = ExpSum.variable(1, 2)
    F = SemiSymbolicMap(2, (x * y.exp(), y))
    G = SemiSymbolicMap(2, (x * (-y).exp(), y))
    assert F.compose(G) == SemiSymbolicMap.identity(2)
    assert G.compose(F) == SemiSymbolicMap.identity(2)


def test_jacobian_determinant_of_overshear():
    x = ExpSum.variable(0, 2)
    y = ExpSum.variable(1, 2)
    F = SemiSymbolicMap(2, (x * y.exp(), y))
    assert F.jacobian_determinant() - y.exp() == ExpSum.zero(2)


def test_as_expsum():
    assert as_expsum(None, 2).is_zero()
    assert as_expsum(SparsePoly.variable(0, 2), 2) == ExpSum.variable(0, 2)
    assert as_expsum(3, 2) == ExpSum.constant(3, 2)
