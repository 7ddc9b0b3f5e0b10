import itertools
from fractions import Fraction

import numpy as np
import pytest

from modules.polycore import (
    EXACT,
    FLOAT,
    DegreeOverflowError,
    DimensionMismatchError,
    GaussianRational,
    NonDivisibleError,
    PolyMap,
    SparsePoly,
    eval_grid,
    poly_add,
    poly_compose,
    poly_derivative,
    poly_divide_exact,
    poly_embed,
    poly_eval,
    poly_mul,
    poly_pow,
    poly_recenter,
    poly_scale,
)


def z(i, n=2):
    return SparsePoly.variable(i, n)


def test_gaussian_rational_arithmetic():
    """Exact complex arithmetic with rational parts"""
    a = GaussianRational(Fraction(1, 2), Fraction(1, 3))
    b = GaussianRational(2, -1)
    assert a + b == GaussianRational(Fraction(5, 2), Fraction(-2, 3))
    assert a * b == GaussianRational(Fraction(4, 3), Fraction(1, 6))
    assert (a / b) * b == a
    assert b ** -2 * b ** 2 == GaussianRational(1)
    assert GaussianRational.coerce(0.25) == GaussianRational(Fraction(1, 4))
    assert complex(GaussianRational(1, 2)) == 1 + 2j
    with pytest.raises(ZeroDivisionError):
        a / GaussianRational(0)


def test_terms_are_canonical():
    """Zero coefficients vanish and terms sort in grlex order"""
    p = SparsePoly.from_terms(2, {(0, 2): 1, (1, 0): 3, (0, 0): 0, (2, 0): 5})
    assert [e for e, _ in p.terms] == [(1, 0), (0, 2), (2, 0)]
    assert p.degree() == 2
    assert SparsePoly.zero(2).degree() == -1
    q = SparsePoly.from_terms(2, {(2, 0): 5, (1, 0): 3, (0, 2): 1})
    assert p == q
    assert hash(p) == hash(q)


def test_anchors_do_not_affect_equality():
    p = z(0) ** 2
    assert p.with_anchors([(1, 1)]) == p


def test_add_mul_pow():
    x, y = z(0), z(1)
    p = (x + y) ** 2
    assert p == x * x + 2 * x * y + y * y
    assert (x - y) * (x + y) == x ** 2 - y ** 2
    assert poly_pow(x + 1, 0) == SparsePoly.one(2)


def test_mixed_modes_promote_to_float():
    x = z(0)
    p = x + 0.5
    assert p.mode == FLOAT
    assert (x + Fraction(1, 2)).mode == EXACT


def test_degree_cap():
    x = z(0)
    with pytest.raises(DegreeOverflowError):
        poly_pow(x, 10, degree_cap=5)


def test_dimension_mismatch():
    with pytest.raises(DimensionMismatchError):
        SparsePoly.variable(0, 1) + SparsePoly.variable(0, 2)
    with pytest.raises(DimensionMismatchError):
        poly_eval(z(0), [1])


def test_compose_and_eval():
    """p(x + y, x*y) evaluated directly and after substitution agree exactly"""
    x, y = z(0), z(1)
    p = x ** 2 - 3 * y + 1
    q = poly_compose(p, [x + y, x * y])
    assert q == (x + y) ** 2 - 3 * x * y + 1
    point = [Fraction(1, 2), GaussianRational(0, 1)]
    direct = poly_eval(p, [poly_eval(x + y, point), poly_eval(x * y, point)])
    assert poly_eval(q, point) == direct


def test_embed_and_derivative():
    t = SparsePoly.variable(0, 1)
    p = poly_embed(t ** 3 + t, 3, [2])
    assert p == SparsePoly.variable(2, 3) ** 3 + SparsePoly.variable(2, 3)
    assert poly_derivative(p, 2) == 3 * SparsePoly.variable(2, 3) ** 2 + 1
    assert poly_derivative(p, 0).is_zero()


def test_divide_exact():
    x, y = z(0), z(1)
    num = (x ** 2 + x * y + 1) * (x - y)
    assert poly_divide_exact(num, x - y) == x ** 2 + x * y + 1
    with pytest.raises(NonDivisibleError):
        poly_divide_exact(x ** 2 + 1, x)


def test_scale_exact_and_float():
    x = z(0)
    assert poly_scale(x, Fraction(1, 3)).mode == EXACT
    assert poly_scale(x, 0.5).mode == FLOAT
    assert poly_scale(x, 0).is_zero()


def test_recenter():
    """p(c + u) expands exactly"""
    t = SparsePoly.variable(0, 1)
    p = t ** 2
    assert poly_recenter(p, [2]) == t ** 2 + 4 * t + 4


def test_eval_grid_matches_exact_eval():
    x, y = z(0), z(1)
    p = x ** 3 - Fraction(1, 2) * x * y + 2
    pts = np.array([[0.5, 0.25j], [1 + 1j, -2.0]])
    expected = [complex(poly_eval(p, list(row))) for row in pts]
    assert np.allclose(eval_grid(p, pts), expected)


def test_eval_grid_through_anchor():
    """High-degree polynomial far from the origin is evaluated through its anchor"""
    t = SparsePoly.variable(0, 1)
    p = ((t - 10) ** 20).with_anchors([(10,)])
    values = eval_grid(p, np.array([[10.5], [9.5]]))
    assert np.allclose(values, [0.5 ** 20, 0.5 ** 20], rtol=1e-12)


def test_json_roundtrip_keeps_exactness():
    p = SparsePoly.from_terms(2, {(1, 1): GaussianRational(Fraction(1, 3), -2), (0, 0): 7})
    assert SparsePoly.from_json(p.to_json()) == p


def test_polymap_compose():
    """(x, y) -> (y, x + y^2) composed with its inverse is the identity"""
    x, y = z(0), z(1)
    F = PolyMap(2, (y, x + y ** 2))
    G = PolyMap(2, (y - x ** 2, x))
    assert F.compose(G) == PolyMap.identity(2)
    assert G.compose(F) == PolyMap.identity(2)


def test_add_and_mul_directly():
    """(z1 + 1)(z1 - 1) = z1^2 - 1; p + (-p) cancels to zero"""
    x = z(0)
    prod = poly_mul(poly_add(x, SparsePoly.one(2)), poly_add(x, SparsePoly.constant(-1, 2)))
    assert prod == SparsePoly.from_terms(2, {(2, 0): 1, (0, 0): -1})
    assert poly_add(prod, -prod).is_zero()
    assert poly_mul(prod, SparsePoly.zero(2)).is_zero()


def test_add_and_mul_reject_mismatched_variables():
    with pytest.raises(DimensionMismatchError):
        poly_add(z(0, 2), z(0, 3))
    with pytest.raises(DimensionMismatchError):
        poly_mul(z(0, 2), z(0, 3))


def test_mul_degree_cap():
    x = z(0)
    with pytest.raises(DegreeOverflowError):
        poly_mul(x ** 3, x ** 3, degree_cap=5)
    assert poly_mul(x ** 3, x ** 2, degree_cap=5).degree() == 5


def random_poly(rng, n=2, degree=3):
    mapping = {}
    for exp in itertools.product(range(degree + 1), repeat=n):
        if sum(exp) <= degree and rng.random() < 0.6:
            re = Fraction(int(rng.integers(-4, 5)), int(rng.integers(1, 4)))
            mapping[exp] = GaussianRational(re, int(rng.integers(-2, 3)))
    return SparsePoly.from_terms(n, mapping, EXACT)


@pytest.mark.parametrize("seed", range(5))
def test_ring_axioms_on_random_triples(seed):
    rng = np.random.default_rng(seed)
    p, q, r = (random_poly(rng) for _ in range(3))
    zero, one = SparsePoly.zero(2), SparsePoly.one(2)
    assert p + q == q + p
    assert (p + q) + r == p + (q + r)
    assert p * q == q * p
    assert (p * q) * r == p * (q * r)
    assert p * (q + r) == p * q + p * r
    assert p + zero == p
    assert p * one == p
    assert (p - p).is_zero()


@pytest.mark.parametrize("seed", range(3))
def test_compose_is_associative(seed):
    rng = np.random.default_rng(100 + seed)
    F, G, H = (PolyMap(2, (random_poly(rng, degree=2), random_poly(rng, degree=2))) for _ in range(3))
    assert F.compose(G).compose(H) == F.compose(G.compose(H))
    point = [GaussianRational(1, 2), GaussianRational(Fraction(-1, 3))]
    assert F(*G(*H(*point))) == F.compose(G.compose(H))(*point)
