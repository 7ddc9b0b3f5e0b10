from fractions import Fraction

import numpy as np
import pytest

from modules.expsum import ExpSum, SemiSymbolicMap
from modules.polycore import PolyMap, SparsePoly
from modules.regions import Polydisc
from modules.shearcalc import (
    AUDIT_EXPECTED,
    AutWord,
    EmptyWordError,
    OvershearGen,
    ShearError,
    compose,
    cyclic_as_F_shift,
    degree_growth_report,
    enumerate_reduced_words,
    expected_verdict,
    identity_suite,
    invert,
    is_identity_map,
    jacobian_det,
    lemma_audit,
    lipschitz_estimate,
    make_cyclic_I,
    make_F,
    random_rational_poly,
    reduce_word,
    reduced_word_count,
    sign_n,
    verify_identity,
    word_margin,
)

POINTS = np.array([[0.3 + 0.1j, -0.5j], [1.0, 2.0 - 1.0j]])


def quadratic(n):
    return SparsePoly.variable(n - 2, n - 1) ** 2


def test_sign_of_cyclic_map():
    assert sign_n(2) == -1
    assert sign_n(3) == 1


def test_cyclic_map_n2_numerically():
    """I(z1, z2) = (z2, -z1)"""
    I = make_cyclic_I(2)
    out = I.apply(POINTS)
    assert np.allclose(out[:, 0], POINTS[:, 1])
    assert np.allclose(out[:, 1], -POINTS[:, 0])
    assert np.allclose(I.apply_inverse(out), POINTS)


def test_make_F_components():
    """n = 2: F_{0,z2^2}(z) = (z2, -z1 + z2^2); n = 3 picks up +z1 and the 2 z3 correction"""
    F2 = make_F(2, None, quadratic(2))
    out = F2.apply(POINTS)
    assert np.allclose(out[:, 0], POINTS[:, 1])
    assert np.allclose(out[:, 1], -POINTS[:, 0] + POINTS[:, 1] ** 2)

    F3 = make_F(3, None, SparsePoly.zero(2))
    pts = np.array([[1.0, 2.0, 3.0]])
    assert np.allclose(F3.apply(pts), [[2.0, 3.0, 1.0 + 6.0]])


def test_F_with_cyclic_shift_is_I():
    for n in (2, 3, 4, 5):
        assert make_F(n, None, cyclic_as_F_shift(n)).to_map() == make_cyclic_I(n).to_map()
    assert cyclic_as_F_shift(2).is_zero()


def test_symbolic_and_numeric_agree():
    F = make_F(3, None, SparsePoly.variable(0, 2) * SparsePoly.variable(1, 2))
    pts = np.array([[0.1, 0.2j, -0.3], [1.0 + 1.0j, 0.5, 0.25]])
    assert np.allclose(F.to_map().evaluate(pts), F.apply(pts))
    assert np.allclose(F.apply_inverse(F.apply(pts)), pts)


def test_overshear_inverse_and_jacobian():
    """(z1, exp(z1) z2): exact inverse, Jacobian exp(z1), not a shear"""
    f = SparsePoly.variable(0, 1)
    G = OvershearGen(2, f, SparsePoly.zero(1))
    assert not G.is_shear
    assert is_identity_map(compose(G, G.inverse_map()))
    z1 = ExpSum.variable(0, 2)
    assert (jacobian_det(G) - z1.exp()).is_zero()


def test_generator_validation():
    with pytest.raises(ShearError):
        make_F(1)
    with pytest.raises(ShearError):
        make_F(3, None, SparsePoly.variable(0, 1))
    with pytest.raises(ShearError):
        OvershearGen(2, SparsePoly.zero(1), SparsePoly.zero(1), A=((2, 0), (0, 1)))


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_identity_suite(n):
    """I^{2n} = id, I^n = -(-1)^n id, I^-1 = I^{2n-1}, unit Jacobians, all exact"""
    certs = identity_suite(n, seed=0)
    assert certs
    for cert in certs:
        assert cert.verdict == expected_verdict(cert), cert.label
    for cert in certs:
        assert cert.method == "symbolic", cert.label


def test_lemma_audit_flags_printed_order():
    """A^-1 B A is not t (with a concrete point) while A^-1 B^-1 A^-1 = t exactly"""
    printed, decomposed = lemma_audit()
    assert printed.verdict is False
    assert printed.counterexample is not None
    assert printed.lhs_value != printed.rhs_value
    assert decomposed.verdict is True
    assert decomposed.method == "symbolic"
    assert set(AUDIT_EXPECTED) == {printed.label, decomposed.label}


def test_verify_identity_sampled_tolerance():
    """A tiny non-polynomial perturbation is accepted only within the tolerance"""
    K = Polydisc.unit(2)
    z = [ExpSum.variable(i, 2) for i in range(2)]
    wobble = ExpSum.constant(Fraction(1, 10**12), 2) * z[1].exp()
    nudged = SemiSymbolicMap(2, (z[0] + wobble, z[1]))
    loose = verify_identity(nudged, SemiSymbolicMap.identity(2), K, tol=1e-9)
    assert loose.verdict and loose.method == "sampled"
    strict = verify_identity(nudged, SemiSymbolicMap.identity(2), K, tol=0.0)
    assert not strict.verdict
    assert strict.counterexample is not None


def test_unequal_polynomial_maps_fail_whatever_the_tolerance():
    """rhs differs from id by 1e-12 z1 z2 (z1 - 1), which vanishes at e_1, e_2 and (1, 1)"""
    K = Polydisc.unit(2)
    z1, z2 = SparsePoly.variable(0, 2), SparsePoly.variable(1, 2)
    bump = z1 * z2 * (z1 - SparsePoly.one(2)) * SparsePoly.constant(Fraction(1, 10**12), 2)
    rhs = PolyMap(2, (z1 + bump, z2))
    cert = verify_identity(SemiSymbolicMap.identity(2), rhs, K, tol=1e-9)
    assert cert.verdict is False
    assert cert.method == "symbolic"
    x, y = [complex(*v) for v in cert.counterexample]
    assert x * y * (x - 1) != 0
    assert cert.lhs_value != cert.rhs_value


def test_word_reduction():
    F = make_F(2, None, quadratic(2))
    I = make_cyclic_I(2)
    alphabet = (("F", F), ("I", I))
    w = AutWord(alphabet, (("F", 1), ("F", -1), ("I", 2), ("I", 1)))
    assert reduce_word(w).letters == (("I", 3),)
    assert reduce_word(w.with_letters((("F", 2), ("F", -2)))).is_empty()
    assert w.inverse().letters == (("I", -1), ("I", -2), ("F", 1), ("F", -1))
    with pytest.raises(ShearError):
        AutWord(alphabet, (("G", 1),))


def test_word_map_matches_evaluation():
    F = make_F(2, None, quadratic(2))
    I = make_cyclic_I(2)
    w = AutWord((("F", F), ("I", I)), (("F", 1), ("I", -1), ("F", 2)))
    assert np.allclose(w.to_map().evaluate(POINTS), w.evaluate(POINTS))
    assert (jacobian_det(w) - ExpSum.constant(1, 2)).is_zero()


def test_reduced_word_enumeration_count():
    """Rank 2, length <= 4: 4 + 12 + 36 + 108 = 160 words"""
    alphabet = (("F", make_F(2, None, quadratic(2))), ("I", make_cyclic_I(2)))
    words = enumerate_reduced_words(alphabet, 4)
    assert len(words) == 160
    assert sum(reduced_word_count(2, k) for k in range(1, 5)) == 160
    assert len({w.letters for w in words}) == 160
    assert all(w.length() <= 4 and not w.is_empty() for w in words)


def test_word_margin():
    K = Polydisc.unit(2)
    I = make_cyclic_I(2)
    alphabet = (("I", I),)
    # I^2 = -id moves the grid point (1, 1) by 2*sqrt(2)
    assert np.isclose(word_margin(AutWord(alphabet, (("I", 2),)), K), 2 * np.sqrt(2))
    with pytest.raises(EmptyWordError):
        word_margin(AutWord(alphabet, (("I", 4), ("I", -4))), K)


def test_lipschitz_estimate_of_linear_map():
    K = Polydisc.unit(2)
    assert np.isclose(lipschitz_estimate(lambda p: 2 * p, K), 2.0)


def test_degree_growth_of_shear_words():
    F = make_F(2, None, quadratic(2))
    alphabet = (("F", F),)
    rows = degree_growth_report([AutWord(alphabet, (("F", 1),)), AutWord(alphabet, (("F", 2),))])
    assert [r["degree"] for r in rows] == [2, 4]
    assert rows[1]["word"] == "F^2"
    overshear = OvershearGen(2, SparsePoly.variable(0, 1), SparsePoly.zero(1))
    with pytest.raises(ShearError):
        degree_growth_report([AutWord((("G", overshear),), (("G", 1),))])


def test_random_rational_poly_is_seeded():
    a = random_rational_poly(np.random.default_rng(3), 2, 3)
    b = random_rational_poly(np.random.default_rng(3), 2, 3)
    assert a == b
    assert a.degree() <= 3


def test_invert_is_two_sided():
    """F_{f,g} with exp(z2) in it: invert() undoes it from both sides, exactly"""
    F = make_F(3, SparsePoly.variable(0, 2), SparsePoly.variable(1, 2) ** 2)
    inv = invert(F)
    assert is_identity_map(compose(F, inv))
    assert is_identity_map(compose(inv, F))
    assert is_identity_map(compose(invert(make_cyclic_I(4)), make_cyclic_I(4)))
