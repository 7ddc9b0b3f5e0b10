import numpy as np
import pytest

from modules.polycore import SparsePoly
from modules.regions import Polydisc, RegionUnion
from modules.translations import (
    DanielewskiSurface,
    DiagonalTranslation,
    NonConvexRegionError,
    OffSurfaceError,
    TranslationError,
    check_invariance,
    danielewski_cocycle_check,
    danielewski_power_check,
    danielewski_translation,
    escape_index,
    factor_escape_curve,
    fiber_escape_curve,
    fiber_shift,
    modulus_intervals,
    orbit_distance_curve,
    product_translation,
    random_shift_pairs,
    separation_certificate,
    surface_escape_probe,
    surface_samples,
    zajac_check,
)


def z_squared_minus_one():
    return DanielewskiSurface(SparsePoly.univariate([-1, 0, 1]))


def test_escape_index_of_unit_polydisc():
    tau = DiagonalTranslation(2, 1.0)
    assert escape_index(tau, Polydisc.unit(2)) == 3
    assert escape_index(DiagonalTranslation(2, 0.5), Polydisc.unit(2)) == 5
    with pytest.raises(TranslationError):
        escape_index(DiagonalTranslation(3, 1.0), Polydisc.unit(2))


def test_translation_validation():
    with pytest.raises(TranslationError):
        DiagonalTranslation(2, -1.0)
    with pytest.raises(TranslationError):
        DiagonalTranslation(0, 1.0)


def test_translation_power_map_matches_numeric():
    tau = DiagonalTranslation(2, 1.0)
    pts = np.array([[0.5j, -1.0], [2.0, 1.0 + 1.0j]])
    assert np.allclose(tau.power_map(3).evaluate(pts), tau.apply_power(pts, 3))
    assert np.allclose(tau.apply_inverse(tau.apply(pts)), pts)


def test_zajac_threshold():
    """The unit bidisc touches its m = 2 image and is separated from the m = 3 one"""
    tau = DiagonalTranslation(2, 1.0)
    K = Polydisc.unit(2)
    touching = zajac_check(tau, K, 2)
    assert not touching.verdict
    assert not touching.disjoint
    apart = zajac_check(tau, K, 3)
    assert apart.verdict
    assert apart.separation.method == "coordinate"
    assert apart.separation.gap > 0


def test_separation_off_axis():
    """Discs whose real and imaginary shadows overlap still get a separating functional"""
    K1 = Polydisc((0j,), (2.0,))
    K2 = Polydisc((3 + 3j,), (2.0,))
    cert = separation_certificate(K1, K2)
    assert cert.verdict
    assert cert.method == "min-norm"
    assert cert.gap == pytest.approx(3 * np.sqrt(2) - 4, abs=1e-3)


def test_separation_fails_for_overlap():
    cert = separation_certificate(Polydisc((0j,), (1.0,)), Polydisc((1.0 + 0j,), (1.0,)))
    assert not cert.verdict


def test_separation_needs_convex_pieces():
    union = RegionUnion((Polydisc((0j,), (1.0,)), Polydisc((5 + 0j,), (1.0,))))
    with pytest.raises(NonConvexRegionError):
        separation_certificate(union, Polydisc((20 + 0j,), (1.0,)))


def test_orbit_distance_curve_grows_after_escape():
    tau = DiagonalTranslation(1, 1.0)
    samples = Polydisc.unit(1).boundary_samples(64)
    curve = orbit_distance_curve(tau.apply, samples, range(0, 7))
    assert curve.values()[0] == 0.0
    assert curve.is_strictly_increasing(start=3)
    assert curve.values()[3] == pytest.approx(1.0)
    with pytest.raises(TranslationError):
        orbit_distance_curve(tau.apply, samples, [-1, 0])


def test_danielewski_translation_formula():
    """p = z^2 - 1, a = 1: tau(x, y, z) = (x, y + 2z + x, z + x)"""
    S = z_squared_minus_one()
    tau = danielewski_translation(S, 1)
    assert [complex(v) for v in tau(1, 0, 1)] == [1, 3, 2]
    assert np.allclose(tau.apply(np.array([[1, 0, 1]])), [[1, 3, 2]])


def test_danielewski_invariance_and_cocycle():
    S = z_squared_minus_one()
    assert check_invariance(S, danielewski_translation(S, 2))
    verdict = danielewski_cocycle_check(S, 1, 2)
    assert verdict.verdict and verdict.literal
    assert danielewski_cocycle_check(S, 3, -3).verdict
    for a, b in random_shift_pairs(5, seed=1):
        assert danielewski_cocycle_check(S, a, b).verdict
    assert danielewski_power_check(S, 1, 3)


def test_danielewski_cubic():
    S = DanielewskiSurface(SparsePoly.univariate([0, -1, 0, 1]))
    tau = danielewski_translation(S, 2)
    assert check_invariance(S, tau)
    assert danielewski_power_check(S, 2, 2)


def test_danielewski_rejects_bad_input():
    with pytest.raises(TranslationError):
        DanielewskiSurface(SparsePoly.univariate([0, 0, 1]))
    with pytest.raises(TranslationError):
        DanielewskiSurface(SparsePoly.univariate([5]))
    S = z_squared_minus_one()
    with pytest.raises(TranslationError):
        danielewski_translation(S, 0)
    with pytest.raises(OffSurfaceError):
        S.check_points(np.array([[1, 1, 0]]))


def test_fiber_escape_is_linear_over_roots():
    """p = z^2 - 1, a = 1: on x = 0 the roots +-1 move by y -> y +- 2"""
    S = z_squared_minus_one()
    assert fiber_shift(S, 1, 1) == 2
    assert fiber_shift(S, 3, -1) == -6
    tau = danielewski_translation(S, 1)
    image = tau.apply(S.fiber_points(1, [0.0, 5.0]))
    assert np.allclose(image[:, 1], [2.0, 7.0])
    assert np.allclose(image[:, 2], 1.0)
    shifts, curve = fiber_escape_curve(S, 1, range(0, 6))
    assert sorted(abs(s["y_shift"]) for s in shifts) == pytest.approx([2.0, 2.0])
    assert curve.values() == pytest.approx([0, 2, 4, 6, 8, 10])


def test_surface_escape_grows_on_fifty_samples():
    S = z_squared_minus_one()
    curve = surface_escape_probe(S, 1, surface_samples(S, 50, seed=0), range(0, 11))
    assert curve.is_strictly_increasing(start=2)


def test_cocycle_on_random_square_free_polynomials():
    rng = np.random.default_rng(7)
    checked = 0
    while checked < 20:
        degree = int(rng.integers(1, 6))
        coeffs = [int(c) for c in rng.integers(-3, 4, degree + 1)]
        if coeffs[-1] == 0:
            continue
        try:
            S = DanielewskiSurface(SparsePoly.univariate(coeffs))
        except TranslationError:
            continue
        for a, b in random_shift_pairs(2, seed=checked):
            assert danielewski_cocycle_check(S, a, b).verdict, (coeffs, a, b)
        assert check_invariance(S, danielewski_translation(S, 2))
        checked += 1


def test_surface_samples_stay_on_surface():
    S = z_squared_minus_one()
    pts = surface_samples(S, 20, seed=4)
    assert pts.shape == (20, 3)
    assert np.all(S.residual(pts) < 1e-10)
    image = danielewski_translation(S, 1).apply(pts)
    assert np.all(S.residual(image) < 1e-8)
    curve = surface_escape_probe(S, 1, pts, [0, 1, 2])
    assert curve.values()[0] == 0.0


def test_product_translations():
    line = product_translation("CxY", 2)
    assert line.kind == "C×Y"
    assert np.allclose(line.apply(np.array([[1.0]])), [[3.0]])
    torus = product_translation("C*×C*×Y", 2)
    assert np.allclose(torus.apply(np.array([[1.0, 1.0]])), [[2.0, 0.5]])
    with pytest.raises(TranslationError):
        product_translation("C*×C*×Y", 1)
    with pytest.raises(TranslationError):
        product_translation("Y", 2)


def test_modulus_intervals():
    assert modulus_intervals(2, 0.5, 2.0, 1) == {"original": [0.5, 2.0], "moved": [1.0, 4.0], "disjoint": False}
    assert modulus_intervals(2, 0.5, 2.0, 3)["disjoint"]
    assert modulus_intervals(0.5, 0.5, 2.0, 3)["disjoint"]


def test_factor_escape_curve():
    pt = product_translation("CxY", 3)
    curve = factor_escape_curve(pt, Polydisc.unit(1).boundary_samples(32), range(0, 4))
    assert curve.is_strictly_increasing(start=1)
