import numpy as np
import pytest

from modules.regions import (
    GridSpec,
    PointHull,
    Polydisc,
    RegionError,
    RegionUnion,
    as_complex,
    bounding_polydisc,
    region_from_json,
)


def test_grid_is_deterministic_and_covers_the_disc():
    """73 points per complex coordinate: the centre plus 8 rings of 9 angles"""
    spec = GridSpec()
    K = Polydisc.unit(1)
    pts = K.grid(spec)
    assert pts.shape == (73, 1)
    assert np.array_equal(pts, K.grid(spec))
    assert np.isclose(np.abs(pts).max(), 1.0)
    assert Polydisc.unit(2).grid(spec).shape == (73 * 73, 2)


def test_grid_spec_validation():
    with pytest.raises(RegionError):
        GridSpec(1)


def test_polydisc_containment_is_strict():
    big = Polydisc((0j,), (3.0,))
    assert big.contains_region(Polydisc((1 + 0j,), (1.0,)))
    assert not big.contains_region(Polydisc((2 + 0j,), (1.0,)))
    assert not Polydisc.unit(1).contains_region(Polydisc.unit(1))


def test_translate_and_enlarge():
    K = Polydisc.unit(2).translate((3, 3j))
    assert K.centers == (3 + 0j, 3j)
    assert K.enlarge(0.5).radii == (1.5, 1.5)
    assert K.coordinate_extent(0) == (2.0, 4.0)
    assert K.width(0) == 2.0


def test_support_function():
    """max of Re z_1 over the unit polydisc is 1, attained at z_1 = 1"""
    value, point = Polydisc.unit(2).support(np.array([1.0, 0.0, 0.0, 0.0]))
    assert np.isclose(value, 1.0)
    assert np.isclose(point[0], 1.0)


def test_point_hull_enlarges_to_a_bounding_polydisc():
    hull = PointHull(((0, 0), (2, 2j)))
    box = hull.enlarge(0.0)
    assert box.centers == (1 + 0j, 1j)
    assert box.radii == (1.0, 1.0)
    assert hull.translate((1, 0)).coordinate_extent(0) == (1.0, 3.0)


def test_union_behaviour():
    U = RegionUnion((Polydisc.unit(1), Polydisc((8 + 0j,), (1.0,))))
    assert not U.is_convex
    assert U.coordinate_extent(0) == (-1.0, 9.0)
    inside = U.points_inside(np.array([[0.5], [8.5], [4.0]]))
    assert inside.tolist() == [True, True, False]
    box = bounding_polydisc(U)
    assert box.contains_region(U.enlarge(-0.5))
    with pytest.raises(RegionError):
        RegionUnion(())


def test_region_json_roundtrip():
    U = RegionUnion((Polydisc.unit(2), Polydisc((1 + 1j, 2), (0.5, 0.5))))
    assert region_from_json(U.to_json()) == U
    with pytest.raises(RegionError):
        region_from_json({"kind": "torus"})


def test_as_complex():
    assert as_complex([1, 2]) == 1 + 2j
    assert as_complex("1 + 2j") == 1 + 2j
    assert as_complex(3) == 3 + 0j


def test_hull_membership_and_interior():
    triangle = PointHull(((0,), (4,), (4j,)))
    points = np.array([1 + 1j, 2, 5, 4j])
    assert triangle.points_inside(points, strict=False).tolist() == [True, True, False, True]
    assert triangle.points_inside(points, strict=True).tolist() == [True, False, False, False]
    assert triangle.contains_region(Polydisc((1 + 1j,), (0.5,)))
    assert not triangle.contains_region(Polydisc((1 + 1j,), (1.2,)))
