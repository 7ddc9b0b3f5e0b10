import numpy as np
import pytest

from modules.polycore import SparsePoly, eval_grid
from modules.regions import Polydisc
from modules.runge import (
    DisjointPair,
    PiecewiseTarget,
    PreconditionError,
    birkhoff_pair,
    blend_coefficient,
    blend_degree_curve,
    hypercyclic_orbit_error,
    is_nonincreasing,
    leja_points,
    runge_piecewise,
    shift_poly,
)
from modules.translations import DiagonalTranslation, escape_index


def disc(center, radius=1.0):
    return Polydisc((complex(center),), (radius,))


def far_pair():
    return DisjointPair(disc(0), disc(8))


def test_pair_rejects_overlap():
    with pytest.raises(PreconditionError):
        DisjointPair(disc(0), disc(1.5))
    with pytest.raises(PreconditionError):
        DisjointPair(disc(0), disc(2))


def test_pair_separation_and_hyperplane():
    pair = far_pair()
    assert pair.separation == pytest.approx(6.0)
    assert pair.hyperplane["verdict"]


def test_blend_reaches_tolerance():
    """|phi - 1| and |phi| below 1e-6 on D(0,1) and D(8,1) within degree 80"""
    cert = blend_coefficient(far_pair(), 1e-6, max_degree=80)
    assert cert.feasible
    assert cert.err1 <= 1e-6
    assert cert.err2 <= 1e-6
    assert cert.degree <= 80
    pts = np.array([0.5, 0.5j, 8.5, 7.5 - 0.5j])
    values = eval_grid(cert.p, pts.reshape(-1, 1))
    assert np.allclose(values, [1, 1, 0, 0], atol=1e-6)


def test_blend_curve_decreases():
    rows = blend_degree_curve(far_pair(), [4, 12, 24])
    assert [d for d, _ in rows] == [4, 12, 24]
    assert is_nonincreasing(rows)
    assert rows[-1][1] < rows[0][1]


def test_blend_curve_keeps_best_so_far():
    rows = blend_degree_curve(far_pair(), [80, 20, 40, 40])
    assert [d for d, _ in rows] == [20, 40, 80]
    assert is_nonincreasing(rows)
    assert rows[-1][1] <= 1e-6
    single = blend_degree_curve(far_pair(), [20])
    assert rows[0] == single[0]


def test_blend_rejects_bad_tolerance():
    with pytest.raises(PreconditionError):
        blend_coefficient(far_pair(), 0.0)
    with pytest.raises(PreconditionError):
        blend_degree_curve(far_pair(), [0, 4])


def test_is_nonincreasing():
    assert is_nonincreasing([(1, 3.0), (2, 3.0), (3, 1.0)])
    assert not is_nonincreasing([(1, 1.0), (2, 2.0)])
    assert is_nonincreasing([])


def test_piecewise_with_equal_targets_is_exact():
    h = SparsePoly.univariate([1, 2])
    cert = runge_piecewise(far_pair(), PiecewiseTarget(h, h), 1e-4)
    assert cert.p == h
    assert cert.err1 == cert.err2 == 0.0


def test_piecewise_approximates_both_targets():
    h1 = SparsePoly.univariate([0, 0, 1])
    h2 = SparsePoly.univariate([1, -1])
    cert = runge_piecewise(far_pair(), PiecewiseTarget(h1, h2), 1e-4)
    assert cert.feasible
    near = np.array([0.3 + 0.2j, -0.9])
    assert np.all(np.abs(eval_grid(cert.p, near.reshape(-1, 1)) - near ** 2) <= 1e-4)
    far = np.array([8.4, 7.2 + 0.5j])
    assert np.all(np.abs(eval_grid(cert.p, far.reshape(-1, 1)) - (1 - far)) <= 1e-4)


def test_shift_poly_is_exact():
    h = SparsePoly.univariate([0, 0, 1])
    assert shift_poly(h, 2) == SparsePoly.univariate([4, -4, 1])


def test_leja_points_start_at_largest_modulus():
    candidates = np.array([0.5, -3.0, 1.0j, 2.0])
    nodes, capacity = leja_points(candidates, 3)
    assert nodes[0] == -3.0
    assert len(set(nodes.tolist())) == 3
    assert capacity > 0


def test_orbit_error_vanishes_at_matching_power():
    """f(z) = z against target z + 3 under z -> z + 1: exact at m = 3"""
    f = SparsePoly.univariate([0, 1])
    target = SparsePoly.univariate([3, 1])
    curve = hypercyclic_orbit_error(f, DiagonalTranslation(1, 1.0), target, disc(0), range(0, 7))
    assert curve.argmin == 3
    assert curve.rows[3][1] == pytest.approx(0.0, abs=1e-12)
    assert curve.rows[0][1] == pytest.approx(3.0)


def test_birkhoff_single_stage():
    tau = DiagonalTranslation(1, 5.0)
    targets = [(SparsePoly.univariate([1]), SparsePoly.univariate([0, 1]))]
    f, g, schedule = birkhoff_pair(tau, targets, J=1)
    stage = schedule.stages[0]
    assert stage.owner == "f"
    assert stage.m >= escape_index(tau, stage.compact)
    assert stage.containment_ok
    assert schedule.all_satisfied()
    assert g.is_zero()
    # f ≈ 1 on the translate
    z = np.array([0.0, 0.5, -0.5j])
    shifted = z + stage.m * tau.b
    assert np.all(np.abs(eval_grid(f, shifted.reshape(-1, 1)) - 1) <= 0.5)


def test_birkhoff_zero_target_gives_zero_pair():
    zero = SparsePoly.zero(1)
    f, g, schedule = birkhoff_pair(DiagonalTranslation(1, 5.0), [(zero, zero)], J=1)
    assert f.is_zero() and g.is_zero()
    assert schedule.stages[0].conditions["f"] == {"bound": 0.0, "direct": 0.0}


def test_birkhoff_three_stages_interleaved():
    """b = 5, targets 1, z, z^2 in turn: f, then g, then f again"""
    tau = DiagonalTranslation(1, 5.0)
    one, z = SparsePoly.one(1), SparsePoly.variable(0, 1)
    f, g, schedule = birkhoff_pair(tau, [(one, z), (z ** 2, one)], J=3)
    stages = schedule.stages
    assert [s.owner for s in stages] == ["f", "g", "f"]
    assert [s.tolerance for s in stages] == [0.5, 0.25, 0.125]
    assert sum(len(s.conditions) for s in stages) == 6
    assert schedule.all_satisfied()
    for s in stages:
        assert s.m >= escape_index(tau, s.compact)
        assert s.containment_ok
    for s, nxt in zip(stages, stages[1:]):
        assert nxt.compact.contains_region(s.compact)
        assert nxt.compact.contains_region(s.compact.translate(tau.shift(s.m)))
    second = stages[1]
    curve = hypercyclic_orbit_error(g, tau, z, second.compact, [second.m])
    assert curve.rows[0][1] <= second.tolerance
    third = stages[2]
    assert hypercyclic_orbit_error(f, tau, z ** 2, third.compact, [third.m]).rows[0][1] <= third.tolerance
    assert hypercyclic_orbit_error(g, tau, SparsePoly.zero(1), third.compact, [third.m]).rows[0][1] <= third.tolerance


def test_birkhoff_rejects_short_target_list():
    with pytest.raises(PreconditionError):
        birkhoff_pair(DiagonalTranslation(1, 5.0), [], J=1)
    with pytest.raises(PreconditionError):
        birkhoff_pair(DiagonalTranslation(1, 5.0), [(None, None)], J=3)
    with pytest.raises(PreconditionError):
        birkhoff_pair(DiagonalTranslation(1, 5.0), [(None, None)], J=1, sign=2)
