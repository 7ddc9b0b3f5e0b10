import numpy as np
import pytest

from modules.densegroup import (
    MapDistance,
    ScheduleInfeasibleError,
    ShearTarget,
    TargetWord,
    UnrepresentableTargetError,
    approximate_target,
    build_orbit_generator,
    conjugate_by_power,
    conjugate_word,
    conjugation_orbit,
    conjugated_shear_poly,
    drift_check,
    drift_constant,
    drift_corrected,
    freeness_report,
    group_action_checks,
    quadratic_shear_poly,
    realize_schedule,
    schedule_build,
    two_generator_experiment,
)
from modules.polycore import GaussianRational, SparsePoly
from modules.regions import GridSpec, Polydisc
from modules.shearcalc import make_F
from modules.translations import DiagonalTranslation


def test_drift_constant_signs():
    assert drift_constant(2, 2, 1) == GaussianRational(-4)
    assert drift_constant(3, 2, 1) == GaussianRational(4)
    assert drift_constant(2, 0, 5) == GaussianRational(0)


def test_conjugated_quadratic_shear():
    """n = 2, g = z2^2, b = 1, m = 2: h = (z2 + 2)^2 - 4"""
    tau = DiagonalTranslation(2, 1.0)
    h = conjugated_shear_poly(quadratic_shear_poly(2), 2, tau, 2)
    assert h == SparsePoly.univariate([0, 4, 1])
    conj = conjugate_by_power(make_F(2, None, quadratic_shear_poly(2)), tau, 2)
    pts = np.array([[0.5, -0.25j], [1.0 + 1.0j, 2.0]])
    z1, z2 = pts[:, 0], pts[:, 1]
    out = conj.evaluate(pts)
    assert np.allclose(out[:, 0], z2)
    assert np.allclose(out[:, 1], -z1 + (z2 + 2) ** 2 - 4)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_drift_check_is_exact(n):
    check = drift_check(quadratic_shear_poly(n), DiagonalTranslation(n, 1.0), 3)
    assert check.exact_match
    assert check.constant == complex(drift_constant(n, 3, 1))


def test_drift_corrected_target():
    h = SparsePoly.univariate([0, 1])
    assert drift_corrected(h, 2, 1)(3) == SparsePoly.univariate([6, 1])
    assert drift_corrected(h, 3, 1)(3) == SparsePoly.univariate([-6, 1])


def test_conjugation_acts_as_a_group():
    for cert in group_action_checks(DiagonalTranslation(2, 1.0), 1, 2, seed=0):
        assert cert.verdict, cert.label
        assert cert.method == "symbolic"


def test_conjugate_word_label():
    tau = DiagonalTranslation(2, 1.0)
    F = make_F(2, None, quadratic_shear_poly(2))
    assert conjugate_word(tau, F, 2).label() == "τ^-2 F τ^2"
    assert conjugate_word(tau, F, 0).label() == "F"


def test_map_distance():
    K = Polydisc.unit(2)
    I = ShearTarget.cyclic(2)
    assert MapDistance.measure(I, I, K).value == 0.0
    flip = MapDistance.measure(lambda p: p, lambda p: -p, K)
    assert flip.value == pytest.approx(2 * np.sqrt(2))


def test_targets_validate_dimension():
    with pytest.raises(UnrepresentableTargetError):
        ShearTarget(2, SparsePoly.zero(2))
    with pytest.raises(UnrepresentableTargetError):
        TargetWord(3, (ShearTarget.cyclic(2),))
    assert TargetWord(2).name() == "id"


def test_constant_shear_reached_exactly():
    """With g = 0 the conjugates are the constant shears F_{0,-2m}"""
    tau = DiagonalTranslation(2, 1.0)
    target = ShearTarget(2, SparsePoly.constant(-4, 1), "F_(0,-4)")
    result = approximate_target(target, tau, SparsePoly.zero(1), Polydisc.unit(2), 1e-6, m_range=range(0, 6))
    assert result.powers == [2]
    assert result.ok
    assert result.word.label() == "τ^-2 F τ^2"


def test_unreachable_target_reports_stage():
    tau = DiagonalTranslation(2, 1.0)
    target = ShearTarget(2, SparsePoly.constant(-3, 1))
    with pytest.raises(ScheduleInfeasibleError) as info:
        approximate_target(target, tau, SparsePoly.zero(1), Polydisc.unit(2), 1e-6, m_range=range(0, 6))
    assert info.value.stage == 1


def test_identity_target_needs_no_word():
    tau = DiagonalTranslation(2, 1.0)
    result = approximate_target(TargetWord(2), tau, quadratic_shear_poly(2), Polydisc.unit(2), 1e-3)
    assert result.word.is_empty()
    assert result.ok


def test_freeness_counts_reduced_words():
    tau = DiagonalTranslation(2, 1.0)
    F = make_F(2, None, quadratic_shear_poly(2))
    report = freeness_report(tau, F, Polydisc.unit(2), 2, spec=GridSpec(5))
    assert report.word_count == report.expected_count == 16
    assert report.ok
    assert len(report.margins) == 16


def test_schedule_for_two_targets():
    tau = DiagonalTranslation(2, 1.0)
    targets = [TargetWord(2), ShearTarget(2, SparsePoly.univariate([0, 1]), "F_(0,z2)")]
    schedule = schedule_build(targets, [], tau, max_word_length=2, spec=GridSpec(5))
    first, second = schedule.stages
    assert first.auto_satisfied
    assert first.m == 3
    assert second.k > first.k
    assert second.m > first.m
    assert second.eps < first.eps
    assert first.delta > first.tail_bound
    assert schedule.violations(tau) == []


def test_realized_schedule_records_achieved_errors():
    tau = DiagonalTranslation(2, 1.0)
    targets = [TargetWord(2), ShearTarget(2, SparsePoly.univariate([0, 1]), "F_(0,z2)")]
    schedule = schedule_build(targets, [], tau, max_word_length=2, spec=GridSpec(5))
    F = realize_schedule(schedule, targets, tau, spec=GridSpec(5))
    first, second = schedule.stages
    assert first.achieved == 0.0
    assert second.achieved is not None
    assert second.achieved <= second.eps
    assert schedule.unmet() == []
    direct = MapDistance.measure(conjugate_word(tau, F, second.m), targets[1], second.compact, GridSpec(5))
    assert direct.value == second.achieved
    schedule.record_achieved(2, 10 * second.eps)
    assert schedule.unmet() == [second]
    with pytest.raises(UnrepresentableTargetError):
        realize_schedule(schedule, targets[:1], tau)


def test_schedule_with_no_targets():
    schedule = schedule_build([], [Polydisc.unit(2)], DiagonalTranslation(2, 1.0))
    assert schedule.stages == []


def test_conjugation_orbit_hits_constant_shears():
    """F = F_{0,0}, b = 1: τ^m F τ^-m = F_(0, 2m), so F_(0,4) is reached at m = 2"""
    tau = DiagonalTranslation(2, 1.0)
    F = make_F(2)
    targets = [ShearTarget(2, SparsePoly.constant(0, 1), "F_(0,0)"), ShearTarget(2, SparsePoly.constant(4, 1), "F_(0,4)")]
    K = Polydisc.unit(2)
    report = conjugation_orbit(F, tau, targets, [K, K], [1e-9, 1e-9], spec=GridSpec(5))
    assert [s.m for s in report.stages] == [0, 2]
    assert [s.k for s in report.stages] == [1, 1]
    assert report.nested
    assert report.ok


def test_conjugation_orbit_nesting_and_misses():
    tau = DiagonalTranslation(2, 1.0)
    F = make_F(2)
    target = ShearTarget(2, SparsePoly.constant(0, 1))
    big = Polydisc((0j, 0j), (2.0, 2.0))
    report = conjugation_orbit(F, tau, [target, target], [big, Polydisc.unit(2)], [1e-9, 1e-9], spec=GridSpec(5))
    assert [s.k for s in report.stages] == [1, 2]
    assert not report.nested
    assert not report.ok
    odd = ShearTarget(2, SparsePoly.constant(3, 1))
    with pytest.raises(ScheduleInfeasibleError) as info:
        conjugation_orbit(F, tau, [target, odd], [big, big], [1e-9, 1e-9], m_range=range(0, 5), spec=GridSpec(5))
    assert info.value.stage == 2


def test_two_generator_experiment_without_shear_targets():
    """Only the identity target: g stays zero and no pieces are scheduled"""
    tau = DiagonalTranslation(2, 1.0)
    report = two_generator_experiment(tau, [TargetWord(2)], Polydisc.unit(2), 1e-3, word_length=2, spec=GridSpec(5))
    assert report.g.is_zero()
    assert report.pieces == []
    assert report.results[0].word.is_empty()
    assert report.freeness.word_count == 16
    assert report.ok
    assert report.to_json()["g_degree"] == -1


def test_two_generator_experiment_checks_dimensions():
    with pytest.raises(UnrepresentableTargetError):
        two_generator_experiment(DiagonalTranslation(2, 1.0), [TargetWord(2)], Polydisc.unit(3), 1e-3)


def test_orbit_generator_visits_two_shears():
    """pieces on the negative ray at -14 and -28 (gap of 12 radii), visited in order by τ^m F τ^-m"""
    tau = DiagonalTranslation(2, 1.0)
    z2 = SparsePoly.variable(0, 1)
    targets = [ShearTarget(2, z2, "F_(0,z2)"), ShearTarget(2, z2 ** 2, "F_(0,z2^2)")]
    K = Polydisc.unit(2)
    F, pieces = build_orbit_generator(tau, targets, K, 1e-3)
    assert [p.m for p in pieces] == [-14, -28]
    assert all(p.condition["direct"] <= 1e-3 for p in pieces)
    report = conjugation_orbit(F, tau, targets, [K, K], [1e-2, 1e-3], m_range=range(0, 30))
    assert [s.m for s in report.stages] == [14, 28]
    assert all(s.error <= s.eps for s in report.stages)
    assert report.ok


def test_composite_bound_dominates_measured_error():
    """g = 0: F_(0,-3.9) and F_(0,-1.9) are each met 0.1 off, so the word is 0.2 off"""
    tau = DiagonalTranslation(2, 1.0)
    outer = ShearTarget(2, SparsePoly.constant(-3.9, 1), "F_(0,-3.9)")
    inner = ShearTarget(2, SparsePoly.constant(-1.9, 1), "F_(0,-1.9)")
    result = approximate_target(TargetWord(2, (outer, inner)), tau, SparsePoly.zero(1), Polydisc.unit(2), 0.5,
                                m_range=range(0, 6), spec=GridSpec(5))
    assert result.powers == [2, 1]
    assert result.factor_errors == pytest.approx([0.1, 0.1])
    assert result.achieved == pytest.approx(0.2)
    assert result.bound >= result.achieved
    assert result.ok
