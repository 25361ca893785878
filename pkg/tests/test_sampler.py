import math

import numpy as np
import pytest

from exceptions import InadmissibleLawError, PoleError
from loewner.schemas import DrivingPath
from restriction.constants import HullKind
from restriction.hulls import halfdisc_hull, perfect_hull
from restriction.schemas import RadialHull, RestrictionLaw
from restriction.services import avoidance_probability, nu
from sampler.estimation import (
    chordal_limit_experiment,
    chordal_preimage,
    fit_exponents,
    mc_estimate_avoidance,
    restriction_property_test,
)
from sampler.martingale import martingale_state, verify_martingale
from sampler.schemas import EstimateReport, RestrictionPropertyReport
from sampler.services import fan_out, hit_test, sample_max_restriction, sample_restriction, slit_uniformizer, step_sizes
from settings import settings


def _hull(d0: float, d1: float) -> RadialHull:
    return RadialHull(
        kind=HullKind.POLYLINE,
        path=DrivingPath(times=[0.0], values=[0.0]),
        T=math.log(d0),
        d0=d0,
        d1=d1,
        arc=[],
    )


def _report(law: RestrictionLaw, hull: RadialHull, n: int) -> EstimateReport:
    target = hull.d0 ** law.alpha * hull.d1 ** law.beta
    return EstimateReport(law=law, hull=hull.label, n=n, avoided=round(n * target), target=target, dt=1e-3, seed=0, wall_ms=0.0)


def test_step_sizes():
    assert step_sizes(None) == (1e-3, 1e-4, 10)
    assert step_sizes(1e-5) == (1e-5, 1e-5, 1)


def test_slit_uniformizer():
    transform = slit_uniformizer(1.0, -1.0)
    value, _ = transform.apply(np.array([np.exp(-1j), 1.0 + 0j]))
    assert abs(value[0]) < 1e-12
    assert value[1].real > 0
    assert value[1].imag == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(PoleError):
        transform.apply(np.array([np.exp(1j)]))


def test_fan_out_sums_in_chunk_order():
    total = fan_out(lambda indexes: np.array([indexes.size, indexes.sum()]), 10, 1)
    assert total.tolist() == [10, 45]
    with pytest.raises(ValueError):
        fan_out(lambda indexes: indexes, 0, 1)


def test_estimate_report_statistics(sle_law):
    report = EstimateReport(law=sle_law, hull='h', n=100, avoided=90, target=0.9, dt=1e-3, seed=0, wall_ms=1.0)
    assert report.p_hat == pytest.approx(0.9)
    assert report.se == pytest.approx(0.03)
    assert report.z == pytest.approx(0.0, abs=1e-9)
    certain = report.model_copy(update={'avoided': 100, 'target': 0.5})
    assert certain.z == math.inf


def test_restriction_property_report():
    report = RestrictionPropertyReport(n=100, avoided_a=50, conditional_avoid_b=40, avoid_b=80)
    assert report.p_conditional == pytest.approx(0.8)
    assert report.p_unconditional == pytest.approx(0.8)
    assert report.z == pytest.approx(0.0, abs=1e-12)


def test_fit_recovers_exponents(sle_law):
    hulls = [_hull(math.exp(0.2), math.exp(-0.2)), _hull(math.exp(0.5), math.exp(-0.1)), _hull(math.exp(0.1), math.exp(-0.6))]
    reports = [_report(sle_law, hull, 10 ** 7) for hull in hulls]
    fit = fit_exponents(reports, hulls)
    assert fit.alpha == pytest.approx(sle_law.alpha, abs=1e-4)
    assert fit.beta == pytest.approx(sle_law.beta, abs=1e-4)
    assert fit.hulls == 3
    assert fit.distance(fit.alpha, fit.beta) == 0


def test_fit_needs_two_informative_hulls(sle_law):
    hulls = [_hull(math.exp(0.2), math.exp(-0.2)), RadialHull.empty()]
    with pytest.raises(ValueError):
        fit_exponents([_report(sle_law, hull, 1000) for hull in hulls], hulls)


def test_inadmissible_laws_are_refused():
    with pytest.raises(InadmissibleLawError):
        mc_estimate_avoidance(RestrictionLaw(alpha=1.0, beta=0.7), [RadialHull.empty()], n=1)
    with pytest.raises(InadmissibleLawError):
        mc_estimate_avoidance(RestrictionLaw(alpha=0.0, beta=0.5), [RadialHull.empty()], n=1, allow_inadmissible=True)
    with pytest.raises(InadmissibleLawError):
        sample_restriction(RestrictionLaw(alpha=1.0, beta=0.7))


def test_chordal_limit_ladder_without_sampling(sle_law, vertical_arc):
    report = chordal_limit_experiment(sle_law, vertical_arc, eps_ladder=(0.5, 0.25, 0.1), n=0)
    assert report.limit == pytest.approx((2 / math.sqrt(5)) ** (5 / 8), abs=1e-3)
    assert [row.estimate for row in report.rows] == [None, None, None]
    assert report.rows[-1].gap < report.rows[0].gap


@pytest.mark.slow
def test_sle_sample_is_a_curve_from_1_to_0():
    K = sample_max_restriction(5 / 8, dt=1e-2, seed=1)
    assert K.left is None
    assert K.region.geom_type == 'LineString'
    assert K.right.points[0] == pytest.approx(1.0)
    assert K.right.points[-1] == 0
    assert not hit_test(K, RadialHull.empty())


@pytest.mark.slow
def test_two_sided_sample_has_area():
    K = sample_max_restriction(2.0, dt=1e-2, seed=1)
    assert K.rho == pytest.approx(2.0)
    assert K.left is not None
    assert K.region.area > 0


@pytest.mark.slow
def test_monte_carlo_matches_the_formula(sle_law, quarter_hull):
    report, = mc_estimate_avoidance(sle_law, [quarter_hull], n=200, dt=1e-2, seed=2)
    assert abs(report.z) <= settings.sampler.Z_THRESHOLD


def test_martingale_starts_at_the_avoidance_probability(quarter_hull):
    rho = 1.0
    origin = DrivingPath(times=[0.0], values=[0.0])
    force = DrivingPath(times=[0.0], values=[-settings.sle.EPS0])
    state = martingale_state(origin, force, 0.0, quarter_hull.arc, rho)
    assert state.Z == pytest.approx(quarter_hull.d1, rel=1e-2)
    assert state.value == pytest.approx(avoidance_probability(quarter_hull, RestrictionLaw.of_rho(rho)), rel=1e-2)


def test_martingale_needs_positive_rho_and_a_hull(quarter_hull):
    with pytest.raises(ValueError):
        verify_martingale(0.0, quarter_hull, n=1)
    with pytest.raises(ValueError):
        verify_martingale(1.0, RadialHull.empty(), n=1)


@pytest.mark.slow
def test_martingale_stays_flat():
    hull = perfect_hull(math.pi, 0.15)
    report = verify_martingale(2.0, hull, T=0.5, checkpoints=5, n=200, dt=1e-2, seed=4)
    assert report.m0_numeric == pytest.approx(report.m0, rel=1e-2)
    assert report.max_abs_z <= settings.sampler.Z_THRESHOLD_MULTIPLE


@pytest.mark.slow
def test_restriction_property_holds(sle_law, quarter_hull):
    B = perfect_hull(3 * math.pi / 2, 0.2)
    report = restriction_property_test(sle_law, quarter_hull, B, n=200, dt=1e-2, seed=6)
    assert report.avoided_a > 0
    assert abs(report.z) <= settings.sampler.Z_THRESHOLD


def test_chordal_preimage_keeps_a_filled_hull_filled():
    half_disc = halfdisc_hull(2.0, 0.5)
    hull = chordal_preimage(half_disc.arc, 0.5, filled=half_disc.filled)
    assert hull.geometry.geom_type == 'Polygon'
    assert hull.geometry.area > 0
    assert chordal_preimage(half_disc.arc, 0.5).geometry.geom_type == 'LineString'


@pytest.mark.parametrize('law', [RestrictionLaw.sle(), RestrictionLaw.maximal(2.0)])
def test_perfect_hull_is_avoided_at_rate_nu(law):
    hull = perfect_hull(math.pi, 0.2)
    assert avoidance_probability(hull, law) == pytest.approx(math.exp(-nu(math.pi, law) * 0.2), rel=1e-3)


def test_two_sided_law_on_the_opposite_perfect_hull():
    hull = perfect_hull(math.pi, 0.2)
    assert avoidance_probability(hull, RestrictionLaw.maximal(2.0)) == pytest.approx(math.exp(-1 / 15), rel=1e-3)


@pytest.mark.slow
def test_empty_hull_is_always_avoided(sle_law):
    report, = mc_estimate_avoidance(sle_law, [RadialHull.empty()], n=8, dt=1e-2, seed=3)
    assert report.p_hat == 1
    assert report.z == 0


@pytest.mark.slow
def test_hit_rate_of_the_opposite_perfect_hull():
    law = RestrictionLaw.maximal(2.0)
    t = 0.2
    report, = mc_estimate_avoidance(law, [perfect_hull(math.pi, t)], n=400, dt=1e-2, seed=8)
    expected = 1 - math.exp(-nu(math.pi, law) * t)
    assert abs((1 - report.p_hat) - expected) <= settings.sampler.Z_THRESHOLD * report.se


@pytest.mark.slow
def test_two_sided_estimates_recover_the_exponents():
    law = RestrictionLaw.maximal(2.0)
    hulls = [perfect_hull(math.pi / 2, 0.2), perfect_hull(math.pi, 0.1), halfdisc_hull(2.0, 0.05)]
    reports = mc_estimate_avoidance(law, hulls, n=1000, dt=1e-2, seed=11)
    assert all(abs(report.z) <= settings.sampler.Z_THRESHOLD for report in reports)
    fit = fit_exponents(reports, hulls)
    assert fit.distance(2 / 3, 2.0) <= settings.sampler.Z_THRESHOLD


@pytest.mark.slow
def test_halving_the_step_moves_estimates_within_their_errors(sle_law, quarter_hull):
    hulls = [quarter_hull, perfect_hull(math.pi, 0.2)]
    coarse = mc_estimate_avoidance(sle_law, hulls, n=300, dt=2e-2, seed=5)
    fine = mc_estimate_avoidance(sle_law, hulls, n=300, dt=1e-2, seed=5)
    for a, b in zip(coarse, fine):
        assert abs(a.p_hat - b.p_hat) <= settings.sampler.Z_THRESHOLD * math.hypot(a.se, b.se)


def test_reports_read_camel_case_payloads(sle_law, quarter_hull):
    report = _report(sle_law, quarter_hull, 100)
    payload = report.model_dump(by_alias=True, exclude={'p_hat', 'se', 'z'})
    assert 'wallMs' in payload
    assert EstimateReport.model_validate(payload) == report
    assert EstimateReport.model_validate(report).avoided == report.avoided
