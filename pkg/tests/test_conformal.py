import math

import numpy as np
import pytest

from conformal import maps
from conformal.constants import MapKind
from conformal.schemas import MobiusStep, MobiusTransform, SlitMapChain, SlitRun
from conformal.services import cayley, eval_chain, halfdisc_map, halfdisc_step, normalize_fix_0_i
from conformal.zipper import zip_arc, zipper_encode
from constants import Domain
from exceptions import DomainViolationError, PoleError, ZipperError
from loewner.schemas import DrivingPath
from loewner.services import extract_trace


def test_cayley_sends_1_to_0_and_0_to_i():
    assert cayley(np.array([1.0, 0.0])) == pytest.approx([0, 1j])
    assert cayley(np.array([0j, 1j]), direction='inverse') == pytest.approx([1, 0])


def test_cayley_rejects_points_outside_the_disc():
    with pytest.raises(DomainViolationError):
        cayley(2.0)
    with pytest.raises(PoleError):
        cayley(-1.0)


def test_mobius_inverse_composes_to_identity():
    transform = MobiusTransform(a=1 + 2j, b=0.5, c=0.3j, d=2)
    z = np.array([0.1 + 0.2j, -0.4j, 0.7])
    value, _ = transform.inverse().after(transform).apply(z)
    assert value == pytest.approx(z)


def test_degenerate_mobius_is_rejected():
    with pytest.raises(ValueError):
        MobiusTransform(a=1, b=2, c=2, d=4)


def test_disc_automorphism_fixes_plus_and_minus_one():
    f = MobiusTransform.disc_automorphism(-0.9)
    value, _ = f.apply(np.array([1.0, -1.0, 0.0]))
    assert value == pytest.approx([1, -1, -0.9])


def test_chordal_slit_matches_closed_form():
    value, _ = maps.chordal_slit(np.array([3j]), 0.0, 1.0)
    assert value[0] == pytest.approx(1j * math.sqrt(5))


def test_radial_slit_fixes_0_with_derivative_e_delta():
    value, derivative = maps.radial_slit(np.array([0j]), 0.3, 0.25)
    assert value[0] == 0
    assert derivative[0] == pytest.approx(math.exp(0.25))


def test_halfdisc_map():
    assert halfdisc_map(1.0, 0.5, 2.0)[0] == pytest.approx(2.25)
    with pytest.raises(ValueError):
        halfdisc_map(1.0, 1.5, 2.0)


def test_normalized_halfdisc_step_fixes_0_and_i():
    step = halfdisc_step(2.0, 0.3)
    value, _ = step.apply(np.array([0j, 1j]))
    assert value == pytest.approx([0, 1j], abs=1e-12)


def test_normalization_sends_image_of_0_to_0():
    g0 = halfdisc_map(2.0, 0.3, 0.0)
    value, _ = normalize_fix_0_i(2.0, 0.3).apply(g0)
    assert value[0] == pytest.approx(0, abs=1e-14)


def test_vertical_slit_to_2i_has_half_plane_time_1():
    path = zipper_encode(1j * np.linspace(0.0, 2.0, 21), Domain.HALF_PLANE)
    assert path.interpolation == 'step'
    assert path.horizon == pytest.approx(1.0, rel=1e-12)
    assert path.values == pytest.approx(np.zeros(path.values.size), abs=1e-12)


def test_radial_segment_capacity():
    r = 0.5
    result = zip_arc(np.linspace(1.0, r, 11), Domain.DISC)
    assert result.path.horizon == pytest.approx(math.log((1 + r) ** 2 / (4 * r)), rel=1e-10)
    assert result.max_vertex_error < 1e-9


def test_zipped_chain_is_inverted_by_invert():
    arc = 0.9 * np.exp(1j * np.linspace(0.0, 0.6, 12))
    arc[0] = 1.0
    chain = zip_arc(arc, Domain.DISC).chain
    z = np.array([0.1 + 0.2j, -0.3j, 0.0])
    value, _ = eval_chain(chain, z)
    back, _ = chain.invert(value)
    assert back == pytest.approx(z, abs=1e-9)


def test_chain_then_adds_capacities():
    first = zip_arc(np.linspace(1.0, 0.8, 5), Domain.DISC).chain
    second = zip_arc(-np.linspace(1.0, 0.7, 5), Domain.DISC).chain
    assert isinstance(first.then(second), SlitMapChain)
    assert first.then(second).capacity == pytest.approx(first.capacity + second.capacity)


@pytest.mark.parametrize('arc, domain', [
    ([0.5, 0.5 + 1j, 1.5 + 0.5j, 0.2 + 0.5j], Domain.HALF_PLANE),
    ([1j, 2j], Domain.HALF_PLANE),
    ([0.5, 0.2], Domain.DISC),
    ([1.0], Domain.DISC),
])
def test_invalid_arcs_are_rejected(arc, domain):
    with pytest.raises(ZipperError):
        zip_arc(np.array(arc, dtype=complex), domain)


def test_cayley_round_trip_on_random_disc_points():
    rng = np.random.default_rng(0)
    z = 0.9 * np.sqrt(rng.random(1000)) * np.exp(2j * math.pi * rng.random(1000))
    back = cayley(cayley(z), direction='inverse')
    assert np.abs(back - z).max() < 1e-12


@pytest.mark.parametrize('x', [-2.0, -1.0, -0.5, 0.5, 1.0, 2.0])
@pytest.mark.parametrize('eps', [1e-2, 1e-3])
def test_normalized_step_fixes_0_and_i_on_a_grid(x, eps):
    value, _ = halfdisc_step(x, eps).apply(np.array([0j, 1j]))
    assert np.abs(value - [0, 1j]).max() < 1e-12


def test_chain_derivative_matches_finite_differences():
    rng = np.random.default_rng(3)
    chain = SlitMapChain(
        maps=(
            SlitRun(kind=MapKind.CHORDAL_SLIT, drive=rng.normal(0.0, 0.5, 4), step=rng.uniform(0.01, 0.05, 4)),
            halfdisc_step(1.5, 0.2),
            MobiusStep(transform=MobiusTransform(a=2.0, b=0.5, c=0.0, d=1.0)),
            SlitRun(kind=MapKind.CHORDAL_SLIT, drive=rng.normal(0.0, 0.5, 4), step=rng.uniform(0.01, 0.05, 4)),
        ),
    )
    z = np.array([0.3 + 1.2j, -0.8 + 0.6j])
    h = 1e-5
    _, derivative = eval_chain(chain, z)
    forward, _ = eval_chain(chain, z + h)
    backward, _ = eval_chain(chain, z - h)
    difference = (forward - backward) / (2 * h)
    assert np.abs(derivative - difference).max() < 1e-6 * np.abs(derivative).max()


def test_empty_chain_is_the_identity():
    value, derivative = eval_chain(SlitMapChain(), np.array([0.2 + 0.5j]))
    assert value[0] == 0.2 + 0.5j
    assert derivative[0] == 1


def test_zipper_recovers_a_brownian_driver():
    rng = np.random.default_rng(11)
    dt = 1e-3
    values = np.concatenate([[0.0], np.cumsum(rng.normal(0.0, math.sqrt(2 * dt), 50))])
    W = DrivingPath(times=dt * np.arange(values.size), values=values, interpolation='step')
    trace = extract_trace(W, Domain.HALF_PLANE)
    path = zipper_encode(trace.points, Domain.HALF_PLANE)
    assert path.values.size == W.values.size
    assert np.abs(path.values - W.values).max() < 5e-2
    assert path.horizon == pytest.approx(W.horizon, rel=5e-2)
