import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from digicontrol.design_freq import FreqSpec
from digicontrol.design_freq import design as design_freq
from digicontrol.design_poly import PolePlacementSpec
from digicontrol.design_poly import design as design_poly
from digicontrol.polyalg import poly_from_roots
from digicontrol.realize import (InputSignal, diverges, long_division, ramp, simulate,
                                 step, strip_delay, to_canonical, trace_oracle)


def random_stable_tf(rng, degree):
    poles = []
    while len(poles) < degree:
        r, th = rng.uniform(0, 0.95), rng.uniform(0, np.pi)
        if degree - len(poles) >= 2 and rng.random() < 0.5:
            poles += [r * np.exp(1j * th), r * np.exp(-1j * th)]
        else:
            poles.append(rng.uniform(-0.95, 0.95))
    a = np.real(poly_from_roots(poles))
    b = rng.normal(size=degree + 1)
    return b, a


@pytest.mark.parametrize("seed", range(20))
def test_canonical_impulse_equals_long_division(seed):
    rng = np.random.default_rng(seed)
    b, a = random_stable_tf(rng, int(rng.integers(1, 6)))
    ss = to_canonical(b, a)
    np.testing.assert_allclose(ss.impulse_response(60), long_division(b, a, 60),
                               rtol=1e-10, atol=1e-12)


def test_long_division_geometric():
    np.testing.assert_allclose(long_division([1.0, 0.0], [1.0, -0.5], 5),
                               [1, 0.5, 0.25, 0.125, 0.0625])


def test_canonical_rejects_bad_input():
    with pytest.raises(ValueError):
        to_canonical([1.0, 0.0], [2.0, 1.0])
    with pytest.raises(ValueError):
        to_canonical([1.0, 0.0, 0.0], [1.0, 1.0])


def test_strip_delay(plant):
    ctrl = design_poly(plant, PolePlacementSpec(0.5))
    b, a = strip_delay(ctrl)
    assert len(b) == len(a) == ctrl.order


def test_input_signals():
    assert list(InputSignal("step", 2.0).sample(3, 0.01)) == [2.0, 2.0, 2.0]
    np.testing.assert_allclose(ramp().sample(3, 0.01), [0, 0.01, 0.02])
    np.testing.assert_array_equal(InputSignal.from_array([1, 2]).sample(4, 0.01), [1, 2, 0, 0])
    with pytest.raises(ValueError):
        InputSignal("square")


@pytest.mark.parametrize("builder", [
    lambda p: design_poly(p, PolePlacementSpec(0.5)),
    lambda p: design_poly(p, PolePlacementSpec(0.3, True)),
    lambda p: design_freq(p, FreqSpec.from_degrees(0.06, 30.0, "pd")),
    lambda p: design_freq(p, FreqSpec.from_degrees(0.011, 30.0, "pid")),
])
@pytest.mark.parametrize("delay", [0, 1, 2])
def test_simulation_matches_oracle(plant, builder, delay):
    ctrl = builder(plant)
    rng = np.random.default_rng(delay)
    d = rng.normal(size=150)
    sim = simulate(plant, ctrl, step(), d, 150, perturb_delay=delay)
    ref = trace_oracle(plant, ctrl, step(), d, 150, perturb_delay=delay)
    scale = max(1.0, np.max(np.abs(ref.u)))
    for name in ("e", "u", "x", "y"):
        np.testing.assert_allclose(getattr(sim, name), getattr(ref, name), atol=1e-8 * scale)


def test_disturbance_rejected_with_integrator(plant):
    ctrl = design_poly(plant, PolePlacementSpec(0.5, True))
    tr = simulate(plant, ctrl, None, step(), 1500)
    assert abs(tr.y[-1]) < 1e-8


def test_trace_columns(plant):
    tr = simulate(plant, design_poly(plant, PolePlacementSpec(0.5)), step(), None, 10)
    rows = list(tr.rows())
    assert len(rows) == 10 and len(rows[0]) == 8
    assert tr.t[1] == pytest.approx(0.01)
    assert tr.u[0] == 0.0  # one-sample realization delay


def test_divergence_detector(plant):
    ctrl = design_poly(plant, PolePlacementSpec(0.2, True))
    assert diverges(simulate(plant, ctrl, step(), None, 5000, perturb_delay=1))
    assert not diverges(simulate(plant, ctrl, step(), None, 5000))


def test_bad_arguments(plant):
    ctrl = design_poly(plant, PolePlacementSpec(0.5))
    with pytest.raises(ValueError):
        simulate(plant, ctrl, n_samples=0)
    with pytest.raises(ValueError):
        simulate(plant, ctrl, perturb_delay=-1)


@settings(max_examples=20, deadline=None)
@given(st.floats(0.0, 0.9), st.booleans(), st.floats(-5, 5))
def test_linearity_in_reference(p, integ, k):
    from digicontrol.plant import ContinuousPlant, discretize
    sp = discretize(ContinuousPlant(-10.0), 100.0)
    ctrl = design_poly(sp, PolePlacementSpec(p, integ))
    one = simulate(sp, ctrl, step(1.0), None, 80)
    scaled = simulate(sp, ctrl, step(k), None, 80)
    np.testing.assert_allclose(scaled.y, k * one.y, rtol=1e-9, atol=1e-9)
