import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from digicontrol.analysis import (LoopFunction, assemble, complementary_sensitivity,
                                  default_grid, freq_response, gain_crossover, margins,
                                  nyquist_curve, sensitivity, sensitivity_peak, wrap_angle)
from digicontrol.design_freq import FreqSpec
from digicontrol.design_freq import design as design_freq
from digicontrol.design_poly import PolePlacementSpec
from digicontrol.design_poly import design as design_poly
from digicontrol.polyalg import poly_eval


@pytest.fixture(scope="module")
def designs(plant):
    return [
        design_poly(plant, PolePlacementSpec(0.5)),
        design_poly(plant, PolePlacementSpec(0.3, True)),
        design_freq(plant, FreqSpec.from_degrees(0.044, 30.0, "pd")),
        design_freq(plant, FreqSpec.from_degrees(0.011, 30.0, "pid")),
    ]


def test_sensitivities_sum_to_one(plant, designs):
    grid = default_grid()
    for ctrl in designs:
        loop, _ = assemble(plant, ctrl)
        total = sensitivity(loop, grid) + complementary_sensitivity(loop, grid)
        assert np.max(np.abs(total - 1.0)) <= 1e-10


@settings(max_examples=40)
@given(st.floats(1e-3, math.pi))
def test_loop_conjugate_symmetry(w):
    loop = LoopFunction(np.array([0.0, 0.3, -0.1]), np.array([1.0, -1.2, 0.4]))
    assert loop(-w) == pytest.approx(np.conj(loop(w)), rel=1e-12)


def test_freq_response_at_pole_is_infinite():
    assert np.isinf(freq_response([1.0], [1.0, -1.0], 0.0))


def test_closed_loop_numerators_consistent(plant, designs):
    # e + y = r and x - u = d must hold for every frequency
    z = np.exp(1j * np.array([0.01, 0.3, 2.0]))
    for ctrl in designs:
        _, cl = assemble(plant, ctrl)
        tf = {k: poly_eval(v, z) / poly_eval(cl.char_poly, z) for k, v in cl.numerators.items()}
        np.testing.assert_allclose(tf["r->e"] + tf["r->y"], 1.0, atol=1e-12)
        np.testing.assert_allclose(tf["d->x"] - tf["d->u"], 1.0, atol=1e-9)
        np.testing.assert_allclose(tf["r->x"], tf["r->u"])


def test_crossover_is_unit_gain(plant, designs):
    for ctrl in designs:
        loop, _ = assemble(plant, ctrl)
        w, _ = gain_crossover(loop)
        assert abs(abs(loop(w)) - 1.0) < 1e-9


def test_frequency_design_crossover_at_target(plant):
    ctrl = design_freq(plant, FreqSpec.from_degrees(0.044, 30.0, "pd"))
    rep = margins(plant, ctrl)
    assert rep.f_cross == pytest.approx(0.044, abs=1e-9)
    assert rep.phase_margin_deg == pytest.approx(30.0, abs=1e-6)
    assert rep.delay_margin == pytest.approx(30.0 / 360.0 / 0.044, abs=1e-6)


def test_no_crossover():
    loop = LoopFunction(np.array([0.0, 0.01]), np.array([1.0, 0.5]))
    assert gain_crossover(loop) == (None, False)


def test_sensitivity_peak_refined_above_grid(plant, designs):
    loop, _ = assemble(plant, designs[0])
    grid = default_grid(64)
    peak, w = sensitivity_peak(loop, grid)
    assert peak >= np.max(np.abs(sensitivity(loop, grid)))
    assert peak == pytest.approx(abs(sensitivity(loop, w)))


def test_wrap_angle_range():
    assert wrap_angle(math.pi) == math.pi
    assert wrap_angle(-math.pi) == math.pi
    assert wrap_angle(3 * math.pi / 2) == pytest.approx(-math.pi / 2)


def test_report_flags(plant):
    unstable = design_freq(plant, FreqSpec.from_degrees(0.1, 30.0, "pd"))
    rep = margins(plant, unstable)
    assert rep.nominal_unstable and rep.perturbed_unstable
    data = rep.to_dict()
    assert data["nominal_unstable"] is True
    assert set(data) >= {"omega_cross", "phase_margin_deg", "delay_margin", "r0", "r1"}


def test_nyquist_markers(plant, designs):
    loop, _ = assemble(plant, designs[3])
    curve = nyquist_curve(loop)
    assert np.all(np.diff(curve["omega"]) > 0)
    assert abs(complex(curve["re"][-1], curve["im"][-1])) <= 1e-10
    w, re, im = curve["markers"]["crossover"]
    assert math.hypot(re, im) == pytest.approx(1.0, abs=1e-9)
