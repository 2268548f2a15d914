import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from digicontrol.plant import (ContinuousPlant, SampledPlant, discretize,
                               fundamental_matrix, input_response,
                               intra_sample_response, phi1, phi2, psi,
                               state_space_tf, step_discrete)


def rk4_flow(A, B, u, t, steps=2000):
    """Integrate w' = A w + B u from each unit initial state and from rest.

    Returns (G, H): the state transition and held-input response over t.
    """
    def run(w0, u_val):
        w = np.array(w0, float)
        h = t / steps
        f = lambda w: A @ w + B.reshape(-1) * u_val
        for _ in range(steps):
            k1 = f(w)
            k2 = f(w + h / 2 * k1)
            k3 = f(w + h / 2 * k2)
            k4 = f(w + h * k3)
            w = w + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        return w

    G = np.column_stack([run([1, 0], 0.0), run([0, 1], 0.0)])
    H = run([0, 0], u)
    return G, H


def test_nominal_coefficients():
    sp = discretize(ContinuousPlant(-10.0), 100.0)
    np.testing.assert_allclose(sp.a, [1, -1.904837, 0.904837], atol=1e-6)
    np.testing.assert_allclose(sp.b, [0, 4.8374e-4, 4.6788e-4], atol=1e-8)


@pytest.mark.parametrize("sigma", [-10.0, -0.3, -50.0, 0.0])
def test_sampled_matrices_match_rk4(sigma):
    cp = ContinuousPlant(sigma)
    ss = cp.state_space()
    G, H = rk4_flow(ss.A, ss.B, 1.0, 0.01)
    np.testing.assert_allclose(fundamental_matrix(cp, 0.01), G, atol=1e-12)
    np.testing.assert_allclose(input_response(cp, 0.01).reshape(-1), H, atol=1e-12)


@pytest.mark.parametrize("sigma", [-10.0, -1e-3, -200.0, 0.0])
def test_transfer_function_matches_state_space(sigma):
    sp = discretize(ContinuousPlant(sigma), 100.0)
    num, den = state_space_tf(sp.G, sp.H, sp.C, sp.D)
    np.testing.assert_allclose(den, sp.a, rtol=1e-12, atol=1e-15)
    np.testing.assert_allclose(num, sp.b, rtol=1e-9, atol=1e-18)


def test_phi_functions_at_zero():
    assert phi1(0.0) == 1.0
    assert phi2(0.0) == 0.5
    assert psi(0.0) == 0.5


@given(st.floats(-5, 5).filter(lambda x: abs(x) > 1e-3))
def test_phi_functions_match_closed_forms(x):
    assert phi1(x) == pytest.approx(math.expm1(x) / x, rel=1e-12)
    assert phi2(x) == pytest.approx((math.exp(x) - 1 - x) / x**2, rel=1e-7)
    assert psi(x) == pytest.approx((x * math.exp(x) - math.exp(x) + 1) / x**2, rel=1e-7)


@pytest.mark.parametrize("x", [0.49999, 0.5, -0.49999, -0.5])
def test_phi_functions_continuous_at_series_cutoff(x):
    eps = 1e-9
    assert phi2(x) == pytest.approx(phi2(x + eps), abs=1e-8)
    assert psi(x) == pytest.approx(psi(x + eps), abs=1e-8)


@given(st.floats(-100, 0), st.floats(0, 0.2), st.floats(0, 0.2))
def test_semigroup(sigma, t1, t2):
    cp = ContinuousPlant(sigma)
    lhs = fundamental_matrix(cp, t1 + t2)
    rhs = fundamental_matrix(cp, t1) @ fundamental_matrix(cp, t2)
    np.testing.assert_allclose(lhs, rhs, rtol=1e-12, atol=1e-14)


def test_sigma_to_zero_limit():
    near = discretize(ContinuousPlant(-1e-9), 100.0)
    zero = discretize(ContinuousPlant(0.0), 100.0)
    np.testing.assert_allclose(near.b / 1e-9, zero.b, rtol=1e-7)
    np.testing.assert_allclose(near.a, zero.a, atol=1e-10)


def test_invalid_inputs():
    with pytest.raises(ValueError):
        ContinuousPlant(1.0)
    with pytest.raises(ValueError):
        discretize(ContinuousPlant(), 0.0)
    with pytest.raises(ValueError):
        fundamental_matrix(ContinuousPlant(), -1.0)


def test_unit_dc_velocity_gain():
    sp = discretize(ContinuousPlant(-10.0), 100.0)
    y = step_discrete(sp, np.ones(3000))
    assert (y[-1] - y[-2]) * 100.0 == pytest.approx(1.0, rel=1e-9)


def test_intra_sample_response_hits_sample_values(plant):
    u = np.sin(np.arange(40) / 5.0)
    t, y, _ = intra_sample_response(ContinuousPlant(-10.0), 100.0, u, oversample=8)
    assert len(t) == 40 * 8 + 1
    np.testing.assert_allclose(y[::8], step_discrete(plant, u), atol=1e-14)
    assert np.all(np.diff(t) > 0)


def test_dict_round_trip(plant):
    data = plant.to_dict()
    assert set(data) == {"sigma", "fs", "a_p", "b_p"}
    back = SampledPlant.from_dict(data)
    np.testing.assert_array_equal(back.b, plant.b)
