import math

import numpy as np
import pytest

from perivir import (
    ModelParameters,
    SinusoidalCoefficient,
    State,
    Trajectory,
    coefficient_at,
    incidence,
    jacobian,
    rhs,
)
from perivir.model import clamp_small_negatives, stacked_vector_field, vector_field

from .helpers import OMEGA, fd_jacobian, baseline_params, rhs_by_hand, skewed_params


class TestSinusoidalCoefficient:
    def test_zero_amplitude_is_constant(self):
        c = SinusoidalCoefficient(0.1, 0.0, OMEGA)
        assert coefficient_at(c, 5.0) == 0.1

    def test_quarter_period_peak(self):
        # sin(pi/2) = 1 at t = 6 for a 24-hour period
        c = SinusoidalCoefficient(0.1, 0.05, OMEGA)
        assert coefficient_at(c, 6.0) == pytest.approx(0.15, abs=1e-12)

    def test_full_period_returns_to_mean(self):
        c = SinusoidalCoefficient(0.1, 0.05, OMEGA)
        assert coefficient_at(c, 24.0) == pytest.approx(0.1, abs=1e-12)

    def test_periodicity_on_grid(self):
        c = SinusoidalCoefficient(0.2, 0.15, OMEGA)
        ts = np.linspace(0.0, 10.0 * c.period, 211)
        assert np.max(np.abs(c.value(ts + c.period) - c.value(ts))) < 1e-12

    def test_strict_positivity(self):
        c = SinusoidalCoefficient(0.1, 0.0999, OMEGA)
        ts = np.linspace(0.0, c.period, 1001)
        assert np.min(c.value(ts)) > 0.0

    @pytest.mark.parametrize("mean,amp,w", [
        (0.1, 0.1, OMEGA),    # amplitude == mean
        (0.1, 0.2, OMEGA),    # amplitude > mean
        (-0.1, 0.0, OMEGA),   # negative mean
        (0.1, -0.01, OMEGA),  # negative amplitude
        (0.1, 0.05, 0.0),     # zero frequency
        (0.1, 0.05, -1.0),
    ])
    def test_invalid_coefficients_rejected(self, mean, amp, w):
        with pytest.raises(ValueError):
            SinusoidalCoefficient(mean, amp, w)

    def test_identically_zero_coefficient_allowed(self):
        c = SinusoidalCoefficient(0.0, 0.0, OMEGA)
        assert c.is_zero and c.value(3.0) == 0.0


class TestModelParameters:
    def test_period_derived_from_frequency(self):
        assert baseline_params().period == pytest.approx(24.0, rel=1e-15)

    def test_mismatched_frequencies_rejected(self):
        mu = SinusoidalCoefficient(0.1, 0.05, OMEGA)
        beta = SinusoidalCoefficient(0.3, 0.1, OMEGA * 2)
        d = SinusoidalCoefficient(0.01, 0.005, OMEGA)
        with pytest.raises(ValueError):
            ModelParameters(mu=mu, beta=beta, d=d, k=0.2, delta=0.09, p=0.5,
                            c=0.18, c1=0.1, c2=0.1)

    def test_zero_mu_or_d_rejected(self):
        zero = SinusoidalCoefficient(0.0, 0.0, OMEGA)
        mu, beta, d = (SinusoidalCoefficient(0.1, 0.05, OMEGA),
                       SinusoidalCoefficient(0.3, 0.1, OMEGA),
                       SinusoidalCoefficient(0.01, 0.005, OMEGA))
        with pytest.raises(ValueError):
            ModelParameters(mu=zero, beta=beta, d=d, k=0.2, delta=0.09, p=0.5,
                            c=0.18, c1=0.1, c2=0.1)
        with pytest.raises(ValueError):
            ModelParameters(mu=mu, beta=beta, d=zero, k=0.2, delta=0.09, p=0.5,
                            c=0.18, c1=0.1, c2=0.1)

    @pytest.mark.parametrize("field,value", [
        ("k", 0.0), ("delta", -0.1), ("p", 0.0), ("c", -1.0),
        ("c1", -0.01), ("c2", -0.01),
    ])
    def test_scalar_invariants(self, field, value):
        kwargs = dict(k=0.2, delta=0.09, p=0.5, c=0.18, c1=0.1, c2=0.1)
        kwargs[field] = value
        mu, beta, d = (SinusoidalCoefficient(0.1, 0.05, OMEGA),
                       SinusoidalCoefficient(0.3, 0.1, OMEGA),
                       SinusoidalCoefficient(0.01, 0.005, OMEGA))
        with pytest.raises(ValueError):
            ModelParameters(mu=mu, beta=beta, d=d, **kwargs)

    def test_hash_id_stable_and_distinct(self):
        a, b = baseline_params(), baseline_params()
        assert a.hash_id() == b.hash_id()
        assert a.hash_id() != skewed_params().hash_id()


class TestIncidence:
    def test_no_virus_no_infection(self):
        assert incidence(0.3, 10.0, 0.0, 0.1, 0.1) == 0.0

    def test_mass_action_limit(self):
        assert incidence(0.3, 2.0, 1.0, 0.0, 0.0) == pytest.approx(0.6, rel=1e-15)

    def test_hand_value(self):
        # 0.3 * 10 * 5 / ((1 + 1)(1 + 0.5)) = 15 / 3
        assert incidence(0.3, 10.0, 5.0, 0.1, 0.1) == pytest.approx(5.0, rel=1e-15)

    def test_monotone_in_both_densities(self):
        ts = np.linspace(0.0, 50.0, 101)
        vals_t = incidence(0.3, ts, 7.0, 0.1, 0.2)
        vals_v = incidence(0.3, 7.0, ts, 0.1, 0.2)
        assert np.all(np.diff(vals_t) >= 0.0)
        assert np.all(np.diff(vals_v) >= 0.0)

    def test_saturation_bound(self):
        beta_t, c1, c2 = 0.3, 0.1, 0.2
        big = incidence(beta_t, 1e9, 1e9, c1, c2)
        assert big < beta_t / (c1 * c2)
        assert big == pytest.approx(beta_t / (c1 * c2), rel=1e-6)

    def test_bounded_by_mass_action(self):
        rng = np.random.default_rng(7)
        for _ in range(50):
            T, V = rng.uniform(0, 30, size=2)
            assert incidence(0.3, T, V, 0.1, 0.1) <= 0.3 * T * V + 1e-15


class TestRhs:
    def test_virus_free_balance_at_baseline_start(self):
        # mu(0) = 0.1, d(0) = 0.01 and V = 0: dT = 0.1 - 0.01*10 = 0
        out = rhs(0.0, State(10.0, 0.0, 0.0, 0.0), baseline_params())
        assert np.allclose(out, np.zeros(4), atol=1e-15)

    def test_origin_dynamics(self):
        params = baseline_params()
        for t in (0.0, 3.7, 11.0):
            out = rhs(t, np.zeros(4), params)
            assert out[0] == pytest.approx(params.mu.value(t), rel=1e-15)
            assert np.all(out[1:] == 0.0)

    def test_matches_hand_evaluation(self):
        params = baseline_params()
        rng = np.random.default_rng(42)
        for _ in range(25):
            t = rng.uniform(0.0, 48.0)
            y = rng.uniform(0.0, 20.0, size=4)
            assert np.allclose(rhs(t, y, params), rhs_by_hand(t, y, params),
                               rtol=1e-14, atol=1e-16)

    def test_infection_face_invariant(self):
        params = baseline_params()
        out = rhs(2.5, np.array([7.3, 0.0, 0.0, 0.0]), params)
        assert np.all(out[1:] == 0.0)

    def test_cell_bookkeeping_identity(self):
        # dT + dE + dI = mu - d*(T+E+I) - delta*I
        params = baseline_params()
        rng = np.random.default_rng(3)
        for _ in range(20):
            t = rng.uniform(0.0, 24.0)
            y = rng.uniform(0.0, 15.0, size=4)
            out = rhs(t, y, params)
            lhs = out[0] + out[1] + out[2]
            rhs_val = (params.mu.value(t) - params.d.value(t) * (y[0] + y[1] + y[2])
                       - params.delta * y[2])
            assert lhs == pytest.approx(rhs_val, rel=1e-12, abs=1e-14)

    def test_batched_matches_rowwise(self):
        params = baseline_params()
        rng = np.random.default_rng(11)
        batch = rng.uniform(0.0, 10.0, size=(6, 4))
        out = rhs(1.3, batch, params)
        for i in range(6):
            assert np.array_equal(out[i], rhs(1.3, batch[i], params))

    def test_stacked_field_matches(self):
        params = baseline_params()
        rng = np.random.default_rng(12)
        flat = rng.uniform(0.0, 10.0, size=12)
        f = stacked_vector_field(params)
        g = vector_field(params)
        expected = np.concatenate([g(0.7, flat[i:i + 4]) for i in (0, 4, 8)])
        assert np.allclose(f(0.7, flat), expected, rtol=1e-15)


class TestJacobian:
    def test_structure_at_virus_free_state(self):
        params = baseline_params()
        t = 4.2
        T = 9.0
        jac = jacobian(t, np.array([T, 0.0, 0.0, 0.0]), params)
        d_t = params.d.value(t)
        beta_t = params.beta.value(t)
        assert jac[0, 3] == pytest.approx(-beta_t * T / (1.0 + params.c1 * T), rel=1e-14)
        assert jac[0, 0] == pytest.approx(-d_t, rel=1e-14)
        assert jac[1, 1] == pytest.approx(-(params.k + d_t), rel=1e-14)
        assert jac[2, 2] == pytest.approx(-(params.delta + d_t), rel=1e-14)
        assert jac[3, 3] == pytest.approx(-params.c, rel=1e-14)
        assert np.all(jac[1:, 0] == 0.0)  # block triangular against the T direction

    def test_mass_action_limit(self):
        mu, beta, d = (SinusoidalCoefficient(0.1, 0.05, OMEGA),
                       SinusoidalCoefficient(0.3, 0.1, OMEGA),
                       SinusoidalCoefficient(0.01, 0.005, OMEGA))
        params = ModelParameters(mu=mu, beta=beta, d=d, k=0.2, delta=0.09,
                                 p=0.5, c=0.18, c1=0.0, c2=0.0)
        t, T, V = 1.0, 8.0, 3.0
        jac = jacobian(t, np.array([T, 1.0, 1.0, V]), params)
        beta_t = params.beta.value(t)
        assert jac[1, 3] == pytest.approx(beta_t * T, rel=1e-14)
        assert jac[1, 0] == pytest.approx(beta_t * V, rel=1e-14)

    def test_matches_finite_differences(self):
        params = skewed_params()
        f = vector_field(params)
        rng = np.random.default_rng(5)
        for _ in range(15):
            t = rng.uniform(0.0, 24.0)
            y = rng.uniform(0.5, 15.0, size=4)
            jac = jacobian(t, y, params)
            fd = fd_jacobian(f, t, y, h=1e-6)
            scale = np.maximum(np.abs(jac), 1e-3)
            assert np.max(np.abs(jac - fd) / scale) < 1e-5


class TestStateAndTrajectory:
    def test_state_rejects_negative(self):
        with pytest.raises(ValueError):
            State(1.0, -0.1, 0.0, 0.0)

    def test_state_roundtrip(self):
        s = State(1.0, 2.0, 3.0, 4.0)
        assert State.from_array(s.as_array()) == s
        assert s.infection_max == 4.0

    def test_trajectory_requires_increasing_times(self):
        with pytest.raises(ValueError):
            Trajectory(np.array([0.0, 1.0, 1.0]), np.zeros((3, 4)))

    def test_trajectory_window(self):
        traj = Trajectory(np.linspace(0.0, 10.0, 11), np.zeros((11, 4)), "h")
        w = traj.window(3.0, 7.0)
        assert w.times[0] == 3.0 and w.times[-1] == 7.0 and len(w) == 5
        assert w.params_hash == "h"

    def test_clamp_small_negatives(self):
        # rounding band is 4x the absolute tolerance
        y = np.array([1.0, -5e-10, -3.9e-9, -5e-9])
        out = clamp_small_negatives(y, 1e-9)
        assert out[1] == 0.0
        assert out[2] == 0.0
        assert out[3] == -5e-9  # beyond the band: left for the monitor to flag
        assert y[1] == -5e-10   # input untouched
