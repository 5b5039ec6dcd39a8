import math

import numpy as np
import pytest
import torch
from hypothesis import given, settings
from hypothesis import strategies as st

from lidardiff.diffusion import (
    LOG_SNR_MAX,
    LOG_SNR_MIN,
    forward_diffuse,
    log_snr_of,
    loss,
    predict_x,
    reverse_coefficients,
    reverse_step,
    schedule,
    transition,
    transition_coefficients,
)
from lidardiff.errors import DomainError, OrderingError, ShapeError


def random_pairs(n, seed=0):
    rng = np.random.default_rng(seed)
    a, b = rng.uniform(0, 1, n), rng.uniform(0, 1, n)
    s, t = np.minimum(a, b), np.maximum(a, b)
    keep = (t - s > 1e-9) & (s < 1)
    return list(zip(s[keep], t[keep]))


class TestSchedule:
    def test_endpoints(self):
        lv = schedule(0.0)
        assert (lv.alpha, lv.sigma, lv.log_snr) == (1.0, 0.0, LOG_SNR_MAX)
        lv = schedule(1.0)
        assert (lv.alpha, lv.sigma, lv.log_snr) == (0.0, 1.0, LOG_SNR_MIN)

    def test_midpoint(self):
        lv = schedule(0.5)
        assert lv.alpha == pytest.approx(math.sqrt(2) / 2, abs=1e-15)
        assert lv.sigma == pytest.approx(math.sqrt(2) / 2, abs=1e-15)
        assert lv.log_snr == pytest.approx(0.0, abs=1e-12)

    @pytest.mark.parametrize("t", [-0.01, 1.01, float("nan")])
    def test_domain(self, t):
        with pytest.raises(DomainError):
            schedule(t)

    @settings(max_examples=300)
    @given(st.floats(0.0, 1.0))
    def test_invariants(self, t):
        lv = schedule(t)
        assert abs(lv.alpha**2 + lv.sigma**2 - 1) <= 1e-12
        assert LOG_SNR_MIN <= lv.log_snr <= LOG_SNR_MAX
        raw = 2 * (math.log(lv.alpha) - math.log(lv.sigma)) if lv.alpha > 0 and lv.sigma > 0 else None
        if raw is not None and LOG_SNR_MIN < raw < LOG_SNR_MAX:
            assert lv.log_snr == pytest.approx(raw, abs=1e-9)
            # log-SNR agrees with log cot^2(pi t / 2)
            assert lv.log_snr == pytest.approx(2 * math.log(1 / math.tan(math.pi * t / 2)), abs=1e-9)

    def test_monotone(self):
        ts = np.linspace(0, 1, 2001)
        levels = [schedule(t) for t in ts]
        assert np.all(np.diff([lv.alpha for lv in levels]) <= 0)
        assert np.all(np.diff([lv.sigma for lv in levels]) >= 0)
        assert np.all(np.diff([lv.log_snr for lv in levels]) <= 0)

    def test_vectorised_log_snr_matches_scalar(self):
        ts = np.linspace(0.001, 0.999, 101)
        expected = [schedule(t).log_snr for t in ts]
        np.testing.assert_allclose(log_snr_of(ts), expected, atol=1e-9)
        np.testing.assert_allclose(log_snr_of(torch.as_tensor(ts)).numpy(), expected, atol=1e-9)
        assert log_snr_of(np.array([0.0]))[0] == LOG_SNR_MAX


class TestForward:
    def test_endpoints(self):
        rng = np.random.default_rng(0)
        x, eps = rng.uniform(-1, 1, (2, 4, 8)), rng.standard_normal((2, 4, 8))
        np.testing.assert_array_equal(forward_diffuse(x, 0.0, eps), x)
        np.testing.assert_array_equal(forward_diffuse(x, 1.0, eps), eps)

    def test_midpoint_value(self):
        z = forward_diffuse(np.zeros((2, 3, 3)), 0.5, np.ones((2, 3, 3)))
        np.testing.assert_allclose(z, math.sqrt(2) / 2, atol=1e-15)

    def test_shape_mismatch(self):
        with pytest.raises(ShapeError):
            forward_diffuse(np.zeros((2, 3)), 0.5, np.zeros((3, 2)))

    @pytest.mark.parametrize("t", [0.1, 0.5, 0.9])
    def test_variance_preservation_monte_carlo(self, t):
        n = 100_000
        eps = np.random.default_rng(int(t * 100)).standard_normal(n)
        z = forward_diffuse(np.zeros(n), t, eps)
        target = schedule(t).sigma ** 2
        se = target * math.sqrt(2 / (n - 1))
        assert abs(z.var(ddof=1) - target) < 3 * se


class TestTransition:
    def test_identities(self):
        for s, t in random_pairs(100):
            a_ts, var_ts = transition_coefficients(s, t)
            ls, lt = schedule(s), schedule(t)
            assert abs(a_ts * ls.alpha - lt.alpha) <= 1e-12
            assert abs(a_ts**2 * ls.sigma**2 + var_ts - lt.sigma**2) <= 1e-12

    def test_limit(self):
        z = np.random.default_rng(0).standard_normal((2, 4, 4))
        eps = np.random.default_rng(1).standard_normal((2, 4, 4))
        t, gap = 0.6, 1e-12
        a_ts, var_ts = transition_coefficients(t - gap, t)
        assert a_ts == pytest.approx(1.0, abs=1e-11)
        # the transition std shrinks like sqrt(gap), not like gap
        expected_var = 0.5 * math.pi * gap * math.sin(math.pi * t) / math.cos(math.pi * t / 2) ** 2
        assert var_ts == pytest.approx(expected_var, rel=1e-3)
        out = transition(z, t - gap, t, eps)
        np.testing.assert_allclose(out, z, atol=math.sqrt(var_ts) * np.abs(eps).max() + 1e-10)
        assert np.abs(out - z).max() < 1e-5

    def test_from_zero_is_forward(self):
        rng = np.random.default_rng(2)
        x, eps = rng.uniform(-1, 1, (2, 5, 5)), rng.standard_normal((2, 5, 5))
        for t in (0.2, 0.7, 1.0):
            np.testing.assert_allclose(transition(x, 0.0, t, eps), forward_diffuse(x, t, eps), atol=1e-15)

    def test_errors(self):
        z = np.zeros((2, 2))
        with pytest.raises(OrderingError):
            transition(z, 0.5, 0.5, z)
        with pytest.raises(OrderingError):
            transition(z, 0.7, 0.5, z)


class TestReverse:
    def test_final_step_is_deterministic(self):
        rng = np.random.default_rng(0)
        z, x, noise = rng.standard_normal((3, 2, 4, 4))
        a = reverse_step(z, x, 0.0, 0.3, noise)
        b = reverse_step(z, x, 0.0, 0.3, 100 * noise)
        np.testing.assert_array_equal(a, b)
        np.testing.assert_allclose(a, x, atol=1e-15)

    def test_consistent_inputs_give_alpha_s_x(self):
        for s, t in random_pairs(100, seed=1):
            c_z, c_x, _ = reverse_coefficients(s, t)
            assert abs(c_z * schedule(t).alpha + c_x - schedule(s).alpha) <= 1e-12

    def test_posterior_variance_bounded(self):
        for s, t in random_pairs(200, seed=2):
            _, _, post_var = reverse_coefficients(s, t)
            assert 0 <= post_var <= schedule(s).sigma ** 2 + 1e-15

    def test_exact_posterior_matches_bayes(self):
        # for fixed x, q(z_s | z_t, x) from the joint Gaussian of (z_s, z_t)
        for s, t in random_pairs(20, seed=3):
            a_ts, var_ts = transition_coefficients(s, t)
            ls, lt = schedule(s), schedule(t)
            cov_st = a_ts * ls.sigma**2
            mean_coef_z = cov_st / lt.sigma**2
            post_var = ls.sigma**2 - cov_st**2 / lt.sigma**2
            c_z, c_x, pv = reverse_coefficients(s, t)
            assert c_z == pytest.approx(mean_coef_z, abs=1e-12)
            assert c_x == pytest.approx(ls.alpha - mean_coef_z * lt.alpha, abs=1e-12)
            assert pv == pytest.approx(post_var, abs=1e-12)


class TestPredictX:
    @pytest.mark.parametrize("t", [0.05, 0.5, 0.95, 0.999])
    def test_inverts_forward(self, t):
        rng = np.random.default_rng(0)
        x, eps = rng.uniform(-1, 1, (2, 4, 4)), rng.standard_normal((2, 4, 4))
        z = forward_diffuse(x, t, eps)
        np.testing.assert_allclose(predict_x(z, eps, schedule(t)), x, atol=1e-9)

    def test_t_zero(self):
        z = np.random.default_rng(0).uniform(-1, 1, (2, 3, 3))
        np.testing.assert_array_equal(predict_x(z, np.ones_like(z), schedule(0.0)), z)

    def test_pure_noise_prediction(self):
        eps = np.random.default_rng(0).standard_normal((2, 3, 3))
        lv = schedule(0.4)
        np.testing.assert_allclose(predict_x(lv.sigma * eps, eps, lv), 0.0, atol=1e-15)

    def test_clamped_and_finite_at_t1(self):
        z = np.random.default_rng(0).standard_normal((2, 3, 3))
        out = predict_x(z, np.zeros_like(z), schedule(1.0))
        assert np.all(np.isfinite(out)) and np.abs(out).max() <= 1.0


class TestLoss:
    @pytest.mark.parametrize("kind", ["l2", "l1", "huber"])
    def test_zero(self, kind):
        e = np.random.default_rng(0).standard_normal((2, 4, 4))
        assert loss(e, e, kind) == 0.0

    def test_values_large_delta(self):
        eps, hat = np.full((2, 3, 3), 2.0), np.zeros((2, 3, 3))
        assert loss(eps, hat, "l2") == 4.0
        assert loss(eps, hat, "l1") == 2.0
        assert loss(eps, hat, "huber") == 1.5

    def test_huber_quadratic_branch(self):
        eps, hat = np.full((4,), 0.5), np.zeros(4)
        assert loss(eps, hat, "huber") == pytest.approx(0.125)
        assert loss(eps, hat, "huber") == pytest.approx(loss(eps, hat, "l2") / 2)

    def test_torch_and_numpy_agree(self):
        rng = np.random.default_rng(5)
        a, b = rng.standard_normal((2, 2, 8, 8)) * 2
        for kind in ("l2", "l1", "huber"):
            assert loss(torch.as_tensor(a), torch.as_tensor(b), kind).item() == pytest.approx(loss(a, b, kind))

    def test_errors(self):
        with pytest.raises(ShapeError):
            loss(np.zeros(3), np.zeros(4))
        with pytest.raises(DomainError):
            loss(np.zeros(3), np.zeros(3), "l3")

    @settings(max_examples=100)
    @given(st.lists(st.floats(-5, 5), min_size=1, max_size=20), st.floats(1.0, 4.0),
           st.sampled_from(["l2", "l1", "huber"]))
    def test_monotone_in_scale(self, values, scale, kind):
        delta = np.asarray(values)
        zero = np.zeros_like(delta)
        assert loss(scale * delta, zero, kind) >= loss(delta, zero, kind) - 1e-12
