import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from swarmcert.errors import BlowUpError, InputError, StepSizeError
from swarmcert.integrate import IntegratorConfig, integrate, sample_times, step_rk4
from swarmcert.model import LinearCoupling, make_model, vector_field
from swarmcert.scenarios import helix_reference, parabolic_matrix


def decay(t, y):
    return -y


def oscillator(t, y):
    return np.array([y[1], -y[0]])


def helix_error(h, t_end=2.0, lam=100.0, a=0.6):
    b = math.sqrt((1 - a * a) / lam)
    model = make_model(2, 3, LinearCoupling.from_matrix(parabolic_matrix(2, lam)))
    s0 = helix_reference(a, b, lam, 0.0)
    cfg = IntegratorConfig(t_end=t_end, sample_every=t_end, method="rk4", h=h)
    traj = integrate(vector_field(model), np.stack([s0.r, s0.v]), cfg)
    return np.abs(traj.r[-1] - helix_reference(a, b, lam, t_end).r).max()


class TestStepRK4:
    def test_exponential(self):
        y = step_rk4(decay, np.array([1.0]), 0.1)
        assert abs(y[0] - math.exp(-0.1)) <= 1e-7

    def test_oscillator_period(self):
        h = 1e-3
        steps = round(2 * math.pi / h)
        h = 2 * math.pi / steps
        y = np.array([1.0, 0.0])
        for i in range(steps):
            y = step_rk4(oscillator, y, h, i * h)
        np.testing.assert_allclose(y, [1.0, 0.0], atol=1e-9)

    def test_zero_field(self):
        y0 = np.arange(6.0).reshape(2, 3)
        np.testing.assert_array_equal(step_rk4(lambda t, y: np.zeros_like(y), y0, 0.5), y0)

    def test_non_finite_stage(self):
        with pytest.raises(BlowUpError) as info:
            step_rk4(lambda t, y: y * np.inf if t > 0.01 else y, np.array([1.0]), 0.1, t=0.02)
        assert "t=" in str(info.value)


class TestConfig:
    def test_validation(self):
        with pytest.raises(InputError):
            IntegratorConfig(t_end=1, sample_every=0.1, method="euler")
        with pytest.raises(InputError):
            IntegratorConfig(t_end=1, sample_every=0.1, h=0.0)
        with pytest.raises(InputError):
            IntegratorConfig(t_end=1, sample_every=0.1, method="embedded45", abs_tol=0.0)
        with pytest.raises(InputError):
            IntegratorConfig(t_end=1, sample_every=0.1, method="embedded45", h_min=1.0, h_max=0.1)
        with pytest.raises(InputError):
            IntegratorConfig.from_dict({"t_end": 1, "sample_every": 0.1, "tolerance": 1e-6})

    def test_round_trip(self):
        cfg = IntegratorConfig(t_end=3, sample_every=0.2, method="embedded45", abs_tol=1e-7)
        assert IntegratorConfig.from_dict(cfg.to_dict()) == cfg


class TestSampling:
    @pytest.mark.parametrize("t_end,every,count", [(100.0, 0.1, 1001), (1.0, 0.3, 5), (2.0, 2.0, 2)])
    def test_count(self, t_end, every, count):
        ts = sample_times(0.0, t_end, every)
        assert len(ts) == count == math.ceil(t_end / every - 1e-9) + 1
        assert ts[-1] == t_end
        assert np.all(np.diff(ts) > 0)

    def test_zero_span(self):
        traj = integrate(decay, np.array([1.0]), IntegratorConfig(t_end=0.0, sample_every=0.1))
        assert len(traj) == 1 and traj.states[0, 0] == 1.0

    @settings(max_examples=25, deadline=None)
    @given(st.floats(0.05, 5.0), st.floats(0.01, 1.0), st.sampled_from(["rk4", "embedded45"]))
    def test_trajectory_invariants(self, t_end, every, method):
        cfg = IntegratorConfig(t_end=t_end, sample_every=every, method=method, h=1e-2)
        traj = integrate(decay, np.array([1.0, -2.0]), cfg)
        assert traj.times[0] == 0.0 and traj.times[-1] == t_end
        assert np.all(np.diff(traj.times) > 0)
        np.testing.assert_allclose(traj.states[:, 0], np.exp(-traj.times), atol=1e-7)


class TestAdaptive:
    def test_exponential_accuracy(self):
        cfg = IntegratorConfig(t_end=10.0, sample_every=0.5, method="embedded45", abs_tol=1e-12, rel_tol=1e-12)
        traj = integrate(decay, np.array([1.0]), cfg)
        np.testing.assert_allclose(traj.states[:, 0], np.exp(-traj.times), rtol=1e-9, atol=1e-9)
        assert traj.accepted > 0

    def test_dense_output_between_steps(self):
        cfg = IntegratorConfig(t_end=20.0, sample_every=0.01, method="embedded45", abs_tol=1e-10, rel_tol=1e-10)
        traj = integrate(oscillator, np.array([1.0, 0.0]), cfg)
        assert traj.accepted < len(traj)  # samples really were interpolated
        np.testing.assert_allclose(traj.states[:, 0], np.cos(traj.times), atol=1e-7)

    def test_tolerance_controls_error(self):
        errs = []
        for tol in (1e-6, 1e-9):
            cfg = IntegratorConfig(t_end=10.0, sample_every=10.0, method="embedded45", abs_tol=tol, rel_tol=tol)
            errs.append(abs(integrate(oscillator, np.array([1.0, 0.0]), cfg).states[-1, 0] - math.cos(10.0)))
        assert errs[1] < errs[0] / 100

    def test_deterministic(self):
        cfg = IntegratorConfig(t_end=5.0, sample_every=0.1, method="embedded45")
        y0 = np.random.default_rng(0).standard_normal((2, 3, 2))
        f = vector_field(make_model(3, 2, LinearCoupling.from_matrix(parabolic_matrix(3))))
        a, b = integrate(f, y0, cfg), integrate(f, y0, cfg)
        assert np.array_equal(a.states, b.states)

    def test_blow_up_reports_time(self):
        cfg = IntegratorConfig(t_end=5.0, sample_every=0.1, method="embedded45", h_min=1e-300)
        with pytest.raises((BlowUpError, StepSizeError)) as info:
            integrate(lambda t, y: y**2, np.array([1.0]), cfg)
        assert "t=" in str(info.value)

    def test_step_underflow(self):
        # stiff decay needs steps far below h_min for stability
        cfg = IntegratorConfig(t_end=5.0, sample_every=0.1, method="embedded45", h_min=1e-3)
        with pytest.raises(StepSizeError):
            integrate(lambda t, y: -1e6 * y, np.array([1.0]), cfg)


class TestHelix:
    def test_closed_form(self):
        a, b = 0.6, 0.8
        model = make_model(2, 3, LinearCoupling.from_matrix(parabolic_matrix(2)))
        s0 = helix_reference(a, b, 1.0, 0.0)
        cfg = IntegratorConfig(t_end=10.0, sample_every=0.5, method="rk4", h=1e-3)
        traj = integrate(vector_field(model), np.stack([s0.r, s0.v]), cfg)
        exact = np.array([helix_reference(a, b, 1.0, t).r for t in traj.times])
        assert np.abs(traj.r - exact).max() <= 1e-6

    def test_fourth_order(self):
        hs = np.array([4e-3, 2e-3, 1e-3])
        errs = np.array([helix_error(h) for h in hs])
        order = np.polyfit(np.log(hs), np.log(errs), 1)[0]
        assert 3.7 <= order <= 4.3
