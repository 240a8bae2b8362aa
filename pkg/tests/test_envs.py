import math

import numpy as np
import pytest

from symq.envs import Pendulum, Reacher, make_env, wrap_angle
from symq.errors import ConfigError, DataError


def pendulum_oracle(theta, theta_dot, u, g=10.0, m=1.0, l=1.0, dt=0.05):
    """Semi-implicit Euler on theta'' = 3g/(2l) sin(theta) + 3/(m l^2) u with |theta_dot| <= 8."""
    acc = 3 * g / (2 * l) * math.sin(theta) + 3.0 / (m * l * l) * u
    w = max(-8.0, min(8.0, theta_dot + dt * acc))
    return theta + dt * w, w


class TestPendulum:
    def test_reset_deterministic(self):
        env = Pendulum()
        a = env.reset(np.random.default_rng(5))
        b = env.reset(np.random.default_rng(5))
        assert np.array_equal(a, b)

    def test_reset_ranges(self):
        env = Pendulum()
        rng = np.random.default_rng(0)
        states = np.array([env.reset(rng) for _ in range(2000)])
        assert np.all(np.abs(states[:, 0]) <= math.pi)
        assert np.all(np.abs(states[:, 1]) <= 1.0)
        # both ranges are actually covered
        assert states[:, 0].min() < -3.0 and states[:, 0].max() > 3.0

    def test_upright_equilibrium(self):
        env = Pendulum()
        env.reset(np.random.default_rng(0))
        res = env.step(np.array([0.0, 0.0]), np.array([0.0]))
        assert res.reward == 0.0
        assert np.array_equal(res.next_state, [0.0, 0.0])

    def test_hanging_reward(self):
        env = Pendulum()
        env.reset(np.random.default_rng(0))
        res = env.step(np.array([math.pi, 0.0]), np.array([0.0]))
        assert res.reward == -(math.pi**2)

    def test_one_step_matches_oracle(self):
        env = Pendulum()
        env.reset(np.random.default_rng(0))
        res = env.step(np.array([math.pi / 2, 0.0]), np.array([1.0]))
        want = pendulum_oracle(math.pi / 2, 0.0, 1.0)
        assert np.allclose(res.next_state, want, rtol=0, atol=1e-12)

    def test_action_clamped(self):
        env = Pendulum()
        env.reset(np.random.default_rng(0))
        a = env.step(np.array([0.3, 0.1]), np.array([10.0]))
        env.reset(np.random.default_rng(0))
        b = env.step(np.array([0.3, 0.1]), np.array([2.0]))
        assert np.array_equal(a.next_state, b.next_state) and a.reward == b.reward

    @pytest.mark.parametrize("theta, expected", [(0.0, [1.0, 0.0, 0.7]), (math.pi, [-1.0, 0.0, 0.7])])
    def test_observe(self, theta, expected):
        obs = Pendulum().observe(np.array([theta, 0.7]))
        assert np.allclose(obs, expected, atol=1e-15)

    def test_reward_bounds_and_episode_length(self):
        env = Pendulum()
        rng = np.random.default_rng(3)
        lower = -(math.pi**2 + 0.1 * 64 + 0.001 * 4)
        state = env.reset(rng)
        for t in range(1, 201):
            res = env.step(state, rng.uniform(-2, 2, size=1))
            obs = env.observe(res.next_state)
            assert obs[0] ** 2 + obs[1] ** 2 == pytest.approx(1.0, abs=1e-12)
            assert lower <= res.reward <= 0.0
            assert res.done == (t == 200)
            assert not res.terminal
            state = res.next_state

    def test_non_finite(self):
        env = Pendulum()
        with pytest.raises(DataError):
            env.step(np.array([np.nan, 0.0]), np.array([0.0]))
        with pytest.raises(DataError):
            env.step(np.array([0.0, 0.0]), np.array([np.inf]))

    def test_trajectory_determinism(self):
        def rollout():
            env = Pendulum()
            rng = np.random.default_rng(9)
            s = env.reset(rng)
            out = []
            for u in np.linspace(-2, 2, 50):
                r = env.step(s, np.array([u]))
                s = r.next_state
                out.append((s.copy(), r.reward))
            return out

        a, b = rollout(), rollout()
        assert all(np.array_equal(x[0], y[0]) and x[1] == y[1] for x, y in zip(a, b))


def test_wrap_angle():
    assert wrap_angle(math.pi) == math.pi
    assert wrap_angle(-math.pi) == math.pi
    assert wrap_angle(3 * math.pi / 2) == pytest.approx(-math.pi / 2)
    assert wrap_angle(0.0) == 0.0


class TestReacher:
    def test_reset_in_bounds(self):
        env = Reacher()
        rng = np.random.default_rng(0)
        for _ in range(200):
            s = env.reset(rng)
            assert np.all(np.abs(s[:2]) <= 1.0) and np.all(np.abs(s[4:]) <= 1.0)
            assert np.array_equal(s[2:4], [0.0, 0.0])

    def test_episode_and_reward(self):
        env = Reacher()
        rng = np.random.default_rng(1)
        s = env.reset(rng)
        for t in range(1, 101):
            r = env.step(s, np.array([1.0, 1.0]))
            assert np.all(np.abs(r.next_state[:2]) <= 1.0)
            assert r.reward == pytest.approx(-np.linalg.norm(r.next_state[:2] - r.next_state[4:]))
            assert r.done == (t == 100)
            s = r.next_state

    def test_observe_goal_offset(self):
        obs = Reacher().observe(np.array([0.1, 0.2, 0.3, 0.4, 0.5, -0.5]))
        assert np.allclose(obs, [0.1, 0.2, 0.3, 0.4, 0.4, -0.7])


def test_make_env():
    assert isinstance(make_env("pendulum"), Pendulum)
    assert isinstance(make_env("reacher"), Reacher)
    with pytest.raises(ConfigError):
        make_env("humanoid")
