"""Small continuous-control tasks with time-limit-only episodes.

``pendulum`` is the classic torque-limited swing-up (angle 0 is upright).
``reacher`` is a damped 2-D point mass that must move to a random goal.
Environments keep only an elapsed-step counter; the physical state is passed
in and out explicitly so that single transitions can be checked in isolation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DataError


@dataclass(frozen=True)
class EnvSpec:
    state_dim: int
    action_dim: int
    action_low: np.ndarray
    action_high: np.ndarray
    max_episode_steps: int
    obs_dim: int


@dataclass
class StepResult:
    next_state: np.ndarray
    reward: float
    done: bool
    # True only for absorbing states; none of the bundled tasks has them.
    terminal: bool = False


def wrap_angle(theta):
    """Map an angle to (-pi, pi]."""
    wrapped = -((-theta + math.pi) % (2.0 * math.pi) - math.pi)
    return wrapped


def _finite(name, arr):
    arr = np.asarray(arr, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise DataError(f"{name} must be finite")
    return arr


class Env:
    spec: EnvSpec
    name: str

    def __init__(self):
        self.elapsed = 0

    def reset(self, rng: np.random.Generator) -> np.ndarray:
        self.elapsed = 0
        return self._initial_state(rng)

    def step(self, state, action) -> StepResult:
        state = _finite("state", state)
        action = np.clip(_finite("action", action), self.spec.action_low, self.spec.action_high)
        next_state, reward = self.dynamics(state, action)
        self.elapsed += 1
        return StepResult(next_state, float(reward), self.elapsed >= self.spec.max_episode_steps)

    def _initial_state(self, rng):
        raise NotImplementedError

    def dynamics(self, state, action):
        raise NotImplementedError

    def observe(self, state) -> np.ndarray:
        raise NotImplementedError


class Pendulum(Env):
    """State (theta, theta_dot); observation (cos theta, sin theta, theta_dot)."""

    name = "pendulum"
    g = 10.0
    mass = 1.0
    length = 1.0
    dt = 0.05
    max_speed = 8.0
    max_torque = 2.0

    spec = EnvSpec(
        state_dim=2,
        action_dim=1,
        action_low=np.array([-2.0]),
        action_high=np.array([2.0]),
        max_episode_steps=200,
        obs_dim=3,
    )

    def _initial_state(self, rng):
        return np.array([rng.uniform(-math.pi, math.pi), rng.uniform(-1.0, 1.0)])

    def dynamics(self, state, action):
        theta, theta_dot = float(state[0]), float(state[1])
        u = float(action[0])
        reward = -(wrap_angle(theta) ** 2 + 0.1 * theta_dot**2 + 0.001 * u**2)
        accel = 3.0 * self.g / (2.0 * self.length) * math.sin(theta) + 3.0 / (self.mass * self.length**2) * u
        new_dot = min(max(theta_dot + accel * self.dt, -self.max_speed), self.max_speed)
        return np.array([theta + new_dot * self.dt, new_dot]), reward

    def observe(self, state):
        theta, theta_dot = float(state[0]), float(state[1])
        return np.array([math.cos(theta), math.sin(theta), theta_dot])


class Reacher(Env):
    """Point mass in [-1, 1]^2. State (x, y, vx, vy, goal_x, goal_y); action is a force."""

    name = "reacher"
    dt = 0.05
    damping = 0.1
    bound = 1.0

    spec = EnvSpec(
        state_dim=6,
        action_dim=2,
        action_low=np.array([-1.0, -1.0]),
        action_high=np.array([1.0, 1.0]),
        max_episode_steps=100,
        obs_dim=6,
    )

    def _initial_state(self, rng):
        pos = rng.uniform(-self.bound, self.bound, size=2)
        goal = rng.uniform(-self.bound, self.bound, size=2)
        return np.concatenate([pos, np.zeros(2), goal])

    def dynamics(self, state, action):
        pos, vel, goal = state[0:2], state[2:4], state[4:6]
        vel = (1.0 - self.damping) * vel + action * self.dt * 10.0
        pos = pos + vel * self.dt
        hit = np.abs(pos) > self.bound
        pos = np.clip(pos, -self.bound, self.bound)
        vel = np.where(hit, 0.0, vel)
        reward = -float(np.linalg.norm(pos - goal))
        return np.concatenate([pos, vel, goal]), reward

    def observe(self, state):
        state = np.asarray(state, dtype=float)
        return np.concatenate([state[0:4], state[4:6] - state[0:2]])


ENVS = {"pendulum": Pendulum, "reacher": Reacher}


def make_env(name: str) -> Env:
    try:
        return ENVS[name]()
    except KeyError:
        raise ConfigError(f"unknown environment {name!r}; choose from {sorted(ENVS)}", field="env") from None


def reset(env: Env, rng) -> np.ndarray:
    return env.reset(rng)


def step(env: Env, state, action) -> StepResult:
    return env.step(state, action)


def observe(env: Env, state) -> np.ndarray:
    return env.observe(state)
