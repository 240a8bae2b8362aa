"""Fixed-capacity ring buffer of transitions with uniform sampling."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ShapeError, StateError


@dataclass
class Transition:
    state: np.ndarray
    action: np.ndarray
    reward: float
    next_state: np.ndarray
    done: bool


@dataclass
class Batch:
    states: np.ndarray
    actions: np.ndarray
    rewards: np.ndarray
    next_states: np.ndarray
    dones: np.ndarray

    def __len__(self):
        return self.rewards.size


class ReplayBuffer:
    def __init__(self, obs_dim: int, action_dim: int, capacity: int = 100_000):
        if capacity < 1:
            raise ShapeError(f"capacity must be positive, got {capacity}")
        self.capacity = int(capacity)
        self.obs_dim = obs_dim
        self.action_dim = action_dim
        self._states = np.zeros((capacity, obs_dim))
        self._actions = np.zeros((capacity, action_dim))
        self._rewards = np.zeros(capacity)
        self._next_states = np.zeros((capacity, obs_dim))
        self._dones = np.zeros(capacity, dtype=bool)
        self._next = 0
        self.size = 0

    def __len__(self):
        return self.size

    def push(self, t: Transition) -> None:
        state = np.asarray(t.state, dtype=float)
        action = np.asarray(t.action, dtype=float)
        next_state = np.asarray(t.next_state, dtype=float)
        if state.shape != (self.obs_dim,) or next_state.shape != (self.obs_dim,):
            raise ShapeError(f"states must have shape ({self.obs_dim},)")
        if action.shape != (self.action_dim,):
            raise ShapeError(f"action must have shape ({self.action_dim},)")
        i = self._next
        self._states[i] = state
        self._actions[i] = action
        self._rewards[i] = t.reward
        self._next_states[i] = next_state
        self._dones[i] = t.done
        self._next = (i + 1) % self.capacity
        self.size = min(self.size + 1, self.capacity)

    def _ordered_indices(self) -> np.ndarray:
        if self.size < self.capacity:
            return np.arange(self.size)
        return (np.arange(self.capacity) + self._next) % self.capacity

    def _gather(self, idx) -> Batch:
        return Batch(
            self._states[idx],
            self._actions[idx],
            self._rewards[idx],
            self._next_states[idx],
            self._dones[idx],
        )

    def contents(self) -> list[Transition]:
        """Stored transitions, oldest first."""
        b = self._gather(self._ordered_indices())
        return [
            Transition(b.states[i], b.actions[i], float(b.rewards[i]), b.next_states[i], bool(b.dones[i]))
            for i in range(len(b))
        ]

    def sample_indices(self, n: int, rng: np.random.Generator) -> np.ndarray:
        if self.size == 0:
            raise StateError("cannot sample from an empty replay buffer")
        return rng.integers(0, self.size, size=n)

    def sample_batch(self, n: int, rng: np.random.Generator) -> Batch:
        """``n`` uniform draws with replacement."""
        return self._gather(self.sample_indices(n, rng))
