"""Scripted stand-ins for networks, used where tests need exact arithmetic."""

import numpy as np

from symq.replay import Batch


class ScriptedCritics:
    def __init__(self, values, online_values=None):
        self.values = list(values)
        self.online_values = list(online_values if online_values is not None else values)

    def __len__(self):
        return len(self.values)

    def target_q(self, i, obs, actions):
        return np.full(np.atleast_2d(obs).shape[0], float(self.values[i]))

    def q(self, i, obs, actions):
        return np.full(np.atleast_2d(obs).shape[0], float(self.online_values[i]))


class ScriptedPolicy:
    def __init__(self, log_prob):
        self.log_prob = log_prob

    def sample(self, obs, rng):
        n = np.atleast_2d(obs).shape[0]
        return np.zeros((n, 1)), np.full(n, float(self.log_prob))


def make_batch(rng, n=6, obs_dim=3, act_dim=1, dones=None):
    return Batch(
        states=rng.normal(size=(n, obs_dim)),
        actions=rng.uniform(-1, 1, size=(n, act_dim)),
        rewards=rng.normal(size=n),
        next_states=rng.normal(size=(n, obs_dim)),
        dones=np.zeros(n, dtype=bool) if dones is None else np.asarray(dones),
    )
