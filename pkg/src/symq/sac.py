"""Soft actor-critic pieces: squashed Gaussian policy, critic ensemble, targets and updates.

The critic ensemble covers single-critic SAC (N = M = 1) up to REDQ-style
ensembles with in-target minimization over a random subset of M target critics.
Gradients are computed by hand through :mod:`symq.mlp`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, DataError, ShapeError
from .mlp import AdamState, MlpNet, adam_step, polyak_update

LOG_STD_MIN = -20.0
LOG_STD_MAX = 2.0
_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)
_LOG2 = math.log(2.0)


def _softplus(x):
    return np.logaddexp(0.0, x)


def log_one_minus_tanh_sq(u):
    """log(1 - tanh(u)^2) without cancellation for large |u|."""
    return 2.0 * (_LOG2 - u - _softplus(-2.0 * u))


class SquashedGaussianPolicy:
    """Gaussian in pre-squash space, tanh-squashed and rescaled to the action box."""

    def __init__(self, obs_dim, action_low, action_high, hidden=(256, 256), rng=None, learning_rate=3e-4):
        low = np.asarray(action_low, dtype=float)
        high = np.asarray(action_high, dtype=float)
        if low.shape != high.shape or not np.all(low < high):
            raise ConfigError("action bounds must satisfy low < high elementwise", field="action_bounds")
        self.action_dim = low.size
        self.scale = (high - low) / 2.0
        self.offset = (high + low) / 2.0
        self.net = MlpNet([obs_dim, *hidden, 2 * self.action_dim], rng)
        self.adam = AdamState.for_params(self.net.params, learning_rate=learning_rate)

    def _check_obs(self, obs):
        obs = np.asarray(obs, dtype=float)
        if not np.all(np.isfinite(obs)):
            raise DataError("observation must be finite")
        return obs

    def distribution(self, obs):
        """Mean and clamped log-std of the pre-squash Gaussian, plus the net cache."""
        out, cache = self.net.forward_cache(self._check_obs(obs))
        mu = out[..., : self.action_dim]
        raw = out[..., self.action_dim :]
        log_std = np.clip(raw, LOG_STD_MIN, LOG_STD_MAX)
        return mu, log_std, (cache, raw)

    def squash(self, u):
        return np.tanh(u) * self.scale + self.offset

    def log_prob_pre_squash(self, u, mu, log_std):
        """Log density of the rescaled action tanh(u) * scale + offset."""
        z = (u - mu) / np.exp(log_std)
        per_dim = -0.5 * z * z - _HALF_LOG_2PI - log_std - log_one_minus_tanh_sq(u) - np.log(self.scale)
        return per_dim.sum(axis=-1)

    def log_prob(self, obs, action):
        mu, log_std, _ = self.distribution(obs)
        t = (np.asarray(action, dtype=float) - self.offset) / self.scale
        return self.log_prob_pre_squash(np.arctanh(t), mu, log_std)

    def sample(self, obs, rng):
        """Reparameterized draw. Returns (action, log_prob)."""
        mu, log_std, _ = self.distribution(obs)
        u = mu + np.exp(log_std) * rng.standard_normal(mu.shape)
        return self.squash(u), self.log_prob_pre_squash(u, mu, log_std)

    def deterministic(self, obs):
        mu, _, _ = self.distribution(obs)
        return self.squash(mu)

    def to_dict(self):
        return {"net": self.net.to_dict(), "adam": self.adam.to_dict(), "scale": self.scale.tolist(), "offset": self.offset.tolist()}

    def load_dict(self, data):
        self.net = MlpNet.from_dict(data["net"])
        self.adam = AdamState.from_dict(data["adam"])
        self.scale = np.asarray(data["scale"], dtype=float)
        self.offset = np.asarray(data["offset"], dtype=float)


def policy_sample(policy: SquashedGaussianPolicy, obs, rng):
    return policy.sample(obs, rng)


class CriticEnsemble:
    """N online critics Q(obs, action) with one target copy each."""

    def __init__(self, n_critics, obs_dim, action_dim, hidden=(256, 256), rng=None, learning_rate=3e-4):
        if n_critics < 1:
            raise ConfigError(f"need at least one critic, got {n_critics}", field="N")
        sizes = [obs_dim + action_dim, *hidden, 1]
        self.online = [MlpNet(sizes, rng) for _ in range(n_critics)]
        self.target = [net.copy() for net in self.online]
        self.adam = [AdamState.for_params(net.params, learning_rate=learning_rate) for net in self.online]

    def __len__(self):
        return len(self.online)

    @staticmethod
    def _inputs(obs, actions):
        return np.concatenate([np.atleast_2d(obs), np.atleast_2d(actions)], axis=1)

    def q(self, i, obs, actions):
        return self.online[i].forward(self._inputs(obs, actions))[:, 0]

    def target_q(self, i, obs, actions):
        return self.target[i].forward(self._inputs(obs, actions))[:, 0]

    def soft_update(self, i, smoothing):
        """Mix a ``smoothing`` fraction of online critic ``i`` into its target."""
        polyak_update(self.target[i], self.online[i], 1.0 - smoothing)

    def to_dict(self):
        return {
            "online": [n.to_dict() for n in self.online],
            "target": [n.to_dict() for n in self.target],
            "adam": [a.to_dict() for a in self.adam],
        }

    def load_dict(self, data):
        self.online = [MlpNet.from_dict(d) for d in data["online"]]
        self.target = [MlpNet.from_dict(d) for d in data["target"]]
        self.adam = [AdamState.from_dict(d) for d in data["adam"]]


@dataclass
class EntropyTemp:
    target_entropy: float
    log_alpha: float = 0.0
    adam: AdamState = field(default_factory=AdamState)

    @property
    def alpha(self) -> float:
        return math.exp(self.log_alpha)

    def to_dict(self):
        return {"target_entropy": self.target_entropy, "log_alpha": self.log_alpha, "adam": self.adam.to_dict()}

    @classmethod
    def from_dict(cls, data):
        return cls(data["target_entropy"], data["log_alpha"], AdamState.from_dict(data["adam"]))


def sample_subset(n_critics: int, m: int, rng) -> np.ndarray:
    """M distinct critic indices, uniformly among all size-M subsets."""
    if not 1 <= m <= n_critics:
        raise ConfigError(f"subset size must satisfy 1 <= M <= N, got M={m}, N={n_critics}", field="M")
    return np.sort(rng.choice(n_critics, size=m, replace=False))


def compute_target(ensemble, policy, alpha, batch, subset, gamma, rng):
    """y = r + gamma * (1 - done) * (min_{i in subset} Q_targ_i(s', a') - alpha log pi(a'|s')).

    One next action is drawn per batch element and shared by every critic.
    """
    subset = list(subset)
    if not subset:
        raise ConfigError("in-target minimization subset is empty", field="M")
    next_actions, next_log_probs = policy.sample(batch.next_states, rng)
    q_next = np.min([ensemble.target_q(i, batch.next_states, next_actions) for i in subset], axis=0)
    not_done = 1.0 - np.asarray(batch.dones, dtype=float)
    return batch.rewards + gamma * not_done * (q_next - alpha * next_log_probs)


def critic_loss_and_grads(net: MlpNet, inputs, y, eta):
    """Mean of (y - Q + eta)^2 over the batch and its parameter gradients."""
    q, cache = net.forward_cache(inputs)
    q = q[:, 0]
    if y.shape != q.shape or eta.shape != q.shape:
        raise ShapeError(f"target/noise shapes {y.shape}, {eta.shape} do not match batch {q.shape}")
    resid = y - q + eta
    loss = float(np.mean(resid * resid))
    upstream = (-2.0 / q.size) * resid[:, None]
    grads, _ = net.backward(cache, upstream)
    return loss, grads


def critic_update_one(ensemble: CriticEnsemble, i, batch, y, eta=None) -> float:
    """One Adam step for critic ``i`` on the noise-injected squared error."""
    y = np.asarray(y, dtype=float)
    eta = np.zeros_like(y) if eta is None else np.asarray(eta, dtype=float)
    inputs = ensemble._inputs(batch.states, batch.actions)
    loss, grads = critic_loss_and_grads(ensemble.online[i], inputs, y, eta)
    adam_step(ensemble.adam[i], ensemble.online[i].params, grads)
    return loss


def critic_update(ensemble: CriticEnsemble, batch, y, eta=None) -> np.ndarray:
    """Update every critic; ``eta`` is None, a length-B vector or an (N, B) array."""
    n = len(ensemble)
    y = np.asarray(y, dtype=float)
    if eta is None:
        etas = [None] * n
    else:
        eta = np.asarray(eta, dtype=float)
        etas = [eta] * n if eta.ndim == 1 else list(eta)
        if len(etas) != n:
            raise ShapeError(f"noise rows {len(etas)} != critics {n}")
    return np.array([critic_update_one(ensemble, i, batch, y, etas[i]) for i in range(n)])


def policy_loss_and_grads(policy: SquashedGaussianPolicy, critics, alpha, obs, noise):
    """Loss mean(alpha log pi - mean_i Q_i) for fixed standard-normal ``noise``.

    Returns (loss, param_grads, log_probs).
    """
    obs = np.atleast_2d(obs)
    batch = obs.shape[0]
    mu, log_std, (cache, raw) = policy.distribution(obs)
    std = np.exp(log_std)
    u = mu + std * noise
    action = policy.squash(u)
    log_probs = policy.log_prob_pre_squash(u, mu, log_std)
    tanh_u = np.tanh(u)

    q_sum = np.zeros(batch)
    dq_da = np.zeros_like(action)
    inputs = np.concatenate([obs, action], axis=1)
    for net in critics:
        q, c_cache = net.forward_cache(inputs)
        q_sum += q[:, 0]
        _, g_in = net.backward(c_cache, np.ones((batch, 1)))
        dq_da += g_in[:, obs.shape[1] :]
    n = len(critics)
    q_mean = q_sum / n
    loss = float(np.mean(alpha * log_probs - q_mean))

    # d loss / d u through the critics and through the log-density.
    dq_du = (dq_da / n) * policy.scale * (1.0 - tanh_u * tanh_u)
    dlogp_du = 2.0 * tanh_u
    d_mu = (alpha * dlogp_du - dq_du) / batch
    # log std enters through u = mu + std * z and the -log_std term.
    d_log_std = (alpha * (dlogp_du * std * noise - 1.0) - dq_du * std * noise) / batch
    in_range = (raw >= LOG_STD_MIN) & (raw <= LOG_STD_MAX)
    upstream = np.concatenate([d_mu, d_log_std * in_range], axis=1)
    grads, _ = policy.net.backward(cache, upstream)
    return loss, grads, log_probs


def policy_update(policy, ensemble, temp_or_alpha, batch, rng):
    """One reparameterized Adam step on the policy. Returns (loss, log_probs)."""
    alpha = temp_or_alpha.alpha if isinstance(temp_or_alpha, EntropyTemp) else float(temp_or_alpha)
    obs = np.atleast_2d(batch.states)
    noise = rng.standard_normal((obs.shape[0], policy.action_dim))
    loss, grads, log_probs = policy_loss_and_grads(policy, ensemble.online, alpha, obs, noise)
    adam_step(policy.adam, policy.net.params, grads)
    return loss, log_probs


def temperature_gradient(temp: EntropyTemp, log_probs) -> float:
    """d/d(log alpha) of J = -alpha * mean(log pi + target_entropy)."""
    return -temp.alpha * float(np.mean(np.asarray(log_probs) + temp.target_entropy))


def temperature_update(temp: EntropyTemp, log_probs) -> float:
    grad = temperature_gradient(temp, log_probs)
    box = [np.array(temp.log_alpha)]
    adam_step(temp.adam, box, [np.array(grad)])
    temp.log_alpha = float(box[0])
    return temp.alpha
