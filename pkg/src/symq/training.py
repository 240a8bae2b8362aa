"""Seeded training, evaluation and multi-run comparison."""

from __future__ import annotations

import csv
import json
import math
import os
import time
from dataclasses import dataclass, field

import numpy as np

from . import gmm
from .config import AgentConfig, config_from_dict
from .correction import CorrectionConfig, NoiseModel, collect_errors, snapshot, write_errors_csv, write_summary_json
from .envs import make_env
from .errors import NumericalError
from .numerics import spawn_streams
from .replay import ReplayBuffer, Transition
from .sac import (
    CriticEnsemble,
    EntropyTemp,
    SquashedGaussianPolicy,
    compute_target,
    critic_update_one,
    policy_update,
    sample_subset,
    temperature_update,
)

# Order matters: appending is safe, reordering changes every run.
STREAMS = ("init", "env", "explore", "batch", "subset", "target", "policy", "noise", "eval")
CHECKPOINT_VERSION = 1


@dataclass
class Agent:
    policy: SquashedGaussianPolicy
    critics: CriticEnsemble
    temp: EntropyTemp
    noise: NoiseModel | None = None

    @classmethod
    def build(cls, cfg: AgentConfig, env, init_rng, noise_rng=None) -> "Agent":
        spec = env.spec
        policy = SquashedGaussianPolicy(
            spec.obs_dim, spec.action_low, spec.action_high, cfg.hidden, init_rng, cfg.lr
        )
        critics = CriticEnsemble(cfg.N, spec.obs_dim, spec.action_dim, cfg.hidden, init_rng, cfg.lr)
        temp = EntropyTemp(target_entropy=-float(spec.action_dim))
        temp.adam.learning_rate = cfg.lr
        noise = None
        if cfg.correction:
            noise = NoiseModel(CorrectionConfig(True, cfg.k, cfg.clusters), noise_rng)
        return cls(policy, critics, temp, noise)

    def to_dict(self) -> dict:
        model = self.noise.model if self.noise is not None else None
        return {
            "policy": self.policy.to_dict(),
            "critics": self.critics.to_dict(),
            "temperature": self.temp.to_dict(),
            "gmm": None if model is None else model.to_dict(),
            "gmm_refreshes": 0 if self.noise is None else self.noise.refreshes,
        }


@dataclass
class RunLog:
    config: dict
    returns: list = field(default_factory=list)  # (env_step, mean_return, std_return)
    snapshots: list = field(default_factory=list)
    gradient_steps: int = 0
    gmm_refreshes: int = 0
    wall_clock: float = 0.0
    agent: Agent | None = None

    @property
    def final_return(self) -> float:
        return self.returns[-1][1]

    def write(self, out_dir) -> None:
        os.makedirs(out_dir, exist_ok=True)
        write_returns_csv(self.returns, os.path.join(out_dir, "returns.csv"))
        write_errors_csv(self.snapshots, os.path.join(out_dir, "errors.csv"))
        write_summary_json(
            self.snapshots,
            os.path.join(out_dir, "summary.json"),
            extra={
                "final_mean_return": self.final_return,
                "gradient_steps": self.gradient_steps,
                "gmm_refreshes": self.gmm_refreshes,
                "wall_clock_seconds": self.wall_clock,
            },
        )
        with open(os.path.join(out_dir, "config.echo.json"), "w") as fh:
            json.dump(self.config, fh, indent=2)
        if self.agent is not None:
            save_checkpoint(self, os.path.join(out_dir, "checkpoint.json"))


def write_returns_csv(rows, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(("env_step", "mean_return", "std_return"))
        for step, mean, std in rows:
            writer.writerow((step, repr(float(mean)), repr(float(std))))


def read_returns_csv(path) -> list:
    with open(path, newline="") as fh:
        return [(int(r["env_step"]), float(r["mean_return"]), float(r["std_return"])) for r in csv.DictReader(fh)]


def save_checkpoint(log: RunLog, path) -> None:
    payload = {
        "version": CHECKPOINT_VERSION,
        "config": log.config,
        "gradient_steps": log.gradient_steps,
        **log.agent.to_dict(),
    }
    with open(path, "w") as fh:
        json.dump(payload, fh)


def load_checkpoint(path):
    """Return (config, agent) from a checkpoint written by :func:`save_checkpoint`."""
    with open(path) as fh:
        data = json.load(fh)
    if data.get("version") != CHECKPOINT_VERSION:
        raise ValueError(f"unsupported checkpoint version {data.get('version')!r}")
    cfg = config_from_dict(data["config"])
    env = make_env(cfg.env)
    agent = Agent.build(cfg, env, np.random.default_rng(0), np.random.default_rng(0))
    agent.policy.load_dict(data["policy"])
    agent.critics.load_dict(data["critics"])
    agent.temp = EntropyTemp.from_dict(data["temperature"])
    if agent.noise is not None and data.get("gmm") is not None:
        agent.noise.model = gmm.GmmModel.from_dict(data["gmm"])
        agent.noise.refreshes = data.get("gmm_refreshes", 0)
    return cfg, agent


def evaluate(policy, env, episodes: int, seed) -> tuple[float, float]:
    """Mean and population std of returns under the deterministic (mean) action."""
    if episodes < 1:
        raise ValueError("episodes must be >= 1")
    rng = np.random.default_rng(seed)
    returns = []
    for _ in range(episodes):
        state = env.reset(rng)
        total = 0.0
        while True:
            action = policy.deterministic(env.observe(state))
            result = env.step(state, action)
            total += result.reward
            state = result.next_state
            if result.done:
                break
        returns.append(total)
    return float(np.mean(returns)), float(np.std(returns))


def _check_finite(name, value):
    if not np.all(np.isfinite(value)):
        raise NumericalError(f"{name} became non-finite")


def train(cfg: AgentConfig, progress=None) -> RunLog:
    """Run the full interaction / update loop described by ``cfg``.

    The output is a pure function of the config (including its seed). Each
    concern draws from its own random stream, so switching the noise path
    off leaves every other draw unchanged.
    """
    cfg.validate()
    started = time.perf_counter()
    rngs = spawn_streams(cfg.seed, STREAMS)
    env = make_env(cfg.env)
    eval_env = make_env(cfg.env)
    eval_seed = int(rngs["eval"].integers(2**63))
    agent = Agent.build(cfg, env, rngs["init"], rngs["noise"])
    policy, critics, temp, noise = agent.policy, agent.critics, agent.temp, agent.noise
    spec = env.spec
    buffer = ReplayBuffer(spec.obs_dim, spec.action_dim, cfg.buffer_capacity)
    log = RunLog(config=cfg.to_dict(), agent=agent)
    log.returns.append((0, *evaluate(policy, eval_env, cfg.eval_episodes, eval_seed)))

    state = env.reset(rngs["env"])
    obs = env.observe(state)
    grad_step = 0
    for t in range(1, cfg.total_steps + 1):
        if t <= cfg.warmup_steps:
            action = rngs["explore"].uniform(spec.action_low, spec.action_high)
        else:
            action, _ = policy.sample(obs, rngs["explore"])
        result = env.step(state, action)
        next_obs = env.observe(result.next_state)
        buffer.push(Transition(obs, action, result.reward, next_obs, result.terminal))
        if result.done:
            state = env.reset(rngs["env"])
            obs = env.observe(state)
        else:
            state, obs = result.next_state, next_obs

        if t > cfg.warmup_steps:
            for _ in range(cfg.G):
                grad_step += 1
                batch = buffer.sample_batch(cfg.batch_size, rngs["batch"])
                subset = sample_subset(cfg.N, cfg.M, rngs["subset"])
                y = compute_target(critics, policy, temp.alpha, batch, subset, cfg.gamma, rngs["target"])
                take_snapshot = grad_step % cfg.snapshot_interval == 0
                errors = None
                if noise is not None:
                    errors = collect_errors(critics, batch, y)
                    noise.maybe_refresh(errors, grad_step)
                elif take_snapshot:
                    errors = collect_errors(critics, batch, y)
                etas = []
                for i in range(cfg.N):
                    eta = noise.draw(cfg.batch_size, i) if noise is not None else np.zeros(cfg.batch_size)
                    etas.append(eta)
                    loss = critic_update_one(critics, i, batch, y, eta)
                    _check_finite("critic loss", loss)
                    critics.soft_update(i, cfg.rho)
                if take_snapshot:
                    log.snapshots.append(snapshot(grad_step, errors, np.concatenate(etas)))
            _, log_probs = policy_update(policy, critics, temp, batch, rngs["policy"])
            _check_finite("policy log-probability", log_probs)
            temperature_update(temp, log_probs)

        if t % cfg.eval_interval == 0:
            row = (t, *evaluate(policy, eval_env, cfg.eval_episodes, eval_seed))
            log.returns.append(row)
            if progress is not None:
                progress(row)

    log.gradient_steps = grad_step
    log.gmm_refreshes = 0 if noise is None else noise.refreshes
    log.wall_clock = time.perf_counter() - started
    return log


def _run_one(args):
    cfg_dict, seed, out_dir = args
    cfg = config_from_dict({**cfg_dict, "seed": seed})
    log = train(cfg)
    if out_dir is not None:
        log.write(os.path.join(out_dir, cfg.label, f"seed_{seed}"))
    log.agent = None
    return cfg.label, seed, log


def _stderr(values):
    if len(values) < 2:
        return None
    return float(np.std(values, ddof=1) / math.sqrt(len(values)))


def summarize(runs) -> list[dict]:
    """Per-algorithm mean and standard error across seeds at every eval step.

    ``runs`` is a list of (label, seed, RunLog). Standard error is None when a
    label has a single seed.
    """
    grouped: dict[str, list] = {}
    for label, _, log in runs:
        grouped.setdefault(label, []).append(log.returns)
    rows = []
    for label, curves in grouped.items():
        steps = [row[0] for row in curves[0]]
        for j, step in enumerate(steps):
            values = [c[j][1] for c in curves if j < len(c)]
            rows.append(
                {
                    "algorithm": label,
                    "env_step": step,
                    "mean_return": float(np.mean(values)),
                    "stderr": _stderr(values),
                    "n_seeds": len(values),
                }
            )
    return rows


def checkpoint_rows(rows, total_steps) -> list[dict]:
    """Rows at the last eval step not after half the budget, and at the end."""
    out = []
    for label in dict.fromkeys(r["algorithm"] for r in rows):
        mine = [r for r in rows if r["algorithm"] == label]
        half = [r for r in mine if r["env_step"] <= total_steps // 2]
        for tag, row in (("half", half[-1] if half else None), ("full", mine[-1])):
            if row is not None:
                out.append({"checkpoint": tag, **row})
    return out


def _write_table(rows, path):
    if not rows:
        return
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(rows[0]))
        writer.writeheader()
        for row in rows:
            writer.writerow({k: ("" if v is None else v) for k, v in row.items()})


def compare(configs, seeds, out_dir=None, jobs: int = 1):
    """Train every (config, seed) pair and tabulate returns per algorithm.

    Finished runs are written to ``out_dir/<label>/seed_<s>/`` as they
    complete, so a failure part-way leaves the earlier results on disk.
    Returns (per-step rows, half/full checkpoint rows).
    """
    if not configs or not seeds:
        raise ValueError("compare needs at least one config and one seed")
    tasks = [(cfg.to_dict(), int(seed), out_dir) for cfg in configs for seed in seeds]
    runs = []
    if jobs > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=jobs) as pool:
            runs = list(pool.map(_run_one, tasks))
    else:
        runs = [_run_one(task) for task in tasks]
    rows = summarize(runs)
    total = max(cfg.total_steps for cfg in configs)
    checkpoints = checkpoint_rows(rows, total)
    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        _write_table(rows, os.path.join(out_dir, "compare.csv"))
        _write_table(checkpoints, os.path.join(out_dir, "compare_summary.csv"))
    return rows, checkpoints
