import json

import numpy as np
import pytest

from symq import cli
from symq.config import AgentConfig, config_from_dict, load_config, make_config
from symq.envs import EnvSpec, StepResult
from symq.errors import ConfigError, NumericalError
from symq.training import compare, evaluate, load_checkpoint, read_returns_csv, train

TINY = dict(hidden=[16, 16], total_steps=400, warmup_steps=200, eval_interval=100, eval_episodes=1, batch_size=32, snapshot_interval=50)


def tiny(preset="sac", **kw):
    return make_config(preset, **{**TINY, **kw})


class ZeroEnv:
    spec = EnvSpec(1, 1, np.array([-1.0]), np.array([1.0]), 5, 1)

    def __init__(self, rewards=None):
        self.rewards = rewards or [0.0]
        self.episode = -1

    def reset(self, rng):
        self.t = 0
        self.episode += 1
        return np.zeros(1)

    def observe(self, state):
        return state

    def step(self, state, action):
        self.t += 1
        return StepResult(state, self.rewards[self.episode % len(self.rewards)], self.t >= 5)


class ConstPolicy:
    def deterministic(self, obs):
        return np.zeros(1)


class TestEvaluate:
    def test_zero_reward(self):
        assert evaluate(ConstPolicy(), ZeroEnv(), 1, 0) == (0.0, 0.0)

    def test_single_episode_std(self):
        assert evaluate(ConstPolicy(), ZeroEnv([1.5]), 1, 0)[1] == 0.0

    def test_mean_is_hand_sum(self):
        mean, std = evaluate(ConstPolicy(), ZeroEnv([1.0, 2.0, 4.0]), 3, 0)
        assert mean == pytest.approx((5 * 1.0 + 5 * 2.0 + 5 * 4.0) / 3)
        assert std == pytest.approx(np.std([5.0, 10.0, 20.0]))


class TestConfig:
    def test_presets(self):
        assert (make_config("sac").N, make_config("sac").correction) == (1, False)
        assert make_config("symsac").correction
        c = make_config("symredq")
        assert (c.N, c.M, c.G) == (5, 2, 5)
        p = make_config("symredq", paper_scale=True)
        assert (p.N, p.M, p.G, p.buffer_capacity) == (20, 2, 20, 1_000_000)
        assert make_config("redq", paper_scale=True).N == 10

    def test_table_defaults(self):
        c = AgentConfig()
        assert (c.gamma, c.rho, c.lr, c.batch_size, c.hidden, c.warmup_steps, c.clusters) == (0.99, 0.005, 3e-4, 256, [256, 256], 5000, 10)

    @pytest.mark.parametrize(
        "field, value",
        [("M", 6), ("N", 0), ("G", 0), ("gamma", 0.0), ("gamma", 1.5), ("k", 0), ("env", "ant"), ("batch_size", 0), ("hidden", [])],
    )
    def test_invalid_names_field(self, field, value):
        with pytest.raises(ConfigError) as info:
            make_config("symredq", **{field: value})
        assert info.value.field == field

    def test_unknown_field(self):
        with pytest.raises(ConfigError):
            make_config("sac", bogus=1)

    def test_load_from_file(self, tmp_path):
        path = tmp_path / "c.json"
        path.write_text(json.dumps({"env": "reacher", "preset": "symsac", "k": 2}))
        cfg = load_config(path, seed=4)
        assert (cfg.env, cfg.preset, cfg.k, cfg.seed, cfg.correction) == ("reacher", "symsac", 2, 4, True)

    def test_roundtrip(self):
        cfg = make_config("redq", k=3, seed=9)
        assert config_from_dict(cfg.to_dict()) == cfg


class TestTrain:
    def test_zero_steps_only_initial_row(self):
        log = train(tiny(total_steps=0))
        assert len(log.returns) == 1 and log.returns[0][0] == 0
        assert log.gradient_steps == 0

    def test_deterministic_returns_csv(self, tmp_path):
        cfg = tiny("symsac", k=2)
        train(cfg).write(tmp_path / "a")
        train(cfg).write(tmp_path / "b")
        assert (tmp_path / "a" / "returns.csv").read_bytes() == (tmp_path / "b" / "returns.csv").read_bytes()
        assert (tmp_path / "a" / "errors.csv").read_bytes() == (tmp_path / "b" / "errors.csv").read_bytes()

    def test_disabled_correction_matches_sac(self, tmp_path):
        train(tiny("sac")).write(tmp_path / "sac")
        train(tiny("symsac", correction=False)).write(tmp_path / "sym")
        assert (tmp_path / "sac" / "returns.csv").read_bytes() == (tmp_path / "sym" / "returns.csv").read_bytes()

    def test_noise_changes_training(self):
        a = train(tiny("sac"))
        b = train(tiny("symsac"))
        assert a.returns[0] == b.returns[0]
        assert a.returns[1:] != b.returns[1:]

    @pytest.mark.parametrize("G, k", [(1, 1), (2, 3), (3, 2)])
    def test_step_accounting(self, G, k):
        log = train(tiny("symredq", N=3, M=2, G=G, k=k, total_steps=260, warmup_steps=200))
        assert log.gradient_steps == 60 * G
        assert log.gmm_refreshes == (60 * G) // k

    def test_rows_monotone_and_snapshots(self):
        log = train(tiny("symsac"))
        steps = [r[0] for r in log.returns]
        assert steps == [0, 100, 200, 300, 400]
        assert [s.step for s in log.snapshots] == [50, 100, 150, 200]
        for s in log.snapshots:
            assert np.array_equal(s.post_errors, s.pre_errors + s.noise)

    def test_reacher_runs(self):
        log = train(tiny("symredq", env="reacher", N=2, G=2, total_steps=250, warmup_steps=200))
        assert np.isfinite(log.final_return)

    def test_checkpoint_roundtrip(self, tmp_path):
        log = train(tiny("symsac"))
        log.write(tmp_path)
        cfg, agent = load_checkpoint(tmp_path / "checkpoint.json")
        obs = np.random.default_rng(0).normal(size=(4, 3))
        assert np.array_equal(agent.policy.deterministic(obs), log.agent.policy.deterministic(obs))
        assert agent.noise.model.to_dict() == log.agent.noise.model.to_dict()
        assert agent.temp.log_alpha == log.agent.temp.log_alpha
        assert cfg == config_from_dict(log.config)
        for name in ("returns.csv", "errors.csv", "summary.json", "config.echo.json"):
            assert (tmp_path / name).exists()
        assert read_returns_csv(tmp_path / "returns.csv") == log.returns


class TestCompare:
    def test_single_run_table_equals_eval_rows(self):
        cfg = tiny("sac")
        rows, checkpoints = compare([cfg], [0])
        log = train(cfg)
        assert [(r["env_step"], r["mean_return"]) for r in rows] == [(s, m) for s, m, _ in log.returns]
        assert all(r["stderr"] is None for r in rows)
        assert [c["checkpoint"] for c in checkpoints] == ["half", "full"]
        assert checkpoints[0]["env_step"] == 200 and checkpoints[1]["env_step"] == 400

    def test_identical_configs_identical_columns(self, tmp_path):
        a, b = tiny("sac", name="a"), tiny("sac", name="b")
        rows, _ = compare([a, b], [0, 1], tmp_path)
        ra = [r for r in rows if r["algorithm"] == "a"]
        rb = [r for r in rows if r["algorithm"] == "b"]
        assert [(r["mean_return"], r["stderr"]) for r in ra] == [(r["mean_return"], r["stderr"]) for r in rb]
        assert all(r["stderr"] is not None for r in ra)
        assert (tmp_path / "compare.csv").exists() and (tmp_path / "a" / "seed_1" / "returns.csv").exists()

    def test_needs_inputs(self):
        with pytest.raises(ValueError):
            compare([], [0])


def write_tiny_config(path, **kw):
    data = {"preset": "symsac", **TINY, **kw}
    path.write_text(json.dumps(data))
    return str(path)


class TestCli:
    def test_train_eval_diagnose(self, tmp_path, capsys):
        cfg = write_tiny_config(tmp_path / "c.json")
        out = tmp_path / "run"
        assert cli.main(["train", "--config", cfg, "--seed", "3", "--out", str(out), "--quiet"]) == 0
        assert json.loads((out / "config.echo.json").read_text())["seed"] == 3
        capsys.readouterr()
        assert cli.main(["eval", "--checkpoint", str(out / "checkpoint.json"), "--episodes", "2"]) == 0
        assert set(json.loads(capsys.readouterr().out)) == {"mean_return", "std_return", "episodes"}
        assert cli.main(["diagnose", "--checkpoint", str(out / "checkpoint.json"), "--bins", "10"]) == 0
        report = json.loads(capsys.readouterr().out)
        assert report["snapshots"] == 4
        assert abs(report["gmm"]["mean"]) <= 1e-12
        assert (out / "histograms.csv").exists() and (out / "gmm.json").exists()

    def test_flags_override_config(self, tmp_path):
        cfg = write_tiny_config(tmp_path / "c.json")
        out = tmp_path / "run"
        assert cli.main(["train", "--config", cfg, "--out", str(out), "--quiet", "--total-steps", "0", "--k", "4"]) == 0
        echo = json.loads((out / "config.echo.json").read_text())
        assert echo["total_steps"] == 0 and echo["k"] == 4

    def test_config_error_exit_code(self, tmp_path, capsys):
        cfg = write_tiny_config(tmp_path / "c.json", M=5)
        assert cli.main(["train", "--config", cfg, "--out", str(tmp_path / "x")]) == 2
        assert "M" in capsys.readouterr().err

    def test_numerical_error_exit_code(self, monkeypatch, tmp_path):
        def boom(args):
            raise NumericalError("critic loss became non-finite")

        monkeypatch.setitem(cli.COMMANDS, "train", boom)
        assert cli.main(["train", "--out", str(tmp_path)]) == 3

    def test_compare(self, tmp_path):
        cfg = write_tiny_config(tmp_path / "c.json", total_steps=300)
        assert cli.main(["compare", "--configs", cfg, "--seeds", "0..1", "--out", str(tmp_path / "cmp")]) == 0
        assert (tmp_path / "cmp" / "compare_summary.csv").exists()

    def test_parse_seeds(self):
        assert cli.parse_seeds("0..4") == [0, 1, 2, 3, 4]
        assert cli.parse_seeds("3,7") == [3, 7]
