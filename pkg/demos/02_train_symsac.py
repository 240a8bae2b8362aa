"""
A short symmetric SAC run on pendulum
======================================

Trains SymSAC for a few thousand steps and prints the evaluation curve
and the error snapshots taken along the way. Pass a step count as the
first argument for a longer run (30000 solves the task).
"""

import sys

import numpy as np

from symq.config import make_config
from symq.training import train

steps = int(sys.argv[1]) if len(sys.argv) > 1 else 8000
cfg = make_config("symsac", total_steps=steps, warmup_steps=min(5000, steps // 2), eval_episodes=5, seed=0)

log = train(cfg, progress=lambda row: print(f"step {row[0]:6d}  return {row[1]:9.1f} +- {row[2]:.1f}", flush=True))
print(f"{log.gradient_steps} gradient steps, {log.gmm_refreshes} mixture refits, {log.wall_clock:.0f} s")

# every snapshot holds the raw errors of one batch and the noise added to them
print("\n  step   skew pre  skew post")
for snap in log.snapshots:
    print(f"{snap.step:6d}  {snap.skew_pre:+9.3f}  {snap.skew_post:+9.3f}")

skewed = [s for s in log.snapshots if abs(s.skew_pre) > 0.2]
if skewed:
    reduced = np.mean([abs(s.skew_post) < abs(s.skew_pre) for s in skewed])
    print(f"\nskew reduced in {reduced:.0%} of {len(skewed)} strongly skewed batches")

# the fitted noise model at the end of training
model = log.agent.noise.model
print("final mixture weights", np.round(model.weights, 3))
print("final mixture means  ", np.round(model.m, 3))
