"""
SAC against SymSAC over a few seeds
====================================

Runs both presets on the same seeds and prints the mean evaluation
return with its standard error at half and full budget. The default
budget is small; pass a step count to go further.
"""

import sys
import tempfile

from symq.config import make_config
from symq.training import compare

steps = int(sys.argv[1]) if len(sys.argv) > 1 else 7000
common = dict(total_steps=steps, warmup_steps=min(5000, steps // 2), eval_episodes=5)
configs = [make_config("sac", **common), make_config("symsac", **common)]

out = tempfile.mkdtemp(prefix="symq-compare-")
rows, checkpoints = compare(configs, seeds=[0, 1], out_dir=out)

for row in checkpoints:
    print(f"{row['algorithm']:>7s}  {row['checkpoint']:>4s}  step {row['env_step']:6d}  "
          f"{row['mean_return']:8.1f} +- {row['stderr']:.1f}")
print("per-run logs in", out)
