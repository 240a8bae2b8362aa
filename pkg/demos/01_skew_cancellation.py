"""
Cancelling skewed errors with mixture noise
============================================

Bellman errors are often skewed. Here we fit a variational GMM to the
*negated* errors, sample zero-mean noise from it and watch the skew of
error + noise disappear.
"""

import numpy as np

from symq import gmm
from symq.numerics import skewness, symmetry_statistic

rng = np.random.default_rng(0)

# Gumbel errors: right-skewed, population skewness about 1.14
eps = rng.gumbel(size=100_000)
print(f"errors:          skew {skewness(eps):+.3f}   asymmetry {symmetry_statistic(eps):.4f}")

# a 10-cluster mixture, refined on fresh batches the way training does it
model = gmm.init(10, -rng.gumbel(size=10_000), rng)
for _ in range(20):
    model = gmm.fit_to_negated_errors(model, rng.gumbel(size=10_000))

mean, var, third = model.moments()
print(f"mixture:         mean {mean:+.1e}  var {var:.3f}  skew {third / var**1.5:+.3f}")
print("weights", np.round(model.weights, 3))

# the noise is zero-mean, so adding it leaves the expected error alone
eta = gmm.sample(model, rng, eps.size)
total = eps + eta
print(f"errors + noise:  skew {skewness(total):+.3f}   asymmetry {symmetry_statistic(total):.4f}")
print(f"mean shift from noise {total.mean() - eps.mean():+.4f}")

# the ideal case: noise drawn exactly from the negated errors
ideal = eps - rng.choice(eps, size=eps.size)
print(f"exact negation:  skew {skewness(ideal):+.3f}   asymmetry {symmetry_statistic(ideal):.4f}")
