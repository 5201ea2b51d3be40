"""
How many samples does it take to learn n hidden bits?
=====================================================

Each column is a coin with bias 1/2 + eps or 1/2 - eps; guessing the bias by
the less frequent symbol needs more samples as the number of columns grows.
"""

import numpy as np

from paulitomo import lowerbound

rng = np.random.default_rng(2)
eps = 0.1

# a single column: exact success of majority decoding against simulation
for m in (25, 65, 150):
    exact = lowerbound.decode_success_probability(m, eps)
    sim = lowerbound.simulate_decoding(1, eps, m, 20000, rng).mean()
    print(f"m={m:4d}  exact {exact:.4f}  simulated {sim:.4f}")

# samples needed so that one column fails with probability at most 0.01
print("single-column count for failure 0.01:", lowerbound.required_samples_single(eps, 0.01))

# tail lower bound for a binomial count
lhs, rhs, ok = lowerbound.anticoncentration_check(eps, 100, 10, 100000, rng)
print(f"tail frequency {lhs:.5f} >= bound {rhs:.5f}: {ok}")

# columns are independent, so joint success is the product of per-column success
check = lowerbound.factorization_check(8, eps, 65, 20000, rng)
print(f"joint {check['joint']:.4f}  product {check['product']:.4f}  within 3 SE: {check['pass']}")

# smallest m reaching joint success 0.9 grows with n
for row in lowerbound.scaling_experiment([1, 2, 4, 8, 16], eps, 0.1, rng):
    print(f"n={row['n']:3d}  m*={row['m_star']:4d}  success {row['success_rate']:.3f}")
