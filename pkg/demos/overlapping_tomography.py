"""
Overlapping tomography of all two-qubit marginals
=================================================

One stream of shots in uniformly random product bases is reused to
reconstruct every k-qubit marginal at once.
"""

import numpy as np

from paulitomo import overlap, qstate

rho = qstate.ghz(6)
plan = overlap.OverlapPlan.from_targets(n=6, k=2, epsilon=0.25, delta=0.2)
print(f"{plan.total_shots} shots cover {len(plan.targets())} pairs")

rng = np.random.default_rng(1)
estimates = overlap.run_overlap(rho, plan, rng)
for est in estimates[:5]:
    counts = min(est.per_basis_counts.values())
    print(f"pair {est.subset}: trace-norm error {est.trace_error:.4f}, fewest shots in a basis {counts}")
print("all pairs within 0.25:", overlap.all_within(estimates, 0.25))

# each restricted basis needs enough shots; with 2*m*3**k shots this fails with small probability
shots = overlap.sample_random_shots(rho, 2 * 20 * 9, rng)
ok, fewest, bound = overlap.coverage_check(shots, (0, 1), 20)
print(f"coverage with 360 shots: ok={ok}, fewest={fewest}, failure bound {bound:.4f}")

# exact outcome probabilities reproduce the marginal exactly
table = overlap.exact_subset_table(rho, (2, 5))
exact = overlap.subset_from_table(table, (2, 5)).sigma
print("exact-statistics error:", qstate.one_norm_distance(exact, qstate.partial_trace(rho, (2, 5))))
