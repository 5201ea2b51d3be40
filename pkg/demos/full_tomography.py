"""
Full state tomography from single-qubit Pauli measurements
==========================================================

Measure every qubit in X, Y or Z, repeat each of the 3**n settings m times,
and rebuild the density matrix by linear inversion.
"""

import numpy as np

from paulitomo import estimator, measurement, qstate

# a fixed two-qubit mixed state and the shot budget for accuracy 0.2 with confidence 0.9
rho = qstate.make_state("random_mixed:2026", 2)
plan = estimator.TomographyPlan.from_targets(n=2, epsilon=0.2, delta=0.1)
print(f"{plan.m} shots per basis, {plan.total_copies} copies in total")

# every shot in basis "XY" also informs "XI", "IY" and "II"
print("bases:", measurement.all_bases(2))

sigma, diag = estimator.run_full_tomography(rho, plan, np.random.default_rng(0))
print(f"trace-norm error  {diag['trace_error']:.4f}")
print(f"2-norm error      {diag['frobenius_error']:.4f}")

# the raw estimate is Hermitian with unit trace but can have negative eigenvalues,
# most visibly for a pure state and few shots
pure = qstate.make_state("random_pure:3", 2)
sigma, _ = estimator.run_full_tomography(pure, estimator.TomographyPlan(2, 0.2, 0.1, 20), np.random.default_rng(0))
print("eigenvalues of the estimate:", np.round(np.linalg.eigvalsh(sigma), 4))
physical = estimator.project_to_physical(sigma)
print("after projection:           ", np.round(np.linalg.eigvalsh(physical), 4))

# root-mean-square 2-norm error shrinks like 1/sqrt(m); the exact value follows from
# the per-Pauli variances (1 - <Q>^2) / (number of compatible shots)
alpha, weight = qstate.pauli_decompose(rho), qstate.pauli_weights(2)
for m in (100, 1000, 10000):
    exact = np.sqrt(np.sum((3.0**weight * (1 - alpha**2))[1:]) / (m * 9 * 4))
    errs = [
        estimator.run_full_tomography(rho, estimator.TomographyPlan(2, 0.2, 0.1, m), np.random.default_rng(t))[1]["frobenius_error"]
        for t in range(20)
    ]
    rms = np.sqrt(np.mean(np.square(errs)))
    print(f"m={m:6d}  rms 2-norm error {rms:.4f} (20 runs)  exact {exact:.4f}  bound {np.sqrt(5**2 / (m * 9)):.4f}")
