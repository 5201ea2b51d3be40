import math

import numpy as np
import pytest

from paulitomo import measurement as ms
from paulitomo import overlap as ov
from paulitomo import qstate as q


def test_total_shots_examples():
    assert ov.total_shots(6, 2, 0.25, 0.2) == 256545
    assert 51200 * math.log(150) == pytest.approx(256544.6, abs=0.1)
    for n in (1, 2, 3):
        assert ov.total_shots(n, n, 0.5, 2 / math.e, num_subsets=1) == math.ceil(32 * 10**n / 0.25)
    assert ov.total_shots(3, 1, 1, 2 / math.e, num_subsets=1) == 320


@pytest.mark.parametrize("args", [(3, 0, 0.1, 0.1), (3, 4, 0.1, 0.1), (3, 2, 0, 0.1), (3, 2, 0.1, 1.5)])
def test_total_shots_rejects(args):
    with pytest.raises(ValueError):
        ov.total_shots(*args)


def test_plan_modes():
    plan = ov.OverlapPlan.from_targets(4, 2, 0.25, 0.2)
    assert plan.targets() == [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]
    partial = ov.OverlapPlan.from_targets(4, 2, 0.25, 0.2, subsets=[(0, 3), (2,)])
    assert partial.targets() == [(0, 3), (2,)]
    assert partial.total_shots == ov.total_shots(4, 2, 0.25, 0.2, num_subsets=2)
    with pytest.raises(ValueError):
        ov.OverlapPlan.from_targets(4, 2, 0.25, 0.2, subsets=[(0, 1, 2)])
    with pytest.raises(ValueError):
        ov.OverlapPlan.from_targets(4, 2, 0.25, 0.2, subsets=[(1, 0)])


def test_z_only_shots_missing_coverage():
    n = 3
    sampler = ms.OutcomeSampler(q.basis_state("000"))
    shots = sampler.sample_fixed("ZZZ", 100, np.random.default_rng(0))
    table = ov.outcome_table(shots, (1,))
    # only the Z row is populated and every outcome is +1
    np.testing.assert_array_equal(table, [[0, 0], [0, 0], [100, 0]])
    with pytest.raises(ov.InsufficientCoverageError, match="'X'") as info:
        ov.reconstruct_subset(shots, (1,))
    assert info.value.basis == "X" and info.value.subset == (1,)


@pytest.mark.parametrize("subset", [(0,), (1, 3), (0, 2, 3)])
def test_exact_statistics_reproduce_marginal(subset):
    rho = q.random_mixed(4, 16, 8)
    table = ov.exact_subset_table(rho, subset)
    est = ov.subset_from_table(table, subset)
    np.testing.assert_allclose(est.sigma, q.partial_trace(rho, subset), atol=1e-10)


def test_exact_statistics_with_unequal_weights():
    # pooled estimator stays exact when bases carry different shot counts
    rho = q.random_mixed(3, 8, 2)
    subset = (0, 2)
    weights = np.arange(1, 10)[:, None]
    est = ov.subset_from_table(ov.exact_subset_table(rho, subset) * weights, subset)
    np.testing.assert_allclose(est.sigma, q.partial_trace(rho, subset), atol=1e-10)


def test_restricted_shots_follow_marginal_distribution():
    rho = q.random_mixed(3, 8, 5)
    subset = (0, 2)
    marginal = q.partial_trace(rho, subset)
    sampler = ms.OutcomeSampler(rho)
    rng = np.random.default_rng(11)
    for basis in ["XYZ", "ZZX", "YXY"]:
        shots = sampler.sample_fixed(basis, 100_000, rng).restrict(subset)
        emp = np.bincount(shots.outcome_indices(), minlength=4) / len(shots)
        exact = ms.outcome_distribution(marginal, basis[0] + basis[2])
        assert 0.5 * np.abs(emp - exact).sum() <= 0.02


def test_reconstruct_subset_matches_naive_pooling():
    rho = q.random_mixed(3, 8, 1)
    shots = ms.OutcomeSampler(rho).sample_random(400, np.random.default_rng(4))
    subset = (0, 2)
    est = ov.reconstruct_subset(shots, subset)
    restricted = list(shots.restrict(subset))
    coeffs = []
    for p in q.all_paulis(2):
        signs = [ms.shot_sign(p, s) for s in restricted if ms.is_compatible(p, s.basis)]
        coeffs.append(sum(signs) / len(signs))
    expected = sum(c * q.pauli_matrix(p) for c, p in zip(coeffs, q.all_paulis(2))) / 4
    np.testing.assert_allclose(est.sigma, expected, atol=1e-14)
    assert sum(est.per_basis_counts.values()) == 400
    assert np.trace(est.sigma).real == pytest.approx(1, abs=1e-14)


def test_reconstruct_subset_accepts_shot_list():
    shots = [ms.Shot(b, "00") for b in ms.all_bases(2)]
    est = ov.reconstruct_subset(shots, (0, 1))
    assert est.per_basis_counts == {b: 1 for b in ms.all_bases(2)}


def test_coverage_check_examples():
    k, m = 2, 20
    rng = np.random.default_rng(0)
    sampler = ms.OutcomeSampler(q.maximally_mixed(3))
    few = sampler.sample_random(m * 3**k - 1, rng)
    ok, min_count, bound = ov.coverage_check(few, (0, 2), m)
    assert not ok and min_count < m
    assert bound == pytest.approx(9 * (2 / math.e) ** 20)

    xs = sampler.sample_fixed("XZY", 50, rng)
    assert ov.basis_counts(xs, (0,)) == {"X": 50, "Y": 0, "Z": 0}
    assert ov.coverage_check(xs, (0,), 1)[:2] == (False, 0)


def test_coverage_probability_small_sample():
    k, m = 1, 5
    sampler = ms.OutcomeSampler(q.maximally_mixed(2))
    rng = np.random.default_rng(1)
    hits = [ov.coverage_check(sampler.sample_random(2 * m * 3**k, rng), (1,), m)[0] for _ in range(2000)]
    assert np.mean(hits) >= 1 - 3 * (2 / math.e) ** m


def test_run_overlap_product_state_k1():
    n, eps, delta = 4, 0.25, 0.2
    rho = q.basis_state("0000")
    plan = ov.OverlapPlan.from_targets(n, 1, eps, delta)
    rng = np.random.default_rng(2)
    successes = [ov.all_within(ov.run_overlap(rho, plan, rng), eps) for _ in range(50)]
    assert np.mean(successes) >= 1 - delta
    ests = ov.run_overlap(rho, plan, rng)
    for e in ests:
        assert q.one_norm_distance(e.sigma, q.basis_state("0")) < eps


def test_run_overlap_ghz_pairs():
    rho = q.ghz(4)
    plan = ov.OverlapPlan.from_targets(4, 2, 0.25, 0.2)
    ests = ov.run_overlap(rho, plan, np.random.default_rng(3))
    marginal = (np.kron(np.eye(2), np.eye(2)) + np.kron(q.pauli_matrix("Z"), q.pauli_matrix("Z"))) / 4
    assert len(ests) == 6
    for e in ests:
        np.testing.assert_allclose(q.partial_trace(rho, e.subset), marginal, atol=1e-15)
        assert q.one_norm_distance(e.sigma, marginal) < 0.25
        assert e.trace_error == pytest.approx(q.one_norm_distance(e.sigma, marginal))
        assert sum(e.per_basis_counts.values()) == plan.total_shots


def test_run_overlap_deterministic_and_shared_stream():
    rho = q.random_mixed(3, 8, 0)
    plan = ov.OverlapPlan(3, 2, 0.5, 0.2, 3000)
    a = ov.run_overlap(rho, plan, np.random.default_rng(5))
    b = ov.run_overlap(rho, plan, np.random.default_rng(5))
    for x, y in zip(a, b):
        np.testing.assert_array_equal(x.sigma, y.sigma)
    shots = ov.sample_random_shots(rho, 3000, np.random.default_rng(5))
    c = ov.run_overlap(rho, plan, None, shots=shots)
    for x, y in zip(a, c):
        np.testing.assert_array_equal(x.sigma, y.sigma)


def test_partial_mode_and_smaller_marginals():
    rho = q.random_mixed(4, 16, 6)
    plan = ov.OverlapPlan(4, 2, 0.5, 0.2, 20_000, subsets=((0, 3), (1, 2)), include_smaller=True)
    ests = ov.run_overlap(rho, plan, np.random.default_rng(0))
    assert [e.subset for e in ests] == [(0, 3), (1, 2), (0,), (1,), (2,), (3,)]
    by_subset = {e.subset: e for e in ests}
    np.testing.assert_allclose(by_subset[(3,)].sigma, q.partial_trace(by_subset[(0, 3)].sigma, [1]))
    for e in ests:
        assert np.trace(e.sigma).real == pytest.approx(1)
        assert sum(e.per_basis_counts.values()) == 20_000


def test_subset_estimate_record_roundtrip():
    rho = q.random_mixed(2, 4, 1)
    est = ov.run_overlap(rho, ov.OverlapPlan(2, 2, 0.5, 0.2, 500), np.random.default_rng(0))[0]
    rec = est.to_record()
    assert rec["subset"] == [0, 1]
    assert len(rec["sigma"]) == 4 and len(rec["sigma"][0][0]) == 2
    back = ov.SubsetEstimate.from_record(rec)
    np.testing.assert_array_equal(back.sigma, est.sigma)
    assert back.per_basis_counts == est.per_basis_counts
