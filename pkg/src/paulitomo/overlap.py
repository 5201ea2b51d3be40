"""Overlapping tomography: every k-qubit marginal from one stream of random Pauli shots.

Each shot measures every qubit in an independently chosen basis from
``{X, Y, Z}``. Restricting a shot to a subset ``S`` gives a shot on ``rho_S``, so
one shared stream feeds the reconstruction of all marginals at once.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .estimator import ceil_tol, reconstruct_from_expectations
from .measurement import (
    OutcomeSampler,
    Shot,
    ShotBatch,
    all_bases,
    as_batch,
    compatible_pauli_indices,
    sign_matrix,
)
from .qstate import check_subset, num_qubits, one_norm_distance, partial_trace


class InsufficientCoverageError(ValueError):
    """A restricted basis received no shots, so some Pauli cannot be estimated."""

    def __init__(self, subset: tuple[int, ...], basis: str):
        super().__init__(f"insufficient coverage on subset {subset}: basis {basis!r} was never measured")
        self.subset = subset
        self.basis = basis


def total_shots(n: int, k: int, epsilon: float, delta: float, num_subsets: int | None = None) -> int:
    """``ceil(32 * 10**k * ln(2 B / delta) / epsilon**2)``.

    ``B`` is ``C(n, k)`` unless ``num_subsets`` (partial mode) is given.
    """
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= n, got k={k}, n={n}")
    if epsilon <= 0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    if not 0 < delta < 1:
        raise ValueError(f"delta must lie in (0, 1), got {delta}")
    b = math.comb(n, k) if num_subsets is None else num_subsets
    if b < 1:
        raise ValueError("need at least one target subset")
    return max(1, ceil_tol(32 * 10**k * math.log(2 * b / delta) / epsilon**2))


@dataclass(frozen=True)
class OverlapPlan:
    """Parameters of one overlapping-tomography run.

    ``subsets=None`` targets every size-``k`` subset; otherwise only the listed
    ones (partial mode). ``include_smaller`` additionally reports every
    nonempty subset of size below ``k``, derived by partial trace.
    """

    n: int
    k: int
    epsilon: float
    delta: float
    total_shots: int
    subsets: tuple[tuple[int, ...], ...] | None = None
    include_smaller: bool = False

    def __post_init__(self):
        if not 1 <= self.k <= self.n:
            raise ValueError(f"need 1 <= k <= n, got k={self.k}, n={self.n}")
        if self.total_shots < 1:
            raise ValueError("total_shots must be >= 1")
        if self.subsets is not None:
            subsets = tuple(check_subset(s, self.n) for s in self.subsets)
            if not subsets or any(not s or len(s) > self.k for s in subsets):
                raise ValueError(f"partial-mode subsets must be nonempty with size <= {self.k}")
            object.__setattr__(self, "subsets", subsets)

    @classmethod
    def from_targets(
        cls,
        n: int,
        k: int,
        epsilon: float,
        delta: float,
        subsets: Sequence[Sequence[int]] | None = None,
        include_smaller: bool = False,
    ) -> "OverlapPlan":
        subsets = None if subsets is None else tuple(tuple(s) for s in subsets)
        t = total_shots(n, k, epsilon, delta, None if subsets is None else len(subsets))
        return cls(n, k, epsilon, delta, t, subsets, include_smaller)

    def targets(self) -> list[tuple[int, ...]]:
        if self.subsets is not None:
            return list(self.subsets)
        return list(itertools.combinations(range(self.n), self.k))


@dataclass
class SubsetEstimate:
    subset: tuple[int, ...]
    sigma: np.ndarray
    per_basis_counts: dict[str, int]
    trace_error: float | None = None

    def to_record(self) -> dict:
        """JSON-ready form: subset, ``[re, im]`` entry pairs, per-basis counts."""
        rec = {
            "subset": list(self.subset),
            "sigma": [[[float(z.real), float(z.imag)] for z in row] for row in self.sigma],
            "per_basis_counts": dict(self.per_basis_counts),
        }
        if self.trace_error is not None:
            rec["trace_error"] = self.trace_error
        return rec

    @classmethod
    def from_record(cls, rec: dict) -> "SubsetEstimate":
        sigma = np.array([[complex(re, im) for re, im in row] for row in rec["sigma"]])
        return cls(tuple(rec["subset"]), sigma, dict(rec["per_basis_counts"]), rec.get("trace_error"))


def outcome_table(shots: ShotBatch | Iterable[Shot], subset: Sequence[int]) -> np.ndarray:
    """Counts ``N[b, s]`` of restricted basis ``b`` and restricted outcome ``s`` on ``subset``."""
    batch = as_batch(shots)
    sub = batch.restrict(subset)
    k = sub.n
    flat = sub.basis_indices() * 2**k + sub.outcome_indices()
    return np.bincount(flat, minlength=6**k).reshape(3**k, 2**k)


def subset_from_table(table: np.ndarray, subset: Sequence[int]) -> SubsetEstimate:
    """Pooled estimate of ``rho_S`` from a restricted outcome table.

    ``table`` may hold real weights instead of counts; feeding exact outcome
    probabilities returns the exact marginal.
    """
    subset = tuple(subset)
    k = len(subset)
    table = np.asarray(table, dtype=float)
    if table.shape != (3**k, 2**k):
        raise ValueError(f"expected table of shape {(3**k, 2**k)}, got {table.shape}")
    totals = table.sum(axis=1)
    bases = all_bases(k)
    empty = np.flatnonzero(totals <= 0)
    if empty.size:
        raise InsufficientCoverageError(subset, bases[int(empty[0])])
    signed = table @ sign_matrix(k).T
    q = compatible_pauli_indices(k).ravel()
    mu = np.bincount(q, weights=signed.ravel(), minlength=4**k)
    cnt = np.bincount(q, weights=np.repeat(totals, 2**k), minlength=4**k)
    sigma = reconstruct_from_expectations(mu / cnt, k)
    counts = {b: (int(t) if float(t).is_integer() else float(t)) for b, t in zip(bases, totals)}
    return SubsetEstimate(subset, sigma, counts)


def reconstruct_subset(shots: ShotBatch | Iterable[Shot], subset: Sequence[int]) -> SubsetEstimate:
    """Estimate the marginal on ``subset`` using every compatible restricted shot.

    Raises:
        InsufficientCoverageError: if some restricted basis never occurs.
    """
    batch = as_batch(shots)
    if len(batch) == 0:
        raise ValueError("no shots")
    subset = check_subset(subset, batch.n)
    if not subset:
        raise ValueError("subset must be nonempty")
    return subset_from_table(outcome_table(batch, subset), subset)


def coverage_check(
    shots: ShotBatch | Iterable[Shot], subset: Sequence[int], m_required: int
) -> tuple[bool, int, float]:
    """Did every restricted basis on ``subset`` get at least ``m_required`` shots?

    Returns ``(ok, min_count, bound)`` where ``bound = 3**k * (2/e)**m_required``
    is the worst-case failure probability when ``2 * m_required * 3**k`` random
    shots are drawn.
    """
    batch = as_batch(shots)
    subset = check_subset(subset, batch.n)
    k = len(subset)
    counts = np.bincount(batch.restrict(subset).basis_indices(), minlength=3**k)
    min_count = int(counts.min())
    bound = 3**k * (2 / math.e) ** m_required
    return min_count >= m_required, min_count, bound


def basis_counts(shots: ShotBatch | Iterable[Shot], subset: Sequence[int]) -> dict[str, int]:
    batch = as_batch(shots)
    subset = check_subset(subset, batch.n)
    counts = np.bincount(batch.restrict(subset).basis_indices(), minlength=3 ** len(subset))
    return dict(zip(all_bases(len(subset)), counts.tolist()))


def sample_random_shots(rho: np.ndarray, num_shots: int, rng: np.random.Generator) -> ShotBatch:
    """``num_shots`` shots, each qubit measured in an independent uniform random basis."""
    return OutcomeSampler(rho).sample_random(num_shots, rng)


def run_overlap(
    rho: np.ndarray,
    plan: OverlapPlan,
    rng: np.random.Generator,
    *,
    shots: ShotBatch | None = None,
) -> list[SubsetEstimate]:
    """Draw ``plan.total_shots`` random-basis shots and estimate every target marginal.

    Pass ``shots`` to reuse an existing stream (it is then used instead of
    sampling). Each estimate carries its one-norm error against the exact
    marginal of ``rho``.
    """
    rho = np.asarray(rho, dtype=complex)
    n = num_qubits(rho)
    if plan.n != n:
        raise ValueError(f"plan is for {plan.n} qubits, state has {n}")
    if shots is None:
        shots = sample_random_shots(rho, plan.total_shots, rng)
    estimates = []
    for s in plan.targets():
        est = reconstruct_subset(shots, s)
        est.trace_error = one_norm_distance(partial_trace(rho, s), est.sigma)
        estimates.append(est)
    if plan.include_smaller:
        estimates.extend(_smaller_marginals(rho, shots, estimates, plan.k))
    return estimates


def _smaller_marginals(rho, shots, estimates: list[SubsetEstimate], k: int) -> list[SubsetEstimate]:
    have = {e.subset for e in estimates}
    out = []
    for size in range(1, k):
        for s in sorted({c for e in estimates for c in itertools.combinations(e.subset, size)}):
            if s in have:
                continue
            parent = next(e for e in estimates if set(s) <= set(e.subset))
            local = [parent.subset.index(i) for i in s]
            sigma = partial_trace(parent.sigma, local)
            err = one_norm_distance(partial_trace(rho, s), sigma)
            out.append(SubsetEstimate(s, sigma, basis_counts(shots, s), err))
            have.add(s)
    return out


def all_within(estimates: Sequence[SubsetEstimate], epsilon: float) -> bool:
    """True iff every estimate has one-norm error strictly below ``epsilon``."""
    return all(e.trace_error is not None and e.trace_error < epsilon for e in estimates)


def exact_subset_table(rho: np.ndarray, subset: Sequence[int]) -> np.ndarray:
    """Exact restricted outcome probabilities ``p(s | b)`` on ``subset``, one row per basis."""
    marginal = partial_trace(rho, subset)
    sampler = OutcomeSampler(marginal)
    return np.stack([sampler.distribution(b) for b in all_bases(len(subset))])
