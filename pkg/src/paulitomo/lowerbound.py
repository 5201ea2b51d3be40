"""Classical hidden-bit experiment behind the ``log(n/delta)/epsilon**2`` lower bound.

Each of ``n`` columns is a biased coin: ``q_0`` puts ``1/2 - eps`` on symbol 0 and
``1/2 + eps`` on symbol 1, ``q_1`` the reverse. A hidden bit string ``z`` picks
the coin per column, ``m`` rows are drawn from the product distribution, and
the decoder guesses each ``z_j`` as the symbol that appears *less* in column j.

Because the target states are diagonal, any joint quantum measurement reduces
to this classical setting, so everything here is purely classical.
"""
from __future__ import annotations

import math
from typing import Sequence

import numpy as np
from scipy.special import logsumexp

from .estimator import ceil_tol


def _check_epsilon(epsilon: float) -> None:
    if not 0 < epsilon < 0.5:
        raise ValueError(f"epsilon must lie in (0, 1/2), got {epsilon}")


def prob_one(z: np.ndarray | int, epsilon: float) -> np.ndarray:
    """Probability of symbol 1 under ``q_z``."""
    return np.where(np.asarray(z) == 0, 0.5 + epsilon, 0.5 - epsilon)


def sample_dataset(z: Sequence[int] | str, epsilon: float, m: int, rng: np.random.Generator) -> np.ndarray:
    """``m x n`` bit matrix whose column j holds ``m`` draws from ``q_{z_j}``."""
    _check_epsilon(epsilon)
    if m < 1:
        raise ValueError("m must be >= 1")
    z = np.array([int(c) for c in z], dtype=np.int8)
    if np.any((z != 0) & (z != 1)):
        raise ValueError("hidden index must be a bit string")
    return (rng.random((m, z.size)) < prob_one(z, epsilon)).astype(np.uint8)


def majority_decode(data: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Per column, the symbol with the strictly smaller count; ties go to a fair coin.

    Accepts a single ``(m, n)`` dataset or a stack ``(..., m, n)``; the coin flips
    are drawn for every column so the rng advance does not depend on the data.
    """
    data = np.asarray(data)
    m = data.shape[-2]
    ones = data.sum(axis=-2)
    zeros = m - ones
    coin = rng.integers(0, 2, size=ones.shape, dtype=np.uint8)
    return np.where(ones < zeros, 1, np.where(zeros < ones, 0, coin)).astype(np.uint8)


# --------------------------------------------------------------------------
# Exact binomial oracle (log domain)

def binomial_log_pmf(m: int, p: float) -> np.ndarray:
    k = np.arange(m + 1)
    logc = np.array([math.lgamma(m + 1) - math.lgamma(i + 1) - math.lgamma(m - i + 1) for i in k])
    with np.errstate(divide="ignore"):
        return logc + k * np.log(p) + (m - k) * np.log1p(-p)


def binomial_tail(m: int, p: float, threshold: float) -> float:
    """``P(Bin(m, p) > threshold)`` by summing the pmf in log space."""
    lp = binomial_log_pmf(m, p)
    k = np.arange(m + 1)
    sel = lp[k > threshold]
    return float(np.exp(logsumexp(sel))) if sel.size else 0.0


def decode_success_probability(m: int, epsilon: float) -> float:
    """Exact per-column success of ``majority_decode`` (ties count half)."""
    _check_epsilon(epsilon)
    # by symmetry take z = 1: symbol 1 has probability 1/2 - eps, success iff it is the minority
    pmf = np.exp(binomial_log_pmf(m, 0.5 - epsilon))
    k = np.arange(m + 1)
    return float(pmf[2 * k < m].sum() + 0.5 * pmf[2 * k == m].sum())


# --------------------------------------------------------------------------
# Checks and sample counts

def anticoncentration_rhs(epsilon: float, m: int, t: float) -> float:
    return 0.25 * math.exp(-2 * t**2 / (m * (0.5 - epsilon)))


def anticoncentration_check(
    epsilon: float, m: int, t: float, trials: int, rng: np.random.Generator
) -> tuple[float, float, bool]:
    """Empirical ``P(Bin(m, 1/2 - eps) > t + m(1/2 - eps))`` against its lower bound.

    Returns ``(empirical_lhs, rhs, pass)`` with pass iff the empirical frequency
    is at least ``rhs`` minus three standard errors. The standard error uses the
    larger of the empirical and bound variances so a zero count on a tiny tail
    is not treated as exact.
    """
    _check_epsilon(epsilon)
    if not 0 <= t <= 2 * m * epsilon:
        raise ValueError(f"t must lie in [0, 2 m eps] = [0, {2 * m * epsilon}], got {t}")
    p = 0.5 - epsilon
    draws = rng.binomial(m, p, size=trials)
    lhs = float(np.mean(draws > t + m * p))
    rhs = anticoncentration_rhs(epsilon, m, t)
    se = math.sqrt(max(lhs * (1 - lhs), rhs * (1 - rhs)) / trials)
    return lhs, rhs, lhs >= rhs - 3 * se


def required_samples_single(epsilon: float, delta_prime: float) -> int:
    """``ceil((1 - 2 eps) / (4 eps**2) * ln(1 / (4 delta')))``, at least 1."""
    _check_epsilon(epsilon)
    if not 0 < delta_prime < 0.25:
        raise ValueError(f"delta' must lie in (0, 1/4), got {delta_prime}")
    m = (1 - 2 * epsilon) / (4 * epsilon**2) * math.log(1 / (4 * delta_prime))
    return max(1, ceil_tol(m))


def simulate_decoding(
    n: int, epsilon: float, m: int, trials: int, rng: np.random.Generator
) -> np.ndarray:
    """Correctness matrix ``(trials, n)`` of majority decoding on fresh hidden strings."""
    _check_epsilon(epsilon)
    z = rng.integers(0, 2, size=(trials, n), dtype=np.uint8)
    p1 = prob_one(z, epsilon)
    # chunk over trials to cap memory at roughly 8M uniforms
    chunk = max(1, 8_000_000 // max(1, m * n))
    ok = np.empty((trials, n), dtype=bool)
    for lo in range(0, trials, chunk):
        hi = min(trials, lo + chunk)
        data = (rng.random((hi - lo, m, n)) < p1[lo:hi, None, :]).astype(np.uint8)
        ok[lo:hi] = majority_decode(data, rng) == z[lo:hi]
    return ok


def joint_success_rate(n: int, epsilon: float, m: int, trials: int, rng: np.random.Generator) -> float:
    return float(simulate_decoding(n, epsilon, m, trials, rng).all(axis=1).mean())


def factorization_check(
    n: int, epsilon: float, m: int, trials: int, rng: np.random.Generator
) -> dict:
    """Compare empirical joint success with (per-column success)**n.

    The pooled standard error combines the joint-rate error with the
    delta-method error of the product estimate.
    """
    ok = simulate_decoding(n, epsilon, m, trials, rng)
    joint = float(ok.all(axis=1).mean())
    per = float(ok.mean())
    product = per**n
    se_joint = math.sqrt(joint * (1 - joint) / trials)
    se_per = math.sqrt(per * (1 - per) / (trials * n))
    se_product = n * per ** (n - 1) * se_per
    se = math.sqrt(se_joint**2 + se_product**2)
    return {
        "joint": joint,
        "per_coordinate": per,
        "product": product,
        "stderr": se,
        "pass": abs(joint - product) <= 3 * se + 1e-12,
    }


def minimal_samples(
    n: int,
    epsilon: float,
    delta: float,
    rng: np.random.Generator,
    trials: int = 2000,
) -> tuple[int, float]:
    """Binary-search the smallest m whose empirical joint success is at least ``1 - delta``.

    Each candidate m is evaluated on its own stream derived from one draw of
    ``rng``, so the answer does not depend on the search path.
    Returns ``(m_star, success_rate_at_m_star)``.
    """
    base = int(rng.integers(2**63))
    cache: dict[int, float] = {}

    def rate(m: int) -> float:
        if m not in cache:
            cache[m] = joint_success_rate(n, epsilon, m, trials, np.random.default_rng([base, m]))
        return cache[m]

    hi = 1
    while rate(hi) < 1 - delta:
        hi *= 2
        if hi > 1 << 20:
            raise RuntimeError("success target not reached")
    lo = hi // 2  # rate(lo) < target or lo == 0
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if rate(mid) >= 1 - delta:
            hi = mid
        else:
            lo = mid
    return hi, rate(hi)


def scaling_experiment(
    n_list: Sequence[int],
    epsilon: float,
    delta: float,
    rng: np.random.Generator,
    trials: int = 2000,
) -> list[dict]:
    """Rows ``{n, m_star, trials, success_rate, stderr}`` for each n."""
    _check_epsilon(epsilon)
    if trials < 2000:
        raise ValueError("scaling experiment needs at least 2000 trials per point")
    rows = []
    for n in n_list:
        m_star, rate = minimal_samples(n, epsilon, delta, rng, trials)
        rows.append(
            {
                "n": int(n),
                "m_star": m_star,
                "trials": trials,
                "success_rate": rate,
                "stderr": math.sqrt(rate * (1 - rate) / trials),
            }
        )
    return rows
