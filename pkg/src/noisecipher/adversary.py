"""The code breaker's toolkit.

An eavesdropper sees only blocks of error indicators. Without the secret
partition the best it can do is score every candidate (alpha, beta)
placement by the likelihood of the observed traffic with the key bit
marginalized out, which forces an exhaustive search over a space that grows
combinatorially with block length. This module implements that search at
desk scale, the column statistics an attacker would use to probe for
structure, and the heuristic workload bound for full-size parameters.

Scores carry an inherent degeneracy: swapping the alpha and beta labels
swaps the two bit hypotheses, so a candidate and its mirror always score
identically. Rankings therefore recover the partition only up to that
relabeling, and ``truth_rank`` counts the better-placed of the two.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np
from scipy.stats import chi2

from .core import (
    Block,
    NoiseParams,
    Partition,
    partition_count,
    partition_count_log2,
)
from .errors import EmptyInput, InvalidParams, LengthMismatch, SearchSpaceTooLarge

_LOG_HALF = math.log(0.5)


@dataclass
class AttackResult:
    """Full ranking of candidate partitions from an exhaustive attack.

    ``ranked`` is sorted non-increasing by score, ties broken toward the
    candidate enumerated first (lexicographically smaller). ``truth_rank``
    is the 1-based rank of the true partition or its mirror, whichever
    places better; it is only populated in simulation/test contexts where
    the truth is known.
    """

    ranked: list[tuple[Partition, float]]
    evaluated: int
    truth_rank: int | None
    n: int
    n_alpha: int
    n_beta: int


@dataclass(frozen=True)
class WorkloadBound:
    """The heuristic attack-cost estimate for full-size parameters.

    ``min_statistics`` is the decoy-to-carrier ratio, read as the minimum
    marginal sample an attacker needs; the operations bound is 2 raised to
    that count. This is a heuristic, not a proof: the rigorous candidate
    count lives in :func:`noisecipher.core.partition_count` and reports
    show both so the gap stays visible.
    """

    min_statistics: int
    operations_lower_bound_log2: float


def _stack_blocks(blocks, n: int) -> np.ndarray:
    arrs = []
    for i, blk in enumerate(blocks):
        if len(blk) != n:
            raise LengthMismatch(f"block {i} has {len(blk)} positions, expected {n}")
        arrs.append(blk.errors)
    if not arrs:
        return np.zeros((0, n), dtype=np.uint8)
    return np.stack(arrs)


def _binom_loglik(k: np.ndarray, m: int, p: float) -> np.ndarray:
    """Vectorized log P[count == k] for Binomial(m, p), constant term dropped.

    Deterministic rates stay exact: impossible outcomes give -inf and the
    0 * log(0) corner gives 0.
    """
    k = np.asarray(k, dtype=np.float64)
    if p == 0.0:
        return np.where(k > 0, -np.inf, 0.0)
    if p == 1.0:
        return np.where(k < m, -np.inf, 0.0)
    return k * math.log(p) + (m - k) * math.log1p(-p)


def _mixture_score(
    stacked: np.ndarray,
    totals: np.ndarray,
    a_idx: np.ndarray,
    b_idx: np.ndarray,
    params: NoiseParams,
) -> float:
    """Sum over blocks of log( (P[block|bit0] + P[block|bit1]) / 2 ).

    The gamma count is derived from per-block totals, so candidates only
    pay for their alpha/beta columns.
    """
    m_a = a_idx.shape[0]
    m_b = b_idx.shape[0]
    m_g = stacked.shape[1] - m_a - m_b
    k_a = stacked[:, a_idx].sum(axis=1)
    k_b = stacked[:, b_idx].sum(axis=1)
    k_g = totals - k_a - k_b
    gamma_term = _binom_loglik(k_g, m_g, params.p_z)
    loglik_bit0 = _binom_loglik(k_a, m_a, params.p_x) + _binom_loglik(k_b, m_b, params.p_y) + gamma_term
    loglik_bit1 = _binom_loglik(k_a, m_a, params.p_y) + _binom_loglik(k_b, m_b, params.p_x) + gamma_term
    return float(np.sum(np.logaddexp(loglik_bit0, loglik_bit1) + _LOG_HALF))


def score_partition(candidate: Partition, blocks, params: NoiseParams) -> float:
    """Bit-marginalized log-likelihood of the observed blocks under a candidate.

    Higher is better. The attacker does not know the key bits, so each
    block contributes the log of the uniform-prior mixture over both bit
    hypotheses; a candidate and its mirror score identically by symmetry.
    """
    stacked = _stack_blocks(blocks, candidate.n)
    totals = stacked.sum(axis=1)
    a_idx = np.array(candidate.alpha, dtype=np.intp)
    b_idx = np.array(candidate.beta, dtype=np.intp)
    return _mixture_score(stacked, totals, a_idx, b_idx, params)


def exhaustive_attack(
    blocks,
    n: int,
    n_alpha: int,
    n_beta: int,
    params: NoiseParams,
    limit: int,
    truth: Partition | None = None,
) -> AttackResult:
    """Score every ordered (alpha, beta) placement and return the full ranking.

    Candidates are enumerated in lexicographic order, which also fixes how
    score ties are broken. Raises :class:`SearchSpaceTooLarge` when the
    candidate count exceeds ``limit``; at full-size parameters that error
    is the point, not a failure.
    """
    if n_alpha != n_beta or n_alpha < 1:
        raise InvalidParams(
            f"candidates must have n_alpha == n_beta >= 1, got {n_alpha} and {n_beta}"
        )
    total = partition_count(n, n_alpha, n_beta)
    if total > limit:
        raise SearchSpaceTooLarge(
            f"search space has {total} candidates (2^{math.log2(total):.1f}), "
            f"limit is {limit}",
            count=total,
            log2_count=math.log2(total),
        )
    stacked = _stack_blocks(blocks, n)
    totals = stacked.sum(axis=1)

    candidates: list[Partition] = []
    scores: list[float] = []
    positions = range(n)
    for alpha in combinations(positions, n_alpha):
        alpha_set = set(alpha)
        rest = [i for i in positions if i not in alpha_set]
        a_idx = np.array(alpha, dtype=np.intp)
        for beta in combinations(rest, n_beta):
            beta_set = set(beta)
            gamma = tuple(i for i in rest if i not in beta_set)
            candidates.append(Partition(n=n, alpha=alpha, beta=beta, gamma=gamma))
            scores.append(_mixture_score(stacked, totals, a_idx, np.array(beta, dtype=np.intp), params))
    assert len(candidates) == total

    # stable sort on descending score keeps lexicographic order among ties
    order = sorted(range(len(candidates)), key=lambda i: -scores[i])
    ranked = [(candidates[i], scores[i]) for i in order]

    truth_rank = None
    if truth is not None:
        wanted = {truth, truth.mirrored()}
        truth_rank = min(r for r, (cand, _) in enumerate(ranked, start=1) if cand in wanted)
    return AttackResult(
        ranked=ranked,
        evaluated=len(candidates),
        truth_rank=truth_rank,
        n=n,
        n_alpha=n_alpha,
        n_beta=n_beta,
    )


@dataclass
class ColumnStatistics:
    """Per-position empirical flip rates over a pile of intercepted blocks."""

    counts: np.ndarray
    n_blocks: int
    per_position: np.ndarray
    grand_mean: float


def column_statistics(blocks) -> ColumnStatistics:
    """Mean error indicator per position across blocks, plus the grand mean."""
    blocks = list(blocks)
    if not blocks:
        raise EmptyInput("column statistics need at least one block")
    stacked = _stack_blocks(blocks, len(blocks[0]))
    counts = stacked.sum(axis=0, dtype=np.int64)
    rates = counts / len(blocks)
    return ColumnStatistics(
        counts=counts,
        n_blocks=len(blocks),
        per_position=rates,
        grand_mean=float(counts.sum() / stacked.size),
    )


def column_uniformity(stats: ColumnStatistics, expected_rate: float) -> tuple[float, float]:
    """Chi-square test that every column's flip rate equals ``expected_rate``.

    Each column count is Binomial(n_blocks, rate) under the null; the
    statistic is the sum of squared z-scores with one degree of freedom per
    column. Returns (statistic, p-value). A healthy cipher under balanced
    key bits should fail to reject at any sane level.
    """
    if not 0.0 < expected_rate < 1.0:
        raise InvalidParams(f"expected_rate must lie in (0, 1), got {expected_rate}")
    n = stats.n_blocks
    var = n * expected_rate * (1.0 - expected_rate)
    z = (stats.counts - n * expected_rate) / math.sqrt(var)
    statistic = float(np.sum(z * z))
    return statistic, float(chi2.sf(statistic, df=stats.counts.shape[0]))


def workload_bound(n_alpha: int, n_beta: int, n_gamma: int) -> WorkloadBound:
    """The 2^s attack-cost heuristic with s the decoy-to-carrier ratio.

    The basic scheme (no decoys) gets s = 1: nothing stops an attacker from
    searching on a marginal handful of bits. Decoys force the marginal
    sample up in proportion to their share of the block.
    """
    if n_alpha != n_beta or n_alpha < 1 or n_gamma < 0:
        raise InvalidParams(
            f"need n_alpha == n_beta >= 1 and n_gamma >= 0, "
            f"got ({n_alpha}, {n_beta}, {n_gamma})"
        )
    min_statistics = n_gamma // n_alpha if n_gamma > 0 else 1
    return WorkloadBound(
        min_statistics=min_statistics,
        operations_lower_bound_log2=float(min_statistics),
    )


def attack_report(result: AttackResult, top: int = 10) -> dict:
    """JSON-ready summary of an attack: leading candidates plus both cost figures."""
    n_gamma = result.n - result.n_alpha - result.n_beta
    bound = workload_bound(result.n_alpha, result.n_beta, n_gamma)
    return {
        "evaluated": result.evaluated,
        "top": [
            {"alpha": list(cand.alpha), "beta": list(cand.beta), "score": score}
            for cand, score in result.ranked[:top]
        ],
        "truth_rank": result.truth_rank,
        "workload": {
            "min_statistics": bound.min_statistics,
            "log2_ops": bound.operations_lower_bound_log2,
            "log2_partition_count": partition_count_log2(result.n, result.n_alpha, result.n_beta),
        },
    }
