"""Statistical annotation of candidate rules and ranking comparison.

Every path-selected feature becomes a rule record: the direction it
pushes the response (toward it or away from it), the frequency of the
response among matching instances, a likelihood-ratio independence test
against the scope base rate, the derived effect size, and coverage and
precision. Significance is a reported flag, never a filter.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np
import scipy.stats

from .featurize import DesignMatrix

DIRECTION_RESPONSE = "Q"
DIRECTION_COMPLEMENT = "notQ"
SIGNIFICANCE_LEVEL = 0.01


class DegenerateScopeError(Exception):
    """The scope base rate is 0 or 1; the independence test is undefined."""


class RuleCounts(NamedTuple):
    """Contingency counts: scope, response, trigger, and their overlap."""

    scope: int  # instances in the scope
    response: int  # instances where the response holds
    trigger: int  # instances matching the trigger feature
    overlap: int  # instances matching the trigger where the response holds


def validate_counts(counts: RuleCounts) -> None:
    if counts.scope < 1:
        raise ValueError("scope count must be >= 1")
    if not (0 <= counts.response <= counts.scope):
        raise ValueError(f"inconsistent counts: {counts}")
    if not (0 <= counts.trigger <= counts.scope):
        raise ValueError(f"inconsistent counts: {counts}")
    if counts.overlap > min(counts.trigger, counts.response) or counts.overlap < 0:
        raise ValueError(f"inconsistent counts: {counts}")
    if counts.overlap < counts.trigger - (counts.scope - counts.response):
        raise ValueError(f"inconsistent counts: {counts}")


class GTestResult(NamedTuple):
    g: float
    p_value: float
    significant: bool


def g_test(n: int, alpha: float, mu: float) -> GTestResult:
    """Likelihood-ratio test of a rate alpha observed on n samples against
    a base rate mu: G = 2n * KL(Bernoulli(alpha) || Bernoulli(mu)).

    The p-value is the upper tail of chi-squared with one degree of
    freedom, computed exactly as erfc(sqrt(G/2)).
    """
    if n < 1:
        raise ValueError(f"sample count must be >= 1, got {n}")
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must be in [0, 1], got {alpha}")
    if not 0.0 <= mu <= 1.0:
        raise ValueError(f"mu must be in [0, 1], got {mu}")
    if mu in (0.0, 1.0):
        raise DegenerateScopeError(
            f"degenerate scope distribution (mu={mu}): test undefined"
        )
    total = 0.0
    if alpha > 0.0:
        total += alpha * math.log(alpha / mu)
    if alpha < 1.0:
        total += (1.0 - alpha) * math.log((1.0 - alpha) / (1.0 - mu))
    g = max(2.0 * n * total, 0.0)
    p_value = math.erfc(math.sqrt(g / 2.0))
    return GTestResult(g=g, p_value=p_value, significant=p_value < SIGNIFICANCE_LEVEL)


def cramers_phi(g: float, n: int) -> float:
    """Effect size sqrt(G / n) for a 2x2 association."""
    if n < 1:
        raise ValueError(f"sample count must be >= 1, got {n}")
    if g < 0:
        raise ValueError(f"test statistic must be >= 0, got {g}")
    return math.sqrt(g / n)


def coverage_precision(counts: RuleCounts, direction: str) -> tuple[float, float]:
    """Direction-aware coverage and precision of the trigger.

    Toward the response: overlap / response and overlap / trigger. Toward
    the complement: both numerators and the coverage denominator swap to
    the complement counts.
    """
    validate_counts(counts)
    if direction == DIRECTION_RESPONSE:
        hits = counts.overlap
        base = counts.response
        base_name = "response count"
    elif direction == DIRECTION_COMPLEMENT:
        hits = counts.trigger - counts.overlap
        base = counts.scope - counts.response
        base_name = "complement count"
    else:
        raise ValueError(f"unknown direction {direction!r}")
    if base == 0:
        raise ValueError(f"cannot compute coverage: {base_name} is zero")
    if counts.trigger == 0:
        raise ValueError("cannot compute precision: trigger count is zero")
    return hits / base, hits / counts.trigger


@dataclass(frozen=True)
class RuleRecord:
    """One statistically annotated candidate rule."""

    feature_id: int
    pattern: str
    direction: str
    n: int
    alpha: float
    mu: float
    g: float
    p_value: float
    significant: bool
    phi_c: float
    coverage: float
    precision: float
    path_rank: int
    entry_step: int
    counts: RuleCounts

    def __post_init__(self) -> None:
        validate_counts(self.counts)
        for name in ("alpha", "mu", "coverage", "precision"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {value}")


def compute_rule(
    feature_id: int,
    matrix: DesignMatrix,
    path_rank: int,
    entry_step: int,
) -> RuleRecord:
    """Build the record for one feature from the design matrix counts.

    alpha and mu are reported for the rule's own direction: when the
    trigger pushes below the base rate the rule targets the complement
    and both rates flip to 1 - rate (the test statistic is invariant
    under that relabeling).
    """
    column = matrix.columns[feature_id]
    if column.size == 0:
        raise ValueError(f"feature {feature_id} matches no instance")
    y = matrix.labels
    counts = RuleCounts(
        scope=matrix.n_rows,
        response=int(y.sum()),
        trigger=int(column.size),
        overlap=int(y[column].sum()),
    )
    validate_counts(counts)
    raw_alpha = counts.overlap / counts.trigger
    raw_mu = counts.response / counts.scope
    if raw_alpha >= raw_mu:
        direction = DIRECTION_RESPONSE
        alpha = counts.overlap / counts.trigger
        mu = raw_mu
    else:
        direction = DIRECTION_COMPLEMENT
        alpha = (counts.trigger - counts.overlap) / counts.trigger
        mu = (counts.scope - counts.response) / counts.scope
    test = g_test(counts.trigger, alpha, mu)
    coverage, precision = coverage_precision(counts, direction)
    if matrix.feature_space is not None:
        pattern = matrix.feature_space.features[feature_id].label
    else:
        pattern = f"f{feature_id}"
    return RuleRecord(
        feature_id=feature_id,
        pattern=pattern,
        direction=direction,
        n=counts.trigger,
        alpha=alpha,
        mu=mu,
        g=test.g,
        p_value=test.p_value,
        significant=test.significant,
        phi_c=cramers_phi(test.g, counts.trigger),
        coverage=coverage,
        precision=precision,
        path_rank=path_rank,
        entry_step=entry_step,
        counts=counts,
    )


def fractional_ranks(values: Sequence[float]) -> np.ndarray:
    """Ranks 1..n with ties replaced by the mean of the tied positions."""
    values = np.asarray(values, dtype=float)
    order = np.argsort(values, kind="stable")
    ranks = np.empty(len(values), dtype=float)
    i = 0
    while i < len(values):
        j = i
        while j + 1 < len(values) and values[order[j + 1]] == values[order[i]]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


class RankComparison(NamedTuple):
    rho: float
    p_value: float
    n_items: int


def spearman(values_a: Sequence[float], values_b: Sequence[float]) -> RankComparison:
    """Tie-aware rank correlation: Pearson on fractional ranks.

    The p-value uses the t approximation with n - 2 degrees of freedom
    (two-sided).
    """
    a = np.asarray(values_a, dtype=float)
    b = np.asarray(values_b, dtype=float)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError("rank vectors must be one-dimensional and equally long")
    n = a.size
    if n < 3:
        raise ValueError(f"need at least 3 items, got {n}")
    ra = fractional_ranks(a) - (n + 1) / 2.0
    rb = fractional_ranks(b) - (n + 1) / 2.0
    denominator = math.sqrt(float((ra * ra).sum()) * float((rb * rb).sum()))
    if denominator == 0.0:
        raise ValueError("rank correlation undefined: a vector is entirely tied")
    rho = float((ra * rb).sum()) / denominator
    rho = max(-1.0, min(1.0, rho))
    if abs(rho) == 1.0:
        p_value = 0.0
    else:
        t = rho * math.sqrt((n - 2) / (1.0 - rho * rho))
        p_value = 2.0 * float(scipy.stats.t.sf(abs(t), df=n - 2))
    return RankComparison(rho=rho, p_value=p_value, n_items=n)
