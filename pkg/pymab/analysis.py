"""Arm summaries, Wald z-tests with Bonferroni correction, and allocation metrics.

Internal values are proportions in [0, 1]; reports convert to percent.
"""

import logging
import math
from collections import namedtuple
from dataclasses import dataclass, replace
from itertools import combinations
from typing import Optional, Tuple

import numpy as np
from scipy import stats

from .exceptions import MABUndefinedSummaryException, MABValidationException, Violation
from .model import PolicyId

_log = logging.getLogger(__name__)

DEFAULT_FAMILY_ALPHA = 0.05

def binomial_se(mean, n_total):
    """Standard error of a binomial proportion, ``sqrt(mean * (1 - mean) / n)``."""

    return math.sqrt(max(mean * (1.0 - mean), 0.0) / n_total)

@dataclass(frozen=True)
class ArmSummary:
    """Cumulative open rate of one arm under one policy.

    ``mean`` and ``se`` are None when the arm has no observations.

    Args:
        policy (PolicyId): The policy.
        arm (int): The 0-based arm.
        mean (float): Cumulative open rate.
        se (float): Standard error of the mean.
        n_total (int): Students observed.
    """

    policy: PolicyId
    arm: int
    mean: Optional[float]
    se: Optional[float]
    n_total: int

    @classmethod
    def from_counts(cls, policy, arm, opened, assigned):
        """Summarise ``opened`` successes out of ``assigned`` students."""

        if assigned == 0:
            return cls(policy, arm, None, None, 0)

        mean = opened / assigned

        return cls(policy, arm, mean, binomial_se(mean, assigned), assigned)

    @classmethod
    def from_rate(cls, policy, arm, mean, n_total):
        """Summarise a reported rate, recomputing its binomial standard error."""

        if n_total == 0:
            return cls(policy, arm, None, None, 0)

        return cls(policy, arm, mean, binomial_se(mean, n_total), n_total)

    @property
    def defined(self):
        """bool: False when the arm has no observations."""

        return self.n_total > 0 and self.mean is not None

@dataclass(frozen=True)
class WaldResult:
    """A two-sided Wald z-test between two arms of one policy.

    Args:
        policy (PolicyId): The policy both arms belong to.
        pair (tuple): The two 0-based arms, in test order.
        statistic (float): ``|mean_a - mean_b| / sqrt(se_a^2 + se_b^2)``.
        p_value (float): Two-sided p-value.
        adjusted_threshold (float): Significance threshold applied.
        significant (bool): ``p_value < adjusted_threshold``.
    """

    policy: PolicyId
    pair: Tuple[int, int]
    statistic: float
    p_value: float
    adjusted_threshold: float
    significant: bool

def summarize(history, arms=None, policy=None):
    """Summarise one policy's observations per arm.

    Args:
        history (list): :class:`BatchObservation` values of a single policy.
        arms (int): Number of arms; inferred from the history when None.
        policy (PolicyId): The policy; inferred from the history when None.

    Raises:
        MABValidationException: The history mixes policies.

    Returns:
        tuple: One :class:`ArmSummary` per arm; arms without observations are undefined.
    """

    policies = {obs.policy for obs in history}
    if len(policies) > 1:
        raise MABValidationException([Violation(
            'INVALID_VALUE', 'history',
            "observations of several policies: {}".format(sorted(p.token for p in policies))
        )])

    if policy is None:
        policy = policies.pop() if policies else PolicyId.UR
    if arms is None:
        arms = max((obs.arm for obs in history), default=-1) + 1

    assigned = np.zeros(arms, dtype=np.int64)
    opened = np.zeros(arms, dtype=np.int64)
    for obs in history:
        assigned[obs.arm] += obs.n
        opened[obs.arm] += obs.r

    return tuple(
        ArmSummary.from_counts(policy, arm, int(opened[arm]), int(assigned[arm]))
        for arm in range(arms)
    )

def wald_test(a, b, threshold=DEFAULT_FAMILY_ALPHA):
    """Compare two arms with an unpooled two-sided Wald z-test.

    Args:
        a (ArmSummary): First arm.
        b (ArmSummary): Second arm.
        threshold (float): Unadjusted significance level. Default 0.05.

    Raises:
        MABUndefinedSummaryException: Either arm has no observations.

    Returns:
        WaldResult: The unadjusted test.
    """

    for summary in (a, b):
        if not summary.defined:
            raise MABUndefinedSummaryException(
                "{} arm {} has no observations".format(summary.policy.token, summary.arm + 1)
            )

    difference = abs(a.mean - b.mean)
    spread = math.sqrt(a.se ** 2 + b.se ** 2)

    if spread > 0:
        statistic = difference / spread
    else:
        statistic = 0.0 if difference == 0 else math.inf

    p_value = min(1.0, float(2.0 * stats.norm.sf(statistic)))

    return WaldResult(
        policy=a.policy,
        pair=(a.arm, b.arm),
        statistic=statistic,
        p_value=p_value,
        adjusted_threshold=threshold,
        significant=p_value < threshold,
    )

def bonferroni(results, family_alpha=DEFAULT_FAMILY_ALPHA):
    """Apply a Bonferroni correction to a family of tests.

    Args:
        results (list): The family of :class:`WaldResult` values (at least one).
        family_alpha (float): Family-wise error rate in (0, 1).

    Raises:
        MABValidationException: Empty family or ``family_alpha`` outside (0, 1).

    Returns:
        tuple: The results with ``adjusted_threshold = family_alpha / m``.
    """

    violations = []
    if not results:
        violations.append(Violation('INVALID_VALUE', 'results', "at least one test required"))
    if not 0.0 < family_alpha < 1.0:
        violations.append(Violation(
            'OUT_OF_RANGE', 'family_alpha', "must lie in (0, 1), got {!r}".format(family_alpha)
        ))
    if violations:
        raise MABValidationException(violations)

    threshold = family_alpha / len(results)

    return tuple(
        replace(result, adjusted_threshold=threshold, significant=result.p_value < threshold)
        for result in results
    )

def confidence_interval(s, level=0.95):
    """Normal-approximation confidence interval of an arm mean, clamped to [0, 1].

    Args:
        s (ArmSummary): The arm.
        level (float): Coverage in (0, 1). Default 0.95.

    Raises:
        MABUndefinedSummaryException: The arm has no observations.
        MABValidationException: ``level`` outside (0, 1).

    Returns:
        tuple: ``(low, high)``.
    """

    if not 0.0 < level < 1.0:
        raise MABValidationException([Violation(
            'OUT_OF_RANGE', 'level', "must lie in (0, 1), got {!r}".format(level)
        )])
    if not s.defined:
        raise MABUndefinedSummaryException(
            "{} arm {} has no observations".format(s.policy.token, s.arm + 1)
        )

    z = float(stats.norm.ppf((1.0 + level) / 2.0))

    return (max(0.0, s.mean - z * s.se), min(1.0, s.mean + z * s.se))

def pairwise_order(arms):
    """Arm pairs in report order: (1,2), (2,3), (3,1) for three arms.

    Cyclic neighbours come first, then the remaining pairs in lexicographic order.
    """

    if arms < 3:
        return list(combinations(range(arms), 2))

    cyclic = [(arm, (arm + 1) % arms) for arm in range(arms)]
    seen = {frozenset(pair) for pair in cyclic}

    return cyclic + [pair for pair in combinations(range(arms), 2) if frozenset(pair) not in seen]

def pairwise_tests(summaries, family_alpha=DEFAULT_FAMILY_ALPHA):
    """Bonferroni-corrected Wald tests between every pair of one policy's arms.

    Pairs involving an arm without observations are skipped.

    Returns:
        tuple: :class:`WaldResult` values in :func:`pairwise_order`; empty if none apply.
    """

    results = []

    for first, second in pairwise_order(len(summaries)):
        if summaries[first].defined and summaries[second].defined:
            results.append(wald_test(summaries[first], summaries[second], family_alpha))
        else:
            _log.debug("Skipping undefined pair (%d, %d)", first + 1, second + 1)

    return bonferroni(results, family_alpha) if results else ()

def policy_summaries(trace):
    """Final credited summaries per policy: ``{PolicyId: tuple of ArmSummary}``."""

    return {
        policy: summarize(trace.credited_history(policy), trace.timeline.arms, policy)
        for policy in PolicyId
    }

Concentration = namedtuple('Concentration', ['weekly', 'cumulative', 'index'])
Concentration.__doc__ = """Allocation proportions of one policy.

    Attributes:
        weekly (tuple): ``(week, proportions)`` pairs for weeks with allocations.
        cumulative (tuple): Share of all allocations per arm.
        index (float): Largest cumulative share.
    """

def allocation_concentration(trace, policy, include_shared=False):
    """Weekly and cumulative allocation proportions of a policy.

    Args:
        trace (ExperimentTrace): The run.
        policy (PolicyId): The policy.
        include_shared (bool): Count the credited history (shared burn-in data)
            instead of the policy's own allocations. Default False.

    Returns:
        Concentration: Weeks where the policy allocates nothing are omitted.
    """

    arms = trace.timeline.arms
    history = trace.credited_history(policy) if include_shared \
        else trace.own_observations(policy)

    by_week = {}
    for obs in history:
        by_week.setdefault(obs.week, np.zeros(arms, dtype=np.int64))[obs.arm] += obs.n

    weekly = tuple(
        (week, tuple(float(value) for value in counts / counts.sum()))
        for week, counts in sorted(by_week.items()) if counts.sum() > 0
    )

    totals = sum(by_week.values(), np.zeros(arms, dtype=np.int64))
    if totals.sum() == 0:
        return Concentration(weekly, tuple(0.0 for _ in range(arms)), 0.0)

    cumulative = tuple(float(value) for value in totals / totals.sum())

    return Concentration(weekly, cumulative, max(cumulative))

def expected_regret(trace, env, policy):
    """Expected opens lost by a policy's own allocations versus the week's best arm."""

    return math.fsum(
        obs.n * (max(env.row(obs.week)) - env.row(obs.week)[obs.arm])
        for obs in trace.own_observations(policy)
    )

WeeklyPoint = namedtuple('WeeklyPoint', [
    'week', 'policy', 'arm', 'cumulative_mean', 'ci_low', 'ci_high', 'allocation_proportion'
])

def weekly_series(trace, level=0.95):
    """Per-week cumulative arm means, confidence bounds and allocation proportions.

    Built from each policy's credited history, so burn-in weeks repeat across policies.
    Undefined values are None.

    Returns:
        list: :class:`WeeklyPoint` values ordered by week, policy, arm.
    """

    arms = trace.timeline.arms
    points = []

    for policy in PolicyId:
        assigned = np.zeros(arms, dtype=np.int64)
        opened = np.zeros(arms, dtype=np.int64)
        history = trace.credited_history(policy)

        for week in trace.timeline.weeks:
            this_week = np.zeros(arms, dtype=np.int64)
            for obs in history:
                if obs.week == week:
                    this_week[obs.arm] += obs.n
                    assigned[obs.arm] += obs.n
                    opened[obs.arm] += obs.r

            for arm in range(arms):
                summary = ArmSummary.from_counts(policy, arm, int(opened[arm]), int(assigned[arm]))
                low, high = confidence_interval(summary, level) if summary.defined else (None, None)
                proportion = float(this_week[arm] / this_week.sum()) if this_week.sum() else None

                points.append(WeeklyPoint(
                    week, policy, arm, summary.mean, low, high, proportion
                ))

    points.sort(key=lambda point: (point.week, point.policy.index, point.arm))

    return points
