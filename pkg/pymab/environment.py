"""Simulated reward generator standing in for the real cohort."""

import logging
from dataclasses import dataclass
from typing import Tuple

from .exceptions import MABValidationException, Violation
from .model import EnvironmentSchedule

_log = logging.getLogger(__name__)

SCHEDULE_KINDS = ('stationary', 'piecewise', 'segments')

@dataclass(frozen=True)
class WeeklyOutcome:
    """Every observation collected in one week.

    Args:
        week (int): The 1-based week.
        observations (tuple): One :class:`BatchObservation` per (active policy, arm),
            ordered by policy then arm.
    """

    week: int
    observations: Tuple

    def for_policy(self, policy):
        """Return ``{arm: observation}`` for one policy (empty if it did not allocate)."""

        return {obs.arm: obs for obs in self.observations if obs.policy is policy}

    @property
    def policies(self):
        """tuple: The policies with observations this week, in report order."""

        seen = []
        for obs in self.observations:
            if obs.policy not in seen:
                seen.append(obs.policy)

        return tuple(sorted(seen, key=lambda policy: policy.index))

    @property
    def assigned(self):
        """int: Students assigned this week across all policies."""

        return sum(obs.n for obs in self.observations)

def draw_rewards(alloc, true_means, rng):
    """Draw the number of opened emails per arm.

    Each assigned student opens with the arm's probability; draws are made student by
    student so stream consumption depends only on the allocation.

    Args:
        alloc (AllocationResult): Students per arm.
        true_means (sequence): Open probability per arm, each in [0, 1].
        rng (numpy.random.Generator): The reward stream.

    Returns:
        tuple: Successes per arm, each between 0 and the arm's count.
    """

    if len(true_means) != alloc.arms:
        raise MABValidationException([Violation(
            'BAD_DIMENSIONS', 'true_means',
            "{} means for {} arms".format(len(true_means), alloc.arms)
        )])
    if any(not 0.0 <= mean <= 1.0 for mean in true_means):
        raise MABValidationException([Violation(
            'OUT_OF_RANGE', 'true_means', "means must lie in [0, 1]: {!r}".format(true_means)
        )])

    rewards = tuple(
        int((rng.random(count) < mean).sum())
        for count, mean in zip(alloc.counts, true_means)
    )

    _log.debug("Drew rewards %s for allocation %s", rewards, alloc.counts)

    return rewards

def make_schedule(kind, spec, horizon=None):
    """Build an :class:`EnvironmentSchedule`.

    Args:
        kind (str): ``stationary`` (one row replicated ``horizon`` times), ``piecewise``
            (one row per week, stored verbatim) or ``segments`` (a list of
            ``(weeks, row)`` pairs, each row repeated for its number of weeks).
        spec (sequence): The row, rows or segments described above.
        horizon (int): Required for ``stationary``; checked against the row count otherwise.

    Raises:
        MABValidationException: ``BAD_DIMENSIONS`` or ``OUT_OF_RANGE``.

    Returns:
        EnvironmentSchedule: The schedule.
    """

    if kind == 'stationary':
        if horizon is None or horizon < 1:
            raise MABValidationException([Violation(
                'BAD_DIMENSIONS', 'horizon', "a stationary schedule needs a horizon >= 1"
            )])
        rows = (tuple(spec),) * horizon
    elif kind == 'piecewise':
        rows = tuple(tuple(row) for row in spec)
    elif kind == 'segments':
        rows = tuple(tuple(row) for weeks, row in spec for _ in range(weeks))
    else:
        raise MABValidationException([Violation(
            'INVALID_VALUE', 'kind', "expected one of {}, got {!r}".format(SCHEDULE_KINDS, kind)
        )])

    if horizon is not None and len(rows) != horizon:
        raise MABValidationException([Violation(
            'BAD_DIMENSIONS', 'means', "expected {} weekly rows, got {}".format(horizon, len(rows))
        )])

    schedule = EnvironmentSchedule(rows)

    _log.debug("Built %s schedule with %d weeks and %d arms", kind, schedule.horizon, schedule.arms)

    return schedule
