"""Allocation and posterior-update rules for UR, TS and TS†.

Allocations are drawn per student. Updates happen once per week, one
:class:`pymab.model.BatchObservation` (one arm) at a time, and are pure: they return
a new :class:`pymab.model.PolicyState`.
"""

import logging
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .exceptions import MABUpdateException
from .model import PolicyId, PolicyState

_log = logging.getLogger(__name__)

HALF = 0.5

@dataclass(frozen=True)
class AllocationResult:
    """Students per arm assigned by one policy in one week.

    Args:
        counts (tuple): One non-negative integer per arm.
    """

    counts: Tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, 'counts', tuple(int(count) for count in self.counts))

    @property
    def total(self):
        """int: The batch size."""

        return sum(self.counts)

    @property
    def arms(self):
        """int: Number of arms."""

        return len(self.counts)

def _counts(assignments, arms):
    return AllocationResult(tuple(np.bincount(assignments, minlength=arms)))

def ur_allocate(batch_size, arms, rng):
    """Assign each student to one of ``arms`` arms uniformly at random.

    Args:
        batch_size (int): Students to assign (0 gives all-zero counts).
        arms (int): Number of arms, at least 1.
        rng (numpy.random.Generator): The allocation stream.

    Returns:
        AllocationResult: Counts summing to ``batch_size``.
    """

    if arms < 1:
        raise ValueError("arms must be at least 1")

    allocation = _counts(rng.integers(0, arms, size=batch_size), arms)
    _log.debug("UR allocated %s", allocation.counts)

    return allocation

def beta_sample(params, rng):
    """Draw once from Beta(alpha, beta) as X / (X + Y) with X, Y standard Gamma.

    numpy's standard Gamma sampler uses the Marsaglia-Tsang rejection scheme for
    shape >= 1, which both parameters satisfy.

    Args:
        params (BetaParams): The posterior to sample.
        rng (numpy.random.Generator): The random stream.

    Returns:
        float: A draw in (0, 1).
    """

    successes = rng.standard_gamma(params.alpha)
    failures = rng.standard_gamma(params.beta)

    return float(successes / (successes + failures))

def _beta_matrix(posteriors, batch_size, rng):
    alphas = np.array([params.alpha for params in posteriors])
    betas = np.array([params.beta for params in posteriors])
    shape = (batch_size, len(posteriors))

    successes = rng.standard_gamma(alphas, size=shape)
    failures = rng.standard_gamma(betas, size=shape)

    return successes / (successes + failures)

def ts_allocate(posteriors, batch_size, rng):
    """Thompson-sample an arm for each student.

    Each student gets fresh draws theta_k ~ Beta(alpha_k, beta_k) for every arm and is
    assigned to the largest; ties go to the lowest arm index.

    Args:
        posteriors (tuple): One :class:`BetaParams` per arm.
        batch_size (int): Students to assign.
        rng (numpy.random.Generator): The allocation stream.

    Returns:
        AllocationResult: Counts summing to ``batch_size``.
    """

    thetas = _beta_matrix(posteriors, batch_size, rng)

    allocation = _counts(np.argmax(thetas, axis=1), len(posteriors))
    _log.debug("TS allocated %s", allocation.counts)

    return allocation

def _check_observation(state, obs, policy):
    if obs.policy is not policy:
        raise MABUpdateException(
            'WRONG_POLICY',
            "expected a {} observation, got {}".format(policy.token, obs.policy.token)
        )
    if obs.r > obs.n:
        raise MABUpdateException(
            'REWARD_EXCEEDS_ASSIGNED',
            "week {} arm {}: opened {} > assigned {}".format(obs.week, obs.arm + 1, obs.r, obs.n)
        )
    if obs.arm >= state.arms:
        raise MABUpdateException(
            'ARM_MISMATCH', "arm {} outside a {}-arm posterior".format(obs.arm + 1, state.arms)
        )

def _credit(state, credits):
    """Add weighted observations to the posteriors and history."""

    posteriors = list(state.posteriors)
    for obs, weight in credits:
        posteriors[obs.arm] = posteriors[obs.arm].add(weight * obs.r, weight * obs.failures)

    return PolicyState(
        state.policy,
        tuple(posteriors),
        state.history + tuple(obs for obs, _ in credits),
        state.weights + tuple(weight for _, weight in credits),
    )

def ur_update(state, obs):
    """Credit a UR observation to the UR posterior: alpha += r, beta += n - r.

    Raises:
        MABUpdateException: ``WRONG_POLICY`` or ``REWARD_EXCEEDS_ASSIGNED``.
    """

    _check_observation(state, obs, PolicyId.UR)

    return _credit(state, ((obs, 1.0),))

def shared_update(state, ur_obs):
    """Credit a burn-in UR observation, at full weight, to any policy's posterior.

    During burn-in every policy's prior equals the UR prior.
    """

    _check_observation(state, ur_obs, PolicyId.UR)

    return _credit(state, ((ur_obs, 1.0),))

def ts_update(state, obs, intro_week=1):
    """Credit TS's own observation to the TS posterior.

    Args:
        state (PolicyState): The TS state.
        obs (BatchObservation): A TS observation.
        intro_week (int): First week TS allocates; earlier observations are rejected.

    Raises:
        MABUpdateException: ``POLICY_NOT_ACTIVE`` for a week before ``intro_week``,
            ``WRONG_POLICY`` or ``REWARD_EXCEEDS_ASSIGNED``.
    """

    _check_observation(state, obs, PolicyId.TS)

    if obs.week < intro_week:
        raise MABUpdateException(
            'POLICY_NOT_ACTIVE',
            "TS does not allocate before week {} (got week {})".format(intro_week, obs.week)
        )

    return _credit(state, ((obs, 1.0),))

def ts_dagger_update(state, ts_obs, ur_obs, own_obs=None):
    """Credit half-weighted evidence to the TS† posterior.

    In a transition week (``own_obs`` absent) the update is half TS plus half UR;
    once TS† allocates it is half TS† plus half UR and ``ts_obs`` is ignored.

    Args:
        state (PolicyState): The TS† state.
        ts_obs (BatchObservation): This week's TS observation for the arm (may be None
            when ``own_obs`` is given).
        ur_obs (BatchObservation): This week's UR observation for the arm.
        own_obs (BatchObservation): This week's TS† observation, if TS† allocated.

    Raises:
        MABUpdateException: ``MISSING_SOURCE`` when a required observation is absent,
            ``ARM_MISMATCH`` when the observations describe different arms or weeks.
    """

    source, source_policy = (own_obs, PolicyId.TS_DAGGER) if own_obs is not None \
        else (ts_obs, PolicyId.TS)

    if source is None:
        raise MABUpdateException('MISSING_SOURCE', "no TS or TS† observation supplied")
    if ur_obs is None:
        raise MABUpdateException('MISSING_SOURCE', "no UR observation supplied")

    _check_observation(state, source, source_policy)
    _check_observation(state, ur_obs, PolicyId.UR)

    if (source.arm, source.week) != (ur_obs.arm, ur_obs.week):
        raise MABUpdateException(
            'ARM_MISMATCH',
            "source is week {} arm {}, UR is week {} arm {}".format(
                source.week, source.arm + 1, ur_obs.week, ur_obs.arm + 1)
        )

    return _credit(state, ((source, HALF), (ur_obs, HALF)))
