"""Weekly batch orchestration of the UR / TS / TS† experiment.

A run walks the weeks in order. Each week the active policies split the cohort,
allocate with their current posteriors, observe rewards, and then every policy's
posterior is updated once from that week's batch:

* burn-in weeks: UR allocates everyone; all three posteriors take the UR data;
* UR-only weeks after burn-in (only when TS starts late): UR alone learns;
* transition weeks: UR and TS allocate; TS† learns from half TS plus half UR;
* full weeks: all three allocate; TS† learns from half its own plus half UR.
"""

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import Dict, Optional, Tuple

from . import analysis
from .environment import WeeklyOutcome, draw_rewards
from .exceptions import MABDuplicateRowException, MABEngineException, \
    MABIncompleteLogException, MABValidationException, Violation
from .model import SPLIT_TOLERANCE, BatchObservation, Phase, PolicyId, PolicyState, \
    Timeline, validate_config
from .policies import shared_update, ts_allocate, ts_dagger_update, ts_update, \
    ur_allocate, ur_update
from .streams import Purpose, StreamFactory

_log = logging.getLogger(__name__)

CONSERVATION_TOLERANCE = 1e-9

def split_cohort(total, fractions):
    """Split a cohort into integer group sizes by largest-remainder rounding.

    Each group first gets ``floor(total * fraction)``; leftover students go one at a
    time to the largest remainders, ties to the lower policy index.

    Args:
        total (int): Students to split.
        fractions (sequence): Non-negative fractions summing to 1.

    Raises:
        MABValidationException: ``SPLIT_NOT_NORMALIZED``.

    Returns:
        tuple: Group sizes summing exactly to ``total``.
    """

    if abs(math.fsum(fractions) - 1.0) > SPLIT_TOLERANCE:
        raise MABValidationException([Violation(
            'SPLIT_NOT_NORMALIZED', 'fractions', "fractions sum to {!r}".format(math.fsum(fractions))
        )])

    quotas = [total * fraction for fraction in fractions]
    counts = [int(math.floor(quota)) for quota in quotas]
    remainders = [quota - count for quota, count in zip(quotas, counts)]

    order = sorted(range(len(fractions)), key=lambda index: (-remainders[index], index))
    for index in order[:total - sum(counts)]:
        counts[index] += 1

    return tuple(counts)

@dataclass(frozen=True)
class ExperimentTrace:
    """The full record of a run or a replayed log.

    Args:
        timeline (Timeline): The week schedule used.
        weeks (tuple): One :class:`WeeklyOutcome` per week.
        snapshots (dict): ``{PolicyId: tuple}`` of posterior tuples, one per week.
        final_states (dict): ``{PolicyId: PolicyState}`` after the last week.
        config (ExperimentConfig): The simulation config, None for a replayed log.
    """

    timeline: Timeline
    weeks: Tuple[WeeklyOutcome, ...]
    snapshots: Dict[PolicyId, Tuple]
    final_states: Dict[PolicyId, PolicyState]
    config: Optional[object] = None

    def observations(self):
        """Every observation in week, policy, arm order."""

        return [obs for outcome in self.weeks for obs in outcome.observations]

    def own_observations(self, policy):
        """The observations of students the policy itself allocated."""

        return [obs for obs in self.observations() if obs.policy is policy]

    def credited_history(self, policy):
        """The observations a policy's report is built from, relabelled to that policy.

        Burn-in UR data counts for every policy; TS† also counts the TS data of
        transition weeks, which initialise its prior. Otherwise a policy counts only
        its own allocations.
        """

        history = []

        for outcome in self.weeks:
            phase = self.timeline.phase(outcome.week)

            if policy is PolicyId.UR or phase is Phase.BURN_IN:
                source = PolicyId.UR
            elif policy is PolicyId.TS_DAGGER and phase is Phase.TRANSITION:
                source = PolicyId.TS
            else:
                source = policy

            history.extend(
                replace(obs, policy=policy) for obs in outcome.observations
                if obs.policy is source
            )

        return history

    def posterior(self, policy, week):
        """The posteriors of a policy after a 1-based week."""

        return self.snapshots[policy][week - 1]

def _initial_states(arms):
    return {policy: PolicyState.initial(policy, arms) for policy in PolicyId}

def update_week(states, timeline, outcome):
    """Apply one week's batch to every policy's posterior.

    Args:
        states (dict): ``{PolicyId: PolicyState}`` before the week.
        timeline (Timeline): The week schedule.
        outcome (WeeklyOutcome): The week's observations.

    Returns:
        dict: The updated states.
    """

    phase = timeline.phase(outcome.week)
    ur_obs = outcome.for_policy(PolicyId.UR)
    ts_obs = outcome.for_policy(PolicyId.TS)
    own_obs = outcome.for_policy(PolicyId.TS_DAGGER)

    states = dict(states)

    for arm in range(timeline.arms):
        states[PolicyId.UR] = ur_update(states[PolicyId.UR], ur_obs[arm])

        if phase is Phase.BURN_IN:
            for policy in (PolicyId.TS, PolicyId.TS_DAGGER):
                states[policy] = shared_update(states[policy], ur_obs[arm])

        elif phase in (Phase.TRANSITION, Phase.FULL):
            states[PolicyId.TS] = ts_update(
                states[PolicyId.TS], ts_obs[arm], timeline.ts_intro_week
            )
            states[PolicyId.TS_DAGGER] = ts_dagger_update(
                states[PolicyId.TS_DAGGER],
                ts_obs.get(arm),
                ur_obs[arm],
                own_obs[arm] if phase is Phase.FULL else None
            )

    for policy, state in states.items():
        error = state.conservation_error()
        if error > CONSERVATION_TOLERANCE:
            raise MABEngineException(
                "week {}: {} pseudo-counts drifted by {}".format(outcome.week, policy.token, error)
            )

    _log.debug("Week %d (%s) updated %d policies", outcome.week, phase.name, len(states))

    return states

def _walk(timeline, outcomes, config=None):
    """Fold ``outcomes`` (an iterable that may depend on the states) into a trace."""

    states = _initial_states(timeline.arms)
    snapshots = {policy: [] for policy in PolicyId}
    weeks = []

    for outcome in outcomes(lambda: states):
        states = update_week(states, timeline, outcome)
        weeks.append(outcome)
        for policy in PolicyId:
            snapshots[policy].append(states[policy].posteriors)

    return ExperimentTrace(
        timeline=timeline,
        weeks=tuple(weeks),
        snapshots={policy: tuple(series) for policy, series in snapshots.items()},
        final_states=states,
        config=config,
    )

def _week_groups(cfg, week):
    timeline = cfg.timeline
    phase = timeline.phase(week)
    cohort = cfg.cohort_sizes[week - 1]

    if phase is Phase.FULL:
        sizes = split_cohort(cohort, cfg.split)
    elif phase is Phase.TRANSITION:
        sizes = split_cohort(cohort, cfg.transition_split)
    else:
        sizes = (cohort,)

    return tuple(zip(timeline.active_policies(week), sizes))

def _simulate_week(cfg, env, week, states, streams):
    observations = []

    for policy, size in _week_groups(cfg, week):
        rng = streams.stream(week, policy, Purpose.ALLOCATE)
        if policy is PolicyId.UR:
            alloc = ur_allocate(size, cfg.arms, rng)
        else:
            alloc = ts_allocate(states[policy].posteriors, size, rng)

        rewards = draw_rewards(alloc, env.row(week), streams.stream(week, policy, Purpose.REWARD))

        observations.extend(
            BatchObservation(week, policy, arm, count, reward)
            for arm, (count, reward) in enumerate(zip(alloc.counts, rewards))
        )

    return WeeklyOutcome(week, tuple(observations))

def run_experiment(cfg, env, replication=0):
    """Run one simulated experiment.

    Args:
        cfg (ExperimentConfig): The experiment.
        env (EnvironmentSchedule): True means, ``cfg.horizon`` rows of ``cfg.arms``.
        replication (int): Replication index selecting an independent set of streams.

    Raises:
        MABValidationException: The config is invalid or the schedule has the wrong shape.

    Returns:
        ExperimentTrace: Every week's observations and posterior snapshots.
    """

    validate_config(cfg)

    if (env.horizon, env.arms) != (cfg.horizon, cfg.arms):
        raise MABValidationException([Violation(
            'BAD_DIMENSIONS', 'environment',
            "schedule is {}x{}, config needs {}x{}".format(
                env.horizon, env.arms, cfg.horizon, cfg.arms)
        )])

    streams = StreamFactory(cfg.seed, replication)

    def outcomes(current_states):
        for week in cfg.timeline.weeks:
            yield _simulate_week(cfg, env, week, current_states(), streams)

    _log.debug("Running replication %d of seed %d", replication, cfg.seed)

    return _walk(cfg.timeline, outcomes, cfg)

def infer_timeline(log):
    """Reconstruct the week schedule implied by an observation log.

    TS and TS† start at the first week they appear (``horizon + 1`` when absent) and
    burn-in covers every week before TS. A log cannot tell UR-only gap weeks from burn-in,
    so runs with ``burn_in + 1 < ts_intro_week`` must be replayed with their config.
    """

    if not log:
        return Timeline(arms=0, horizon=0, burn_in=0, ts_intro_week=1, ts_dagger_intro_week=1)

    horizon = max(obs.week for obs in log)

    def first_week(policy):
        return min((obs.week for obs in log if obs.policy is policy), default=horizon + 1)

    ts_intro_week = first_week(PolicyId.TS)

    return Timeline(
        arms=max(obs.arm for obs in log) + 1,
        horizon=horizon,
        burn_in=ts_intro_week - 1,
        ts_intro_week=ts_intro_week,
        ts_dagger_intro_week=max(first_week(PolicyId.TS_DAGGER), ts_intro_week),
    )

def replay(log, cfg=None):
    """Recompute posterior trajectories from recorded observations, without sampling.

    Args:
        log (list): :class:`BatchObservation` values, in any order.
        cfg (ExperimentConfig): Supplies the schedule; inferred from the log when None.

    Raises:
        MABDuplicateRowException: Two rows share a (week, policy, arm).
        MABIncompleteLogException: Naming the first missing (week, policy, arm).
        MABValidationException: A row lies outside the schedule.

    Returns:
        ExperimentTrace: The replayed trace.
    """

    timeline = cfg.timeline if cfg is not None else infer_timeline(log)
    rows = {}

    for obs in sorted(log, key=lambda obs: (obs.week, obs.policy.index, obs.arm)):
        key = (obs.week, obs.policy, obs.arm)
        if key in rows:
            raise MABDuplicateRowException(None, obs.week, obs.policy, obs.arm)
        if obs.week > timeline.horizon or obs.arm >= timeline.arms or \
                obs.policy not in timeline.active_policies(obs.week):
            raise MABValidationException([Violation(
                'OUT_OF_RANGE', 'log',
                "row ({}, {}, {}) lies outside the schedule".format(
                    obs.week, obs.policy.token, obs.arm + 1)
            )])
        rows[key] = obs

    for week in timeline.weeks:
        for policy in timeline.active_policies(week):
            for arm in range(timeline.arms):
                if (week, policy, arm) not in rows:
                    raise MABIncompleteLogException(week, policy, arm)

    def outcomes(_):
        for week in timeline.weeks:
            yield WeeklyOutcome(week, tuple(
                rows[(week, policy, arm)]
                for policy in timeline.active_policies(week)
                for arm in range(timeline.arms)
            ))

    _log.debug("Replaying %d rows over %d weeks", len(rows), timeline.horizon)

    return _walk(timeline, outcomes, cfg)

@dataclass(frozen=True)
class ReplicationResult:
    """What one replication contributes to a Monte Carlo study.

    Args:
        replication (int): The replication index.
        summaries (dict): ``{PolicyId: tuple}`` of credited :class:`ArmSummary` values.
        own_counts (dict): ``{PolicyId: tuple}`` of (assigned, opened) per arm, own
            allocations only.
        shares (dict): ``{PolicyId: tuple}`` cumulative own allocation share per arm.
        tests (dict): ``{PolicyId: tuple}`` Bonferroni-adjusted :class:`WaldResult` values.
        regret (dict): ``{PolicyId: float}`` expected regret of the own allocations.
    """

    replication: int
    summaries: Dict[PolicyId, Tuple]
    own_counts: Dict[PolicyId, Tuple]
    shares: Dict[PolicyId, Tuple]
    tests: Dict[PolicyId, Tuple]
    regret: Dict[PolicyId, float]

def replicate(cfg, env, replication, family_alpha=0.05):
    """Run one replication and reduce it to a :class:`ReplicationResult`."""

    trace = run_experiment(cfg, env, replication)
    summaries = analysis.policy_summaries(trace)

    own_counts = {}
    for policy in PolicyId:
        own = trace.own_observations(policy)
        own_counts[policy] = tuple(
            (sum(obs.n for obs in own if obs.arm == arm),
             sum(obs.r for obs in own if obs.arm == arm))
            for arm in range(cfg.arms)
        )

    return ReplicationResult(
        replication=replication,
        summaries=summaries,
        own_counts=own_counts,
        shares={
            policy: analysis.allocation_concentration(trace, policy).cumulative
            for policy in PolicyId
        },
        tests={
            policy: analysis.pairwise_tests(summaries[policy], family_alpha)
            for policy in PolicyId
        },
        regret={policy: analysis.expected_regret(trace, env, policy) for policy in PolicyId},
    )

def _replicate_job(job):
    return replicate(*job)

def run_replications(cfg, env, replications, workers=1, family_alpha=0.05): #pylint: disable=too-many-arguments
    """Run independent replications of an experiment.

    Replication ``i`` always uses the streams of index ``i``, so results do not depend
    on the number of workers or their scheduling.

    Args:
        cfg (ExperimentConfig): The experiment.
        env (EnvironmentSchedule): True means.
        replications (int): Number of replications.
        workers (int): Worker processes; 1 runs in this process. Default 1.
        family_alpha (float): Family-wise level for the per-policy Wald tests.

    Returns:
        list: :class:`ReplicationResult` values in replication order.
    """

    jobs = [(cfg, env, replication, family_alpha) for replication in range(replications)]

    _log.debug("Running %d replications on %d worker(s)", replications, workers)

    if workers <= 1:
        return [_replicate_job(job) for job in jobs]

    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(
            _replicate_job, jobs, chunksize=max(1, replications // (4 * workers))
        ))
