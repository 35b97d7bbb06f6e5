"""Test experiment orchestration, replay and replications."""

import statistics

from hypothesis import given, settings
from hypothesis import strategies as st

from pymab.engine import infer_timeline, replay, run_experiment, run_replications, split_cohort
from pymab.environment import make_schedule
from pymab.exceptions import MABDuplicateRowException, MABIncompleteLogException, \
    MABValidationException
from pymab.model import BatchObservation, ExperimentConfig, Phase, PolicyId, Timeline
from tests import BaseMABTestCase

SPLITS = [(0.5, 0.25, 0.25), (1 / 3, 1 / 3, 1 / 3), (0.6, 0.2, 0.2)]
TRANSITION_SPLITS = [(0.5, 0.5), (0.7, 0.3)]

@st.composite
def experiments(draw):
    """A random valid config with a matching stationary schedule."""

    arms = draw(st.integers(2, 4))
    burn_in = draw(st.integers(1, 4))
    ts_intro_week = burn_in + 1 + draw(st.integers(0, 1))
    ts_dagger_intro_week = ts_intro_week + draw(st.integers(0, 2))
    horizon = ts_dagger_intro_week - 1 + draw(st.integers(0, 2))

    cfg = ExperimentConfig(
        arms=arms,
        horizon=horizon,
        cohort_sizes=draw(st.lists(st.integers(1, 80), min_size=horizon, max_size=horizon)),
        burn_in=burn_in,
        ts_intro_week=ts_intro_week,
        ts_dagger_intro_week=ts_dagger_intro_week,
        split=draw(st.sampled_from(SPLITS)),
        transition_split=draw(st.sampled_from(TRANSITION_SPLITS)),
        seed=draw(st.integers(0, 2 ** 32)),
    )
    means = draw(st.lists(st.floats(0.0, 1.0), min_size=arms, max_size=arms))

    return cfg, make_schedule('stationary', means, horizon)

def _weight(timeline, policy, week, source):
    """The weight with which an observation from ``source`` enters ``policy``'s posterior."""

    phase = timeline.phase(week)

    if policy is PolicyId.UR or phase is Phase.BURN_IN:
        return 1.0 if source is PolicyId.UR else 0.0
    if phase is Phase.UR_ONLY:
        return 0.0
    if policy is PolicyId.TS:
        return 1.0 if source is PolicyId.TS else 0.0

    partner = PolicyId.TS if phase is Phase.TRANSITION else PolicyId.TS_DAGGER

    return 0.5 if source in (PolicyId.UR, partner) else 0.0

def _expected_counts(trace, policy, week):
    """Weighted (assigned, opened) per arm credited to a policy through ``week``."""

    assigned = [0.0] * trace.timeline.arms
    opened = [0.0] * trace.timeline.arms

    for outcome in trace.weeks[:week]:
        for obs in outcome.observations:
            weight = _weight(trace.timeline, policy, outcome.week, obs.policy)
            assigned[obs.arm] += weight * obs.n
            opened[obs.arm] += weight * obs.r

    return assigned, opened

class TestSplitCohort(BaseMABTestCase):
    """Test largest-remainder splitting."""

    def test_largest_remainder(self):
        """Verify 1119 splits as (559, 280, 280)."""

        self.assertEqual(split_cohort(1119, (0.5, 0.25, 0.25)), (559, 280, 280))

    def test_exact(self):
        """Verify exact divisions and empty cohorts."""

        self.assertEqual(split_cohort(4, (0.5, 0.25, 0.25)), (2, 1, 1))
        self.assertEqual(split_cohort(0, (0.5, 0.25, 0.25)), (0, 0, 0))

    def test_ties_to_lower_index(self):
        """Verify equal remainders favour the lower policy index."""

        self.assertEqual(split_cohort(1119, (0.5, 0.5)), (560, 559))

    @given(st.integers(0, 100000), st.sampled_from(SPLITS))
    def test_sums_to_total(self, total, fractions):
        """Verify every split sums to the total and stays within 1 of its quota."""

        counts = split_cohort(total, fractions)

        self.assertEqual(sum(counts), total)
        for count, fraction in zip(counts, fractions):
            self.assertLess(abs(count - total * fraction), 1)

    def test_not_normalized(self):
        """Verify fractions must sum to 1."""

        with self.assertRaises(MABValidationException):
            split_cohort(10, (0.5, 0.6))

class TestRunExperiment(BaseMABTestCase):
    """Test simulated runs."""

    def test_burn_in_only(self):
        """Verify a run that never leaves burn-in keeps the three posteriors identical."""

        cfg = ExperimentConfig.constant_cohort(
            3, 5, 200, burn_in=5, ts_intro_week=6, ts_dagger_intro_week=6, seed=11
        )
        trace = run_experiment(cfg, self.stationary((0.6, 0.5, 0.4), 5))

        finals = {trace.final_states[policy].posteriors for policy in PolicyId}

        self.assertEqual(len(finals), 1)
        self.assertEqual(trace.own_observations(PolicyId.TS), [])

    def test_reference_cohort(self):
        """Verify per-policy totals follow the weekly splits."""

        cfg = ExperimentConfig.constant_cohort(3, 13, 1119, seed=5)
        trace = run_experiment(cfg, self.stationary((0.606, 0.580, 0.585)))

        own = {
            policy: sum(obs.n for obs in trace.own_observations(policy)) for policy in PolicyId
        }

        self.assertEqual(own[PolicyId.UR], 5 * 1119 + 560 + 7 * 559)
        self.assertEqual(own[PolicyId.TS], 559 + 7 * 280)
        self.assertEqual(own[PolicyId.TS_DAGGER], 7 * 280)
        self.assertEqual(sum(own.values()), 13 * 1119)

    def test_snapshot_count(self):
        """Verify one snapshot per week per policy."""

        trace = run_experiment(self.reference_config(), self.stationary((0.606, 0.580, 0.585)))

        for policy in PolicyId:
            self.assertEqual(len(trace.snapshots[policy]), 13)

    def test_ts_diverges_only_by_own_data(self):
        """Verify TS equals UR after burn-in plus exactly its own observations."""

        trace = run_experiment(self.reference_config(), self.stationary((0.606, 0.580, 0.585)))
        burn_in = trace.posterior(PolicyId.UR, 5)

        for arm, params in enumerate(trace.final_states[PolicyId.TS].posteriors):
            own = [obs for obs in trace.own_observations(PolicyId.TS) if obs.arm == arm]

            self.assertEqual(params.alpha, burn_in[arm].alpha + sum(obs.r for obs in own))
            self.assertEqual(params.beta, burn_in[arm].beta + sum(obs.failures for obs in own))

    def test_deterministic(self):
        """Verify equal configs and seeds give equal traces."""

        env = self.stationary((0.606, 0.580, 0.585))

        self.assertEqual(run_experiment(self.reference_config(), env),
                         run_experiment(self.reference_config(), env))
        self.assertNotEqual(run_experiment(self.reference_config(seed=1), env).observations(),
                            run_experiment(self.reference_config(seed=2), env).observations())

    def test_schedule_shape(self):
        """Verify a schedule of the wrong shape is rejected."""

        with self.assertRaises(MABValidationException) as ctx:
            run_experiment(self.reference_config(), self.stationary((0.5, 0.5), 13))

        self.assertEqual(ctx.exception.codes, ['BAD_DIMENSIONS'])

    @settings(max_examples=100, deadline=None)
    @given(experiments())
    def test_burn_in_equality(self, experiment):
        """Verify the three posteriors agree exactly at the end of burn-in."""

        cfg, env = experiment
        trace = run_experiment(cfg, env)

        self.assertEqual(trace.posterior(PolicyId.UR, cfg.burn_in),
                         trace.posterior(PolicyId.TS, cfg.burn_in))
        self.assertEqual(trace.posterior(PolicyId.UR, cfg.burn_in),
                         trace.posterior(PolicyId.TS_DAGGER, cfg.burn_in))

    @settings(max_examples=100, deadline=None)
    @given(experiments())
    def test_conservation(self, experiment):
        """Verify pseudo-counts match independently weighted observation sums every week."""

        cfg, env = experiment
        trace = run_experiment(cfg, env)

        for outcome in trace.weeks:
            self.assertEqual(outcome.assigned, cfg.cohort_sizes[outcome.week - 1])

            for policy in PolicyId:
                assigned, opened = _expected_counts(trace, policy, outcome.week)

                for arm, params in enumerate(trace.posterior(policy, outcome.week)):
                    self.assertAlmostEqual(params.alpha + params.beta - 2.0, assigned[arm],
                                           delta=1e-9)
                    self.assertAlmostEqual(params.alpha - 1.0, opened[arm], delta=1e-9)

class TestReplay(BaseMABTestCase):
    """Test replaying recorded observations."""

    def test_round_trip(self):
        """Verify replaying a run's observations reproduces its snapshots."""

        cfg = self.reference_config()
        trace = run_experiment(cfg, self.stationary((0.606, 0.580, 0.585)))

        self.assertEqual(replay(trace.observations(), cfg).snapshots, trace.snapshots)
        self.assertEqual(replay(list(reversed(trace.observations()))).snapshots, trace.snapshots)

    def test_round_trip_with_gap_weeks(self):
        """Verify a run with UR-only weeks after burn-in replays against its config."""

        cfg = self.reference_config(burn_in=3, ts_intro_week=5, ts_dagger_intro_week=6)
        trace = run_experiment(cfg, self.stationary((0.65, 0.55, 0.55)))

        self.assertEqual(replay(trace.observations(), cfg).snapshots, trace.snapshots)

        # the log alone reads week 4 as burn-in
        inferred = infer_timeline(trace.observations())
        self.assertEqual((inferred.burn_in, inferred.ts_intro_week), (4, 5))
        self.assertNotEqual(replay(trace.observations()).snapshots, trace.snapshots)

    def test_inferred_timeline(self):
        """Verify the schedule is recovered from the log."""

        cfg = self.reference_config()
        trace = run_experiment(cfg, self.stationary((0.606, 0.580, 0.585)))

        self.assertEqual(infer_timeline(trace.observations()), cfg.timeline)

    def test_empty_log(self):
        """Verify an empty log replays to a trace with no weeks."""

        trace = replay([])

        self.assertEqual(trace.weeks, ())
        self.assertEqual(trace.timeline, Timeline(0, 0, 0, 1, 1))

    def test_incomplete_log(self):
        """Verify the first missing row is named."""

        cfg = self.reference_config()
        log = [
            obs for obs in run_experiment(cfg, self.stationary((0.6, 0.6, 0.6))).observations()
            if (obs.week, obs.policy, obs.arm) != (7, PolicyId.TS, 1)
        ]

        with self.assertRaises(MABIncompleteLogException) as ctx:
            replay(log, cfg)

        self.assertEqual((ctx.exception.week, ctx.exception.policy, ctx.exception.arm),
                         (7, PolicyId.TS, 1))
        self.assertEqual(ctx.exception.message, 'INCOMPLETE_LOG(7, TS, 2)')

    def test_duplicate_row(self):
        """Verify duplicated rows are rejected."""

        trace = run_experiment(self.reference_config(), self.stationary((0.6, 0.6, 0.6)))
        log = trace.observations()

        with self.assertRaises(MABDuplicateRowException):
            replay(log + log[:1])

    def test_row_outside_schedule(self):
        """Verify a TS row during burn-in is rejected."""

        cfg = self.reference_config()
        log = run_experiment(cfg, self.stationary((0.6, 0.6, 0.6))).observations()
        stray = BatchObservation(2, PolicyId.TS, 0, 5, 1)

        with self.assertRaises(MABValidationException) as ctx:
            replay(log + [stray], cfg)

        self.assertEqual(ctx.exception.codes, ['OUT_OF_RANGE'])

class TestReplications(BaseMABTestCase):
    """Monte Carlo properties of the full experiment."""

    def test_null_calibration(self):
        """Verify the UR Wald test rejects about 5% of the time when arms are equal."""

        results = run_replications(self.reference_config(seed=2020), self.stationary((0.6, 0.6, 0.6)),
                                   2000)

        p_values = [test.p_value for result in results for test in result.tests[PolicyId.UR]]

        self.assertEqual(len(p_values), 3 * 2000)
        rate = sum(p_value < 0.05 for p_value in p_values) / len(p_values)
        self.assertTrue(0.035 <= rate <= 0.065, rate)

    def test_concentration_under_separation(self):
        """Verify TS favours the best arm while UR stays balanced."""

        results = run_replications(self.reference_config(seed=7), self.stationary((0.65, 0.55, 0.55)),
                                   200)

        ts_best = statistics.median(result.shares[PolicyId.TS][0] for result in results)
        self.assertGreater(ts_best, 0.5)

        for arm in range(3):
            ur_share = statistics.median(result.shares[PolicyId.UR][arm] for result in results)
            self.assertTrue(0.31 <= ur_share <= 0.36, ur_share)

    def test_worker_independence(self):
        """Verify results do not depend on the worker count."""

        cfg = ExperimentConfig.constant_cohort(3, 8, 60, seed=99)
        env = make_schedule('stationary', (0.5, 0.4, 0.3), 8)

        self.assertEqual(run_replications(cfg, env, 4, workers=1),
                         run_replications(cfg, env, 4, workers=2))

    def test_replications_differ(self):
        """Verify each replication draws from its own streams."""

        cfg = ExperimentConfig.constant_cohort(3, 8, 60, seed=99)
        first, second = run_replications(cfg, make_schedule('stationary', (0.5,) * 3, 8), 2)

        self.assertEqual((first.replication, second.replication), (0, 1))
        self.assertNotEqual(first.own_counts, second.own_counts)
