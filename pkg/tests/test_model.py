"""Test the core domain types."""

import dataclasses

from pymab.exceptions import MABValidationException
from pymab.model import BatchObservation, BetaParams, EnvironmentSchedule, ExperimentConfig, \
    Phase, PolicyId, PolicyState, Timeline, linear_cohort, validate_config
from tests import BaseMABTestCase

class TestPolicyId(BaseMABTestCase):
    """Test the PolicyId enumeration."""

    def test_tokens(self):
        """Verify file tokens and report labels."""

        self.assertEqual([policy.token for policy in PolicyId], ['UR', 'TS', 'TSD'])
        self.assertEqual(PolicyId.TS_DAGGER.label, 'TS†')
        self.assertIs(PolicyId.from_token('TSD'), PolicyId.TS_DAGGER)
        self.assertEqual([policy.index for policy in PolicyId], [0, 1, 2])

        with self.assertRaises(ValueError):
            PolicyId.from_token('TS†')

class TestBetaParams(BaseMABTestCase):
    """Test BetaParams construction and arithmetic."""

    def test_default_is_uniform(self):
        """Verify the default prior is Beta(1, 1)."""

        params = BetaParams()

        self.assertEqual((params.alpha, params.beta), (1.0, 1.0))
        self.assertEqual(params.mean, 0.5)

    def test_half_counts(self):
        """Verify real-valued pseudo-counts are kept."""

        params = BetaParams().add(1.5, 0.5)

        self.assertEqual((params.alpha, params.beta), (2.5, 1.5))

    def test_invalid(self):
        """Verify parameters below 1 or non-finite are rejected."""

        for alpha, beta in ((0.5, 1), (1, float('inf')), (float('nan'), 2)):
            with self.assertRaises(MABValidationException):
                BetaParams(alpha, beta)

class TestBatchObservation(BaseMABTestCase):
    """Test BatchObservation invariants."""

    def test_valid(self):
        """Verify a valid observation and its failure count."""

        obs = BatchObservation(6, PolicyId.TS, 0, 250, 150)

        self.assertEqual(obs.failures, 100)

    def test_reward_exceeds_assigned(self):
        """Verify r > n cannot be constructed."""

        with self.assertRaises(MABValidationException) as ctx:
            BatchObservation(1, PolicyId.UR, 0, 3, 4)

        self.assertEqual(ctx.exception.codes, ['OUT_OF_RANGE'])

    def test_bad_week_and_arm(self):
        """Verify week 0 and negative arms are rejected together."""

        with self.assertRaises(MABValidationException) as ctx:
            BatchObservation(0, PolicyId.UR, -1, 3, 1)

        self.assertEqual(len(ctx.exception.violations), 2)

class TestExperimentConfig(BaseMABTestCase):
    """Test config validation."""

    def test_reference_config_valid(self):
        """Verify the reference configuration validates unchanged."""

        cfg = ExperimentConfig.constant_cohort(3, 13, 1119, split=(0.5, 0.25, 0.25))

        self.assertIs(validate_config(cfg), cfg)
        self.assertEqual(cfg.burn_in, 5)
        self.assertEqual(cfg.ts_intro_week, 6)
        self.assertEqual(cfg.ts_dagger_intro_week, 7)

    def test_split_not_normalized(self):
        """Verify fractions summing to 1.5 are rejected."""

        with self.assertRaises(MABValidationException) as ctx:
            ExperimentConfig.constant_cohort(3, 13, 1119, split=(0.5, 0.5, 0.5))

        self.assertIn('SPLIT_NOT_NORMALIZED', ctx.exception.codes)

    def test_bad_week_ordering(self):
        """Verify TS cannot start inside the burn-in."""

        with self.assertRaises(MABValidationException) as ctx:
            ExperimentConfig.constant_cohort(3, 13, 1119, ts_intro_week=4)

        self.assertIn('BAD_WEEK_ORDERING', ctx.exception.codes)

    def test_empty_cohort(self):
        """Verify cohort sizes must cover every week with positive counts."""

        with self.assertRaises(MABValidationException) as ctx:
            ExperimentConfig(arms=3, horizon=3, cohort_sizes=(10, 0))

        self.assertEqual(ctx.exception.codes.count('EMPTY_COHORT'), 2)

    def test_every_violation_reported(self):
        """Verify all violations are listed, not only the first."""

        with self.assertRaises(MABValidationException) as ctx:
            ExperimentConfig.constant_cohort(
                3, 13, 100, ts_intro_week=4, split=(1.0, 1.0, 1.0), seed=-1
            )

        self.assertEqual(
            sorted(ctx.exception.codes),
            ['BAD_WEEK_ORDERING', 'INVALID_VALUE', 'SPLIT_NOT_NORMALIZED']
        )

    def test_disabled_policy(self):
        """Verify horizon + 1 is accepted as an intro week."""

        cfg = ExperimentConfig.constant_cohort(3, 8, 100, ts_dagger_intro_week=9)

        self.assertEqual(cfg.timeline.active_policies(8), (PolicyId.UR, PolicyId.TS))

    def test_immutable(self):
        """Verify configs cannot be mutated."""

        cfg = ExperimentConfig.reference()

        with self.assertRaises(dataclasses.FrozenInstanceError):
            cfg.seed = 3

    def test_linear_cohort(self):
        """Verify the default enrolment runs from 1119 down to 1025."""

        sizes = linear_cohort(1119, 1025, 13)

        self.assertEqual(len(sizes), 13)
        self.assertEqual((sizes[0], sizes[-1]), (1119, 1025))
        self.assertEqual(list(sizes), sorted(sizes, reverse=True))
        self.assertEqual(ExperimentConfig.reference().cohort_sizes, sizes)

class TestTimeline(BaseMABTestCase):
    """Test the week schedule."""

    def test_reference_phases(self):
        """Verify burn-in, transition and full weeks of the reference schedule."""

        timeline = ExperimentConfig.reference().timeline

        self.assertEqual(timeline.phase(5), Phase.BURN_IN)
        self.assertEqual(timeline.phase(6), Phase.TRANSITION)
        self.assertEqual(timeline.phase(7), Phase.FULL)
        self.assertEqual(timeline.active_policies(3), (PolicyId.UR,))
        self.assertEqual(len(timeline.active_policies(13)), 3)

    def test_ur_only_gap(self):
        """Verify weeks between burn-in and TS are UR-only."""

        timeline = Timeline(arms=2, horizon=6, burn_in=2, ts_intro_week=4, ts_dagger_intro_week=5)

        self.assertEqual(timeline.phase(3), Phase.UR_ONLY)

class TestEnvironmentSchedule(BaseMABTestCase):
    """Test schedule invariants."""

    def test_out_of_range(self):
        """Verify means outside [0, 1] are rejected."""

        with self.assertRaises(MABValidationException) as ctx:
            EnvironmentSchedule(((0.5, 1.2),))

        self.assertEqual(ctx.exception.codes, ['OUT_OF_RANGE'])

    def test_ragged(self):
        """Verify rows of different width are rejected."""

        with self.assertRaises(MABValidationException) as ctx:
            EnvironmentSchedule(((0.5, 0.5), (0.5,)))

        self.assertEqual(ctx.exception.codes, ['BAD_DIMENSIONS'])

    def test_accessors(self):
        """Verify rows are addressed by 1-based week."""

        schedule = EnvironmentSchedule(((0.1, 0.2), (0.3, 0.4)))

        self.assertEqual(schedule.row(2), (0.3, 0.4))
        self.assertFalse(schedule.is_stationary)
        self.assertEqual(schedule.as_array().shape, (2, 2))

class TestPolicyState(BaseMABTestCase):
    """Test PolicyState bookkeeping."""

    def test_initial(self):
        """Verify an initial state conserves trivially."""

        state = PolicyState.initial(PolicyId.TS, 3)

        self.assertEqual(state.arms, 3)
        self.assertEqual(state.conservation_error(), 0.0)

    def test_weights_must_match_history(self):
        """Verify history and weights stay parallel."""

        with self.assertRaises(MABValidationException):
            PolicyState(
                PolicyId.UR, (BetaParams(),),
                (BatchObservation(1, PolicyId.UR, 0, 1, 1),), ()
            )
