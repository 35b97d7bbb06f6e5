"""Domain types shared by every pymab module.

Arms are 0-based here and 1-based in every file and report. Weeks are 1-based
everywhere. All types are immutable once constructed, and construction validates
their invariants, so an invalid value cannot be built through this interface.
"""

import math
import numbers
from dataclasses import dataclass, field, replace
from enum import Enum, auto
from typing import Tuple

import numpy as np

from .exceptions import MABValidationException, Violation

SPLIT_TOLERANCE = 1e-12
MAX_SEED = 2 ** 64

class PolicyId(Enum):
    """The three allocation policies, in report order."""

    UR = 'UR'
    TS = 'TS'
    TS_DAGGER = 'TSD'

    @property
    def token(self):
        """str: The ASCII token used in files (``UR``, ``TS``, ``TSD``)."""

        return self.value

    @property
    def label(self):
        """str: The name shown in human-readable reports."""

        return 'TS†' if self is PolicyId.TS_DAGGER else self.value

    @property
    def index(self):
        """int: Position of the policy in report order."""

        return list(PolicyId).index(self)

    @classmethod
    def from_token(cls, token):
        """Look a policy up by its file token.

        Raises:
            ValueError: The token is not one of ``UR``, ``TS``, ``TSD``.
        """

        for policy in cls:
            if policy.value == token:
                return policy

        raise ValueError("unknown policy token {!r}".format(token))

class Phase(Enum): #pylint: disable=R0903
    """Which policies allocate in a given week."""

    BURN_IN = auto()
    UR_ONLY = auto()
    TRANSITION = auto()
    FULL = auto()

def _is_int(value):
    return isinstance(value, numbers.Integral) and not isinstance(value, bool)

@dataclass(frozen=True)
class BetaParams:
    """Beta posterior pseudo-counts for one arm.

    Reals rather than integers: TS† credits half-weighted counts.

    Args:
        alpha (float): Pseudo-successes, at least 1.
        beta (float): Pseudo-failures, at least 1.
    """

    alpha: float = 1.0
    beta: float = 1.0

    def __post_init__(self):
        violations = []

        for name in ('alpha', 'beta'):
            value = getattr(self, name)
            if not (isinstance(value, numbers.Real) and math.isfinite(value) and value >= 1):
                violations.append(Violation(
                    'OUT_OF_RANGE', name, "must be a finite real >= 1, got {!r}".format(value)
                ))

        if violations:
            raise MABValidationException(violations)

        object.__setattr__(self, 'alpha', float(self.alpha))
        object.__setattr__(self, 'beta', float(self.beta))

    @property
    def mean(self):
        """float: The posterior mean alpha / (alpha + beta)."""

        return self.alpha / (self.alpha + self.beta)

    def add(self, successes, failures):
        """Return new parameters with the given (non-negative) counts added."""

        return BetaParams(self.alpha + successes, self.beta + failures)

@dataclass(frozen=True)
class BatchObservation:
    """One week's assignments and successes for one (policy, arm) pair.

    Args:
        week (int): The 1-based week.
        policy (PolicyId): The policy that allocated these students.
        arm (int): The 0-based arm.
        n (int): Students assigned.
        r (int): Emails opened; ``0 <= r <= n``.
    """

    week: int
    policy: PolicyId
    arm: int
    n: int
    r: int

    def __post_init__(self):
        violations = []

        if not isinstance(self.policy, PolicyId):
            violations.append(Violation('INVALID_VALUE', 'policy', "not a PolicyId"))

        for name, low in (('week', 1), ('arm', 0), ('n', 0), ('r', 0)):
            value = getattr(self, name)
            if not _is_int(value) or value < low:
                violations.append(Violation(
                    'OUT_OF_RANGE', name, "must be an integer >= {}, got {!r}".format(low, value)
                ))

        if not violations and self.r > self.n:
            violations.append(Violation(
                'OUT_OF_RANGE', 'r', "opened ({}) exceeds assigned ({})".format(self.r, self.n)
            ))

        if violations:
            raise MABValidationException(violations)

        for name in ('week', 'arm', 'n', 'r'):
            object.__setattr__(self, name, int(getattr(self, name)))

    @property
    def failures(self):
        """int: ``n - r``."""

        return self.n - self.r

@dataclass(frozen=True)
class Timeline:
    """The week schedule deciding which policies allocate and how priors are shared.

    Args:
        arms (int): Number of arms K.
        horizon (int): Number of weeks T.
        burn_in (int): Weeks of UR-only allocation whose data all policies share.
        ts_intro_week (int): First week TS allocates (``horizon + 1`` disables it).
        ts_dagger_intro_week (int): First week TS† allocates (``horizon + 1`` disables it).
    """

    arms: int
    horizon: int
    burn_in: int
    ts_intro_week: int
    ts_dagger_intro_week: int

    def phase(self, week):
        """Return the :class:`Phase` of a 1-based week."""

        if week <= self.burn_in: #pylint: disable=no-else-return
            return Phase.BURN_IN
        elif week < self.ts_intro_week:
            return Phase.UR_ONLY
        elif week < self.ts_dagger_intro_week:
            return Phase.TRANSITION

        return Phase.FULL

    def active_policies(self, week):
        """Return the policies that allocate students in the given week."""

        phase = self.phase(week)

        if phase is Phase.FULL:
            return (PolicyId.UR, PolicyId.TS, PolicyId.TS_DAGGER)
        if phase is Phase.TRANSITION:
            return (PolicyId.UR, PolicyId.TS)

        return (PolicyId.UR,)

    @property
    def weeks(self):
        """range: The 1-based weeks of the horizon."""

        return range(1, self.horizon + 1)

def linear_cohort(start, end, horizon):
    """Interpolate weekly cohort sizes linearly from ``start`` to ``end``.

    The default enrolment runs from 1119 students in week 1 to 1025 in the last week.

    Returns:
        tuple: ``horizon`` integers.
    """

    if horizon == 1:
        return (int(start),)

    return tuple(
        int(round(start + (end - start) * week / (horizon - 1)))
        for week in range(horizon)
    )

def check_config(cfg):
    """List every invariant an :class:`ExperimentConfig` violates.

    Args:
        cfg (ExperimentConfig): A config-shaped object (any object with the same attributes).

    Returns:
        list: :class:`pymab.exceptions.Violation` values, empty when the config is valid.
    """

    violations = []

    for name, low in (('arms', 2), ('horizon', 1), ('burn_in', 0),
                      ('ts_intro_week', 1), ('ts_dagger_intro_week', 1)):
        value = getattr(cfg, name)
        if not _is_int(value) or value < low:
            violations.append(Violation(
                'INVALID_VALUE', name, "must be an integer >= {}, got {!r}".format(low, value)
            ))

    if not violations:
        if not cfg.burn_in < cfg.ts_intro_week:
            violations.append(Violation(
                'BAD_WEEK_ORDERING', 'ts_intro_week',
                "burn_in ({}) must be before ts_intro_week ({})".format(
                    cfg.burn_in, cfg.ts_intro_week)
            ))
        if not cfg.ts_intro_week <= cfg.ts_dagger_intro_week:
            violations.append(Violation(
                'BAD_WEEK_ORDERING', 'ts_dagger_intro_week',
                "ts_intro_week ({}) must not follow ts_dagger_intro_week ({})".format(
                    cfg.ts_intro_week, cfg.ts_dagger_intro_week)
            ))
        if not cfg.ts_dagger_intro_week <= cfg.horizon + 1:
            violations.append(Violation(
                'BAD_WEEK_ORDERING', 'ts_dagger_intro_week',
                "ts_dagger_intro_week ({}) must be at most horizon + 1 ({})".format(
                    cfg.ts_dagger_intro_week, cfg.horizon + 1)
            ))

    sizes = cfg.cohort_sizes
    if _is_int(cfg.horizon) and len(sizes) != cfg.horizon:
        violations.append(Violation(
            'EMPTY_COHORT', 'cohort_sizes',
            "expected {} weekly sizes, got {}".format(cfg.horizon, len(sizes))
        ))
    bad = [size for size in sizes if not _is_int(size) or size <= 0]
    if bad:
        violations.append(Violation(
            'EMPTY_COHORT', 'cohort_sizes',
            "weekly sizes must be positive integers, got {!r}".format(bad)
        ))

    for name, width in (('split', 3), ('transition_split', 2)):
        fractions = getattr(cfg, name)
        if len(fractions) != width or any(
                not math.isfinite(fraction) or fraction < 0 for fraction in fractions):
            violations.append(Violation(
                'SPLIT_NOT_NORMALIZED', name,
                "expected {} non-negative fractions, got {!r}".format(width, fractions)
            ))
        elif abs(math.fsum(fractions) - 1.0) > SPLIT_TOLERANCE:
            violations.append(Violation(
                'SPLIT_NOT_NORMALIZED', name,
                "fractions sum to {!r}, not 1".format(math.fsum(fractions))
            ))

    if not _is_int(cfg.seed) or not 0 <= cfg.seed < MAX_SEED:
        violations.append(Violation(
            'INVALID_VALUE', 'seed', "must be an unsigned 64-bit integer, got {!r}".format(cfg.seed)
        ))

    return violations

def validate_config(cfg):
    """Validate an experiment configuration.

    Args:
        cfg (ExperimentConfig): The config to validate.

    Raises:
        MABValidationException: Listing every violated invariant.

    Returns:
        ExperimentConfig: ``cfg``, unchanged.
    """

    violations = check_config(cfg)

    if violations:
        raise MABValidationException(violations)

    return cfg

@dataclass(frozen=True)
class ExperimentConfig: #pylint: disable=too-many-instance-attributes
    """Everything that defines one simulated experiment.

    Args:
        arms (int): Arm count K (at least 2).
        horizon (int): Number of weeks T.
        burn_in (int): Weeks of UR-only allocation shared by every policy. Defaults to 5.
        ts_intro_week (int): First week TS allocates. Defaults to 6.
        ts_dagger_intro_week (int): First week TS† allocates. Defaults to 7.
        cohort_sizes (tuple): Students emailed each week (``horizon`` positive integers).
        split (tuple): (UR, TS, TS†) fractions in weeks where all three allocate.
        transition_split (tuple): (UR, TS) fractions in weeks where only those two allocate.
        seed (int): Master seed, an unsigned 64-bit integer.

    Raises:
        MABValidationException: The arguments violate an invariant.
    """

    arms: int
    horizon: int
    cohort_sizes: Tuple[int, ...]
    burn_in: int = 5
    ts_intro_week: int = 6
    ts_dagger_intro_week: int = 7
    split: Tuple[float, ...] = (0.5, 0.25, 0.25)
    transition_split: Tuple[float, ...] = (0.5, 0.5)
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, 'cohort_sizes', tuple(self.cohort_sizes))
        object.__setattr__(self, 'split', tuple(float(value) for value in self.split))
        object.__setattr__(
            self, 'transition_split', tuple(float(value) for value in self.transition_split)
        )

        validate_config(self)

    @classmethod
    def constant_cohort(cls, arms, horizon, cohort_size, **kwargs):
        """Build a config emailing the same number of students every week."""

        return cls(arms=arms, horizon=horizon, cohort_sizes=(cohort_size,) * horizon, **kwargs)

    @classmethod
    def reference(cls, seed=42, **kwargs):
        """The reference deployment: 3 arms, 13 weeks, enrolment declining 1119 to 1025."""

        kwargs.setdefault('cohort_sizes', linear_cohort(1119, 1025, 13))

        return cls(arms=3, horizon=13, seed=seed, **kwargs)

    @property
    def timeline(self):
        """Timeline: The week schedule of this config."""

        return Timeline(
            self.arms, self.horizon, self.burn_in, self.ts_intro_week, self.ts_dagger_intro_week
        )

    def with_seed(self, seed):
        """Return a copy of this config with another seed."""

        return replace(self, seed=seed)

@dataclass(frozen=True)
class EnvironmentSchedule:
    """True Bernoulli open probability per arm per week.

    Args:
        means (tuple): ``horizon`` rows of ``arms`` probabilities in [0, 1].

    Raises:
        MABValidationException: ``BAD_DIMENSIONS`` or ``OUT_OF_RANGE``.
    """

    means: Tuple[Tuple[float, ...], ...]

    def __post_init__(self):
        try:
            rows = tuple(tuple(float(value) for value in row) for row in self.means)
        except (TypeError, ValueError) as err:
            raise MABValidationException([
                Violation('BAD_DIMENSIONS', 'means', "rows must be sequences of numbers")
            ]) from err

        violations = []
        widths = {len(row) for row in rows}

        if not rows or len(widths) != 1 or 0 in widths:
            violations.append(Violation(
                'BAD_DIMENSIONS', 'means',
                "expected non-empty rows of equal width, got widths {}".format(
                    [len(row) for row in rows])
            ))

        for week, row in enumerate(rows, start=1):
            if any(not 0.0 <= value <= 1.0 for value in row):
                violations.append(Violation(
                    'OUT_OF_RANGE', 'means',
                    "week {} has a mean outside [0, 1]: {!r}".format(week, row)
                ))

        if violations:
            raise MABValidationException(violations)

        object.__setattr__(self, 'means', rows)

    @property
    def horizon(self):
        """int: Number of weeks."""

        return len(self.means)

    @property
    def arms(self):
        """int: Number of arms."""

        return len(self.means[0])

    @property
    def is_stationary(self):
        """bool: True when every week has the same row."""

        return all(row == self.means[0] for row in self.means)

    def row(self, week):
        """Return the K true means of a 1-based week."""

        return self.means[week - 1]

    def as_array(self):
        """Return the schedule as a T x K numpy array."""

        return np.array(self.means, dtype=float)

@dataclass(frozen=True)
class PolicyState:
    """One policy's posteriors and the observations credited to them.

    ``weights`` parallels ``history``: each entry is the weight (1 or 0.5) with which
    that observation entered the posterior.

    Args:
        policy (PolicyId): The policy this state belongs to.
        posteriors (tuple): One :class:`BetaParams` per arm.
        history (tuple): Credited :class:`BatchObservation` values, in update order.
        weights (tuple): The weight of each history entry.
    """

    policy: PolicyId
    posteriors: Tuple[BetaParams, ...]
    history: Tuple[BatchObservation, ...] = field(default=())
    weights: Tuple[float, ...] = field(default=())

    def __post_init__(self):
        if len(self.history) != len(self.weights):
            raise MABValidationException([
                Violation('BAD_DIMENSIONS', 'weights', "one weight per history entry required")
            ])

    @classmethod
    def initial(cls, policy, arms):
        """The Beta(1, 1) starting state of a policy."""

        return cls(policy, tuple(BetaParams() for _ in range(arms)))

    @property
    def arms(self):
        """int: Number of arms."""

        return len(self.posteriors)

    def weighted_total(self, arm):
        """Weighted number of students credited to an arm's posterior."""

        return math.fsum(
            weight * obs.n for obs, weight in zip(self.history, self.weights) if obs.arm == arm
        )

    def conservation_error(self):
        """Largest gap between ``alpha + beta - 2`` and the credited totals, over arms."""

        return max(
            abs(params.alpha + params.beta - 2.0 - self.weighted_total(arm))
            for arm, params in enumerate(self.posteriors)
        )
