"""
Batched multi-armed bandit experiments: uniform random, Thompson Sampling and TS†

pymab runs (and replays) week-by-week adaptive experiments in which a cohort is split
between a uniform random policy, Thompson Sampling, and TS†, a Thompson Sampling
variant whose Beta priors take half-weighted evidence from itself and from the uniform
allocation. It also reproduces the standard analysis of such an experiment: cumulative
arm means, standard errors, confidence intervals and Bonferroni-corrected Wald z-tests.

usage:
    >>> import pymab
    >>> cfg = pymab.ExperimentConfig.reference(seed=42)
    >>> env = pymab.make_schedule('stationary', (0.606, 0.580, 0.585), cfg.horizon)
    >>> trace = pymab.run_experiment(cfg, env)
"""

# PyMAB Version
__version__ = "0.1.0"

# Export the interface we present to clients

# Domain types
from .model import PolicyId, BetaParams, BatchObservation, ExperimentConfig, \
    EnvironmentSchedule, PolicyState, Timeline, linear_cohort, validate_config

# Policies and environment
from .policies import AllocationResult, ur_allocate, beta_sample, ts_allocate, \
    ur_update, ts_update, ts_dagger_update
from .environment import WeeklyOutcome, draw_rewards, make_schedule

# Orchestration
from .engine import ExperimentTrace, run_experiment, split_cohort, replay, run_replications

# Analysis
from .analysis import ArmSummary, WaldResult, summarize, wald_test, bonferroni, \
    confidence_interval, allocation_concentration, pairwise_tests

# Files
from .config_file import parse_config
from .logs import read_log, write_log
from .reports import write_trace, write_replications

# Import exceptions
from .exceptions import *
