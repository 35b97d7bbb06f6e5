"""Unit tests for pymab"""

import os
import logging
import logging.handlers
import shutil
import tempfile
import unittest

import pymab

PYMAB_LOGGER_EXISTS = False

TESTS_DIR = os.path.dirname(os.path.abspath(__file__))
FIXTURES_DIR = os.path.join(TESTS_DIR, 'fixtures')
CONFIGS_DIR = os.path.join(os.path.dirname(TESTS_DIR), 'configs')

# Reported summary of the reference deployment: (policy, arm) -> (mean %, se %, observations)
REPORTED_SUMMARY = {
    (pymab.PolicyId.UR, 0): (60.61, 0.87, 3130),
    (pymab.PolicyId.UR, 1): (57.96, 0.89, 3094),
    (pymab.PolicyId.UR, 2): (58.52, 0.89, 3036),
    (pymab.PolicyId.TS, 0): (60.07, 0.86, 3217),
    (pymab.PolicyId.TS, 1): (60.60, 1.07, 2086),
    (pymab.PolicyId.TS, 2): (60.36, 1.15, 1825),
    (pymab.PolicyId.TS_DAGGER, 0): (61.21, 0.81, 3618),
    (pymab.PolicyId.TS_DAGGER, 1): (61.99, 1.13, 1852),
    (pymab.PolicyId.TS_DAGGER, 2): (61.44, 1.20, 1653),
}

# Reported pairwise Wald tests: (policy, pair) -> (p-value, Wald statistic)
REPORTED_WALD = {
    (pymab.PolicyId.UR, (0, 1)): (0.033, 2.129),
    (pymab.PolicyId.UR, (1, 2)): (0.653, 0.449),
    (pymab.PolicyId.UR, (2, 0)): (0.095, 1.668),
    (pymab.PolicyId.TS, (0, 1)): (0.701, 0.384),
    (pymab.PolicyId.TS, (1, 2)): (0.880, 0.151),
    (pymab.PolicyId.TS, (2, 0)): (0.840, 0.202),
    (pymab.PolicyId.TS_DAGGER, (0, 1)): (0.573, 0.564),
    (pymab.PolicyId.TS_DAGGER, (1, 2)): (0.738, 0.335),
    (pymab.PolicyId.TS_DAGGER, (2, 0)): (0.872, 0.161),
}

def build_logging_environment():
    """Builds logging for the environment.

    If the necessary environment variables don't exist, skip logging.
    We look for the following vars:
    PYMAB_LOG_DIR (the directory in which logs should be stored)
    """

    global PYMAB_LOGGER_EXISTS #pylint: disable=W0603

    try:
        if not PYMAB_LOGGER_EXISTS:
            log_dir = os.environ['PYMAB_LOG_DIR']

            log = logging.getLogger('pymab')
            log.setLevel(logging.DEBUG)

            file_handler = logging.handlers.RotatingFileHandler(
                os.path.join(log_dir, "pymab.log"),
                maxBytes=50000,
                backupCount=10
            )
            file_handler.setLevel(logging.DEBUG)
            file_handler.setFormatter(logging.Formatter(
                '%(levelname)8s  %(asctime)s  [%(module)s|%(lineno)d]  %(message)s'
            ))

            log.addHandler(file_handler)

            PYMAB_LOGGER_EXISTS = True

    except KeyError:
        pass

def reported_totals_log():
    """A three-week log whose credited totals reproduce the reported summary.

    Week 1 is a UR burn-in of 1000 students per arm, week 2 a UR/TS transition
    week of 300 per arm each, and week 3 fills every policy up to its tabled
    observations and opens.
    """

    log = []

    for arm in range(3):
        log.append(pymab.BatchObservation(1, pymab.PolicyId.UR, arm, 1000, 600))
        log.append(pymab.BatchObservation(2, pymab.PolicyId.UR, arm, 300, 180))
        log.append(pymab.BatchObservation(2, pymab.PolicyId.TS, arm, 300, 180))

    for policy in pymab.PolicyId:
        for arm in range(3):
            mean, _, count = REPORTED_SUMMARY[(policy, arm)]
            opened = int(round(mean / 100 * count))
            log.append(pymab.BatchObservation(3, policy, arm, count - 1300, opened - 780))

    return log

def fixture(name):
    """Path of a file under tests/fixtures."""

    return os.path.join(FIXTURES_DIR, name)

def reference_config_path():
    """Path of the shipped reference configuration."""

    return os.path.join(CONFIGS_DIR, 'reference.cfg')

class BaseMABTestCase(unittest.TestCase):
    """"A base class for unit tests on the pymab library.

    This class provides boilerplate for logging configuration and scratch directories.
    """

    def __init__(self, *args, **kwargs):

        unittest.TestCase.__init__(self, *args, **kwargs)

        build_logging_environment()

    def make_tempdir(self):
        """Create a scratch directory removed after the test."""

        path = tempfile.mkdtemp(prefix='pymab-test-')
        self.addCleanup(shutil.rmtree, path, ignore_errors=True)

        return path

    @staticmethod
    def reference_config(seed=42, **kwargs):
        """The reference 3-arm, 13-week configuration."""

        return pymab.ExperimentConfig.reference(seed=seed, **kwargs)

    @staticmethod
    def stationary(means, horizon=13):
        """A stationary schedule."""

        return pymab.make_schedule('stationary', means, horizon)
