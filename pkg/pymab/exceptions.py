"""All pymab exceptions."""

from collections import namedtuple

class Violation(namedtuple('Violation', ['code', 'field', 'message', 'line'])):
    """A single violated invariant found while validating input.

    Attributes:
        code (str): Machine-readable violation code (e.g. ``SPLIT_NOT_NORMALIZED``).
        field (str): The configuration field the violation concerns.
        message (str): A human-readable description.
        line (int): 1-based line in the source document, or None for in-memory input.
    """

    __slots__ = ()

    def __new__(cls, code, field, message, line=None):
        return super().__new__(cls, code, field, message, line)

    def __str__(self):
        where = "line {}: ".format(self.line) if self.line is not None else ""
        return "{}{} ({}): {}".format(where, self.code, self.field, self.message)

class MABException(Exception):
    """A base class for all pymab exceptions.

    Attributes:
        code (str): Machine-readable error code.
        message (str): The error message string.
    """

    code = 'MAB_ERROR'

    def __init__(self, message=''):
        super().__init__(message)
        self.message = message

class MABValidationException(MABException):
    """An experiment configuration or schedule violates one or more invariants.

    Args:
        violations (list): Every :class:`Violation` found, not just the first.

    Attributes:
        violations (list): The violations, in the order they were found.
    """

    code = 'VALIDATION_ERROR'

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(str(violation) for violation in self.violations))

    @property
    def codes(self):
        """list: The violation codes, in order."""

        return [violation.code for violation in self.violations]

class MABUpdateException(MABException):
    """A posterior update was requested with unusable observations.

    Args:
        code (str): One of ``REWARD_EXCEEDS_ASSIGNED``, ``POLICY_NOT_ACTIVE``,
            ``MISSING_SOURCE``, ``WRONG_POLICY``, ``ARM_MISMATCH``.
        message (str): The error message string.
    """

    def __init__(self, code, message):
        super().__init__(message)
        self.code = code

class MABIncompleteLogException(MABException):
    """An observation log lacks a row required by the policy schedule.

    Args:
        week (int): The week of the first missing row.
        policy (PolicyId): The policy of the first missing row.
        arm (int): The 0-based arm of the first missing row.
    """

    code = 'INCOMPLETE_LOG'

    def __init__(self, week, policy, arm):
        self.week = week
        self.policy = policy
        self.arm = arm
        super().__init__(
            "INCOMPLETE_LOG({}, {}, {})".format(week, policy.token, arm + 1)
        )

class MABUndefinedSummaryException(MABException):
    """A statistic was requested for an arm that has no observations."""

    code = 'UNDEFINED_SUMMARY'

class MABParseException(MABException):
    """An input file could not be parsed.

    Args:
        line (int): The 1-based line at which the problem was found (None if unknown).
        message (str): The error message string.
    """

    code = 'PARSE_ERROR'

    def __init__(self, line, message):
        self.line = line
        where = "line {}: ".format(line) if line is not None else ""
        super().__init__("{}{}".format(where, message))

class MABDuplicateRowException(MABParseException):
    """An observation log holds two rows for the same (week, policy, arm)."""

    code = 'DUPLICATE_ROW'

    def __init__(self, line, week, policy, arm): #pylint: disable=too-many-arguments
        self.week = week
        self.policy = policy
        self.arm = arm
        super().__init__(
            line,
            "DUPLICATE_ROW({}, {}, {})".format(week, policy.token, arm + 1)
        )

class MABOutputException(MABException):
    """Output files could not be written."""

    code = 'IO_ERROR'

class MABEngineException(MABException):
    """The engine detected a broken internal invariant while running."""

    code = 'ENGINE_ERROR'
