"""Observation logs: one CSV row per (week, policy, arm)."""

import logging
from dataclasses import asdict, dataclass

import pandas as pd

from .exceptions import MABDuplicateRowException, MABParseException, MABValidationException
from .model import BatchObservation, PolicyId

_log = logging.getLogger(__name__)

LOG_COLUMNS = ['week', 'policy', 'arm', 'assigned', 'opened']

@dataclass(frozen=True)
class ObservationLogRow:
    """A log row as written in files: 1-based arm and a policy token.

    Args:
        week (int): The 1-based week.
        policy (str): ``UR``, ``TS`` or ``TSD``.
        arm (int): The 1-based arm.
        assigned (int): Students assigned.
        opened (int): Emails opened.
    """

    week: int
    policy: str
    arm: int
    assigned: int
    opened: int

    @classmethod
    def from_observation(cls, obs):
        """Convert an in-memory observation to its file form."""

        return cls(obs.week, obs.policy.token, obs.arm + 1, obs.n, obs.r)

    def to_observation(self):
        """Convert to a :class:`BatchObservation`.

        Raises:
            ValueError: Unknown policy token.
            MABValidationException: A field violates its constraint.
        """

        return BatchObservation(
            self.week, PolicyId.from_token(self.policy), self.arm - 1, self.assigned, self.opened
        )

def _parse_int(value, name, line):
    try:
        return int(str(value).strip())
    except ValueError as err:
        raise MABParseException(line, "{} must be an integer, got {!r}".format(name, value)) from err

def read_log(path):
    """Read an observation log.

    Args:
        path (str): A comma-separated file with header ``week,policy,arm,assigned,opened``.

    Raises:
        OSError: The file cannot be read.
        MABParseException: A malformed row, naming its line and the violated constraint.
        MABDuplicateRowException: Two rows for the same (week, policy, arm).

    Returns:
        list: :class:`BatchObservation` values sorted by week, policy, arm.
    """

    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False, skip_blank_lines=False)
    except pd.errors.EmptyDataError as err:
        raise MABParseException(1, "empty log") from err
    except pd.errors.ParserError as err:
        raise MABParseException(None, str(err)) from err

    if [column.strip() for column in frame.columns] != LOG_COLUMNS:
        raise MABParseException(1, "expected header {}".format(','.join(LOG_COLUMNS)))

    observations = {}

    for line, record in enumerate(frame.itertuples(index=False, name=None), start=2):
        if not any(str(field).strip() for field in record):
            continue

        week, policy, arm, assigned, opened = record
        row = ObservationLogRow(
            _parse_int(week, 'week', line),
            str(policy).strip(),
            _parse_int(arm, 'arm', line),
            _parse_int(assigned, 'assigned', line),
            _parse_int(opened, 'opened', line),
        )

        try:
            obs = row.to_observation()
        except ValueError as err:
            raise MABParseException(line, str(err)) from err
        except MABValidationException as err:
            raise MABParseException(line, err.message) from err

        key = (obs.week, obs.policy, obs.arm)
        if key in observations:
            raise MABDuplicateRowException(line, obs.week, obs.policy, obs.arm)
        observations[key] = obs

    _log.debug("Read %d log rows from %s", len(observations), path)

    return sorted(
        observations.values(), key=lambda obs: (obs.week, obs.policy.index, obs.arm)
    )

def log_frame(observations):
    """The log rows of ``observations`` as a DataFrame, in week, policy, arm order."""

    ordered = sorted(observations, key=lambda obs: (obs.week, obs.policy.index, obs.arm))

    return pd.DataFrame(
        [asdict(ObservationLogRow.from_observation(obs)) for obs in ordered],
        columns=LOG_COLUMNS,
    )

def write_log(observations, path):
    """Write observations in the format :func:`read_log` reads."""

    log_frame(observations).to_csv(path, index=False, lineterminator='\n')
