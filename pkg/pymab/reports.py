"""CSV reports of traces and replications, and aligned-text test tables.

Every file has a fixed column order and row order (week, then policy in
UR/TS/TSD order, then arm). Numbers carry 6 significant digits; rates in
``summary.csv`` are in percent, matching the Table-1 layout that
:func:`read_summary` accepts.
"""

import logging
import os

import pandas as pd

from .analysis import ArmSummary, confidence_interval, pairwise_tests, policy_summaries, \
    weekly_series
from .exceptions import MABOutputException, MABParseException
from .logs import log_frame
from .model import PolicyId

_log = logging.getLogger(__name__)

FLOAT_FORMAT = '%.6g'
FORBIDDEN = (',', '"', '\n', '\r')

WEEKLY_COLUMNS = ['week', 'policy', 'arm', 'cumulative_mean', 'ci_low', 'ci_high',
                  'allocation_proportion']
SUMMARY_COLUMNS = ['policy', 'arm', 'mean', 'se', 'observations']
WALD_COLUMNS = ['policy', 'arm_a', 'arm_b', 'statistic', 'p_value', 'adjusted_threshold',
                'significant']
POSTERIOR_COLUMNS = ['week', 'policy', 'arm', 'alpha', 'beta']

REPLICATION_COLUMNS = ['replication', 'policy', 'arm', 'assigned', 'opened', 'share',
                       'credited_mean', 'credited_n']
REPLICATION_TEST_COLUMNS = ['replication', 'policy', 'arm_a', 'arm_b', 'statistic', 'p_value',
                            'adjusted_threshold', 'significant']
REGRET_COLUMNS = ['replication', 'policy', 'regret']

def _assert_plain(frame):
    """Check that no field would need CSV quoting."""

    for column in frame.columns:
        if frame[column].dtype != object:
            continue
        for value in frame[column]:
            if value is not None and any(char in str(value) for char in FORBIDDEN):
                raise MABOutputException(
                    "column {!r} holds a value needing quotes: {!r}".format(column, value)
                )

def write_frame(frame, path):
    """Write a DataFrame as a deterministic, quote-free CSV.

    Raises:
        MABOutputException: The file cannot be written, or a field needs quoting.
    """

    _assert_plain(frame)

    try:
        frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, na_rep='', lineterminator='\n')
    except OSError as err:
        raise MABOutputException("cannot write {}: {}".format(path, err)) from err

    _log.debug("Wrote %d rows to %s", len(frame), path)

def _percent(value):
    return None if value is None else 100.0 * value

def summary_frame(summaries):
    """Table-1 shaped rows (rates in percent) from ``{PolicyId: tuple of ArmSummary}``."""

    rows = [
        (policy.token, summary.arm + 1, _percent(summary.mean), _percent(summary.se),
         summary.n_total)
        for policy in PolicyId for summary in summaries.get(policy, ())
    ]

    return pd.DataFrame(rows, columns=SUMMARY_COLUMNS)

def wald_frame(tests):
    """Table-2 shaped rows from ``{PolicyId: tuple of WaldResult}``."""

    rows = [
        (policy.token, result.pair[0] + 1, result.pair[1] + 1, result.statistic,
         result.p_value, result.adjusted_threshold, result.significant)
        for policy in PolicyId for result in tests.get(policy, ())
    ]

    return pd.DataFrame(rows, columns=WALD_COLUMNS)

def write_trace(trace, out_dir, family_alpha=0.05, level=0.95):
    """Write the files describing one run or replayed log.

    Files: ``observations.csv`` (the log), ``weekly.csv`` (cumulative means, confidence
    bounds and weekly allocation proportions), ``summary.csv``, ``wald.csv`` and
    ``posteriors.csv``.

    Raises:
        MABOutputException: A file cannot be written.

    Returns:
        list: The paths written.
    """

    try:
        os.makedirs(out_dir, exist_ok=True)
    except OSError as err:
        raise MABOutputException("cannot create {}: {}".format(out_dir, err)) from err

    summaries = policy_summaries(trace)
    tests = {policy: pairwise_tests(summaries[policy], family_alpha) for policy in PolicyId}

    weekly = pd.DataFrame(
        [(point.week, point.policy.token, point.arm + 1, point.cumulative_mean, point.ci_low,
          point.ci_high, point.allocation_proportion)
         for point in weekly_series(trace, level)],
        columns=WEEKLY_COLUMNS,
    )
    posteriors = pd.DataFrame(
        [(week, policy.token, arm + 1, params.alpha, params.beta)
         for week in trace.timeline.weeks
         for policy in PolicyId
         for arm, params in enumerate(trace.posterior(policy, week))],
        columns=POSTERIOR_COLUMNS,
    )

    frames = (
        ('observations.csv', log_frame(trace.observations())),
        ('weekly.csv', weekly),
        ('summary.csv', summary_frame(summaries)),
        ('wald.csv', wald_frame(tests)),
        ('posteriors.csv', posteriors),
    )

    paths = []
    for name, frame in frames:
        path = os.path.join(out_dir, name)
        write_frame(frame, path)
        paths.append(path)

    return paths

def write_replications(results, out_dir):
    """Write per-replication records and their distributional aggregates.

    Files: ``replications.csv``, ``replication_tests.csv``, ``replication_regret.csv``,
    ``replication_summary.csv`` (median and 5%/95% quantiles of each arm's own
    allocation share, median credited mean) and ``replication_rejections.csv``
    (unadjusted and Bonferroni rejection rates of each arm pair).

    Returns:
        list: The paths written.
    """

    try:
        os.makedirs(out_dir, exist_ok=True)
    except OSError as err:
        raise MABOutputException("cannot create {}: {}".format(out_dir, err)) from err

    arm_rows, test_rows, regret_rows = [], [], []

    for result in results:
        for policy in PolicyId:
            for arm, (assigned, opened) in enumerate(result.own_counts[policy]):
                credited = result.summaries[policy][arm]
                arm_rows.append((
                    result.replication, policy.token, arm + 1, assigned, opened,
                    result.shares[policy][arm], credited.mean, credited.n_total
                ))
            for test in result.tests[policy]:
                test_rows.append((
                    result.replication, policy.token, test.pair[0] + 1, test.pair[1] + 1,
                    test.statistic, test.p_value, test.adjusted_threshold, test.significant
                ))
            regret_rows.append((result.replication, policy.token, result.regret[policy]))

    arms = pd.DataFrame(arm_rows, columns=REPLICATION_COLUMNS)
    tests = pd.DataFrame(test_rows, columns=REPLICATION_TEST_COLUMNS)

    frames = (
        ('replications.csv', arms),
        ('replication_tests.csv', tests),
        ('replication_regret.csv', pd.DataFrame(regret_rows, columns=REGRET_COLUMNS)),
        ('replication_summary.csv', replication_summary(arms)),
        ('replication_rejections.csv', rejection_rates(tests)),
    )

    paths = []
    for name, frame in frames:
        path = os.path.join(out_dir, name)
        write_frame(frame, path)
        paths.append(path)

    return paths

def _policy_order(frame):
    order = {policy.token: policy.index for policy in PolicyId}

    return frame.assign(_order=frame['policy'].map(order))

def replication_summary(arms):
    """Distribution of allocation shares and credited means over replications."""

    grouped = _policy_order(arms).groupby(['_order', 'policy', 'arm'], sort=True)

    summary = grouped.agg(
        median_share=('share', 'median'),
        q05_share=('share', lambda values: values.quantile(0.05)),
        q95_share=('share', lambda values: values.quantile(0.95)),
        median_credited_mean=('credited_mean', 'median'),
    ).reset_index()

    return summary.drop(columns='_order')

def rejection_rates(tests):
    """Share of replications rejecting each pair's null, unadjusted (0.05) and adjusted."""

    frame = _policy_order(tests).assign(rejected=lambda f: f['p_value'] < 0.05)
    grouped = frame.groupby(['_order', 'policy', 'arm_a', 'arm_b'], sort=True)

    rates = grouped.agg(
        rejection_rate=('rejected', 'mean'),
        adjusted_rejection_rate=('significant', 'mean'),
        median_p_value=('p_value', 'median'),
    ).reset_index()

    return rates.drop(columns='_order')

def read_summary(path):
    """Read a Table-1 shaped CSV (``policy,arm,mean,se,observations``, rates in percent).

    Standard errors are recomputed from the mean and observation count; the ``se``
    column is only cross-checked.

    Raises:
        OSError: The file cannot be read.
        MABParseException: A malformed or repeated row, naming its line.

    Returns:
        dict: ``{PolicyId: tuple of ArmSummary}`` in policy and arm order.
    """

    try:
        frame = pd.read_csv(path, skipinitialspace=True, skip_blank_lines=False)
    except (pd.errors.EmptyDataError, pd.errors.ParserError) as err:
        raise MABParseException(None, str(err)) from err

    if list(frame.columns) != SUMMARY_COLUMNS:
        raise MABParseException(1, "expected header {}".format(','.join(SUMMARY_COLUMNS)))

    rows = {}
    for line, record in enumerate(frame.itertuples(index=False, name=None), start=2):
        if all(pd.isna(field) for field in record):
            continue

        token, arm, mean, se, count = record
        try:
            policy = PolicyId.from_token(str(token).strip())
            arm, count = int(arm), int(count)
            mean = float(mean) / 100.0
        except ValueError as err:
            raise MABParseException(line, str(err)) from err

        if arm < 1 or count < 0 or not 0.0 <= mean <= 1.0:
            raise MABParseException(line, "arm >= 1, observations >= 0, mean in [0, 100] required")

        summary = ArmSummary.from_rate(policy, arm - 1, mean, count)
        if summary.defined and abs(100.0 * summary.se - float(se)) > 0.05:
            _log.debug("Line %d: reported se %s differs from recomputed %.4f",
                       line, se, 100.0 * summary.se)

        arms = rows.setdefault(policy, {})
        if arm - 1 in arms:
            raise MABParseException(line, "duplicate row for {} arm {}".format(policy.token, arm))
        arms[arm - 1] = summary

    summaries = {}
    for policy in PolicyId:
        if policy in rows:
            arms = rows[policy]
            if sorted(arms) != list(range(len(arms))):
                raise MABParseException(None, "{} arms are not numbered 1..{}".format(
                    policy.token, len(arms)))
            summaries[policy] = tuple(arms[arm] for arm in range(len(arms)))

    return summaries

def format_wald_table(tests):
    """Render Table-2 style tests as aligned text (p-values and statistics to 3 decimals)."""

    rows = [
        (policy.label, "Arm {} vs. Arm {}".format(result.pair[0] + 1, result.pair[1] + 1),
         "{:.3f}".format(result.p_value), "{:.3f}".format(result.statistic),
         "{:.4f}".format(result.adjusted_threshold), "yes" if result.significant else "no")
        for policy in PolicyId for result in tests.get(policy, ())
    ]

    frame = pd.DataFrame(
        rows, columns=['Policy', 'Comparison', 'p-value', 'Wald statistic', 'Threshold',
                       'Significant']
    )

    return frame.to_string(index=False)

def format_summary_table(summaries, level=0.95):
    """Render Table-1 style summaries as aligned text, with confidence bounds."""

    rows = []
    for policy in PolicyId:
        for summary in summaries.get(policy, ()):
            if summary.defined:
                low, high = confidence_interval(summary, level)
                cells = ("{:.2f}".format(100 * summary.mean), "{:.2f}".format(100 * summary.se),
                         "{:.2f}-{:.2f}".format(100 * low, 100 * high))
            else:
                cells = ("-", "-", "-")
            rows.append((policy.label, summary.arm + 1) + cells + (summary.n_total,))

    frame = pd.DataFrame(
        rows, columns=['Policy', 'Arm', 'Mean', 'SE', 'CI', 'Observations']
    )

    return frame.to_string(index=False)
