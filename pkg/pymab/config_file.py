"""Experiment configuration documents (YAML).

A document names every :class:`pymab.model.ExperimentConfig` field plus an
``environment`` block; see ``configs/reference.cfg`` for a commented example.
"""

import logging
import numbers
from collections import namedtuple
from types import SimpleNamespace

import yaml

from .environment import make_schedule
from .exceptions import MABParseException, MABValidationException, Violation
from .model import ExperimentConfig, check_config, linear_cohort

_log = logging.getLogger(__name__)

CONFIG_KEYS = (
    'arms', 'horizon', 'burn_in', 'ts_intro_week', 'ts_dagger_intro_week',
    'cohort_sizes', 'split', 'transition_split', 'seed', 'environment',
)

ParsedConfig = namedtuple('ParsedConfig', ['config', 'environment'])

def _load_document(text):
    """Load a YAML mapping and the 1-based line of each top-level key."""

    loader = yaml.SafeLoader(text)

    try:
        node = loader.get_single_node()
        data = loader.construct_document(node) if node is not None else None
    except yaml.MarkedYAMLError as err:
        mark = err.problem_mark or err.context_mark
        raise MABParseException(
            mark.line + 1 if mark else None, err.problem or str(err)
        ) from err
    except yaml.YAMLError as err:
        raise MABParseException(None, str(err)) from err
    finally:
        loader.dispose()

    if not isinstance(data, dict):
        raise MABParseException(1, "expected a mapping of configuration keys")

    lines = {key.value: key.start_mark.line + 1 for key, _ in node.value}

    return data, lines

def _cohort_sizes(value, horizon):
    if isinstance(value, dict) and set(value) == {'start', 'end'}:
        return linear_cohort(value['start'], value['end'], horizon)
    if isinstance(value, numbers.Integral) and not isinstance(value, bool):
        return (value,) * horizon
    if isinstance(value, list):
        return tuple(value)

    raise ValueError("cohort_sizes must be a list, an integer or a {start, end} mapping")

def _fractions(value):
    if not isinstance(value, list) or not all(
            isinstance(item, numbers.Real) and not isinstance(item, bool) for item in value):
        raise ValueError("expected a list of numbers, got {!r}".format(value))

    return tuple(float(item) for item in value)

def _schedule(block, horizon):
    if not isinstance(block, dict) or 'kind' not in block:
        raise ValueError("environment must be a mapping with a 'kind'")

    kind = block['kind']
    if kind == 'segments':
        spec = [(segment['weeks'], segment['means']) for segment in block.get('segments', ())]
    else:
        spec = block.get('means')

    return make_schedule(kind, spec, horizon)

def parse_config_text(text):
    """Parse a configuration document.

    Raises:
        MABParseException: Malformed YAML, a missing key (named) or an unknown key.
        MABValidationException: Every invalid value, with the line of its key.

    Returns:
        ParsedConfig: ``(config, environment)``.
    """

    data, lines = _load_document(text)

    for key in data:
        if key not in CONFIG_KEYS:
            raise MABParseException(lines.get(key), "unknown key {!r}".format(key))
    for key in CONFIG_KEYS:
        if key not in data:
            raise MABParseException(None, "missing required key {!r}".format(key))

    def located(violation):
        return violation._replace(line=lines.get(violation.field))

    violations = []
    fields = {key: data[key] for key in CONFIG_KEYS if key != 'environment'}
    horizon = data['horizon'] if isinstance(data['horizon'], int) else 0

    converters = (
        ('cohort_sizes', lambda value: _cohort_sizes(value, horizon)),
        ('split', _fractions),
        ('transition_split', _fractions),
    )
    for key, convert in converters:
        try:
            fields[key] = convert(data[key])
        except (TypeError, ValueError, KeyError) as err:
            violations.append(Violation('INVALID_VALUE', key, str(err)))
            fields[key] = ()

    violations.extend(check_config(SimpleNamespace(**fields)))

    environment = None
    try:
        environment = _schedule(data['environment'], horizon or None)
    except MABValidationException as err:
        violations.extend(v._replace(field='environment') for v in err.violations)
    except (TypeError, ValueError, KeyError) as err:
        violations.append(Violation('BAD_DIMENSIONS', 'environment', str(err)))

    if environment is not None and isinstance(data['arms'], int) and \
            environment.arms != data['arms']:
        violations.append(Violation(
            'BAD_DIMENSIONS', 'environment',
            "{} means per week for {} arms".format(environment.arms, data['arms'])
        ))

    if violations:
        raise MABValidationException([located(violation) for violation in violations])

    config = ExperimentConfig(**fields)

    _log.debug("Parsed config: %s", config)

    return ParsedConfig(config, environment)

def parse_config(path):
    """Parse the configuration document at ``path``.

    Raises:
        OSError: The file cannot be read.
        MABParseException: See :func:`parse_config_text`.
        MABValidationException: See :func:`parse_config_text`.

    Returns:
        ParsedConfig: ``(config, environment)``.
    """

    with open(path, 'r', encoding='utf-8') as fh:
        return parse_config_text(fh.read())

def dump_config(config, environment, path):
    """Write the effective configuration, derived values included, as YAML."""

    if environment.is_stationary:
        block = {'kind': 'stationary', 'means': list(environment.means[0])}
    else:
        block = {'kind': 'piecewise', 'means': [list(row) for row in environment.means]}

    document = {
        'arms': config.arms,
        'horizon': config.horizon,
        'burn_in': config.burn_in,
        'ts_intro_week': config.ts_intro_week,
        'ts_dagger_intro_week': config.ts_dagger_intro_week,
        'cohort_sizes': list(config.cohort_sizes),
        'split': list(config.split),
        'transition_split': list(config.transition_split),
        'seed': config.seed,
        'environment': block,
    }

    with open(path, 'w', encoding='utf-8', newline='\n') as fh:
        yaml.safe_dump(document, fh, sort_keys=False, default_flow_style=None)
