import copy
import json
import logging
import numbers
import os

from .base import ConfigError, UsageError
from .defaults import default_config

logger = logging.getLogger(__name__)

config_env_var = 'UBDMHALOSCOPE_CONFIG'
preset_location = os.path.join(os.path.dirname(os.path.abspath(__file__)), 'presets')
preset_extension = '.preset'


def available_presets():
    return sorted(os.path.splitext(f)[0] for f in os.listdir(preset_location)
                  if f.endswith(preset_extension))


def _load_json(path, what='config'):
    path = os.path.expanduser(path)
    if not os.path.exists(path):
        raise ConfigError(f'{what} file {path} does not exist')
    with open(path, 'r') as f:
        try:
            data = json.load(f)
        except json.JSONDecodeError as e:
            raise ConfigError(f'{what} file {path} is not valid JSON: {e}')
    if not isinstance(data, dict):
        raise ConfigError(f'{what} file {path} must hold a JSON object')
    return data


def _strip_comments(data):
    if isinstance(data, dict):
        return {k: _strip_comments(v) for k, v in data.items() if not k.startswith('_')}
    return data


def load_preset(name):
    """Load a preset by name (e.g. 'admx') or by path to a .preset file"""
    if os.path.exists(os.path.expanduser(name)):
        path = name
    else:
        path = os.path.join(preset_location, name + preset_extension)
        if not os.path.exists(path):
            raise ConfigError(f'Unknown preset {name!r}, available: {available_presets()}')
    return _strip_comments(_load_json(path, what='preset'))


def _is_number(value):
    return isinstance(value, numbers.Real) and not isinstance(value, bool)


def _check_leaf(default, value, path):
    if default is None or value is None:
        return
    if isinstance(default, bool):
        if not isinstance(value, bool):
            raise ConfigError(f'{path} must be true or false, got {value!r}')
    elif _is_number(default):
        if not _is_number(value):
            raise ConfigError(f'{path} must be a number, got {value!r}')
        if isinstance(default, int) and not isinstance(value, int):
            raise ConfigError(f'{path} must be an integer, got {value!r}')
    elif isinstance(default, str):
        if not isinstance(value, str):
            raise ConfigError(f'{path} must be a string, got {value!r}')
    elif isinstance(default, list):
        if not isinstance(value, list):
            raise ConfigError(f'{path} must be a list, got {value!r}')


def merge(base, update, schema=None, path=''):
    """Recursively merge ``update`` into a copy of ``base``.

    Keys missing from ``schema`` (default: ``base``) raise a ConfigError
    naming the dotted path.
    """
    schema = base if schema is None else schema
    out = copy.deepcopy(base)
    for key, value in update.items():
        where = f'{path}.{key}' if path else key
        if key not in schema:
            raise ConfigError(f'Unknown configuration key {where}')
        default = schema[key]
        if isinstance(default, dict):
            if not isinstance(value, dict):
                raise ConfigError(f'{where} must be a section (JSON object)')
            out[key] = merge(out[key], value, schema=default, path=where)
        else:
            _check_leaf(default, value, where)
            out[key] = copy.deepcopy(value)
    return out


def validate(config):
    """Check a full configuration against the default schema"""
    return merge(default_config(), config)


def resolve_config_path(path=None):
    """Config path from the argument, else from the environment, else None"""
    if path is None:
        path = os.environ.get(config_env_var)
    if path:
        return os.path.expanduser(path)
    return None


def load_config(path=None, presets=(), overrides=None):
    """Build a run configuration.

    Parameters
    ----------
    path : str or None, optional
        JSON config file. If None, uses the path in the UBDMHALOSCOPE_CONFIG
        environment variable when set.
    presets : iterable of str, optional
        Preset names or paths, merged over the defaults in order.
    overrides : dict or None, optional
        Applied last (e.g. from command-line flags).

    Returns
    -------
    dict
        Complete configuration with every default filled in.
    """
    config = default_config()
    for name in presets or ():
        config = merge(config, load_preset(name), schema=default_config())
        logger.debug('applied preset %s', name)
    path = resolve_config_path(path)
    if path is not None:
        config = merge(config, _strip_comments(_load_json(path)), schema=default_config())
        logger.debug('applied config file %s', path)
    if overrides:
        config = merge(config, overrides, schema=default_config())
    return config


def save_config(config, config_file, overwrite=False):
    """Write a configuration as JSON.

    Parameters
    ----------
    config : dict
    config_file : str
        Destination path; parent directories are created.
    overwrite : bool, optional
        Allow replacing an existing file. By default False.
    """
    config_file = os.path.expanduser(config_file)
    if os.path.exists(config_file) and not overwrite:
        raise ValueError(f'Config file {config_file} already exists; set overwrite=True to replace it')
    dirname = os.path.dirname(config_file)
    if dirname and not os.path.exists(dirname):
        os.makedirs(dirname)
    with open(config_file, 'w') as f:
        json.dump(config, f, indent=2, sort_keys=True)
        f.write('\n')


def get_path(config, dotted):
    node = config
    for part in dotted.split('.'):
        if not isinstance(node, dict) or part not in node:
            raise UsageError(f'Configuration has no parameter {dotted}')
        node = node[part]
    return node


def set_path(config, dotted, value):
    """Return a copy of config with the leaf at ``dotted`` replaced"""
    get_path(config, dotted)
    update = value
    for part in reversed(dotted.split('.')):
        update = {part: update}
    return merge(config, update, schema=default_config())


def is_numeric_leaf(config, dotted):
    """True if the defaults make ``dotted`` a numeric parameter (None defaults
    count when the current value is numeric or unset)"""
    try:
        default = get_path(default_config(), dotted)
    except UsageError:
        return False
    if isinstance(default, dict):
        return False
    if default is None:
        current = get_path(config, dotted)
        return current is None or _is_number(current)
    return _is_number(default)
