import datetime
import hashlib
import json
import logging
import os
import numpy as np
import pandas as pd

from .base import ConfigError

logger = logging.getLogger(__name__)

manifest_filename = 'manifest.json'
csv_float_format = '%.16e'


class NumpyEncoder(json.JSONEncoder):
    def default(self, obj):
        if isinstance(obj, np.ndarray):
            return obj.tolist()
        if isinstance(obj, np.integer):
            return int(obj)
        if isinstance(obj, np.floating):
            return float(obj)
        if isinstance(obj, np.bool_):
            return bool(obj)
        if isinstance(obj, complex):
            return {'re': obj.real, 'im': obj.imag}
        if isinstance(obj, (datetime.datetime, datetime.date)):
            return obj.isoformat()
        return json.JSONEncoder.default(self, obj)


def read_two_column(path):
    """Read a whitespace separated two-column table with '#' comments.

    Returns
    -------
    tuple of np.array
        First and second column as floats.
    """
    path = os.path.expanduser(str(path))
    if not os.path.exists(path):
        raise ConfigError(f'Table file {path} does not exist')
    try:
        df = pd.read_csv(path, sep=r'\s+', comment='#', header=None, dtype=float, float_precision='round_trip')
    except (ValueError, pd.errors.EmptyDataError) as e:
        raise ConfigError(f'Could not parse table {path}: {e}')
    if df.shape[1] != 2:
        raise ConfigError(f'Table {path} must have exactly two columns, found {df.shape[1]}')
    return df[0].to_numpy(), df[1].to_numpy()


def dumps_json(obj):
    return json.dumps(obj, indent=2, sort_keys=True, cls=NumpyEncoder) + '\n'


def write_json(obj, path, manifest=manifest_filename):
    payload = dict(obj)
    if manifest is not None:
        payload['manifest'] = manifest
    with open(path, 'w') as f:
        f.write(dumps_json(payload))
    logger.info('wrote %s', path)
    return path


def write_csv(df, path, manifest=manifest_filename):
    with open(path, 'w', newline='') as f:
        if manifest is not None:
            f.write(f'# manifest: {manifest}\n')
        df.to_csv(f, index=False, float_format=csv_float_format, lineterminator='\n')
    logger.info('wrote %s', path)
    return path


def read_csv(path):
    return pd.read_csv(path, comment='#', float_precision='round_trip')


def file_checksum(path):
    sha = hashlib.sha256()
    with open(path, 'rb') as f:
        for block in iter(lambda: f.read(1 << 16), b''):
            sha.update(block)
    return sha.hexdigest()


# Writers keyed by file extension
output_map = {'.csv': write_csv,
              '.json': write_json}


def write_output(obj, path, manifest=manifest_filename):
    ext = os.path.splitext(path)[1]
    if ext not in output_map:
        raise ValueError(f'No writer for extension {ext}')
    return output_map[ext](obj, path, manifest=manifest)


class RunManifest(object):
    """Record of a CLI run: config echo, version, seed, wall time and output checksums"""

    def __init__(self, config, version, seed, command):
        self.config = config
        self.version = version
        self.seed = seed
        self.command = command
        self.outputs = {}
        self.wall_time_s = None
        self._start = datetime.datetime.now()

    def add_output(self, path, root):
        rel = os.path.relpath(path, root)
        self.outputs[rel] = file_checksum(path)

    def to_dict(self):
        return {'tool_version': self.version,
                'command': self.command,
                'seed': self.seed,
                'started': self._start,
                'wall_time_s': self.wall_time_s,
                'config': self.config,
                'outputs': dict(sorted(self.outputs.items()))}

    def write(self, out_dir):
        self.wall_time_s = (datetime.datetime.now() - self._start).total_seconds()
        path = os.path.join(out_dir, manifest_filename)
        with open(path, 'w') as f:
            f.write(dumps_json(self.to_dict()))
        return path
