import json
import numpy as np
import pytest

from ubdmhaloscope.halo import StandardHaloModel, SHMPlusPlus, MomentumDistribution
from ubdmhaloscope.units import FieldQuantizationContext

test_mass_eV = 1e-5


@pytest.fixture(scope='session')
def shm():
    return StandardHaloModel()


@pytest.fixture(scope='session')
def shmpp():
    return SHMPlusPlus()


@pytest.fixture(scope='session')
def shm_momentum(shm):
    return MomentumDistribution(shm, test_mass_eV)


@pytest.fixture
def context():
    return FieldQuantizationContext.from_GeV_per_cm3(0.3)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def write_config(tmp_path):
    """Write a JSON run configuration and return its path"""
    def _write(config, name='run.json'):
        path = tmp_path / name
        path.write_text(json.dumps(config))
        return str(path)
    return _write
