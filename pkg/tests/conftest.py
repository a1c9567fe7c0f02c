import sys

import pytest

from crsnomalab.analysis.channel_model import CombinerKind, SystemConfig
from crsnomalab.core.config import LabConfiguration


@pytest.fixture(autouse=True)
def fresh_configuration(monkeypatch):
    # confumo parses sys.argv when the singleton is built; keep pytest's own flags out of it
    monkeypatch.setattr(sys, 'argv', ['crs-noma-lab'])
    LabConfiguration.reset_instance()
    yield LabConfiguration.get_instance().update(workers=1)
    LabConfiguration.reset_instance()


@pytest.fixture
def rayleigh_config():
    """Single-antenna Rayleigh system with the default link strengths and a2 = 0.1."""
    return SystemConfig.uniform(m=1, n=1, combiner=CombinerKind.SC, a2=0.1)


@pytest.fixture
def two_by_two_sc():
    return SystemConfig.uniform(m=2, n=2, combiner=CombinerKind.SC, a2=0.1)
