import os
import sys

import numpy as np
import pytest

# the package modules import each other as siblings
sys.path.insert(0, os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), 'blind_cs'))


def pytest_configure(config):
    config.addinivalue_line('markers', 'slow: desk-scale end-to-end experiments')


@pytest.fixture
def rng():
    return np.random.default_rng(20240517)
