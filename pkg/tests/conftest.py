import os
import sys

import pytest

sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..', 'src'))

from pii_detection.extractor import build_default_recognizers
from harness.scenario import bundled_scenarios
from session.risk import RiskConfig

@pytest.fixture(scope="session")
def recognizers():
    return build_default_recognizers()

@pytest.fixture(scope="session")
def scenarios():
    return {spec.id: spec for spec in bundled_scenarios()}

@pytest.fixture
def risk_config():
    return RiskConfig(alpha=0.3, tau=2.0)
