import sys
from pathlib import Path

import pytest

# Add the repository root so `app` imports resolve when pytest runs from anywhere
sys.path.insert(0, str(Path(__file__).parent.parent))

from app.arithmetic.curve import make_instance
from app.arithmetic.field import BinaryFieldCtx


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False, help="run tests marked slow")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture(scope="session")
def field8():
    return BinaryFieldCtx.default(8)


@pytest.fixture(scope="session")
def instance8():
    return make_instance(8, "one", seed=1)


@pytest.fixture(scope="session")
def curve5():
    return make_instance(5, "one", seed=0).curve
