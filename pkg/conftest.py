# conftest.py
"""pytest options: acceptance-scale experiments are marked `slow` and need --runslow."""

import pytest

# Reference material, not part of this package.
collect_ignore = ["examples"]


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False,
                     help="run desk-scale acceptance experiments")


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: desk-scale Monte Carlo experiment (minutes)")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)
