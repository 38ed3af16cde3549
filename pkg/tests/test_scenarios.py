import pytest

from . import scenarios


@pytest.mark.parametrize("path", scenarios.scenario_paths())
def test_scenario(path):
    """Output of each scenario's commands matches its expected.txt"""
    scenario = scenarios.Scenario(path)
    assert scenario.replay() == scenario.expected()
