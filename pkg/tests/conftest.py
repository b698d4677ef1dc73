import pytest

from holomimo.geometry import build_array
from holomimo.presets import CARRIER_HZ, SPEED_OF_LIGHT
from holomimo.synthesis import Scenario

LAM = SPEED_OF_LIGHT / CARRIER_HZ


@pytest.fixture
def lam():
    return LAM


@pytest.fixture
def small_scenario():
    """2x2 receive array at lambda/2 over a 1x1 transmit element; isotropic."""
    rx = build_array(LAM / 2, LAM / 2, 2, 2, LAM, "receive")
    tx = build_array(LAM / 2, LAM / 2, 1, 1, LAM, "transmit")
    return Scenario(rx, tx, scenario_id="small")
