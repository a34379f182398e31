import json

import numpy as np
import pytest

from skypattern.dataio import GroundStation
from skypattern.geometry import GeodeticPosition

STATION_LAT = 35.7
STATION_LON = -78.7
STATION_ALT = 100.0


@pytest.fixture
def station() -> GroundStation:
    return GroundStation(
        position=GeodeticPosition(STATION_LAT, STATION_LON, STATION_ALT),
        tx_power_dbm=-3.0,
        frequency_hz=3.32e9,
        boresight_azimuth_deg=0.0,
        expected_uav_yaw_deg=0.0,
        label="test-ugv",
    )


def station_config_dict(**overrides) -> dict:
    cfg = {
        "label": "test-ugv",
        "position": {"lat_deg": STATION_LAT, "lon_deg": STATION_LON, "alt_m": STATION_ALT},
        "tx_power_dbm": -3.0,
        "frequency_hz": 3.32e9,
        "boresight_azimuth_deg": 0.0,
        "expected_uav_yaw_deg": 0.0,
    }
    cfg.update(overrides)
    return cfg


@pytest.fixture
def station_config_file(tmp_path):
    path = tmp_path / "station.json"
    path.write_text(json.dumps(station_config_dict()))
    return path


def random_positions(rng: np.random.Generator, n: int, max_range_m: float = 2000.0):
    """Random ENU offsets well away from the station (for angle tests)."""
    east = rng.uniform(-max_range_m, max_range_m, n)
    north = rng.uniform(-max_range_m, max_range_m, n)
    up = rng.uniform(5.0, 500.0, n)
    keep = np.hypot(np.hypot(east, north), up) > 1.0
    return east[keep], north[keep], up[keep]
