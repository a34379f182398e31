import json

import numpy as np
import pytest

from conftest import station_config_dict
from skypattern import dataio
from skypattern.errors import (
    EmptyFileError,
    MissingFieldError,
    MissingHeaderError,
    NonMonotoneTimestampsWarning,
    ParseError,
    ValueOutOfRangeError,
)
from skypattern.evaluate import ElevationBinStat, EvalReport

GOOD_ROWS = """timestamp_s,lat_deg,lon_deg,alt_m,yaw_deg,pitch_deg,roll_deg,rsrp_dbm
0.0,35.71,-78.69,130.0,0.0,0.0,0.0,-72.5
0.1,35.7101,-78.69,130.0,0.5,0.1,-0.2,-72.9
0.2,35.7102,-78.69,130.1,0.4,0.0,0.0,-73.4
"""


class TestFlightLog:
    def test_well_formed(self, tmp_path):
        path = tmp_path / "log.csv"
        path.write_text(GOOD_ROWS)
        flight = dataio.read_flight_log(path)
        assert len(flight.samples) == 3
        assert not flight.rejected
        assert flight.samples[0].rsrp_dbm == -72.5
        assert [s.timestamp_s for s in flight.samples] == [0.0, 0.1, 0.2]

    def test_out_of_range_latitude_rejected_with_line(self, tmp_path):
        path = tmp_path / "log.csv"
        path.write_text(GOOD_ROWS + "0.3,95.0,-78.69,130.0,0.0,0.0,0.0,-70.0\n")
        flight = dataio.read_flight_log(path)
        assert len(flight.samples) == 3
        assert flight.rejected == [dataio.RowReject(5, "lat_deg-out-of-range")]

    def test_non_numeric_and_non_finite_rejected(self, tmp_path):
        path = tmp_path / "log.csv"
        path.write_text(GOOD_ROWS + "0.3,x,-78.69,130.0,0,0,0,-70\n0.4,35.7,-78.69,inf,0,0,0,-70\n")
        flight = dataio.read_flight_log(path)
        reasons = [r.reason for r in flight.rejected]
        assert reasons == ["non-numeric-field", "non-finite-field"]

    def test_altitude_offset_metadata(self, tmp_path):
        path = tmp_path / "log.csv"
        path.write_text("# alt_offset_m=10\n" + GOOD_ROWS)
        flight = dataio.read_flight_log(path)
        assert flight.alt_offset_m == 10.0
        assert flight.samples[0].position.alt_m == 140.0

    def test_missing_header(self, tmp_path):
        path = tmp_path / "log.csv"
        path.write_text("a,b,c\n1,2,3\n")
        with pytest.raises(MissingHeaderError):
            dataio.read_flight_log(path)

    def test_empty_file(self, tmp_path):
        path = tmp_path / "log.csv"
        path.write_text("")
        with pytest.raises(EmptyFileError):
            dataio.read_flight_log(path)

    def test_non_monotone_timestamps_warn(self, tmp_path):
        path = tmp_path / "log.csv"
        path.write_text(GOOD_ROWS + "0.05,35.71,-78.69,130.0,0.0,0.0,0.0,-71.0\n")
        with pytest.warns(NonMonotoneTimestampsWarning):
            flight = dataio.read_flight_log(path)
        assert len(flight.samples) == 4  # warning, not fatal

    def test_write_read_round_trip(self, tmp_path):
        path = tmp_path / "log.csv"
        path.write_text(GOOD_ROWS)
        flight = dataio.read_flight_log(path)
        out = tmp_path / "copy.csv"
        dataio.write_flight_log(flight.samples, out)
        again = dataio.read_flight_log(out)
        assert again.samples == flight.samples
        # canonical output round-trips byte for byte
        out2 = tmp_path / "copy2.csv"
        dataio.write_flight_log(again.samples, out2)
        assert out.read_bytes() == out2.read_bytes()


class TestStationConfig:
    def write(self, tmp_path, cfg):
        path = tmp_path / "station.json"
        path.write_text(json.dumps(cfg))
        return path

    def test_minimal_config(self, tmp_path):
        cfg = station_config_dict()
        del cfg["boresight_azimuth_deg"]
        station = dataio.read_station_config(self.write(tmp_path, cfg))
        assert station.anechoic_gs_pattern is None
        assert station.boresight_azimuth_deg == 0.0
        assert station.frequency_hz == 3.32e9

    def test_zero_frequency_out_of_range(self, tmp_path):
        path = self.write(tmp_path, station_config_dict(frequency_hz=0.0))
        with pytest.raises(ValueOutOfRangeError) as err:
            dataio.read_station_config(path)
        assert err.value.name == "frequency_hz"

    def test_dataset2_style_frequency(self, tmp_path):
        path = self.write(tmp_path, station_config_dict(frequency_hz=3.3e9, label="BS"))
        station = dataio.read_station_config(path)
        assert station.frequency_hz == 3.3e9

    def test_missing_field(self, tmp_path):
        cfg = station_config_dict()
        del cfg["tx_power_dbm"]
        with pytest.raises(MissingFieldError) as err:
            dataio.read_station_config(self.write(tmp_path, cfg))
        assert err.value.name == "tx_power_dbm"

    def test_pattern_refs_resolved_relative(self, tmp_path):
        cfg = station_config_dict(anechoic_uav_pattern="patterns/uav.csv",
                                  anechoic_gs_pattern="gs.csv")
        station = dataio.read_station_config(self.write(tmp_path, cfg))
        assert station.anechoic_uav_pattern == str(tmp_path / "patterns" / "uav.csv")
        assert station.anechoic_gs_pattern == str(tmp_path / "gs.csv")

    def test_invalid_json(self, tmp_path):
        path = tmp_path / "station.json"
        path.write_text("{not json")
        with pytest.raises(ParseError):
            dataio.read_station_config(path)


def make_report():
    residuals = [
        dataio.ResidualRecord(0.0, 500.0, 180.0, 30.0, -70.0, -71.5, 1.5, "combined-learned"),
        dataio.ResidualRecord(0.1, 510.0, 181.0, 31.0, -70.5, -70.0, 0.5, "combined-learned"),
    ]
    return EvalReport(
        mae_db=1.0,
        rmse_db=1.118033988749895,
        n_samples=2,
        error_cdf=[(0.5, 0.5), (1.5, 1.0)],
        per_elevation=[
            ElevationBinStat(0.0, 45.0, None, 0.0),
            ElevationBinStat(45.0, 90.0, 1.0, 1.0),
        ],
        residuals=residuals,
    )


class TestResidualsAndReport:
    def test_residuals_round_trip(self, tmp_path):
        report = make_report()
        path = tmp_path / "residuals.csv"
        dataio.write_residuals(report.residuals, path)
        back = dataio.read_residuals(path)
        assert back == report.residuals
        text = path.read_text()
        assert text.splitlines()[0] == dataio.RESIDUAL_HEADER
        assert len(text.splitlines()) == 3  # header + one row per sample

    def test_report_round_trip(self, tmp_path):
        report = make_report()
        path = tmp_path / "report.json"
        dataio.write_report(report, path)
        parsed = json.loads(path.read_text())
        assert set(parsed) == {"mae_db", "rmse_db", "n_samples", "error_cdf", "per_elevation"}
        back = dataio.read_report(path)
        assert back.mae_db == report.mae_db
        assert back.rmse_db == report.rmse_db
        assert back.n_samples == report.n_samples
        assert back.error_cdf == report.error_cdf
        assert back.per_elevation == report.per_elevation

    def test_atomic_write_leaves_no_temp(self, tmp_path):
        dataio.write_text(tmp_path / "x.txt", "hello\n")
        assert [p.name for p in tmp_path.iterdir()] == ["x.txt"]
