import math

import numpy as np
import pytest

from skypattern.errors import IncompleteGridError, NonPositiveInputError
from skypattern.geometry import LinkAngles
from skypattern.link_budget import (
    SPEED_OF_LIGHT,
    BaselinePredictor,
    CombinedPredictor,
    GainSource,
    LinkBudgetParams,
    fspl_db,
    predict_baseline,
    predict_combined,
)
from skypattern.pattern import PatternGrid


def angles_at(phi_u, theta_u, d3d=1000.0):
    phi_g = (phi_u - 180.0) % 360.0
    return LinkAngles(phi_g, theta_u, phi_u, theta_u, d3d)


class TestFspl:
    def test_unit_product_is_zero_db(self):
        d = SPEED_OF_LIGHT / (4.0 * math.pi)
        assert abs(fspl_db(d, 1.0)) < 1e-9

    def test_reference_value(self):
        assert abs(fspl_db(1000.0, 3.32e9) - 102.870) < 1e-3

    def test_distance_doubling(self):
        expected = 20.0 * math.log10(2.0)
        for f in (1e6, 3.32e9, 28e9):
            for d in (1.0, 137.0, 25000.0):
                assert abs(fspl_db(2 * d, f) - fspl_db(d, f) - expected) < 1e-9

    def test_monotone_in_distance_and_frequency(self):
        rng = np.random.default_rng(2)
        for _ in range(200):
            d = rng.uniform(1.0, 1e5)
            f = rng.uniform(1e6, 1e11)
            assert fspl_db(d * 1.001, f) > fspl_db(d, f)
            assert fspl_db(d, f * 1.001) > fspl_db(d, f)

    def test_nonpositive_inputs(self):
        with pytest.raises(NonPositiveInputError):
            fspl_db(0.0, 1e9)
        with pytest.raises(NonPositiveInputError):
            fspl_db(-5.0, 1e9)
        with pytest.raises(NonPositiveInputError):
            fspl_db(100.0, 0.0)


class TestPredictors:
    def setup_method(self):
        self.params = LinkBudgetParams(0.0, 3.32e9)
        self.zero = PatternGrid.from_gains(5.0, 2.0, np.zeros((72, 90)))

    def test_isotropic_baseline_is_pure_fspl(self):
        a = angles_at(210.0, 25.0)
        pred = predict_baseline(a, self.params, self.zero, self.zero)
        assert pred.rsrp_dbm == 0.0 - pred.fspl_db
        assert pred.gain_applied_db == 0.0
        assert pred.gain_source is GainSource.ANECHOIC_PAIR

    def test_constant_gain_arithmetic(self):
        g3 = PatternGrid.from_gains(5.0, 2.0, np.full((72, 90), 3.0))
        g2 = PatternGrid.from_gains(5.0, 2.0, np.full((72, 90), 2.0))
        pred = predict_baseline(angles_at(90.0, 40.0, 1000.0), self.params, g3, g2)
        assert abs(pred.rsrp_dbm - (-97.870)) < 1e-3
        assert pred.gain_applied_db == 5.0

    def test_same_antenna_swap_invariance(self):
        rng = np.random.default_rng(4)
        g = PatternGrid.from_gains(5.0, 2.0, rng.normal(0.0, 3.0, (72, 90)))
        a = angles_at(123.0, 37.5, 800.0)
        p1 = predict_baseline(a, self.params, g, g)
        p2 = predict_baseline(a, self.params, g, g)  # swapped arguments are the same grid
        assert p1.rsrp_dbm == p2.rsrp_dbm

    def test_identity_holds_bit_for_bit(self):
        rng = np.random.default_rng(12)
        g = PatternGrid.from_gains(5.0, 2.0, rng.normal(0.0, 5.0, (72, 90)))
        for _ in range(100):
            a = angles_at(rng.uniform(0, 360), rng.uniform(-90, 90), rng.uniform(1, 5000))
            pred = predict_combined(a, self.params, g)
            assert pred.rsrp_dbm - (self.params.tx_power_dbm - pred.fspl_db + pred.gain_applied_db) == 0.0

    def test_combined_requires_complete_grid(self):
        g = PatternGrid.empty(5.0, 2.0)
        with pytest.raises(IncompleteGridError):
            predict_combined(angles_at(10.0, 10.0), self.params, g)
        with pytest.raises(IncompleteGridError):
            CombinedPredictor(g)

    def test_combined_interpolates_node_value(self):
        rng = np.random.default_rng(9)
        gains = rng.normal(0.0, 4.0, (72, 90))
        g = PatternGrid.from_gains(5.0, 2.0, gains)
        # bin centers: az (i + 0.5) * 5, el -90 + (j + 0.5) * 2
        a = angles_at((10 + 0.5) * 5.0, -90.0 + (60 + 0.5) * 2.0)
        pred = predict_combined(a, self.params, g)
        assert abs(pred.gain_applied_db - gains[10, 60]) < 1e-12

    def test_two_pattern_reduction_to_combined(self):
        # With yaw 0 the two-antenna model collapses onto a single combined
        # grid built as G_uav(az, el) + G_gs((az + 180 - boresight) % 360, el).
        rng = np.random.default_rng(31)
        boresight = 30.0
        g_uav = PatternGrid.from_gains(5.0, 2.0, rng.normal(0.0, 3.0, (72, 90)))
        g_gs = PatternGrid.from_gains(5.0, 2.0, rng.normal(0.0, 3.0, (72, 90)))
        com = np.empty((72, 90))
        az = g_uav.az_centers()
        el = g_uav.el_centers()
        for i in range(72):
            for j in range(90):
                com[i, j] = g_uav.gains[i, j] + g_gs.gain_at((az[i] + 180.0 - boresight) % 360.0, el[j])
        g_com = PatternGrid.from_gains(5.0, 2.0, com)
        for i in range(0, 72, 7):
            for j in range(0, 90, 11):
                a = angles_at(az[i], el[j], 750.0)
                p_base = predict_baseline(a, self.params, g_uav, g_gs, gs_boresight_deg=boresight)
                p_com = predict_combined(a, self.params, g_com)
                assert abs(p_base.rsrp_dbm - p_com.rsrp_dbm) < 1e-9

    def test_predictor_objects_match_functions(self):
        a = angles_at(42.5, 17.0, 640.0)
        assert (
            CombinedPredictor(self.zero).predict(a, self.params).rsrp_dbm
            == predict_combined(a, self.params, self.zero).rsrp_dbm
        )
        assert (
            BaselinePredictor(self.zero, self.zero).predict(a, self.params).rsrp_dbm
            == predict_baseline(a, self.params, self.zero, self.zero).rsrp_dbm
        )

    def test_params_validation(self):
        with pytest.raises(NonPositiveInputError):
            LinkBudgetParams(0.0, 0.0)
        with pytest.raises(NonPositiveInputError):
            LinkBudgetParams(math.nan, 1e9)
