"""Free-space path loss and the two received-power models.

The baseline model adds the two anechoic-chamber gains (one per antenna) to
the link budget; the learned model replaces the pair with a single combined
effective pattern indexed by the UAV-frame angles. All power and gain
arithmetic stays in the dB domain.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import TYPE_CHECKING

from .errors import IncompleteGridError, NonPositiveInputError

if TYPE_CHECKING:
    from .geometry import LinkAngles
    from .pattern import PatternGrid

SPEED_OF_LIGHT = 299792458.0  # exact SI value


class GainSource(str, enum.Enum):
    COMBINED_LEARNED = "combined-learned"
    ANECHOIC_PAIR = "anechoic-pair"


@dataclass(frozen=True)
class LinkBudgetParams:
    tx_power_dbm: float
    frequency_hz: float
    speed_of_light: float = SPEED_OF_LIGHT

    def __post_init__(self):
        if not self.frequency_hz > 0:
            raise NonPositiveInputError(f"frequency_hz must be > 0, got {self.frequency_hz}")
        if not math.isfinite(self.tx_power_dbm):
            raise NonPositiveInputError("tx_power_dbm must be finite")


@dataclass(frozen=True)
class PowerPrediction:
    """One predicted received power, with its dB decomposition.

    Invariant: rsrp_dbm == tx_power - fspl_db + gain_applied_db, bit for bit,
    because that is literally how it is computed.
    """

    rsrp_dbm: float
    fspl_db: float
    gain_applied_db: float
    gain_source: GainSource


def fspl_db(d3d_m: float, frequency_hz: float) -> float:
    """Free-space path loss in dB: 20log10(d) + 20log10(f) + 20log10(4*pi/c)."""
    if not d3d_m > 0:
        raise NonPositiveInputError(f"d3d_m must be > 0, got {d3d_m}")
    if not frequency_hz > 0:
        raise NonPositiveInputError(f"frequency_hz must be > 0, got {frequency_hz}")
    return (
        20.0 * math.log10(d3d_m)
        + 20.0 * math.log10(frequency_hz)
        + 20.0 * math.log10(4.0 * math.pi / SPEED_OF_LIGHT)
    )


def predict_baseline(
    angles: "LinkAngles",
    params: LinkBudgetParams,
    g_uav: "PatternGrid",
    g_gs: "PatternGrid",
    gs_boresight_deg: float = 0.0,
) -> PowerPrediction:
    """Received power from the two anechoic patterns.

    The ground-station pattern is evaluated in its own frame: azimuth relative
    to the configured boresight bearing.
    """
    loss = fspl_db(angles.d3d_m, params.frequency_hz)
    gain_uav = g_uav.gain_at(angles.phi_u_deg, angles.theta_u_deg)
    gain_gs = g_gs.gain_at((angles.phi_g_deg - gs_boresight_deg) % 360.0, angles.theta_g_deg)
    gain = gain_uav + gain_gs
    rsrp = params.tx_power_dbm - loss + gain
    return PowerPrediction(rsrp, loss, gain, GainSource.ANECHOIC_PAIR)


def predict_combined(
    angles: "LinkAngles",
    params: LinkBudgetParams,
    g_com: "PatternGrid",
) -> PowerPrediction:
    """Received power from the learned combined pattern (must be completed)."""
    if not g_com.is_complete():
        raise IncompleteGridError(
            f"combined pattern has {g_com.n_missing()} missing cells; run complete_grid first"
        )
    loss = fspl_db(angles.d3d_m, params.frequency_hz)
    gain = g_com.gain_at(angles.phi_u_deg, angles.theta_u_deg)
    rsrp = params.tx_power_dbm - loss + gain
    return PowerPrediction(rsrp, loss, gain, GainSource.COMBINED_LEARNED)


class CombinedPredictor:
    """Learned-pattern predictor; wraps :func:`predict_combined`."""

    gain_source = GainSource.COMBINED_LEARNED

    def __init__(self, g_com: "PatternGrid"):
        if not g_com.is_complete():
            raise IncompleteGridError(
                f"combined pattern has {g_com.n_missing()} missing cells; run complete_grid first"
            )
        self.g_com = g_com

    def predict(self, angles: "LinkAngles", params: LinkBudgetParams) -> PowerPrediction:
        return predict_combined(angles, params, self.g_com)


class BaselinePredictor:
    """Anechoic two-pattern predictor; wraps :func:`predict_baseline`."""

    gain_source = GainSource.ANECHOIC_PAIR

    def __init__(self, g_uav: "PatternGrid", g_gs: "PatternGrid", gs_boresight_deg: float = 0.0):
        self.g_uav = g_uav
        self.g_gs = g_gs
        self.gs_boresight_deg = gs_boresight_deg

    def predict(self, angles: "LinkAngles", params: LinkBudgetParams) -> PowerPrediction:
        return predict_baseline(angles, params, self.g_uav, self.g_gs, self.gs_boresight_deg)
