"""Learn the combined effective radiation pattern of a UAV/ground-station link
from flight measurement logs, complete its unobserved angular bins, and use it
to predict received power on new trajectories."""

__version__ = "0.1.0"

from .geometry import Attitude, GeodeticPosition, LinkAngles  # noqa: F401
from .link_budget import LinkBudgetParams, fspl_db  # noqa: F401
from .pattern import PatternGrid  # noqa: F401
