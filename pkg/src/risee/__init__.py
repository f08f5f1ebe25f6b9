"""Energy-efficiency optimization for RIS-aided massive MIMO downlinks with
zero-forcing precoding, driven by statistical CSI only."""

__version__ = "0.1.0"

from .config import SystemConfig, dbm_to_w, dbw_to_w  # noqa: E402
from .channel import SetupGeometry, sample_setup, sample_realization  # noqa: E402
from .statistics import ChannelStatistics, Solution, compute_statistics, rate_lower_bound, energy_efficiency  # noqa: E402
from .alternating import STRATEGIES, maximize_ee  # noqa: E402

__all__ = [
    "SystemConfig", "dbm_to_w", "dbw_to_w", "SetupGeometry", "sample_setup", "sample_realization",
    "ChannelStatistics", "Solution", "compute_statistics", "rate_lower_bound", "energy_efficiency",
    "STRATEGIES", "maximize_ee",
]
