"""Higher-order information metrics for discrete multivariate distributions.

O-information, the redundancy-synergy index and their relatives, the
graphical-model projections that explain them, and likelihood-ratio
estimators computed from samples.
"""

from .dist import JointDistribution, SystemShape, load, loads, make_distribution, save
from .metrics import (
    dual_total_correlation,
    interaction_information,
    metric_report,
    mutual_information,
    o_information,
    rsi,
    total_correlation,
)

__all__ = [
    "JointDistribution",
    "SystemShape",
    "dual_total_correlation",
    "interaction_information",
    "load",
    "loads",
    "make_distribution",
    "metric_report",
    "mutual_information",
    "o_information",
    "rsi",
    "save",
    "total_correlation",
]
