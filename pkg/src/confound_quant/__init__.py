"""Quantify how strongly shared style categories confound per-artist
style imitation.

The package combines three pieces: causal-graph queries that decide which
covariates an evaluation must adjust for, a matching-based bias score over
feature vectors grouped into cohorts, and rank statistics plus a synthetic
data generator for exercising the metric end to end.
"""

__version__ = "0.1.0"

# Bumped whenever the JSON report layout changes shape.
REPORT_VERSION = 1

from .errors import ConfoundQuantError

__all__ = ["ConfoundQuantError", "REPORT_VERSION", "__version__"]
