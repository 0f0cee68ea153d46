"""Exception types raised by the simulator."""


class CellfreeError(Exception):
    """Base class for all simulator errors."""


class ConfigError(CellfreeError):
    """A configuration value violates its invariants."""


class EstimationError(CellfreeError):
    """Channel estimation failed (ill-conditioned pilot covariance)."""


class CombinerError(CellfreeError):
    """Local combiner computation failed (singular system)."""


class DegenerateStatisticsError(CellfreeError):
    """LSFD statistics produced a non-positive-definite system for a UE."""

    def __init__(self, ue, message=""):
        self.ue = ue
        super().__init__(message or f"degenerate statistics for UE {ue}")


class InvalidWeightsError(CellfreeError):
    """An LSFD weight vector is unusable (zero or wrong dimension)."""


class CampaignError(CellfreeError):
    """Too many per-setup failures in a Monte-Carlo campaign."""
