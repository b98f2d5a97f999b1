"""Exception hierarchy shared across the pipeline."""


class XwalkError(Exception):
    """Base class for all pipeline errors."""


class DegenerateBearing(XwalkError):
    """Bearing requested between two identical points."""


class InvalidRegion(XwalkError):
    """Region is degenerate or otherwise unusable."""


class RegionTooLarge(XwalkError):
    """Region exceeds the provider's bounding-box size cap."""


class ProviderError(XwalkError):
    """A provider call failed (transport, parse, or upstream error).

    ``retryable`` indicates whether re-issuing the request may succeed.
    """

    def __init__(self, message, retryable=False):
        super().__init__(message)
        self.retryable = retryable


class QuotaExhausted(ProviderError):
    """The daily request cap for a service has been reached."""

    def __init__(self, message):
        super().__init__(message, retryable=False)


class TooManyWaypoints(XwalkError):
    """A routing request carried more than the allowed waypoints."""


class NotEnoughSites(XwalkError):
    """Waypoint batching needs at least two sites."""


class NotEnoughPoints(XwalkError):
    """Path augmentation needs at least two points."""


class MalformedPolyline(XwalkError):
    """Encoded polyline text is truncated or decodes out of range."""


class NoHeadingsDerivable(XwalkError):
    """All locations coincide; no heading can be computed."""


class UnknownSample(XwalkError):
    """An override references a sample id not present in the manifest."""


class UnsupportedVersion(XwalkError):
    """Manifest file with an unknown format version."""


class CorruptManifest(XwalkError):
    """Manifest file violates its invariants."""


class CannotSplit(XwalkError):
    """Region-wise split impossible (fewer than two regions)."""


class InsufficientNegatives(XwalkError):
    """Not enough negative samples to honor the negative ratio."""

    def __init__(self, message, shortfall=0):
        super().__init__(message)
        self.shortfall = shortfall


class MismatchedPredictions(XwalkError):
    """Prediction and truth id sets differ."""


class EmptyEvaluation(XwalkError):
    """Metric requested over zero evaluated items."""


class IncompleteSequence(XwalkError):
    """An instance span references frames missing from the predictions."""


class BadImage(XwalkError):
    """Image bytes could not be decoded."""


class DegenerateTrainingSet(XwalkError):
    """Training split contains a single class."""


class ConfigError(XwalkError):
    """Harvest configuration failed validation."""
