"""Exception types shared across the package."""


class WxIndexError(Exception):
    """Base class for all package-specific errors."""


class EmptySample(WxIndexError):
    """An operation received an empty sample."""


class NonFinite(WxIndexError):
    """A value that must be finite was NaN or infinite."""


class LevelOutOfRange(WxIndexError):
    """A probability level fell outside its admissible range."""


class TooFewSamples(WxIndexError):
    """More sample values are required for this operation."""


class InsufficientClimate(WxIndexError):
    """Too few archive values fall inside the climatology window."""


class UnknownLocation(WxIndexError):
    """The requested location is not present in the archive."""


class LocationMismatch(WxIndexError):
    """Forecast and climate maps do not cover the same locations."""


class ZeroScale(WxIndexError):
    """Standardisation scale is zero; the anomaly index is undefined."""


class MissingClimate(WxIndexError):
    """No climate distribution is available for a location/day."""


class DegenerateSample(WxIndexError):
    """A verification sample has no events or no non-events."""


class ReferencePerfect(WxIndexError):
    """Skill score undefined: the reference AUC equals 1."""


class QuantileOrder(WxIndexError):
    """Conditioning quantile must lie below the event quantile."""


class TooFewPoints(WxIndexError):
    """Not enough paired points to compute a statistic."""


class TooFewBlocks(WxIndexError):
    """The date range yields fewer than two bootstrap blocks."""


class BadBins(WxIndexError):
    """Histogram bin edges are not strictly increasing."""


class BadConfig(WxIndexError):
    """A scenario configuration value is invalid."""


class NoQualifyingCrossing(WxIndexError):
    """Analytic CDF pair has no crossing in the qualifying direction."""


class ParseError(WxIndexError):
    """A dataset file could not be parsed.

    Carries the 1-based line number of the offending row.
    """

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ManifestMismatch(WxIndexError):
    """A manifest references missing files or inconsistent row counts."""
