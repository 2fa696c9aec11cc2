"""Exception types shared across the package."""


class RGreedyError(Exception):
    """Base class for all package errors."""


class ConfigurationError(RGreedyError):
    """Invalid parameters, dimensions, or experiment configuration."""


class DegenerateSeriesError(RGreedyError):
    """A time series has zero variance and cannot be normalized."""


class DegenerateOutputError(RGreedyError):
    """A readout trace has zero variance (e.g. produced by an empty mask)."""


class FitFailureError(RGreedyError):
    """A curve fit did not converge; the message carries diagnostics."""


class CsvFormatError(RGreedyError):
    """A CSV input is malformed; the message names the offending line."""
