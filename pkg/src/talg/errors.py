"""Exception types shared across the package."""


class TalgError(Exception):
    """Base class for all errors raised by talg."""


class ConfigError(TalgError, ValueError):
    """Invalid configuration: bad shapes, ranks, transforms or CLI options."""


class DataError(TalgError):
    """A data file could not be parsed.

    ``offset`` is the byte offset at which parsing failed, when known.
    """

    def __init__(self, message, offset=None):
        if offset is not None:
            message = f"{message} (at byte offset {offset})"
        super().__init__(message)
        self.offset = offset


class DegenerateSpectrum(TalgError):
    """Block-matrix SVD vectors could not be assigned to single spectral slices."""
