"""Exception hierarchy shared by the library and the CLI."""


class StemNoiseError(Exception):
    """Base class for all errors raised by :mod:`stemnoise`."""


class DecodeError(StemNoiseError, OSError):
    """An image file could not be read or decoded."""


class DimensionError(StemNoiseError, ValueError):
    """An image or map is too small (or empty) for the requested operation."""


class DegenerateInputError(StemNoiseError, ValueError):
    """The input carries too little variation, e.g. fewer distinct values than classes."""


class ManifestFormatError(StemNoiseError, ValueError):
    """A dataset manifest is malformed."""


class UndefinedCorrelationError(StemNoiseError, ValueError):
    """A rank correlation is undefined (length mismatch, too short, or constant input)."""
