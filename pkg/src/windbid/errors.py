"""Exception types shared across the package."""


class WindbidError(Exception):
    """Base class for all windbid errors."""


class AlignmentError(WindbidError):
    """A timestamp or window is not aligned to the declared market resolution."""


class ShapeError(WindbidError):
    """A series has the wrong length for the declared resolution."""


class DataError(WindbidError):
    """Invalid data content: non-finite values, negative volumes, bad enums."""


class DuplicateTimestampError(DataError):
    """The same timestamp appears twice in one input series."""


class ParseError(DataError):
    """A file could not be parsed; the message carries file/line context."""


class DomainError(WindbidError, ValueError):
    """A parameter lies outside its mathematical domain."""
