"""Exception types raised by the library.

``DataError`` subclasses describe bad inputs (files, images, geometry) and
map to CLI exit code 1; ``ConfigError`` subclasses map to exit code 2.
"""


class CarapaceIdError(Exception):
    """Base class for all library errors."""


class DataError(CarapaceIdError):
    pass


class ConfigError(CarapaceIdError):
    pass


class MissingFileError(DataError, FileNotFoundError):
    pass


class ParseError(DataError):
    def __init__(self, line, reason):
        self.line = line
        self.reason = reason
        super().__init__(f"line {line}: {reason}")


class InvalidRoiError(ParseError):
    def __init__(self, line, reason="ROI width and height must be >= 1"):
        super().__init__(line, reason)


class DecodeError(DataError):
    pass


class RoiOutOfBoundsError(DataError):
    pass


class IncompatibleGeometryError(ConfigError):
    pass


class LengthMismatchError(DataError):
    pass


class PatchOutOfBoundsError(DataError):
    pass


class EmptyGalleryError(DataError):
    pass


class GalleryTooSmallError(DataError):
    pass


class TooFewSamplesError(DataError):
    pass


class UnknownClassError(DataError):
    pass


class EmptyRowError(DataError):
    pass


class UnknownSampleError(DataError):
    pass
