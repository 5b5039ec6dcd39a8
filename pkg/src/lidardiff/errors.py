class LidarDiffError(Exception):
    pass


class ConfigError(LidarDiffError, ValueError):
    pass


class DomainError(LidarDiffError, ValueError):
    pass


class ShapeError(LidarDiffError, ValueError):
    pass


class OrderingError(LidarDiffError, ValueError):
    pass


class SingularityError(LidarDiffError, ZeroDivisionError):
    pass


class FormatError(LidarDiffError):
    """A file on disk does not match the expected container layout."""


class TrainingError(LidarDiffError, RuntimeError):
    pass
