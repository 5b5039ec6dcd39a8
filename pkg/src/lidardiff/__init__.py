"""Continuous-time diffusion over LiDAR range/reflectance images."""

from lidardiff.errors import (
    ConfigError,
    DomainError,
    FormatError,
    LidarDiffError,
    OrderingError,
    ShapeError,
    SingularityError,
    TrainingError,
)

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "DomainError",
    "FormatError",
    "LidarDiffError",
    "OrderingError",
    "ShapeError",
    "SingularityError",
    "TrainingError",
]
