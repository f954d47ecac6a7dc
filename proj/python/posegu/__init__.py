"""Kinematic pose generation, propensity weighting and 3D pose estimation."""

from ._core import *  # noqa: F401,F403
from ._core import (
    ConfigError,
    DataError,
    DimensionError,
    Error,
    NumericalError,
    __version__,
)
