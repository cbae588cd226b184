"""Census of prime closed geodesics on compact hyperbolic surfaces."""

from __future__ import annotations

from .census import Census, GeodesicClass, completeness_length, enumerate_census, load, merge, save
from .const import TOOL_VERSION
from .exceptions import GeodesicCensusError
from .hyperbolic_geometry import Representation, load_preset

__version__ = TOOL_VERSION

__all__ = [
    "Census",
    "GeodesicCensusError",
    "GeodesicClass",
    "Representation",
    "completeness_length",
    "enumerate_census",
    "load",
    "load_preset",
    "merge",
    "save",
]
