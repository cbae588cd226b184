"""Exceptions for the geodesic census."""

from __future__ import annotations


class GeodesicCensusError(Exception):
    """Base exception for geodesic census errors."""


class PrecisionExhausted(GeodesicCensusError):
    """Exception when the tracked error bound cannot decide a comparison."""


class NotHyperbolic(GeodesicCensusError):
    """Exception when a matrix has |trace| <= 2."""


class ValidationFailed(GeodesicCensusError):
    """Exception when a representation fails its load-time checks."""


class CensusError(GeodesicCensusError):
    """Base exception for census errors."""


class FormatError(CensusError):
    """Exception for unreadable or mismatched census files."""


class IncompatibleCensus(CensusError):
    """Exception when censuses of different representations are merged."""


class EmptyCensus(CensusError):
    """Exception when an operation needs at least one class."""


class CensusBuildError(CensusError):
    """Exception when a census build or one of its shards fails."""


class InsufficientData(GeodesicCensusError):
    """Exception when too few classes fall in an estimation window."""


class DomainError(GeodesicCensusError):
    """Exception for arguments outside a formula's domain."""


class ConfigError(GeodesicCensusError):
    """Exception for invalid configuration or representation files."""


class QueryError(GeodesicCensusError):
    """Exception for malformed counting queries."""
