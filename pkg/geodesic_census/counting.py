"""Counting functions over a census, including homology pair counts."""

from __future__ import annotations

import logging
import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass
from enum import StrEnum

import numpy as np

from .census import Census
from .const import DEFAULT_PAIR_K, NORM_MAX, NORM_SUM
from .exceptions import DomainError, QueryError
from .surface_group import HomologyVector, homology_norm

_LOGGER = logging.getLogger(__name__)


class WeightKind(StrEnum):
    """Per-geodesic weight of a histogram."""

    UNIT = "unit"
    R_WEIGHT = "R_weight"
    P_WEIGHT = "P_weight"


@dataclass(frozen=True)
class HomologyHistogram:
    """Sparse map from homology vector to count or weighted sum."""

    bins: dict[HomologyVector, float]
    cutoff_x: float
    weight_kind: WeightKind

    def __getitem__(self, beta: HomologyVector) -> float:
        return self.bins.get(tuple(beta), 0)

    def __len__(self) -> int:
        return len(self.bins)

    def total(self) -> float:
        """Sum over all bins."""
        if self.weight_kind is WeightKind.UNIT:
            return sum(self.bins.values())
        return float(np.sum(np.array([self.bins[key] for key in sorted(self.bins)])))


@dataclass(frozen=True)
class PairQuery:
    """A homology difference beta with the two norm cutoffs."""

    beta: HomologyVector
    x1: float
    x2: float
    k: float = DEFAULT_PAIR_K

    def __post_init__(self) -> None:
        if not 0 < self.k < 1:
            raise QueryError(f"Size exponent k must lie in (0, 1), got {self.k}")
        if self.x1 <= 1 or self.x2 <= 1:
            raise QueryError(f"Cutoffs must exceed 1, got x1={self.x1}, x2={self.x2}")
        log_x = max(math.log(self.x1), math.log(self.x2))
        if min(math.log(self.x1), math.log(self.x2)) < self.k * log_x:
            raise QueryError(
                f"Cutoffs {self.x1} and {self.x2} violate x^k <= x_i <= x with k={self.k}"
            )

    @property
    def x(self) -> float:
        """The larger cutoff."""
        return max(self.x1, self.x2)


def _log_cutoff(x: float) -> float:
    if x <= 0:
        raise QueryError(f"Norm cutoff must be positive, got {x}")
    return math.log(x)


def _check_beta(census: Census, beta: Sequence[int]) -> HomologyVector:
    if len(beta) != 2 * census.genus:
        raise QueryError(f"Homology vector {tuple(beta)} must have {2 * census.genus} coordinates")
    return tuple(int(b) for b in beta)


def is_complete(census: Census, x: float) -> bool:
    """Return whether the census holds every primitive class of norm at most x."""
    if census.completeness is None:
        return False
    return _log_cutoff(x) <= float(census.completeness)


def _selection(census: Census, x: float) -> np.ndarray:
    """Mask of primitive classes with N <= x, boundary classes included."""
    log_x = _log_cutoff(x)
    if not is_complete(census, x):
        _LOGGER.warning(
            "Cutoff log x = %.6f is beyond the completeness length %s; counts may be incomplete",
            log_x,
            "unknown" if census.completeness is None else f"{float(census.completeness):.6f}",
        )
    lengths = census.lengths
    errors = census.length_errors
    boundary = np.abs(lengths - log_x) <= errors
    if np.any(boundary & census.primitive):
        _LOGGER.warning(
            "%d classes have norm within their error bound of x = %s; they are included",
            int(np.count_nonzero(boundary & census.primitive)),
            x,
        )
    return census.primitive & (lengths - errors <= log_x)


def _weights(lengths: np.ndarray, kind: WeightKind) -> np.ndarray:
    """Per-geodesic weights: 1, l/sinh(l/2) or 2 log N / sqrt(N)."""
    if kind is WeightKind.UNIT:
        return np.ones_like(lengths)
    if kind is WeightKind.R_WEIGHT:
        return lengths / np.sinh(lengths / 2)
    return 2 * lengths * np.exp(-lengths / 2)


def pi(census: Census, x: float) -> int:
    """Number of prime geodesics with norm at most x."""
    return int(np.count_nonzero(_selection(census, x)))


def pi_beta(census: Census, beta: Sequence[int], x: float) -> int:
    """Number of prime geodesics with norm at most x and homology beta."""
    beta = _check_beta(census, beta)
    match = np.all(census.homology == np.array(beta, dtype=np.int64), axis=1)
    return int(np.count_nonzero(_selection(census, x) & match))


def pi_B(census: Census, predicate: Callable[[HomologyVector], bool], x: float) -> int:
    """Number of prime geodesics with norm at most x and homology satisfying ``predicate``."""
    counts = histogram(census, x, WeightKind.UNIT)
    return sum(int(count) for beta, count in counts.bins.items() if predicate(beta))


def R_beta(census: Census, beta: Sequence[int], x: float) -> float:
    """Sum of l/sinh(l/2) over prime geodesics with norm at most x and homology beta."""
    beta = _check_beta(census, beta)
    match = np.all(census.homology == np.array(beta, dtype=np.int64), axis=1)
    lengths = census.lengths[_selection(census, x) & match]
    return float(np.sum(_weights(lengths, WeightKind.R_WEIGHT)))


def histogram(census: Census, x: float, kind: WeightKind = WeightKind.UNIT) -> HomologyHistogram:
    """Bin the prime geodesics with norm at most x by homology with the chosen weight."""
    kind = WeightKind(kind)
    mask = _selection(census, x)
    rows = census.homology[mask]
    if not len(rows):
        return HomologyHistogram({}, x, kind)

    keys, inverse = np.unique(rows, axis=0, return_inverse=True)
    inverse = inverse.reshape(-1)
    if kind is WeightKind.UNIT:
        values = np.bincount(inverse, minlength=len(keys)).tolist()
    else:
        weights = _weights(census.lengths[mask], kind)
        values = np.bincount(inverse, weights=weights, minlength=len(keys)).tolist()
    bins = {tuple(int(h) for h in key): value for key, value in zip(keys, values, strict=True)}
    return HomologyHistogram(bins, x, kind)


def _convolve(
    first: HomologyHistogram,
    second: HomologyHistogram,
    beta: HomologyVector,
    window: float | None = None,
    norm_kind: str = NORM_SUM,
) -> float:
    """Sum of first[alpha] * second[alpha + beta], optionally over ||alpha|| <= window.

    Iterates over the smaller support and sums in sorted alpha order.
    """
    terms: list[tuple[HomologyVector, float]] = []
    if len(first) <= len(second):
        for alpha, value in first.bins.items():
            shifted = tuple(a + b for a, b in zip(alpha, beta, strict=True))
            other = second.bins.get(shifted)
            if other is not None:
                terms.append((alpha, value * other))
    else:
        for gamma, other in second.bins.items():
            alpha = tuple(g - b for g, b in zip(gamma, beta, strict=True))
            value = first.bins.get(alpha)
            if value is not None:
                terms.append((alpha, value * other))

    if window is not None:
        terms = [(alpha, term) for alpha, term in terms if homology_norm(alpha, norm_kind) <= window]
    terms.sort()
    if first.weight_kind is WeightKind.UNIT:
        return sum(int(term) for _, term in terms)
    return float(np.sum(np.array([term for _, term in terms], dtype=np.float64)))


def _diagonal(
    census: Census,
    query: PairQuery,
    kind: WeightKind,
    window: float | None = None,
    norm_kind: str = NORM_SUM,
) -> float:
    """Contribution of the pairs (gamma, gamma), which only occur for beta = 0.

    Such a pair has alpha = Phi(gamma), so a window keeps it when ||Phi(gamma)|| <= window.
    """
    if any(query.beta):
        return 0
    mask = _selection(census, min(query.x1, query.x2))
    if window is not None:
        mask = mask & (_norms(census.homology, norm_kind) <= window)
    if kind is WeightKind.UNIT:
        return int(np.count_nonzero(mask))
    weights = _weights(census.lengths[mask], kind)
    return float(np.sum(weights * weights))


def _pair_sum(
    census: Census,
    query: PairQuery,
    kind: WeightKind,
    include_diagonal: bool,
    window: float | None = None,
    norm_kind: str = NORM_SUM,
) -> float:
    beta = _check_beta(census, query.beta)
    value = _convolve(
        histogram(census, query.x1, kind),
        histogram(census, query.x2, kind),
        beta,
        window,
        norm_kind,
    )
    if not include_diagonal:
        value -= _diagonal(census, query, kind, window, norm_kind)
    return value


def pair_count(census: Census, query: PairQuery, include_diagonal: bool = True) -> int:
    """Number of ordered pairs with N(g1) <= x1, N(g2) <= x2 and Phi(g2) - Phi(g1) = beta."""
    return int(_pair_sum(census, query, WeightKind.UNIT, include_diagonal))


def R2_beta(census: Census, query: PairQuery, include_diagonal: bool = True) -> float:
    """Pair sum of the l/sinh(l/2) weights."""
    return float(_pair_sum(census, query, WeightKind.R_WEIGHT, include_diagonal))


def P2_beta(census: Census, query: PairQuery, include_diagonal: bool = True) -> float:
    """Pair sum of the 4 log N1 log N2 / sqrt(N1 N2) weights."""
    return float(_pair_sum(census, query, WeightKind.P_WEIGHT, include_diagonal))


def truncated_R2(
    census: Census,
    query: PairQuery,
    window_u: float,
    include_diagonal: bool = True,
    norm_kind: str = NORM_SUM,
) -> tuple[float, float]:
    """R2 restricted to ||alpha|| <= window_u.

    Returns:
        (truncated value, full R2 minus truncated value)
    """
    if window_u < 0:
        raise QueryError(f"Truncation window must be non-negative, got {window_u}")
    full = R2_beta(census, query, include_diagonal)
    window = None if math.isinf(window_u) else window_u
    truncated = float(
        _pair_sum(census, query, WeightKind.R_WEIGHT, include_diagonal, window, norm_kind)
    )
    return truncated, full - truncated


def truncation_window(x: float) -> float:
    """u(x) = sqrt(log x) log log x.

    Raises:
        DomainError: If x <= e, where the window is not positive
    """
    if x <= math.e:
        raise DomainError(f"Truncation window needs x > e, got {x}")
    log_x = math.log(x)
    return math.sqrt(log_x) * math.log(log_x)


def support_constant(census: Census, norm_kind: str = NORM_SUM) -> float:
    """Largest ||homology|| / length over the primitive classes.

    Raises:
        DomainError: If the census has no primitive class
    """
    mask = census.primitive
    if not np.any(mask):
        raise DomainError("Census has no primitive classes")
    norms = _norms(census.homology[mask], norm_kind)
    return float(np.max(norms / census.lengths[mask]))


def support_profile(census: Census, norm_kind: str = NORM_SUM) -> list[dict[str, float]]:
    """Per dyadic length window, the window's ||homology|| / length maximum and the running maximum."""
    mask = census.primitive
    if not np.any(mask):
        return []
    lengths = census.lengths[mask]
    ratios = _norms(census.homology[mask], norm_kind) / lengths
    windows = np.floor(np.log2(lengths)).astype(np.int64)

    profile = []
    running = 0.0
    for exponent in np.unique(windows):
        window_max = float(np.max(ratios[windows == exponent]))
        running = max(running, window_max)
        profile.append(
            {
                "length_from": float(2.0**exponent),
                "length_to": float(2.0 ** (exponent + 1)),
                "window_max": window_max,
                "running_max": running,
            }
        )
    return profile


def _norms(rows: np.ndarray, norm_kind: str) -> np.ndarray:
    if norm_kind == NORM_SUM:
        return np.abs(rows).sum(axis=1).astype(np.float64)
    if norm_kind == NORM_MAX:
        return np.abs(rows).max(axis=1, initial=0).astype(np.float64)
    raise ValueError(f"Unknown norm kind: {norm_kind}")
