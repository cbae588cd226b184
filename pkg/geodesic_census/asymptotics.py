"""Asymptotic predictors for the counting functions.

All predictors are evaluated with mpmath so that cutoffs far beyond the
range of float64 powers (x^2 for pair counts) stay finite until the final
conversion.
"""

from __future__ import annotations

import json
import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Any

import mpmath
import numpy as np
import voluptuous as vol

from .census import Census
from .const import (
    DET_TOLERANCE,
    MIN_COVARIANCE_SAMPLES,
    MODEL_DEFAULT,
    MODEL_EMPIRICAL,
    MODEL_FILE,
)
from .exceptions import ConfigError, DomainError, InsufficientData

_LOGGER = logging.getLogger(__name__)

MODEL_SCHEMA = vol.Schema(
    {
        vol.Required("genus"): vol.All(int, vol.Range(min=2)),
        vol.Optional("sigma2"): vol.All(vol.Coerce(float), vol.Range(min=0, min_included=False)),
        vol.Required("N"): [[vol.Coerce(float)]],
    }
)


@dataclass(frozen=True, eq=False)
class AsymptoticModel:
    """Variance sigma^2 and normalized covariance N of the homology local limit."""

    genus: int
    sigma2: float
    N: np.ndarray = field(repr=False)
    source: str = MODEL_DEFAULT

    @classmethod
    def default(cls, genus: int) -> AsymptoticModel:
        """sigma^2 = 1/(2 pi (g - 1)) with N the identity."""
        if genus < 2:
            raise DomainError(f"Genus must be at least 2, got {genus}")
        return cls(genus, 1 / (2 * math.pi * (genus - 1)), np.eye(2 * genus), MODEL_DEFAULT)

    @classmethod
    def from_matrix(
        cls,
        genus: int,
        N: Sequence[Sequence[float]] | np.ndarray,
        sigma2: float | None = None,
        source: str = MODEL_FILE,
    ) -> AsymptoticModel:
        """Create from a user-supplied N, checked symmetric positive definite with det 1.

        Raises:
            DomainError: If N fails a check
        """
        matrix = np.array(N, dtype=np.float64)
        if matrix.shape != (2 * genus, 2 * genus):
            raise DomainError(f"N must be {2 * genus}x{2 * genus}, got shape {matrix.shape}")
        if not np.allclose(matrix, matrix.T, rtol=0, atol=DET_TOLERANCE):
            raise DomainError("N must be symmetric")
        try:
            np.linalg.cholesky(matrix)
        except np.linalg.LinAlgError as err:
            raise DomainError("N must be positive definite") from err
        determinant = float(np.linalg.det(matrix))
        if abs(determinant - 1) > DET_TOLERANCE:
            raise DomainError(f"N must have determinant 1, got {determinant}")
        if sigma2 is None:
            sigma2 = 1 / (2 * math.pi * (genus - 1))
        if sigma2 <= 0:
            raise DomainError(f"sigma^2 must be positive, got {sigma2}")
        return cls(genus, float(sigma2), matrix, source)

    @classmethod
    def from_file(cls, path: Path) -> AsymptoticModel:
        """Load a model from a JSON file with keys genus, N and optionally sigma2.

        Raises:
            ConfigError: If the file is unreadable or the model is invalid
        """
        try:
            data = MODEL_SCHEMA(json.loads(Path(path).read_text(encoding="utf-8")))
            return cls.from_matrix(data["genus"], data["N"], data.get("sigma2"), MODEL_FILE)
        except (OSError, ValueError) as err:
            raise ConfigError(f"Cannot read model file {path}: {err}") from err
        except vol.Invalid as err:
            raise ConfigError(f"Invalid model file {path}: {err}") from err
        except DomainError as err:
            raise ConfigError(f"Invalid model in {path}: {err}") from err

    @classmethod
    def from_estimate(
        cls, census: Census, length_window: tuple[float, float] | None = None
    ) -> AsymptoticModel:
        """Estimate sigma^2 and N from the census, by default over its complete range."""
        if length_window is None:
            upper = float(census.completeness) if census.completeness is not None else math.inf
            length_window = (0.0, upper)
        sigma2, matrix = estimate_covariance(census, length_window)
        return cls(census.genus, sigma2, matrix, MODEL_EMPIRICAL)

    @cached_property
    def N_inverse(self) -> np.ndarray:
        """Inverse of N."""
        return np.linalg.inv(self.N)

    def quadratic_form(self, beta: Sequence[int]) -> float:
        """<beta, N^-1 beta>."""
        vector = np.array(beta, dtype=np.float64)
        if vector.shape != (2 * self.genus,):
            raise DomainError(f"Homology vector must have {2 * self.genus} coordinates")
        return float(vector @ self.N_inverse @ vector)

    def as_dict(self) -> dict[str, Any]:
        """Serializable description for report metadata."""
        return {
            "genus": self.genus,
            "sigma2": self.sigma2,
            "N": self.N.tolist(),
            "source": self.source,
        }


def _positive_log(x: float, name: str = "x") -> mpmath.mpf:
    if x <= 1:
        raise DomainError(f"{name} must exceed 1, got {x}")
    return mpmath.log(mpmath.mpf(x))


def _gaussian(model: AsymptoticModel, beta: Sequence[int], log_scale: mpmath.mpf) -> mpmath.mpf:
    """exp(-<beta, N^-1 beta> / (2 sigma^2 log_scale))."""
    return mpmath.exp(-model.quadratic_form(beta) / (2 * model.sigma2 * log_scale))


def li(x: float) -> float:
    """Offset logarithmic integral, integral from 2 to x of dt/log t plus li(2).

    Raises:
        DomainError: For x < 2
    """
    if x < 2:
        raise DomainError(f"li is only evaluated for x >= 2, got {x}")
    upper = mpmath.mpf(x)
    # Geometric breakpoints keep the quadrature accurate for large x
    points = [mpmath.mpf(2)]
    while points[-1] * 16 < upper:
        points.append(points[-1] * 16)
    points.append(upper)
    integral = mpmath.quad(lambda t: 1 / mpmath.log(t), points)
    return float(integral + mpmath.li(2))


def ps_main_term(model: AsymptoticModel, x: float) -> float:
    """(g - 1)^g x / log^(g+1) x, the beta-independent leading term of pi_beta."""
    log_x = _positive_log(x)
    g = model.genus
    return float((g - 1) ** g * mpmath.mpf(x) / log_x ** (g + 1))


def sharp_local_term(model: AsymptoticModel, beta: Sequence[int], x: float) -> float:
    """Gaussian local-limit predictor of pi_beta(x)."""
    if x < 2:
        raise DomainError(f"x must be at least 2, got {x}")
    log_x = _positive_log(x)
    density = _gaussian(model, beta, log_x) / (2 * mpmath.pi * model.sigma2 * log_x) ** model.genus
    return float(density * li(x))


def A_weight(model: AsymptoticModel, beta: Sequence[int], x: float) -> float:
    """4 sqrt(x) exp(-<beta, N^-1 beta>/2 sigma^2 log x) / (2 pi sigma^2 log x)^g, predicting R_beta."""
    log_x = _positive_log(x)
    return float(
        4
        * mpmath.sqrt(x)
        * _gaussian(model, beta, log_x)
        / (2 * mpmath.pi * model.sigma2 * log_x) ** model.genus
    )


def _pair_density(
    model: AsymptoticModel, beta: Sequence[int], log_x1: mpmath.mpf, log_x2: mpmath.mpf
) -> mpmath.mpf:
    return (
        _gaussian(model, beta, log_x2)
        / (2 * mpmath.pi * model.sigma2 * (log_x1 + log_x2)) ** model.genus
    )


def pair_main_term(model: AsymptoticModel, beta: Sequence[int], x1: float, x2: float) -> float:
    """Main term of the homology difference pair count.

    The exponential uses log x2 only.
    """
    log_x1 = _positive_log(x1, "x1")
    log_x2 = _positive_log(x2, "x2")
    size = mpmath.mpf(x1) * mpmath.mpf(x2) / (log_x1 * log_x2)
    return float(_pair_density(model, beta, log_x1, log_x2) * size)


def R2_main_term(model: AsymptoticModel, beta: Sequence[int], x1: float, x2: float) -> float:
    """16 sqrt(x1 x2) times the pair density, predicting R2_beta."""
    log_x1 = _positive_log(x1, "x1")
    log_x2 = _positive_log(x2, "x2")
    return float(
        16 * mpmath.sqrt(mpmath.mpf(x1) * mpmath.mpf(x2)) * _pair_density(model, beta, log_x1, log_x2)
    )


def pairs_asymptotic_term(model: AsymptoticModel, x: float) -> float:
    """((g - 1)^g / 2^g) x^2 / log^(g+2) x, the total pair count at beta = 0."""
    log_x = _positive_log(x)
    g = model.genus
    return float(mpmath.mpf(g - 1) ** g / 2**g * mpmath.mpf(x) ** 2 / log_x ** (g + 2))


def local_pair_term(model: AsymptoticModel, beta: Sequence[int], x: float) -> float:
    """Single-cutoff pair predictor; equals pair_main_term(model, beta, x, x)."""
    log_x = _positive_log(x)
    density = _gaussian(model, beta, log_x) / (2 * mpmath.pi * model.sigma2 * log_x) ** model.genus
    return float(density / 2**model.genus * mpmath.mpf(x) ** 2 / log_x**2)


def p2_relation(x1: float, x2: float, p2_value: float) -> float:
    """Pair count implied by P2 through partial summation: sqrt(x1 x2) P2 / (16 log x1 log x2)."""
    log_x1 = _positive_log(x1, "x1")
    log_x2 = _positive_log(x2, "x2")
    return float(
        mpmath.sqrt(mpmath.mpf(x1) * mpmath.mpf(x2)) * p2_value / (16 * log_x1 * log_x2)
    )


def g_combined(x1: float, x2: float) -> float:
    """(1/log x1 + 1/log x2)^-1."""
    log_x1 = _positive_log(x1, "x1")
    log_x2 = _positive_log(x2, "x2")
    return float(1 / (1 / log_x1 + 1 / log_x2))


def _lattice_ball(dimension: int, window: float) -> np.ndarray:
    """All integer vectors with 1-norm at most ``window``, as rows."""
    radius = int(math.floor(window))
    points = np.zeros((1, 0), dtype=np.int64)
    norms = np.zeros(1, dtype=np.int64)
    for _ in range(dimension):
        # Each point extends by every coordinate its remaining budget allows
        budget = radius - norms
        counts = 2 * budget + 1
        starts = np.repeat(np.cumsum(counts) - counts, counts)
        steps = np.arange(int(counts.sum()), dtype=np.int64) - starts - np.repeat(budget, counts)
        points = np.hstack([np.repeat(points, counts, axis=0), steps[:, None]])
        norms = np.repeat(norms, counts) + np.abs(steps)
    return points


def gaussian_convolution_check(
    model: AsymptoticModel,
    beta: Sequence[int],
    L1: float,
    L2: float,
    window: float,
) -> tuple[float, float, float]:
    """Compare a lattice Gaussian convolution sum with its closed form.

    Args:
        model: Asymptotic model providing sigma^2 and N
        beta: Homology shift
        L1: log x1
        L2: log x2
        window: Bound on ||alpha|| (sum norm) for the lattice sum

    Returns:
        (lattice sum, closed form, relative error)
    """
    if L1 <= 0 or L2 <= 0 or window < 0:
        raise DomainError("Log cutoffs must be positive and the window non-negative")
    shift = np.array(beta, dtype=np.float64)
    alphas = _lattice_ball(2 * model.genus, window).astype(np.float64)
    inverse = model.N_inverse
    first = np.einsum("ij,jk,ik->i", alphas, inverse, alphas)
    moved = alphas + shift
    second = np.einsum("ij,jk,ik->i", moved, inverse, moved)
    exponents = -first / (2 * model.sigma2 * L1) - second / (2 * model.sigma2 * L2)
    lhs = float(np.sum(np.exp(np.sort(exponents))))

    combined = 1 / (1 / L1 + 1 / L2)
    rhs = math.exp(-model.quadratic_form(beta) / (2 * model.sigma2 * (L1 + L2))) * (
        2 * math.pi * model.sigma2 * combined
    ) ** model.genus
    return lhs, rhs, abs(lhs - rhs) / rhs


def estimate_covariance(
    census: Census, length_window: tuple[float, float]
) -> tuple[float, np.ndarray]:
    """Estimate sigma^2 and N from homology / sqrt(length) over primitive classes.

    Args:
        census: Census to sample
        length_window: Inclusive (l_lo, l_hi) range of geodesic lengths

    Returns:
        (sigma2_hat, N_hat) with sigma2_hat = det(C)^(1/2g) and N_hat = C / sigma2_hat

    Raises:
        InsufficientData: If fewer than MIN_COVARIANCE_SAMPLES classes fall in the window
    """
    low, high = length_window
    lengths = census.lengths
    mask = census.primitive & (lengths >= low) & (lengths <= high)
    count = int(np.count_nonzero(mask))
    if count < MIN_COVARIANCE_SAMPLES:
        raise InsufficientData(
            f"Only {count} primitive classes in length window [{low}, {high}], "
            f"need {MIN_COVARIANCE_SAMPLES}"
        )
    samples = census.homology[mask] / np.sqrt(lengths[mask])[:, None]
    covariance = np.cov(samples, rowvar=False)
    covariance = (covariance + covariance.T) / 2
    determinant = float(np.linalg.det(covariance))
    if determinant <= 0:
        raise InsufficientData("Sample covariance is singular")
    sigma2 = determinant ** (1 / (2 * census.genus))
    _LOGGER.debug("Estimated sigma^2 = %.6f from %d classes", sigma2, count)
    return sigma2, covariance / sigma2
