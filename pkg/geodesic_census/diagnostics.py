"""Diagnostics support for censuses."""

from __future__ import annotations

import itertools
import math
from typing import Any

import numpy as np

from .asymptotics import AsymptoticModel, li, pair_main_term
from .census import Census
from .const import NORM_SUM, PAIR_SHAPE_RADIUS, TREND_BAND, TREND_POINTS
from .counting import PairQuery, pair_count, pi, support_constant, support_profile
from .surface_group import homology_norm


def prime_geodesic_trend(ratios: list[dict[str, Any]]) -> dict[str, Any] | None:
    """Deviation of pi(x) / li(x) from 1 over the largest complete dyadic cutoffs.

    Returns None when fewer than three cutoffs are available.
    """
    if len(ratios) < TREND_POINTS:
        return None
    tail = ratios[-TREND_POINTS:]
    deviations = [abs(row["ratio"] - 1) for row in tail]
    return {
        "x": [row["x"] for row in tail],
        "deviation": deviations,
        "within_band": all(TREND_BAND[0] <= row["ratio"] <= TREND_BAND[1] for row in tail),
        "decreasing": all(b <= a for a, b in itertools.pairwise(deviations)),
    }


def pair_shape(
    census: Census, model: AsymptoticModel, x: float, norm_kind: str = NORM_SUM
) -> dict[str, Any]:
    """Compare pair counts at beta = 0 with their neighbours of norm 1 and 2.

    Each neighbour reports its count, the main term and their ratio. The
    count at 0 should be the largest.
    """
    rank = 2 * census.genus
    center = pair_count(census, PairQuery((0,) * rank, x, x))
    neighbours = []
    span = range(-PAIR_SHAPE_RADIUS, PAIR_SHAPE_RADIUS + 1)
    for beta in itertools.product(span, repeat=rank):
        if not 0 < homology_norm(beta, norm_kind) <= PAIR_SHAPE_RADIUS:
            continue
        count = pair_count(census, PairQuery(beta, x, x))
        predicted = pair_main_term(model, beta, x, x)
        neighbours.append(
            {
                "beta": ",".join(str(b) for b in beta),
                "pi2": count,
                "predicted": predicted,
                "ratio": count / predicted if predicted else math.nan,
            }
        )
    return {
        "x": x,
        "norm": norm_kind,
        "pi2_zero": center,
        "zero_dominates": all(row["pi2"] <= center for row in neighbours),
        "neighbours": neighbours,
    }


def census_diagnostics(
    census: Census, norm_kind: str = NORM_SUM, model: AsymptoticModel | None = None
) -> dict[str, Any]:
    """Return a JSON-serializable summary of a census.

    Args:
        census: Census to summarize
        norm_kind: Homology norm for the support and pair shape sections
        model: Predictor for the pair shape ratios; the default model when None
    """
    completeness = census.completeness
    diagnostics_data: dict[str, Any] = {
        "census": {
            "representation_id": census.representation_id,
            "representation": census.representation_name,
            "genus": census.genus,
            "precision": census.precision,
            "word_length_bound": census.word_length_bound,
            "safety_margin": census.safety_margin,
            "metadata": dict(census.metadata),
        },
        "classes": {
            "total": len(census),
            "primitive": int(np.count_nonzero(census.primitive)),
            "by_word_length": {str(k): v for k, v in census.counts_by_word_length().items()},
        },
        "completeness_length": None if completeness is None else float(completeness),
    }

    if not len(census):
        return diagnostics_data

    # Shortest geodesic per word length, the empirical word-to-length comparison
    diagnostics_data["min_length_by_word_length"] = {
        str(int(n)): float(np.min(census.lengths[census.word_lengths == n]))
        for n in np.unique(census.word_lengths)
    }
    if np.any(census.primitive):
        diagnostics_data["support"] = {
            "norm": norm_kind,
            "constant": support_constant(census, norm_kind),
            "profile": support_profile(census, norm_kind),
        }

    if completeness is not None and float(completeness) > 0:
        ratios = []
        for exponent in range(1, int(float(completeness) / math.log(2)) + 1):
            x = 2.0**exponent
            count = pi(census, x)
            ratios.append({"x": x, "pi": count, "ratio": count / li(x)})
        diagnostics_data["prime_geodesic_ratios"] = ratios
        trend = prime_geodesic_trend(ratios)
        if trend is not None:
            diagnostics_data["prime_geodesic_trend"] = trend

        if model is None:
            model = AsymptoticModel.default(census.genus)
        diagnostics_data["pair_shape"] = pair_shape(
            census, model, math.exp(float(completeness)), norm_kind
        )

    return diagnostics_data
