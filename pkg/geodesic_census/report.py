"""Census-versus-prediction comparison reports."""

from __future__ import annotations

import csv
import io
import json
import logging
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any

import voluptuous as vol

from . import asymptotics, const, counting
from .asymptotics import AsymptoticModel
from .census import Census
from .const import (
    COMPARE_FUNCTIONS,
    COUNT_COLUMNS,
    DEFAULT_COMPARE_FUNCTIONS,
    DEFAULT_PAIR_K,
    FUNC_P2,
    FUNC_PAIR,
    FUNC_PI,
    FUNC_R2,
    FUNC_R2_TRUNCATED,
    NORM_SUM,
    REPORT_COLUMNS,
)
from .exceptions import ConfigError, QueryError

_LOGGER = logging.getLogger(__name__)

PAIR_FUNCTIONS = (FUNC_PAIR, FUNC_R2, FUNC_P2, FUNC_R2_TRUNCATED)
COUNT_FUNCTIONS = (*COMPARE_FUNCTIONS, FUNC_R2_TRUNCATED)


def parse_beta(text: str | list[int], genus: int) -> tuple[int, ...]:
    """Parse a homology vector from "1,0,-2,0" or a list, requiring 2g coordinates.

    Raises:
        QueryError: If the vector is malformed or has the wrong length
    """
    try:
        if isinstance(text, str):
            beta = tuple(int(part) for part in text.split(","))
        else:
            beta = tuple(int(part) for part in text)
    except ValueError as err:
        raise QueryError(f"Malformed homology vector {text!r}") from err
    if len(beta) != 2 * genus:
        raise QueryError(f"Homology vector {text!r} must have {2 * genus} coordinates")
    return beta


@dataclass(frozen=True)
class Query:
    """One counting function evaluated at one cutoff or cutoff pair."""

    function: str
    x1: float
    x2: float | None = None
    beta: tuple[int, ...] | None = None

    def __post_init__(self) -> None:
        if self.function not in COUNT_FUNCTIONS:
            raise QueryError(f"Unknown counting function {self.function!r}")
        if self.function != FUNC_PI and self.beta is None:
            raise QueryError(f"Function {self.function} needs a homology vector beta")
        if self.function in PAIR_FUNCTIONS and self.x2 is None:
            object.__setattr__(self, "x2", self.x1)

    @property
    def cutoff(self) -> float:
        """Largest cutoff of the query."""
        return max(self.x1, self.x2 or self.x1)


QUERY_SCHEMA = vol.Schema(
    {
        vol.Required("function"): vol.In(COUNT_FUNCTIONS),
        vol.Optional("beta"): vol.Any(str, [int]),
        vol.Exclusive("x", "cutoff"): vol.All(vol.Coerce(float), vol.Range(min=0, min_included=False)),
        vol.Exclusive("x1", "cutoff"): vol.All(vol.Coerce(float), vol.Range(min=0, min_included=False)),
        vol.Optional("x2"): vol.All(vol.Coerce(float), vol.Range(min=0, min_included=False)),
    }
)

QUERY_FILE_SCHEMA = vol.Schema({vol.Required("queries"): [QUERY_SCHEMA]})


def load_queries(path: Path, genus: int) -> list[Query]:
    """Read a JSON query file.

    Raises:
        ConfigError: If the file cannot be read or parsed
        QueryError: If a query is malformed
    """
    try:
        data = QUERY_FILE_SCHEMA(json.loads(Path(path).read_text(encoding="utf-8")))
    except (OSError, ValueError) as err:
        raise ConfigError(f"Cannot read query file {path}: {err}") from err
    except vol.Invalid as err:
        raise ConfigError(f"Invalid query file {path}: {err}") from err

    queries = []
    for item in data["queries"]:
        x1 = item.get("x", item.get("x1"))
        if x1 is None:
            raise QueryError(f"Query {item} needs a cutoff x or x1")
        beta = parse_beta(item["beta"], genus) if "beta" in item else None
        queries.append(Query(item["function"], x1, item.get("x2"), beta))
    return queries


def default_queries(census: Census) -> list[Query]:
    """Every default comparison at x = exp(completeness length), for beta = 0 and e_1."""
    if census.completeness is None:
        return []
    x = math.exp(float(census.completeness))
    zero = (0,) * (2 * census.genus)
    unit = (1,) + (0,) * (2 * census.genus - 1)
    queries = [Query(FUNC_PI, x)]
    for beta in (zero, unit):
        for function in DEFAULT_COMPARE_FUNCTIONS:
            if function != FUNC_PI:
                queries.append(Query(function, x, x if function in PAIR_FUNCTIONS else None, beta))
    return queries


@dataclass(frozen=True)
class CountRow:
    """Observed value of one query."""

    function: str
    beta: str
    x1: float
    x2: float | None
    value: float
    complete: bool


@dataclass(frozen=True)
class ComparisonRow:
    """Observed value, predicted value and their ratio for one query."""

    function: str
    beta: str
    x1: float
    x2: float | None
    observed: float
    predicted: float
    ratio: float
    complete: bool


@dataclass
class ComparisonReport:
    """Rows of a comparison with the model and census they were computed from."""

    rows: list[ComparisonRow] = field(default_factory=list)
    metadata: dict[str, Any] = field(default_factory=dict)

    def to_csv(self) -> str:
        """CSV with a header row."""
        return _to_csv(REPORT_COLUMNS, [asdict(row) for row in self.rows])

    def to_json(self) -> str:
        """JSON document with metadata and rows."""
        return json.dumps(
            {"metadata": self.metadata, "rows": [asdict(row) for row in self.rows]},
            indent=2,
            sort_keys=True,
        )


def _to_csv(columns: tuple[str, ...], rows: list[dict[str, Any]]) -> str:
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=columns, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({key: "" if row[key] is None else row[key] for key in columns})
    return buffer.getvalue()


def counts_to_csv(rows: list[CountRow]) -> str:
    """CSV of count rows."""
    return _to_csv(COUNT_COLUMNS, [asdict(row) for row in rows])


def counts_to_json(rows: list[CountRow]) -> str:
    """JSON list of count rows."""
    return json.dumps([asdict(row) for row in rows], indent=2, sort_keys=True)


def _pair_query(query: Query, pair_k: float) -> counting.PairQuery:
    return counting.PairQuery(query.beta, query.x1, query.x2, pair_k)


def _complete(census: Census, query: Query) -> bool:
    return counting.is_complete(census, query.cutoff)


def observe(
    census: Census,
    query: Query,
    *,
    include_diagonal: bool = True,
    pair_k: float = DEFAULT_PAIR_K,
    window_u: float | None = None,
    norm_kind: str = NORM_SUM,
) -> float:
    """Evaluate the query's counting function on the census."""
    match query.function:
        case const.FUNC_PI:
            return counting.pi(census, query.x1)
        case const.FUNC_PI_BETA | const.FUNC_PI_BETA_PS:
            return counting.pi_beta(census, query.beta, query.x1)
        case const.FUNC_R_BETA:
            return counting.R_beta(census, query.beta, query.x1)
        case const.FUNC_PAIR | const.FUNC_P2:
            return counting.pair_count(census, _pair_query(query, pair_k), include_diagonal)
        case const.FUNC_R2:
            return counting.R2_beta(census, _pair_query(query, pair_k), include_diagonal)
        case const.FUNC_R2_TRUNCATED:
            window = counting.truncation_window(query.cutoff) if window_u is None else window_u
            value, _ = counting.truncated_R2(
                census, _pair_query(query, pair_k), window, include_diagonal, norm_kind
            )
            return value
    raise QueryError(f"Unknown counting function {query.function!r}")


def predict(
    census: Census,
    model: AsymptoticModel,
    query: Query,
    *,
    include_diagonal: bool = True,
    pair_k: float = DEFAULT_PAIR_K,
) -> float:
    """Evaluate the predictor paired with the query's counting function."""
    match query.function:
        case const.FUNC_PI:
            return asymptotics.li(query.x1)
        case const.FUNC_PI_BETA:
            return asymptotics.sharp_local_term(model, query.beta, query.x1)
        case const.FUNC_PI_BETA_PS:
            return asymptotics.ps_main_term(model, query.x1)
        case const.FUNC_R_BETA:
            return asymptotics.A_weight(model, query.beta, query.x1)
        case const.FUNC_PAIR:
            return asymptotics.pair_main_term(model, query.beta, query.x1, query.x2)
        case const.FUNC_R2:
            return asymptotics.R2_main_term(model, query.beta, query.x1, query.x2)
        case const.FUNC_P2:
            p2 = counting.P2_beta(census, _pair_query(query, pair_k), include_diagonal)
            return asymptotics.p2_relation(query.x1, query.x2, p2)
    raise QueryError(f"No predictor for counting function {query.function!r}")


def _format_beta(beta: tuple[int, ...] | None) -> str:
    return "" if beta is None else ",".join(str(b) for b in beta)


def evaluate_counts(census: Census, queries: list[Query], **options: Any) -> list[CountRow]:
    """Observed values of the queries."""
    return [
        CountRow(
            function=query.function,
            beta=_format_beta(query.beta),
            x1=query.x1,
            x2=query.x2,
            value=observe(census, query, **options),
            complete=_complete(census, query),
        )
        for query in queries
    ]


def _pair_terms(model: AsymptoticModel, query: Query) -> dict[str, Any]:
    """Alternative pair predictors next to the main term of a pair count query.

    The single-cutoff term needs x1 = x2 and the total pair term needs beta = 0.
    """
    diagonal_cutoff = query.x1 == query.x2
    return {
        "beta": _format_beta(query.beta),
        "x1": query.x1,
        "x2": query.x2,
        "pair_main_term": asymptotics.pair_main_term(model, query.beta, query.x1, query.x2),
        "local_pair_term": asymptotics.local_pair_term(model, query.beta, query.x1)
        if diagonal_cutoff
        else None,
        "pairs_asymptotic_term": asymptotics.pairs_asymptotic_term(model, query.x1)
        if diagonal_cutoff and not any(query.beta)
        else None,
    }


def compare(
    census: Census,
    model: AsymptoticModel,
    queries: list[Query],
    *,
    include_diagonal: bool = True,
    pair_k: float = DEFAULT_PAIR_K,
) -> ComparisonReport:
    """Tabulate observed counts against their predictors, one row per query.

    Raises:
        QueryError: If a query has no predictor
    """
    rows = []
    for query in queries:
        if query.function not in COMPARE_FUNCTIONS:
            raise QueryError(f"Function {query.function} cannot be compared")
        observed = observe(census, query, include_diagonal=include_diagonal, pair_k=pair_k)
        predicted = predict(census, model, query, include_diagonal=include_diagonal, pair_k=pair_k)
        complete = _complete(census, query)
        if not complete:
            _LOGGER.warning("Query %s at x = %s is beyond the complete range", query.function, query.cutoff)
        rows.append(
            ComparisonRow(
                function=query.function,
                beta=_format_beta(query.beta),
                x1=query.x1,
                x2=query.x2,
                observed=float(observed),
                predicted=predicted,
                ratio=observed / predicted if predicted else math.nan,
                complete=complete,
            )
        )

    metadata = {
        "representation_id": census.representation_id,
        "representation": census.representation_name,
        "word_length_bound": census.word_length_bound,
        "completeness_length": None
        if census.completeness is None
        else float(census.completeness),
        "include_diagonal": include_diagonal,
        "model": model.as_dict(),
        "pair_terms": [_pair_terms(model, q) for q in queries if q.function == FUNC_PAIR],
    }
    return ComparisonReport(rows, metadata)
