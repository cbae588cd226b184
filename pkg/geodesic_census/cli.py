"""Command-line front end for building censuses and querying them."""

from __future__ import annotations

import argparse
import asyncio
import json
import logging
import sys
from collections.abc import Sequence
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Any, NoReturn

from .asymptotics import AsymptoticModel
from .census import Census
from .config import Config, load_config
from .const import (
    CONF_CACHE_DIR,
    CONF_CACHE_FILE,
    CONF_INCLUDE_DIAGONAL,
    CONF_MODEL_FILE,
    CONF_MODEL_SOURCE,
    CONF_NORM_KIND,
    CONF_OUTPUT_FORMAT,
    CONF_PAIR_K,
    CONF_PRECISION,
    CONF_REPRESENTATION,
    CONF_SAFETY_MARGIN,
    CONF_SHARDS,
    CONF_STAMP,
    CONF_WORD_LENGTH_BOUND,
    EXIT_INTERNAL_ERROR,
    EXIT_OK,
    EXIT_USER_ERROR,
    MODEL_DEFAULT,
    MODEL_FILE,
    MODEL_SOURCES,
    NORM_KINDS,
    OUTPUT_FORMATS,
    OUTPUT_JSON,
    TOOL_VERSION,
)
from .coordinator import CensusCoordinator
from .diagnostics import census_diagnostics
from .exceptions import CensusBuildError, ConfigError, GeodesicCensusError
from .report import (
    COUNT_FUNCTIONS,
    Query,
    compare,
    counts_to_csv,
    counts_to_json,
    default_queries,
    evaluate_counts,
    load_queries,
    parse_beta,
)

_LOGGER = logging.getLogger(__name__)


class _ArgumentParser(argparse.ArgumentParser):
    """Argument parser that reports usage errors as ConfigError instead of exiting."""

    def error(self, message: str) -> NoReturn:
        raise ConfigError(f"{self.prog}: {message}")


def build_parser() -> argparse.ArgumentParser:
    """Create the argument parser with the census, count, compare and diagnose commands."""
    common = _ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="JSON config file")
    common.add_argument(
        "--preset",
        "--representation",
        dest=CONF_REPRESENTATION,
        help="Preset name (bolza) or representation JSON file",
    )
    common.add_argument("--precision", dest=CONF_PRECISION, type=int, help="Precision in bits")
    common.add_argument("--cache-dir", dest=CONF_CACHE_DIR, help="Census cache directory")
    common.add_argument("--cache-file", dest=CONF_CACHE_FILE, help="Explicit census cache file")
    common.add_argument("--model", dest=CONF_MODEL_SOURCE, choices=MODEL_SOURCES)
    common.add_argument("--model-file", dest=CONF_MODEL_FILE, help="JSON model file")
    common.add_argument("--format", dest=CONF_OUTPUT_FORMAT, choices=OUTPUT_FORMATS)
    common.add_argument(
        "--no-diagonal",
        dest=CONF_INCLUDE_DIAGONAL,
        action="store_const",
        const=False,
        help="Exclude the pairs (gamma, gamma) from pair counts",
    )
    common.add_argument("--norm", dest=CONF_NORM_KIND, choices=NORM_KINDS)
    common.add_argument("--safety-margin", dest=CONF_SAFETY_MARGIN, type=float)
    common.add_argument("--pair-k", dest=CONF_PAIR_K, type=float)
    common.add_argument("-v", "--verbose", action="store_true", help="Debug logging")

    parser = _ArgumentParser(prog="geodesic-census", description=__doc__)
    parser.add_argument("--version", action="version", version=f"%(prog)s {TOOL_VERSION}")
    commands = parser.add_subparsers(dest="command", required=True, parser_class=_ArgumentParser)

    census = commands.add_parser("census", parents=[common], help="Build and cache a census")
    census.add_argument(
        "-L", "--word-length", dest=CONF_WORD_LENGTH_BOUND, type=int, help="Word-length bound"
    )
    census.add_argument("--shards", dest=CONF_SHARDS, type=int, help="Parallel shard count")
    census.add_argument(
        "--stamp", dest=CONF_STAMP, action="store_const", const=True, help="Record build time"
    )
    census.add_argument("--rebuild", action="store_true", help="Ignore cached censuses")
    census.set_defaults(handler=cmd_census)

    count = commands.add_parser("count", parents=[common], help="Evaluate a counting function")
    count.add_argument("function", choices=COUNT_FUNCTIONS)
    count.add_argument("--beta", help="Homology vector as comma-separated integers")
    count.add_argument("--x", type=float, help="Norm cutoff")
    count.add_argument("--x1", type=float, help="First norm cutoff of a pair count")
    count.add_argument("--x2", type=float, help="Second norm cutoff of a pair count")
    count.add_argument("--window", type=float, help="Homology window for R2_truncated")
    count.set_defaults(handler=cmd_count)

    comparison = commands.add_parser(
        "compare", parents=[common], help="Compare counts with their predictors"
    )
    comparison.add_argument("--queries", type=Path, help="JSON query file")
    comparison.set_defaults(handler=cmd_compare)

    diagnose = commands.add_parser("diagnose", parents=[common], help="Summarize a census")
    diagnose.set_defaults(handler=cmd_diagnose)
    return parser


def _overrides(args: argparse.Namespace) -> dict[str, Any]:
    keys = (
        CONF_REPRESENTATION,
        CONF_PRECISION,
        CONF_WORD_LENGTH_BOUND,
        CONF_SHARDS,
        CONF_CACHE_DIR,
        CONF_CACHE_FILE,
        CONF_MODEL_SOURCE,
        CONF_MODEL_FILE,
        CONF_OUTPUT_FORMAT,
        CONF_INCLUDE_DIAGONAL,
        CONF_NORM_KIND,
        CONF_SAFETY_MARGIN,
        CONF_PAIR_K,
        CONF_STAMP,
    )
    return {key: getattr(args, key, None) for key in keys}


def cmd_census(config: Config, args: argparse.Namespace) -> int:
    """Build (or reuse) the census and print a summary."""
    executor = ProcessPoolExecutor(max_workers=config.shards) if config.shards > 1 else None
    try:
        coordinator = CensusCoordinator(config, executor)
        census = asyncio.run(coordinator.async_get_census(rebuild=args.rebuild))
    finally:
        if executor is not None:
            executor.shutdown()

    print(f"cache\t{coordinator.census_path}")
    print(f"representation\t{census.representation_name}\t{census.representation_id}")
    for word_length, count in census.counts_by_word_length().items():
        print(f"word_length\t{word_length}\t{count}")
    if census.completeness is not None:
        print(f"completeness_length\t{census.completeness.format_value()}")
    return EXIT_OK


def _load(config: Config) -> Census:
    return CensusCoordinator(config).load_cached()


def cmd_count(config: Config, args: argparse.Namespace) -> int:
    """Print one counting function value."""
    census = _load(config)
    x1 = args.x if args.x is not None else args.x1
    if x1 is None:
        raise ConfigError("count needs --x or --x1")
    beta = parse_beta(args.beta, census.genus) if args.beta is not None else None
    query = Query(args.function, x1, args.x2, beta)
    rows = evaluate_counts(
        census,
        [query],
        include_diagonal=config.include_diagonal,
        pair_k=config.pair_k,
        window_u=args.window,
        norm_kind=config.norm_kind,
    )
    print(counts_to_json(rows) if config.output_format == OUTPUT_JSON else counts_to_csv(rows), end="")
    return EXIT_OK


def resolve_model(config: Config, census: Census) -> AsymptoticModel:
    """Select the asymptotic model named by the configuration."""
    if config.model_source == MODEL_DEFAULT:
        return AsymptoticModel.default(census.genus)
    if config.model_source == MODEL_FILE:
        model = AsymptoticModel.from_file(config.model_file)
        if model.genus != census.genus:
            raise ConfigError(f"Model genus {model.genus} does not match census genus {census.genus}")
        return model
    return AsymptoticModel.from_estimate(census)


def cmd_compare(config: Config, args: argparse.Namespace) -> int:
    """Print a comparison report."""
    census = _load(config)
    model = resolve_model(config, census)
    if args.queries is not None:
        queries = load_queries(args.queries, census.genus)
    else:
        queries = default_queries(census)
    report = compare(
        census, model, queries, include_diagonal=config.include_diagonal, pair_k=config.pair_k
    )
    print(report.to_json() if config.output_format == OUTPUT_JSON else report.to_csv(), end="")
    return EXIT_OK


def cmd_diagnose(config: Config, args: argparse.Namespace) -> int:
    """Print census diagnostics as JSON."""
    census = _load(config)
    diagnostics_data = census_diagnostics(census, config.norm_kind, resolve_model(config, census))
    print(json.dumps(diagnostics_data, indent=2, sort_keys=True))
    return EXIT_OK


def _is_user_error(err: GeodesicCensusError) -> bool:
    if isinstance(err, CensusBuildError):
        cause = err.__cause__
        return isinstance(cause, GeodesicCensusError) and _is_user_error(cause)
    return True


def main(argv: Sequence[str] | None = None) -> int:
    """Run the command line and return the exit status."""
    try:
        args = build_parser().parse_args(argv)
    except ConfigError as err:
        print(err, file=sys.stderr)
        return EXIT_USER_ERROR

    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )

    try:
        config = load_config(args.config, _overrides(args))
        return args.handler(config, args)
    except GeodesicCensusError as err:
        if _is_user_error(err):
            _LOGGER.error("%s", err)
            return EXIT_USER_ERROR
        _LOGGER.exception("Census build failed")
        return EXIT_INTERNAL_ERROR
    except Exception:
        _LOGGER.exception("Unexpected error")
        return EXIT_INTERNAL_ERROR


if __name__ == "__main__":
    sys.exit(main())
