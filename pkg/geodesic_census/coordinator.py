"""Build coordinator for sharded census enumeration with a file cache."""

from __future__ import annotations

import asyncio
import logging
import re
from concurrent.futures import Executor
from functools import reduce
from pathlib import Path

from .census import Census, enumerate_census, load, merge, save
from .config import Config
from .const import CENSUS_SUFFIX
from .exceptions import CensusBuildError, CensusError, FormatError, GeodesicCensusError
from .hyperbolic_geometry import Representation, load_preset

_LOGGER = logging.getLogger(__name__)

_CACHE_NAME_RE = re.compile(r"-L(\d+)" + re.escape(CENSUS_SUFFIX) + "$")


def build_shard(
    representation: str,
    precision: int,
    word_length_bound: int,
    shard: int,
    shard_count: int,
    safety_margin: float,
) -> Census:
    """Enumerate one shard; a top-level function so process pools can pickle it."""
    rep = load_preset(representation, precision)
    _LOGGER.debug("Shard %d/%d starting for %s", shard, shard_count, rep.name)
    census = enumerate_census(
        rep,
        word_length_bound,
        shard=shard,
        shard_count=shard_count,
        safety_margin=safety_margin,
    )
    _LOGGER.debug("Shard %d/%d finished with %d classes", shard, shard_count, len(census))
    return census


class CensusCoordinator:
    """Coordinates census builds and the cache directory."""

    def __init__(self, config: Config, executor: Executor | None = None) -> None:
        """Initialize the coordinator.

        Args:
            config: Validated configuration
            executor: Executor for shard jobs; None uses the event loop default
        """
        self.config = config
        self._executor = executor
        self._rep: Representation | None = None
        self.census_path: Path | None = None

    @property
    def representation(self) -> Representation:
        """The validated representation, loaded on first use."""
        if self._rep is None:
            self._rep = load_preset(self.config.representation, self.config.precision)
        return self._rep

    def _cache_stem(self) -> str:
        rep = self.representation
        return f"{rep.name}-{rep.id}-p{rep.precision}"

    def cache_path(self, word_length_bound: int | None = None) -> Path:
        """Cache file for the configured representation and word-length bound."""
        if self.config.cache_file is not None:
            return self.config.cache_file
        bound = self.config.word_length_bound if word_length_bound is None else word_length_bound
        return self.config.cache_dir / f"{self._cache_stem()}-L{bound}{CENSUS_SUFFIX}"

    def find_cached(self, min_bound: int | None = None, deepest: bool = False) -> Census | None:
        """Return a cached census with word-length bound at least ``min_bound``.

        Args:
            min_bound: Smallest acceptable bound, defaults to the configured one
            deepest: Prefer the largest bound instead of the smallest
        """
        rep = self.representation
        if min_bound is None:
            min_bound = self.config.word_length_bound
        if self.config.cache_file is not None:
            candidates = [self.config.cache_file] if self.config.cache_file.exists() else []
        else:
            bounds = {}
            for path in self.config.cache_dir.glob(f"{self._cache_stem()}-L*{CENSUS_SUFFIX}"):
                match = _CACHE_NAME_RE.search(path.name)
                if match and int(match.group(1)) >= min_bound:
                    bounds[path] = int(match.group(1))
            candidates = sorted(bounds, key=bounds.get, reverse=deepest)

        for path in candidates:
            try:
                census = load(path, rep.id)
            except FormatError as err:
                _LOGGER.warning("Ignoring unusable cache %s: %s", path, err)
                continue
            if census.safety_margin == self.config.safety_margin:
                _LOGGER.debug("Using cached census %s", path)
                self.census_path = path
                return census
        return None

    async def async_build(self) -> Census:
        """Enumerate all shards concurrently and merge them.

        Raises:
            CensusBuildError: If any shard fails
        """
        config = self.config
        rep = self.representation
        loop = asyncio.get_running_loop()
        jobs = [
            loop.run_in_executor(
                self._executor,
                build_shard,
                config.representation,
                config.precision,
                config.word_length_bound,
                shard,
                config.shards,
                config.safety_margin,
            )
            for shard in range(config.shards)
        ]
        _LOGGER.debug("Started %d shard jobs for %s", len(jobs), rep.name)

        try:
            shards = await asyncio.gather(*jobs)
        except GeodesicCensusError as err:
            raise CensusBuildError(f"Shard failed: {err}") from err
        except Exception as err:
            _LOGGER.exception("Unexpected error in census shard")
            raise CensusBuildError(f"Unexpected error: {err}") from err

        census = reduce(merge, shards)
        if config.stamp:
            census = Census.build(
                census.classes, census.word_length_bound, rep, config.safety_margin, stamp=True
            )
        _LOGGER.info(
            "Built census of %d classes up to word length %d", len(census), census.word_length_bound
        )
        return census

    async def async_get_census(self, rebuild: bool = False) -> Census:
        """Return a cached census when one fits, otherwise build and cache it."""
        if not rebuild:
            cached = self.find_cached()
            if cached is not None:
                return cached

        census = await self.async_build()
        path = self.cache_path()
        save(census, path)
        self.census_path = path
        _LOGGER.info("Wrote census to %s", path)
        return census

    def load_cached(self) -> Census:
        """Return the deepest cached census for reading queries.

        Raises:
            CensusError: If no usable cache exists
        """
        census = self.find_cached(min_bound=0, deepest=True)
        if census is None:
            raise CensusError(
                f"No cached census at {self.cache_path()}; run the census command first"
            )
        return census
