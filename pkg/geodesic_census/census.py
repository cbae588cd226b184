"""Census of conjugacy classes (closed geodesics) up to a word-length bound."""

from __future__ import annotations

import json
import logging
from collections import Counter
from collections.abc import Iterable
from dataclasses import dataclass, field
from datetime import UTC, datetime
from functools import cached_property
from pathlib import Path
from typing import Any

import mpmath
import numpy as np

from .const import (
    DEFAULT_SAFETY_MARGIN,
    FORMAT_VERSION,
    ORACLE_MAX_RADIUS,
    TOOL_VERSION,
)
from .exceptions import (
    EmptyCensus,
    FormatError,
    IncompatibleCensus,
    NotHyperbolic,
    PrecisionExhausted,
)
from .hyperbolic_geometry import LengthNorm, Representation, ScalarHP, length_of, word_to_matrix
from .surface_group import (
    CyclicWord,
    HomologyVector,
    Presentation,
    Word,
    abelianize,
    ball,
    canonicalize,
    cyclically_reduced_words,
    dehn_reduce,
    free_reduce,
    primitive_root,
)

_LOGGER = logging.getLogger(__name__)

_RECORD_FIELDS = 9


@dataclass(frozen=True)
class GeodesicClass:
    """A conjugacy class with its closed geodesic."""

    canonical: CyclicWord
    word_length: int
    length: ScalarHP
    norm: ScalarHP
    homology: HomologyVector
    primitive: bool
    root_multiplicity: int

    def to_record(self) -> str:
        """Return the tab-separated census line."""
        return "\t".join(
            (
                str(self.canonical),
                str(self.word_length),
                self.length.format_value(),
                self.length.format_error(),
                self.norm.format_value(),
                self.norm.format_error(),
                ",".join(str(h) for h in self.homology),
                "1" if self.primitive else "0",
                str(self.root_multiplicity),
            )
        )

    @classmethod
    def from_record(cls, line: str, presentation: Presentation, precision: int) -> GeodesicClass:
        """Create from a census line.

        Raises:
            FormatError: If the line does not hold a valid record
        """
        fields = line.rstrip("\n").split("\t")
        if len(fields) != _RECORD_FIELDS:
            raise FormatError(f"Expected {_RECORD_FIELDS} fields, got {len(fields)}: {line!r}")
        try:
            canonical = CyclicWord.from_string(fields[0])
            presentation.check(canonical)
            homology = tuple(int(h) for h in fields[6].split(","))
            record = cls(
                canonical=canonical,
                word_length=int(fields[1]),
                length=ScalarHP.parse(fields[2], fields[3], precision),
                norm=ScalarHP.parse(fields[4], fields[5], precision),
                homology=homology,
                primitive=fields[7] == "1",
                root_multiplicity=int(fields[8]),
            )
        except ValueError as err:
            raise FormatError(f"Malformed census record {line!r}: {err}") from err

        if (
            record.word_length != len(canonical)
            or len(homology) != presentation.rank
            or fields[7] not in ("0", "1")
            or record.primitive != (record.root_multiplicity == 1)
        ):
            raise FormatError(f"Inconsistent census record: {line!r}")
        return record


def _completeness(
    classes: Iterable[GeodesicClass], bound: int, margin: float
) -> ScalarHP | None:
    """Frontier minimum length over primitive classes of word length ``bound``, less a margin."""
    frontier = [c.length for c in classes if c.word_length == bound and c.primitive]
    if not frontier:
        return None
    shortest = min(frontier, key=lambda scalar: scalar.value)
    with mpmath.workprec(shortest.prec):
        value = shortest.value - mpmath.mpf(repr(margin))
    return ScalarHP(value, shortest.err, shortest.prec)


@dataclass(frozen=True)
class Census:
    """Every conjugacy class of word length at most ``word_length_bound``.

    ``classes`` is sorted by (word length, canonical letters) so censuses built
    in any order or shard layout compare equal.
    """

    classes: tuple[GeodesicClass, ...]
    word_length_bound: int
    completeness: ScalarHP | None
    representation_id: str
    representation_name: str
    genus: int
    precision: int
    safety_margin: float = DEFAULT_SAFETY_MARGIN
    metadata: dict[str, Any] = field(default_factory=dict, compare=False)

    @classmethod
    def build(
        cls,
        classes: Iterable[GeodesicClass],
        word_length_bound: int,
        rep: Representation,
        safety_margin: float = DEFAULT_SAFETY_MARGIN,
        stamp: bool = False,
    ) -> Census:
        """Create a census from unordered classes of one representation."""
        ordered = tuple(sorted(classes, key=lambda c: (c.word_length, c.canonical.letters)))
        metadata: dict[str, Any] = {"tool_version": TOOL_VERSION}
        if stamp:
            metadata["created"] = datetime.now(UTC).isoformat(timespec="seconds")
        return cls(
            classes=ordered,
            word_length_bound=word_length_bound,
            completeness=_completeness(ordered, word_length_bound, safety_margin),
            representation_id=rep.id,
            representation_name=rep.name,
            genus=rep.presentation.genus,
            precision=rep.precision,
            safety_margin=safety_margin,
            metadata=metadata,
        )

    def __len__(self) -> int:
        return len(self.classes)

    @property
    def presentation(self) -> Presentation:
        """Presentation of the surface group."""
        return Presentation(self.genus)

    @cached_property
    def by_canonical(self) -> dict[CyclicWord, GeodesicClass]:
        """Classes keyed by canonical word."""
        return {c.canonical: c for c in self.classes}

    @cached_property
    def lengths(self) -> np.ndarray:
        """Geodesic lengths as float64."""
        return np.array([float(c.length) for c in self.classes], dtype=np.float64)

    @cached_property
    def length_errors(self) -> np.ndarray:
        """Error bounds of the lengths as float64."""
        return np.array([float(c.length.err) for c in self.classes], dtype=np.float64)

    @cached_property
    def homology(self) -> np.ndarray:
        """Homology vectors as an (n, 2g) integer array."""
        if not self.classes:
            return np.zeros((0, 2 * self.genus), dtype=np.int64)
        return np.array([c.homology for c in self.classes], dtype=np.int64)

    @cached_property
    def primitive(self) -> np.ndarray:
        """Boolean mask of the primitive classes."""
        return np.array([c.primitive for c in self.classes], dtype=bool)

    @cached_property
    def word_lengths(self) -> np.ndarray:
        """Word lengths as an integer array."""
        return np.array([c.word_length for c in self.classes], dtype=np.int64)

    def counts_by_word_length(self) -> dict[int, int]:
        """Number of classes for each word length."""
        return dict(sorted(Counter(c.word_length for c in self.classes).items()))


def _measure(word: Word, rep: Representation) -> LengthNorm:
    """Length and norm of a word, retrying once at doubled precision."""
    try:
        measured = length_of(word_to_matrix(word, rep))
    except PrecisionExhausted:
        _LOGGER.warning(
            "Precision exhausted for %s at %d bits, retrying at %d bits",
            word,
            rep.precision,
            2 * rep.precision,
        )
        measured = length_of(word_to_matrix(word, rep.with_precision(2 * rep.precision)))
    return LengthNorm(
        _settle(measured.length, rep.precision), _settle(measured.norm, rep.precision)
    )


def _settle(scalar: ScalarHP, precision: int) -> ScalarHP:
    """Quantize to the stored decimal digits at the census precision."""
    quantized = scalar.quantized()
    return ScalarHP.parse(quantized.format_value(), quantized.format_error(), precision)


def make_class(canonical: CyclicWord, rep: Representation) -> GeodesicClass:
    """Build the census record of a canonical cyclic word."""
    _, multiplicity = primitive_root(canonical)
    measured = _measure(canonical.as_word(), rep)
    return GeodesicClass(
        canonical=canonical,
        word_length=len(canonical),
        length=measured.length,
        norm=measured.norm,
        homology=abelianize(canonical, rep.presentation.genus),
        primitive=multiplicity == 1,
        root_multiplicity=multiplicity,
    )


def _canonical_words(
    presentation: Presentation, bound: int, shard: int, shard_count: int
) -> list[CyclicWord]:
    """Depth-first search for canonical cyclic words of length at most ``bound``.

    A canonical word starts with its least letter, is cyclically reduced and
    has no linear relator run longer than 2g, which prunes the search.
    """
    half = presentation.half
    forward_successor, backward_successor = (c.successor for c in presentation.cycles)
    size = presentation.alphabet_size
    found: list[CyclicWord] = []

    def extend(letters: list[int], runs: list[tuple[int, int]]) -> None:
        n = len(letters)
        if letters[-1] != letters[0] ^ 1:
            candidate = CyclicWord(tuple(letters))
            if canonicalize(candidate, presentation) == candidate:
                found.append(candidate)
        if n == bound:
            return
        first, last = letters[0], letters[-1]
        last_forward, last_backward = runs[-1]
        for code in range(first, size):
            if code == last ^ 1:
                continue
            forward = last_forward + 1 if forward_successor[last] == code else 1
            backward = last_backward + 1 if backward_successor[last] == code else 1
            if forward > half or backward > half:
                continue
            letters.append(code)
            runs.append((forward, backward))
            extend(letters, runs)
            letters.pop()
            runs.pop()

    for first in range(size):
        if first % shard_count != shard or bound < 1:
            continue
        _LOGGER.debug("Searching words starting with letter code %d", first)
        extend([first], [(1, 1)])
    return found


def enumerate_census(
    rep: Representation,
    word_length_bound: int,
    *,
    shard: int = 0,
    shard_count: int = 1,
    safety_margin: float = DEFAULT_SAFETY_MARGIN,
    stamp: bool = False,
) -> Census:
    """Enumerate every conjugacy class of word length at most ``word_length_bound``.

    Args:
        rep: Validated matrix representation
        word_length_bound: Largest word length L; 0 gives an empty census
        shard: Index of this shard, selecting first letters with code % shard_count == shard
        shard_count: Number of shards
        safety_margin: Subtracted from the frontier minimum to give the completeness length
        stamp: Record a creation timestamp in the metadata

    Returns:
        The census; merging all shards gives the unsharded census

    Raises:
        ValueError: If the bound is negative or the shard arguments are inconsistent
        PrecisionExhausted: If a length stays undecidable after one precision doubling
    """
    if word_length_bound < 0:
        raise ValueError(f"Word length bound must be non-negative, got {word_length_bound}")
    if shard_count < 1 or not 0 <= shard < shard_count:
        raise ValueError(f"Invalid shard {shard} of {shard_count}")

    words = _canonical_words(rep.presentation, word_length_bound, shard, shard_count)
    _LOGGER.debug(
        "Shard %d/%d found %d canonical words up to length %d",
        shard,
        shard_count,
        len(words),
        word_length_bound,
    )
    classes = []
    for canonical in words:
        try:
            classes.append(make_class(canonical, rep))
        except NotHyperbolic as err:
            # Every nontrivial element of a cocompact group is hyperbolic
            raise PrecisionExhausted(f"Class {canonical} measured as non-hyperbolic") from err
    return Census.build(classes, word_length_bound, rep, safety_margin, stamp)


def completeness_length(census: Census) -> ScalarHP:
    """Return the length below which the census holds every primitive class.

    Raises:
        EmptyCensus: If the census has no class at its frontier
    """
    if census.completeness is None:
        raise EmptyCensus("Census has no classes at its word-length frontier")
    return census.completeness


def merge(first: Census, second: Census) -> Census:
    """Union two censuses of the same representation.

    Raises:
        IncompatibleCensus: If representation, precision or safety margin differ
    """
    if (first.representation_id, first.precision, first.genus) != (
        second.representation_id,
        second.precision,
        second.genus,
    ):
        raise IncompatibleCensus(
            f"Cannot merge census of {first.representation_id} at {first.precision} bits "
            f"with {second.representation_id} at {second.precision} bits"
        )
    if first.safety_margin != second.safety_margin:
        raise IncompatibleCensus(
            f"Safety margins differ: {first.safety_margin} and {second.safety_margin}"
        )

    union = dict(second.by_canonical)
    union.update(first.by_canonical)
    bound = max(first.word_length_bound, second.word_length_bound)
    ordered = tuple(sorted(union.values(), key=lambda c: (c.word_length, c.canonical.letters)))
    return Census(
        classes=ordered,
        word_length_bound=bound,
        completeness=_completeness(ordered, bound, first.safety_margin),
        representation_id=first.representation_id,
        representation_name=first.representation_name,
        genus=first.genus,
        precision=first.precision,
        safety_margin=first.safety_margin,
        metadata={**second.metadata, **first.metadata},
    )


def _header(census: Census) -> dict[str, Any]:
    completeness = census.completeness
    header: dict[str, Any] = {
        "format_version": FORMAT_VERSION,
        "representation_id": census.representation_id,
        "representation": census.representation_name,
        "genus": census.genus,
        "precision": census.precision,
        "word_length_bound": census.word_length_bound,
        "safety_margin": census.safety_margin,
        "completeness": None
        if completeness is None
        else [completeness.format_value(), completeness.format_error()],
        "class_count": len(census.classes),
    }
    header.update(census.metadata)
    return header


def save(census: Census, path: Path) -> None:
    """Write the census as a JSON header line followed by one record per line."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [json.dumps(_header(census), sort_keys=True)]
    lines.extend(c.to_record() for c in census.classes)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    _LOGGER.debug("Saved %d classes to %s", len(census.classes), path)


def load(path: Path, representation_id: str | None = None) -> Census:
    """Read a census written by ``save``.

    Args:
        path: Census file
        representation_id: When given, the id the census must carry

    Raises:
        FormatError: On unreadable, truncated or mismatched files
    """
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as err:
        raise FormatError(f"Cannot read census file {path}: {err}") from err

    lines = text.splitlines()
    if not lines or not text.endswith("\n"):
        raise FormatError(f"Census file {path} is truncated")
    try:
        header = json.loads(lines[0])
        version = header["format_version"]
        census_id = header["representation_id"]
        genus = int(header["genus"])
        precision = int(header["precision"])
        expected_count = int(header["class_count"])
    except (ValueError, KeyError, TypeError) as err:
        raise FormatError(f"Invalid census header in {path}: {err}") from err

    if version != FORMAT_VERSION:
        raise FormatError(f"Census format version {version} is not {FORMAT_VERSION}")
    if representation_id is not None and census_id != representation_id:
        raise FormatError(
            f"Census {path} belongs to representation {census_id}, not {representation_id}"
        )
    if len(lines) - 1 != expected_count:
        raise FormatError(
            f"Census {path} is truncated: {len(lines) - 1} of {expected_count} records"
        )

    presentation = Presentation(genus)
    classes = tuple(GeodesicClass.from_record(line, presentation, precision) for line in lines[1:])
    completeness = header.get("completeness")
    metadata = {"tool_version": header.get("tool_version", TOOL_VERSION)}
    if "created" in header:
        metadata["created"] = header["created"]
    census = Census(
        classes=classes,
        word_length_bound=int(header["word_length_bound"]),
        completeness=None
        if completeness is None
        else ScalarHP.parse(completeness[0], completeness[1], precision),
        representation_id=census_id,
        representation_name=header.get("representation", ""),
        genus=genus,
        precision=precision,
        safety_margin=float(header.get("safety_margin", DEFAULT_SAFETY_MARGIN)),
        metadata=metadata,
    )
    if len(census.by_canonical) != len(classes):
        raise FormatError(f"Census {path} contains duplicate classes")
    _LOGGER.debug("Loaded %d classes from %s", len(classes), path)
    return census


def brute_conjugacy_oracle(u: Word, v: Word, rep: Representation, radius: int) -> bool:
    """Decide conjugacy by searching conjugators of length at most ``radius``.

    Returns True when some g in the ball makes g u g^-1 v^-1 Dehn-reduce to the
    empty word. A False answer is only as strong as the radius.
    """
    if radius > ORACLE_MAX_RADIUS:
        raise ValueError(f"Oracle radius {radius} exceeds {ORACLE_MAX_RADIUS}")
    presentation = rep.presentation
    target = v.inverse()
    for conjugator in ball(presentation, radius):
        candidate = free_reduce(conjugator * u * conjugator.inverse() * target)
        if not dehn_reduce(candidate, presentation).letters:
            return True
    return False


def oracle_classes(
    rep: Representation, word_length_bound: int, radius: int
) -> list[tuple[int, HomologyVector]]:
    """Conjugacy orbits of cyclically reduced words, computed by the brute-force oracle.

    Words are bucketed by homology and geodesic length, both conjugacy
    invariants, before the oracle compares them. Each orbit is reported as
    (shortest word length, homology).
    """
    genus = rep.presentation.genus
    orbits: dict[tuple[HomologyVector, float], list[list[Word]]] = {}
    for length in range(1, word_length_bound + 1):
        for cyclic in cyclically_reduced_words(rep.presentation, length):
            word = cyclic.as_word()
            key = (abelianize(word, genus), round(float(_measure(word, rep).length), 9))
            bucket = orbits.setdefault(key, [])
            for orbit in bucket:
                if brute_conjugacy_oracle(orbit[0], word, rep, radius):
                    orbit.append(word)
                    break
            else:
                bucket.append([word])

    return sorted(
        (min(len(word) for word in orbit), key[0])
        for key, bucket in orbits.items()
        for orbit in bucket
    )
