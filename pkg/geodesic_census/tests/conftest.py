"""Fixtures for geodesic census tests."""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np
import pytest

from ..census import Census, GeodesicClass, enumerate_census
from ..config import Config
from ..hyperbolic_geometry import Representation, ScalarHP, load_preset
from ..surface_group import CyclicWord, Presentation, Word

# 2 arccosh(1 + sqrt 2), the length of every generator of the octagon group
BOLZA_SYSTOLE = 2 * math.acosh(1 + math.sqrt(2))

# (word, length, homology, root multiplicity); homology is the exponent sum of the word
MOCK_CLASSES = (
    ("a1", 3.0, (1, 0, 0, 0), 1),
    ("A1", 3.0, (-1, 0, 0, 0), 1),
    ("b1", 3.2, (0, 0, 1, 0), 1),
    ("a1b1", 4.0, (1, 0, 1, 0), 1),
    ("a1a2", 4.5, (1, 1, 0, 0), 1),
    ("a1b1a2B1", 5.8, (1, 1, 0, 0), 1),
    ("a1b1A1B1a2", 5.0, (0, 1, 0, 0), 1),
    ("a2b2", 5.5, (0, 1, 0, 1), 1),
    ("a1a1", 6.0, (2, 0, 0, 0), 2),
    ("a1b2", 6.2, (1, 0, 0, 1), 1),
)

MOCK_COMPLETENESS = "5.0"

MOCK_REPRESENTATION_ID = "0123456789abcdef"


def create_geodesic_class(
    word: str, length: float, homology: tuple[int, ...], multiplicity: int = 1
) -> GeodesicClass:
    """Create a census record with a chosen length and homology."""
    canonical = CyclicWord.from_string(word)
    # Zero error keeps the records stable under a save and load round trip
    return GeodesicClass(
        canonical=canonical,
        word_length=len(canonical),
        length=ScalarHP.parse(repr(length), "0"),
        norm=ScalarHP.parse(repr(math.exp(length)), "0"),
        homology=homology,
        primitive=multiplicity == 1,
        root_multiplicity=multiplicity,
    )


def create_random_words(
    presentation: Presentation, length: int, count: int, seed: int = 0
) -> list[Word]:
    """Draw freely reduced words of one length with a seeded generator."""
    rng = np.random.default_rng(seed)
    size = presentation.alphabet_size
    words = []
    for _ in range(count):
        letters = [int(rng.integers(size))]
        while len(letters) < length:
            code = int(rng.integers(size))
            if code != letters[-1] ^ 1:
                letters.append(code)
        words.append(Word(tuple(letters)))
    return words


def create_mock_census(classes=MOCK_CLASSES, completeness: str | None = MOCK_COMPLETENESS) -> Census:
    """Create a genus 2 census from (word, length, homology, multiplicity) tuples."""
    records = tuple(
        sorted(
            (create_geodesic_class(*item) for item in classes),
            key=lambda c: (c.word_length, c.canonical.letters),
        )
    )
    return Census(
        classes=records,
        word_length_bound=max((c.word_length for c in records), default=0),
        completeness=None if completeness is None else ScalarHP.from_value(completeness),
        representation_id=MOCK_REPRESENTATION_ID,
        representation_name="synthetic",
        genus=2,
        precision=128,
    )


@pytest.fixture
def mock_census() -> Census:
    """Return the synthetic census."""
    return create_mock_census()


@pytest.fixture(scope="session")
def bolza() -> Representation:
    """Return the validated octagon representation at the default precision."""
    return load_preset("bolza")


@pytest.fixture(scope="session")
def bolza_census(bolza: Representation) -> Census:
    """Return the octagon census up to word length 3."""
    return enumerate_census(bolza, 3)


@pytest.fixture
def mock_config(tmp_path: Path) -> Config:
    """Return a configuration caching into a temporary directory."""
    return Config(cache_dir=tmp_path / "cache", word_length_bound=2)
