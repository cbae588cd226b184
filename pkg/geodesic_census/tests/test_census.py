"""Tests for census enumeration, persistence and merging."""

from __future__ import annotations

import dataclasses
import itertools
import json
from collections import defaultdict
from functools import reduce
from pathlib import Path

import mpmath
import pytest

from ..census import (
    Census,
    GeodesicClass,
    brute_conjugacy_oracle,
    completeness_length,
    enumerate_census,
    load,
    merge,
    oracle_classes,
    save,
)
from ..const import FORMAT_VERSION, TOOL_VERSION
from ..exceptions import EmptyCensus, FormatError, IncompatibleCensus
from ..hyperbolic_geometry import Representation
from ..surface_group import CyclicWord, Word, canonicalize
from .conftest import BOLZA_SYSTOLE, create_geodesic_class, create_mock_census

with mpmath.workprec(128):
    SYSTOLE = 2 * mpmath.acosh(1 + mpmath.sqrt(2))


def conjugate_after_rotation(
    first: CyclicWord, second: CyclicWord, rep: Representation, radius: int
) -> bool:
    """Run the oracle on every pair of rotations, which covers rotation conjugators."""
    return any(
        brute_conjugacy_oracle(u.as_word(), v.as_word(), rep, radius)
        for u in first.rotations()
        for v in second.rotations()
    )


class TestEnumeration:
    """Tests for enumerate_census."""

    def test_empty(self, bolza: Representation):
        """Test that word length 0 gives an empty census."""
        census = enumerate_census(bolza, 0)

        assert len(census) == 0
        assert census.completeness is None

    def test_generators(self, bolza: Representation):
        """Test that word length 1 gives the eight generator classes."""
        census = enumerate_census(bolza, 1)

        assert len(census) == 8
        assert sorted(str(c.canonical) for c in census.classes) == sorted(
            ["a1", "A1", "b1", "B1", "a2", "A2", "b2", "B2"]
        )
        for record in census.classes:
            assert abs(record.length.value - SYSTOLE) < mpmath.mpf("1e-25")
            assert record.primitive

    def test_matches_oracle(self, bolza: Representation, bolza_census: Census):
        """Test class counts, word lengths and homology against the brute-force oracle."""
        observed = sorted((c.word_length, c.homology) for c in bolza_census.classes)
        assert observed == oracle_classes(bolza, 3, radius=3)

    def test_canonical_fixed_points(self, bolza_census: Census):
        """Test that every stored word is its own canonical form."""
        presentation = bolza_census.presentation
        for record in bolza_census.classes:
            assert canonicalize(record.canonical, presentation) == record.canonical

    def test_iterates(self, bolza_census: Census):
        """Test that squares are kept as non-primitive classes."""
        square = bolza_census.by_canonical[CyclicWord.from_string("a1a1")]

        assert not square.primitive
        assert square.root_multiplicity == 2
        assert abs(float(square.length) - 2 * BOLZA_SYSTOLE) < 1e-12
        assert square.homology == (2, 0, 0, 0)

    def test_sorted(self, bolza_census: Census):
        """Test that classes are ordered by word length then letters."""
        keys = [(c.word_length, c.canonical.letters) for c in bolza_census.classes]
        assert keys == sorted(keys)

    def test_arrays(self, bolza_census: Census):
        """Test the cached numpy views."""
        count = len(bolza_census)

        assert bolza_census.homology.shape == (count, 4)
        assert bolza_census.lengths.shape == (count,)
        assert int(bolza_census.primitive.sum()) == sum(c.primitive for c in bolza_census.classes)
        assert sum(bolza_census.counts_by_word_length().values()) == count

    def test_lengths_grow_with_word_length(self, bolza_census: Census):
        """Test that no class is shorter than the systole."""
        assert bolza_census.lengths.min() >= BOLZA_SYSTOLE - 1e-12

    def test_shards_merge_to_full(self, bolza: Representation, bolza_census: Census):
        """Test that merging all shards gives the unsharded census."""
        shards = [enumerate_census(bolza, 3, shard=i, shard_count=3) for i in range(3)]
        merged = reduce(merge, shards)

        assert merged == bolza_census
        assert sum(len(shard) for shard in shards) == len(bolza_census)

    def test_negative_bound(self, bolza: Representation):
        """Test that a negative bound is rejected."""
        with pytest.raises(ValueError):
            enumerate_census(bolza, -1)

    def test_invalid_shard(self, bolza: Representation):
        """Test that a shard index must be below the shard count."""
        with pytest.raises(ValueError):
            enumerate_census(bolza, 1, shard=2, shard_count=2)

    def test_stamp(self, bolza: Representation):
        """Test that a timestamp is only recorded on request."""
        assert "created" not in enumerate_census(bolza, 1).metadata
        assert "created" in enumerate_census(bolza, 1, stamp=True).metadata


class TestCompleteness:
    """Tests for the completeness length."""

    def test_systole(self, bolza: Representation):
        """Test that word length 1 is complete up to the systole."""
        value = completeness_length(enumerate_census(bolza, 1))
        assert abs(value.value - SYSTOLE) < mpmath.mpf("1e-25")

    def test_frontier_minimum(self, bolza_census: Census):
        """Test that the completeness length is the shortest primitive frontier class."""
        frontier = [
            float(c.length) for c in bolza_census.classes if c.word_length == 3 and c.primitive
        ]
        assert float(completeness_length(bolza_census)) == pytest.approx(min(frontier))

    def test_safety_margin(self, bolza: Representation):
        """Test that the safety margin is subtracted."""
        census = enumerate_census(bolza, 1, safety_margin=0.5)
        assert float(census.completeness) == pytest.approx(BOLZA_SYSTOLE - 0.5)

    def test_empty(self, bolza: Representation):
        """Test that an empty census has no completeness length."""
        with pytest.raises(EmptyCensus):
            completeness_length(enumerate_census(bolza, 0))


class TestMerge:
    """Tests for merge."""

    def test_idempotent(self, bolza_census: Census):
        """Test that merging a census with itself changes nothing."""
        assert merge(bolza_census, bolza_census) == bolza_census

    def test_prefix(self, bolza: Representation, bolza_census: Census):
        """Test that a shallower census merges into a deeper one."""
        assert merge(enumerate_census(bolza, 2), bolza_census) == bolza_census

    def test_incompatible_representation(self, bolza_census: Census):
        """Test that censuses of different representations do not merge."""
        other = dataclasses.replace(bolza_census, representation_id="ffffffffffffffff")
        with pytest.raises(IncompatibleCensus):
            merge(bolza_census, other)

    def test_incompatible_margin(self, bolza: Representation):
        """Test that different safety margins do not merge."""
        with pytest.raises(IncompatibleCensus):
            merge(enumerate_census(bolza, 1), enumerate_census(bolza, 1, safety_margin=0.5))


class TestPersistence:
    """Tests for save and load."""

    @pytest.fixture
    def saved(self, tmp_path: Path, bolza_census: Census) -> Path:
        """Write the octagon census to a file."""
        path = tmp_path / "bolza.census"
        save(bolza_census, path)
        return path

    def test_round_trip(self, saved: Path, bolza_census: Census):
        """Test that loading a saved census gives it back field for field."""
        loaded = load(saved, bolza_census.representation_id)

        assert loaded == bolza_census
        assert loaded.metadata == {"tool_version": TOOL_VERSION}
        assert [c.length.format_value() for c in loaded.classes] == [
            c.length.format_value() for c in bolza_census.classes
        ]

    def test_header(self, saved: Path, bolza_census: Census):
        """Test the JSON header line."""
        header = json.loads(saved.read_text().splitlines()[0])

        assert header["format_version"] == FORMAT_VERSION
        assert header["class_count"] == len(bolza_census)
        assert header["word_length_bound"] == 3
        assert header["genus"] == 2

    def test_shard_layout_byte_identical(self, tmp_path: Path, bolza: Representation):
        """Test that sharded and unsharded builds write identical files."""
        full = enumerate_census(bolza, 2)
        sharded = reduce(merge, [enumerate_census(bolza, 2, shard=i, shard_count=4) for i in range(4)])
        save(full, tmp_path / "full.census")
        save(sharded, tmp_path / "sharded.census")

        assert (tmp_path / "full.census").read_bytes() == (tmp_path / "sharded.census").read_bytes()

    def test_stamp_round_trip(self, tmp_path: Path, bolza: Representation):
        """Test that the creation time survives a round trip."""
        census = enumerate_census(bolza, 1, stamp=True)
        save(census, tmp_path / "stamped.census")
        assert load(tmp_path / "stamped.census").metadata["created"] == census.metadata["created"]

    def test_synthetic_round_trip(self, tmp_path: Path):
        """Test a census with hand-made records."""
        census = create_mock_census()
        save(census, tmp_path / "mock.census")
        assert load(tmp_path / "mock.census") == census

    def test_missing_file(self, tmp_path: Path):
        """Test that a missing file is a format error."""
        with pytest.raises(FormatError):
            load(tmp_path / "missing.census")

    def test_truncated(self, saved: Path):
        """Test that a dropped record is detected."""
        lines = saved.read_text().splitlines()
        saved.write_text("\n".join(lines[:-1]) + "\n")
        with pytest.raises(FormatError):
            load(saved)

    def test_missing_final_newline(self, saved: Path):
        """Test that a file cut mid-line is detected."""
        saved.write_text(saved.read_text().rstrip("\n"))
        with pytest.raises(FormatError):
            load(saved)

    def test_wrong_representation(self, saved: Path):
        """Test that a census of another representation is refused."""
        with pytest.raises(FormatError):
            load(saved, "ffffffffffffffff")

    def test_wrong_version(self, saved: Path):
        """Test that another format version is refused."""
        lines = saved.read_text().splitlines()
        header = json.loads(lines[0])
        header["format_version"] = FORMAT_VERSION + 1
        saved.write_text("\n".join([json.dumps(header), *lines[1:]]) + "\n")
        with pytest.raises(FormatError):
            load(saved)

    def test_bad_header(self, saved: Path):
        """Test that a header that is not JSON is refused."""
        lines = saved.read_text().splitlines()
        saved.write_text("\n".join(["not json", *lines[1:]]) + "\n")
        with pytest.raises(FormatError):
            load(saved)

    def test_duplicates(self, saved: Path):
        """Test that a repeated class is refused."""
        lines = saved.read_text().splitlines()
        header = json.loads(lines[0])
        header["class_count"] += 1
        saved.write_text("\n".join([json.dumps(header), *lines[1:], lines[1]]) + "\n")
        with pytest.raises(FormatError):
            load(saved)


class TestRecord:
    """Tests for GeodesicClass records."""

    def test_record_fields(self):
        """Test the tab-separated record layout."""
        record = create_geodesic_class("a1b1", 4.0, (1, 0, 1, 0)).to_record()
        fields = record.split("\t")

        assert len(fields) == 9
        assert fields[0] == "a1b1"
        assert fields[1] == "2"
        assert fields[6] == "1,0,1,0"
        assert fields[7:] == ["1", "1"]

    def test_parse(self, bolza_census: Census):
        """Test parsing a record back."""
        original = bolza_census.classes[5]
        parsed = GeodesicClass.from_record(
            original.to_record(), bolza_census.presentation, bolza_census.precision
        )
        assert parsed == original

    @pytest.mark.parametrize(
        "line",
        [
            "a1\t1\t3.0\t0\t20.0\t0\t1,0,0,0\t1",
            "a1\t2\t3.0\t0\t20.0\t0\t1,0,0,0\t1\t1",
            "a1\t1\t3.0\t0\t20.0\t0\t1,0,0\t1\t1",
            "a1\t1\t3.0\t0\t20.0\t0\t1,0,0,0\t0\t1",
            "a3\t1\t3.0\t0\t20.0\t0\t1,0,0,0\t1\t1",
            "a1\t1\tlong\t0\t20.0\t0\t1,0,0,0\t1\t1",
        ],
    )
    def test_malformed(self, bolza_census: Census, line: str):
        """Test that malformed or inconsistent records are refused."""
        with pytest.raises(FormatError):
            GeodesicClass.from_record(line, bolza_census.presentation, 128)


class TestOracle:
    """Tests for the brute-force conjugacy oracle."""

    def test_conjugate(self, bolza: Representation):
        """Test a conjugate found at radius 1."""
        assert brute_conjugacy_oracle(
            Word.from_string("a1"), Word.from_string("b1a1B1"), bolza, radius=1
        )

    def test_not_conjugate(self, bolza: Representation):
        """Test that a generator is not conjugate to its inverse."""
        assert not brute_conjugacy_oracle(
            Word.from_string("a1"), Word.from_string("A1"), bolza, radius=2
        )

    def test_relator_halves(self, bolza: Representation):
        """Test that the two halves of the relator are equal elements."""
        assert brute_conjugacy_oracle(
            Word.from_string("a1b1A1B1"), Word.from_string("b2a2B2A2"), bolza, radius=0
        )

    def test_radius_limit(self, bolza: Representation):
        """Test that the search radius is capped."""
        with pytest.raises(ValueError):
            brute_conjugacy_oracle(Word.from_string("a1"), Word.from_string("a1"), bolza, 9)


class TestOracleAgreement:
    """Tests that canonical classes agree with the brute-force oracle beyond the fixture census."""

    def test_matches_oracle_length_4(self, bolza: Representation):
        """Test class counts, word lengths and homology up to word length 4."""
        census = enumerate_census(bolza, 4)

        observed = sorted((c.word_length, c.homology) for c in census.classes)
        assert observed == oracle_classes(bolza, 4, radius=3)

    def test_distinct_classes_length_6(self, bolza: Representation):
        """Test that classes up to word length 6 sharing length and homology are not conjugate."""
        census = enumerate_census(bolza, 6)
        buckets: defaultdict[tuple, list[CyclicWord]] = defaultdict(list)
        for record in census.classes:
            key = (record.homology, round(float(record.length), 9))
            buckets[key].append(record.canonical)

        for words in buckets.values():
            for first, second in itertools.combinations(words, 2):
                assert not conjugate_after_rotation(first, second, bolza, radius=2), (first, second)

    @pytest.mark.parametrize(
        ("first", "second"),
        [
            ("a1a1B1A1A2b1", "a1a2b2A2A2B2"),
            ("a1B1B1A1b2b1", "B1a2b2b2A2B2"),
        ],
    )
    def test_two_face_conjugates(self, bolza: Representation, first: str, second: str):
        """Test that oracle-conjugate words of length 6 land in one census class."""
        u, v = CyclicWord.from_string(first), CyclicWord.from_string(second)
        assert conjugate_after_rotation(u, v, bolza, radius=1)

        presentation = bolza.presentation
        assert canonicalize(u, presentation) == canonicalize(v, presentation)
