"""Tests for the surface group combinatorics."""

from __future__ import annotations

import pytest

from ..const import NORM_MAX, NORM_SUM
from ..surface_group import (
    CyclicWord,
    Presentation,
    Word,
    abelianize,
    ball,
    canonicalize,
    cyclic_reduce,
    cyclically_reduced_words,
    dehn_reduce,
    eval_character,
    free_reduce,
    freely_reduced_words,
    homology_norm,
    letter_code,
    letter_name,
    primitive_root,
)
from .conftest import create_random_words

GENUS_2 = Presentation(2)


class TestWord:
    """Tests for Word and CyclicWord."""

    def test_letter_codes(self):
        """Test the shortlex order a1 < A1 < b1 < B1 < a2."""
        assert [letter_code(kind, 1) for kind in "aAbB"] == [0, 1, 2, 3]
        assert letter_code("a", 2) == 4
        assert letter_name(7) == "B2"

    def test_string_round_trip(self):
        """Test parsing and printing a word."""
        word = Word.from_string("a1b1A1B1")

        assert word.letters == (0, 2, 1, 3)
        assert str(word) == "a1b1A1B1"
        assert len(word) == 4

    @pytest.mark.parametrize("text", ["c1", "a0", "a1x", "1a"])
    def test_malformed_string(self, text: str):
        """Test that malformed word strings are rejected."""
        with pytest.raises(ValueError):
            Word.from_string(text)

    def test_inverse(self):
        """Test the formal inverse reverses and inverts letters."""
        assert str(Word.from_string("a1b2").inverse()) == "B2A1"

    def test_concatenation(self):
        """Test that multiplication concatenates without reducing."""
        assert str(Word.from_string("a1") * Word.from_string("A1b1")) == "a1A1b1"

    def test_rotations(self):
        """Test cyclic rotations."""
        rotations = [str(r) for r in CyclicWord.from_string("a1b1a2").rotations()]
        assert rotations == ["a1b1a2", "b1a2a1", "a2a1b1"]


class TestPresentation:
    """Tests for Presentation."""

    def test_relator(self):
        """Test the product of commutators."""
        assert str(GENUS_2.relator) == "a1b1A1B1a2b2A2B2"
        assert len(Presentation(3).relator) == 12

    def test_genus_too_small(self):
        """Test that genus 1 is rejected."""
        with pytest.raises(ValueError):
            Presentation(1)

    def test_check_foreign_letter(self):
        """Test that letters of a higher genus are rejected."""
        with pytest.raises(ValueError):
            GENUS_2.check(Word.from_string("a3"))

    def test_small_cancellation(self):
        """Test that no ordered letter pair occurs in both relator cycles."""
        forward, backward = GENUS_2.cycles
        for code in range(GENUS_2.alphabet_size):
            assert forward.successor[code] != backward.successor[code]


class TestReduction:
    """Tests for free, Dehn and cyclic reduction."""

    def test_free_reduce(self):
        """Test cancellation of adjacent inverse pairs."""
        assert str(free_reduce(Word.from_string("a1b1B1A1b2"))) == "b2"

    def test_dehn_reduce_relator(self):
        """Test that the relator reduces to the empty word."""
        assert dehn_reduce(GENUS_2.relator, GENUS_2).letters == ()

    def test_dehn_reduce_long_run(self):
        """Test that five relator letters become the inverse of the other three."""
        reduced = dehn_reduce(Word.from_string("a1b1A1B1a2"), GENUS_2)
        assert str(reduced) == "b2a2B2"

    def test_dehn_reduce_inverse_relator(self):
        """Test that a run of the inverse relator is replaced too."""
        word = Word.from_string("b2a2B2A2b1")
        reduced = dehn_reduce(word, GENUS_2)

        assert len(reduced) == 3
        assert abelianize(reduced, 2) == abelianize(word, 2)

    def test_dehn_reduce_keeps_half(self):
        """Test that exactly half a relator is left alone."""
        word = Word.from_string("a1b1A1B1")
        assert dehn_reduce(word, GENUS_2) == word

    def test_abelianize_invariant_under_reduction(self):
        """Test exponent sums are unchanged by Dehn reduction for all words up to length 5."""
        for length in range(6):
            for word in freely_reduced_words(GENUS_2, length):
                assert abelianize(dehn_reduce(word, GENUS_2), 2) == abelianize(word, 2)

    @pytest.mark.parametrize("length", [6, 7, 8])
    def test_abelianize_invariant_sampled(self, length: int):
        """Test exponent sums survive Dehn and cyclic reduction on random longer words."""
        for word in create_random_words(GENUS_2, length, 200, seed=length):
            assert abelianize(dehn_reduce(word, GENUS_2), 2) == abelianize(word, 2)
            assert abelianize(cyclic_reduce(word, GENUS_2), 2) == abelianize(word, 2)

    def test_cyclic_reduce_relator_rotation(self):
        """Test that a rotation of the relator is cyclically trivial."""
        word = Word.from_string("A1B1a2b2A2B2a1b1")
        assert cyclic_reduce(word, GENUS_2).letters == ()

    def test_cyclic_reduce_strips_conjugation(self):
        """Test that a conjugated word loses its conjugator."""
        word = Word.from_string("b2a1b1B2")
        assert str(cyclic_reduce(word, GENUS_2)) == "a1b1"

    def test_cyclic_reduce_wraparound_run(self):
        """Test that a relator run crossing the wraparound is shortened."""
        # Rotation of a1b1A1B1a2 split across the end
        word = Word.from_string("B1a2a1b1A1")
        assert str(cyclic_reduce(word, GENUS_2)) == "a2"


class TestCanonicalize:
    """Tests for canonical conjugacy representatives."""

    def test_rotation_invariance(self):
        """Test that every rotation of every length-3 word has the same canonical form."""
        for cyclic in cyclically_reduced_words(GENUS_2, 3):
            forms = {canonicalize(r, GENUS_2) for r in cyclic.rotations()}
            assert len(forms) == 1

    def test_conjugation_invariance(self):
        """Test invariance under conjugation by every word of length at most 2."""
        for text in ("a1b2", "a1a1B2", "a1b1A1B1a1"):
            cyclic = CyclicWord.from_string(text)
            expected = canonicalize(cyclic, GENUS_2)
            for conjugator in ball(GENUS_2, 2):
                conjugate = free_reduce(conjugator * cyclic.as_word() * conjugator.inverse())
                assert canonicalize(CyclicWord(conjugate.letters), GENUS_2) == expected

    def test_half_relator_swap(self):
        """Test that the two halves of the relator give one canonical form."""
        first = CyclicWord.from_string("a1b1A1B1a1")
        second = CyclicWord.from_string("b2a2B2A2a1")

        assert canonicalize(first, GENUS_2) == canonicalize(second, GENUS_2)

    @pytest.mark.parametrize(
        ("first", "second"),
        [
            ("a1a1B1A1A2b1", "a1a2b2A2A2B2"),
            ("a1B1B1A1b2b1", "B1a2b2b2A2B2"),
        ],
    )
    def test_two_face_layer(self, first: str, second: str):
        """Test conjugates that differ across a ring of two relator faces."""
        assert canonicalize(CyclicWord.from_string(first), GENUS_2) == canonicalize(
            CyclicWord.from_string(second), GENUS_2
        )

    def test_two_face_layer_conjugator(self):
        """Test that the two-face conjugates are related by a single letter."""
        u = Word.from_string("A2b1a1a1B1A1")
        v = Word.from_string("A2B2a1a2b2A2")
        # u = b2 v B2 as group elements
        conjugate = free_reduce(Word.from_string("b2") * v * Word.from_string("B2"))
        assert dehn_reduce(free_reduce(conjugate * u.inverse()), GENUS_2).letters == ()

    @pytest.mark.parametrize("length", [4, 5, 6, 7, 8])
    def test_sampled_invariants(self, length: int):
        """Test idempotence, rotation and conjugation invariance on random words."""
        for word in create_random_words(GENUS_2, length, 25, seed=length):
            cyclic = CyclicWord(word.letters)
            canonical = canonicalize(cyclic, GENUS_2)

            assert len(canonical) <= len(cyclic_reduce(word, GENUS_2))
            assert canonicalize(canonical, GENUS_2) == canonical
            for rotation in cyclic.rotations():
                assert canonicalize(rotation, GENUS_2) == canonical
            for conjugator in ball(GENUS_2, 1):
                conjugate = free_reduce(conjugator * word * conjugator.inverse())
                assert canonicalize(CyclicWord(conjugate.letters), GENUS_2) == canonical

    def test_inverse_not_conjugate(self):
        """Test that a generator and its inverse have different canonical forms."""
        a1 = CyclicWord.from_string("a1")
        assert canonicalize(a1, GENUS_2) != canonicalize(CyclicWord.from_string("A1"), GENUS_2)

    def test_trivial(self):
        """Test that the relator canonicalizes to the empty word."""
        assert canonicalize(CyclicWord(GENUS_2.relator.letters), GENUS_2).letters == ()

    def test_shortlex_least_rotation(self):
        """Test that the canonical form is the least rotation."""
        assert str(canonicalize(CyclicWord.from_string("b1a1"), GENUS_2)) == "a1b1"


class TestPrimitiveRoot:
    """Tests for primitive_root."""

    def test_power(self):
        """Test a proper power."""
        root, multiplicity = primitive_root(CyclicWord.from_string("a1b1a1b1a1b1"))

        assert str(root) == "a1b1"
        assert multiplicity == 3

    def test_primitive(self):
        """Test that a prime-length word that is not a letter power is primitive."""
        cyclic = CyclicWord.from_string("a1a1b1")
        assert primitive_root(cyclic) == (cyclic, 1)

    def test_reconstruction(self):
        """Test root**multiplicity gives back the word for all length-4 words."""
        for cyclic in cyclically_reduced_words(GENUS_2, 4):
            root, multiplicity = primitive_root(cyclic)
            assert root.letters * multiplicity == cyclic.letters


class TestHomology:
    """Tests for abelianization, norms and characters."""

    def test_abelianize(self):
        """Test exponent sums ordered (a1, a2, b1, b2)."""
        assert abelianize(Word.from_string("a1a1B2a2"), 2) == (2, 1, 0, -1)

    def test_commutator_trivial(self):
        """Test that a commutator has zero homology."""
        assert abelianize(Word.from_string("a1b1A1B1"), 2) == (0, 0, 0, 0)

    def test_norms(self):
        """Test the sum and max norms."""
        assert homology_norm((2, -3, 0, 1), NORM_SUM) == 6
        assert homology_norm((2, -3, 0, 1), NORM_MAX) == 3

    def test_unknown_norm(self):
        """Test that an unknown norm kind is rejected."""
        with pytest.raises(ValueError):
            homology_norm((1, 0), "euclid")

    def test_character_integer_parameter(self):
        """Test that an integer character parameter gives exactly 1."""
        assert eval_character((3, -1, 2, 5), (1, 2, -1, 0)) == 1

    def test_character_unit_modulus(self):
        """Test that characters have modulus 1."""
        value = eval_character((1, 2, 0, -1), (0.1, 0.25, 0.3, 0.7))
        assert abs(abs(value) - 1) < 1e-12

    def test_character_half(self):
        """Test the value -1 at a half-integer pairing."""
        assert abs(eval_character((1, 0, 0, 0), (0.5, 0, 0, 0)) + 1) < 1e-12


class TestEnumeration:
    """Tests for word enumeration helpers."""

    @pytest.mark.parametrize("length", [1, 2, 3])
    def test_freely_reduced_count(self, length: int):
        """Test the count 8 * 7^(n-1) in genus 2."""
        assert sum(1 for _ in freely_reduced_words(GENUS_2, length)) == 8 * 7 ** (length - 1)

    def test_shortlex_order(self):
        """Test that words come out in shortlex order."""
        words = [w.letters for w in freely_reduced_words(GENUS_2, 2)]
        assert words == sorted(words)

    def test_ball(self):
        """Test the ball of radius 2."""
        assert sum(1 for _ in ball(GENUS_2, 2)) == 1 + 8 + 56

    def test_cyclically_reduced(self):
        """Test that no cyclically reduced word cancels across the wraparound."""
        for cyclic in cyclically_reduced_words(GENUS_2, 3):
            assert cyclic.letters[0] != cyclic.letters[-1] ^ 1

    def test_cyclically_reduced_count(self):
        """Test the count of cyclically reduced words of length 2."""
        # x y is freely reduced exactly when y x is, so nothing wraps
        assert sum(1 for _ in cyclically_reduced_words(GENUS_2, 2)) == 56
