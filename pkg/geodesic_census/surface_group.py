"""Combinatorial algebra of the genus-g surface group.

Letters are small integers. Generator a_i has code 4(i-1), its inverse 4(i-1)+1,
b_i has code 4(i-1)+2 and its inverse 4(i-1)+3, so the natural order of codes is
the shortlex order a1 < A1 < b1 < B1 < a2 < ... and the inverse of a code is
``code ^ 1``. Words print as "a1b1A1B1" with capitals for inverses.
"""

from __future__ import annotations

import logging
import re
from collections import deque
from collections.abc import Iterator, Sequence
from dataclasses import dataclass
from functools import cached_property
from itertools import product
from typing import NamedTuple

import mpmath

from .const import NORM_MAX, NORM_SUM

_LOGGER = logging.getLogger(__name__)

HomologyVector = tuple[int, ...]

_LETTER_RE = re.compile(r"([aAbB])([1-9][0-9]*)")
_KIND_OFFSET = {"a": 0, "A": 1, "b": 2, "B": 3}
_KINDS = "aAbB"


def letter_code(kind: str, index: int) -> int:
    """Return the code of letter ``kind`` (one of a, A, b, B) with 1-based ``index``."""
    return 4 * (index - 1) + _KIND_OFFSET[kind]


def letter_name(code: int) -> str:
    """Return the printed name of a letter code."""
    return f"{_KINDS[code % 4]}{code // 4 + 1}"


def _parse_letters(text: str) -> tuple[int, ...]:
    """Parse a compact word string into letter codes."""
    letters: list[int] = []
    position = 0
    for match in _LETTER_RE.finditer(text):
        if match.start() != position:
            raise ValueError(f"Malformed word string: {text!r}")
        letters.append(letter_code(match.group(1), int(match.group(2))))
        position = match.end()
    if position != len(text):
        raise ValueError(f"Malformed word string: {text!r}")
    return tuple(letters)


@dataclass(frozen=True, slots=True)
class Word:
    """A word in the generators; freely reduced unless stated otherwise."""

    letters: tuple[int, ...] = ()

    @classmethod
    def from_string(cls, text: str) -> Word:
        """Create from the compact string form, e.g. "a1b1A1B1"."""
        return cls(_parse_letters(text))

    def __str__(self) -> str:
        return "".join(letter_name(code) for code in self.letters)

    def __len__(self) -> int:
        return len(self.letters)

    def __mul__(self, other: Word) -> Word:
        return Word(self.letters + other.letters)

    def inverse(self) -> Word:
        """Return the formal inverse."""
        return Word(tuple(code ^ 1 for code in reversed(self.letters)))


@dataclass(frozen=True, slots=True)
class CyclicWord:
    """A cyclically reduced word, interpreted up to rotation."""

    letters: tuple[int, ...] = ()

    @classmethod
    def from_string(cls, text: str) -> CyclicWord:
        """Create from the compact string form."""
        return cls(_parse_letters(text))

    def __str__(self) -> str:
        return "".join(letter_name(code) for code in self.letters)

    def __len__(self) -> int:
        return len(self.letters)

    def as_word(self) -> Word:
        """Return the linear word read from the stored rotation."""
        return Word(self.letters)

    def rotations(self) -> Iterator[CyclicWord]:
        """Yield every rotation, starting with this one."""
        n = len(self.letters)
        for i in range(max(n, 1)):
            yield CyclicWord(self.letters[i:] + self.letters[:i])


@dataclass(frozen=True, slots=True)
class _RelatorCycle:
    """One cyclic relator (R or its inverse) with successor and position tables."""

    letters: tuple[int, ...]
    successor: tuple[int, ...]
    position: tuple[int, ...]

    @classmethod
    def build(cls, letters: tuple[int, ...]) -> _RelatorCycle:
        n = len(letters)
        successor = [0] * n
        position = [0] * n
        for i, code in enumerate(letters):
            successor[code] = letters[(i + 1) % n]
            position[code] = i
        return cls(letters, tuple(successor), tuple(position))

    def inverse_complement(self, start: int, run: int) -> tuple[int, ...]:
        """Return the word equal to the ``run`` relator letters from ``start``.

        The relator reads C[start] ... C[start + n - 1] = 1, so the run equals the
        inverse of the remaining n - run letters.
        """
        n = len(self.letters)
        return tuple(self.letters[(start + j) % n] ^ 1 for j in range(n - 1, run - 1, -1))


@dataclass(frozen=True)
class Presentation:
    """The surface group presentation <a_i, b_i | [a_1,b_1]...[a_g,b_g]>."""

    genus: int

    def __post_init__(self) -> None:
        if self.genus < 2:
            raise ValueError(f"Genus must be at least 2, got {self.genus}")

    @property
    def rank(self) -> int:
        """Rank of the abelianization, 2g."""
        return 2 * self.genus

    @property
    def alphabet_size(self) -> int:
        """Number of letters including inverses, 4g."""
        return 4 * self.genus

    @property
    def half(self) -> int:
        """Half the relator length, 2g."""
        return 2 * self.genus

    @cached_property
    def relator(self) -> Word:
        """The product of commutators [a_1,b_1]...[a_g,b_g]."""
        letters: list[int] = []
        for i in range(self.genus):
            letters.extend((4 * i, 4 * i + 2, 4 * i + 1, 4 * i + 3))
        return Word(tuple(letters))

    @cached_property
    def cycles(self) -> tuple[_RelatorCycle, _RelatorCycle]:
        """The relator and its inverse as cyclic matchers.

        Every ordered letter pair occurs in at most one of them, which is the
        small-cancellation property the reductions rely on.
        """
        return (
            _RelatorCycle.build(self.relator.letters),
            _RelatorCycle.build(self.relator.inverse().letters),
        )

    def check(self, word: Word | CyclicWord) -> None:
        """Raise ValueError when a word uses letters outside this presentation."""
        for code in word.letters:
            if not 0 <= code < self.alphabet_size:
                raise ValueError(
                    f"Letter {letter_name(code)} is not a generator of genus {self.genus}"
                )


def free_reduce(word: Word) -> Word:
    """Cancel adjacent letter-inverse pairs."""
    stack: list[int] = []
    for code in word.letters:
        if stack and stack[-1] == code ^ 1:
            stack.pop()
        else:
            stack.append(code)
    return Word(tuple(stack))


def dehn_reduce(word: Word, presentation: Presentation) -> Word:
    """Run Dehn's algorithm: replace every run of more than half a relator.

    Args:
        word: Word to reduce, freely reduced or not
        presentation: Surface group presentation

    Returns:
        A freely reduced word for the same element with no subword longer
        than 2g that is part of a cyclic rotation of the relator or its inverse
    """
    half = presentation.half
    cycles = presentation.cycles
    stack: list[int] = []
    runs: list[tuple[int, int]] = []
    pending = list(reversed(word.letters))

    while pending:
        code = pending.pop()
        if stack and stack[-1] == code ^ 1:
            stack.pop()
            runs.pop()
            continue

        if stack:
            previous = stack[-1]
            last_forward, last_backward = runs[-1]
            forward = last_forward + 1 if cycles[0].successor[previous] == code else 1
            backward = last_backward + 1 if cycles[1].successor[previous] == code else 1
        else:
            forward = backward = 1
        stack.append(code)
        runs.append((forward, backward))

        for cycle, run in ((cycles[0], forward), (cycles[1], backward)):
            if run > half:
                start = cycle.position[stack[-run]]
                replacement = cycle.inverse_complement(start, run)
                del stack[-run:]
                del runs[-run:]
                # Rescan the replacement against what is left on the stack
                pending.extend(reversed(replacement))
                break

    return Word(tuple(stack))


def _strip_conjugation(letters: Sequence[int]) -> tuple[int, ...]:
    """Remove matching letter-inverse pairs from both ends."""
    i, j = 0, len(letters) - 1
    while i < j and letters[i] == letters[j] ^ 1:
        i += 1
        j -= 1
    return tuple(letters[i : j + 1])


def _cyclic_runs(
    letters: tuple[int, ...], presentation: Presentation
) -> Iterator[tuple[int, int, int]]:
    """Yield (start, cycle index, length) for each maximal cyclic relator run.

    A cyclic word lying entirely along one relator cycle yields a single run of
    length n starting at 0.
    """
    n = len(letters)
    if n == 0:
        return
    for index, cycle in enumerate(presentation.cycles):
        links = [cycle.successor[letters[i]] == letters[(i + 1) % n] for i in range(n)]
        if all(links):
            yield 0, index, n
            continue
        for i in range(n):
            if links[i - 1]:
                continue
            length = 1
            while links[(i + length - 1) % n]:
                length += 1
            yield i, index, length


def _replace_run(
    letters: tuple[int, ...], start: int, cycle: _RelatorCycle, run: int
) -> tuple[int, ...]:
    """Rotate the run to the front and replace its first ``run`` letters."""
    rotated = letters[start:] + letters[:start]
    replacement = cycle.inverse_complement(cycle.position[rotated[0]], run)
    return replacement + rotated[run:]


def _min_rotation(letters: tuple[int, ...]) -> tuple[int, ...]:
    """Return the lexicographically least rotation."""
    if not letters:
        return letters
    return min(letters[i:] + letters[:i] for i in range(len(letters)))


def cyclic_reduce(word: Word, presentation: Presentation) -> CyclicWord:
    """Return a cyclically reduced and cyclically Dehn-reduced conjugate of ``word``.

    Args:
        word: Word to reduce
        presentation: Surface group presentation

    Returns:
        A conjugate with no free cancellation across the wraparound and no
        cyclic run of more than 2g relator letters
    """
    half = presentation.half
    letters = _strip_conjugation(dehn_reduce(word, presentation).letters)

    while letters:
        hit = None
        for start, index, length in _cyclic_runs(letters, presentation):
            if length == len(letters) and length % presentation.alphabet_size == 0:
                # A rotation of a relator power is the identity
                return CyclicWord(())
            if length > half:
                hit = (start, index)
                break
        if hit is None:
            break
        start, index = hit
        replaced = _replace_run(letters, start, presentation.cycles[index], half + 1)
        letters = _strip_conjugation(dehn_reduce(Word(replaced), presentation).letters)

    return CyclicWord(letters)


class _Face(NamedTuple):
    """A relator run of a cyclic word, read as one face of a conjugacy layer."""

    index: int
    start: int
    length: int


def _faces_at(rotated: tuple[int, ...], pos: int, presentation: Presentation) -> Iterator[_Face]:
    """Yield the faces of 2g - 2 to 2g letters starting at ``pos``."""
    half = presentation.half
    for index, cycle in enumerate(presentation.cycles):
        longest = 1
        while (
            pos + longest < len(rotated)
            and longest < half
            and cycle.successor[rotated[pos + longest - 1]] == rotated[pos + longest]
        ):
            longest += 1
        for length in range(half - 2, longest + 1):
            yield _Face(index, cycle.position[rotated[pos]], length)


def _layer_cuts(
    rotated: tuple[int, ...], pos: int, presentation: Presentation
) -> Iterator[tuple[int | _Face, ...]]:
    """Yield every cut of ``rotated[pos:]`` into shared letters and faces."""
    if pos == len(rotated):
        yield ()
        return
    pieces: list[tuple[int | _Face, int]] = [(rotated[pos], 1)]
    pieces.extend((face, face.length) for face in _faces_at(rotated, pos, presentation))
    for piece, width in pieces:
        for rest in _layer_cuts(rotated, pos + width, presentation):
            yield (piece, *rest)


def _layer_images(
    pieces: tuple[int | _Face, ...], presentation: Presentation
) -> Iterator[tuple[int, ...]]:
    """Yield the far side of the layer for each choice of shared side letters.

    Two neighbouring faces may share a side letter when the letter after the
    first face is the inverse of the letter before the second.
    """
    n = presentation.alphabet_size
    cycles = presentation.cycles
    count = len(pieces)
    choices = []
    for j, piece in enumerate(pieces):
        following = pieces[(j + 1) % count]
        if isinstance(piece, _Face) and isinstance(following, _Face):
            after = cycles[piece.index].letters[(piece.start + piece.length) % n]
            before = cycles[following.index].letters[(following.start - 1) % n]
            choices.append((False, True) if after ^ 1 == before else (False,))
        else:
            choices.append((False,))

    for sides in product(*choices):
        letters: list[int] = []
        for j, piece in enumerate(pieces):
            if not isinstance(piece, _Face):
                letters.append(piece)
                continue
            image = cycles[piece.index].inverse_complement(piece.start, piece.length)
            letters.extend(image[int(sides[j - 1]) : len(image) - int(sides[j])])
        yield tuple(letters)


def _layer_swaps(letters: tuple[int, ...], presentation: Presentation) -> Iterator[tuple[int, ...]]:
    """Yield the conjugates reached across one layer of relator faces.

    A rotation is cut into shared letters and faces. Each face is replaced by
    the inverse of the rest of its relator. A single face of exactly 2g letters
    is the plain half relator swap.
    """
    for start in range(len(letters)):
        rotated = letters[start:] + letters[:start]
        for pieces in _layer_cuts(rotated, 0, presentation):
            if any(isinstance(piece, _Face) for piece in pieces):
                yield from _layer_images(pieces, presentation)


def canonicalize(cyclic: CyclicWord, presentation: Presentation) -> CyclicWord:
    """Return the canonical representative of the conjugacy class of ``cyclic``.

    The representative is the shortlex-least word in the closure of the
    rotations under swaps across one layer of relator faces, which include the
    exact-half relator swaps. A swap that lets the word shrink restarts the
    closure from the shorter word. Longer results are dropped.

    Args:
        cyclic: Cyclic word, ideally already cyclically Dehn-reduced
        presentation: Surface group presentation

    Returns:
        The canonical cyclic word; conjugate inputs give identical outputs
    """
    best = _min_rotation(cyclic_reduce(cyclic.as_word(), presentation).letters)
    if not best:
        return CyclicWord(())

    seen = {best}
    queue = deque([best])
    while queue:
        current = queue.popleft()
        for swapped in _layer_swaps(current, presentation):
            reduced = _min_rotation(cyclic_reduce(Word(swapped), presentation).letters)
            if len(reduced) < len(best):
                if not reduced:
                    return CyclicWord(())
                best = reduced
                seen = {best}
                queue = deque([best])
                break
            if len(reduced) == len(best) and reduced not in seen:
                seen.add(reduced)
                queue.append(reduced)

    return CyclicWord(min(seen))


def primitive_root(cyclic: CyclicWord) -> tuple[CyclicWord, int]:
    """Return (root, multiplicity) with ``cyclic`` equal to root**multiplicity."""
    letters = cyclic.letters
    n = len(letters)
    for period in range(1, n + 1):
        if n % period == 0 and letters == letters[:period] * (n // period):
            return CyclicWord(letters[:period]), n // period
    return cyclic, 1


def abelianize(word: Word | CyclicWord, genus: int) -> HomologyVector:
    """Return the exponent sums with respect to (a_1, ..., a_g, b_1, ..., b_g)."""
    vector = [0] * (2 * genus)
    for code in word.letters:
        slot = code // 4 + (genus if code & 2 else 0)
        vector[slot] += -1 if code & 1 else 1
    return tuple(vector)


def homology_norm(vector: Sequence[int], kind: str = NORM_SUM) -> int:
    """Return the norm used for homology windows.

    ``sum`` is the 1-norm and ``max`` the maximum norm.
    """
    if kind == NORM_SUM:
        return sum(abs(v) for v in vector)
    if kind == NORM_MAX:
        return max((abs(v) for v in vector), default=0)
    raise ValueError(f"Unknown norm kind: {kind}")


def eval_character(vector: Sequence[int], eps: Sequence[float]) -> complex:
    """Return exp(2 pi i <vector, eps>)."""
    if len(vector) != len(eps):
        raise ValueError("Homology vector and character parameter differ in length")
    phase = mpmath.fsum(mpmath.mpf(v) * mpmath.mpf(e) for v, e in zip(vector, eps, strict=True))
    phase -= mpmath.floor(phase)
    return complex(mpmath.expjpi(2 * phase))


def freely_reduced_words(presentation: Presentation, length: int) -> Iterator[Word]:
    """Yield every freely reduced word of exactly ``length`` letters in shortlex order."""
    size = presentation.alphabet_size

    def extend(prefix: list[int]) -> Iterator[Word]:
        if len(prefix) == length:
            yield Word(tuple(prefix))
            return
        for code in range(size):
            if prefix and prefix[-1] == code ^ 1:
                continue
            prefix.append(code)
            yield from extend(prefix)
            prefix.pop()

    yield from extend([])


def ball(presentation: Presentation, radius: int) -> Iterator[Word]:
    """Yield every freely reduced word of length at most ``radius``, shortest first."""
    for length in range(radius + 1):
        yield from freely_reduced_words(presentation, length)


def cyclically_reduced_words(presentation: Presentation, length: int) -> Iterator[CyclicWord]:
    """Yield every freely cyclically reduced word of exactly ``length`` letters."""
    for word in freely_reduced_words(presentation, length):
        if length <= 1 or word.letters[0] != word.letters[-1] ^ 1:
            yield CyclicWord(word.letters)
