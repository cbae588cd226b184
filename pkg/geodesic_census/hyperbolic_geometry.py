"""Matrix representations of surface groups in PSL(2, R).

Group combinatorics stay exact; matrices are only used to turn words into
geodesic lengths. Every scalar carries an absolute error bound that is
propagated conservatively through arithmetic.
"""

from __future__ import annotations

import hashlib
import json
import logging
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Any

import mpmath
import voluptuous as vol

from .const import (
    DEFAULT_PRECISION,
    ERROR_DIGITS,
    HYPERBOLICITY_CHECK_LENGTH,
    LENGTH_DIGITS,
    MIN_PRECISION,
    PRESET_BOLZA,
    RELATOR_TOLERANCE,
)
from .exceptions import ConfigError, NotHyperbolic, PrecisionExhausted, ValidationFailed
from .surface_group import Presentation, Word, cyclically_reduced_words, letter_name

_LOGGER = logging.getLogger(__name__)

_DECIMAL = vol.All(str, vol.Length(min=1))

REPRESENTATION_SCHEMA = vol.Schema(
    {
        vol.Optional("name", default="custom"): str,
        vol.Required("genus"): vol.All(int, vol.Range(min=2)),
        vol.Required("generators"): {str: vol.All([_DECIMAL], vol.Length(min=4, max=4))},
    }
)


def _ulp(value: mpmath.mpf, prec: int) -> mpmath.mpf:
    """Bound on the rounding error of one operation producing ``value``."""
    return mpmath.ldexp(abs(value), 1 - prec)


@dataclass(frozen=True, slots=True)
class ScalarHP:
    """A high-precision real with an absolute error bound."""

    value: mpmath.mpf
    err: mpmath.mpf
    prec: int = DEFAULT_PRECISION

    @classmethod
    def from_value(cls, value: Any, prec: int = DEFAULT_PRECISION) -> ScalarHP:
        """Create from a number or decimal string, charging one rounding unit."""
        with mpmath.workprec(prec):
            number = mpmath.mpf(value)
            exact = isinstance(value, int) or (isinstance(value, str) and number == int(number))
            return cls(number, mpmath.mpf(0) if exact else _ulp(number, prec), prec)

    @classmethod
    def parse(cls, value: str, err: str, prec: int = DEFAULT_PRECISION) -> ScalarHP:
        """Create from the decimal strings written by ``format_value``/``format_error``."""
        with mpmath.workprec(prec):
            return cls(mpmath.mpf(value), mpmath.mpf(err), prec)

    @property
    def lower(self) -> mpmath.mpf:
        """Lower end of the error interval."""
        with mpmath.workprec(self.prec):
            return self.value - self.err

    @property
    def upper(self) -> mpmath.mpf:
        """Upper end of the error interval."""
        with mpmath.workprec(self.prec):
            return self.value + self.err

    def __float__(self) -> float:
        return float(self.value)

    def __neg__(self) -> ScalarHP:
        with mpmath.workprec(self.prec):
            return ScalarHP(-self.value, self.err, self.prec)

    def __abs__(self) -> ScalarHP:
        with mpmath.workprec(self.prec):
            return ScalarHP(abs(self.value), self.err, self.prec)

    def __add__(self, other: ScalarHP) -> ScalarHP:
        prec = max(self.prec, other.prec)
        with mpmath.workprec(prec):
            return _add(self, other, prec)

    def __sub__(self, other: ScalarHP) -> ScalarHP:
        return self + (-other)

    def __mul__(self, other: ScalarHP) -> ScalarHP:
        prec = max(self.prec, other.prec)
        with mpmath.workprec(prec):
            return _mul(self, other, prec)

    def quantized(self) -> ScalarHP:
        """Round to the decimal digits stored in census files.

        The error bound grows by the rounding so the interval stays valid, and
        quantizing twice gives the same value.
        """
        with mpmath.workprec(self.prec):
            value = mpmath.mpf(self.format_value())
            shift = abs(value - self.value)
            err = mpmath.mpf(_format_error(self.err + shift, self.prec))
            return ScalarHP(value, err, self.prec)

    def format_value(self) -> str:
        """Return the value as a decimal string of LENGTH_DIGITS significant digits."""
        with mpmath.workprec(self.prec):
            return mpmath.nstr(self.value, LENGTH_DIGITS, strip_zeros=False)

    def format_error(self) -> str:
        """Return the error bound rounded up to ERROR_DIGITS significant digits."""
        return _format_error(self.err, self.prec)


def _format_error(err: mpmath.mpf, prec: int) -> str:
    """Round an error bound up to ERROR_DIGITS digits as "<mantissa>e<exponent>"."""
    with mpmath.workprec(prec):
        if err == 0:
            return "0"
        exponent = int(mpmath.floor(mpmath.log10(err))) - (ERROR_DIGITS - 1)
        ratio = err / mpmath.power(10, exponent)
        nearest = mpmath.nint(ratio)
        # Values read back from a file sit within rounding of an integer mantissa
        if abs(ratio - nearest) <= mpmath.ldexp(ratio, 16 - prec):
            mantissa = int(nearest)
        else:
            mantissa = int(mpmath.ceil(ratio))
        return f"{mantissa}e{exponent}"


def _add(a: ScalarHP, b: ScalarHP, prec: int) -> ScalarHP:
    """Add inside an active working precision."""
    value = a.value + b.value
    return ScalarHP(value, a.err + b.err + _ulp(value, prec), prec)


def _mul(a: ScalarHP, b: ScalarHP, prec: int) -> ScalarHP:
    """Multiply inside an active working precision."""
    value = a.value * b.value
    err = abs(a.value) * b.err + abs(b.value) * a.err + a.err * b.err + _ulp(value, prec)
    return ScalarHP(value, err, prec)


@dataclass(frozen=True, slots=True)
class Mat2:
    """A 2x2 matrix [[a, b], [c, d]] of ScalarHP entries."""

    a: ScalarHP
    b: ScalarHP
    c: ScalarHP
    d: ScalarHP

    @classmethod
    def identity(cls, prec: int = DEFAULT_PRECISION) -> Mat2:
        """Return the identity matrix."""
        one = ScalarHP(mpmath.mpf(1), mpmath.mpf(0), prec)
        zero = ScalarHP(mpmath.mpf(0), mpmath.mpf(0), prec)
        return cls(one, zero, zero, one)

    @classmethod
    def from_values(cls, entries: list[Any], prec: int = DEFAULT_PRECISION) -> Mat2:
        """Create from four numbers or decimal strings in row order."""
        return cls(*(ScalarHP.from_value(entry, prec) for entry in entries))

    @property
    def prec(self) -> int:
        """Working precision of the entries."""
        return self.a.prec

    def __matmul__(self, other: Mat2) -> Mat2:
        prec = max(self.prec, other.prec)
        with mpmath.workprec(prec):
            return Mat2(
                _add(_mul(self.a, other.a, prec), _mul(self.b, other.c, prec), prec),
                _add(_mul(self.a, other.b, prec), _mul(self.b, other.d, prec), prec),
                _add(_mul(self.c, other.a, prec), _mul(self.d, other.c, prec), prec),
                _add(_mul(self.c, other.b, prec), _mul(self.d, other.d, prec), prec),
            )

    def inverse(self) -> Mat2:
        """Return the inverse, assuming determinant 1."""
        return Mat2(self.d, -self.b, -self.c, self.a)

    def trace(self) -> ScalarHP:
        """Return the trace."""
        return self.a + self.d

    def det(self) -> ScalarHP:
        """Return the determinant."""
        return self.a * self.d - self.b * self.c

    def max_error(self) -> mpmath.mpf:
        """Return the largest error bound of the four entries."""
        return max(self.a.err, self.b.err, self.c.err, self.d.err)

    def distance_to_identity(self) -> mpmath.mpf:
        """Return the largest entrywise distance to +I or -I, error bounds included."""
        with mpmath.workprec(self.prec):
            sign = 1 if self.a.value >= 0 else -1
            return max(
                abs(self.a.value - sign) + self.a.err,
                abs(self.b.value) + self.b.err,
                abs(self.c.value) + self.c.err,
                abs(self.d.value - sign) + self.d.err,
            )


@dataclass(frozen=True, slots=True)
class LengthNorm:
    """Geodesic length and norm of a hyperbolic element."""

    length: ScalarHP
    norm: ScalarHP


@dataclass(frozen=True)
class Representation:
    """Images of the generators a_1, b_1, ..., a_g, b_g in SL(2, R).

    ``generators`` holds one matrix per generator in letter-code order, so the
    image of letter code ``x`` is ``generators[x >> 1]`` or its inverse when
    ``x`` is odd.
    """

    presentation: Presentation
    generators: tuple[Mat2, ...]
    name: str
    precision: int = DEFAULT_PRECISION
    source: dict[str, Any] = field(default_factory=dict, compare=False)

    @cached_property
    def id(self) -> str:
        """Stable hash of the representation, independent of working precision."""
        payload = json.dumps(
            {"genus": self.presentation.genus, "name": self.name, "source": self.source},
            sort_keys=True,
            separators=(",", ":"),
        )
        return hashlib.sha256(payload.encode()).hexdigest()[:16]

    @cached_property
    def letter_images(self) -> tuple[Mat2, ...]:
        """Matrix for every letter code, inverses included."""
        images = []
        for code in range(self.presentation.alphabet_size):
            matrix = self.generators[code >> 1]
            images.append(matrix.inverse() if code & 1 else matrix)
        return tuple(images)

    def with_precision(self, precision: int) -> Representation:
        """Rebuild the same representation at another working precision."""
        if precision == self.precision:
            return self
        _LOGGER.debug("Rebuilding %s at %d bits", self.name, precision)
        return _build(self.source, precision)


def word_to_matrix(word: Word, rep: Representation) -> Mat2:
    """Return the product of the generator images along ``word``.

    Args:
        word: Word in the generators of ``rep``
        rep: Matrix representation

    Returns:
        The image matrix; the empty word gives the identity
    """
    images = rep.letter_images
    result = Mat2.identity(rep.precision)
    for code in word.letters:
        result = result @ images[code]
    return result


def length_of(matrix: Mat2) -> LengthNorm:
    """Return the translation length 2 arccosh(|tr|/2) and the norm exp(length).

    Raises:
        NotHyperbolic: If |trace| <= 2
        PrecisionExhausted: If |trace| > 2 but the error bound reaches 2
    """
    trace = abs(matrix.trace())
    prec = trace.prec
    with mpmath.workprec(prec):
        if trace.value <= 2:
            raise NotHyperbolic(f"|trace| = {mpmath.nstr(trace.value, 20)} is not above 2")
        lowest = trace.value - trace.err
        if lowest <= 2:
            raise PrecisionExhausted(
                f"|trace| = {mpmath.nstr(trace.value, 20)} within {mpmath.nstr(trace.err, 3)} "
                f"of 2 at {prec} bits"
            )
        length = 2 * mpmath.acosh(trace.value / 2)
        length_err = trace.err * 2 / mpmath.sqrt(lowest * lowest - 4) + 4 * _ulp(length, prec)
        norm = mpmath.exp(length)
        norm_err = norm * mpmath.expm1(length_err) + 4 * _ulp(norm, prec)
    return LengthNorm(ScalarHP(length, length_err, prec), ScalarHP(norm, norm_err, prec))


def _bolza_generators(precision: int) -> tuple[Mat2, ...]:
    """Build a_1, b_1, a_2, b_2 for the regular-octagon group.

    The four side pairings g_k are conjugates of one hyperbolic translation by
    rotations of angle k pi / 8 and satisfy g0 g1^-1 g2 g3^-1 g0^-1 g1 g2^-1 g3 = 1.
    The basis a_1 = g0 g1^-1, b_1 = g2 g3^-1 g1^-1, a_2 = g2, b_2 = g3^-1
    turns that relation into [a_1, b_1][a_2, b_2].
    """
    with mpmath.workprec(precision + 32):
        c = 1 + mpmath.sqrt(2)
        s = mpmath.sqrt(2 + 2 * mpmath.sqrt(2))
        pairings = []
        for k in range(4):
            theta = k * mpmath.pi / 4
            entries = [
                c + s * mpmath.cos(theta),
                s * mpmath.sin(theta),
                s * mpmath.sin(theta),
                c - s * mpmath.cos(theta),
            ]
            pairings.append(entries)

    g0, g1, g2, g3 = (Mat2.from_values(entries, precision) for entries in pairings)
    return (g0 @ g1.inverse(), g2 @ g3.inverse() @ g1.inverse(), g2, g3.inverse())


def _relator_tolerance(image: Mat2) -> mpmath.mpf:
    """Tolerance for a product that should be +-I.

    The exact product lies inside the entry intervals up to the rounding of
    the generators, so the distance with error bounds stays near twice the
    propagated error; the factor 4 absorbs the generator rounding.
    """
    with mpmath.workprec(image.prec):
        return max(mpmath.mpf(RELATOR_TOLERANCE), 4 * image.max_error())


def _build(source: dict[str, Any], precision: int) -> Representation:
    """Construct a representation from its source description without validating."""
    presentation = Presentation(source["genus"])
    if source.get("preset") == PRESET_BOLZA:
        return Representation(
            presentation, _bolza_generators(precision), PRESET_BOLZA, precision, source
        )

    generators = []
    for index in range(presentation.rank):
        name = letter_name(2 * index)
        generators.append(Mat2.from_values(source["generators"][name], precision))
    return Representation(presentation, tuple(generators), source["name"], precision, source)


def validate_representation(rep: Representation) -> None:
    """Check the load-time invariants of a representation.

    Raises:
        ValidationFailed: If a generator has determinant other than 1, the
            relator is not +-I, or a short cyclically reduced word is not hyperbolic
    """
    for code, matrix in enumerate(rep.generators):
        det = matrix.det()
        with mpmath.workprec(rep.precision):
            det_off = abs(det.value - 1) > max(mpmath.mpf(RELATOR_TOLERANCE), 4 * det.err)
        if det_off:
            raise ValidationFailed(f"Generator {letter_name(2 * code)} does not have determinant 1")

    relator_image = word_to_matrix(rep.presentation.relator, rep)
    distance = relator_image.distance_to_identity()
    if distance > _relator_tolerance(relator_image):
        raise ValidationFailed(
            f"Relator maps {mpmath.nstr(distance, 5)} away from +-I in {rep.name}"
        )

    for length in range(1, HYPERBOLICITY_CHECK_LENGTH + 1):
        for cyclic in cyclically_reduced_words(rep.presentation, length):
            try:
                length_of(word_to_matrix(cyclic.as_word(), rep))
            except (NotHyperbolic, PrecisionExhausted) as err:
                raise ValidationFailed(f"Word {cyclic} is not hyperbolic: {err}") from err

    _LOGGER.debug("Representation %s (%s) passed validation", rep.name, rep.id)


def load_representation_file(path: Path, precision: int = DEFAULT_PRECISION) -> Representation:
    """Load and validate a representation from a JSON file.

    Raises:
        ConfigError: If the file cannot be read or does not match the schema
        ValidationFailed: If the matrices fail the load-time checks
    """
    try:
        data = REPRESENTATION_SCHEMA(json.loads(Path(path).read_text(encoding="utf-8")))
    except (OSError, ValueError) as err:
        _LOGGER.error("Cannot read representation file %s: %s", path, err)
        raise ConfigError(f"Cannot read representation file {path}: {err}") from err
    except vol.Invalid as err:
        raise ConfigError(f"Invalid representation file {path}: {err}") from err

    presentation = Presentation(data["genus"])
    expected = {letter_name(2 * index) for index in range(presentation.rank)}
    if set(data["generators"]) != expected:
        raise ConfigError(
            f"Representation file {path} must define exactly {', '.join(sorted(expected))}"
        )
    source = {"genus": data["genus"], "name": data["name"], "generators": data["generators"]}
    rep = _build(source, precision)
    validate_representation(rep)
    return rep


def load_preset(name: str, precision: int = DEFAULT_PRECISION) -> Representation:
    """Load a named preset or a representation file, validated.

    Args:
        name: "bolza" or the path of a representation JSON file
        precision: Working precision in bits

    Returns:
        The validated representation

    Raises:
        ConfigError: If the precision is too low or the file is unusable
        ValidationFailed: If the representation fails its load-time checks
    """
    if precision < MIN_PRECISION:
        raise ConfigError(f"Precision must be at least {MIN_PRECISION} bits, got {precision}")

    if name == PRESET_BOLZA:
        rep = _build({"preset": PRESET_BOLZA, "genus": 2}, precision)
        validate_representation(rep)
        return rep

    return load_representation_file(Path(name), precision)
