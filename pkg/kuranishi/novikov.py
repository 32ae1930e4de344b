"""Truncated universal Novikov ring with exact rational energies and polynomial coefficients."""

import math
import re
import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

from sympy.polys.domains import QQ
from sympy.polys.rings import PolyElement, PolyRing, ring

from .errors import CutoffExceededError, CutoffMismatchError, KuranishiError, ValuationError

logger = logging.getLogger(__name__)

Coefficient = Union[Fraction, PolyElement]
Term = Tuple[Fraction, int, Coefficient]
Number = Union[int, Fraction]

_FRACTION_PATTERN = re.compile(r"^-?\d+(?:/\d+)?$")
_TERM_PATTERN = re.compile(
    r"([+-]?)(\d+(?:/\d+)?)(?:\*T\^\((-?\d+(?:/\d+)?)\))?(?:\*e\^(-?\d+))?"
)


def as_fraction(value: Union[int, str, Fraction]) -> Fraction:
    """
    Convert an int, Fraction or decimal-free "p/q" string to a Fraction.

    Args:
        value: The value to convert

    Returns:
        Fraction: The exact rational value
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise KuranishiError(f"Not a rational: {value!r}")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str) and _FRACTION_PATTERN.match(value.strip()):
        _, _, denominator = value.strip().partition("/")
        if denominator and int(denominator) == 0:
            raise KuranishiError(f"Zero denominator in {value!r}")
        return Fraction(value.strip())
    raise KuranishiError(f"Not an exact rational: {value!r}")


def _lift(value: Fraction, poly_ring: PolyRing) -> PolyElement:
    return poly_ring.ground_new(poly_ring.domain(value.numerator, value.denominator))


def _coeff_add(a: Coefficient, b: Coefficient) -> Coefficient:
    if isinstance(a, Fraction) and isinstance(b, Fraction):
        return a + b
    if isinstance(a, Fraction):
        a = _lift(a, b.ring)
    elif isinstance(b, Fraction):
        b = _lift(b, a.ring)
    return a + b


def _coeff_mul(a: Coefficient, b: Coefficient) -> Coefficient:
    if isinstance(a, Fraction) and isinstance(b, Fraction):
        return a * b
    if isinstance(a, Fraction):
        a = _lift(a, b.ring)
    elif isinstance(b, Fraction):
        b = _lift(b, a.ring)
    return a * b


def _domain_to_fraction(value) -> Fraction:
    return Fraction(int(value.numerator), int(value.denominator))


def evaluate_coefficient(coeff: Coefficient, values: Mapping[str, Fraction]) -> Fraction:
    """Substitute rational values for every deformation variable of a coefficient."""
    if isinstance(coeff, Fraction):
        return coeff
    names = [str(symbol) for symbol in coeff.ring.symbols]
    missing = [name for name in names if name not in values]
    total = Fraction(0)
    for monom, c in coeff.terms():
        term = _domain_to_fraction(c)
        for name, power in zip(names, monom):
            if power:
                if name in missing:
                    raise KuranishiError(f"No value supplied for variable {name}")
                term *= Fraction(values[name]) ** power
        total += term
    return total


class NovikovScalar:
    """
    An element of the Novikov ring truncated at energy E.

    Terms are keyed by (lambda, e_power); terms with lambda >= E and zero
    coefficients are dropped on construction, so equal values have equal
    term tuples.
    """

    __slots__ = ("_terms", "_cutoff")

    def __init__(self, terms: Union[Mapping[Tuple[Fraction, int], Coefficient], Iterable[Term]],
                 cutoff: Union[int, str, Fraction]):
        self._cutoff = as_fraction(cutoff)
        if self._cutoff <= 0:
            raise KuranishiError(f"Energy cutoff must be positive, got {self._cutoff}")
        items = terms.items() if isinstance(terms, Mapping) else (
            ((lam, n), c) for lam, n, c in terms
        )
        merged: Dict[Tuple[Fraction, int], Coefficient] = {}
        for (lam, n), coeff in items:
            lam = as_fraction(lam)
            if lam < 0:
                raise ValuationError(f"negative energy exponent {lam}")
            if lam >= self._cutoff:
                continue
            if isinstance(coeff, int):
                coeff = Fraction(coeff)
            key = (lam, int(n))
            merged[key] = _coeff_add(merged[key], coeff) if key in merged else coeff
        self._terms = tuple(
            (lam, n, c) for (lam, n), c in sorted(merged.items(), key=lambda kv: kv[0]) if c
        )

    # construction helpers

    @classmethod
    def zero(cls, cutoff) -> "NovikovScalar":
        return cls((), cutoff)

    @classmethod
    def constant(cls, value: Union[Coefficient, int], cutoff) -> "NovikovScalar":
        return cls({(Fraction(0), 0): value}, cutoff)

    @classmethod
    def monomial(cls, coeff: Union[Coefficient, int], lam, e_power: int, cutoff) -> "NovikovScalar":
        return cls({(as_fraction(lam), e_power): coeff}, cutoff)

    # accessors

    @property
    def cutoff(self) -> Fraction:
        return self._cutoff

    @property
    def terms(self) -> Tuple[Term, ...]:
        return self._terms

    def is_zero(self) -> bool:
        return not self._terms

    def __bool__(self) -> bool:
        return bool(self._terms)

    def is_symbolic(self) -> bool:
        return any(not isinstance(c, Fraction) for _, _, c in self._terms)

    def component(self, lam, e_power: int = 0) -> Coefficient:
        lam = as_fraction(lam)
        for t_lam, t_n, c in self._terms:
            if t_lam == lam and t_n == e_power:
                return c
        return Fraction(0)

    def levels(self) -> List[Tuple[Fraction, int]]:
        return [(lam, n) for lam, n, _ in self._terms]

    # ring structure

    def _coerce(self, other) -> "NovikovScalar":
        if isinstance(other, NovikovScalar):
            if other._cutoff != self._cutoff:
                raise CutoffMismatchError(
                    f"Cutoff mismatch: {self._cutoff} vs {other._cutoff}"
                )
            return other
        if isinstance(other, (int, Fraction, PolyElement)):
            return NovikovScalar.constant(other, self._cutoff)
        return NotImplemented

    def __add__(self, other) -> "NovikovScalar":
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        merged: Dict[Tuple[Fraction, int], Coefficient] = {
            (lam, n): c for lam, n, c in self._terms
        }
        for lam, n, c in other._terms:
            key = (lam, n)
            merged[key] = _coeff_add(merged[key], c) if key in merged else c
        return NovikovScalar(merged, self._cutoff)

    __radd__ = __add__

    def __neg__(self) -> "NovikovScalar":
        return NovikovScalar([(lam, n, -c) for lam, n, c in self._terms], self._cutoff)

    def __sub__(self, other) -> "NovikovScalar":
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other) -> "NovikovScalar":
        return (-self) + other

    def __mul__(self, other) -> "NovikovScalar":
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        merged: Dict[Tuple[Fraction, int], Coefficient] = {}
        for lam_a, n_a, c_a in self._terms:
            for lam_b, n_b, c_b in other._terms:
                lam = lam_a + lam_b
                if lam >= self._cutoff:
                    # terms are sorted by energy, the rest of this row is truncated too
                    break
                key = (lam, n_a + n_b)
                product = _coeff_mul(c_a, c_b)
                merged[key] = _coeff_add(merged[key], product) if key in merged else product
        return NovikovScalar(merged, self._cutoff)

    __rmul__ = __mul__

    def __pow__(self, exponent: int) -> "NovikovScalar":
        result = NovikovScalar.constant(1, self._cutoff)
        for _ in range(exponent):
            result = result * self
        return result

    def __eq__(self, other) -> bool:
        try:
            other = self._coerce(other)
        except CutoffMismatchError:
            return False
        if other is NotImplemented:
            return NotImplemented
        return (self - other).is_zero()

    __hash__ = None

    # filtration

    def valuation(self) -> Union[Fraction, float]:
        """Minimal energy over nonzero terms; +inf for zero."""
        if not self._terms:
            return math.inf
        return self._terms[0][0]

    def is_plus(self) -> bool:
        """True iff every term has strictly positive energy (maximal ideal)."""
        return all(lam > 0 for lam, _, _ in self._terms)

    def leading_term(self) -> Term:
        """Lexicographically minimal term: energy first, then e-power."""
        if not self._terms:
            raise ValuationError("The zero scalar has no leading term")
        return self._terms[0]

    def truncate(self, cutoff) -> "NovikovScalar":
        cutoff = as_fraction(cutoff)
        if cutoff > self._cutoff:
            raise CutoffMismatchError(f"Cannot raise cutoff from {self._cutoff} to {cutoff}")
        return NovikovScalar(self._terms, cutoff)

    def with_cutoff(self, cutoff) -> "NovikovScalar":
        """
        Reinterpret under another cutoff.

        Raises:
            CutoffExceededError: If a nonzero term would be dropped; use
                ``truncate`` for deliberate truncation
        """
        cutoff = as_fraction(cutoff)
        lost = [lam for lam, _, _ in self._terms if lam >= cutoff]
        if lost:
            raise CutoffExceededError(
                f"Cutoff {cutoff} would drop terms at energies {', '.join(str(lam) for lam in lost)}"
            )
        return NovikovScalar(self._terms, cutoff)

    def substitute(self, values: Mapping[str, Fraction]) -> "NovikovScalar":
        return NovikovScalar(
            [(lam, n, evaluate_coefficient(c, values)) for lam, n, c in self._terms],
            self._cutoff,
        )

    # text form

    def render(self) -> str:
        if not self._terms:
            return "0"
        pieces: List[str] = []
        for index, (lam, n, c) in enumerate(self._terms):
            if isinstance(c, Fraction):
                sign = "-" if c < 0 else "+"
                body = str(abs(c))
            else:
                sign, body = "+", f"({c})"
            if lam:
                body += f"*T^({lam})"
            if n:
                body += f"*e^{n}"
            if index == 0:
                pieces.append(body if sign == "+" else f"-{body}")
            else:
                pieces.append(f" {sign} {body}")
        return "".join(pieces)

    def __str__(self) -> str:
        return self.render()

    def __repr__(self) -> str:
        return f"NovikovScalar({self.render()!r}, cutoff={self._cutoff})"

    @classmethod
    def parse(cls, text: str, cutoff) -> "NovikovScalar":
        """
        Parse the rendering produced by render() for numeric scalars.

        Args:
            text: Terms like "2*T^(1/2)*e^-1 - 3"
            cutoff: Energy cutoff of the result

        Returns:
            NovikovScalar: The parsed value

        Raises:
            ValuationError: A negative energy exponent was supplied
            KuranishiError: The text is malformed
        """
        compact = re.sub(r"\s+", "", text)
        if compact in ("", "0"):
            return cls.zero(cutoff)
        terms: List[Term] = []
        position = 0
        while position < len(compact):
            match = _TERM_PATTERN.match(compact, position)
            if not match or match.end() == position:
                raise KuranishiError(f"Malformed Novikov scalar {text!r} at offset {position}")
            sign, coeff, lam, e_power = match.groups()
            if position > 0 and not sign:
                raise KuranishiError(f"Missing sign between terms in {text!r}")
            energy = as_fraction(lam) if lam is not None else Fraction(0)
            if energy < 0:
                raise ValuationError("negative energy exponent")
            value = as_fraction(coeff) * (-1 if sign == "-" else 1)
            terms.append((energy, int(e_power) if e_power is not None else 0, value))
            position = match.end()
        return cls(terms, cutoff)


@dataclass(frozen=True)
class DeformationVariable:
    """Formal coordinate multiplying one basis direction of a formal element."""

    name: str
    assigned_degree: int = 1


def deformation_ring(variables: Sequence[DeformationVariable]) -> PolyRing:
    """
    Build the polynomial coefficient ring QQ[variables].

    Args:
        variables: Deformation variables with unique names

    Returns:
        PolyRing: Sparse polynomial ring over QQ
    """
    names = [variable.name for variable in variables]
    if len(set(names)) != len(names):
        raise KuranishiError(f"Deformation variable names must be unique: {names}")
    if not names:
        raise KuranishiError("At least one deformation variable is required")
    poly_ring = ring(",".join(names), QQ)[0]
    logger.debug(f"Built deformation ring over {names}")
    return poly_ring


def generator(poly_ring: PolyRing, name: str) -> PolyElement:
    for symbol, gen in zip(poly_ring.symbols, poly_ring.gens):
        if str(symbol) == name:
            return gen
    raise KuranishiError(f"Variable {name} is not a generator of {poly_ring}")


def nov_add(a: NovikovScalar, b: NovikovScalar) -> NovikovScalar:
    return a + b


def nov_mul(a: NovikovScalar, b: NovikovScalar) -> NovikovScalar:
    return a * b


def valuation(a: NovikovScalar) -> Union[Fraction, float]:
    return a.valuation()


def is_plus(a: NovikovScalar) -> bool:
    return a.is_plus()


def leading_term(a: NovikovScalar) -> Term:
    return a.leading_term()
