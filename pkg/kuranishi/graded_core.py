"""Graded modules, sparse elements and multilinear maps, with the insertion and rotation signs."""

import logging
from fractions import Fraction
from typing import Dict, Iterable, Iterator, List, Mapping, Optional, Sequence, Tuple, Union

from .errors import ArityError, DegreeError, KuranishiError, LabelError
from .novikov import Coefficient, NovikovScalar, as_fraction

logger = logging.getLogger(__name__)

Label = str
MultiIndex = Tuple[Label, ...]


def ainfty_insertion_sign(degrees: Sequence[int], i: int) -> int:
    """
    Sign of inserting an inner operation at position i of the relation.

    Args:
        degrees: Degrees of the inputs x_1, ..., x_k
        i: 1-based position of the first inner input

    Returns:
        int: (-1)^(deg x_1 + ... + deg x_{i-1} + i - 1)
    """
    if not 1 <= i <= len(degrees) + 1:
        raise KuranishiError(f"Insertion position {i} out of range 1..{len(degrees) + 1}")
    exponent = sum(degrees[: i - 1]) + i - 1
    return -1 if exponent % 2 else 1


def cyclic_rotation_sign(deg_x0: int, degrees_rest: Sequence[int]) -> int:
    """Return (-1)^((deg x_0 + 1)(deg x_1 + ... + deg x_k + k))."""
    exponent = (deg_x0 + 1) * (sum(degrees_rest) + len(degrees_rest))
    return -1 if exponent % 2 else 1


class GradedModule:
    """
    A finite-rank graded module with an ordered, globally unique basis.

    The basis order is the declaration order; it fixes every canonical
    ordering used in reports.
    """

    def __init__(self, basis: Iterable[Tuple[Label, int]]):
        self._basis: Tuple[Tuple[Label, int], ...] = tuple((str(l), int(d)) for l, d in basis)
        self._degree: Dict[Label, int] = {}
        self._index: Dict[Label, int] = {}
        for position, (label, degree) in enumerate(self._basis):
            if label in self._degree:
                raise LabelError(f"Duplicate basis label {label!r}")
            self._degree[label] = degree
            self._index[label] = position

    @classmethod
    def from_degrees(cls, labels_by_degree: Mapping[int, Sequence[Label]]) -> "GradedModule":
        return cls(
            (label, degree)
            for degree in sorted(labels_by_degree)
            for label in labels_by_degree[degree]
        )

    @property
    def basis(self) -> Tuple[Tuple[Label, int], ...]:
        return self._basis

    @property
    def labels(self) -> Tuple[Label, ...]:
        return tuple(label for label, _ in self._basis)

    @property
    def rank(self) -> int:
        return len(self._basis)

    @property
    def degree_ranks(self) -> Dict[int, int]:
        ranks: Dict[int, int] = {}
        for _, degree in self._basis:
            ranks[degree] = ranks.get(degree, 0) + 1
        return dict(sorted(ranks.items()))

    def degree(self, label: Label) -> int:
        try:
            return self._degree[label]
        except KeyError:
            raise LabelError(f"Unknown basis label {label!r}") from None

    def index(self, label: Label) -> int:
        try:
            return self._index[label]
        except KeyError:
            raise LabelError(f"Unknown basis label {label!r}") from None

    def __contains__(self, label: Label) -> bool:
        return label in self._degree

    def labels_in_degree(self, degree: int) -> Tuple[Label, ...]:
        return tuple(label for label, d in self._basis if d == degree)

    def sort_key(self, labels: MultiIndex) -> Tuple[int, ...]:
        return tuple(self._index[label] for label in labels)

    def __eq__(self, other) -> bool:
        return isinstance(other, GradedModule) and self._basis == other._basis

    def __hash__(self) -> int:
        return hash(self._basis)

    def __repr__(self) -> str:
        return f"GradedModule({self.degree_ranks})"


class Element:
    """A sparse element of a graded module with Novikov coefficients."""

    __slots__ = ("module", "cutoff", "_coefficients")

    def __init__(self, module: GradedModule, coefficients: Mapping[Label, NovikovScalar], cutoff):
        self.module = module
        self.cutoff = as_fraction(cutoff)
        cleaned: Dict[Label, NovikovScalar] = {}
        for label, scalar in coefficients.items():
            module.degree(label)
            if not isinstance(scalar, NovikovScalar):
                scalar = NovikovScalar.constant(scalar, self.cutoff)
            if scalar.cutoff > self.cutoff:
                scalar = scalar.truncate(self.cutoff)
            elif scalar.cutoff < self.cutoff:
                scalar = scalar.with_cutoff(self.cutoff)
            if scalar:
                cleaned[label] = scalar
        self._coefficients = dict(sorted(cleaned.items(), key=lambda kv: module.index(kv[0])))

    @classmethod
    def zero(cls, module: GradedModule, cutoff) -> "Element":
        return cls(module, {}, cutoff)

    @classmethod
    def basis_vector(cls, module: GradedModule, label: Label, cutoff,
                     scalar: Optional[NovikovScalar] = None) -> "Element":
        value = scalar if scalar is not None else NovikovScalar.constant(1, cutoff)
        return cls(module, {label: value}, cutoff)

    @property
    def coefficients(self) -> Dict[Label, NovikovScalar]:
        return dict(self._coefficients)

    def items(self) -> Iterator[Tuple[Label, NovikovScalar]]:
        return iter(self._coefficients.items())

    def support(self) -> Tuple[Label, ...]:
        return tuple(self._coefficients)

    def coefficient(self, label: Label) -> NovikovScalar:
        return self._coefficients.get(label, NovikovScalar.zero(self.cutoff))

    def is_zero(self) -> bool:
        return not self._coefficients

    def __bool__(self) -> bool:
        return bool(self._coefficients)

    def degree(self) -> Optional[int]:
        """Common degree of a homogeneous element; None if zero or inhomogeneous."""
        degrees = {self.module.degree(label) for label in self._coefficients}
        return degrees.pop() if len(degrees) == 1 else None

    def is_homogeneous(self, degree: int) -> bool:
        return all(self.module.degree(label) == degree for label in self._coefficients)

    def is_plus(self) -> bool:
        return all(scalar.is_plus() for scalar in self._coefficients.values())

    def valuation(self):
        return min((s.valuation() for s in self._coefficients.values()), default=float("inf"))

    def _check(self, other: "Element") -> None:
        if other.module != self.module:
            raise KuranishiError("Elements live in different modules")

    def __add__(self, other: "Element") -> "Element":
        self._check(other)
        merged = dict(self._coefficients)
        for label, scalar in other._coefficients.items():
            merged[label] = merged[label] + scalar if label in merged else scalar
        return Element(self.module, merged, self.cutoff)

    def __neg__(self) -> "Element":
        return Element(self.module, {l: -s for l, s in self._coefficients.items()}, self.cutoff)

    def __sub__(self, other: "Element") -> "Element":
        return self + (-other)

    def scale(self, scalar: Union[NovikovScalar, int, Fraction, Coefficient]) -> "Element":
        return Element(
            self.module, {l: s * scalar for l, s in self._coefficients.items()}, self.cutoff
        )

    def truncate(self, cutoff) -> "Element":
        return Element(
            self.module, {l: s.truncate(cutoff) for l, s in self._coefficients.items()}, cutoff
        )

    def substitute(self, values: Mapping[str, Fraction]) -> "Element":
        return Element(
            self.module, {l: s.substitute(values) for l, s in self._coefficients.items()}, self.cutoff
        )

    def __eq__(self, other) -> bool:
        if not isinstance(other, Element):
            return NotImplemented
        return self.module == other.module and (self - other).is_zero()

    __hash__ = None

    def render(self) -> str:
        if not self._coefficients:
            return "0"
        return " + ".join(f"({scalar.render()})*{label}" for label, scalar in self._coefficients.items())

    def __repr__(self) -> str:
        return f"Element({self.render()})"


class MultilinearMap:
    """
    A sparse multilinear map A^{(x)k} -> A of fixed degree shift.

    Entries map basis multi-indices to output elements; zero outputs are not
    stored.
    """

    def __init__(self, module: GradedModule, arity: int, degree_shift: int,
                 entries: Mapping[MultiIndex, Element], cutoff):
        if arity < 0:
            raise ArityError(f"Arity must be non-negative, got {arity}")
        self.module = module
        self.arity = arity
        self.degree_shift = degree_shift
        self.cutoff = as_fraction(cutoff)
        cleaned: Dict[MultiIndex, Element] = {}
        for inputs, output in entries.items():
            inputs = tuple(inputs)
            if len(inputs) != arity:
                raise ArityError(f"Entry {inputs} does not have arity {arity}")
            if output.cutoff != self.cutoff:
                output = Element(module, output.coefficients, self.cutoff)
            if output.is_zero():
                continue
            expected = sum(module.degree(label) for label in inputs) + degree_shift
            if not output.is_homogeneous(expected):
                raise DegreeError(
                    f"m_{arity}{inputs} has output outside degree {expected}: {output.render()}"
                )
            cleaned[inputs] = output
        self._entries = dict(sorted(cleaned.items(), key=lambda kv: module.sort_key(kv[0])))
        self._by_slot: Optional[Dict[Tuple[int, Label], List[MultiIndex]]] = None

    @classmethod
    def zero(cls, module: GradedModule, arity: int, degree_shift: int, cutoff) -> "MultilinearMap":
        return cls(module, arity, degree_shift, {}, cutoff)

    @property
    def entries(self) -> Dict[MultiIndex, Element]:
        return dict(self._entries)

    def items(self) -> Iterator[Tuple[MultiIndex, Element]]:
        return iter(self._entries.items())

    def entry(self, inputs: MultiIndex) -> Element:
        return self._entries.get(tuple(inputs), Element.zero(self.module, self.cutoff))

    def is_zero(self) -> bool:
        return not self._entries

    def __len__(self) -> int:
        return len(self._entries)

    def entries_with(self, slot: int, label: Label) -> List[MultiIndex]:
        """Input tuples whose 0-based slot holds the given label."""
        if self._by_slot is None:
            index: Dict[Tuple[int, Label], List[MultiIndex]] = {}
            for inputs in self._entries:
                for position, item in enumerate(inputs):
                    index.setdefault((position, item), []).append(inputs)
            self._by_slot = index
        return self._by_slot.get((slot, label), [])

    def __eq__(self, other) -> bool:
        if not isinstance(other, MultilinearMap):
            return NotImplemented
        if (self.arity, self.degree_shift, self.module) != (other.arity, other.degree_shift, other.module):
            return False
        keys = set(self._entries) | set(other._entries)
        return all(self.entry(k) == other.entry(k) for k in keys)

    __hash__ = None

    def __repr__(self) -> str:
        return f"MultilinearMap(arity={self.arity}, entries={len(self._entries)})"


def apply_multilinear(m: MultilinearMap, args: Sequence[Element]) -> Element:
    """
    Evaluate a sparse multilinear map on homogeneous or general arguments.

    The scalar ring is even, so scalars move past inputs without sign.

    Args:
        m: The map to apply
        args: Exactly m.arity elements of m.module

    Returns:
        Element: The multilinear expansion over stored entries
    """
    if len(args) != m.arity:
        raise ArityError(f"Map of arity {m.arity} applied to {len(args)} arguments")
    result: Dict[Label, NovikovScalar] = {}
    if m.arity == 0:
        return m.entry(())
    supports = [arg.coefficients for arg in args]
    if any(not support for support in supports):
        return Element.zero(m.module, m.cutoff)
    for inputs, output in m.items():
        scalar: Optional[NovikovScalar] = None
        for position, label in enumerate(inputs):
            factor = supports[position].get(label)
            if factor is None:
                scalar = None
                break
            scalar = factor if scalar is None else scalar * factor
            if not scalar:
                break
        if not scalar:
            continue
        for out_label, out_scalar in output.items():
            contribution = out_scalar * scalar
            result[out_label] = result[out_label] + contribution if out_label in result else contribution
    return Element(m.module, result, m.cutoff)


def power_terms(m: MultilinearMap, x: Element) -> Element:
    """m(x, ..., x) with the same element in every slot."""
    return apply_multilinear(m, [x] * m.arity)
