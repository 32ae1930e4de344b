"""The JSON spec-file format: located parse errors, canonical serialisation and library objects."""

import json
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple

from .ainfty import AInftyStructure
from .calibrated import FourPlane, IntersectionForm, Metric4, TwoForm
from .cyclic import CyclicPairing, CyclicStructure
from .errors import CutoffExceededError, KuranishiError, SpecError, ValuationError
from .graded_core import Element, GradedModule, Label, MultilinearMap
from .guards.guard_config import InputValidator, safe_log
from .guards.middleware import validate_input
from .novikov import NovikovScalar

logger = logging.getLogger(__name__)

FORMAT_VERSION = 1
SECTIONS = ("format_version", "ring", "module", "ops", "pairing", "elements", "geometry")

Terms = Tuple[Tuple[Label, NovikovScalar], ...]


@dataclass(frozen=True)
class OpEntry:
    """One structure constant m_k(inputs) = output."""

    arity: int
    inputs: Tuple[Label, ...]
    output: Terms


@dataclass(frozen=True)
class PairingEntry:
    left: Label
    right: Label
    value: Fraction


@dataclass(frozen=True)
class Geometry:
    """Optional linear-algebra inputs for the hodge, cayley and lattice commands."""

    metric: Optional[Tuple[Tuple[Fraction, ...], ...]] = None
    form: Optional[Tuple[Fraction, ...]] = None
    plane_vectors: Optional[Tuple[Tuple[Fraction, ...], ...]] = None
    plane_orientation: int = 1
    lattice: Optional[Tuple[Tuple[int, ...], ...]] = None

    def is_empty(self) -> bool:
        return self.metric is None and self.form is None and self.plane_vectors is None and self.lattice is None


@dataclass(frozen=True)
class SpecFile:
    """A parsed spec document; equality is structural, so parse-serialize-parse is the identity."""

    energy_cutoff: Fraction
    arity_cutoff: int
    basis: Tuple[Tuple[Label, int], ...]
    ops: Tuple[OpEntry, ...] = ()
    pairing_n: Optional[int] = None
    pairing_entries: Tuple[PairingEntry, ...] = ()
    elements: Tuple[Tuple[str, Terms], ...] = ()
    geometry: Geometry = field(default_factory=Geometry)

    def module(self) -> GradedModule:
        return GradedModule(self.basis)

    def structure(self) -> AInftyStructure:
        """Assemble the A-infinity structure m_0..m_K from the op entries."""
        module = self.module()
        by_arity: Dict[int, Dict[Tuple[Label, ...], Element]] = {}
        for entry in self.ops:
            by_arity.setdefault(entry.arity, {})[entry.inputs] = Element(
                module, dict(entry.output), self.energy_cutoff
            )
        ops = {
            k: MultilinearMap(module, k, 2 - k, entries, self.energy_cutoff)
            for k, entries in by_arity.items()
        }
        return AInftyStructure(module, ops, self.arity_cutoff, self.energy_cutoff)

    def has_pairing(self) -> bool:
        return self.pairing_n is not None

    def pairing(self) -> CyclicPairing:
        if self.pairing_n is None:
            raise SpecError("spec has no pairing section", 1, 1)
        entries = {(e.left, e.right): e.value for e in self.pairing_entries}
        return CyclicPairing(self.module(), self.pairing_n, entries)

    def cyclic(self, name: str = "spec") -> CyclicStructure:
        return CyclicStructure(self.structure(), self.pairing(), name)

    def element(self, name: str) -> Element:
        for element_name, terms in self.elements:
            if element_name == name:
                return Element(self.module(), dict(terms), self.energy_cutoff)
        raise SpecError(f"spec has no element named {name!r}", 1, 1)

    def element_names(self) -> List[str]:
        return [name for name, _ in self.elements]

    def metric(self) -> Metric4:
        if self.geometry.metric is None:
            return Metric4.identity()
        return Metric4(self.geometry.metric)

    def two_form(self) -> TwoForm:
        if self.geometry.form is None:
            raise SpecError("geometry section has no form", 1, 1)
        return TwoForm(self.geometry.form)

    def plane(self) -> FourPlane:
        if self.geometry.plane_vectors is None:
            raise SpecError("geometry section has no plane", 1, 1)
        return FourPlane(self.geometry.plane_vectors, self.geometry.plane_orientation)

    def lattice(self) -> IntersectionForm:
        if self.geometry.lattice is None:
            raise SpecError("geometry section has no lattice", 1, 1)
        return IntersectionForm(self.geometry.lattice)

    def with_cutoffs(self, arity_cutoff: Optional[int] = None, energy_cutoff=None) -> "SpecFile":
        """
        The same document at lower cutoffs.

        Raises:
            CutoffExceededError: If either cutoff is above the document's own
        """
        if energy_cutoff is not None and Fraction(energy_cutoff) > self.energy_cutoff:
            raise CutoffExceededError(
                f"Energy cutoff {energy_cutoff} exceeds the spec file's {self.energy_cutoff}"
            )
        if arity_cutoff is not None and int(arity_cutoff) > self.arity_cutoff:
            raise CutoffExceededError(
                f"Arity cutoff {arity_cutoff} exceeds the spec file's {self.arity_cutoff}"
            )
        return SpecFile(
            Fraction(energy_cutoff) if energy_cutoff is not None else self.energy_cutoff,
            int(arity_cutoff) if arity_cutoff is not None else self.arity_cutoff,
            self.basis, self.ops, self.pairing_n, self.pairing_entries, self.elements, self.geometry,
        )

    @classmethod
    def from_structure(cls, S: AInftyStructure, Q: Optional[CyclicPairing] = None,
                       elements: Optional[Mapping[str, Element]] = None) -> "SpecFile":
        """Spec of an existing structure, with entries in canonical module order."""
        ops = []
        for k in sorted(S.ops):
            for inputs, output in S.op(k).items():
                ops.append(OpEntry(k, tuple(inputs), tuple(output.items())))
        pairing_entries = ()
        if Q is not None:
            pairing_entries = tuple(
                PairingEntry(left, right, Fraction(value))
                for (left, right), value in sorted(
                    Q.entries.items(), key=lambda kv: (S.module.index(kv[0][0]), S.module.index(kv[0][1]))
                )
            )
        return cls(
            S.cutoff,
            S.k_max,
            S.module.basis,
            tuple(ops),
            None if Q is None else Q.n,
            pairing_entries,
            tuple((name, tuple(x.items())) for name, x in (elements or {}).items()),
        )


class _Locator:
    """Maps offending values back to a line and column of the source text."""

    def __init__(self, text: str):
        self.text = text

    def position(self, token: Any) -> Tuple[int, int]:
        needle = json.dumps(token, ensure_ascii=False) if isinstance(token, str) else str(token)
        offset = self.text.find(needle)
        if offset < 0:
            return 1, 1
        line = self.text.count("\n", 0, offset) + 1
        column = offset - (self.text.rfind("\n", 0, offset) + 1) + 1
        return line, column

    def error(self, message: str, token: Any = None) -> SpecError:
        line, column = self.position(token) if token is not None else (1, 1)
        safe_log(f"Spec rejected at {line}:{column}: {message}")
        return SpecError(message, line, column)


def _rational(value: Any, where: _Locator) -> Fraction:
    if not InputValidator.validate_rational(value):
        raise where.error(f"not an exact rational string: {value!r}", value)
    _, _, denominator = value.strip().partition("/")
    if denominator and int(denominator) == 0:
        raise where.error(f"zero denominator in {value!r}", value)
    return Fraction(value.strip())


def _integer(value: Any, where: _Locator, what: str) -> int:
    if not isinstance(value, int) or isinstance(value, bool):
        raise where.error(f"{what} must be an integer, got {value!r}", value)
    return value


def _object(value: Any, where: _Locator, what: str) -> Mapping[str, Any]:
    if not isinstance(value, dict):
        raise where.error(f"{what} must be an object", what)
    return value


def _list(value: Any, where: _Locator, what: str) -> Sequence[Any]:
    if not isinstance(value, list):
        raise where.error(f"{what} must be a list", what)
    return value


def _scalar(text: Any, cutoff: Fraction, where: _Locator) -> NovikovScalar:
    if not isinstance(text, str):
        raise where.error(f"Novikov scalar must be a string, got {text!r}", text)
    try:
        return NovikovScalar.parse(text, cutoff)
    except ValuationError:
        raise where.error("negative energy exponent", text)
    except (KuranishiError, ValueError, ZeroDivisionError) as e:
        raise where.error(f"malformed Novikov scalar {text!r}: {str(e)}", text)


def _terms(value: Any, labels: Mapping[Label, int], cutoff: Fraction, where: _Locator, what: str) -> Terms:
    terms = []
    for label, text in _object(value, where, what).items():
        if label not in labels:
            raise where.error(f"dangling reference to label {label!r}", label)
        terms.append((label, _scalar(text, cutoff, where)))
    return tuple(terms)


def _parse_basis(doc: Mapping[str, Any], where: _Locator) -> Tuple[Tuple[Label, int], ...]:
    module = _object(doc.get("module", {}), where, "module")
    entries = module.get("basis") or []
    if not entries:
        raise where.error("no basis", "module")
    basis = []
    seen = set()
    for entry in _list(entries, where, "basis"):
        entry = _object(entry, where, "basis entry")
        label = entry.get("label")
        if not InputValidator.validate_label(label):
            raise where.error(f"malformed label {label!r}", label)
        if label in seen:
            raise where.error(f"duplicate label {label!r}", label)
        seen.add(label)
        basis.append((label, _integer(entry.get("degree"), where, "degree")))
    if not InputValidator.validate_rank(len(basis)):
        raise where.error(f"module rank {len(basis)} exceeds the configured limit", "basis")
    return tuple(basis)


def _parse_ops(doc: Mapping[str, Any], labels: Mapping[Label, int], cutoff: Fraction,
               arity_cutoff: int, where: _Locator) -> Tuple[OpEntry, ...]:
    ops = []
    seen = set()
    for entry in _list(doc.get("ops", []), where, "ops"):
        entry = _object(entry, where, "op entry")
        arity = _integer(entry.get("arity"), where, "arity")
        if not InputValidator.validate_arity(arity) or arity > arity_cutoff:
            raise where.error(f"arity {arity} outside 0..{arity_cutoff}", "arity")
        inputs = tuple(_list(entry.get("inputs", []), where, "inputs"))
        if len(inputs) != arity:
            raise where.error(f"op has {len(inputs)} inputs but arity {arity}", "inputs")
        for label in inputs:
            if label not in labels:
                raise where.error(f"dangling reference to label {label!r}", label)
        if (arity, inputs) in seen:
            raise where.error(f"duplicate op entry m_{arity}{inputs}", inputs[0] if inputs else "ops")
        seen.add((arity, inputs))
        output = _terms(entry.get("output", {}), labels, cutoff, where, "output")
        expected = sum(labels[label] for label in inputs) + 2 - arity
        for label, scalar in output:
            if scalar and labels[label] != expected:
                raise where.error(f"m_{arity}{inputs} has output {label!r} outside degree {expected}", label)
        ops.append(OpEntry(arity, inputs, output))
    return tuple(ops)


def _parse_pairing(doc: Mapping[str, Any], labels: Mapping[Label, int],
                   where: _Locator) -> Tuple[Optional[int], Tuple[PairingEntry, ...]]:
    if "pairing" not in doc:
        return None, ()
    pairing = _object(doc["pairing"], where, "pairing")
    n = _integer(pairing.get("n"), where, "n")
    entries = []
    for entry in _list(pairing.get("entries", []), where, "entries"):
        entry = _object(entry, where, "pairing entry")
        left, right = entry.get("left"), entry.get("right")
        for label in (left, right):
            if label not in labels:
                raise where.error(f"dangling reference to label {label!r}", label)
        entries.append(PairingEntry(left, right, _rational(entry.get("value"), where)))
    return n, tuple(entries)


def _parse_geometry(doc: Mapping[str, Any], where: _Locator) -> Geometry:
    if "geometry" not in doc:
        return Geometry()
    geometry = _object(doc["geometry"], where, "geometry")
    unknown = set(geometry) - {"metric", "form", "plane", "lattice"}
    if unknown:
        raise where.error(f"unknown geometry entry {sorted(unknown)[0]!r}", sorted(unknown)[0])
    metric = form = vectors = lattice = None
    orientation = 1
    if "metric" in geometry:
        metric = tuple(
            tuple(_rational(v, where) for v in _list(row, where, "metric row"))
            for row in _list(geometry["metric"], where, "metric")
        )
        if len(metric) != 4 or any(len(row) != 4 for row in metric):
            raise where.error("metric must be a 4x4 matrix", "metric")
    if "form" in geometry:
        form = tuple(_rational(v, where) for v in _list(geometry["form"], where, "form"))
        if len(form) != 6:
            raise where.error(f"form must have 6 entries, got {len(form)}", "form")
    if "plane" in geometry:
        plane = _object(geometry["plane"], where, "plane")
        vectors = tuple(
            tuple(_rational(v, where) for v in _list(row, where, "plane vector"))
            for row in _list(plane.get("vectors"), where, "vectors")
        )
        if len(vectors) != 4 or any(len(row) != 8 for row in vectors):
            raise where.error("plane must be 4 vectors with 8 entries each", "vectors")
        orientation = _integer(plane.get("orientation", 1), where, "orientation")
    if "lattice" in geometry:
        lattice = tuple(
            tuple(_integer(v, where, "lattice entry") for v in _list(row, where, "lattice row"))
            for row in _list(geometry["lattice"], where, "lattice")
        )
        if not lattice or any(len(row) != len(lattice) for row in lattice):
            raise where.error("lattice must be a nonempty square matrix", "lattice")
    return Geometry(metric, form, vectors, orientation, lattice)


@validate_input
def parse_spec(text: str) -> SpecFile:
    """
    Parse a spec document.

    Args:
        text: JSON text in format_version 1

    Returns:
        SpecFile: The parsed document

    Raises:
        SpecError: Malformed JSON, unknown sections, duplicate or dangling
            labels, inexact rationals or negative energies, with line and column
    """
    where = _Locator(text)
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise SpecError(f"invalid JSON: {e.msg}", e.lineno, e.colno)
    doc = _object(doc, where, "document")
    unknown = [key for key in doc if key not in SECTIONS]
    if unknown:
        raise where.error(f"unknown section {unknown[0]!r}", unknown[0])
    if doc.get("format_version") != FORMAT_VERSION:
        raise where.error(f"unsupported format_version {doc.get('format_version')!r}", "format_version")

    ring = _object(doc.get("ring"), where, "ring")
    cutoff = _rational(ring.get("energy_cutoff"), where)
    if cutoff <= 0:
        raise where.error("energy cutoff must be positive", ring.get("energy_cutoff"))
    arity_cutoff = _integer(ring.get("arity_cutoff"), where, "arity_cutoff")
    if not InputValidator.validate_arity(arity_cutoff):
        raise where.error(f"arity cutoff {arity_cutoff} exceeds the configured limit", "arity_cutoff")

    basis = _parse_basis(doc, where)
    labels = dict(basis)
    ops = _parse_ops(doc, labels, cutoff, arity_cutoff, where)
    n, pairing_entries = _parse_pairing(doc, labels, where)
    elements = tuple(
        (name, _terms(value, labels, cutoff, where, f"element {name}"))
        for name, value in _object(doc.get("elements", {}), where, "elements").items()
    )
    spec = SpecFile(cutoff, arity_cutoff, basis, ops, n, pairing_entries, elements, _parse_geometry(doc, where))
    logger.debug(f"Parsed spec with rank {len(basis)} and {len(ops)} op entries")
    return spec


def _render_terms(terms: Terms) -> Dict[str, str]:
    return {label: scalar.render() for label, scalar in terms}


def _render_rows(rows) -> List[List[str]]:
    return [[str(v) for v in row] for row in rows]


def serialize_spec(spec: SpecFile) -> str:
    """Canonical text of a spec: sections in fixed order, two-space indent, trailing newline."""
    doc: Dict[str, Any] = {
        "format_version": FORMAT_VERSION,
        "ring": {"energy_cutoff": str(spec.energy_cutoff), "arity_cutoff": spec.arity_cutoff},
        "module": {"basis": [{"label": label, "degree": degree} for label, degree in spec.basis]},
        "ops": [
            {"arity": op.arity, "inputs": list(op.inputs), "output": _render_terms(op.output)}
            for op in spec.ops
        ],
    }
    if spec.pairing_n is not None:
        doc["pairing"] = {
            "n": spec.pairing_n,
            "entries": [{"left": e.left, "right": e.right, "value": str(e.value)} for e in spec.pairing_entries],
        }
    if spec.elements:
        doc["elements"] = {name: _render_terms(terms) for name, terms in spec.elements}
    geometry = spec.geometry
    if not geometry.is_empty():
        section: Dict[str, Any] = {}
        if geometry.metric is not None:
            section["metric"] = _render_rows(geometry.metric)
        if geometry.form is not None:
            section["form"] = [str(v) for v in geometry.form]
        if geometry.plane_vectors is not None:
            section["plane"] = {"vectors": _render_rows(geometry.plane_vectors),
                                "orientation": geometry.plane_orientation}
        if geometry.lattice is not None:
            section["lattice"] = [list(row) for row in geometry.lattice]
        doc["geometry"] = section
    return json.dumps(doc, indent=2, ensure_ascii=False) + "\n"
