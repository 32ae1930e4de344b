import json
from fractions import Fraction

import pytest

from kuranishi.cli import Options, run
from kuranishi.errors import CutoffExceededError, SpecError
from kuranishi.spec_file import SpecFile, parse_spec, serialize_spec

from .support import FIXTURES, element, read_fixture

FIXTURE_NAMES = sorted(path.stem for path in FIXTURES.glob("*.json"))


def _mutated(name, mutate):
    doc = json.loads(read_fixture(name))
    mutate(doc)
    return json.dumps(doc, indent=2)


def _position(text, token):
    offset = text.find(token)
    line = text.count("\n", 0, offset) + 1
    column = offset - (text.rfind("\n", 0, offset) + 1) + 1
    return line, column


@pytest.mark.parametrize("name", FIXTURE_NAMES)
def test_fixture_serializes_back_to_its_text(name):
    text = read_fixture(name)
    assert serialize_spec(parse_spec(text)) == text


def test_fixture_set_is_complete():
    assert {"zero", "uv_toy", "exterior2", "definite", "hodge", "cayley", "lattice"} <= set(FIXTURE_NAMES)


def test_uv_toy_contents():
    spec = parse_spec(read_fixture("uv_toy"))
    assert spec.energy_cutoff == 3
    assert spec.arity_cutoff == 6
    S = spec.structure()
    assert not S.is_strict()
    assert S.curvature() == element(S.module, v="1*T^(1)")
    assert spec.element_names() == ["b"]
    assert spec.element("b") == element(S.module, u="1*T^(1/2)")
    assert not spec.has_pairing()


def test_pairing_section():
    spec = parse_spec(read_fixture("exterior2"))
    assert spec.pairing().n == 2
    assert spec.pairing().entry("a1", "a2") == -1


def test_structure_survives_serialization(torus):
    spec = SpecFile.from_structure(torus.S, torus.Q)
    reparsed = parse_spec(serialize_spec(spec))
    assert reparsed == spec
    assert reparsed.structure() == torus.S
    assert reparsed.pairing() == torus.Q


def test_with_cutoffs_overrides_ring():
    spec = parse_spec(read_fixture("uv_toy")).with_cutoffs(4, Fraction(2))
    assert spec.arity_cutoff == 4
    assert spec.structure().cutoff == 2


def test_missing_element_and_geometry():
    spec = parse_spec(read_fixture("zero"))
    with pytest.raises(SpecError, match="no element"):
        spec.element("b")
    with pytest.raises(SpecError, match="no lattice"):
        spec.lattice()
    with pytest.raises(SpecError, match="no pairing"):
        spec.pairing()


def test_empty_basis():
    text = _mutated("zero", lambda doc: doc["module"].update(basis=[]))
    with pytest.raises(SpecError, match="no basis"):
        parse_spec(text)


def test_negative_energy_exponent():
    text = _mutated("uv_toy", lambda doc: doc["elements"]["b"].update(u="1*T^(-1/2)"))
    with pytest.raises(SpecError, match="negative energy exponent") as info:
        parse_spec(text)
    assert (info.value.line, info.value.column) == _position(text, '"1*T^(-1/2)"')


def test_duplicate_label():
    text = _mutated("zero", lambda doc: doc["module"]["basis"].append({"label": "v", "degree": 3}))
    with pytest.raises(SpecError, match="duplicate label") as info:
        parse_spec(text)
    assert info.value.line > 1


def test_dangling_label_points_at_its_use():
    text = _mutated("uv_toy", lambda doc: doc["ops"][1].update(inputs=["u", "w"]))
    with pytest.raises(SpecError, match="dangling reference to label 'w'") as info:
        parse_spec(text)
    assert (info.value.line, info.value.column) == _position(text, '"w"')


def test_decimal_cutoff_is_rejected():
    text = _mutated("zero", lambda doc: doc["ring"].update(energy_cutoff="2.5"))
    with pytest.raises(SpecError, match="exact rational"):
        parse_spec(text)


def test_decimal_energy_is_rejected():
    text = _mutated("uv_toy", lambda doc: doc["elements"]["b"].update(u="1*T^(0.5)"))
    with pytest.raises(SpecError):
        parse_spec(text)


@pytest.mark.parametrize("mutate, message", [
    (lambda doc: doc.update(extras={}), "unknown section"),
    (lambda doc: doc.update(format_version=2), "format_version"),
    (lambda doc: doc["ring"].update(energy_cutoff="0"), "positive"),
    (lambda doc: doc["ring"].update(arity_cutoff=1), "arity 2 outside"),
    (lambda doc: doc["ops"][1]["output"].update(u="1"), "outside degree"),
    (lambda doc: doc["ops"].append(doc["ops"][1]), "duplicate op entry"),
    (lambda doc: doc["ops"][1].update(inputs=["u"]), "inputs but arity"),
    (lambda doc: doc.update(geometry={"torsion": []}), "unknown geometry entry"),
])
def test_malformed_documents(mutate, message):
    with pytest.raises(SpecError, match=message):
        parse_spec(_mutated("uv_toy", mutate))


def test_invalid_json_reports_position():
    with pytest.raises(SpecError, match="invalid JSON") as info:
        parse_spec('{\n  "format_version": 1,\n  oops\n}')
    assert info.value.line == 3


def test_non_text_input():
    with pytest.raises(SpecError):
        parse_spec(b"{}")


def test_oversized_input():
    with pytest.raises(SpecError):
        parse_spec(" " * (2 * 1024 * 1024))


@pytest.mark.parametrize("name, mutate, message", [
    ("zero", lambda doc: doc["ring"].update(energy_cutoff="1/0"), "zero denominator"),
    ("exterior2", lambda doc: doc["pairing"]["entries"][0].update(value="3/0"), "zero denominator"),
    ("uv_toy", lambda doc: doc["elements"]["b"].update(u="1*T^(1/0)"), "malformed Novikov scalar"),
    ("hodge", lambda doc: doc["geometry"].update(metric=[["1", "0"], ["0", "1"]]), "4x4"),
    ("hodge", lambda doc: doc["geometry"]["metric"][2].pop(), "4x4"),
    ("hodge", lambda doc: doc["geometry"]["form"].pop(), "6 entries"),
    ("cayley", lambda doc: doc["geometry"]["plane"]["vectors"].pop(), "4 vectors"),
    ("cayley", lambda doc: doc["geometry"]["plane"]["vectors"][0].append("0"), "4 vectors"),
    ("lattice", lambda doc: doc["geometry"]["lattice"][1].append(0), "square"),
    ("lattice", lambda doc: doc["geometry"].update(lattice=[]), "square"),
])
def test_malformed_values_are_input_errors(name, mutate, message):
    text = _mutated(name, mutate)
    with pytest.raises(SpecError, match=message):
        parse_spec(text)
    assert run("validate", text, Options()).exit_code == 2


@pytest.mark.parametrize("arity, energy", [(7, None), (None, Fraction(4)), (None, Fraction(7, 2))])
def test_cutoffs_cannot_be_raised(arity, energy):
    spec = parse_spec(read_fixture("uv_toy"))
    with pytest.raises(CutoffExceededError):
        spec.with_cutoffs(arity, energy)
