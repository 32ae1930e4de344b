from fractions import Fraction

import pytest

from kuranishi.errors import ArityError, DegreeError, KuranishiError, LabelError
from kuranishi.graded_core import (
    Element,
    GradedModule,
    MultilinearMap,
    ainfty_insertion_sign,
    apply_multilinear,
    cyclic_rotation_sign,
    power_terms,
)
from kuranishi.novikov import NovikovScalar

E = 3


@pytest.fixture
def exterior():
    return GradedModule([("1", 0), ("e1", 1), ("e2", 1), ("e12", 2)])


def vec(module, **coeffs):
    return Element(module, {label: NovikovScalar.parse(text, E) for label, text in coeffs.items()}, E)


def test_insertion_sign():
    assert ainfty_insertion_sign([3], 1) == 1
    assert ainfty_insertion_sign([1, 1], 2) == 1
    assert ainfty_insertion_sign([2, 1, 1], 3) == -1
    with pytest.raises(KuranishiError):
        ainfty_insertion_sign([1, 1], 4)


def test_rotation_sign():
    assert cyclic_rotation_sign(1, [1, 1]) == 1
    assert cyclic_rotation_sign(2, [1]) == 1
    assert cyclic_rotation_sign(2, [2]) == -1


def test_module_bookkeeping(exterior):
    assert exterior.rank == 4
    assert exterior.degree_ranks == {0: 1, 1: 2, 2: 1}
    assert exterior.labels_in_degree(1) == ("e1", "e2")
    assert exterior.index("e12") == 3
    assert "e2" in exterior
    with pytest.raises(LabelError):
        exterior.degree("e3")


def test_duplicate_label_rejected():
    with pytest.raises(LabelError):
        GradedModule([("a", 1), ("a", 2)])


def test_from_degrees_orders_by_degree():
    module = GradedModule.from_degrees({2: ["h"], 0: ["1"]})
    assert module.labels == ("1", "h")


def test_element_arithmetic(exterior):
    x = vec(exterior, e1="1*T^(1/2)", e2="-2*T^(1)")
    y = vec(exterior, e1="-1*T^(1/2)")
    total = x + y
    assert total.support() == ("e2",)
    assert (x - x).is_zero()
    assert x.is_homogeneous(1)
    assert x.degree() == 1
    assert x.is_plus()
    assert x.valuation() == Fraction(1, 2)
    assert x.scale(2) == vec(exterior, e1="2*T^(1/2)", e2="-4*T^(1)")


def test_element_truncate_drops_high_energy(exterior):
    x = vec(exterior, e1="1*T^(1/2) + 1*T^(2)")
    assert x.truncate(1) == Element(exterior, {"e1": NovikovScalar.parse("1*T^(1/2)", 1)}, 1)


def test_element_reinterprets_coefficient_cutoffs(exterior):
    lowered = Element(exterior, {"e1": NovikovScalar.parse("1*T^(1/2) + 1*T^(2)", E)}, 1)
    assert lowered == Element(exterior, {"e1": NovikovScalar.parse("1*T^(1/2)", 1)}, 1)
    raised = Element(exterior, {"e1": NovikovScalar.parse("1*T^(1/2)", 1)}, E)
    assert raised == vec(exterior, e1="1*T^(1/2)")


def wedge(module):
    one = NovikovScalar.constant(1, E)
    return MultilinearMap(module, 2, 0, {
        ("e1", "e2"): Element(module, {"e12": one}, E),
        ("e2", "e1"): Element(module, {"e12": -one}, E),
    }, E)


def test_apply_wedge_gives_top_class(exterior):
    m = wedge(exterior)
    result = apply_multilinear(m, [Element.basis_vector(exterior, "e1", E), Element.basis_vector(exterior, "e2", E)])
    assert result == Element.basis_vector(exterior, "e12", E)


def test_apply_on_zero_argument_is_zero(exterior):
    m = wedge(exterior)
    assert apply_multilinear(m, [Element.zero(exterior, E), Element.basis_vector(exterior, "e2", E)]).is_zero()


def test_arity_zero_returns_constant(exterior):
    constant = vec(exterior, e12="1*T^(1)")
    m0 = MultilinearMap(exterior, 0, 2, {(): constant}, E)
    assert apply_multilinear(m0, []) == constant


def test_power_terms_of_odd_wedge_vanish(exterior):
    x = vec(exterior, e1="1*T^(1/2)", e2="3*T^(1/3)")
    assert power_terms(wedge(exterior), x).is_zero()


def test_arity_and_degree_validation(exterior):
    with pytest.raises(ArityError):
        apply_multilinear(wedge(exterior), [Element.zero(exterior, E)])
    with pytest.raises(DegreeError):
        MultilinearMap(exterior, 2, 0, {("e1", "e1"): vec(exterior, e1="1")}, E)
    with pytest.raises(ArityError):
        MultilinearMap(exterior, 2, 0, {("e1",): vec(exterior, e1="1")}, E)


def test_entries_with_slot_index(exterior):
    m = wedge(exterior)
    assert m.entries_with(0, "e1") == [("e1", "e2")]
    assert m.entries_with(1, "e12") == []
    assert len(m) == 2
