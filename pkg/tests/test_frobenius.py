from fractions import Fraction

import pytest

from kuranishi.cyclic import frobenius_cyclic, poincare_model
from kuranishi.errors import FrobeniusError, PairingDegreeError
from kuranishi.frobenius import (
    FrobeniusTable,
    exterior_algebra,
    matrix_algebra,
    poincare_algebra,
    poincare_labels,
    tensor_algebra,
    truncated_polynomial,
)
from kuranishi.graded_core import GradedModule


def test_exterior_algebra_products():
    table = exterior_algebra(2)
    assert table.module.labels == ("1", "e1", "e2", "e12")
    assert table.basis_product("e1", "e2") == {"e12": Fraction(1)}
    assert table.basis_product("e2", "e1") == {"e12": Fraction(-1)}
    assert table.basis_product("e1", "e1") == {}
    assert table.top_degree == 2
    assert table.associativity_witness() is None
    assert table.commutativity_witness() is None
    assert table.degenerate_degree() is None


def test_exterior_algebra_of_torus_has_sixteen_classes():
    table = exterior_algebra(4)
    assert table.module.rank == 16
    assert table.module.degree_ranks == {0: 1, 1: 4, 2: 6, 3: 4, 4: 1}


def test_truncated_polynomial_is_cohomology_of_projective_plane():
    table = truncated_polynomial(2, 2)
    assert table.module.basis == (("1", 0), ("x", 2), ("x2", 4))
    assert table.basis_product("x", "x") == {"x2": Fraction(1)}
    with pytest.raises(FrobeniusError):
        truncated_polynomial(1, 2)


def test_matrix_algebra_is_not_commutative():
    table = matrix_algebra(2)
    assert table.commutativity_witness() is not None
    assert table.trace_symmetry_witness() is None
    with pytest.raises(FrobeniusError, match="graded commutative"):
        frobenius_cyclic(table)
    assert frobenius_cyclic(table, commutative=False).Q.n == 0


def test_tensor_algebra_uses_koszul_sign():
    table = tensor_algebra(exterior_algebra(1, prefix="a"), exterior_algebra(1, prefix="b"))
    product = table.basis_product("1.b1", "a1.1")
    assert product == {"a1.b1": Fraction(-1)}
    assert table.basis_product("a1.1", "1.b1") == {"a1.b1": Fraction(1)}
    assert table.associativity_witness() is None


def test_poincare_labels():
    assert poincare_labels((1, 1, 1, 1, 1)) == [("1", 0), ("a", 1), ("h", 2), ("c", 3), ("pt", 4)]
    assert [label for label, _ in poincare_labels((1, 0, 2, 0, 1))] == ["1", "h1", "h2", "pt"]


def test_poincare_algebra_matches_poincare_model():
    betti, form, deg13 = (1, 1, 2, 1, 1), [[2, 1], [1, 1]], [[1]]
    structure = frobenius_cyclic(poincare_algebra(betti, form, deg13))
    module, Q = poincare_model(betti, form, deg13)
    assert structure.S.module == module
    assert structure.Q == Q
    assert Q.entry("a", "c") == -1
    assert Q.entry("c", "a") == 1


def test_poincare_data_validation():
    with pytest.raises(PairingDegreeError):
        poincare_model((1, 0, 1, 0, 2), [[1]], [])
    with pytest.raises(PairingDegreeError):
        poincare_model((1, 0, 2, 0, 1), [[1, 0], [1, 1]], [])
    with pytest.raises(PairingDegreeError):
        poincare_model((1, 0, 2, 0, 1), [[1, 1], [1, 1]], [])


def test_frobenius_axioms_are_reported_with_witness():
    module = GradedModule([("1", 0), ("x", 0)])
    broken = FrobeniusTable(
        module,
        {("1", "1"): {"1": Fraction(1)}, ("1", "x"): {"x": Fraction(1)}, ("x", "1"): {"x": Fraction(1)},
         ("x", "x"): {"1": Fraction(1)}},
        {"x": Fraction(1)},
        {"x": Fraction(1)},
        0,
    )
    with pytest.raises(FrobeniusError, match="Unit") as excinfo:
        frobenius_cyclic(broken, verify=False)
    assert excinfo.value.witness == "1"
