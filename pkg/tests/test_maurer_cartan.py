import random
from fractions import Fraction

import pytest
from sympy import Matrix

from kuranishi.ainfty import AInftyStructure
from kuranishi.corpus import definite_corpus, random_plus_element
from kuranishi.cyclic import CyclicStructure, frobenius_cyclic
from kuranishi.errors import (
    CertificateError,
    DefinitenessError,
    IsotropyPreconditionError,
    LinearizationNotSurjective,
    MisuseError,
)
from kuranishi.frobenius import exterior_algebra, poincare_algebra
from kuranishi.graded_core import Element, GradedModule, MultilinearMap
from kuranishi.maurer_cartan import (
    Exhausted,
    Obstruction,
    Solution,
    linearization,
    mc_solve,
    mc_verify,
    unobstructedness_certificate,
    zero_from_isotropy,
)
from kuranishi.novikov import DeformationVariable, NovikovScalar, deformation_ring, generator

from .support import E, element


def _with_linear_part(module, curvature_label):
    """m_0(1) = T w and m_1(u) = v."""
    m0 = MultilinearMap(module, 0, 2, {(): element(module, **{curvature_label: "1*T^(1)"})}, E)
    m1 = MultilinearMap(module, 1, 1, {("u",): element(module, v="1")}, E)
    return AInftyStructure(module, {0: m0, 1: m1}, 6, E)


def test_mc_verify(uv_toy, uv_module):
    assert mc_verify(uv_toy, element(uv_module, u="1*T^(1/2)"))
    assert mc_verify(uv_toy, element(uv_module, u="-1*T^(1/2)"))
    assert not mc_verify(uv_toy, element(uv_module, u="2*T^(1/2)"))
    assert not mc_verify(uv_toy, Element.zero(uv_module, E))


def test_mc_verify_below_lower_bound(uv_toy, uv_module):
    assert mc_verify(uv_toy, Element.zero(uv_module, E), E=Fraction(1))


def test_ansatz_finds_square_root(uv_toy, uv_module):
    result = mc_solve(uv_toy, mode="ansatz", grid=[Fraction(1, 2), Fraction(1)])
    assert isinstance(result, Solution)
    assert result.b == element(uv_module, u="1*T^(1/2)")
    assert result.to_dict()["kind"] == "solution"


def test_ansatz_on_wrong_grid_is_exhausted(uv_toy):
    result = mc_solve(uv_toy, mode="ansatz", grid=[Fraction(1)])
    assert isinstance(result, Exhausted)
    assert "ansatz" in result.search_space_description


def test_ansatz_without_grid_is_exhausted(uv_toy):
    assert isinstance(mc_solve(uv_toy, mode="ansatz"), Exhausted)


def test_newton_needs_linear_part(uv_toy):
    assert linearization(uv_toy).is_zero_matrix
    with pytest.raises(LinearizationNotSurjective):
        mc_solve(uv_toy, mode="newton")


def test_newton_absorbs_curvature():
    module = GradedModule([("u", 1), ("v", 2)])
    S = _with_linear_part(module, "v")
    assert linearization(S) == Matrix([[1]])
    result = mc_solve(S, mode="newton")
    assert isinstance(result, Solution)
    assert result.b == element(module, u="-1*T^(1)")


def test_newton_reports_obstruction():
    module = GradedModule([("u", 1), ("v", 2), ("w", 2)])
    S = _with_linear_part(module, "w")
    result = mc_solve(S, mode="newton")
    assert isinstance(result, Obstruction)
    assert result.energy == 1
    assert result.class_vector == element(module, w="1*T^(1)")


def test_zero_is_returned_for_strict_structures(torus):
    result = mc_solve(torus.S)
    assert isinstance(result, Solution)
    assert result.b.is_zero()


def test_unknown_mode(uv_toy):
    with pytest.raises(MisuseError):
        mc_solve(uv_toy, mode="bisection")


def test_isotropy_of_zero(definite):
    certificate = zero_from_isotropy(definite.Q.block(2), Element.zero(definite.S.module, E))
    assert certificate.valid
    assert certificate.lowest_level is None
    assert certificate.horizon == Fraction(3, 2)


def test_isotropy_leaves_high_levels_unverified(definite):
    v = element(definite.S.module, h="1*T^(2)")
    certificate = zero_from_isotropy(definite.Q.block(2), v)
    assert certificate.valid
    assert certificate.unverified_levels == ((Fraction(2), 0),)
    assert certificate.to_dict()["horizon"] == "3/2"


def test_isotropy_rejects_nonisotropic_input(definite):
    v = element(definite.S.module, h="1*T^(1)")
    with pytest.raises(IsotropyPreconditionError):
        zero_from_isotropy(definite.Q.block(2), v)


def test_isotropy_argument_checks(definite):
    module = definite.S.module
    with pytest.raises(MisuseError):
        zero_from_isotropy([[1, 0], [0, 1]], Element.zero(module, E))
    with pytest.raises(MisuseError):
        zero_from_isotropy([[1]], element(module, a="1*T^(1)"))
    split = GradedModule([("h1", 2), ("h2", 2)])
    with pytest.raises(DefinitenessError):
        zero_from_isotropy([[1, 0], [0, -1]], Element.zero(split, E))


@pytest.mark.parametrize("block", [
    [[1, 0], [0, 1]],
    [[2, 1], [1, 1]],
    [[-2, 1], [1, -1]],
])
def test_isotropy_sweep_over_random_candidates(block):
    module = GradedModule([("h1", 2), ("h2", 2)])
    rng = random.Random(31)
    rejected = certified = 0
    for _ in range(60):
        v = random_plus_element(rng, module, E, degree=2, max_terms=3, e_powers=(-1, 0, 1))
        if v.is_zero() or v.valuation() >= E / 2:
            certificate = zero_from_isotropy(block, v)
            assert certificate.valid
            assert certificate.levels_checked == ()
            assert set(certificate.unverified_levels) == {
                level for _, scalar in v.items() for level in scalar.levels()
            }
            certified += 1
        else:
            with pytest.raises(IsotropyPreconditionError):
                zero_from_isotropy(block, v)
            rejected += 1
    for _ in range(20):
        v = random_plus_element(rng, module, E, degree=2, max_terms=3, min_energy=E / 2)
        assert zero_from_isotropy(block, v).valid
        certified += 1
    assert rejected and certified


def test_isotropy_rejects_symbolic_candidates():
    module = GradedModule([("h1", 2), ("h2", 2)])
    poly_ring = deformation_ring([DeformationVariable("x0"), DeformationVariable("x1")])
    x0, x1 = generator(poly_ring, "x0"), generator(poly_ring, "x1")
    rng = random.Random(8)
    for _ in range(10):
        p = rng.choice([1, 2, -3]) * x0 + rng.choice([1, -1]) * x1 ** 2
        v = Element(module, {
            "h1": NovikovScalar.monomial(p, Fraction(1, 2), 0, E),
            "h2": NovikovScalar.monomial(x1, Fraction(1, 2), 0, E),
        }, E)
        with pytest.raises(IsotropyPreconditionError):
            zero_from_isotropy([[1, 0], [0, 1]], v)
    high = Element(module, {"h1": NovikovScalar.monomial(x0 * x1, Fraction(2), 0, E)}, E)
    assert zero_from_isotropy([[1, 0], [0, 1]], high).unverified_levels == ((Fraction(2), 0),)


def test_isotropy_refuses_indefinite_blocks():
    module = GradedModule([("h1", 2), ("h2", 2)])
    rng = random.Random(13)
    for block in ([[1, 0], [0, -1]], [[0, 1], [1, 0]], [[1, 2], [2, 1]]):
        for _ in range(5):
            v = random_plus_element(rng, module, E, degree=2)
            with pytest.raises(DefinitenessError):
                zero_from_isotropy(block, v)


def test_ansatz_on_finer_grid_is_verified(uv_toy, uv_module):
    result = mc_solve(uv_toy, mode="ansatz", grid=[Fraction(1, 4), Fraction(1, 2), Fraction(1)])
    assert isinstance(result, Solution)
    assert result.b == element(uv_module, u="1*T^(1/2)")
    assert mc_verify(uv_toy, result.b)


def test_certificate_on_definite_model(definite):
    report = unobstructedness_certificate(definite, Element.zero(definite.S.module, E), samples=2)
    assert report.passed
    assert len(report.twists) == 2
    payload = report.to_dict()
    assert payload["passed"] is True
    assert payload["base"]["kappa_zero"] is True
    assert payload["twists"][0]["name"].endswith("^b'0")


def test_certificate_is_deterministic(definite):
    zero = Element.zero(definite.S.module, E)
    first = unobstructedness_certificate(definite, zero, samples=2, seed=7).to_dict()
    second = unobstructedness_certificate(definite, zero, samples=2, seed=7).to_dict()
    assert first == second


def test_certificate_over_definite_corpus():
    pairs = list(definite_corpus())
    assert len(pairs) >= 20
    for structure, b in pairs:
        report = unobstructedness_certificate(structure, b, samples=5)
        assert report.passed, structure.name


def test_certificate_needs_dimension_four():
    two = frobenius_cyclic(exterior_algebra(2))
    with pytest.raises(MisuseError):
        unobstructedness_certificate(two, Element.zero(two.S.module, 3))


def test_certificate_needs_definite_block():
    split = frobenius_cyclic(poincare_algebra((1, 0, 2, 0, 1), [[1, 0], [0, -1]], []))
    with pytest.raises(DefinitenessError):
        unobstructedness_certificate(split, Element.zero(split.S.module, 3))


def test_certificate_needs_mc_point(definite):
    S = definite.S.with_entry(2, ("a", "a"), element(definite.S.module, h="1"))
    perturbed = CyclicStructure(S, definite.Q, "perturbed")
    with pytest.raises(CertificateError):
        unobstructedness_certificate(perturbed, element(S.module, a="1*T^(1/2)"))


def test_certificate_flags_perturbed_structure(definite):
    S = definite.S.with_entry(2, ("a", "a"), element(definite.S.module, h="1"))
    perturbed = CyclicStructure(S, definite.Q, "perturbed")
    report = unobstructedness_certificate(perturbed, Element.zero(S.module, E), samples=1)
    assert not report.passed
    assert not report.base.symbolic_defect_zero
