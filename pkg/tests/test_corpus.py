import random
from fractions import Fraction

from kuranishi.ainfty import check_relations, kuranishi_eval, symbolic_element, symbolic_variables, twist
from kuranishi.corpus import (
    build_corpus,
    definite_corpus,
    definite_models,
    energy_grid,
    random_plus_element,
    random_plus_scalar,
    random_unimodular,
)
from kuranishi.cyclic import check_cyclicity, darboux_defect, lemma_sum
from kuranishi.graded_core import Element, GradedModule
from kuranishi.maurer_cartan import mc_verify


def test_energy_grid():
    assert energy_grid(1) == [Fraction(1, 4), Fraction(1, 3), Fraction(1, 2), Fraction(2, 3), Fraction(3, 4)]
    assert energy_grid(Fraction(1, 2), denominators=(2,)) == []


def test_random_scalars_are_in_the_maximal_ideal():
    rng = random.Random(0)
    for _ in range(50):
        assert random_plus_scalar(rng, 3).is_plus()


def test_random_element_is_seeded():
    module = GradedModule([("u", 1), ("w", 1), ("v", 2)])
    first = random_plus_element(random.Random(42), module, 3)
    second = random_plus_element(random.Random(42), module, 3)
    assert first == second
    assert first.is_homogeneous(1)


def test_random_unimodular_is_invertible_over_the_integers():
    rng = random.Random(1)
    for rank in (1, 2, 5):
        assert abs(random_unimodular(rng, rank).det()) == 1


def test_corpus_size_and_determinism():
    names = [structure.name for structure in build_corpus()]
    assert len(names) >= 100
    assert names == [structure.name for structure in build_corpus()]


def test_quadratic_identity_over_corpus():
    rng = random.Random(99)
    structures = list(build_corpus())
    assert len(structures) >= 100
    for structure in structures:
        assert check_relations(structure.S) == [], structure.name
        assert check_cyclicity(structure.S, structure.Q) == [], structure.name
        for _ in range(10):
            x = random_plus_element(rng, structure.S.module, structure.S.cutoff)
            for k in range(7):
                assert lemma_sum(structure.S, structure.Q, x, k).is_zero(), (structure.name, k)


def test_symbolic_curvature_pairing_over_dimension_four_corpus():
    structures = [structure for structure in build_corpus() if structure.Q.n == 4]
    assert len(structures) >= 40
    for structure in structures:
        module = structure.S.module
        x = symbolic_element(module, symbolic_variables(module), structure.S.cutoff)
        assert darboux_defect(structure.S, structure.Q, x).is_zero(), structure.name


def test_twist_coherence_over_corpus():
    rng = random.Random(2024)
    for structure in build_corpus():
        S = structure.S
        b = random_plus_element(rng, S.module, S.cutoff)
        b_prime = random_plus_element(rng, S.module, S.cutoff)
        assert twist(S, Element.zero(S.module, S.cutoff)) == S, structure.name
        twisted = twist(S, b)
        assert twist(twisted, b_prime) == twist(S, b + b_prime), structure.name
        assert twisted.curvature() == kuranishi_eval(S, b), structure.name
        assert check_relations(twisted) == [], structure.name
        assert check_cyclicity(twisted, structure.Q) == [], structure.name


def test_definite_corpus_has_curved_twists_and_nonzero_mc_points():
    pairs = list(definite_corpus())
    assert len(pairs) == len(definite_models()) * 3
    assert any(not b.is_zero() for _, b in pairs)
    assert any(not structure.S.op(1).is_zero() for structure, _ in pairs)
    assert any(structure.S.module.rank > 8 for structure, _ in pairs)
    for structure, b in pairs:
        assert structure.Q.n == 4
        assert mc_verify(structure.S, b), structure.name


def test_curvature_pairing_over_definite_corpus():
    rng = random.Random(5)
    pairs = list(definite_corpus())
    assert len(pairs) >= 20
    for structure, b in pairs:
        assert kuranishi_eval(structure.S, b).is_zero()
        x = random_plus_element(rng, structure.S.module, structure.S.cutoff)
        assert darboux_defect(structure.S, structure.Q, x).is_zero(), structure.name
