"""Seeded random scalars, elements, geometry and the cyclic-structure corpora."""

import logging
import random
from fractions import Fraction
from typing import Iterator, List, Sequence, Tuple

from sympy import Matrix, eye

from .ainfty import twist
from .calibrated import FourPlane, IntersectionForm, Metric4, TwoForm
from .cyclic import CyclicStructure, cyclic_completion, frobenius_cyclic
from .frobenius import (
    exterior_algebra,
    matrix_algebra,
    poincare_algebra,
    tensor_algebra,
    truncated_polynomial,
)
from .graded_core import Element, GradedModule
from .novikov import NovikovScalar, as_fraction

logger = logging.getLogger(__name__)

DENOMINATORS = (1, 2, 3, 4)


def energy_grid(cutoff, denominators: Sequence[int] = DENOMINATORS) -> List[Fraction]:
    """All p/q in (0, cutoff) with q from the given denominators, sorted."""
    cutoff = as_fraction(cutoff)
    values = set()
    for q in denominators:
        p = 1
        while Fraction(p, q) < cutoff:
            values.add(Fraction(p, q))
            p += 1
    return sorted(values)


def random_plus_scalar(rng: random.Random, cutoff, max_terms: int = 2, min_energy=None,
                       e_powers: Sequence[int] = (0,)) -> NovikovScalar:
    """
    A random nonzero-or-zero scalar with every energy strictly positive.

    Args:
        rng: Random source
        cutoff: Energy cutoff
        max_terms: Upper bound on the number of terms
        min_energy: Smallest allowed energy; defaults to the smallest grid value
        e_powers: Allowed powers of e

    Returns:
        NovikovScalar: Element of the maximal ideal
    """
    grid = energy_grid(cutoff)
    if min_energy is not None:
        grid = [lam for lam in grid if lam >= as_fraction(min_energy)]
    terms = []
    for _ in range(rng.randint(1, max_terms)):
        coeff = Fraction(rng.choice([-3, -2, -1, 1, 2, 3]), rng.choice([1, 1, 2]))
        terms.append((rng.choice(grid), rng.choice(list(e_powers)), coeff))
    return NovikovScalar(terms, cutoff)


def random_plus_element(rng: random.Random, module: GradedModule, cutoff, degree: int = 1,
                        density: float = 0.6, **scalar_options) -> Element:
    """Random element of A^degree with coefficients in the maximal ideal."""
    coefficients = {}
    for label in module.labels_in_degree(degree):
        if rng.random() < density:
            coefficients[label] = random_plus_scalar(rng, cutoff, **scalar_options)
    return Element(module, coefficients, cutoff)


def random_rational(rng: random.Random, low: int = -3, high: int = 3) -> Fraction:
    return Fraction(rng.randint(low, high), rng.choice([1, 2, 3]))


def random_metric(rng: random.Random) -> Metric4:
    """A^T A + I for a random rational 4x4 A; always positive definite."""
    A = Matrix(4, 4, lambda i, j: random_rational(rng))
    G = A.T * A + eye(4)
    return Metric4([[G[i, j] for j in range(4)] for i in range(4)])


def random_two_form(rng: random.Random) -> TwoForm:
    return TwoForm([random_rational(rng) for _ in range(6)])


def random_four_plane(rng: random.Random) -> FourPlane:
    while True:
        vectors = [[random_rational(rng) for _ in range(8)] for _ in range(4)]
        if Matrix(vectors).rank() == 4:
            return FourPlane(vectors, rng.choice([1, -1]))


def random_unimodular(rng: random.Random, rank: int, steps: int = 6) -> Matrix:
    """Product of random elementary integer matrices and sign flips."""
    U = eye(rank)
    for _ in range(steps):
        i, j = rng.sample(range(rank), 2) if rank > 1 else (0, 0)
        if i != j:
            E = eye(rank)
            E[i, j] = rng.choice([-2, -1, 1, 2])
            U = U * E
        if rng.random() < 0.3:
            F = eye(rank)
            F[i, i] = -1
            U = U * F
    return U


def random_conjugated_identity(rng: random.Random, rank: int, sign: int = 1) -> Tuple[IntersectionForm, Matrix]:
    """The form sign * U^T U for random U in GL(rank, ZZ)."""
    U = random_unimodular(rng, rank)
    F = sign * U.T * U
    return IntersectionForm([[int(F[i, j]) for j in range(rank)] for i in range(rank)]), U


def frobenius_models(k_max: int = 5, cutoff=3) -> List[CyclicStructure]:
    """The strict cyclic models the sweeps start from."""
    models = [
        frobenius_cyclic(exterior_algebra(2, prefix="a"), k_max=k_max, cutoff=cutoff),
        frobenius_cyclic(exterior_algebra(3), k_max=k_max, cutoff=cutoff),
        frobenius_cyclic(exterior_algebra(4), k_max=k_max, cutoff=cutoff),
        frobenius_cyclic(truncated_polynomial(2, 2), k_max=k_max, cutoff=cutoff),
        frobenius_cyclic(poincare_algebra((1, 1, 1, 1, 1), [[1]], [[1]]), k_max=k_max, cutoff=cutoff),
        frobenius_cyclic(poincare_algebra((1, 2, 1, 2, 1), [[-1]], [[1, 0], [0, 1]]), k_max=k_max, cutoff=cutoff),
        frobenius_cyclic(
            tensor_algebra(matrix_algebra(2), exterior_algebra(2, prefix="a")),
            k_max=k_max, cutoff=cutoff, commutative=False,
        ),
        frobenius_cyclic(
            tensor_algebra(matrix_algebra(2), tensor_algebra(exterior_algebra(2, prefix="a"), truncated_polynomial(2, 1))),
            k_max=k_max, cutoff=cutoff, commutative=False,
        ),
    ]
    return models


def completion_models(k_max: int = 5, cutoff=3) -> List[CyclicStructure]:
    """Cyclic completions of small non-cyclic algebras."""
    bases = [
        exterior_algebra(1),
        truncated_polynomial(0, 0),
        tensor_algebra(matrix_algebra(2), exterior_algebra(1)),
    ]
    completions = []
    for table in bases:
        strict = frobenius_cyclic(table, k_max=k_max, cutoff=cutoff, commutative=False).S
        for n in (3, 4):
            completions.append(cyclic_completion(strict, n))
    return completions


def build_corpus(seed: int = 1729, twists_per_model: int = 7, k_max: int = 5, cutoff=3) -> Iterator[CyclicStructure]:
    """
    Cyclic structures for the quadratic-identity and curvature-pairing sweeps:
    Frobenius models, completions, and their twists by random b.

    Args:
        seed: Seed of the twisting elements
        twists_per_model: Random twists generated per base model
        k_max: Arity cutoff
        cutoff: Energy cutoff

    Yields:
        CyclicStructure: At least 100 structures for the default arguments
    """
    rng = random.Random(seed)
    bases = frobenius_models(k_max, cutoff) + completion_models(k_max, cutoff)
    for base in bases:
        yield base
        for index in range(twists_per_model):
            b = random_plus_element(rng, base.S.module, cutoff)
            yield CyclicStructure(twist(base.S, b), base.Q, f"{base.name}^b{index}")


def definite_models(k_max: int = 5, cutoff=3) -> List[CyclicStructure]:
    """
    n = 4 models whose degree-2 pairing block is definite: Poincare algebras
    of definite forms, and completions of algebras concentrated in degrees
    0 and 1, whose degree-2 block is empty.
    """
    forms = [
        ((1, 0, 1, 0, 1), [[1]], []),
        ((1, 0, 1, 0, 1), [[-1]], []),
        ((1, 1, 1, 1, 1), [[1]], [[1]]),
        ((1, 0, 2, 0, 1), [[1, 0], [0, 1]], []),
        ((1, 0, 2, 0, 1), [[2, 1], [1, 1]], []),
        ((1, 1, 2, 1, 1), [[-1, 0], [0, -1]], [[2]]),
        ((1, 2, 1, 2, 1), [[1]], [[1, 0], [0, 1]]),
        ((1, 0, 3, 0, 1), [[2, -1, 0], [-1, 2, 0], [0, 0, 1]], []),
        ((1, 0, 0, 0, 1), [], []),
    ]
    models = [
        frobenius_cyclic(poincare_algebra(betti, form, deg13), k_max=k_max, cutoff=cutoff)
        for betti, form, deg13 in forms
    ]
    for table in (exterior_algebra(1), tensor_algebra(matrix_algebra(2), exterior_algebra(1))):
        strict = frobenius_cyclic(table, k_max=k_max, cutoff=cutoff, commutative=False).S
        models.append(cyclic_completion(strict, 4))
    return models


def definite_corpus(seed: int = 1729, twists_per_model: int = 2, k_max: int = 5,
                    cutoff=3) -> Iterator[Tuple[CyclicStructure, Element]]:
    """
    Definite n = 4 cyclic structures paired with a Maurer-Cartan point.

    Base models come with b = 0. Each twist S^b by a random b carries its own
    random MC point b'; products of degree-1 classes vanish in these models,
    so every degree-1 element is a Maurer-Cartan point, while m_1 of S^b is
    nonzero wherever b multiplies into degree 3 or 4.

    Yields:
        Tuple[CyclicStructure, Element]: At least 20 pairs for the default arguments
    """
    rng = random.Random(seed)
    for base in definite_models(k_max, cutoff):
        yield base, Element.zero(base.S.module, cutoff)
        for index in range(twists_per_model):
            b = random_plus_element(rng, base.S.module, cutoff)
            mc_point = random_plus_element(rng, base.S.module, cutoff)
            logger.debug(f"Twisting {base.name} by b{index} with MC point {mc_point.render()}")
            yield CyclicStructure(twist(base.S, b), base.Q, f"{base.name}^b{index}"), mc_point
