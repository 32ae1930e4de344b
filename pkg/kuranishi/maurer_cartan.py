"""Maurer-Cartan verification and solving, the isotropy argument and the unobstructedness certificate."""

import logging
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

from sympy import Matrix, Poly, Rational, Symbol, expand, roots

from .ainfty import (
    AInftyStructure,
    kuranishi_eval,
    kuranishi_symbolic,
    require_degree_one_plus,
    symbolic_element,
    symbolic_variables,
    twist,
)
from .calibrated import definiteness
from .corpus import random_plus_element
from .cyclic import CyclicStructure, darboux_defect
from .errors import (
    CertificateError,
    DefinitenessError,
    IsotropyPreconditionError,
    KuranishiError,
    LinearizationNotSurjective,
    MisuseError,
)
from .graded_core import Element, Label
from .novikov import DeformationVariable, NovikovScalar, as_fraction, deformation_ring, generator

logger = logging.getLogger(__name__)

DEFAULT_MAX_ITERATIONS = 64


@dataclass(frozen=True)
class Solution:
    """A bounding cochain b with k(b) = 0 mod T^E."""

    b: Element
    kind: str = field(default="solution", init=False)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "b": {label: s.render() for label, s in self.b.items()}}


@dataclass(frozen=True)
class Obstruction:
    """The first leading residual class that the linearisation cannot absorb."""

    energy: Fraction
    class_vector: Element
    kind: str = field(default="obstruction", init=False)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "energy": str(self.energy),
            "class": {label: s.render() for label, s in self.class_vector.items()},
        }


@dataclass(frozen=True)
class Exhausted:
    """The bounded search ended without a solution."""

    search_space_description: str
    kind: str = field(default="exhausted", init=False)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "search_space": self.search_space_description}


MCResult = Union[Solution, Obstruction, Exhausted]


def mc_verify(S: AInftyStructure, b: Element, E=None) -> bool:
    """True iff k(b) = 0 mod T^E."""
    _, E = S.resolve_cutoffs(None, E)
    return kuranishi_eval(S, b).truncate(E).is_zero()


def linearization(S: AInftyStructure) -> Matrix:
    """Valuation-0, e^0 part of m_1 as a matrix A^1 -> A^2 (rows degree 2)."""
    sources = S.module.labels_in_degree(1)
    targets = S.module.labels_in_degree(2)
    m1 = S.op(1)
    return Matrix(
        len(targets), len(sources),
        lambda i, j: m1.entry((sources[j],)).coefficient(targets[i]).component(0, 0),
    )


def _to_fraction(value) -> Fraction:
    value = Rational(value)
    return Fraction(int(value.p), int(value.q))


def _newton(S: AInftyStructure, E: Fraction, max_iterations: int) -> MCResult:
    module = S.module
    sources = module.labels_in_degree(1)
    targets = module.labels_in_degree(2)
    L = linearization(S)
    b = Element.zero(module, S.cutoff)
    for iteration in range(max_iterations):
        residual = kuranishi_eval(S, b).truncate(E)
        if residual.is_zero():
            logger.info(f"Newton mode converged after {iteration} steps")
            return Solution(b)
        if L.is_zero_matrix:
            raise LinearizationNotSurjective(
                "m_1 has no valuation-0 part to absorb the residual"
            )
        lam = min(s.valuation() for _, s in residual.items())
        levels = sorted({n for _, s in residual.items() for l, n, _ in s.terms if l == lam})
        leading = Element(
            module,
            {label: NovikovScalar([(l, n, c) for l, n, c in s.terms if l == lam], S.cutoff)
             for label, s in residual.items()},
            S.cutoff,
        )
        if lam == 0:
            return Obstruction(lam, leading)
        correction: Dict[Label, NovikovScalar] = {}
        for n in levels:
            rhs = Matrix(len(targets), 1, lambda i, _: residual.coefficient(targets[i]).component(lam, n))
            if L.rank() != L.row_join(rhs).rank():
                return Obstruction(lam, leading)
            solution, params = L.gauss_jordan_solve(rhs)
            solution = solution.subs({p: 0 for p in params})
            for j, label in enumerate(sources):
                value = _to_fraction(solution[j, 0])
                if value:
                    term = NovikovScalar.monomial(-value, lam, n, S.cutoff)
                    correction[label] = correction[label] + term if label in correction else term
        b = b + Element(module, correction, S.cutoff)
    return Exhausted(f"newton: {max_iterations} iterations without convergence below E={E}")


def _ansatz(S: AInftyStructure, E: Fraction, grid: Sequence[Fraction]) -> MCResult:
    module = S.module
    sources = module.labels_in_degree(1)
    grid = sorted(as_fraction(lam) for lam in grid)
    description = f"ansatz: grid {[str(lam) for lam in grid]} over {len(sources)} degree-1 directions"
    if not grid or any(lam <= 0 for lam in grid) or not sources:
        return Exhausted(description)
    unknowns = [DeformationVariable(f"c{i}_{j}", 1) for i in range(len(grid)) for j in range(len(sources))]
    poly_ring = deformation_ring(unknowns)
    coefficients = {}
    for j, label in enumerate(sources):
        coefficients[label] = NovikovScalar(
            [(lam, 0, generator(poly_ring, f"c{i}_{j}")) for i, lam in enumerate(grid)], S.cutoff
        )
    x = Element(module, coefficients, S.cutoff)
    kappa = kuranishi_eval(S, x).truncate(E)

    by_level: Dict[Tuple[Fraction, int], List] = {}
    for _, scalar in kappa.items():
        for lam, n, c in scalar.terms:
            expr = c.as_expr() if not isinstance(c, Fraction) else Rational(c.numerator, c.denominator)
            by_level.setdefault((lam, n), []).append(expr)
    equations = [by_level[level] for level in sorted(by_level)]
    symbols = {var.name: Symbol(var.name) for var in unknowns}

    def search(assignment: Dict[Symbol, Rational]) -> Optional[Dict[Symbol, Rational]]:
        for level in equations:
            pending = [expand(eq.subs(assignment)) for eq in level]
            pending = [eq for eq in pending if eq != 0]
            if not pending:
                continue
            for eq in pending:
                free = eq.free_symbols
                if not free:
                    return None
                if len(free) == 1:
                    symbol = next(iter(free))
                    poly = Poly(eq, symbol)
                    if poly.degree() > 2:
                        continue
                    candidates = sorted(roots(poly, filter="Q"), key=lambda r: (bool(r < 0), abs(r)))
                    for root in candidates:
                        found = search({**assignment, symbol: root})
                        if found is not None:
                            return found
                    return None
            return None
        return assignment

    assignment = search({})
    if assignment is None:
        return Exhausted(description)
    values = {name: _to_fraction(assignment.get(symbol, 0)) for name, symbol in symbols.items()}
    b = x.substitute(values)
    if not mc_verify(S, b, E):
        logger.warning("Ansatz candidate failed re-verification")
        return Exhausted(description)
    return Solution(b)


def mc_solve(S: AInftyStructure, mode: str = "newton", grid: Optional[Sequence] = None,
             max_iterations: int = DEFAULT_MAX_ITERATIONS, E=None) -> MCResult:
    """
    Search for a Maurer-Cartan element by energy induction.

    Args:
        S: The structure
        mode: "newton" or "ansatz"
        grid: Positive energies of the ansatz b = sum c T^lam u
        max_iterations: Bound on Newton steps
        E: Energy bound, at most S.cutoff

    Returns:
        MCResult: Solution (re-verified), Obstruction or Exhausted

    Raises:
        LinearizationNotSurjective: Newton mode with no valuation-0 part of m_1
    """
    _, E = S.resolve_cutoffs(None, E)
    if mode not in ("newton", "ansatz"):
        raise MisuseError(f"Unknown solver mode {mode!r}")
    zero = Element.zero(S.module, S.cutoff)
    if mc_verify(S, zero, E):
        return Solution(zero)
    if mode == "newton":
        result = _newton(S, E, max_iterations)
    else:
        result = _ansatz(S, E, grid or [])
    if isinstance(result, Solution) and not mc_verify(S, result.b, E):
        raise CertificateError("Solver returned an element that fails verification", witness=result.b)
    return result


@dataclass(frozen=True)
class IsotropyCertificate:
    """
    Trace of the leading-term induction for Q(v, v) = 0 with Q definite.

    Components of v below horizon = E/2 are certified zero; components at or
    above it are listed as unverified.
    """

    horizon: Fraction
    levels_checked: Tuple[Tuple[Fraction, int], ...]
    lowest_level: Optional[Tuple[Fraction, int]]
    unverified_levels: Tuple[Tuple[Fraction, int], ...]

    @property
    def valid(self) -> bool:
        return self.lowest_level is None or self.lowest_level[0] >= self.horizon

    def __bool__(self) -> bool:
        return self.valid

    def to_dict(self) -> dict:
        return {
            "horizon": str(self.horizon),
            "levels_checked": [[str(lam), n] for lam, n in self.levels_checked],
            "lowest_level": None if self.lowest_level is None else [str(self.lowest_level[0]), self.lowest_level[1]],
            "unverified_levels": [[str(lam), n] for lam, n in self.unverified_levels],
            "valid": self.valid,
        }


def _as_sympy(coeff):
    if isinstance(coeff, Fraction):
        return Rational(coeff.numerator, coeff.denominator)
    return coeff.as_expr()


def _bilinear(block: Matrix, left: Sequence, right: Sequence):
    total = 0
    for i, a in enumerate(left):
        if a == 0:
            continue
        for j, b in enumerate(right):
            if b != 0 and block[i, j] != 0:
                total = total + a * b * block[i, j]
    return total


def zero_from_isotropy(Q_block, v: Element, E=None) -> IsotropyCertificate:
    """
    Certify that v vanishes below energy E/2 from Q(v, v) = 0 mod T^E.

    For the lex-lowest (lambda, e) component w of v, the (2 lambda, 2e)
    component of Q(v, v) is exactly Q(w, w), which a definite form makes
    nonzero unless w = 0. Polynomial coefficients are handled the same way,
    since a definite form stays anisotropic over QQ(vars).

    Args:
        Q_block: Definite symmetric matrix on the degree-2 labels of v's module
        v: Degree-2 element
        E: Energy bound, at most v.cutoff

    Returns:
        IsotropyCertificate: The induction trace

    Raises:
        DefinitenessError: Q_block is not definite
        IsotropyPreconditionError: Q(v, v) != 0 mod T^E
    """
    block = Matrix(Q_block)
    labels = v.module.labels_in_degree(2)
    if block.shape != (len(labels), len(labels)):
        raise MisuseError(f"Pairing block has shape {block.shape}, expected {len(labels)}x{len(labels)}")
    if definiteness(block) == 0:
        raise DefinitenessError("Degree-2 pairing block is not definite")
    if not v.is_homogeneous(2):
        raise MisuseError("Isotropy argument needs a degree-2 element")
    E = v.cutoff if E is None else as_fraction(E)
    horizon = E / 2

    components: Dict[Tuple[Fraction, int], List] = {}
    for index, label in enumerate(labels):
        for lam, n, c in v.coefficient(label).terms:
            components.setdefault((lam, n), [0] * len(labels))[index] = _as_sympy(c)
    levels = sorted(components)

    targets = sorted({(a[0] + b[0], a[1] + b[1]) for a in levels for b in levels})
    checked = []
    for target in targets:
        if target[0] >= E:
            continue
        value = 0
        for level in levels:
            other = (target[0] - level[0], target[1] - level[1])
            if other in components:
                value = value + _bilinear(block, components[level], components[other])
        if expand(value) != 0:
            raise IsotropyPreconditionError(f"Q(v, v) has a nonzero component at level {target}")
        checked.append(target)

    lowest = levels[0] if levels else None
    if lowest is not None and lowest[0] < horizon:
        leading = components[lowest]
        if expand(_bilinear(block, leading, leading)) == 0:
            raise CertificateError("Definite block is isotropic on a leading component", witness=lowest)
    unverified = tuple(level for level in levels if level[0] >= horizon)
    return IsotropyCertificate(horizon, tuple(checked), lowest, unverified)


@dataclass
class ChainReport:
    """One run of the certificate chain on a structure."""

    name: str
    symbolic_defect_zero: bool
    curvature_pairing: str
    isotropy: Optional[IsotropyCertificate]
    kappa_zero: bool
    twisting_element: Optional[str] = None
    incidents: List[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.incidents

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "twisting_element": self.twisting_element,
            "symbolic_defect_zero": self.symbolic_defect_zero,
            "curvature_pairing": self.curvature_pairing,
            "isotropy": None if self.isotropy is None else self.isotropy.to_dict(),
            "kappa_zero": self.kappa_zero,
            "incidents": list(self.incidents),
        }


@dataclass
class UnobstructednessReport:
    """Certificate for a definite n = 4 cyclic structure, stamped with its cutoffs."""

    k_max: int
    cutoff: Fraction
    weight: Fraction
    seed: int
    base: ChainReport
    twists: List[ChainReport]
    mc_point: str

    @property
    def passed(self) -> bool:
        return self.base.passed and all(chain.passed for chain in self.twists)

    def to_dict(self) -> dict:
        return {
            "arity_cutoff": self.k_max,
            "energy_cutoff": str(self.cutoff),
            "symbolic_weight": str(self.weight),
            "seed": self.seed,
            "mc_point": self.mc_point,
            "base": self.base.to_dict(),
            "twists": [chain.to_dict() for chain in self.twists],
            "passed": self.passed,
        }


def _certify_chain(S: AInftyStructure, cyclic: CyclicStructure, block: Matrix, E: Fraction,
                   weight: Fraction, name: str, twisting: Optional[Element] = None) -> ChainReport:
    Q = cyclic.Q
    variables = symbolic_variables(S.module)
    x = symbolic_element(S.module, variables, S.cutoff, weight)
    kappa = kuranishi_symbolic(S, variables, E, weight)
    defect = darboux_defect(S, Q, x).truncate(E)
    curvature = S.curvature()
    curvature_pairing = Q.pair(curvature, curvature).truncate(E)
    incidents = []
    if not defect.is_zero():
        incidents.append(f"curvature pairing defect is {defect.render()}")
    if not curvature_pairing.is_zero():
        incidents.append(f"Q(m_0(1), m_0(1)) is {curvature_pairing.render()}")
    isotropy = None
    try:
        isotropy = zero_from_isotropy(block, kappa, E)
    except IsotropyPreconditionError as exc:
        incidents.append(str(exc))
    if not kappa.is_zero():
        incidents.append(f"symbolic Kuranishi map is nonzero: {kappa.render()}")
    if incidents:
        logger.warning(f"Certificate chain {name} reported {len(incidents)} incidents")
    return ChainReport(
        name=name,
        symbolic_defect_zero=defect.is_zero(),
        curvature_pairing=curvature_pairing.render(),
        isotropy=isotropy,
        kappa_zero=kappa.is_zero(),
        twisting_element=None if twisting is None else twisting.render(),
        incidents=incidents,
    )


def unobstructedness_certificate(CS: CyclicStructure, b: Element, samples: int = 5, seed: int = 1729,
                                 E=None, weight=Fraction(1, 2)) -> UnobstructednessReport:
    """
    Certify k = 0 and k^b' = 0 for a definite n = 4 cyclic structure.

    Each chain checks that Q(k(x), k(x)) - Q(m_0(1), m_0(1)) vanishes for
    the formal x, that Q(m_0(1), m_0(1)) vanishes, runs the isotropy
    induction on the symbolic k, and finally evaluates k directly.

    Args:
        CS: Cyclic structure with n = 4 and a definite degree-2 block
        b: Maurer-Cartan element of CS.S
        samples: Number of random twists b'
        seed: Seed of the twist sampler
        E: Energy bound, at most the structure's cutoff
        weight: Formal energy of the symbolic coordinates

    Returns:
        UnobstructednessReport: Passed iff no chain reported an incident

    Raises:
        MisuseError: n != 4
        DefinitenessError: The degree-2 block is not definite
        CertificateError: b is not a Maurer-Cartan element
    """
    S, Q = CS.S, CS.Q
    if Q.n != 4:
        raise MisuseError(f"The unobstructedness certificate needs n = 4, got n = {Q.n}")
    block = Q.block(2)
    if definiteness(block) == 0:
        raise DefinitenessError("Degree-2 pairing block is indefinite")
    _, E = S.resolve_cutoffs(None, E)
    weight = as_fraction(weight)
    require_degree_one_plus(b, "Maurer-Cartan element")
    if not mc_verify(S, b, E):
        raise CertificateError("The supplied element is not a Maurer-Cartan element", witness=b.render())

    base = _certify_chain(S, CS, block, E, weight, CS.name)
    base_defect = darboux_defect(S, Q, b).truncate(E)
    if not base_defect.is_zero():
        base.incidents.append(f"curvature pairing defect at b is {base_defect.render()}")

    rng = random.Random(seed)
    twists = []
    for index in range(samples):
        b_prime = random_plus_element(rng, S.module, S.cutoff)
        twisted = twist(S, b_prime)
        twists.append(_certify_chain(twisted, CS, block, E, weight, f"{CS.name}^b'{index}", b_prime))
    report = UnobstructednessReport(S.k_max, E, weight, seed, base, twists, b.render())
    logger.info(f"Unobstructedness certificate for {CS.name}: passed={report.passed}")
    return report
