"""Cyclic pairings: checker, quadratic identity, curvature pairing defect and cyclic completion."""

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from sympy import Matrix

from .ainfty import AInftyStructure, check_relations, kuranishi_eval, require_degree_one_plus
from .errors import (
    CertificateError,
    FrobeniusError,
    KuranishiError,
    LabelCollisionError,
    MisuseError,
    PairingDegreeError,
)
from .frobenius import FrobeniusTable, check_poincare_data, poincare_labels
from .graded_core import (
    Element,
    GradedModule,
    Label,
    MultiIndex,
    MultilinearMap,
    cyclic_rotation_sign,
    power_terms,
)
from .novikov import NovikovScalar, as_fraction

logger = logging.getLogger(__name__)


def antisymmetry_sign(deg_x: int, deg_y: int) -> int:
    """Sign in Q(x, y) = sign * Q(y, x): (-1)^((deg x + 1)(deg y + 1) + 1)."""
    return -1 if ((deg_x + 1) * (deg_y + 1) + 1) % 2 else 1


class CyclicPairing:
    """
    A bilinear form Q of total degree -n with rational entries.

    Entries outside degree pairs (p, n - p) are rejected; graded
    antisymmetry is not enforced here, check_cyclicity reports it.
    """

    def __init__(self, module: GradedModule, n: int, entries: Mapping[Tuple[Label, Label], Fraction]):
        self.module = module
        self.n = int(n)
        cleaned: Dict[Tuple[Label, Label], Fraction] = {}
        for (left, right), value in entries.items():
            value = as_fraction(value)
            if not value:
                continue
            if module.degree(left) + module.degree(right) != self.n:
                raise PairingDegreeError(
                    f"Q({left}, {right}) pairs degrees {module.degree(left)} and "
                    f"{module.degree(right)}, which do not sum to n={self.n}"
                )
            cleaned[(left, right)] = value
        self._entries = dict(
            sorted(cleaned.items(), key=lambda kv: module.sort_key(kv[0]))
        )
        self._partners: Dict[Label, List[Tuple[Label, Fraction]]] = {}
        for (left, right), value in self._entries.items():
            self._partners.setdefault(left, []).append((right, value))

    @property
    def entries(self) -> Dict[Tuple[Label, Label], Fraction]:
        return dict(self._entries)

    def entry(self, left: Label, right: Label) -> Fraction:
        return self._entries.get((left, right), Fraction(0))

    def partners(self, left: Label) -> List[Tuple[Label, Fraction]]:
        return list(self._partners.get(left, ()))

    def with_entry(self, left: Label, right: Label, value) -> "CyclicPairing":
        entries = self.entries
        entries[(left, right)] = as_fraction(value)
        return CyclicPairing(self.module, self.n, entries)

    def pair(self, x: Element, y: Element) -> NovikovScalar:
        """Q(x, y) extended bilinearly over the Novikov coefficients."""
        total = NovikovScalar.zero(x.cutoff)
        y_coefficients = y.coefficients
        for left, a in x.items():
            for right, value in self._partners.get(left, ()):
                b = y_coefficients.get(right)
                if b is not None:
                    total = total + a * b * value
        return total

    def block(self, degree: int) -> Matrix:
        rows = self.module.labels_in_degree(degree)
        cols = self.module.labels_in_degree(self.n - degree)
        return Matrix(len(rows), len(cols), lambda i, j: self.entry(rows[i], cols[j]))

    def is_nondegenerate(self) -> bool:
        """Every degree block is square and of full rank."""
        for degree in self.module.degree_ranks:
            block = self.block(degree)
            if block.rows != block.cols or block.rank() != block.rows:
                return False
        return True

    def __eq__(self, other) -> bool:
        if not isinstance(other, CyclicPairing):
            return NotImplemented
        return (self.module, self.n, self._entries) == (other.module, other.n, other._entries)

    __hash__ = None

    def __repr__(self) -> str:
        return f"CyclicPairing(n={self.n}, entries={len(self._entries)})"


@dataclass(frozen=True)
class CyclicStructure:
    """An A-infinity structure together with its cyclic pairing."""

    S: AInftyStructure
    Q: CyclicPairing
    name: str = "cyclic"


@dataclass(frozen=True)
class CyclicityViolation:
    """
    A failed cyclicity condition.

    kind is "antisymmetry" (inputs = (x, y)) or "rotation"
    (inputs = (x_0, ..., x_k)); lhs and rhs are the two sides that differ.
    """

    kind: str
    inputs: MultiIndex
    lhs: NovikovScalar
    rhs: NovikovScalar

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "inputs": list(self.inputs),
            "lhs": self.lhs.render(),
            "rhs": self.rhs.render(),
        }


def _pair_with_basis(Q: CyclicPairing, output: Element, label: Label) -> NovikovScalar:
    total = NovikovScalar.zero(output.cutoff)
    for out_label, scalar in output.items():
        value = Q.entry(out_label, label)
        if value:
            total = total + scalar * value
    return total


def check_cyclicity(S: AInftyStructure, Q: CyclicPairing, K: Optional[int] = None, E=None) -> List[CyclicityViolation]:
    """
    Check graded antisymmetry of Q and the rotation condition
    Q(m_k(x_1..x_k), x_0) = sign * Q(m_k(x_0..x_{k-1}), x_k) for 1 <= k <= K.

    Only tuples where one side can be nonzero are visited: the inner
    arguments of a stored entry, extended by a pairing partner of one of
    its output labels.

    Args:
        S: The structure
        Q: Pairing on the same module
        K: Arity bound, at most S.k_max
        E: Energy bound, at most S.cutoff

    Returns:
        List[CyclicityViolation]: Antisymmetry failures first, then rotations by arity
    """
    K, E = S.resolve_cutoffs(K, E)
    if Q.module != S.module:
        raise PairingDegreeError("Pairing and structure live on different modules")
    module = S.module
    degree = module.degree
    violations: List[CyclicityViolation] = []
    zero = NovikovScalar.zero(E)

    seen = set()
    for (left, right), value in Q.entries.items():
        key = tuple(sorted((left, right), key=module.index))
        if key in seen:
            continue
        seen.add(key)
        sign = antisymmetry_sign(degree(left), degree(right))
        if value != sign * Q.entry(right, left):
            violations.append(CyclicityViolation(
                "antisymmetry", (left, right),
                zero + value, zero + sign * Q.entry(right, left),
            ))

    rotations: List[CyclicityViolation] = []
    for k in range(1, K + 1):
        m = S.op(k)
        if m.is_zero():
            continue
        candidates = set()
        for inputs, output in m.items():
            for out_label, _ in output.items():
                for partner, _ in Q.partners(out_label):
                    candidates.add((partner,) + inputs)
                    candidates.add(inputs + (partner,))
        for tup in sorted(candidates, key=module.sort_key):
            lhs = _pair_with_basis(Q, m.entry(tup[1:]), tup[0]).truncate(E)
            sign = cyclic_rotation_sign(degree(tup[0]), [degree(l) for l in tup[1:]])
            rhs = _pair_with_basis(Q, m.entry(tup[:-1]), tup[-1]).truncate(E)
            if sign < 0:
                rhs = -rhs
            if lhs != rhs:
                rotations.append(CyclicityViolation("rotation", tup, lhs, rhs))
    violations.extend(rotations)
    if violations:
        logger.info(f"Cyclicity check found {len(violations)} violations up to K={K}, E={E}")
    return violations


def lemma_sum(S: AInftyStructure, Q: CyclicPairing, x: Element, k: int) -> NovikovScalar:
    """
    The quadratic sum over k1 + k2 = k + 1 of Q(m_k1(x..x), m_k2(x..x)).

    Args:
        S: Structure satisfying the relations
        Q: Cyclic pairing
        x: Degree-1 element in the maximal ideal
        k: Total arity minus one

    Returns:
        NovikovScalar: The sum mod T^E; zero for cyclic structures
    """
    require_degree_one_plus(x, "Quadratic identity argument")
    if k < 0:
        raise KuranishiError(f"k must be non-negative, got {k}")
    powers = {j: power_terms(S.op(j), x) for j in range(0, min(k + 1, S.k_max) + 1) if j in S.ops}
    total = NovikovScalar.zero(S.cutoff)
    for k1, first in powers.items():
        second = powers.get(k + 1 - k1)
        if second is not None:
            total = total + Q.pair(first, second)
    return total


def darboux_defect(S: AInftyStructure, Q: CyclicPairing, x: Element) -> NovikovScalar:
    """
    Q(k(x), k(x)) - Q(m_0(1), m_0(1)) mod T^E.

    Raises:
        MisuseError: n != 4, where degree-2 elements pair to zero by grading
    """
    if Q.n != 4:
        raise MisuseError(f"The curvature pairing identity needs n = 4, got n = {Q.n}")
    kappa = kuranishi_eval(S, x)
    curvature = S.curvature()
    return Q.pair(kappa, kappa) - Q.pair(curvature, curvature)


def dual_label(label: Label) -> Label:
    return f"{label}*"


def cyclic_completion(B: AInftyStructure, n: int, verify: bool = True) -> CyclicStructure:
    """
    Complete B by its shifted dual: C^p = B^p + (B^(n-p))^dual.

    The pairing is the evaluation pairing Q(l, l*) = 1. Maps with exactly
    one dual input are fixed by the rotation condition: for
    Q(m(y_1..y_k), xi*) = c, every rotation of (xi*, y_1, ..., y_k) that
    moves the dual into an input slot determines one new constant. Two or
    more dual inputs give zero.

    Args:
        B: Structure satisfying its relations
        n: Cyclic dimension of the completion
        verify: Re-run both checkers on the result

    Returns:
        CyclicStructure: The completed structure and its pairing

    Raises:
        LabelCollisionError: A dual label already exists in B
        CertificateError: The completion fails a checker
    """
    labels = set(B.module.labels)
    duals = {label: dual_label(label) for label in B.module.labels}
    collisions = sorted(d for d in duals.values() if d in labels)
    if collisions:
        raise LabelCollisionError(f"Dual labels collide with existing labels: {collisions}")
    if verify:
        broken = check_relations(B)
        if broken:
            raise MisuseError(f"Cannot complete a structure that fails its relations at {broken[0].inputs}")

    basis = list(B.module.basis) + [(duals[label], n - degree) for label, degree in B.module.basis]
    module = GradedModule(basis)
    degree = module.degree
    pairing: Dict[Tuple[Label, Label], Fraction] = {}
    dual_sign: Dict[Label, int] = {}
    for label, q in B.module.basis:
        sign = antisymmetry_sign(n - q, q)
        pairing[(label, duals[label])] = Fraction(1)
        pairing[(duals[label], label)] = Fraction(sign)
        dual_sign[label] = sign
    Q = CyclicPairing(module, n, pairing)

    entries: Dict[int, Dict[MultiIndex, Dict[Label, NovikovScalar]]] = {}
    for k, m in B.ops.items():
        target = entries.setdefault(k, {})
        for inputs, output in m.items():
            target[inputs] = dict(output.coefficients)
            if k == 0:
                continue
            for xi, c in output.items():
                tup = (duals[xi],) + inputs
                phi = c
                for _ in range(k):
                    tup = tup[1:] + tup[:1]
                    sign = cyclic_rotation_sign(degree(tup[0]), [degree(l) for l in tup[1:]])
                    if sign < 0:
                        phi = -phi
                    x0 = tup[0]
                    value = phi if dual_sign[x0] > 0 else -phi
                    bucket = target.setdefault(tup[1:], {})
                    out = duals[x0]
                    bucket[out] = bucket[out] + value if out in bucket else value
    ops = {
        k: MultilinearMap(
            module, k, 2 - k,
            {inputs: Element(module, bucket, B.cutoff) for inputs, bucket in table.items()},
            B.cutoff,
        )
        for k, table in entries.items()
    }
    S = AInftyStructure(module, ops, B.k_max, B.cutoff)
    completed = CyclicStructure(S, Q, "completion")
    if verify:
        _verify_cyclic(completed)
    logger.debug(f"Completed rank {B.module.rank} structure to rank {module.rank} with n={n}")
    return completed


def _verify_cyclic(structure: CyclicStructure) -> None:
    relations = check_relations(structure.S)
    if relations:
        raise CertificateError("Constructed structure fails its relations", witness=relations[0])
    cyclicity = check_cyclicity(structure.S, structure.Q)
    if cyclicity:
        raise CertificateError("Constructed structure fails cyclicity", witness=cyclicity[0])


def frobenius_cyclic(table: FrobeniusTable, n: Optional[int] = None, k_max: int = 6, cutoff=3,
                     commutative: bool = True, verify: bool = True) -> CyclicStructure:
    """
    Strict cyclic structure of a unital algebra with a trace.

    m_2(x, y) = (-1)^{|x|} x y and Q(x, y) = (-1)^{|x|} tr(x y).

    Args:
        table: Multiplication table with its trace
        n: Cyclic dimension; defaults to the trace degree
        k_max: Arity cutoff of the structure
        cutoff: Energy cutoff of the structure
        commutative: Require graded commutativity; matrix-coefficient models
            only need a graded-symmetric trace
        verify: Re-run both checkers on the result

    Returns:
        CyclicStructure: The strict cyclic structure

    Raises:
        FrobeniusError: An axiom fails; the witness names the basis elements
    """
    n = table.top_degree if n is None else n
    if n != table.top_degree:
        raise FrobeniusError(f"Trace lives in degree {table.top_degree}, not n", witness=n)
    module = table.module
    stray = [label for label in table.trace if module.degree(label) != n]
    if stray:
        raise FrobeniusError("Trace is supported outside the top degree", witness=stray)
    witness = table.associativity_witness()
    if witness:
        raise FrobeniusError("Multiplication is not associative", witness=witness)
    witness = table.unit_witness()
    if witness:
        raise FrobeniusError("Unit does not act as identity", witness=witness)
    if commutative:
        witness = table.commutativity_witness()
        if witness:
            raise FrobeniusError("Multiplication is not graded commutative", witness=witness)
    witness = table.trace_symmetry_witness()
    if witness:
        raise FrobeniusError("Trace is not graded symmetric", witness=witness)
    degenerate = table.degenerate_degree()
    if degenerate is not None:
        raise FrobeniusError("Trace pairing is degenerate", witness=f"degree {degenerate}")

    cutoff = as_fraction(cutoff)
    degree = module.degree
    m2: Dict[MultiIndex, Element] = {}
    pairing: Dict[Tuple[Label, Label], Fraction] = {}
    for (left, right), vector in table.products.items():
        sign = -1 if degree(left) % 2 else 1
        m2[(left, right)] = Element(module, {l: sign * c for l, c in vector.items()}, cutoff)
        value = table.trace_of(vector)
        if value:
            pairing[(left, right)] = sign * value
    S = AInftyStructure(module, {2: MultilinearMap(module, 2, 0, m2, cutoff)}, k_max, cutoff)
    structure = CyclicStructure(S, CyclicPairing(module, n, pairing), table.name)
    if verify:
        _verify_cyclic(structure)
    return structure


def poincare_model(betti: Sequence[int], intersection_form: Sequence[Sequence[int]],
                   deg13_pairing: Sequence[Sequence[int]]) -> Tuple[GradedModule, CyclicPairing]:
    """
    Module and n = 4 pairing of a closed oriented 4-manifold's cohomology.

    deg13_pairing[i][j] is the cup pairing of a_i with c_j; the signs follow
    Q(x, y) = (-1)^{|x|} <x, y>, so the degree-2 block is the intersection
    form and the degree-1/3 block is graded antisymmetric.

    Args:
        betti: Ranks b0..b4
        intersection_form: Symmetric b2 x b2 integer matrix
        deg13_pairing: b1 x b1 integer matrix

    Returns:
        Tuple[GradedModule, CyclicPairing]: Basis labelled 1, a, h, c, pt
    """
    check_poincare_data(betti, intersection_form, deg13_pairing)
    module = GradedModule(poincare_labels(betti))
    entries: Dict[Tuple[Label, Label], Fraction] = {}
    for unit, top in zip(module.labels_in_degree(0), module.labels_in_degree(4)):
        entries[(unit, top)] = Fraction(1)
        entries[(top, unit)] = Fraction(1)
    h = module.labels_in_degree(2)
    for i, hi in enumerate(h):
        for j, hj in enumerate(h):
            if intersection_form[i][j]:
                entries[(hi, hj)] = Fraction(intersection_form[i][j])
    a = module.labels_in_degree(1)
    c = module.labels_in_degree(3)
    for i, ai in enumerate(a):
        for j, cj in enumerate(c):
            if deg13_pairing[i][j]:
                entries[(ai, cj)] = Fraction(-deg13_pairing[i][j])
                entries[(cj, ai)] = Fraction(deg13_pairing[i][j])
    return module, CyclicPairing(module, 4, entries)
