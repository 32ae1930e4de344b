"""Curved A-infinity structures: relation checks, Kuranishi maps and twisting by degree-1 elements."""

import logging
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from .errors import ArityError, CutoffExceededError, DegreeError, KuranishiError, LabelError, ValuationError
from .graded_core import (
    Element,
    GradedModule,
    Label,
    MultiIndex,
    MultilinearMap,
    ainfty_insertion_sign,
    power_terms,
)
from .novikov import DeformationVariable, NovikovScalar, as_fraction, deformation_ring, generator

logger = logging.getLogger(__name__)


class AInftyStructure:
    """
    Structure maps m_0, ..., m_K on a graded module, truncated at energy E.

    Arities without a stored map are zero; arities above k_max are zero by
    construction, so every statement about the structure holds up to
    (k_max, cutoff).
    """

    def __init__(self, module: GradedModule, ops: Mapping[int, MultilinearMap], k_max: int, cutoff):
        self.module = module
        self.k_max = int(k_max)
        self.cutoff = as_fraction(cutoff)
        if self.k_max < 0:
            raise ArityError(f"Arity cutoff must be non-negative, got {k_max}")
        self._ops: Dict[int, MultilinearMap] = {}
        for k, m in sorted(ops.items()):
            if k > self.k_max:
                if not m.is_zero():
                    raise ArityError(f"m_{k} is nonzero but the arity cutoff is {self.k_max}")
                continue
            if m.arity != k:
                raise ArityError(f"Map stored under arity {k} has arity {m.arity}")
            if m.degree_shift != 2 - k:
                raise DegreeError(f"m_{k} must have degree {2 - k}, got {m.degree_shift}")
            if m.module != module:
                raise KuranishiError(f"m_{k} lives on a different module")
            if m.cutoff != self.cutoff:
                m = MultilinearMap(module, k, 2 - k, m.entries, self.cutoff)
            if not m.is_zero():
                self._ops[k] = m

    @classmethod
    def zero(cls, module: GradedModule, k_max: int, cutoff) -> "AInftyStructure":
        return cls(module, {}, k_max, cutoff)

    @property
    def ops(self) -> Dict[int, MultilinearMap]:
        return dict(self._ops)

    def op(self, k: int) -> MultilinearMap:
        if k in self._ops:
            return self._ops[k]
        return MultilinearMap.zero(self.module, k, 2 - k, self.cutoff)

    def curvature(self) -> Element:
        """m_0(1), a degree-2 element."""
        return self.op(0).entry(())

    def is_strict(self) -> bool:
        return self.curvature().is_zero()

    def is_gapped(self) -> bool:
        """True iff every constant of m_0 and m_k (k >= 2) has positive energy."""
        for k, m in self._ops.items():
            if k == 1:
                continue
            if not all(output.is_plus() for _, output in m.items()):
                return False
        return True

    def with_entry(self, arity: int, inputs: MultiIndex, output: Element) -> "AInftyStructure":
        """Copy of the structure with one structure constant replaced."""
        ops = self.ops
        entries = self.op(arity).entries
        entries[tuple(inputs)] = output
        ops[arity] = MultilinearMap(self.module, arity, 2 - arity, entries, self.cutoff)
        return AInftyStructure(self.module, ops, self.k_max, self.cutoff)

    def truncate(self, k_max: Optional[int] = None, cutoff=None) -> "AInftyStructure":
        k_max, cutoff = self.resolve_cutoffs(k_max, cutoff)
        ops = {
            k: MultilinearMap(
                self.module, k, 2 - k,
                {inputs: output.truncate(cutoff) for inputs, output in m.items()},
                cutoff,
            )
            for k, m in self._ops.items()
            if k <= k_max
        }
        return AInftyStructure(self.module, ops, k_max, cutoff)

    def resolve_cutoffs(self, k_max: Optional[int], cutoff) -> Tuple[int, Fraction]:
        k_max = self.k_max if k_max is None else int(k_max)
        cutoff = self.cutoff if cutoff is None else as_fraction(cutoff)
        if k_max > self.k_max:
            raise CutoffExceededError(f"Arity bound {k_max} exceeds the stored cutoff {self.k_max}")
        if cutoff > self.cutoff:
            raise CutoffExceededError(f"Energy bound {cutoff} exceeds the stored cutoff {self.cutoff}")
        return k_max, cutoff

    def constant_count(self) -> int:
        return sum(len(m) for m in self._ops.values())

    def __eq__(self, other) -> bool:
        if not isinstance(other, AInftyStructure):
            return NotImplemented
        if (self.module, self.k_max, self.cutoff) != (other.module, other.k_max, other.cutoff):
            return False
        arities = set(self._ops) | set(other._ops)
        return all(self.op(k) == other.op(k) for k in arities)

    __hash__ = None

    def __repr__(self) -> str:
        return (
            f"AInftyStructure(rank={self.module.rank}, arities={sorted(self._ops)}, "
            f"K={self.k_max}, E={self.cutoff})"
        )


@dataclass(frozen=True)
class RelationViolation:
    """A nonzero residual of the A-infinity relation on one basis tuple."""

    k: int
    inputs: MultiIndex
    residual: Element

    def to_dict(self) -> dict:
        return {
            "arity": self.k,
            "inputs": list(self.inputs),
            "residual": {label: scalar.render() for label, scalar in self.residual.items()},
        }


def check_relations(S: AInftyStructure, K: Optional[int] = None, E=None) -> List[RelationViolation]:
    """
    Check the A-infinity relations on every basis tuple of length <= K.

    The double sum runs over stored entries only: an outer entry of m_{k1}
    and a slot p of it pair with every inner entry of m_{k2} whose output
    hits the label in slot p.

    Args:
        S: The structure to check
        K: Arity bound, at most S.k_max
        E: Energy bound, at most S.cutoff

    Returns:
        List[RelationViolation]: Violations sorted by arity then basis order
    """
    K, E = S.resolve_cutoffs(K, E)
    module = S.module
    producers: Dict[Label, List[Tuple[MultiIndex, NovikovScalar]]] = {}
    for k2, inner in S.ops.items():
        if k2 > K:
            continue
        for inner_inputs, inner_output in inner.items():
            for label, scalar in inner_output.items():
                producers.setdefault(label, []).append((inner_inputs, scalar))

    residuals: Dict[Tuple[int, MultiIndex], Dict[Label, NovikovScalar]] = {}
    for k1, outer in S.ops.items():
        for outer_inputs, outer_output in outer.items():
            for slot, label in enumerate(outer_inputs):
                prefix = outer_inputs[:slot]
                suffix = outer_inputs[slot + 1:]
                sign = ainfty_insertion_sign([module.degree(l) for l in prefix], slot + 1)
                for inner_inputs, scalar in producers.get(label, ()):
                    k = k1 - 1 + len(inner_inputs)
                    if k > K:
                        continue
                    full = prefix + inner_inputs + suffix
                    factor = scalar if sign > 0 else -scalar
                    bucket = residuals.setdefault((k, full), {})
                    for out_label, out_scalar in outer_output.items():
                        term = out_scalar * factor
                        bucket[out_label] = bucket[out_label] + term if out_label in bucket else term

    violations: List[RelationViolation] = []
    for (k, inputs), bucket in residuals.items():
        residual = Element(module, bucket, S.cutoff).truncate(E)
        if not residual.is_zero():
            violations.append(RelationViolation(k, inputs, residual))
    violations.sort(key=lambda v: (v.k, module.sort_key(v.inputs)))
    if violations:
        logger.info(f"Relation check found {len(violations)} violations up to K={K}, E={E}")
    return violations


def require_degree_one_plus(x: Element, what: str) -> None:
    if not x.is_homogeneous(1):
        raise DegreeError(f"{what} must be homogeneous of degree 1")
    if not x.is_plus():
        raise ValuationError(f"{what} has a coefficient of valuation 0")


def kuranishi_eval(S: AInftyStructure, x: Element) -> Element:
    """
    Evaluate the Kuranishi map sum_k m_k(x, ..., x) mod T^E.

    Args:
        S: The structure
        x: Degree-1 element with every coefficient in the maximal ideal

    Returns:
        Element: A degree-2 element
    """
    require_degree_one_plus(x, "Kuranishi argument")
    total = Element.zero(S.module, S.cutoff)
    for k in range(0, S.k_max + 1):
        if k not in S.ops:
            continue
        total = total + power_terms(S.op(k), x)
    return total


def symbolic_variables(module: GradedModule) -> Dict[Label, DeformationVariable]:
    """One deformation variable per degree-1 basis direction, named x0, x1, ..."""
    return {
        label: DeformationVariable(f"x{index}", 1)
        for index, label in enumerate(module.labels_in_degree(1))
    }


def symbolic_element(module: GradedModule, variables: Mapping[Label, DeformationVariable],
                     cutoff, weight=Fraction(1, 2)) -> Element:
    """
    The formal element x = sum_u x_u T^weight u over all degree-1 directions.

    Args:
        module: Module carrying the degree-1 directions
        variables: A deformation variable for every degree-1 label
        cutoff: Energy cutoff of the coefficients
        weight: Formal energy attached to each variable, strictly positive

    Returns:
        Element: Formal degree-1 element with polynomial coefficients
    """
    weight = as_fraction(weight)
    if weight <= 0:
        raise ValuationError(f"Symbolic energy weight must be positive, got {weight}")
    directions = module.labels_in_degree(1)
    missing = [label for label in directions if label not in variables]
    if missing:
        raise LabelError(f"No deformation variable for degree-1 directions {missing}")
    if not directions:
        return Element.zero(module, cutoff)
    ordered = [variables[label] for label in directions]
    poly_ring = deformation_ring(ordered)
    return Element(
        module,
        {
            label: NovikovScalar.monomial(generator(poly_ring, variables[label].name), weight, 0, cutoff)
            for label in directions
        },
        cutoff,
    )


def kuranishi_symbolic(S: AInftyStructure, variables: Optional[Mapping[Label, DeformationVariable]] = None,
                       E=None, weight=Fraction(1, 2)) -> Element:
    """
    Expand the Kuranishi map on the formal degree-1 element.

    The result has coefficients in QQ[variables]; it vanishes identically iff
    every polynomial coefficient vanishes.
    """
    _, E = S.resolve_cutoffs(None, E)
    if variables is None:
        variables = symbolic_variables(S.module)
    x = symbolic_element(S.module, variables, S.cutoff, weight)
    return kuranishi_eval(S, x).truncate(E)


def twist(S: AInftyStructure, b: Element) -> AInftyStructure:
    """
    Twist the structure by a degree-1 element b of positive energy.

    m^b_k(x_1, ..., x_k) is the sum over n of m_n with b inserted in every
    slot not holding an x. Insertions whose energy already reaches the cutoff
    are skipped before expansion.

    Args:
        S: The structure to twist
        b: Degree-1 element in the maximal ideal

    Returns:
        AInftyStructure: The twisted structure at the same cutoffs
    """
    require_degree_one_plus(b, "Twisting element")
    if b.module != S.module:
        raise KuranishiError("Twisting element lives in a different module")
    b_coefficients = b.coefficients
    b_valuation = b.valuation()
    accumulated: Dict[int, Dict[MultiIndex, Dict[Label, NovikovScalar]]] = {}
    for n, m in S.ops.items():
        for inputs, output in m.items():
            base = output.valuation()
            for k in range(n, -1, -1):
                if n - k and base + (n - k) * b_valuation >= S.cutoff:
                    break
                for kept in combinations(range(n), k):
                    kept_set = set(kept)
                    factor: Optional[NovikovScalar] = None
                    for position in range(n):
                        if position in kept_set:
                            continue
                        coeff = b_coefficients.get(inputs[position])
                        if coeff is None:
                            factor = None
                            break
                        factor = coeff if factor is None else factor * coeff
                        if not factor:
                            break
                    if n - k and not factor:
                        continue
                    new_inputs = tuple(inputs[position] for position in kept)
                    bucket = accumulated.setdefault(k, {}).setdefault(new_inputs, {})
                    for label, scalar in output.items():
                        term = scalar * factor if factor is not None else scalar
                        bucket[label] = bucket[label] + term if label in bucket else term
    ops = {
        k: MultilinearMap(
            S.module, k, 2 - k,
            {inputs: Element(S.module, bucket, S.cutoff) for inputs, bucket in entries.items()},
            S.cutoff,
        )
        for k, entries in accumulated.items()
    }
    twisted = AInftyStructure(S.module, ops, S.k_max, S.cutoff)
    logger.debug(f"Twisted structure has {twisted.constant_count()} constants")
    return twisted


def kuranishi_twisted_identity(S: AInftyStructure, b: Element, x: Element) -> Element:
    """Residual kuranishi_eval(twist(S, b), x) - kuranishi_eval(S, b + x); zero when coherent."""
    return kuranishi_eval(twist(S, b), x) - kuranishi_eval(S, b + x)
