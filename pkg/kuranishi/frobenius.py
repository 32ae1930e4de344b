"""Multiplication tables of graded Frobenius algebras and the standard models."""

import logging
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from sympy import Matrix

from .errors import FrobeniusError, PairingDegreeError
from .graded_core import GradedModule, Label

logger = logging.getLogger(__name__)

Vector = Dict[Label, Fraction]


def _add_into(target: Vector, label: Label, value: Fraction) -> None:
    total = target.get(label, Fraction(0)) + value
    if total:
        target[label] = total
    else:
        target.pop(label, None)


@dataclass
class FrobeniusTable:
    """
    A graded algebra given by structure constants on a labelled basis.

    Attributes:
        module: Graded basis of the algebra
        products: (left, right) -> product vector; absent pairs multiply to 0
        unit: The unit as a vector
        trace: Linear functional, supported on top-degree labels
        top_degree: The degree the trace lives on
    """

    module: GradedModule
    products: Dict[Tuple[Label, Label], Vector]
    unit: Vector
    trace: Vector
    top_degree: int
    name: str = "algebra"

    def multiply(self, x: Mapping[Label, Fraction], y: Mapping[Label, Fraction]) -> Vector:
        result: Vector = {}
        for left, a in x.items():
            for right, b in y.items():
                for label, c in self.products.get((left, right), {}).items():
                    _add_into(result, label, a * b * c)
        return result

    def basis_product(self, left: Label, right: Label) -> Vector:
        return dict(self.products.get((left, right), {}))

    def trace_of(self, x: Mapping[Label, Fraction]) -> Fraction:
        return sum((a * self.trace.get(label, Fraction(0)) for label, a in x.items()), Fraction(0))

    def associativity_witness(self) -> Optional[Tuple[Label, Label, Label]]:
        labels = self.module.labels
        for a in labels:
            for b in labels:
                ab = self.basis_product(a, b)
                for c in labels:
                    left = self.multiply(ab, {c: Fraction(1)})
                    right = self.multiply({a: Fraction(1)}, self.basis_product(b, c))
                    if left != right:
                        return (a, b, c)
        return None

    def unit_witness(self) -> Optional[Label]:
        for label in self.module.labels:
            basis = {label: Fraction(1)}
            if self.multiply(self.unit, basis) != basis or self.multiply(basis, self.unit) != basis:
                return label
        return None

    def commutativity_witness(self) -> Optional[Tuple[Label, Label]]:
        degree = self.module.degree
        for a in self.module.labels:
            for b in self.module.labels:
                sign = -1 if degree(a) * degree(b) % 2 else 1
                swapped = {l: sign * c for l, c in self.basis_product(b, a).items()}
                if self.basis_product(a, b) != swapped:
                    return (a, b)
        return None

    def trace_symmetry_witness(self) -> Optional[Tuple[Label, Label]]:
        """First pair with tr(xy) != (-1)^{|x||y|} tr(yx)."""
        degree = self.module.degree
        for a in self.module.labels:
            for b in self.module.labels:
                sign = -1 if degree(a) * degree(b) % 2 else 1
                if self.trace_of(self.basis_product(a, b)) != sign * self.trace_of(self.basis_product(b, a)):
                    return (a, b)
        return None

    def trace_block(self, degree: int) -> Matrix:
        """Matrix of tr(x y) with x in the given degree, y in the complementary one."""
        rows = self.module.labels_in_degree(degree)
        cols = self.module.labels_in_degree(self.top_degree - degree)
        return Matrix(len(rows), len(cols), lambda i, j: self.trace_of(self.basis_product(rows[i], cols[j])))

    def degenerate_degree(self) -> Optional[int]:
        """First degree whose trace block is not square of full rank."""
        for degree in sorted(self.module.degree_ranks):
            block = self.trace_block(degree)
            if block.rows != block.cols or block.rank() != block.rows:
                return degree
        return None


def _subset_label(prefix: str, subset: Sequence[int], wide: bool) -> Label:
    if not subset:
        return "1"
    joiner = "_" if wide else ""
    return prefix + joiner.join(str(i) for i in subset)


def exterior_algebra(r: int, prefix: str = "e") -> FrobeniusTable:
    """
    Exterior algebra on r degree-1 generators, H*(T^r).

    Args:
        r: Number of generators
        prefix: Label prefix; e_S is labelled prefix + indices of S

    Returns:
        FrobeniusTable: Trace is the coefficient of the top class
    """
    wide = r > 9
    subsets: List[Tuple[int, ...]] = [
        subset for size in range(r + 1) for subset in combinations(range(1, r + 1), size)
    ]
    labels = {subset: _subset_label(prefix, subset, wide) for subset in subsets}
    module = GradedModule((labels[subset], len(subset)) for subset in subsets)
    products: Dict[Tuple[Label, Label], Vector] = {}
    for left in subsets:
        for right in subsets:
            if set(left) & set(right):
                continue
            inversions = sum(1 for i in left for j in right if i > j)
            merged = tuple(sorted(left + right))
            products[(labels[left], labels[right])] = {
                labels[merged]: Fraction(-1 if inversions % 2 else 1)
            }
    top = tuple(range(1, r + 1))
    return FrobeniusTable(
        module, products, {"1": Fraction(1)}, {labels[top]: Fraction(1)}, r, f"exterior({r})"
    )


def matrix_algebra(size: int) -> FrobeniusTable:
    """Matrix units E_ij in degree 0 with the matrix trace."""
    indices = [(i, j) for i in range(1, size + 1) for j in range(1, size + 1)]
    label = {pair: f"E{pair[0]}{pair[1]}" for pair in indices}
    module = GradedModule((label[pair], 0) for pair in indices)
    products = {
        (label[(i, j)], label[(j2, l)]): {label[(i, l)]: Fraction(1)}
        for (i, j) in indices
        for (j2, l) in indices
        if j == j2
    }
    diagonal = {label[(i, i)]: Fraction(1) for i in range(1, size + 1)}
    return FrobeniusTable(module, products, dict(diagonal), dict(diagonal), 0, f"matrix({size})")


def truncated_polynomial(degree: int, top_power: int, symbol: str = "x") -> FrobeniusTable:
    """
    QQ[x]/(x^(top_power+1)) with deg x = degree; e.g. H*(CP^2) is (2, 2).

    Raises:
        FrobeniusError: An odd generator would need x^2 = 0
    """
    if degree % 2 and top_power > 1:
        raise FrobeniusError("An odd generator squares to zero", witness=(degree, top_power))
    labels = ["1", symbol] + [f"{symbol}{p}" for p in range(2, top_power + 1)]
    module = GradedModule((labels[p], degree * p) for p in range(top_power + 1))
    products = {
        (labels[p], labels[q]): {labels[p + q]: Fraction(1)}
        for p in range(top_power + 1)
        for q in range(top_power + 1)
        if p + q <= top_power
    }
    return FrobeniusTable(
        module, products, {"1": Fraction(1)}, {labels[top_power]: Fraction(1)},
        degree * top_power, f"truncated({degree},{top_power})",
    )


def tensor_algebra(first: FrobeniusTable, second: FrobeniusTable) -> FrobeniusTable:
    """
    Graded tensor product with the Koszul sign (a x b)(a' x b') = (-1)^{|b||a'|} aa' x bb'.

    Labels are joined with a dot; the trace is the product of the traces.
    """
    deg_a = first.module.degree
    deg_b = second.module.degree
    pairs = [(a, b) for a in first.module.labels for b in second.module.labels]
    label = {pair: f"{pair[0]}.{pair[1]}" for pair in pairs}
    module = GradedModule((label[(a, b)], deg_a(a) + deg_b(b)) for a, b in pairs)
    products: Dict[Tuple[Label, Label], Vector] = {}
    for a, b in pairs:
        for a2, b2 in pairs:
            left = first.basis_product(a, a2)
            right = second.basis_product(b, b2)
            if not left or not right:
                continue
            sign = -1 if deg_b(b) * deg_a(a2) % 2 else 1
            vector: Vector = {}
            for l1, c1 in left.items():
                for l2, c2 in right.items():
                    _add_into(vector, label[(l1, l2)], sign * c1 * c2)
            if vector:
                products[(label[(a, b)], label[(a2, b2)])] = vector
    unit: Vector = {}
    for l1, c1 in first.unit.items():
        for l2, c2 in second.unit.items():
            _add_into(unit, label[(l1, l2)], c1 * c2)
    trace: Vector = {}
    for l1, c1 in first.trace.items():
        for l2, c2 in second.trace.items():
            _add_into(trace, label[(l1, l2)], c1 * c2)
    return FrobeniusTable(
        module, products, unit, trace, first.top_degree + second.top_degree,
        f"{first.name}*{second.name}",
    )


def poincare_labels(betti: Sequence[int]) -> List[Tuple[Label, int]]:
    """Basis labels 1, a, h, c, pt per degree, indexed from 1 when a degree has rank > 1."""
    names = ["1", "a", "h", "c", "pt"]
    basis: List[Tuple[Label, int]] = []
    for degree, rank in enumerate(betti):
        for index in range(1, rank + 1):
            name = names[degree]
            if rank > 1:
                name = f"{'u' if degree == 0 else name}{index}"
            basis.append((name, degree))
    return basis


def check_poincare_data(betti: Sequence[int], form: Sequence[Sequence[int]],
                        deg13: Sequence[Sequence[int]]) -> None:
    if len(betti) != 5 or any(b < 0 for b in betti):
        raise PairingDegreeError(f"Betti numbers must be five non-negative ranks, got {list(betti)}")
    if betti[0] != betti[4] or betti[1] != betti[3]:
        raise PairingDegreeError(f"Poincare duality needs b0 = b4 and b1 = b3, got {list(betti)}")
    form_matrix = Matrix(form) if betti[2] else Matrix.zeros(0, 0)
    if form_matrix.shape != (betti[2], betti[2]) or form_matrix != form_matrix.T:
        raise PairingDegreeError(f"Intersection form must be a symmetric {betti[2]}x{betti[2]} matrix")
    deg13_matrix = Matrix(deg13) if betti[1] else Matrix.zeros(0, 0)
    if deg13_matrix.shape != (betti[1], betti[1]):
        raise PairingDegreeError(f"Degree 1/3 pairing must be a {betti[1]}x{betti[1]} matrix")
    if form_matrix.rank() != betti[2] or deg13_matrix.rank() != betti[1]:
        raise PairingDegreeError("Poincare pairing has a degenerate block")


def poincare_algebra(betti: Sequence[int], form: Sequence[Sequence[int]],
                     deg13: Sequence[Sequence[int]]) -> FrobeniusTable:
    """
    Cohomology ring of a connected sum of copies of S^1 x S^3 with a
    simply connected 4-manifold of intersection form `form`.

    Degree-1 classes multiply to zero; a_i c_j = deg13[i][j] pt and
    h_i h_j = form[i][j] pt.
    """
    check_poincare_data(betti, form, deg13)
    if betti[0] != 1:
        raise PairingDegreeError("The cohomology ring model needs b0 = 1")
    module = GradedModule(poincare_labels(betti))
    ones = module.labels_in_degree(0)
    a = module.labels_in_degree(1)
    h = module.labels_in_degree(2)
    c = module.labels_in_degree(3)
    pt = module.labels_in_degree(4)[0]
    products: Dict[Tuple[Label, Label], Vector] = {}
    for label in module.labels:
        products[(ones[0], label)] = {label: Fraction(1)}
        products[(label, ones[0])] = {label: Fraction(1)}
    for i, hi in enumerate(h):
        for j, hj in enumerate(h):
            if form[i][j]:
                products[(hi, hj)] = {pt: Fraction(form[i][j])}
    for i, ai in enumerate(a):
        for j, cj in enumerate(c):
            if deg13[i][j]:
                products[(ai, cj)] = {pt: Fraction(deg13[i][j])}
                products[(cj, ai)] = {pt: Fraction(-deg13[i][j])}
    return FrobeniusTable(
        module, products, {ones[0]: Fraction(1)}, {pt: Fraction(1)}, 4, f"poincare{tuple(betti)}"
    )
