"""Hodge star, *4, Cayley-plane checks and unimodular lattices; exact except for cayley_check."""

import logging
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations, product
from typing import List, Optional, Sequence, Tuple

import numpy as np
from sympy import Expr, LeviCivita, Matrix, Rational, eye, expand, radsimp, sqrt, sympify
from sympy.polys.domains import QQ, QQ_I

from .errors import DefinitenessError, DegenerateGeometryError, MisuseError, NonUnimodularError

logger = logging.getLogger(__name__)

PAIRS: Tuple[Tuple[int, int], ...] = tuple(combinations(range(4), 2))
PAIR_NAMES: Tuple[str, ...] = tuple(f"e{i + 1}{j + 1}" for i, j in PAIRS)
STAR4_CONSTANT = 1
CAYLEY_TOLERANCE = 1e-9


def _rational(value) -> Rational:
    if isinstance(value, Fraction):
        return Rational(value.numerator, value.denominator)
    return Rational(value)


def canonical(expr) -> Expr:
    """Canonical form in QQ(sqrt d); equal values have equal forms."""
    return expand(radsimp(sympify(expr)))


def is_exact_zero(expr) -> bool:
    return canonical(expr) == 0


def definiteness(matrix: Matrix) -> int:
    """
    Sign of a symmetric matrix via leading principal minors.

    Returns:
        int: 1 positive definite, -1 negative definite, 0 otherwise; an
        empty matrix counts as positive definite
    """
    matrix = Matrix(matrix)
    size = matrix.rows
    if size == 0:
        return 1
    if matrix != matrix.T:
        return 0
    if all(matrix[:k, :k].det() > 0 for k in range(1, size + 1)):
        return 1
    if all((-matrix)[:k, :k].det() > 0 for k in range(1, size + 1)):
        return -1
    return 0


class Metric4:
    """A positive definite symmetric 4x4 rational matrix."""

    def __init__(self, entries):
        self.matrix = Matrix(4, 4, [_rational(v) for row in entries for v in row])
        if self.matrix != self.matrix.T:
            raise DegenerateGeometryError("Metric is not symmetric")
        if definiteness(self.matrix) != 1:
            raise DegenerateGeometryError("Metric is not positive definite")
        self.inverse = self.matrix.inv()
        self.det = self.matrix.det()
        self.sqrt_det = sqrt(self.det)

    @classmethod
    def identity(cls) -> "Metric4":
        return cls([[1 if i == j else 0 for j in range(4)] for i in range(4)])

    def rows(self) -> List[List[str]]:
        return [[str(self.matrix[i, j]) for j in range(4)] for i in range(4)]


class TwoForm:
    """
    A 2-form on R^4 in the basis e12, e13, e14, e23, e24, e34.

    Components are exact sympy numbers; after a Hodge star they may involve
    sqrt(det g).
    """

    def __init__(self, components: Sequence):
        if len(components) != 6:
            raise DegenerateGeometryError(f"A 2-form on R^4 has 6 components, got {len(components)}")
        self.components: Tuple[Expr, ...] = tuple(
            canonical(_rational(c) if isinstance(c, (int, Fraction, str)) else c) for c in components
        )

    @classmethod
    def basis(cls, name: str) -> "TwoForm":
        return cls([1 if n == name else 0 for n in PAIR_NAMES])

    def matrix(self) -> Matrix:
        W = Matrix.zeros(4, 4)
        for (i, j), c in zip(PAIRS, self.components):
            W[i, j] = c
            W[j, i] = -c
        return W

    def __add__(self, other: "TwoForm") -> "TwoForm":
        return TwoForm([a + b for a, b in zip(self.components, other.components)])

    def __sub__(self, other: "TwoForm") -> "TwoForm":
        return TwoForm([a - b for a, b in zip(self.components, other.components)])

    def __neg__(self) -> "TwoForm":
        return TwoForm([-a for a in self.components])

    def scale(self, factor) -> "TwoForm":
        return TwoForm([factor * a for a in self.components])

    def is_zero(self) -> bool:
        return all(c == 0 for c in self.components)

    def __eq__(self, other) -> bool:
        if not isinstance(other, TwoForm):
            return NotImplemented
        return (self - other).is_zero()

    __hash__ = None

    def render(self) -> List[str]:
        return [str(c) for c in self.components]

    def __repr__(self) -> str:
        return f"TwoForm({self.render()})"


def hodge_star2(g: Metric4, w: TwoForm) -> TwoForm:
    """
    Hodge star of a 2-form: (*w)_kl = 1/2 sqrt(det g) eps_ijkl g^ii' g^jj' w_i'j'.

    Args:
        g: Positive definite metric
        w: The 2-form

    Returns:
        TwoForm: *w, exact in QQ(sqrt(det g))
    """
    raised = g.inverse * w.matrix() * g.inverse
    components = []
    for k, l in PAIRS:
        total = sum(
            LeviCivita(i, j, k, l) * raised[i, j]
            for i in range(4)
            for j in range(4)
            if len({i, j, k, l}) == 4
        )
        components.append(Rational(1, 2) * g.sqrt_det * total)
    return TwoForm(components)


def sd_split(g: Metric4, w: TwoForm) -> Tuple[TwoForm, TwoForm]:
    """Return (w+, w-) = ((w + *w)/2, (w - *w)/2)."""
    star = hodge_star2(g, w)
    half = Rational(1, 2)
    return (w + star).scale(half), (w - star).scale(half)


def star_matrix(g: Metric4) -> Matrix:
    """Matrix of * on the basis e12..e34; column j is the star of basis form j."""
    columns = [hodge_star2(g, TwoForm.basis(name)).components for name in PAIR_NAMES]
    return Matrix(6, 6, lambda i, j: columns[j][i])


def star_eigen_dimensions(g: Metric4) -> Tuple[int, int]:
    """
    Dimensions of the +1 and -1 eigenspaces of *, from the traces of the
    projectors (1 +- *)/2 after checking ** = 1.
    """
    S = star_matrix(g)
    square = (S * S).applyfunc(canonical)
    if square != eye(6):
        raise DegenerateGeometryError("Hodge star does not square to the identity")
    trace = canonical(S.trace())
    plus = canonical((6 + trace) / 2)
    minus = canonical((6 - trace) / 2)
    return int(plus), int(minus)


def inner_product(g: Metric4, a: TwoForm, b: TwoForm):
    """<a, b>_g = sum over i<j, k<l of a_ij b_kl (g^ik g^jl - g^il g^jk)."""
    inv = g.inverse
    total = 0
    for (i, j), a_ij in zip(PAIRS, a.components):
        if a_ij == 0:
            continue
        for (k, l), b_kl in zip(PAIRS, b.components):
            if b_kl == 0:
                continue
            total += a_ij * b_kl * (inv[i, k] * inv[j, l] - inv[i, l] * inv[j, k])
    return canonical(total)


def wedge_coefficient(g: Metric4, w: TwoForm):
    """Coefficient of w^w on the metric volume form sqrt(det g) e1234."""
    c = w.components
    return canonical(2 * (c[0] * c[5] - c[1] * c[4] + c[2] * c[3]) / g.sqrt_det)


@dataclass(frozen=True)
class WedgeSquareReport:
    """Residuals of the wedge-square and energy identities; both vanish exactly."""

    wedge_residual: Expr
    energy_residual: Expr
    norm_plus: Expr
    norm_minus: Expr

    @property
    def passed(self) -> bool:
        return self.wedge_residual == 0 and self.energy_residual == 0


def wedge_square_check(g: Metric4, w: TwoForm) -> WedgeSquareReport:
    """
    Compare w^w with (|w+|^2 - |w-|^2) dvol and |w|^2 with |w+|^2 + |w-|^2.

    Args:
        g: Positive definite metric
        w: The 2-form

    Returns:
        WedgeSquareReport: Both residuals in canonical form
    """
    plus, minus = sd_split(g, w)
    norm_plus = inner_product(g, plus, plus)
    norm_minus = inner_product(g, minus, minus)
    wedge_residual = canonical(wedge_coefficient(g, w) - (norm_plus - norm_minus))
    energy_residual = canonical(inner_product(g, w, w) - (norm_plus + norm_minus))
    return WedgeSquareReport(wedge_residual, energy_residual, norm_plus, norm_minus)


@dataclass(frozen=True)
class EnergyShadowReport:
    """For anti-self-dual forms with zero total wedge square, all forms vanish."""

    all_anti_self_dual: bool
    wedge_total: Expr
    all_zero: bool

    @property
    def hypothesis(self) -> bool:
        return self.all_anti_self_dual and self.wedge_total == 0

    @property
    def holds(self) -> bool:
        return not self.hypothesis or self.all_zero


def energy_shadow(g: Metric4, forms: Sequence[TwoForm]) -> EnergyShadowReport:
    """Check the finite family version of 'ASD with vanishing total square is zero'."""
    asd = all(sd_split(g, w)[0].is_zero() for w in forms)
    total = canonical(sum((wedge_coefficient(g, w) for w in forms), Rational(0)))
    return EnergyShadowReport(asd, total, all(w.is_zero() for w in forms))


# (0,2)-forms on flat C^4

def gaussian(value):
    """Coerce an int, Fraction, complex pair (re, im) or QQ_I element into QQ_I."""
    if isinstance(value, (tuple, list)):
        re, im = value
        return QQ_I(_rational(re), _rational(im))
    if isinstance(value, (int, Fraction, str)):
        return QQ_I(_rational(value), 0)
    return QQ_I.convert(value)


def _conjugate(value):
    return value.new(value.x, -value.y)


def star4_flat(alpha: Sequence) -> Tuple:
    """
    *4 on (0,2)-forms of flat C^4: *4(sum a_ij dzb_i^dzb_j) = sum conj(a_ij) eps_ijkl dzb_k^dzb_l.

    The normalisation constant relating Omega and the metric volume is
    STAR4_CONSTANT = 1.

    Args:
        alpha: Six Gaussian rational coefficients on dzb12, dzb13, ..., dzb34

    Returns:
        Tuple: Six QQ_I coefficients of *4(alpha)
    """
    if len(alpha) != 6:
        raise MisuseError(f"A (0,2)-form on C^4 has 6 components, got {len(alpha)}")
    coefficients = [gaussian(a) for a in alpha]
    result = []
    for k, l in PAIRS:
        total = QQ_I.zero
        for (i, j), a in zip(PAIRS, coefficients):
            if len({i, j, k, l}) == 4:
                total += _conjugate(a) * int(LeviCivita(i, j, k, l)) * STAR4_CONSTANT
        result.append(total)
    return tuple(result)


def star4_real_matrix() -> Matrix:
    """*4 as a real-linear map on R^12 = (Re a_12, Im a_12, ..., Re a_34, Im a_34)."""
    columns = []
    for index in range(12):
        basis = [(0, 0)] * 6
        basis[index // 2] = (1, 0) if index % 2 == 0 else (0, 1)
        image = star4_flat(basis)
        column = []
        for value in image:
            column.extend([QQ.to_sympy(value.x), QQ.to_sympy(value.y)])
        columns.append(column)
    return Matrix(12, 12, lambda i, j: columns[j][i])


def star4_eigen_dimensions() -> Tuple[int, int]:
    """Real dimensions of the +1 and -1 eigenspaces of *4."""
    M = star4_real_matrix()
    if M * M != eye(12):
        raise DegenerateGeometryError("*4 does not square to the identity")
    return 12 - (M - eye(12)).rank(), 12 - (M + eye(12)).rank()


# Cayley checks on 4-planes in R^8 = C^4

class FourPlane:
    """
    An oriented 4-plane in R^8 spanned by four rational vectors.

    Coordinates are (x1, x2, x3, x4, y1, y2, y3, y4) with z_j = x_j + i y_j.
    """

    def __init__(self, vectors: Sequence[Sequence], orientation: int = 1):
        if len(vectors) != 4 or any(len(v) != 8 for v in vectors):
            raise DegenerateGeometryError("A 4-plane needs four vectors in R^8")
        if orientation not in (1, -1):
            raise DegenerateGeometryError(f"Orientation must be +1 or -1, got {orientation}")
        self.vectors = Matrix(4, 8, [_rational(c) for v in vectors for c in v])
        if self.vectors.rank() != 4:
            raise DegenerateGeometryError("Spanning vectors have rank below 4")
        self.orientation = orientation

    def as_array(self) -> np.ndarray:
        return np.array(self.vectors.tolist(), dtype=float)

    def rows(self) -> List[List[str]]:
        return [[str(c) for c in self.vectors.row(i)] for i in range(4)]


@dataclass(frozen=True)
class CayleyReport:
    """Float evaluation of the Cayley calibration on an oriented 4-plane."""

    omega_plus_norm: float
    omega_plus_norm_sq: float
    re_omega_value: float
    im_omega_value: float
    calibration_value: float
    cayley_calibration_gap: float
    special_asd: bool
    calibrated: bool
    tolerance: float

    @property
    def biconditional_holds(self) -> bool:
        return self.calibrated == self.special_asd

    def to_dict(self) -> dict:
        return {
            "omega_plus_norm": round(self.omega_plus_norm, 12),
            "re_omega_value": round(self.re_omega_value, 12),
            "im_omega_value": round(self.im_omega_value, 12),
            "calibration_value": round(self.calibration_value, 12),
            "cayley_calibration_gap": round(self.cayley_calibration_gap, 12),
            "special_asd": self.special_asd,
            "calibrated": self.calibrated,
            "biconditional_holds": self.biconditional_holds,
            "tolerance": self.tolerance,
        }


def cayley_check(P: FourPlane, tolerance: float = CAYLEY_TOLERANCE) -> CayleyReport:
    """
    Evaluate omega|P, its self-dual part, Omega|P and the Cayley form on P.

    With Z the 4x4 complex matrix of the spanning vectors, W_ab = omega(v_a, v_b)
    and G the Gram matrix: Omega(P) = det Z, (omega^2/2)(P) = Pf W and
    vol(P) = sqrt(det G). The calibration value is (Re Omega - omega^2/2)/vol
    and the gap is 1 minus it.

    Args:
        P: Oriented 4-plane
        tolerance: Float tolerance for every zero test

    Returns:
        CayleyReport: Values per unit volume, orientation applied
    """
    V = P.as_array()
    Z = V[:, :4] + 1j * V[:, 4:]
    x, y = V[:, :4], V[:, 4:]
    W = x @ y.T - y @ x.T
    G = V @ V.T
    det_g = float(np.linalg.det(G))
    if det_g <= 0:
        raise DegenerateGeometryError("Gram determinant is not positive")
    vol = np.sqrt(det_g)
    sign = float(P.orientation)
    omega = sign * complex(np.linalg.det(Z)) / vol
    pfaffian = W[0, 1] * W[2, 3] - W[0, 2] * W[1, 3] + W[0, 3] * W[1, 2]
    half_square = sign * pfaffian / vol
    calibration = omega.real - half_square
    G_inv = np.linalg.inv(G)
    norm_sq = 0.5 * float(np.trace(G_inv @ W @ G_inv @ W.T))
    plus_sq = 0.5 * (norm_sq + 2.0 * half_square)
    special = plus_sq <= tolerance and abs(omega.imag) <= tolerance and omega.real >= -tolerance
    gap = 1.0 - calibration
    return CayleyReport(
        omega_plus_norm=float(np.sqrt(max(plus_sq, 0.0))),
        omega_plus_norm_sq=plus_sq,
        re_omega_value=omega.real,
        im_omega_value=omega.imag,
        calibration_value=calibration,
        cayley_calibration_gap=gap,
        special_asd=bool(special),
        calibrated=bool(abs(gap) <= tolerance),
        tolerance=tolerance,
    )


# definite unimodular lattices

class IntersectionForm:
    """A symmetric integer matrix."""

    def __init__(self, entries):
        rows = [list(row) for row in entries]
        if any(not isinstance(v, int) or isinstance(v, bool) for row in rows for v in row):
            raise NonUnimodularError("Intersection form entries must be integers")
        self.matrix = Matrix(rows) if rows else Matrix.zeros(0, 0)
        if self.matrix.rows != self.matrix.cols or self.matrix != self.matrix.T:
            raise NonUnimodularError("Intersection form must be a symmetric square matrix")

    @property
    def rank(self) -> int:
        return self.matrix.rows

    def det(self) -> int:
        return int(self.matrix.det()) if self.rank else 1

    def is_unimodular(self) -> bool:
        return abs(self.det()) == 1

    def rows(self) -> List[List[int]]:
        return [[int(v) for v in self.matrix.row(i)] for i in range(self.rank)]


def is_definite(F: IntersectionForm) -> Tuple[bool, int]:
    """Principal-minor test; returns (definite, sign) with sign 0 when indefinite."""
    sign = definiteness(F.matrix)
    return sign != 0, sign


def _short_vectors(form: np.ndarray, bounds: Sequence[int]) -> List[Tuple[int, ...]]:
    ranges = [range(-b, b + 1) for b in bounds]
    grid = np.array(list(product(*ranges)), dtype=np.int64)
    norms = np.einsum("ni,ij,nj->n", grid, form, grid)
    found = []
    for vector in grid[norms == 1]:
        first = next(c for c in vector if c != 0)
        if first > 0:
            found.append(tuple(int(c) for c in vector))
    return found


def diagonalize_definite(F: IntersectionForm, max_rank: int = 7) -> Optional[Matrix]:
    """
    Find U over ZZ with U^T F U = +-identity by short-vector enumeration.

    Norm-1 vectors lie in the box |v_i| <= floor(sqrt((F^-1)_ii)); up to sign
    they are taken sparsest first, and they must form an orthonormal basis.

    Args:
        F: Definite unimodular form
        max_rank: Largest rank where definite unimodular forms are diagonal

    Returns:
        Optional[Matrix]: U, or None when the norm-1 vectors do not span
    """
    if not F.is_unimodular():
        raise NonUnimodularError(f"Form has determinant {F.det()}, not +-1")
    definite, sign = is_definite(F)
    if not definite:
        raise DefinitenessError("Form is indefinite")
    if F.rank > max_rank:
        raise MisuseError(f"Rank {F.rank} exceeds the diagonal range {max_rank}")
    if F.rank == 0:
        return Matrix.zeros(0, 0)
    positive = sign * F.matrix
    inverse = positive.inv()
    bounds = [int(np.floor(np.sqrt(float(inverse[i, i])) + 1e-9)) for i in range(F.rank)]
    form = np.array(positive.tolist(), dtype=np.int64)
    vectors = _short_vectors(form, bounds)
    vectors.sort(key=lambda v: (sum(1 for c in v if c), tuple(-c for c in v)))
    if len(vectors) != F.rank:
        logger.info(f"Found {len(vectors)} norm-1 vectors for a rank {F.rank} form")
        return None
    U = Matrix(F.rank, F.rank, lambda i, j: vectors[j][i])
    if U.T * positive * U != eye(F.rank) or abs(U.det()) != 1:
        return None
    return U
