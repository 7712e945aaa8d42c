"""Height functions of the relative cotangent complex along arcs.

For the quotient family ``S_r = [A^{r^2} / SL_r] -> A^1`` (left
multiplication, ``det`` as the good moduli map) an arc on the cover is an
``r x r`` matrix ``A(t)``.  Pulling back the three-term complex

    Omega_Y  --d0-->  Omega_{A^{r^2}}  --d1-->  Omega_{A^{r^2} / S_r}

along ``A(t)`` gives two matrices over ``k[[t]]``: ``d0`` is the column of
signed cofactors of ``A`` (the differential of ``det``) and ``d1`` has one
row per basis element ``xi`` of ``sl_r`` holding the entries of ``xi . A``.
The heights are the t-orders of ``Fitt_{r^2-1}(coker d0)`` and
``Fitt_0(coker d1)``.

The ``sl_r`` basis is fixed: the diagonal elements ``E_ii - E_{i+1,i+1}``
first, then the ``E_ij`` with ``i != j`` in row-major order.  For ``r = 2``
this is ``h, e, f``.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from functools import lru_cache
from typing import Mapping, Sequence

import sympy

from .errors import (
    GenericPointViolation,
    InsufficientPrecision,
    NotAComplex,
    UnsupportedFamily,
    ZeroComponentOrder,
)
from .series import (
    DEFAULT_PRECISION,
    QQ,
    AtLeast,
    SeriesMatrix,
    TruncatedSeries,
    Valuation,
    determinant,
    field,
    min_valuation,
)
from .smith import euler_valuation, fitting_order, smith_normal_form


# -- arcs ---------------------------------------------------------------------


@dataclass(frozen=True)
class ArcOnCover:
    """An arc on the smooth cover of a supported family.

    ``family="slr"`` carries an ``r x r`` matrix of series; ``family =
    "hypersurface"`` carries the defining equation of ``Y`` in variables
    ``x0 .. xd`` and the coordinate series of an arc on ``Y``.
    """

    family: str
    matrix: SeriesMatrix | None = None
    equation: str | None = None
    coords: tuple[TruncatedSeries, ...] | None = None

    @classmethod
    def slr(cls, matrix: SeriesMatrix) -> "ArcOnCover":
        if matrix.rows != matrix.cols:
            raise ValueError("slr arcs need a square matrix")
        if matrix.rows > 9:
            raise ValueError("slr arcs are supported for r <= 9")
        return cls("slr", matrix=matrix)

    @classmethod
    def hypersurface(cls, equation: str, coords: Sequence[TruncatedSeries]) -> "ArcOnCover":
        coords = tuple(coords)
        n = {c.precision for c in coords}
        if len(n) != 1:
            coords = tuple(c.truncate(min(n)) for c in coords)
        arc = cls("hypersurface", equation=equation, coords=coords)
        on_y = ord_along_arc([equation], arc)
        if on_y.exact:
            raise ValueError(f"arc does not lie on Y: f vanishes only to order {on_y.value}")
        return arc

    @property
    def r(self) -> int:
        if self.family != "slr":
            raise UnsupportedFamily(f"{self.family} arcs have no matrix size")
        return self.matrix.rows

    @property
    def precision(self) -> int:
        return self.matrix.precision if self.family == "slr" else self.coords[0].precision

    @property
    def base(self):
        return self.matrix.base if self.family == "slr" else self.coords[0].base

    def variables(self) -> list[str]:
        if self.family == "slr":
            r = self.r
            return [f"a{i + 1}{j + 1}" for i in range(r) for j in range(r)]
        return [f"x{i}" for i in range(len(self.coords))]

    def coordinates(self) -> list[TruncatedSeries]:
        if self.family == "slr":
            return [x for row in self.matrix.entries for x in row]
        return list(self.coords)

    def det_valuation(self) -> Valuation:
        return determinant(self.matrix.entries).valuation()

    def rescaled(self, u) -> "ArcOnCover":
        """Precompose with ``t -> u t``."""
        if self.family == "slr":
            m = self.matrix
            return ArcOnCover.slr(SeriesMatrix([[x.substitute_scale(u) for x in row] for row in m.entries]))
        return ArcOnCover("hypersurface", equation=self.equation,
                          coords=tuple(c.substitute_scale(u) for c in self.coords))


def det_generator(r: int) -> str:
    a = sympy.Matrix(r, r, lambda i, j: sympy.Symbol(f"a{i + 1}{j + 1}"))
    return str(sympy.expand(a.det()))


# -- presentation ---------------------------------------------------------------


@dataclass(frozen=True)
class ComplexPresentation:
    d0: SeriesMatrix
    d1: SeriesMatrix
    fiber_dim: int
    base_dim: int


@lru_cache(maxsize=None)
def sl_basis(r: int) -> tuple[tuple[tuple[int, ...], ...], ...]:
    """The fixed basis of trace-zero ``r x r`` matrices, as integer matrices."""
    basis = []
    for i in range(r - 1):
        m = [[0] * r for _ in range(r)]
        m[i][i], m[i + 1][i + 1] = 1, -1
        basis.append(m)
    for i in range(r):
        for j in range(r):
            if i != j:
                m = [[0] * r for _ in range(r)]
                m[i][j] = 1
                basis.append(m)
    return tuple(tuple(tuple(row) for row in m) for m in basis)


def _cofactor(A: SeriesMatrix, i: int, j: int) -> TruncatedSeries:
    r = A.rows
    if r == 1:
        return TruncatedSeries.constant(1, A.precision, A.base)
    minor = [[A.entries[a][b] for b in range(r) if b != j] for a in range(r) if a != i]
    c = determinant(minor)
    return c if (i + j) % 2 == 0 else -c


def build_presentation(arc: ArcOnCover) -> ComplexPresentation:
    if arc.family != "slr":
        raise UnsupportedFamily(f"no cover presentation for family {arc.family!r}")
    A = arc.matrix
    r = A.rows
    d0 = SeriesMatrix([[_cofactor(A, i, j)] for i in range(r) for j in range(r)], cols=1)
    zero = TruncatedSeries.constant(0, A.precision, A.base)
    rows = []
    for xi in sl_basis(r):
        act = []
        for i in range(r):
            for j in range(r):
                acc = zero
                for k in range(r):
                    if xi[i][k]:
                        acc = acc + A.entries[k][j] * xi[i][k]
                act.append(acc)
        rows.append(act)
    d1 = SeriesMatrix(rows, cols=r * r)
    if not (d1 @ d0).is_zero():
        raise NotAComplex("d1 . d0 does not vanish; presentation is inconsistent")
    return ComplexPresentation(d0=d0, d1=d1, fiber_dim=r * r - 1, base_dim=1)


# -- heights ------------------------------------------------------------------


@dataclass(frozen=True)
class HeightProfile:
    ht_minus1: int
    ht0: int
    ht1: int

    def as_tuple(self) -> tuple[int, int, int]:
        return (self.ht_minus1, self.ht0, self.ht1)

    def alternating_sum(self) -> int:
        return -self.ht_minus1 + self.ht0 - self.ht1


def _require_exact(v: Valuation, what: str) -> int:
    if not v.exact:
        raise InsufficientPrecision(f"{what} is {v}; raise the working precision")
    return v.value


def check_generic_point(arc: ArcOnCover) -> int:
    """Valuation of ``det A``; rejects arcs inside the exceptional locus."""
    v = arc.det_valuation()
    if not v.exact:
        raise GenericPointViolation(
            f"det A(t) vanishes mod t^{arc.precision}: the arc is not off the exceptional locus"
        )
    return v.value


def jacobian_order(arc: ArcOnCover) -> int:
    """t-order of the Jacobian ideal of ``Y`` along the arc on ``Y``.

    For ``slr`` arcs the base is ``A^1``, which is smooth.  For a
    hypersurface the pulled-back differentials are ``coker(R -> R^{d+1})``
    given by the gradient column, and the Jacobian ideal is its
    ``Fitt_d``.
    """
    if arc.family == "slr":
        return 0
    grad = _gradient_column(arc)
    return _require_exact(fitting_order(grad, grad.rows - 1), "Jacobian order")


def torsion_length_of_differentials(arc: ArcOnCover) -> int:
    """Length of the torsion of the pulled-back differentials of a hypersurface."""
    grad = _gradient_column(arc)
    rep = smith_normal_form(grad)
    return sum(rep.invariant_valuations)


def _gradient_column(arc: ArcOnCover) -> SeriesMatrix:
    if arc.family != "hypersurface":
        raise UnsupportedFamily("gradient column needs a hypersurface arc")
    syms = sympy.symbols(arc.variables())
    f = sympy.sympify(arc.equation, locals=dict(zip(arc.variables(), syms)))
    partials = [sympy.diff(f, s) for s in syms]
    return SeriesMatrix([[evaluate_polynomial(p, arc)] for p in partials], cols=1)


def height_profile(pres: ComplexPresentation, arc: ArcOnCover) -> HeightProfile:
    check_generic_point(arc)
    ht0 = _require_exact(fitting_order(pres.d0, pres.fiber_dim), "ht^(0)")
    ht1 = _require_exact(fitting_order(pres.d1, 0), "ht^(1)")
    return HeightProfile(jacobian_order(arc), ht0, ht1)


def presentation_euler(pres: ComplexPresentation) -> int:
    """Alternating cohomology length of the pulled-back complex in degrees -1, 0, 1."""
    return euler_valuation([pres.d0, pres.d1], start_degree=-1)


# -- order functions ---------------------------------------------------------------


def evaluate_polynomial(poly, arc: ArcOnCover) -> TruncatedSeries:
    names = arc.variables()
    syms = sympy.symbols(names)
    if isinstance(poly, str):
        poly = sympy.sympify(poly, locals=dict(zip(names, syms)))
    P = sympy.Poly(poly, *syms)
    coords = arc.coordinates()
    N, F = arc.precision, arc.base
    total = TruncatedSeries.constant(0, N, F)
    for monom, coeff in P.terms():
        term = TruncatedSeries.constant(Fraction(int(coeff.p), int(coeff.q)), N, F)
        for x, e in zip(coords, monom):
            for _ in range(e):
                term = term * x
        total = total + term
    return total


def ord_along_arc(ideal: Sequence, arc: ArcOnCover) -> Valuation:
    """Order of an ideal along an arc: the minimum generator valuation."""
    if not ideal:
        return AtLeast(arc.precision)
    return min_valuation((evaluate_polynomial(g, arc).valuation() for g in ideal), AtLeast(arc.precision))


# -- the key identity -----------------------------------------------------------


@dataclass
class KeyIdentityReport:
    m: int
    divisor: Mapping[str, Fraction]
    orders: dict[str, int]
    profile: HeightProfile
    jacobian_order: int
    lhs: Fraction
    rhs: Fraction
    lci_rhs: int
    euler: int | None = None
    passes: bool = False
    notes: list[str] = dc_field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "m": self.m,
            "divisor": {k: str(v) for k, v in self.divisor.items()},
            "orders": self.orders,
            "heights": {"ht_minus1": self.profile.ht_minus1, "ht0": self.profile.ht0, "ht1": self.profile.ht1},
            "ord_J": self.jacobian_order,
            "lhs": str(self.lhs),
            "rhs": str(self.rhs),
            "lci_rhs": self.lci_rhs,
            "euler": self.euler,
            "passes": self.passes,
        }


def default_divisor_ideals(arc: ArcOnCover) -> dict[str, list[str]]:
    if arc.family != "slr":
        return {}
    det = det_generator(arc.r)
    return {"D'": [det], "D": [det]}


def check_key_identity(arc: ArcOnCover, m: int, K, divisor_ideals: Mapping[str, Sequence] | None = None) -> KeyIdentityReport:
    """Evaluate ``ord_{mK} = m ht0 - m ht1 - ord_J`` on one arc.

    ``K`` is the relative canonical divisor as a label -> coefficient map
    (a ``DivisorSum`` works); each label is resolved to an ideal through
    ``divisor_ideals``.  The lci form ``-ht(-1) + ht0 - ht1`` and the Euler
    characteristic of the presentation are reported alongside.
    """
    if m < 1:
        raise ValueError("Gorenstein index must be positive")
    ideals = dict(default_divisor_ideals(arc))
    ideals.update(divisor_ideals or {})
    pres = build_presentation(arc)
    prof = height_profile(pres, arc)
    orders = {}
    lhs = Fraction(0)
    coeffs = dict(K.items()) if hasattr(K, "items") else dict(K)
    for label, c in coeffs.items():
        if label not in ideals:
            raise KeyError(f"no ideal registered for divisor {label!r}")
        orders[label] = _require_exact(ord_along_arc(ideals[label], arc), f"ord_{label}")
        lhs += m * Fraction(c) * orders[label]
    # the base of a supported family is smooth, so J_{Y,m} is the unit ideal
    ord_J = 0
    rhs = Fraction(m * prof.ht0 - m * prof.ht1 - ord_J)
    report = KeyIdentityReport(
        m=m, divisor={k: Fraction(v) for k, v in coeffs.items()}, orders=orders, profile=prof,
        jacobian_order=ord_J, lhs=lhs, rhs=rhs, lci_rhs=prof.alternating_sum(),
    )
    report.euler = presentation_euler(pres)
    report.passes = lhs == rhs and (m != 1 or lhs == report.lci_rhs) and report.euler == report.lci_rhs
    return report


def infer_multiplicity(ord_target: int, ord_component: int) -> Fraction:
    """Multiplicity of a divisor along a component from orders on one arc."""
    if ord_component <= 0:
        raise ZeroComponentOrder("the arc must meet the component with positive order")
    return Fraction(ord_target, ord_component)


# -- sampling -----------------------------------------------------------------------


def _random_series(rng: random.Random, N: int, F, min_val: int = 0) -> TruncatedSeries:
    cs = [0] * min_val + [rng.randrange(F.p) for _ in range(N - min_val)]
    return TruncatedSeries(cs, N, F)


def _random_unimodular(rng: random.Random, r: int, N: int, F) -> list[list[TruncatedSeries]]:
    """Random matrix with unit determinant: product of elementary and diagonal-unit factors."""
    M = [[TruncatedSeries.constant(int(i == j), N, F) for j in range(r)] for i in range(r)]
    for _ in range(2 * r * r):
        i, j = rng.sample(range(r), 2) if r > 1 else (0, 0)
        if r > 1:
            c = _random_series(rng, N, F)
            M[i] = [a + c * b for a, b in zip(M[i], M[j])]
        k = rng.randrange(r)
        u = rng.randrange(1, F.p)
        M[k] = [a * u for a in M[k]]
    return M


def random_slr_arc(r: int, rng: random.Random, precision: int = DEFAULT_PRECISION, prime: int = 5,
                   min_val: int = 1, max_val: int = 4) -> ArcOnCover:
    """Random ``r x r`` arc over ``F_prime`` with ``min_val <= val(det) <= max_val``.

    Half the draws are ``P diag(t^e) Q`` with random unimodular ``P, Q``;
    the rest are rejection samples of matrices with entries of random
    positive or zero order.
    """
    F = field(prime)
    if F == QQ:
        raise ValueError("random arcs need a prime field")
    while True:
        if rng.random() < 0.5:
            total = rng.randint(min_val, max_val)
            exps = [0] * r
            for _ in range(total):
                exps[rng.randrange(r)] += 1
            P = _random_unimodular(rng, r, precision, F)
            Q = _random_unimodular(rng, r, precision, F)
            D = [[TruncatedSeries.monomial(1, exps[i], precision, F) if i == j else TruncatedSeries.constant(0, precision, F)
                  for j in range(r)] for i in range(r)]
            M = SeriesMatrix(P) @ SeriesMatrix(D) @ SeriesMatrix(Q)
        else:
            M = SeriesMatrix([[_random_series(rng, precision, F, rng.choice([0, 0, 1, 2]))
                               for _ in range(r)] for _ in range(r)])
        v = determinant(M.entries).valuation()
        if v.exact and min_val <= v.value <= max_val:
            return ArcOnCover.slr(M)


# -- arc input ----------------------------------------------------------------------


def parse_series(text, precision: int = DEFAULT_PRECISION, base=QQ) -> TruncatedSeries:
    """Series from a polynomial literal in ``t`` such as ``"2*t^3 + t"`` (``^`` or ``**``)."""
    t = sympy.Symbol("t")
    try:
        expr = sympy.sympify(str(text).replace("^", "**"), locals={"t": t})
        poly = sympy.Poly(expr, t)
    except (sympy.SympifyError, sympy.PolynomialError, TypeError):
        raise ValueError(f"not a polynomial in t: {text!r}") from None
    coeffs = [0] * precision
    for (k,), c in poly.terms():
        if not c.is_Rational:
            raise ValueError(f"non-rational coefficient in {text!r}")
        if k < precision:
            coeffs[k] = Fraction(int(c.p), int(c.q))
    return TruncatedSeries(coeffs, precision, base)


def arc_from_dict(data: Mapping, precision: int | None = None, prime: int | None = None) -> ArcOnCover:
    """Arc from its JSON form; explicit ``precision``/``prime`` override the file's values."""
    N = precision or int(data.get("precision", DEFAULT_PRECISION))
    p = prime if prime is not None else data.get("prime")
    F = field(p)
    fam = data.get("family")
    if fam == "slr":
        rows = data["matrix"]
        r = int(data.get("r", len(rows)))
        if len(rows) != r or any(len(row) != r for row in rows):
            raise ValueError(f"matrix must be {r}x{r}")
        return ArcOnCover.slr(SeriesMatrix([[parse_series(x, N, F) for x in row] for row in rows]))
    if fam == "hypersurface":
        coords = [parse_series(x, N, F) for x in data["coords"]]
        return ArcOnCover.hypersurface(str(data["equation"]).replace("^", "**"), coords)
    raise UnsupportedFamily(f"unknown arc family {fam!r}")
