"""Laurent polynomials in the Lefschetz class ``L`` with exponents in ``(1/m)Z``.

This is the fragment of the localized Grothendieck ring that every measure in
the package lives in.  Elements are immutable and compare by their term maps;
the declared index ``m`` only bounds exponent denominators.
"""

from __future__ import annotations

from fractions import Fraction
from math import lcm
from typing import Iterable, Mapping, Union

from .errors import FractionalExponent, NoShift, NotDivisible, UnknownBuiltin

Exponent = Union[int, Fraction]


def _as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    raise TypeError(f"cannot use {x!r} as an exponent")


class MotivicElement:
    """Finite sum ``sum_e c_e L^e`` with integer ``c_e`` and ``e`` in ``(1/index)Z``."""

    __slots__ = ("_terms", "_index", "_hash")

    def __init__(self, terms: Mapping[Exponent, int] | None = None, index: int = 1):
        if index < 1:
            raise ValueError("index must be a positive integer")
        clean: dict[Fraction, int] = {}
        for e, c in (terms or {}).items():
            e = _as_fraction(e)
            if not isinstance(c, int):
                raise TypeError("coefficients must be integers")
            if c:
                clean[e] = clean.get(e, 0) + c
                if not clean[e]:
                    del clean[e]
        for e in clean:
            if index % e.denominator:
                # the declared index grows to admit every exponent present
                index = lcm(index, e.denominator)
        self._terms = dict(sorted(clean.items(), reverse=True))
        self._index = index
        self._hash = None

    # -- constructors -------------------------------------------------------

    @classmethod
    def const(cls, c: int) -> "MotivicElement":
        return cls({0: c})

    @classmethod
    def L(cls, exponent: Exponent = 1) -> "MotivicElement":
        e = _as_fraction(exponent)
        return cls({e: 1}, index=e.denominator)

    # -- accessors ----------------------------------------------------------

    @property
    def index(self) -> int:
        return self._index

    @property
    def terms(self) -> dict[Fraction, int]:
        return dict(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def is_monomial(self) -> bool:
        return len(self._terms) == 1

    def max_exponent(self) -> Fraction:
        return next(iter(self._terms))

    def min_exponent(self) -> Fraction:
        return next(reversed(self._terms))

    # -- ring structure -----------------------------------------------------

    @staticmethod
    def _coerce(x) -> "MotivicElement":
        if isinstance(x, MotivicElement):
            return x
        if isinstance(x, int):
            return MotivicElement.const(x)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        terms = dict(self._terms)
        for e, c in other._terms.items():
            terms[e] = terms.get(e, 0) + c
        return MotivicElement(terms, lcm(self._index, other._index))

    __radd__ = __add__

    def __neg__(self):
        return MotivicElement({e: -c for e, c in self._terms.items()}, self._index)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other + (-self)

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        terms: dict[Fraction, int] = {}
        for e1, c1 in self._terms.items():
            for e2, c2 in other._terms.items():
                terms[e1 + e2] = terms.get(e1 + e2, 0) + c1 * c2
        return MotivicElement(terms, lcm(self._index, other._index))

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if not isinstance(k, int):
            raise TypeError("only integer powers; use L(e) for fractional monomials")
        if k < 0:
            if not self.is_monomial():
                raise NotDivisible(f"{self} is not a unit")
            (e, c), = self._terms.items()
            if c not in (1, -1):
                raise NotDivisible(f"{self} is not a unit")
            return MotivicElement({e * k: c ** (-k)}, self._index)
        result = MotivicElement.const(1)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return MotivicElement(result._terms, lcm(result._index, self._index))

    def __eq__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self._terms == other._terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(tuple(self._terms.items()))
        return self._hash

    def __bool__(self):
        return bool(self._terms)

    def __repr__(self):
        return f"MotivicElement({self})"

    def __str__(self):
        if not self._terms:
            return "0"
        parts = []
        for i, (e, c) in enumerate(self._terms.items()):
            sign = "-" if c < 0 else "+"
            mag = abs(c)
            if e == 0:
                body = str(mag)
            else:
                mono = "L" if e == 1 else f"L^{_format_exponent(e)}"
                body = mono if mag == 1 else f"{mag}*{mono}"
            if i == 0:
                parts.append(body if sign == "+" else f"-{body}")
            else:
                parts.append(f" {sign} {body}")
        return "".join(parts)

    # -- convenience wrappers ----------------------------------------------

    def evaluate_at(self, q: int) -> Fraction:
        return evaluate_at(self, q)


def _format_exponent(e: Fraction) -> str:
    if e.denominator == 1:
        return str(e.numerator)
    return f"({e.numerator}/{e.denominator})"


def L(exponent: Exponent = 1) -> MotivicElement:
    """The monomial ``L^exponent``."""
    return MotivicElement.L(exponent)


ONE = MotivicElement.const(1)
ZERO = MotivicElement()


# -- division ---------------------------------------------------------------


def _to_integer_poly(a: MotivicElement, m: int) -> tuple[int, list[int]]:
    """Write ``a = x^shift * p(x)`` with ``x = L^(1/m)``, ``p(0) != 0``.

    Returns ``shift`` and the coefficient list of ``p`` (lowest degree first).
    """
    scaled = {int(e * m): c for e, c in a.terms.items()}
    lo, hi = min(scaled), max(scaled)
    coeffs = [0] * (hi - lo + 1)
    for k, c in scaled.items():
        coeffs[k - lo] = c
    return lo, coeffs


def exact_div(a: MotivicElement, b: MotivicElement) -> MotivicElement:
    """Quotient ``q`` with ``q * b == a`` exactly, or :class:`NotDivisible`."""
    if b.is_zero():
        raise ZeroDivisionError("division by the zero class")
    if a.is_zero():
        return ZERO
    m = lcm(a.index, b.index)
    sa, pa = _to_integer_poly(a, m)
    sb, pb = _to_integer_poly(b, m)
    # b's constant term is nonzero, so b | x^k a  iff  b | a  in Z[x]
    if len(pb) > len(pa):
        raise NotDivisible(f"{b} does not divide {a}")
    rem = [Fraction(c) for c in pa]
    lead = pb[-1]
    quot = [Fraction(0)] * (len(pa) - len(pb) + 1)
    for k in range(len(quot) - 1, -1, -1):
        coef = rem[k + len(pb) - 1] / lead
        quot[k] = coef
        if coef:
            for j, c in enumerate(pb):
                rem[k + j] -= coef * c
    if any(rem) or any(q.denominator != 1 for q in quot):
        raise NotDivisible(f"{b} does not divide {a}")
    shift = sa - sb
    return MotivicElement(
        {Fraction(shift + k, m): int(q) for k, q in enumerate(quot) if q}, m
    )


def solve_L_shift(lhs: MotivicElement, rhs: MotivicElement) -> Fraction:
    """Return the exponent ``s`` with ``lhs == L^s * rhs``."""
    if lhs.is_zero() or rhs.is_zero():
        raise NoShift("both sides must be nonzero")
    s = lhs.max_exponent() - rhs.max_exponent()
    if L(s) * rhs != lhs:
        raise NoShift(f"{lhs} is not a power of L times {rhs}")
    return s


def evaluate_at(a: MotivicElement, q: int) -> Fraction:
    """Point-count realization ``L -> q``; integral exponents only."""
    if q < 2:
        raise ValueError("q must be at least 2")
    total = Fraction(0)
    for e, c in a.terms.items():
        if e.denominator != 1:
            raise FractionalExponent(f"term L^{e} has no point-count realization")
        total += c * Fraction(q) ** int(e)
    return total


# -- builtin classes ----------------------------------------------------------

_ALIASES = {
    "affine_space": "affine_space", "A": "affine_space",
    "torus": "torus", "Gm": "torus", "GM": "torus",
    "general_linear": "general_linear", "GL": "general_linear",
    "special_linear": "special_linear", "SL": "special_linear",
    "jet_group": "jet_group", "J": "jet_group", "jet": "jet_group",
}

# groups that jet_group accepts, with their dimension as a function of params
_GROUP_DIM = {
    "affine_space": lambda n: n,
    "torus": lambda: 1,
    "general_linear": lambda r: r * r,
    "special_linear": lambda r: r * r - 1,
}


def builtin_names() -> list[str]:
    return sorted(_ALIASES)


def class_of(name: str, *params) -> MotivicElement:
    """Class of a builtin variety or group.

    ``class_of("SL", 2)`` is ``L^3 - L``; ``class_of("jet_group", "SL", 2, 1)``
    is the class of the level-1 jet group of ``SL_2``.
    """
    key = _ALIASES.get(name)
    if key is None:
        raise UnknownBuiltin(f"unknown builtin class {name!r}")
    try:
        if key == "affine_space":
            (n,) = params
            if n < 0:
                raise ValueError("affine space dimension must be >= 0")
            return L(int(n))
        if key == "torus":
            if params:
                raise ValueError("torus takes no parameters")
            return L() - 1
        if key == "general_linear":
            (r,) = params
            _check_rank(r)
            out = ONE
            for i in range(r):
                out = out * (L(r) - L(i))
            return out
        if key == "special_linear":
            (r,) = params
            _check_rank(r)
            return exact_div(class_of("general_linear", r), L() - 1)
        # jet_group(G, *group_params, n)
        group, *gparams, n = params
        gkey = _ALIASES.get(group)
        if gkey not in _GROUP_DIM:
            raise UnknownBuiltin(f"jet_group needs a smooth builtin group, got {group!r}")
        if n < 0:
            raise ValueError("jet level must be >= 0")
        dim = _GROUP_DIM[gkey](*gparams)
        return class_of(gkey, *gparams) * L(n * dim)
    except (TypeError, ValueError) as exc:
        raise ValueError(f"bad parameters {params!r} for {name}: {exc}") from None


def _check_rank(r) -> None:
    if not isinstance(r, int) or r < 1:
        raise ValueError("rank must be an integer >= 1")


def sum_elements(items: Iterable[MotivicElement]) -> MotivicElement:
    total = ZERO
    for x in items:
        total = total + x
    return total
