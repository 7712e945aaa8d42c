"""Truncated power series ``k[[t]] / t^N`` over a small prime field or Q.

Everything here is exact.  A series known modulo ``t^N`` has a valuation that
is either determined (``Exact(v)`` with ``v < N``) or only bounded below
(``AtLeast(N)``); matrix routines propagate that distinction instead of
guessing.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

DEFAULT_PRECISION = 16

_SMALL_PRIMES = [p for p in range(2, 98) if all(p % d for d in range(2, int(p ** 0.5) + 1))]


# -- coefficient fields -------------------------------------------------------


class PrimeField:
    __slots__ = ("p",)

    def __init__(self, p: int):
        if p not in _SMALL_PRIMES:
            raise ValueError(f"prime fields are supported for primes p <= 97, got {p}")
        self.p = p

    def reduce(self, x) -> int:
        if isinstance(x, Fraction):
            return x.numerator * pow(x.denominator, -1, self.p) % self.p
        return x % self.p

    def inv(self, x: int) -> int:
        if x % self.p == 0:
            raise ZeroDivisionError("inverse of zero")
        return pow(x, -1, self.p)

    def elements(self) -> range:
        return range(self.p)

    def __eq__(self, other):
        return isinstance(other, PrimeField) and other.p == self.p

    def __hash__(self):
        return hash(("F", self.p))

    def __repr__(self):
        return f"F_{self.p}"


class RationalField:
    __slots__ = ()

    def reduce(self, x) -> Fraction:
        return Fraction(x)

    def inv(self, x) -> Fraction:
        if x == 0:
            raise ZeroDivisionError("inverse of zero")
        return 1 / Fraction(x)

    def __eq__(self, other):
        return isinstance(other, RationalField)

    def __hash__(self):
        return hash("Q")

    def __repr__(self):
        return "Q"


QQ = RationalField()


def field(prime: int | None):
    """``field(5)`` is F_5, ``field(None)`` (or 0) is the rationals."""
    return QQ if not prime else PrimeField(prime)


# -- valuations ---------------------------------------------------------------


@dataclass(frozen=True, order=True)
class Valuation:
    """A t-adic order that is either exact or only a lower bound."""

    value: int
    exact: bool = True

    def __str__(self):
        return f"Exact({self.value})" if self.exact else f"AtLeast({self.value})"

    def __add__(self, other: "Valuation") -> "Valuation":
        return Valuation(self.value + other.value, self.exact and other.exact)


def Exact(v: int) -> Valuation:
    return Valuation(v, True)


def AtLeast(n: int) -> Valuation:
    return Valuation(n, False)


def min_valuation(vals: Iterable[Valuation], default: Valuation) -> Valuation:
    """Minimum of valuations, correct in the presence of lower bounds.

    The minimum is exact when some exact value does not exceed every bound.
    """
    vals = list(vals)
    if not vals:
        return default
    exact = [v.value for v in vals if v.exact]
    bounds = [v.value for v in vals if not v.exact]
    if exact and (not bounds or min(exact) <= min(bounds)):
        return Exact(min(exact))
    return AtLeast(min(bounds + exact))


# -- series -------------------------------------------------------------------


class TruncatedSeries:
    """Power series with exactly ``precision`` stored coefficients."""

    __slots__ = ("base", "coeffs", "precision")

    def __init__(self, coeffs: Sequence, precision: int = DEFAULT_PRECISION, base=QQ):
        if precision < 1:
            raise ValueError("precision must be >= 1")
        cs = [base.reduce(c) for c in list(coeffs)[:precision]]
        cs.extend([base.reduce(0)] * (precision - len(cs)))
        self.base = base
        self.coeffs = tuple(cs)
        self.precision = precision

    @classmethod
    def monomial(cls, c, k: int, precision: int = DEFAULT_PRECISION, base=QQ):
        coeffs = [0] * precision
        if k < precision:
            coeffs[k] = c
        return cls(coeffs, precision, base)

    @classmethod
    def constant(cls, c, precision: int = DEFAULT_PRECISION, base=QQ):
        return cls.monomial(c, 0, precision, base)

    def _lift(self, other) -> "TruncatedSeries":
        if isinstance(other, TruncatedSeries):
            if other.base != self.base:
                raise ValueError(f"mixed base fields {self.base} and {other.base}")
            return other
        if isinstance(other, (int, Fraction)):
            return TruncatedSeries.constant(other, self.precision, self.base)
        return NotImplemented

    def __add__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return other
        n = min(self.precision, other.precision)
        return TruncatedSeries([a + b for a, b in zip(self.coeffs[:n], other.coeffs[:n])], n, self.base)

    __radd__ = __add__

    def __neg__(self):
        return TruncatedSeries([-a for a in self.coeffs], self.precision, self.base)

    def __sub__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return other
        n = min(self.precision, other.precision)
        return TruncatedSeries([a - b for a, b in zip(self.coeffs[:n], other.coeffs[:n])], n, self.base)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return other
        n = min(self.precision, other.precision)
        a, b = self.coeffs, other.coeffs
        # skip leading zeros; products of high-valuation entries are common
        va = next((i for i in range(n) if a[i]), n)
        vb = next((i for i in range(n) if b[i]), n)
        out = [0] * n
        for i in range(va, n - vb):
            ai = a[i]
            if ai:
                for j in range(vb, n - i):
                    out[i + j] += ai * b[j]
        return TruncatedSeries(out, n, self.base)

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, TruncatedSeries):
            return NotImplemented
        n = min(self.precision, other.precision)
        return self.base == other.base and self.coeffs[:n] == other.coeffs[:n]

    def __hash__(self):
        return hash((self.base, self.coeffs))

    def __repr__(self):
        return f"TruncatedSeries({format_series(self)}, N={self.precision}, {self.base})"

    def valuation(self) -> Valuation:
        for i, c in enumerate(self.coeffs):
            if c:
                return Exact(i)
        return AtLeast(self.precision)

    def is_unit(self) -> bool:
        return bool(self.coeffs[0])

    def inverse(self) -> "TruncatedSeries":
        if not self.is_unit():
            raise ZeroDivisionError("series is not a unit")
        n, a, F = self.precision, self.coeffs, self.base
        inv0 = F.inv(a[0])
        b = [inv0] + [0] * (n - 1)
        for k in range(1, n):
            s = sum(a[i] * b[k - i] for i in range(1, k + 1))
            b[k] = F.reduce(-s * inv0)
        return TruncatedSeries(b, n, F)

    def shift_down(self, v: int) -> "TruncatedSeries":
        """Divide by ``t^v`` (caller guarantees divisibility); precision drops by ``v``."""
        if any(self.coeffs[:v]):
            raise ValueError("series is not divisible by t^v")
        return TruncatedSeries(self.coeffs[v:], self.precision - v, self.base)

    def truncate(self, n: int) -> "TruncatedSeries":
        return TruncatedSeries(self.coeffs[:n], min(n, self.precision), self.base)

    def extend(self, n: int) -> "TruncatedSeries":
        """Pad with zeros to precision ``n``: exact for polynomials only."""
        return TruncatedSeries(self.coeffs, n, self.base)

    def substitute_scale(self, u) -> "TruncatedSeries":
        """``s(t) -> s(u t)`` for a scalar ``u``."""
        return TruncatedSeries([c * u ** k for k, c in enumerate(self.coeffs)], self.precision, self.base)


def valuation(s: TruncatedSeries) -> Valuation:
    return s.valuation()


def format_series(s: TruncatedSeries) -> str:
    parts = []
    for k, c in enumerate(s.coeffs):
        if not c:
            continue
        mono = "" if k == 0 else ("t" if k == 1 else f"t^{k}")
        if k == 0:
            parts.append(str(c))
        elif c == 1:
            parts.append(mono)
        else:
            parts.append(f"{c}*{mono}")
    return " + ".join(parts) if parts else "0"


# -- matrices -----------------------------------------------------------------


class SeriesMatrix:
    """Rectangular matrix of truncated series with a common base and precision."""

    __slots__ = ("rows", "cols", "entries", "precision", "base")

    def __init__(self, entries: Sequence[Sequence[TruncatedSeries]], cols: int | None = None):
        rows = [tuple(r) for r in entries]
        if not rows and cols is None:
            raise ValueError("empty matrix needs an explicit column count")
        ncols = len(rows[0]) if rows else cols
        if any(len(r) != ncols for r in rows):
            raise ValueError("matrix is not rectangular")
        flat = [x for r in rows for x in r]
        if flat:
            bases = {x.base for x in flat}
            if len(bases) != 1:
                raise ValueError("mixed base fields")
            precisions = {x.precision for x in flat}
            if len(precisions) != 1:
                n = min(precisions)
                rows = [tuple(x.truncate(n) for x in r) for r in rows]
            self.base = flat[0].base
            self.precision = min(precisions)
        else:
            self.base = QQ
            self.precision = DEFAULT_PRECISION
        self.entries = tuple(rows)
        self.rows = len(rows)
        self.cols = ncols

    @classmethod
    def from_values(cls, values, precision: int = DEFAULT_PRECISION, base=QQ, cols=None):
        """Build from nested lists of coefficient lists, scalars, or series."""
        def conv(v):
            if isinstance(v, TruncatedSeries):
                return v
            if isinstance(v, (list, tuple)):
                return TruncatedSeries(v, precision, base)
            return TruncatedSeries.constant(v, precision, base)
        return cls([[conv(v) for v in row] for row in values], cols=cols)

    @classmethod
    def zeros(cls, rows, cols, precision=DEFAULT_PRECISION, base=QQ):
        z = TruncatedSeries.constant(0, precision, base)
        return cls([[z] * cols for _ in range(rows)], cols=cols)

    @classmethod
    def identity(cls, n, precision=DEFAULT_PRECISION, base=QQ):
        return cls.from_values([[1 if i == j else 0 for j in range(n)] for i in range(n)], precision, base, cols=n)

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i][j]

    def transpose(self) -> "SeriesMatrix":
        return SeriesMatrix([[self.entries[i][j] for i in range(self.rows)] for j in range(self.cols)], cols=self.rows)

    def __matmul__(self, other: "SeriesMatrix") -> "SeriesMatrix":
        if self.cols != other.rows:
            raise ValueError(f"shape mismatch {self.rows}x{self.cols} @ {other.rows}x{other.cols}")
        n = min(self.precision, other.precision)
        zero = TruncatedSeries.constant(0, n, self.base)
        out = []
        for i in range(self.rows):
            row = []
            for j in range(other.cols):
                acc = zero
                for k in range(self.cols):
                    acc = acc + self.entries[i][k] * other.entries[k][j]
                row.append(acc)
            out.append(row)
        return SeriesMatrix(out, cols=other.cols)

    def is_zero(self) -> bool:
        return all(not any(x.coeffs) for r in self.entries for x in r)

    def submatrix(self, rows: Sequence[int], cols: Sequence[int]) -> "SeriesMatrix":
        return SeriesMatrix([[self.entries[i][j] for j in cols] for i in rows], cols=len(cols))

    def column(self, j: int) -> list[TruncatedSeries]:
        return [r[j] for r in self.entries]

    def __eq__(self, other):
        if not isinstance(other, SeriesMatrix):
            return NotImplemented
        return self.entries == other.entries

    def __repr__(self):
        body = "; ".join(", ".join(format_series(x) for x in r) for r in self.entries)
        return f"SeriesMatrix[{self.rows}x{self.cols}]({body})"


def determinant(entries: Sequence[Sequence[TruncatedSeries]]) -> TruncatedSeries:
    """Exact determinant by Laplace expansion with memoised column subsets."""
    k = len(entries)
    if k == 0:
        raise ValueError("determinant of an empty matrix")
    memo: dict[int, TruncatedSeries] = {}

    def rec(row: int, used: int) -> TruncatedSeries:
        # determinant of rows row..k-1 over the columns not in `used`
        if row == k:
            return TruncatedSeries.constant(1, entries[0][0].precision, entries[0][0].base)
        if used in memo:
            return memo[used]
        acc = None
        sign = 1
        for j in range(k):
            if used >> j & 1:
                continue
            e = entries[row][j]
            if any(e.coeffs):
                term = e * rec(row + 1, used | (1 << j))
                term = term if sign > 0 else -term
                acc = term if acc is None else acc + term
            sign = -sign
        if acc is None:
            acc = TruncatedSeries.constant(0, entries[0][0].precision, entries[0][0].base)
        memo[used] = acc
        return acc

    return rec(0, 0)
