"""Smith normal form over ``k[[t]]`` at finite precision and what it computes.

Over a discrete valuation ring the Smith form only needs minimal-valuation
pivoting: swap the entry of least order into the corner, clear its row and
column, recurse.  Clearing a column with a pivot of valuation ``v`` divides
by ``t^v``, but every entry it multiplies also has valuation ``>= v``, so the
updated block stays exact modulo ``t^N``.  The only thing precision can hide
is the rank: a residual block that vanishes modulo ``t^N`` may be genuinely
zero or may have invariants of order ``>= N``.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Sequence

from .errors import InsufficientPrecision, NotAComplex, NotTorsion
from .series import AtLeast, Exact, SeriesMatrix, TruncatedSeries, Valuation, determinant, min_valuation

MAX_MINOR_SIZE = 5


@dataclass(frozen=True)
class SmithReport:
    invariant_valuations: tuple[int, ...]
    rank: int
    certified: bool
    precision: int
    shape: tuple[int, int]

    @property
    def full_rank(self) -> bool:
        return self.rank == min(self.shape)


def _shift_up(s: TruncatedSeries, v: int) -> TruncatedSeries:
    return TruncatedSeries((0,) * v + s.coeffs, s.precision + v, s.base)


def smith_normal_form(M: SeriesMatrix, expected_rank: int | None = None, strict: bool = True) -> SmithReport:
    """Invariant-factor valuations of ``M`` viewed over ``k[[t]]``.

    The report is certified when the rank is determined: either every
    diagonal slot received a pivot, or ``expected_rank`` pivots were found
    and the caller vouches that the residual block is genuinely zero.  With
    ``strict`` an uncertified result raises :class:`InsufficientPrecision`.
    """
    rows, cols = M.rows, M.cols
    A = [list(r) for r in M.entries]
    N = M.precision
    pivots: list[int] = []
    for k in range(min(rows, cols)):
        best = None
        for i in range(k, rows):
            for j in range(k, cols):
                v = A[i][j].valuation()
                if v.exact and (best is None or v.value < best[0]):
                    best = (v.value, i, j)
                    if v.value == 0:
                        break
            if best is not None and best[0] == 0:
                break
        if best is None:
            break
        v, pi, pj = best
        A[k], A[pi] = A[pi], A[k]
        if pj != k:
            for row in A:
                row[k], row[pj] = row[pj], row[k]
        unit_inv = A[k][k].shift_down(v).inverse()
        pivot_row = [A[k][j].shift_down(v) for j in range(cols)]
        for i in range(k + 1, rows):
            if not any(A[i][k].coeffs):
                continue
            q = A[i][k].shift_down(v) * unit_inv
            for j in range(k + 1, cols):
                A[i][j] = A[i][j] - _shift_up(q * pivot_row[j], v)
            A[i][k] = TruncatedSeries.constant(0, N, M.base)
        # the rest of column k is now zero, so clearing row k touches nothing else
        pivots.append(v)
    rank = len(pivots)
    full = rank == min(rows, cols)
    certified = full or (expected_rank is not None and expected_rank == rank)
    report = SmithReport(tuple(pivots), rank, certified, N, (rows, cols))
    if strict and not certified:
        raise InsufficientPrecision(
            f"{rows}x{cols} matrix: residual block vanishes mod t^{N}; rank is undetermined "
            f"({rank} certified pivots)"
        )
    return report


def minor_valuations(M: SeriesMatrix, size: int) -> list[Valuation]:
    """Valuations of every ``size x size`` minor (row/column subsets in lexicographic order)."""
    out = []
    for rs in combinations(range(M.rows), size):
        for cs in combinations(range(M.cols), size):
            out.append(determinant([[M.entries[i][j] for j in cs] for i in rs]).valuation())
    return out


def fitting_order(M: SeriesMatrix, j: int, method: str = "auto") -> Valuation:
    """t-order of ``Fitt_j`` of ``coker(M: R^cols -> R^rows)``.

    ``Fitt_j`` is generated by the ``(rows - j)``-minors; it is the unit ideal
    when ``rows - j <= 0``.  When no minors of that size exist the ideal is
    zero and the result is ``AtLeast(N)``.  ``method`` is ``"minors"``,
    ``"snf"`` or ``"auto"`` (minors up to 5x5, Smith form beyond).
    """
    if j < 0:
        raise ValueError("Fitting index must be >= 0")
    size = M.rows - j
    if size <= 0:
        return Exact(0)
    if size > M.cols:
        return AtLeast(M.precision)
    if method == "auto":
        method = "minors" if size <= MAX_MINOR_SIZE else "snf"
    if method == "minors":
        return min_valuation(minor_valuations(M, size), AtLeast(M.precision))
    if method != "snf":
        raise ValueError(f"unknown method {method!r}")
    rep = smith_normal_form(M, strict=False)
    if size <= rep.rank:
        return Exact(sum(rep.invariant_valuations[:size]))
    missing = size - rep.rank
    return AtLeast(sum(rep.invariant_valuations) + M.precision * missing)


def _rank_or_raise(M: SeriesMatrix, expected: int, what: str) -> SmithReport:
    rep = smith_normal_form(M, expected_rank=expected, strict=False)
    if rep.rank == expected:
        return rep
    if rep.rank < expected and not rep.full_rank:
        raise InsufficientPrecision(f"{what}: only {rep.rank} of {expected} pivots visible mod t^{rep.precision}")
    raise NotTorsion(f"{what}: rank {rep.rank}, torsion cohomology needs rank {expected}")


@dataclass(frozen=True)
class Lemma33Result:
    dim_Q: int
    dim_coker_beta: int
    fitting_alpha: Valuation
    fitting_beta: Valuation

    @property
    def holds(self) -> bool:
        return (
            self.fitting_alpha == Exact(self.dim_Q)
            and self.fitting_beta == Exact(self.dim_coker_beta)
        )


def lemma33_check(alpha: SeriesMatrix, beta: SeriesMatrix, a: int, b: int) -> Lemma33Result:
    """Both sides of the torsion-length / Fitting-order equalities for ``M -> R^(a+b) -> R^b``.

    ``alpha`` is ``(a+b) x m`` (a presentation of the image of ``M``, rank
    ``a``) and ``beta`` is ``b x (a+b)``.  Lengths come from Smith forms: the
    middle cohomology is the torsion of ``coker(alpha)`` because
    ``R^(a+b) / ker(beta)`` is free.  Fitting orders come from minors, with
    ``Fitt_b(coker alpha)`` generated by the ``a x a`` minors.
    """
    if alpha.rows != a + b or beta.cols != a + b or beta.rows != b:
        raise ValueError(f"expected alpha (a+b)xm and beta bx(a+b) with a={a}, b={b}")
    if not (beta @ alpha).is_zero():
        raise NotAComplex("beta . alpha does not vanish to working precision")
    rep_a = _rank_or_raise(alpha, a, "alpha")
    rep_b = _rank_or_raise(beta, b, "beta")
    return Lemma33Result(
        dim_Q=sum(rep_a.invariant_valuations),
        dim_coker_beta=sum(rep_b.invariant_valuations),
        fitting_alpha=fitting_order(alpha, b),
        fitting_beta=fitting_order(beta, 0),
    )


def cohomology_lengths(maps: Sequence[SeriesMatrix]) -> list[int]:
    """Lengths of ``H^0 .. H^len(maps)`` of ``C^0 -> C^1 -> ...`` (torsion cohomology required)."""
    if not maps:
        return []
    for i in range(len(maps) - 1):
        if maps[i + 1].cols != maps[i].rows:
            raise ValueError(f"map {i + 1} does not compose with map {i}")
        if not (maps[i + 1] @ maps[i]).is_zero():
            raise NotAComplex(f"d_{i + 1} . d_{i} does not vanish to working precision")
    dims = [maps[0].cols] + [m.rows for m in maps]
    lengths = [0]
    prev_rank = 0
    for i, d in enumerate(maps):
        expected = dims[i] - prev_rank
        if expected < 0:
            raise NotTorsion(f"degree {i}: ranks exceed module rank")
        rep = _rank_or_raise(d, expected, f"d_{i}")
        lengths.append(sum(rep.invariant_valuations))
        prev_rank = expected
    if prev_rank != dims[-1]:
        raise NotTorsion("top cohomology has a free part")
    return lengths


def euler_valuation(maps: Sequence[SeriesMatrix], start_degree: int = -1) -> int:
    """Alternating sum ``sum (-1)^i len H^i`` of a generically exact based complex.

    ``maps[0]`` leaves degree ``start_degree``; the default places a
    three-term presentation in degrees -1, 0, 1.
    """
    lengths = cohomology_lengths(maps)
    return sum((-1) ** ((start_degree + i) % 2) * n for i, n in enumerate(lengths))
