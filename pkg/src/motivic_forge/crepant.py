"""Formal divisor calculus and the crepant stack descriptor for SNC resolution data.

Divisors are finite label -> rational coefficient maps.  Maps between
spaces are never modelled geometrically; a pullback is driven by an explicit
multiplicity table sending each label downstairs to a divisor upstairs.

The stack built over a resolution ``Z -> Y`` with exceptional divisors
``D_i`` of discrepancy ``m_i > -1`` is a product of root-twisted
framed-bundle factors, one per divisor.  Writing ``m_i + 1 = r_i / d_i``,
factor ``i`` has bundle rank ``rho_i`` and root order ``d_i``.  Its
canonical divisor is ``(1 - rho_i/d_i)`` times the pullback of the boundary
divisor, and that pullback is ``d_i`` times the reduced preimage ``E_i``.
Meanwhile ``D_i`` itself pulls back to ``d_i E_i``.  The total relative
canonical divisor on ``E_i`` is therefore ``(d_i - rho_i) + m_i d_i``,
which vanishes exactly when ``rho_i = r_i``.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .errors import CertificateFailed, NotLogTerminal, UnknownLabel

CONVENTIONS = ("certificate", "paper-literal")


class DivisorSum:
    """Formal Q-linear combination of labelled prime divisors."""

    __slots__ = ("_terms",)

    def __init__(self, terms: Mapping[str, object] | None = None):
        clean: dict[str, Fraction] = {}
        for label, c in (terms or {}).items():
            c = Fraction(c)
            if c:
                clean[str(label)] = clean.get(str(label), Fraction(0)) + c
                if not clean[str(label)]:
                    del clean[str(label)]
        self._terms = dict(sorted(clean.items()))

    @classmethod
    def single(cls, label: str, c=1) -> "DivisorSum":
        return cls({label: c})

    def items(self):
        return self._terms.items()

    def labels(self) -> list[str]:
        return list(self._terms)

    def coefficient(self, label: str) -> Fraction:
        return self._terms.get(label, Fraction(0))

    def is_zero(self) -> bool:
        return not self._terms

    def __add__(self, other: "DivisorSum") -> "DivisorSum":
        terms = dict(self._terms)
        for k, v in other._terms.items():
            terms[k] = terms.get(k, Fraction(0)) + v
        return DivisorSum(terms)

    def __neg__(self):
        return DivisorSum({k: -v for k, v in self._terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, c):
        c = Fraction(c)
        return DivisorSum({k: c * v for k, v in self._terms.items()})

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, DivisorSum):
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self):
        return hash(tuple(self._terms.items()))

    def __repr__(self):
        return f"DivisorSum({self})"

    def __str__(self):
        if not self._terms:
            return "0"
        parts = []
        for i, (k, c) in enumerate(self._terms.items()):
            mag = abs(c)
            body = k if mag == 1 else f"{mag}*{k}"
            if i == 0:
                parts.append(body if c > 0 else f"-{body}")
            else:
                parts.append(f" {'+' if c > 0 else '-'} {body}")
        return "".join(parts)

    def as_dict(self) -> dict[str, str]:
        return {k: str(v) for k, v in self._terms.items()}


PullbackTable = Mapping[str, DivisorSum]


# -- the calculus -----------------------------------------------------------------


def pullback(D: DivisorSum, table: PullbackTable) -> DivisorSum:
    """Pull ``D`` back along a map described by ``table`` (label -> divisor upstairs)."""
    out = DivisorSum()
    for label, c in D.items():
        if label not in table:
            raise UnknownLabel(f"no pullback declared for divisor {label!r}")
        image = table[label]
        if not isinstance(image, DivisorSum):
            image = DivisorSum(image)
        out = out + c * image
    return out


def product(factors: Sequence[tuple[DivisorSum, PullbackTable]]) -> DivisorSum:
    """Canonical divisor of a product map: the sum of the projection pullbacks."""
    out = DivisorSum()
    for K, proj in factors:
        out = out + pullback(K, proj)
    return out


def compose(K_upper: DivisorSum, K_lower: DivisorSum, table: PullbackTable) -> DivisorSum:
    """``K_{X/Z} = K_{X/Y} + pi^* K_{Y/Z}`` for ``X -> Y -> Z``."""
    return K_upper + pullback(K_lower, table)


def k_calculus(op: str, *args) -> DivisorSum:
    ops = {"pullback": pullback, "product": product, "composition": compose, "compose": compose}
    if op not in ops:
        raise ValueError(f"unknown operation {op!r}")
    return ops[op](*args)


def identity_table(labels: Iterable[str]) -> dict[str, DivisorSum]:
    return {k: DivisorSum.single(k) for k in labels}


def reduced_preimage_label(label: str) -> str:
    return f"E({label})"


def root_label(d: int) -> str:
    return f"det_{d}*D'"


def root_table(d: int, reduced: str = "D_red") -> dict[str, DivisorSum]:
    """The section pulled back along the root map vanishes to order ``d`` on the reduced preimage."""
    return {root_label(d): DivisorSum.single(reduced, d)}


# -- canonical divisors of the building blocks ------------------------------------------


def canonical_Mr(r: int) -> DivisorSum:
    """Relative canonical divisor of the rank-``r`` framed-bundle stack over ``[A^1/G_m]``."""
    if r < 1:
        raise ValueError("r must be >= 1")
    return DivisorSum.single("D", 1 - r)


def canonical_root(r: int, d: int) -> DivisorSum:
    """Canonical divisor of the ``d``-th root twist of the rank-``r`` factor, on ``det_d^* D'``."""
    if r < 1 or d < 1:
        raise ValueError("r and d must be >= 1")
    return DivisorSum.single(root_label(d), 1 - Fraction(r, d))


def decompose_discrepancy(m, denominator: int | None = None) -> tuple[int, int]:
    """Write ``m + 1 = r / d`` with positive integers; lowest terms unless ``denominator`` is given."""
    m = Fraction(m)
    if m <= -1:
        raise NotLogTerminal(f"discrepancy {m} is not > -1")
    s = m + 1
    if denominator is None:
        return s.numerator, s.denominator
    if denominator < 1 or (s * denominator).denominator != 1:
        raise ValueError(f"{s} cannot be written with denominator {denominator}")
    return int(s * denominator), denominator


# -- resolution data and the descriptor ------------------------------------------------------


@dataclass(frozen=True)
class SNCResolutionInput:
    name: str
    gorenstein_index: int
    divisors: tuple[tuple[str, Fraction], ...]

    def __post_init__(self):
        if self.gorenstein_index < 1:
            raise ValueError("Gorenstein index must be >= 1")
        labels = [lab for lab, _ in self.divisors]
        if len(set(labels)) != len(labels):
            raise ValueError("divisor labels must be distinct")
        for lab, m in self.divisors:
            if m <= -1:
                raise NotLogTerminal(f"{lab}: discrepancy {m} is not > -1")
            if (m * self.gorenstein_index).denominator != 1:
                raise ValueError(f"{lab}: {self.gorenstein_index} * {m} is not an integer")

    @classmethod
    def from_dict(cls, data: Mapping) -> "SNCResolutionInput":
        try:
            divs = tuple((str(d["label"]), Fraction(str(d["discrepancy"]))) for d in data.get("divisors", []))
            return cls(str(data.get("name", "")), int(data.get("gorenstein_index", 1)), divs)
        except (KeyError, TypeError, ZeroDivisionError) as exc:
            raise ValueError(f"malformed resolution input: {exc}") from None

    @classmethod
    def from_json(cls, text: str) -> "SNCResolutionInput":
        return cls.from_dict(json.loads(text))

    def discrepancy_divisor(self) -> DivisorSum:
        """``K_{Z/Y} = sum m_i D_i``."""
        return DivisorSum(dict(self.divisors))


@dataclass(frozen=True)
class Factor:
    label: str
    r: int
    d: int
    rank: int
    discrepancy: Fraction

    @property
    def coefficient(self) -> Fraction:
        """Coefficient of the factor's canonical divisor on ``det_d^* D'``."""
        return 1 - Fraction(self.rank, self.d)

    @property
    def reduced_coefficient(self) -> Fraction:
        return Fraction(self.d - self.rank)

    @property
    def certificate_lhs(self) -> Fraction:
        return (self.d - self.rank) + self.discrepancy * self.d


@dataclass
class StackDescriptor:
    name: str
    gorenstein_index: int
    factors: list[Factor]
    convention: str
    moduli_interpretation: str
    crepant: bool = False
    warnings: list[str] = dc_field(default_factory=list)

    def relative_canonical(self) -> DivisorSum:
        """``K_{X/Z}`` assembled factor by factor from the root-stack formula."""
        parts = []
        for f in self.factors:
            E = reduced_preimage_label(f.label)
            parts.append((canonical_root(f.rank, f.d), root_table(f.d, E)))
        return product(parts)

    def pullback_table(self) -> dict[str, DivisorSum]:
        return {f.label: DivisorSum.single(reduced_preimage_label(f.label), f.d) for f in self.factors}

    def certificate(self) -> list[dict]:
        return [{"label": f.label, "lhs": str(f.certificate_lhs), "passes": f.certificate_lhs == 0}
                for f in self.factors]

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "factors": [
                {"label": f.label, "r": f.r, "d": f.d, "rank": f.rank, "coefficient": str(f.coefficient),
                 "reduced_coefficient": str(f.reduced_coefficient)}
                for f in self.factors
            ],
            "convention": self.convention,
            "crepant": self.crepant,
            "moduli": self.moduli_interpretation,
            "certificate": self.certificate(),
            "warnings": list(self.warnings),
        }


def moduli_text(factors: Sequence[Factor]) -> str:
    if not factors:
        return "X = Z: no exceptional divisors, nothing to parameterize."
    lines = ["X over Z parameterizes tuples ({E_i}, {beta_i}, {iota_i}) where, for each divisor:"]
    for i, f in enumerate(factors, 1):
        lines.append(
            f"  [{f.label}] E_{i} is a rank-{f.rank} vector bundle, beta_{i}: O^{f.rank} -> E_{i} a framing, "
            f"iota_{i}: det(E_{i})^(x{f.d}) ~ O({f.label}) with iota_{i}((det beta_{i})^(x{f.d})) = f_{i}, "
            f"the canonical section of O({f.label})"
        )
    return "\n".join(lines)


def build_crepant_stack(data: SNCResolutionInput, convention: str = "certificate",
                        denominators: Mapping[str, int] | None = None) -> StackDescriptor:
    """One root-twisted framed-bundle factor per exceptional divisor.

    ``convention="certificate"`` uses rank ``r_i``; ``"paper-literal"`` uses
    ``r_i + 1``, which leaves a residual of ``-1`` on every reduced preimage.
    The residuals are always computed: under the certificate convention a
    nonzero one raises :class:`CertificateFailed`, under the literal one it
    is recorded as a warning and ``crepant`` is false.
    """
    if convention not in CONVENTIONS:
        raise ValueError(f"unknown convention {convention!r}; choose from {CONVENTIONS}")
    denominators = denominators or {}
    factors = []
    for label, m in data.divisors:
        r, d = decompose_discrepancy(m, denominators.get(label))
        rank = r if convention == "certificate" else r + 1
        factors.append(Factor(label, r, d, rank, Fraction(m)))
    desc = StackDescriptor(data.name, data.gorenstein_index, factors, convention, moduli_text(factors))
    ok, ledger = check_crepancy(desc, data.discrepancy_divisor())
    desc.crepant = ok
    if not ok:
        residuals = ledger["residuals"]
        msg = "crepancy ledger does not close: residual " + ", ".join(f"{k}: {v}" for k, v in residuals.items())
        if convention == "certificate":
            raise CertificateFailed(msg, residuals)
        desc.warnings.append(msg)
        warnings.warn(msg, stacklevel=2)
    return desc


def check_crepancy(desc: StackDescriptor, resolution_K: DivisorSum) -> tuple[bool, dict]:
    """Compose ``K_{X/Z} + pi^* K_{Z/Y}`` and report whether it vanishes."""
    K_xz = desc.relative_canonical()
    pulled = pullback(resolution_K, desc.pullback_table())
    total = compose(K_xz, resolution_K, desc.pullback_table())
    certificate = desc.certificate()
    ok = total.is_zero() and all(c["passes"] for c in certificate)
    ledger = {
        "K_X/Z": K_xz.as_dict(),
        "pullback K_Z/Y": pulled.as_dict(),
        "total": total.as_dict(),
        "residuals": total.as_dict(),
        "certificate": certificate,
    }
    return ok, ledger
