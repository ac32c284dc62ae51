"""Monomial weights over eigenweights.

An eigenweight is named by the id of the &/^ link owning it.  A monomial is
a conjunction of signed eigenweights; the empty monomial is the weight 1.
Products that clash (p . !p) yield ``None``, the zero marker, which is never
stored on a link.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Optional

_LIT_RE = re.compile(r"(!?)p(\d+)")


class UnknownEigenweight(KeyError):
    pass


@dataclass(frozen=True, order=True)
class Monomial:
    # sorted (eigenweight, positive?) pairs, each eigenweight at most once
    literals: tuple[tuple[int, bool], ...] = ()

    @classmethod
    def of(cls, lits: Mapping[int, bool] | Iterable[tuple[int, bool]]) -> Optional["Monomial"]:
        """Build from literals, returning None if a variable occurs with both signs."""
        items = lits.items() if isinstance(lits, Mapping) else lits
        seen: dict[int, bool] = {}
        for var, sign in items:
            if seen.get(var, sign) != sign:
                return None
            seen[var] = sign
        return cls(tuple(sorted(seen.items())))

    @classmethod
    def var(cls, eid: int, positive: bool = True) -> "Monomial":
        return cls(((eid, positive),))

    @property
    def is_one(self) -> bool:
        return not self.literals

    def as_dict(self) -> dict[int, bool]:
        return dict(self.literals)

    def variables(self) -> set[int]:
        return {v for v, _ in self.literals}

    def __mul__(self, other: "Monomial") -> Optional["Monomial"]:
        if not other.literals:
            return self
        if not self.literals:
            return other
        return Monomial.of(self.literals + other.literals)

    def mentions(self, eid: int) -> bool:
        return any(v == eid for v, _ in self.literals)

    def leq(self, other: "Monomial") -> bool:
        """self <= other as boolean functions, i.e. self . other = self."""
        mine = self.as_dict()
        return all(mine.get(v) == s for v, s in other.literals)

    def disjoint(self, other: "Monomial") -> bool:
        return self * other is None

    def substitute(self, eid: int, bit: int) -> Optional["Monomial"]:
        """Set one eigenweight to 0/1; None when the monomial becomes zero."""
        out = []
        for v, s in self.literals:
            if v == eid:
                if s != bool(bit):
                    return None
            else:
                out.append((v, s))
        return Monomial(tuple(out))

    def evaluate(self, valuation: Mapping[int, int]) -> int:
        """Value under a (possibly partial) valuation.

        Raises UnknownEigenweight only when the result actually depends on an
        unassigned eigenweight.
        """
        missing = None
        for v, s in self.literals:
            if v not in valuation:
                missing = v
            elif bool(valuation[v]) != s:
                return 0
        if missing is not None:
            raise UnknownEigenweight(missing)
        return 1

    def measure(self) -> Fraction:
        """Fraction of all valuations satisfying the monomial."""
        return Fraction(1, 2 ** len(self.literals))

    def __str__(self) -> str:
        if not self.literals:
            return "1"
        return ".".join(("" if s else "!") + f"p{v}" for v, s in self.literals)


ONE = Monomial()


def parse_monomial(text: str) -> Optional[Monomial]:
    """Parse ``1`` or ``p3.!p5``; returns None for a clashing (zero) product."""
    text = text.strip()
    if text == "1":
        return ONE
    lits = []
    for tok in text.split("."):
        m = _LIT_RE.fullmatch(tok.strip())
        if not m:
            raise ValueError(f"bad weight literal {tok!r}")
        lits.append((int(m.group(2)), m.group(1) == ""))
    return Monomial.of(lits)


def evaluate_sum(monos: Iterable[Monomial], valuation: Mapping[int, int]) -> int:
    return int(any(m.evaluate(valuation) for m in monos))


def sum_equals(monos: Iterable[Monomial], target: Monomial) -> bool:
    """Whether the boolean sum of ``monos`` equals ``target``.

    Each summand must lie under the target and together they must fill it.
    For pairwise-disjoint summands (the valid case) comparing measures is
    exact; overlapping sums fall back to truth-table enumeration.
    """
    monos = list(monos)
    if not all(m.leq(target) for m in monos):
        return False
    if pairwise_disjoint(monos):
        return sum((m.measure() for m in monos), Fraction(0)) == target.measure()
    free = sorted(set().union(*(m.variables() for m in monos)) - target.variables())
    if len(free) > 20:
        raise ValueError("too many eigenweights to compare overlapping sums")
    base = target.as_dict()
    for bits in itertools.product((0, 1), repeat=len(free)):
        v = {**{k: int(b) for k, b in base.items()}, **dict(zip(free, bits))}
        if not evaluate_sum(monos, v):
            return False
    return True


def pairwise_disjoint(monos: Iterable[Monomial]) -> bool:
    monos = list(monos)
    return all(
        monos[i].disjoint(monos[j])
        for i in range(len(monos))
        for j in range(i + 1, len(monos))
    )
