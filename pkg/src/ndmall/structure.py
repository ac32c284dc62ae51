"""Proof structures: formula occurrences joined by typed, weighted links.

Weights live on links only.  The weight of an occurrence is the sum of the
weights of the links concluding it, so it may be a non-monomial element such
as ``p + !p`` (which equals 1).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping, Optional

from .formula import (
    Formula,
    FormulaSyntaxError,
    NWith,
    Par,
    Plus,
    Tensor,
    With,
    dual,
    parse_formula,
    print_formula,
)
from .weights import ONE, Monomial, UnknownEigenweight, parse_monomial, sum_equals


class Kind(str, enum.Enum):
    ID = "ID"
    CUT = "CUT"
    GAX = "GAX"
    TENSOR = "TENSOR"
    PAR = "PAR"
    WITH = "WITH"
    PLUS1 = "PLUS1"
    PLUS2 = "PLUS2"
    NWITH = "NWITH"

    def __str__(self) -> str:
        return self.value


ADDITIVE = (Kind.WITH, Kind.NWITH)
BINARY = {Kind.TENSOR: Tensor, Kind.PAR: Par, Kind.WITH: With, Kind.NWITH: NWith}
# (premises, conclusions); None means "any positive number"
ARITY = {
    Kind.ID: (0, 2),
    Kind.CUT: (2, 0),
    Kind.GAX: (0, None),
    Kind.TENSOR: (2, 1),
    Kind.PAR: (2, 1),
    Kind.WITH: (2, 1),
    Kind.NWITH: (2, 1),
    Kind.PLUS1: (1, 1),
    Kind.PLUS2: (1, 1),
}


class StructureError(ValueError):
    """Dangling references or malformed links; raised before any condition check."""


class StructureParseError(ValueError):
    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


@dataclass(frozen=True)
class Link:
    id: int
    kind: Kind
    premises: tuple[int, ...]
    conclusions: tuple[int, ...]
    weight: Monomial = ONE

    def occurrences(self) -> tuple[int, ...]:
        return self.premises + self.conclusions


@dataclass(frozen=True, eq=False)
class ProofStructure:
    occurrences: Mapping[int, Formula]
    links: Mapping[int, Link]

    def __post_init__(self):
        for link in self.links.values():
            for o in link.occurrences():
                if o not in self.occurrences:
                    raise StructureError(f"link {link.id} refers to unknown occurrence {o}")
            if link.weight is None:
                raise StructureError(f"link {link.id} has zero weight")

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ProofStructure):
            return NotImplemented
        return dict(self.occurrences) == dict(other.occurrences) and dict(self.links) == dict(other.links)

    def __hash__(self) -> int:
        return hash(self.fingerprint)

    @cached_property
    def fingerprint(self) -> tuple:
        return (frozenset(self.occurrences.items()), frozenset(self.links.values()))

    @cached_property
    def producers(self) -> dict[int, tuple[int, ...]]:
        """occurrence -> ids of links having it as a conclusion."""
        out: dict[int, list[int]] = {o: [] for o in self.occurrences}
        for lid in sorted(self.links):
            for o in self.links[lid].conclusions:
                out[o].append(lid)
        return {o: tuple(v) for o, v in out.items()}

    @cached_property
    def consumers(self) -> dict[int, tuple[int, ...]]:
        """occurrence -> ids of links having it as a premise (at most one if valid)."""
        out: dict[int, list[int]] = {o: [] for o in self.occurrences}
        for lid in sorted(self.links):
            for o in self.links[lid].premises:
                out[o].append(lid)
        return {o: tuple(v) for o, v in out.items()}

    @cached_property
    def eigenweights(self) -> tuple[int, ...]:
        return tuple(sorted(lid for lid, l in self.links.items() if l.kind in ADDITIVE))

    def formula_weight(self, o: int) -> tuple[Monomial, ...]:
        return tuple(self.links[lid].weight for lid in self.producers[o])

    def conclusions(self) -> list[int]:
        return [o for o in sorted(self.occurrences) if not self.consumers[o]]

    def conclusion_formulas(self) -> tuple[Formula, ...]:
        return tuple(self.occurrences[o] for o in self.conclusions())

    def next_link_id(self) -> int:
        return max(self.links, default=0) + 1

    def next_occurrence_id(self) -> int:
        return max(self.occurrences, default=0) + 1

    def restrict(self, link_ids: Iterable[int]) -> "ProofStructure":
        """Keep the given links together with their premises and conclusions."""
        links = {lid: self.links[lid] for lid in sorted(link_ids)}
        occs = sorted({o for l in links.values() for o in l.occurrences()})
        return ProofStructure({o: self.occurrences[o] for o in occs}, links)

    def substitute(self, assignment: Mapping[int, int], drop: Iterable[int] = ()) -> "ProofStructure":
        """Fix eigenweights to 0/1, dropping zero-weight links and orphaned occurrences.

        Links listed in ``drop`` are removed first, as are occurrences that no
        surviving link touches.
        """
        dropped = set(drop)
        kept = {}
        for lid, link in self.links.items():
            if lid in dropped:
                continue
            w: Optional[Monomial] = link.weight
            for eid, bit in assignment.items():
                w = w.substitute(eid, bit)
                if w is None:
                    break
            if w is not None:
                kept[lid] = link if w == link.weight else Link(lid, link.kind, link.premises, link.conclusions, w)
        occs = sorted({o for l in kept.values() for o in l.occurrences()})
        return ProofStructure({o: self.occurrences[o] for o in occs}, dict(sorted(kept.items())))

    def __str__(self) -> str:
        return serialize_structure(self)


def disjoint_union(s1: ProofStructure, s2: ProofStructure) -> tuple[ProofStructure, dict[int, int], dict[int, int]]:
    """Juxtapose two structures, renumbering the second one past the first.

    Returns the union and the occurrence and link renamings applied to ``s2``.
    """
    occ_off, link_off = s1.next_occurrence_id() - 1, s1.next_link_id() - 1
    omap = {o: o + occ_off for o in s2.occurrences}
    lmap = {l: l + link_off for l in s2.links}
    occs = dict(s1.occurrences)
    occs.update({omap[o]: f for o, f in s2.occurrences.items()})
    links = dict(s1.links)
    for lid, l in s2.links.items():
        w = Monomial(tuple((lmap[v], sg) for v, sg in l.weight.literals))
        links[lmap[lid]] = Link(lmap[lid], l.kind, tuple(omap[o] for o in l.premises),
                                tuple(omap[o] for o in l.conclusions), w)
    return ProofStructure(occs, links), omap, lmap


def cut_together(s1: ProofStructure, o1: int, s2: ProofStructure, o2: int) -> ProofStructure:
    """Compose two structures by a weight-1 cut between conclusion o1 of s1 and o2 of s2."""
    u, omap, _ = disjoint_union(s1, s2)
    lid = u.next_link_id()
    links = dict(u.links)
    links[lid] = Link(lid, Kind.CUT, (o1, omap[o2]), (), ONE)
    return ProofStructure(u.occurrences, links)


# --------------------------------------------------------------------- validation


@dataclass(frozen=True)
class Violation:
    condition: str
    message: str
    ids: tuple[int, ...] = ()

    def __str__(self) -> str:
        return f"({self.condition}) {self.message}"


@dataclass
class ValidationReport:
    violations: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def add(self, condition: str, message: str, *ids: int) -> None:
        self.violations.append(Violation(condition, message, ids))

    def conditions(self) -> set[str]:
        return {v.condition for v in self.violations}

    def __str__(self) -> str:
        return "OK" if self.ok else "\n".join(str(v) for v in self.violations)


def _check_formulas(s: ProofStructure, link: Link, report: ValidationReport) -> bool:
    """Arity and formula agreement; False when the link shape is unusable."""
    want_p, want_c = ARITY[link.kind]
    np_, nc = len(link.premises), len(link.conclusions)
    if np_ != want_p or (want_c is None and nc < 1) or (want_c is not None and nc != want_c):
        report.add("a", f"link {link.id} {link.kind} has {np_} premises and {nc} conclusions", link.id)
        return False
    f = s.occurrences
    prem = [f[o] for o in link.premises]
    conc = [f[o] for o in link.conclusions]
    ok = True
    if link.kind is Kind.ID:
        ok = conc[1] == dual(conc[0])
    elif link.kind is Kind.CUT:
        ok = prem[1] == dual(prem[0])
    elif link.kind in BINARY:
        ok = conc[0] == BINARY[link.kind](prem[0], prem[1])
    elif link.kind is Kind.PLUS1:
        ok = isinstance(conc[0], Plus) and conc[0].left == prem[0]
    elif link.kind is Kind.PLUS2:
        ok = isinstance(conc[0], Plus) and conc[0].right == prem[0]
    if not ok:
        shown = ", ".join(print_formula(x) for x in prem) + " / " + ", ".join(print_formula(x) for x in conc)
        report.add("formula", f"link {link.id} {link.kind} does not match its formulas: {shown}", link.id)
    return True


def validate(s: ProofStructure) -> ValidationReport:
    report = ValidationReport()
    eigen = set(s.eigenweights)

    # (a) multiplicities
    for o in sorted(s.occurrences):
        if len(s.consumers[o]) > 1:
            report.add("a", f"occurrence {o} is premise of {len(s.consumers[o])} links", o, *s.consumers[o])
        if not s.producers[o]:
            report.add("a", f"occurrence {o} is the conclusion of no link", o)
    malformed = {lid for lid in sorted(s.links) if not _check_formulas(s, s.links[lid], report)}

    # (b) derived weights must be non-zero sums
    for o in sorted(s.occurrences):
        if s.producers[o] and not s.formula_weight(o):
            report.add("b", f"occurrence {o} has zero weight", o)

    # (c) conclusions weigh 1
    for o in s.conclusions():
        w = s.formula_weight(o)
        if w and not sum_equals(w, ONE):
            report.add("c", f"conclusion {o} has weight {' + '.join(map(str, w))}, not 1", o)

    # (d) link weights are non-zero monomials over this structure's eigenweights
    for lid in sorted(s.links):
        for v in s.links[lid].weight.variables():
            if v not in eigen:
                report.add("d", f"link {lid} weight mentions p{v}, which is not a &/^ link", lid)

    # (e) a weight containing a literal of p_L lies under w(L)
    for lid in sorted(s.links):
        u = s.links[lid].weight
        for v in sorted(u.variables()):
            if v in eigen and not u.leq(s.links[v].weight):
                report.add("e", f"link {lid} weight {u} is not below w(L{v}) = {s.links[v].weight}", lid, v)

    # (f) premise weights per link kind
    for lid in sorted(s.links):
        link = s.links[lid]
        if link.kind in (Kind.ID, Kind.GAX) or lid in malformed:
            continue
        w = link.weight
        if link.kind in ADDITIVE:
            targets = [w * Monomial.var(lid, True), w * Monomial.var(lid, False)]
        else:
            targets = [w] * len(link.premises)
        for o, t in zip(link.premises, targets):
            got = s.formula_weight(o)
            if t is None or not sum_equals(got, t):
                want = "0" if t is None else str(t)
                have = " + ".join(map(str, got)) or "0"
                report.add("f", f"link {lid} {link.kind}: premise {o} has weight {have}, expected {want}", lid, o)

    # (g) links sharing a conclusion carry pairwise disjoint weights
    for o in sorted(s.occurrences):
        prods = s.producers[o]
        for i in range(len(prods)):
            for j in range(i + 1, len(prods)):
                wi, wj = s.links[prods[i]].weight, s.links[prods[j]].weight
                if not wi.disjoint(wj):
                    report.add("g", f"links {prods[i]} and {prods[j]} both conclude {o} with overlapping weights {wi}, {wj}", o, prods[i], prods[j])
    return report



# --------------------------------------------------------------------- slices


@dataclass(frozen=True)
class Slice:
    valuation: Mapping[int, int]
    occurrences: frozenset[int]
    links: frozenset[int]
    # for each present &/^ link, its one surviving premise
    additive_premise: Mapping[int, int]


def slice_structure(s: ProofStructure, v: Mapping[int, int]) -> Slice:
    """Restrict ``s`` to the material of weight 1 under ``v``.

    ``v`` may be partial as long as every weight is decided by it; this is
    the case for the partial valuations produced by switching enumeration.
    """
    links = frozenset(lid for lid, l in s.links.items() if l.weight.evaluate(v))
    occs = frozenset(o for o in s.occurrences if any(lid in links for lid in s.producers[o]))
    chosen = {}
    for lid in sorted(links):
        link = s.links[lid]
        if link.kind in ADDITIVE:
            present = [o for o in link.premises if o in occs]
            if len(present) != 1:
                raise ValueError(f"link {lid} keeps {len(present)} premises in the slice")
            chosen[lid] = present[0]
    return Slice(dict(v), occs, links, chosen)


def eval_weight(m: Monomial, v: Mapping[int, int]) -> int:
    return m.evaluate(v)


# --------------------------------------------------------------------- file format


def _ids(text: str) -> tuple[int, ...]:
    text = text.strip()
    if text in ("", "-"):
        return ()
    return tuple(int(t) for t in text.split(","))


def parse_structure(text: str) -> ProofStructure:
    occs: dict[int, Formula] = {}
    links: dict[int, Link] = {}
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head, _, rest = line.partition(" ")
        try:
            if head == "occ":
                oid, _, ftext = rest.strip().partition(" ")
                oid_i = int(oid)
                if oid_i in occs:
                    raise StructureParseError(n, f"duplicate occurrence {oid_i}")
                occs[oid_i] = parse_formula(ftext)
            elif head == "link":
                parts = rest.split()
                if len(parts) != 5:
                    raise StructureParseError(n, "expected: link <id> <KIND> prem=... conc=... w=...")
                lid = int(parts[0])
                if lid in links:
                    raise StructureParseError(n, f"duplicate link {lid}")
                try:
                    kind = Kind(parts[1])
                except ValueError:
                    raise StructureParseError(n, f"unknown link kind {parts[1]!r}") from None
                fields = {}
                for p in parts[2:]:
                    key, eq, val = p.partition("=")
                    if not eq or key not in ("prem", "conc", "w") or key in fields:
                        raise StructureParseError(n, f"bad field {p!r}")
                    fields[key] = val
                if set(fields) != {"prem", "conc", "w"}:
                    raise StructureParseError(n, "missing prem=, conc= or w=")
                w = parse_monomial(fields["w"])
                if w is None:
                    raise StructureParseError(n, f"weight {fields['w']} is zero")
                links[lid] = Link(lid, kind, _ids(fields["prem"]), _ids(fields["conc"]), w)
            else:
                raise StructureParseError(n, f"unknown directive {head!r}")
        except FormulaSyntaxError as e:
            raise StructureParseError(n, str(e)) from None
        except ValueError as e:
            if isinstance(e, StructureParseError):
                raise
            raise StructureParseError(n, str(e)) from None
    try:
        return ProofStructure(occs, links)
    except StructureError as e:
        raise StructureParseError(0, str(e)) from None


def serialize_structure(s: ProofStructure) -> str:
    lines = [f"occ {o} {print_formula(s.occurrences[o])}" for o in sorted(s.occurrences)]
    for lid in sorted(s.links):
        l = s.links[lid]
        prem = ",".join(map(str, l.premises)) or "-"
        conc = ",".join(map(str, l.conclusions)) or "-"
        lines.append(f"link {lid} {l.kind.value} prem={prem} conc={conc} w={l.weight}")
    return "\n".join(lines) + "\n"


__all__ = [
    "Kind",
    "Link",
    "ProofStructure",
    "Slice",
    "StructureError",
    "StructureParseError",
    "UnknownEigenweight",
    "ValidationReport",
    "Violation",
    "cut_together",
    "disjoint_union",
    "eval_weight",
    "parse_structure",
    "serialize_structure",
    "slice_structure",
    "validate",
]
