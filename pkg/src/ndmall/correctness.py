"""Switchings, switching graphs and the proof-net criterion.

A structure is a net when every switching graph is a tree.  Switchings are
enumerated per *live* valuation: eigenweights are only assigned when their
link is present in the slice being built.  Eigenweights of absent links
cannot influence the slice, the par choices or the jumps, so each live
valuation stands for the class of total valuations extending it and the
criterion is unchanged.  ``all_valuations=True`` walks the 2^n total
valuations instead.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterator, Mapping, Optional

from .structure import ADDITIVE, Kind, ProofStructure, Slice, ValidationReport, slice_structure, validate

DEFAULT_LIMIT = 2 ** 22

YES = "yes"
CYCLIC = "cyclic"
DISCONNECTED = "disconnected"


class InvalidStructure(ValueError):
    def __init__(self, report: ValidationReport):
        super().__init__(f"invalid proof structure:\n{report}")
        self.report = report


class SwitchingLimitExceeded(Exception):
    def __init__(self, count: int, limit: int):
        super().__init__(f"more than {limit} switchings (at least {count})")
        self.count = count
        self.limit = limit


@dataclass(frozen=True)
class Switching:
    valuation: Mapping[int, int]
    par_choice: Mapping[int, str] = field(default_factory=dict)
    jump_with: Mapping[int, int] = field(default_factory=dict)
    jump_nwith: Mapping[int, int] = field(default_factory=dict)

    def jumps(self) -> dict[int, int]:
        return {**self.jump_with, **self.jump_nwith}

    def to_json(self) -> dict:
        return {
            "valuation": {f"p{k}": v for k, v in sorted(self.valuation.items())},
            "par": {str(k): v for k, v in sorted(self.par_choice.items())},
            "jump": {str(k): v for k, v in sorted(self.jumps().items())},
        }

    def __str__(self) -> str:
        val = " ".join(f"p{k}={v}" for k, v in sorted(self.valuation.items())) or "-"
        par = " ".join(f"{k}={v}" for k, v in sorted(self.par_choice.items())) or "-"
        jmp = " ".join(f"{k}->{v}" for k, v in sorted(self.jumps().items())) or "-"
        return f"valuation {val}; par {par}; jump {jmp}"


@dataclass(frozen=True)
class SwitchGraph:
    vertices: frozenset[int]
    edges: tuple[tuple[int, int], ...]


@dataclass(frozen=True)
class NetVerdict:
    outcome: str  # "NET", "NOT_NET" or "LIMIT_EXCEEDED"
    witness: Optional[Switching] = None
    defect: Optional[str] = None
    count: Optional[int] = None

    @property
    def is_net(self) -> bool:
        return self.outcome == "NET"

    def to_json(self) -> dict:
        out: dict = {"verdict": self.outcome}
        if self.witness is not None:
            out["defect"] = self.defect
            out["witness"] = self.witness.to_json()
        if self.count is not None:
            out["switchings"] = self.count
        return out


def depends_on(s: ProofStructure, v: Mapping[int, int], o: int, e: int) -> int:
    # a producer of weight 1 flips to 0 exactly when it mentions e
    return int(any(
        s.links[lid].weight.mentions(e) and s.links[lid].weight.evaluate(v)
        for lid in s.producers[o]
    ))


def jump_candidates(s: ProofStructure, v: Mapping[int, int], link_id: int) -> list[int]:
    link = s.links.get(link_id)
    if link is None or link.kind not in ADDITIVE or not link.weight.evaluate(v):
        raise ValueError(f"link {link_id} is not a &/^ link of the slice")
    out = set()
    for l in s.links.values():
        if l.weight.mentions(link_id) and l.weight.evaluate(v):
            out.update(l.conclusions)
    return sorted(out)


def live_valuations(s: ProofStructure) -> Iterator[dict[int, int]]:
    """Partial valuations assigning exactly the eigenweights of present links."""
    additive = [s.links[e] for e in s.eigenweights]

    def go(v: dict[int, int]) -> Iterator[dict[int, int]]:
        for link in additive:
            if link.id not in v and _decided_one(link.weight, v):
                for bit in (0, 1):
                    yield from go({**v, link.id: bit})
                return
        yield v

    yield from go({})


def _decided_one(w, v) -> bool:
    return all(var in v and bool(v[var]) == sign for var, sign in w.literals)


def all_total_valuations(s: ProofStructure) -> Iterator[dict[int, int]]:
    ids = s.eigenweights
    for bits in itertools.product((0, 1), repeat=len(ids)):
        yield dict(zip(ids, bits))


@dataclass
class _SliceChoices:
    slice: Slice
    fixed: list[tuple[int, int]]
    pars: list[tuple[int, tuple[int, int], tuple[int, int]]]  # (link, left edge, right edge)
    additive: list[tuple[int, Kind, int, list[int]]]  # (link, kind, conclusion, jump candidates)

    def count(self) -> int:
        n = 2 ** len(self.pars)
        for *_, cands in self.additive:
            n *= len(cands)
        return n


def _slice_choices(s: ProofStructure, v: Mapping[int, int]) -> _SliceChoices:
    sl = slice_structure(s, v)
    fixed, pars, additive = [], [], []
    for lid in sorted(sl.links):
        link = s.links[lid]
        k = link.kind
        if k is Kind.ID or k is Kind.GAX:
            first = link.conclusions[0]
            fixed.extend((first, c) for c in link.conclusions[1:])
        elif k is Kind.CUT:
            fixed.append((link.premises[0], link.premises[1]))
        elif k in (Kind.PLUS1, Kind.PLUS2):
            fixed.append((link.premises[0], link.conclusions[0]))
        elif k is Kind.TENSOR:
            c = link.conclusions[0]
            fixed.extend(((link.premises[0], c), (link.premises[1], c)))
        elif k is Kind.PAR:
            c = link.conclusions[0]
            pars.append((lid, (link.premises[0], c), (link.premises[1], c)))
        elif k in ADDITIVE:
            additive.append((lid, k, link.conclusions[0], jump_candidates(s, v, lid)))
    return _SliceChoices(sl, fixed, pars, additive)


def _valuations(s: ProofStructure, all_valuations: bool) -> Iterator[dict[int, int]]:
    return all_total_valuations(s) if all_valuations else live_valuations(s)


def count_switchings(s: ProofStructure, cap: Optional[int] = None, all_valuations: bool = False) -> int:
    """Number of switchings; stops early once it exceeds ``cap``."""
    if all_valuations and cap is not None and 2 ** len(s.eigenweights) > cap:
        return 2 ** len(s.eigenweights)
    total = 0
    for v in _valuations(s, all_valuations):
        total += _slice_choices(s, v).count()
        if cap is not None and total > cap:
            break
    return total


def _expand(sc: _SliceChoices) -> Iterator[tuple[Switching, list[tuple[int, int]]]]:
    par_opts = [(("l", le), ("r", re)) for _, le, re in sc.pars]
    jump_opts = [[(t, (t, c)) for t in cands] for _, _, c, cands in sc.additive]
    for pc in itertools.product(*par_opts):
        for jc in itertools.product(*jump_opts):
            par_choice = {sc.pars[i][0]: side for i, (side, _) in enumerate(pc)}
            jw, jn = {}, {}
            for i, (target, _) in enumerate(jc):
                lid, kind, _, _ = sc.additive[i]
                (jw if kind is Kind.WITH else jn)[lid] = target
            edges = sc.fixed + [e for _, e in pc] + [e for _, e in jc]
            yield Switching(dict(sc.slice.valuation), par_choice, jw, jn), edges


def enumerate_switchings(s: ProofStructure, limit: int = DEFAULT_LIMIT, all_valuations: bool = False) -> Iterator[Switching]:
    """All switchings in deterministic order; raises SwitchingLimitExceeded up front."""
    total = count_switchings(s, limit, all_valuations)
    if total > limit:
        raise SwitchingLimitExceeded(total, limit)

    def gen():
        for v in _valuations(s, all_valuations):
            for sw, _ in _expand(_slice_choices(s, v)):
                yield sw

    return gen()


def switch_graph(s: ProofStructure, sw: Switching) -> SwitchGraph:
    sc = _slice_choices(s, sw.valuation)
    edges = list(sc.fixed)
    for lid, le, re in sc.pars:
        edges.append(le if sw.par_choice[lid] == "l" else re)
    jumps = sw.jumps()
    for lid, _, c, cands in sc.additive:
        target = jumps[lid]
        if target not in cands:
            raise ValueError(f"jump {target} of link {lid} does not depend on p{lid}")
        edges.append((target, c))
    return SwitchGraph(sc.slice.occurrences, tuple(edges))


def _shape(vertices, edges) -> str:
    parent = {x: x for x in vertices}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for a, b in edges:
        ra, rb = find(a), find(b)
        if ra == rb:
            return CYCLIC
        parent[ra] = rb
    roots = {find(x) for x in vertices}
    return YES if len(roots) <= 1 else DISCONNECTED


def is_connected_acyclic(g: SwitchGraph) -> str:
    return _shape(g.vertices, g.edges)


def is_proof_net(
    s: ProofStructure,
    limit: int = DEFAULT_LIMIT,
    all_valuations: bool = False,
    check_valid: bool = True,
) -> NetVerdict:
    if check_valid:
        report = validate(s)
        if not report.ok:
            raise InvalidStructure(report)
    total = count_switchings(s, limit, all_valuations)
    if total > limit:
        return NetVerdict("LIMIT_EXCEEDED", count=total)
    for v in _valuations(s, all_valuations):
        sc = _slice_choices(s, v)
        for sw, edges in _expand(sc):
            shape = _shape(sc.slice.occurrences, edges)
            if shape != YES:
                return NetVerdict("NOT_NET", sw, shape, total)
    return NetVerdict("NET", count=total)
