"""Lazy cut elimination.

Only ready cuts are reduced: weight 1, and each premise produced by exactly
one link.  A cut between two ^ links forks normalization into two contractums,
one with both eigenweights set to 1 and one with both set to 0.  Normal forms
may keep cuts whose premises are superposed.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Optional


from .correctness import DEFAULT_LIMIT, InvalidStructure, is_proof_net
from .formula import print_formula
from .structure import Kind, Link, ProofStructure, serialize_structure, validate
from .weights import ONE

AX_CUT = "AxCut"
TENSOR_PAR = "TensorPar"
WITH_PLUS = "WithPlus"
NWITH = "NWith"  # the fork event; its two children are labelled Left/Right
NWITH_LEFT = "NWithLeft"
NWITH_RIGHT = "NWithRight"

DEFAULT_STEP_BUDGET = 1_000_000


class StuckCut(ValueError):
    pass


class NotANet(ValueError):
    pass


@dataclass(frozen=True)
class ReadyCut:
    cut: int
    left_src: int
    right_src: int


@dataclass(frozen=True)
class ReductionStep:
    kind: str
    cut: int


def ready_cuts(s: ProofStructure) -> list[ReadyCut]:
    out = []
    for lid in sorted(s.links):
        link = s.links[lid]
        if link.kind is not Kind.CUT or not link.weight.is_one:
            continue
        a, b = link.premises
        pa, pb = s.producers[a], s.producers[b]
        if len(pa) == 1 and len(pb) == 1:
            out.append(ReadyCut(lid, pa[0], pb[0]))
    return out


def step_kind(s: ProofStructure, c: ReadyCut) -> Optional[str]:
    """Which rule applies to a ready cut, or None if its sources do not interact."""
    kl, kr = s.links[c.left_src].kind, s.links[c.right_src].kind
    if Kind.ID in (kl, kr):
        return AX_CUT if c.left_src != c.right_src else None
    pair = {kl, kr}
    if pair == {Kind.TENSOR, Kind.PAR}:
        return TENSOR_PAR
    if Kind.WITH in pair and pair & {Kind.PLUS1, Kind.PLUS2} and len(pair) == 2:
        return WITH_PLUS
    if kl is Kind.NWITH and kr is Kind.NWITH:
        return NWITH
    return None


def _with_links(s: ProofStructure, links: dict[int, Link], drop_occs=()) -> ProofStructure:
    occs = dict(s.occurrences)
    for o in drop_occs:
        del occs[o]
    return ProofStructure(occs, dict(sorted(links.items())))


def _add_cut(s: ProofStructure, a: int, b: int, lid: Optional[int] = None) -> ProofStructure:
    lid = s.next_link_id() if lid is None else lid
    links = dict(s.links)
    links[lid] = Link(lid, Kind.CUT, (a, b), (), ONE)
    return ProofStructure(s.occurrences, links)


def reduce_step(s: ProofStructure, c: ReadyCut) -> list[ProofStructure]:
    kind = step_kind(s, c)
    cut_link = s.links[c.cut]
    left, right = s.links[c.left_src], s.links[c.right_src]
    if kind is None:
        raise StuckCut(f"cut {c.cut}: {left.kind} link {left.id} does not interact with {right.kind} link {right.id}")
    pa, pb = cut_link.premises
    next_id = s.next_link_id()

    if kind == AX_CUT:
        # consume the identity on the right when possible, otherwise the left one
        if right.kind is Kind.ID:
            ident, other, mine, theirs = right, left, pb, pa
        else:
            ident, other, mine, theirs = left, right, pa, pb
        keep = ident.conclusions[1] if ident.conclusions[0] == mine else ident.conclusions[0]
        links = dict(s.links)
        del links[c.cut], links[ident.id]
        links[other.id] = Link(other.id, other.kind, other.premises,
                               tuple(keep if o == theirs else o for o in other.conclusions), other.weight)
        return [_with_links(s, links, (pa, pb))]

    if kind == TENSOR_PAR:
        links = dict(s.links)
        del links[c.cut], links[left.id], links[right.id]
        (a1, b1), (a2, b2) = left.premises, right.premises
        links[next_id] = Link(next_id, Kind.CUT, (a1, a2), (), ONE)
        links[next_id + 1] = Link(next_id + 1, Kind.CUT, (b1, b2), (), ONE)
        return [_with_links(s, links, (pa, pb))]

    if kind == WITH_PLUS:
        w, pl = (left, right) if left.kind is Kind.WITH else (right, left)
        bit = 1 if pl.kind is Kind.PLUS1 else 0
        survivor = w.premises[0] if bit else w.premises[1]
        rest = s.substitute({w.id: bit}, drop=[c.cut, w.id, pl.id])
        pair = (survivor, pl.premises[0]) if w is left else (pl.premises[0], survivor)
        return [_add_cut(rest, *pair, lid=next_id)]

    # two ^ links: both eigenweights to 1, then both to 0
    out = []
    for bit, idx in ((1, 0), (0, 1)):
        rest = s.substitute({left.id: bit, right.id: bit}, drop=[c.cut, left.id, right.id])
        out.append(_add_cut(rest, left.premises[idx], right.premises[idx], lid=next_id))
    return out


def reducible_cuts(s: ProofStructure) -> list[ReadyCut]:
    return [c for c in ready_cuts(s) if step_kind(s, c) is not None]


def is_lazy_normal(s: ProofStructure) -> bool:
    return not reducible_cuts(s)


# --------------------------------------------------------------------- normalization


@dataclass
class BranchNode:
    path: str
    structure: ProofStructure
    depth: int = 0  # steps from the root along this branch
    via: Optional[ReductionStep] = None  # step that produced this node from its parent
    children: list["BranchNode"] = field(default_factory=list)
    complete: bool = True

    @property
    def is_leaf(self) -> bool:
        return not self.children


@dataclass
class BranchTree:
    root: BranchNode
    total_steps: int
    trace: list[str]

    def leaves(self) -> list[BranchNode]:
        out, stack = [], [self.root]
        while stack:
            n = stack.pop()
            if n.is_leaf:
                out.append(n)
            else:
                stack.extend(reversed(n.children))
        return out

    @property
    def complete(self) -> bool:
        return all(l.complete for l in self.leaves())

    def render(self) -> str:
        """Trace followed by each leaf; byte-identical for identical runs."""
        parts = list(self.trace)
        for k, leaf in enumerate(self.leaves()):
            status = "complete" if leaf.complete else "incomplete"
            parts.append(f"leaf {k} branch {leaf.path} steps {leaf.depth} {status}")
            parts.append(serialize_structure(leaf.structure).rstrip("\n"))
        return "\n".join(parts) + "\n"


def normalize_all(
    s: ProofStructure,
    strategy: str = "first",
    seed: Optional[int] = None,
    budget: int = DEFAULT_STEP_BUDGET,
    check: bool = True,
    limit: int = DEFAULT_LIMIT,
) -> BranchTree:
    if strategy not in ("first", "random"):
        raise ValueError(f"unknown strategy {strategy!r}")
    if strategy == "random" and seed is None:
        raise ValueError("strategy 'random' needs a seed")
    if check:
        rep = validate(s)
        if not rep.ok:
            raise InvalidStructure(rep)
        verdict = is_proof_net(s, limit, check_valid=False)
        if not verdict.is_net:
            raise NotANet(f"input is not a proof net ({verdict.outcome})")
    rng = random.Random(seed)
    root = BranchNode("0", s)
    trace: list[str] = []
    steps = 0
    stack = [root]
    while stack:
        node = stack.pop()
        current = node
        while True:
            cuts = reducible_cuts(current.structure)
            if not cuts:
                break
            if steps >= budget:
                current.complete = False
                break
            c = cuts[0] if strategy == "first" else rng.choice(cuts)
            kind = step_kind(current.structure, c)
            results = reduce_step(current.structure, c)
            steps += 1
            if len(results) == 1:
                trace.append(f"step {steps} branch {current.path} {kind} cut={c.cut}")
                child = BranchNode(current.path, results[0], current.depth + 1, ReductionStep(kind, c.cut))
                current.children.append(child)
                current = child
                continue
            trace.append(f"step {steps} branch {current.path} {NWITH} cut={c.cut}")
            for k, (r, label) in enumerate(zip(results, (NWITH_LEFT, NWITH_RIGHT))):
                current.children.append(
                    BranchNode(f"{current.path}.{k}", r, current.depth + 1, ReductionStep(label, c.cut)))
            stack.extend(reversed(current.children))
            break
    return BranchTree(root, steps, trace)


def normal_forms(s: ProofStructure, **kw) -> list[ProofStructure]:
    return [leaf.structure for leaf in normalize_all(s, **kw).leaves()]


# --------------------------------------------------------------------- isomorphism

_UNORDERED = (Kind.ID, Kind.CUT, Kind.GAX)


def _labelled(s: ProofStructure, tag: int):
    """Node labels and labelled directed edges of a structure, nodes tagged by side."""
    nodes, edges = {}, []
    for o, f in s.occurrences.items():
        nodes[(tag, "o", o)] = "occ " + print_formula(f)
    for lid, link in s.links.items():
        me = (tag, "l", lid)
        nodes[me] = link.kind.value
        for k, o in enumerate(link.premises):
            edges.append((me, (tag, "o", o), "p" if link.kind in _UNORDERED else f"p{k}"))
        for k, o in enumerate(link.conclusions):
            edges.append((me, (tag, "o", o), "c" if link.kind in _UNORDERED else f"c{k}"))
        for var, sign in link.weight.literals:
            edges.append((me, (tag, "l", var), "+" if sign else "-"))
    return nodes, edges


def _refine(colors: dict, out_adj: dict, in_adj: dict) -> dict:
    # colour refinement to a stable partition, run on both graphs at once so colours are comparable
    while True:
        sigs = {
            n: (colors[n],
                tuple(sorted((lab, colors[m]) for lab, m in out_adj[n])),
                tuple(sorted((lab, colors[m]) for lab, m in in_adj[n])))
            for n in colors
        }
        table = {sig: k for k, sig in enumerate(sorted(set(sigs.values())))}
        new = {n: table[sigs[n]] for n in colors}
        if len(table) == len(set(colors.values())):
            return new
        colors = new


def isomorphic(s1: ProofStructure, s2: ProofStructure) -> bool:
    """Isomorphism preserving kinds, adjacency, formulas and weights up to renaming.

    Colour refinement with individualization; exact, and fast on the mostly
    asymmetric structures produced by normalization.
    """
    if len(s1.occurrences) != len(s2.occurrences) or len(s1.links) != len(s2.links):
        return False
    if s1 == s2:
        return True
    n1, e1 = _labelled(s1, 0)
    n2, e2 = _labelled(s2, 1)
    if sorted(n1.values()) != sorted(n2.values()) or len(e1) != len(e2):
        return False
    labels = {**n1, **n2}
    out_adj = {n: [] for n in labels}
    in_adj = {n: [] for n in labels}
    for u, v, lab in e1 + e2:
        out_adj[u].append((lab, v))
        in_adj[v].append((lab, u))
    edge_set2 = {(u, v, lab) for u, v, lab in e2}
    table = {lab: k for k, lab in enumerate(sorted(set(labels.values())))}
    start = _refine({n: table[lab] for n, lab in labels.items()}, out_adj, in_adj)

    def search(colors: dict) -> bool:
        classes: dict[int, tuple[list, list]] = {}
        for n, c in colors.items():
            classes.setdefault(c, ([], []))[n[0]].append(n)
        if any(len(a) != len(b) for a, b in classes.values()):
            return False
        open_class = next((ab for ab in classes.values() if len(ab[0]) > 1), None)
        if open_class is None:
            f = {ab[0][0]: ab[1][0] for ab in classes.values()}
            return all((f[u], f[v], lab) in edge_set2 for u, v, lab in e1)
        fresh = max(colors.values()) + 1
        u = open_class[0][0]
        for v in open_class[1]:
            trial = dict(colors)
            trial[u] = trial[v] = fresh
            if search(_refine(trial, out_adj, in_adj)):
                return True
        return False

    return search(start)
