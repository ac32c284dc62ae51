"""One-sided NDMALL sequent proofs and their translation to and from proof structures.

Sequents are ordered tuples.  Besides the logical rules there are a
generalized-axiom rule ``gax`` (mirroring GAX links) and an explicit
exchange rule ``ex``, which sequentialization needs to line contexts up.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

from .formula import (
    Formula,
    FormulaSyntaxError,
    NWith,
    Par,
    Plus,
    Tensor,
    With,
    dual,
    parse_formula_prefix,
    print_formula,
    print_sequent,
)
from .structure import ADDITIVE, Kind, Link, ProofStructure, validate
from .weights import ONE, Monomial

RULES = ("ax", "gax", "ex", "cut", "tensor", "par", "with", "nwith", "plus1", "plus2")


class RuleError(ValueError):
    pass


class ProofSyntaxError(ValueError):
    def __init__(self, message: str, pos: int, text: str = ""):
        line = text.count("\n", 0, pos) + 1 if text else 0
        super().__init__(f"line {line}: {message}" if text else message)
        self.pos = pos
        self.line = line


class ProofRuleError(ProofSyntaxError):
    """A well-formed proof term whose rule application is not allowed."""


@dataclass(frozen=True)
class SequentProof:
    rule: str
    args: tuple
    conclusion: tuple[Formula, ...]
    premises: tuple["SequentProof", ...] = ()

    def __str__(self) -> str:
        return print_sequent(self.conclusion)

    def size(self) -> int:
        return 1 + sum(p.size() for p in self.premises)

    def rules_used(self) -> set[str]:
        out = {self.rule}
        for p in self.premises:
            out |= p.rules_used()
        return out


def _index(seq: Sequence[Formula], i: int, what: str) -> Formula:
    if not isinstance(i, int) or not 0 <= i < len(seq):
        raise RuleError(f"{what}: index {i} out of range for {print_sequent(seq)}")
    return seq[i]


def _drop(seq: Sequence[Formula], i: int) -> tuple[Formula, ...]:
    return tuple(seq[:i]) + tuple(seq[i + 1:])


def apply_rule(rule: str, args: tuple, prems: Sequence[tuple[Formula, ...]]) -> tuple[Formula, ...]:
    """Conclusion of ``rule`` applied to premise sequents; RuleError if inapplicable."""
    arity = {"ax": 0, "gax": 0, "ex": 1, "par": 1, "plus1": 1, "plus2": 1}.get(rule, 2)
    if rule not in RULES:
        raise RuleError(f"unknown rule {rule!r}")
    if len(prems) != arity:
        raise RuleError(f"{rule} takes {arity} premises, got {len(prems)}")
    if rule == "ax":
        (a,) = args
        return (a, dual(a))
    if rule == "gax":
        if not args:
            raise RuleError("gax needs at least one formula")
        return tuple(args)
    if rule == "ex":
        (perm,) = args
        (g,) = prems
        if sorted(perm) != list(range(len(g))):
            raise RuleError(f"ex: {list(perm)} is not a permutation of {len(g)} formulas")
        return tuple(g[k] for k in perm)
    if rule == "par":
        (i,) = args
        (g,) = prems
        a = _index(g, i, "par")
        b = _index(g, i + 1, "par")
        return tuple(g[:i]) + (Par(a, b),) + tuple(g[i + 2:])
    if rule in ("plus1", "plus2"):
        i, other = args
        (g,) = prems
        a = _index(g, i, rule)
        f = Plus(a, other) if rule == "plus1" else Plus(other, a)
        return tuple(g[:i]) + (f,) + tuple(g[i + 1:])
    if rule == "tensor":
        i, j = args
        g, d = prems
        a, b = _index(g, i, "tensor"), _index(d, j, "tensor")
        return tuple(g[:i]) + (Tensor(a, b),) + tuple(g[i + 1:]) + _drop(d, j)
    if rule in ("with", "nwith"):
        (i,) = args
        g, d = prems
        a, b = _index(g, i, rule), _index(d, i, rule)
        if _drop(g, i) != _drop(d, i):
            raise RuleError(f"{rule}: contexts differ: {print_sequent(_drop(g, i))} vs {print_sequent(_drop(d, i))}")
        cls = With if rule == "with" else NWith
        return tuple(g[:i]) + (cls(a, b),) + tuple(g[i + 1:])
    if rule == "cut":
        a, i, j = args
        g, d = prems
        if _index(g, i, "cut") != a or _index(d, j, "cut") != dual(a):
            raise RuleError(f"cut on {print_formula(a)}: premises carry {print_formula(g[i])} and {print_formula(d[j])}")
        return _drop(g, i) + _drop(d, j)
    raise AssertionError(rule)


def _node(rule: str, args: tuple, *prems: SequentProof) -> SequentProof:
    return SequentProof(rule, args, apply_rule(rule, args, [p.conclusion for p in prems]), prems)


def ax(a: Formula) -> SequentProof:
    return _node("ax", (a,))


def gax(*formulas: Formula) -> SequentProof:
    return _node("gax", tuple(formulas))


def ex(perm: Sequence[int], p: SequentProof) -> SequentProof:
    return _node("ex", (tuple(perm),), p)


def par(i: int, p: SequentProof) -> SequentProof:
    return _node("par", (i,), p)


def plus1(i: int, right: Formula, p: SequentProof) -> SequentProof:
    return _node("plus1", (i, right), p)


def plus2(i: int, left: Formula, p: SequentProof) -> SequentProof:
    return _node("plus2", (i, left), p)


def tensor(i: int, j: int, p: SequentProof, q: SequentProof) -> SequentProof:
    return _node("tensor", (i, j), p, q)


def with_(i: int, p: SequentProof, q: SequentProof) -> SequentProof:
    return _node("with", (i,), p, q)


def nwith(i: int, p: SequentProof, q: SequentProof) -> SequentProof:
    return _node("nwith", (i,), p, q)


def cut(a: Formula, i: int, j: int, p: SequentProof, q: SequentProof) -> SequentProof:
    return _node("cut", (a, i, j), p, q)


@dataclass
class CheckResult:
    ok: bool
    diagnostics: list[str] = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.ok


def check_proof(p: SequentProof) -> CheckResult:
    """Check every node bottom-up; the first bad node is reported."""

    def go(node: SequentProof, path: str) -> Optional[str]:
        for k, sub in enumerate(node.premises):
            bad = go(sub, f"{path}.{k}")
            if bad:
                return bad
        try:
            want = apply_rule(node.rule, node.args, [q.conclusion for q in node.premises])
        except RuleError as e:
            return f"node {path} ({node.rule}): {e}"
        if tuple(node.conclusion) != want:
            return (f"node {path} ({node.rule}): concludes {print_sequent(node.conclusion)} "
                    f"but the rule gives {print_sequent(want)}")
        return None

    bad = go(p, "0")
    return CheckResult(bad is None, [bad] if bad else [])


# --------------------------------------------------------------------- proof files


class _Reader:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def fail(self, msg: str):
        raise ProofSyntaxError(msg, self.pos, self.text)

    def skip(self):
        t = self.text
        while self.pos < len(t):
            if t[self.pos].isspace():
                self.pos += 1
            elif t[self.pos] in ";#":
                nl = t.find("\n", self.pos)
                self.pos = len(t) if nl < 0 else nl + 1
            else:
                break

    def peek(self) -> str:
        self.skip()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def expect(self, ch: str):
        if self.peek() != ch:
            self.fail(f"expected {ch!r}")
        self.pos += 1

    def word(self) -> str:
        self.skip()
        start = self.pos
        while self.pos < len(self.text) and (self.text[self.pos].isalnum() or self.text[self.pos] == "_"):
            self.pos += 1
        if start == self.pos:
            self.fail("expected a word")
        return self.text[start:self.pos]

    def integer(self) -> int:
        w = self.word()
        if not w.isdigit():
            self.pos -= len(w)
            self.fail(f"expected an index, got {w!r}")
        return int(w)

    def formula(self) -> Formula:
        self.skip()
        try:
            f, self.pos = parse_formula_prefix(self.text, self.pos)
        except FormulaSyntaxError as e:
            raise ProofSyntaxError(str(e), e.pos, self.text) from None
        return f

    def proof(self) -> SequentProof:
        self.expect("(")
        start = self.pos
        rule = self.word()
        if rule not in RULES:
            self.pos = start
            self.fail(f"unknown rule {rule!r}")
        if rule == "ax":
            args, subs = (self.formula(),), ()
        elif rule == "gax":
            fs = []
            while self.peek() not in (")", ""):
                fs.append(self.formula())
            args, subs = tuple(fs), ()
        elif rule == "ex":
            perm = []
            while self.peek().isdigit():
                perm.append(self.integer())
            args, subs = (tuple(perm),), (self.proof(),)
        elif rule == "par":
            args, subs = (self.integer(),), (self.proof(),)
        elif rule in ("plus1", "plus2"):
            i = self.integer()
            args = (i, self.formula())
            subs = (self.proof(),)
        elif rule == "tensor":
            args = (self.integer(), self.integer())
            subs = (self.proof(), self.proof())
        elif rule in ("with", "nwith"):
            args = (self.integer(),)
            subs = (self.proof(), self.proof())
        else:  # cut
            a = self.formula()
            args = (a, self.integer(), self.integer())
            subs = (self.proof(), self.proof())
        self.expect(")")
        try:
            concl = apply_rule(rule, args, [q.conclusion for q in subs])
        except RuleError as e:
            raise ProofRuleError(str(e), start, self.text) from None
        return SequentProof(rule, args, concl, subs)


def parse_proof(text: str) -> SequentProof:
    r = _Reader(text)
    p = r.proof()
    if r.peek():
        r.fail("trailing input after proof")
    return p


def _head(p: SequentProof) -> str:
    a = p.args
    if p.rule == "ax":
        return f"ax {print_formula(a[0])}"
    if p.rule == "gax":
        return "gax " + " ".join(print_formula(f) for f in a)
    if p.rule == "ex":
        return "ex " + " ".join(map(str, a[0]))
    if p.rule in ("plus1", "plus2"):
        return f"{p.rule} {a[0]} {print_formula(a[1])}"
    if p.rule == "cut":
        return f"cut {print_formula(a[0])} {a[1]} {a[2]}"
    return p.rule + " " + " ".join(map(str, a))


def print_proof(p: SequentProof, annotate: bool = True) -> str:
    """Canonical layout, one node per line, each annotated with its conclusion."""
    lines: list[list[str]] = []

    def go(node: SequentProof, depth: int):
        line = ["  " * depth + "(" + _head(node), "", print_sequent(node.conclusion)]
        lines.append(line)
        if not node.premises:
            line[1] = ")"
        for sub in node.premises:
            go(sub, depth + 1)
        if node.premises:
            lines[-1][1] += ")"

    go(p, 0)
    if not annotate:
        return "\n".join(l[0] + l[1] for l in lines) + "\n"
    width = max(len(l[0] + l[1]) for l in lines)
    return "\n".join(f"{(l[0] + l[1]).ljust(width)}  ; {l[2]}" for l in lines) + "\n"


# --------------------------------------------------------------------- desequentialization


class _Builder:
    def __init__(self):
        self.occs: dict[int, Formula] = {}
        self.links: dict[int, Link] = {}
        self._next_occ = 1

    def occ(self, f: Formula) -> int:
        oid = self._next_occ
        self._next_occ += 1
        self.occs[oid] = f
        return oid

    def link(self, kind: Kind, prem: Sequence[int], conc: Sequence[int]) -> int:
        lid = len(self.links) + 1
        self.links[lid] = Link(lid, kind, tuple(prem), tuple(conc), ONE)
        return lid

    def build(self, p: SequentProof) -> tuple[list[int], list[int]]:
        """Return (conclusion occurrence ids in sequent order, link ids of the sub-structure)."""
        r = p.rule
        if r == "ax":
            a = p.conclusion
            c = [self.occ(a[0]), self.occ(a[1])]
            return c, [self.link(Kind.ID, (), c)]
        if r == "gax":
            c = [self.occ(f) for f in p.conclusion]
            return c, [self.link(Kind.GAX, (), c)]
        if r == "ex":
            c, ls = self.build(p.premises[0])
            return [c[k] for k in p.args[0]], ls
        if r == "par":
            c, ls = self.build(p.premises[0])
            i = p.args[0]
            o = self.occ(p.conclusion[i])
            ls.append(self.link(Kind.PAR, (c[i], c[i + 1]), (o,)))
            return c[:i] + [o] + c[i + 2:], ls
        if r in ("plus1", "plus2"):
            c, ls = self.build(p.premises[0])
            i = p.args[0]
            o = self.occ(p.conclusion[i])
            ls.append(self.link(Kind.PLUS1 if r == "plus1" else Kind.PLUS2, (c[i],), (o,)))
            return c[:i] + [o] + c[i + 1:], ls
        if r == "tensor":
            (c1, l1), (c2, l2) = self.build(p.premises[0]), self.build(p.premises[1])
            i, j = p.args
            o = self.occ(p.conclusion[i])
            lid = self.link(Kind.TENSOR, (c1[i], c2[j]), (o,))
            return c1[:i] + [o] + c1[i + 1:] + c2[:j] + c2[j + 1:], l1 + l2 + [lid]
        if r == "cut":
            (c1, l1), (c2, l2) = self.build(p.premises[0]), self.build(p.premises[1])
            _, i, j = p.args
            lid = self.link(Kind.CUT, (c1[i], c2[j]), ())
            return c1[:i] + c1[i + 1:] + c2[:j] + c2[j + 1:], l1 + l2 + [lid]
        if r in ("with", "nwith"):
            (c1, l1), (c2, l2) = self.build(p.premises[0]), self.build(p.premises[1])
            i = p.args[0]
            o = self.occ(p.conclusion[i])
            lid = self.link(Kind.WITH if r == "with" else Kind.NWITH, (c1[i], c2[i]), (o,))
            # superpose the shared context: right-hand copies are merged into the left ones
            merge = {c2[k]: c1[k] for k in range(len(c1)) if k != i}
            for sub, sign in ((l1, True), (l2, False)):
                lit = Monomial.var(lid, sign)
                for x in sub:
                    old = self.links[x]
                    conc = tuple(merge.get(q, q) for q in old.conclusions) if sign is False else old.conclusions
                    self.links[x] = Link(x, old.kind, old.premises, conc, old.weight * lit)
            for q in merge:
                del self.occs[q]
            return c1[:i] + [o] + c1[i + 1:], l1 + l2 + [lid]
        raise AssertionError(r)


class DesequentializationError(ValueError):
    pass


def desequentialize_with_order(p: SequentProof) -> tuple[ProofStructure, list[int]]:
    """Like desequentialize, also returning the occurrence carrying each conclusion formula."""
    res = check_proof(p)
    if not res:
        raise DesequentializationError(res.diagnostics[0])
    b = _Builder()
    c, _ = b.build(p)
    return ProofStructure(dict(sorted(b.occs.items())), dict(sorted(b.links.items()))), c


def desequentialize(p: SequentProof) -> ProofStructure:
    return desequentialize_with_order(p)[0]


# --------------------------------------------------------------------- removal


class RemovalError(ValueError):
    pass


@dataclass(frozen=True)
class RemovalResult:
    parts: tuple[ProofStructure, ...]

    @property
    def is_base(self) -> bool:
        return not self.parts


def _components(s: ProofStructure, link_ids) -> list[set[int]]:
    """Connected components (as link-id sets) of the occurrence/link incidence graph."""
    parent: dict[int, int] = {}

    def find(x):
        while parent.setdefault(x, x) != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for lid in link_ids:
        occs = s.links[lid].occurrences()
        for o in occs[1:]:
            parent[find(occs[0])] = find(o)
    groups: dict[int, set[int]] = {}
    for lid in link_ids:
        groups.setdefault(find(s.links[lid].occurrences()[0]), set()).add(lid)
    return list(groups.values())


def is_terminal(s: ProofStructure, lid: int) -> bool:
    link = s.links[lid]
    return link.weight.is_one and all(not s.consumers[o] for o in link.conclusions)


def removal(s: ProofStructure, lid: int, check: bool = True) -> RemovalResult:
    if lid not in s.links:
        raise RemovalError(f"no link {lid}")
    link = s.links[lid]
    if not link.weight.is_one:
        raise RemovalError(f"link {lid} has weight {link.weight}, not 1")
    if not is_terminal(s, lid):
        raise RemovalError(f"link {lid} is not terminal")
    k = link.kind
    if k in (Kind.ID, Kind.GAX):
        if len(s.links) != 1 or len(s.occurrences) != len(link.conclusions):
            raise RemovalError(f"{k} link {lid} is only removable when it is the whole structure")
        return RemovalResult(())
    rest = [x for x in s.links if x != lid]
    if k in (Kind.PAR, Kind.PLUS1, Kind.PLUS2):
        parts = (s.restrict(rest),)
    elif k in (Kind.TENSOR, Kind.CUT):
        comps = _components(s, rest)
        a, b = link.premises
        if len(comps) != 2:
            raise RemovalError(f"removing {k} link {lid} leaves {len(comps)} components, not 2")
        side_a = [c for c in comps if a in {o for x in c for o in s.links[x].occurrences()}]
        side_b = [c for c in comps if b in {o for x in c for o in s.links[x].occurrences()}]
        if len(side_a) != 1 or len(side_b) != 1 or side_a[0] is side_b[0]:
            raise RemovalError(f"premises of {k} link {lid} are not in separate components")
        parts = (s.restrict(side_a[0]), s.restrict(side_b[0]))
    elif k in ADDITIVE:
        parts = (s.substitute({lid: 1}, drop=[lid]), s.substitute({lid: 0}, drop=[lid]))
        ga = set(parts[0].conclusions()) - {link.premises[0]}
        gb = set(parts[1].conclusions()) - {link.premises[1]}
        if ga != gb or link.premises[0] not in parts[0].occurrences or link.premises[1] not in parts[1].occurrences:
            raise RemovalError(f"{k} link {lid}: the two sides do not share their context")
    else:
        raise AssertionError(k)
    if check:
        for n, part in enumerate(parts):
            rep = validate(part)
            if not rep.ok:
                raise RemovalError(f"part {n} after removing link {lid} is invalid: {rep.violations[0]}")
    return RemovalResult(parts)


# --------------------------------------------------------------------- sequentialization

DEFAULT_BUDGET = 100_000


class SequentializationFailed(Exception):
    def __init__(self, trace: list[str]):
        super().__init__("structure is not sequentializable")
        self.trace = trace


class SearchBudgetExceeded(Exception):
    def __init__(self, visited: int):
        super().__init__(f"search budget exhausted after {visited} states")
        self.visited = visited


def _move_after(order: list[int], a: int, b: int) -> list[int]:
    """Permutation (as source indices) placing b immediately after a."""
    idx = list(range(len(order)))
    ib = order.index(b)
    idx.remove(ib)
    ia = idx.index(order.index(a))
    idx.insert(ia + 1, ib)
    return idx


def _reorder(p: SequentProof, order: list[int], target: list[int]) -> SequentProof:
    if order == target:
        return p
    return ex([order.index(o) for o in target], p)


class _Search:
    def __init__(self, budget: int):
        self.budget = budget
        self.visited = 0
        self.memo: dict[tuple, Optional[tuple[SequentProof, list[int]]]] = {}
        self.trace: list[str] = []

    def run(self, s: ProofStructure) -> Optional[tuple[SequentProof, list[int]]]:
        key = s.fingerprint
        if key in self.memo:
            return self.memo[key]
        self.visited += 1
        if self.visited > self.budget:
            raise SearchBudgetExceeded(self.visited - 1)
        result = self._solve(s)
        self.memo[key] = result
        return result

    def _solve(self, s: ProofStructure) -> Optional[tuple[SequentProof, list[int]]]:
        f = s.occurrences
        for lid in sorted(s.links):
            if not is_terminal(s, lid):
                continue
            link = s.links[lid]
            try:
                parts = removal(s, lid).parts
            except RemovalError as e:
                self.trace.append(f"{len(s.links)} links: remove {lid} {link.kind}: {e}")
                continue
            if link.kind is Kind.ID:
                return ax(f[link.conclusions[0]]), list(link.conclusions)
            if link.kind is Kind.GAX:
                return gax(*(f[o] for o in link.conclusions)), list(link.conclusions)
            subs = []
            for part in parts:
                r = self.run(part)
                if r is None:
                    break
                subs.append(r)
            if len(subs) != len(parts):
                self.trace.append(f"{len(s.links)} links: remove {lid} {link.kind}: a part is not sequentializable")
                continue
            return self._build(s, link, subs)
        return None

    def _build(self, s, link, subs):
        k = link.kind
        f = s.occurrences
        if k is Kind.PAR:
            (p, order), (a, b) = subs[0], link.premises
            target = [order[j] for j in _move_after(order, a, b)]
            p = _reorder(p, order, target)
            i = target.index(a)
            c = link.conclusions[0]
            return par(i, p), target[:i] + [c] + target[i + 2:]
        if k in (Kind.PLUS1, Kind.PLUS2):
            (p, order), a = subs[0], link.premises[0]
            i = order.index(a)
            c = link.conclusions[0]
            whole = f[c]
            node = plus1(i, whole.right, p) if k is Kind.PLUS1 else plus2(i, whole.left, p)
            return node, order[:i] + [c] + order[i + 1:]
        if k in (Kind.TENSOR, Kind.CUT):
            (p, op), (q, oq) = subs
            a, b = link.premises
            i, j = op.index(a), oq.index(b)
            rest_q = oq[:j] + oq[j + 1:]
            if k is Kind.TENSOR:
                c = link.conclusions[0]
                return tensor(i, j, p, q), op[:i] + [c] + op[i + 1:] + rest_q
            return cut(f[a], i, j, p, q), op[:i] + op[i + 1:] + rest_q
        # & or ^ : right part reordered to match the left one
        (p, op), (q, oq) = subs
        a, b = link.premises
        i = op.index(a)
        target = [b if o == a else o for o in op]
        q = _reorder(q, oq, target)
        c = link.conclusions[0]
        node = with_(i, p, q) if k is Kind.WITH else nwith(i, p, q)
        return node, op[:i] + [c] + op[i + 1:]


def sequentialize(s: ProofStructure, budget: int = DEFAULT_BUDGET) -> SequentProof:
    """Depth-first search over terminal-link removals.

    Raises SequentializationFailed (definitive, with the search trace) or
    SearchBudgetExceeded.  The resulting proof concludes the conclusions of
    ``s`` in occurrence-id order.
    """
    rep = validate(s)
    if not rep.ok:
        raise ValueError(f"invalid proof structure:\n{rep}")
    search = _Search(budget)
    r = search.run(s)
    if r is None:
        raise SequentializationFailed(search.trace)
    p, order = r
    return _reorder(p, order, s.conclusions())
