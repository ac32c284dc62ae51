"""Nondeterministic Turing machine steps as proof nets.

A move relation is compiled into a net of type bool^{pq}[T] -o bool^{K}[x]
with T = x ^ ... ^ x (m copies) and K = p(q+1)2.  Cutting a boolean value
against it and normalizing forks into m branches, one per padded transition.

Conventions:

* bool^k[Y] = (~Y + ... + ~Y) @ Y, the sum right-nested with k summands;
  the value i selects summand i.
* indices are row-major with the symbol fastest, then the state, then the
  direction (L=0, R=1); the appended halt state has index q.
"""

from __future__ import annotations

import functools
import math
import random
import re
from collections import Counter
from dataclasses import dataclass
from typing import Optional, Sequence, Union

from .formula import ATOM_RE, Formula, NWith, Par, Plus, Pos, big, dual
from .reduction import normalize_all, reducible_cuts
from .sequent import SequentProof, ax, desequentialize_with_order, ex, nwith, par, plus1, plus2, tensor, with_
from .structure import Kind, ProofStructure, cut_together

HALT = "halt"
DIRECTIONS = ("L", "R")
X = Pos("x")


class MachineError(ValueError):
    pass


class MachineParseError(MachineError):
    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


class ValueShapeError(ValueError):
    def __init__(self, message: str, link: Optional[int] = None):
        super().__init__(message if link is None else f"link {link}: {message}")
        self.link = link


@dataclass(frozen=True)
class Transition:
    symbol: str
    state: str
    write: str
    target: str
    direction: str  # "L" or "R"

    @property
    def source(self) -> tuple[str, str]:
        return self.symbol, self.state

    @property
    def result(self) -> tuple[str, str, str]:
        return self.write, self.target, self.direction

    def __str__(self) -> str:
        return f"trans {self.symbol} {self.state} -> {self.write} {self.target} {self.direction}"


@dataclass(frozen=True)
class Machine:
    symbols: tuple[str, ...]
    states: tuple[str, ...]
    moves: tuple[Transition, ...]  # declaration order matters for padding

    def __post_init__(self):
        object.__setattr__(self, "symbols", tuple(self.symbols))
        object.__setattr__(self, "states", tuple(self.states))
        object.__setattr__(self, "moves", tuple(self.moves))
        if not self.symbols or not self.states:
            raise MachineError("need at least one symbol and one state")
        for kind, names in (("symbol", self.symbols), ("state", self.states)):
            if len(set(names)) != len(names):
                raise MachineError(f"duplicate {kind} name")
        if HALT in self.states:
            raise MachineError(f"'{HALT}' is reserved and cannot be declared")
        seen = set()
        for t in self.moves:
            for sym in (t.symbol, t.write):
                if sym not in self.symbols:
                    raise MachineError(f"undeclared symbol {sym!r} in {t}")
            for st in (t.state, t.target):
                if st not in self.states:
                    raise MachineError(f"undeclared state {st!r} in {t}")
            if t.direction not in DIRECTIONS:
                raise MachineError(f"direction must be L or R in {t}")
            if t in seen:
                raise MachineError(f"duplicate transition {t}")
            seen.add(t)

    @property
    def p(self) -> int:
        return len(self.symbols)

    @property
    def q(self) -> int:
        return len(self.states)

    def moves_from(self, x: str, s: str) -> list[Transition]:
        return [t for t in self.moves if t.source == (x, s)]


@dataclass(frozen=True)
class PaddedMachine:
    base: Machine
    halt_state: str
    m: int
    # table[i] lists the m results for input index i = x + p*s
    table: tuple[tuple[tuple[str, str, str], ...], ...]

    def outgoing(self, x: str, s: str) -> tuple[tuple[str, str, str], ...]:
        return self.table[input_index(self.base, x, s)]


@dataclass(frozen=True)
class BoolIndex:
    space: tuple[int, ...]
    coords: tuple[int, ...]

    def __post_init__(self):
        if len(self.space) != len(self.coords):
            raise ValueError("coordinate count does not match the space")
        for c, d in zip(self.coords, self.space):
            if not 0 <= c < d:
                raise ValueError(f"coordinate {c} out of range 0..{d - 1}")

    @classmethod
    def from_linear(cls, space: Sequence[int], index: int) -> "BoolIndex":
        space = tuple(space)
        if not 0 <= index < math.prod(space):
            raise ValueError(f"index {index} out of range for space {space}")
        coords = []
        for d in space:
            index, c = divmod(index, d)
            coords.append(c)
        return cls(space, tuple(coords))

    @property
    def linear(self) -> int:
        out = 0
        for c, d in zip(reversed(self.coords), reversed(self.space)):
            out = out * d + c
        return out


# --------------------------------------------------------------------- machines


def branching_factor(m: Machine) -> int:
    if not m.moves:
        raise MachineError("machine has no transitions")
    return max(Counter(t.source for t in m.moves).values())


def pad_with_halt(m: Machine) -> PaddedMachine:
    k = branching_factor(m)
    table = []
    for s in m.states:
        for x in m.symbols:
            outs = [t.result for t in m.moves_from(x, s)]
            outs += [(x, HALT, "R")] * (k - len(outs))
            table.append(tuple(outs))
    return PaddedMachine(m, HALT, k, tuple(table))


def input_index(m: Machine, x: str, s: str) -> int:
    if x not in m.symbols or s not in m.states:
        raise MachineError(f"({x}, {s}) is not a declared symbol/state pair")
    return m.symbols.index(x) + m.p * m.states.index(s)


def input_space(m: Machine) -> tuple[int, int]:
    return (m.p, m.q)


def output_space(m: Machine) -> tuple[int, int, int]:
    return (m.p, m.q + 1, 2)


def output_index(m: Machine, y: str, t: str, d: str) -> int:
    st = m.q if t == HALT else m.states.index(t)
    return BoolIndex(output_space(m), (m.symbols.index(y), st, DIRECTIONS.index(d))).linear


def decode_output(m: Machine, idx: BoolIndex) -> tuple[str, str, str]:
    y, st, d = idx.coords
    return m.symbols[y], HALT if st == m.q else m.states[st], DIRECTIONS[d]


def oracle_step(m: Machine, x: str, s: str) -> Counter:
    return Counter(pad_with_halt(m).outgoing(x, s))


# --------------------------------------------------------------------- machine files

_TRANS_RE = re.compile(r"trans\s+(\S+)\s+(\S+)\s*->\s*(\S+)\s+(\S+)\s+(\S+)")


def parse_machine(text: str) -> Machine:
    symbols = states = None
    moves = []
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head = line.split()[0]
        if head in ("symbols", "states"):
            names = line.split()[1:]
            if not names:
                raise MachineParseError(n, f"'{head}' needs at least one name")
            for name in names:
                if not ATOM_RE.fullmatch(name) and not name.isdigit():
                    raise MachineParseError(n, f"bad name {name!r}")
            if (symbols if head == "symbols" else states) is not None:
                raise MachineParseError(n, f"'{head}' declared twice")
            if head == "symbols":
                symbols = tuple(names)
            else:
                states = tuple(names)
        elif head == "trans":
            mt = _TRANS_RE.fullmatch(line)
            if not mt:
                raise MachineParseError(n, "expected 'trans <sym> <state> -> <sym> <state> <L|R>'")
            moves.append((n, Transition(*mt.groups())))
        else:
            raise MachineParseError(n, f"unknown directive {head!r}")
    if symbols is None or states is None:
        raise MachineParseError(0, "missing 'symbols' or 'states' line")
    # validate transitions one at a time so errors carry a line number
    for k, (n, t) in enumerate(moves):
        try:
            Machine(symbols, states, [mv for _, mv in moves[:k + 1]])
        except MachineError as e:
            raise MachineParseError(n, str(e)) from None
    try:
        return Machine(symbols, states, [t for _, t in moves])
    except MachineError as e:
        raise MachineParseError(0, str(e)) from None


def serialize_machine(m: Machine) -> str:
    lines = ["symbols " + " ".join(m.symbols), "states " + " ".join(m.states)]
    lines += [str(t) for t in m.moves]
    return "\n".join(lines) + "\n"


def random_machine(rng: random.Random, p: int, q: int, max_branch: int, density: float = 0.7) -> Machine:
    """A random machine with at most ``max_branch`` moves per pair and at least one move."""
    symbols = [str(i) for i in range(p)]
    states = [f"s{i}" for i in range(q)]
    results = [(y, t, d) for y in symbols for t in states for d in DIRECTIONS]
    moves = []
    for s in states:
        for x in symbols:
            if rng.random() < density:
                k = rng.randint(1, min(max_branch, len(results)))
                for y, t, d in rng.sample(results, k):
                    moves.append(Transition(x, s, y, t, d))
    if not moves:
        moves.append(Transition(symbols[0], states[0], *rng.choice(results)))
    rng.shuffle(moves)
    return Machine(symbols, states, moves)


# --------------------------------------------------------------------- booleans


def _space(space: Union[int, Sequence[int]]) -> tuple[int, ...]:
    return (space,) if isinstance(space, int) else tuple(space)


def bool_type(k: int, y: Formula) -> Formula:
    if k < 1:
        raise ValueError("bool^k needs k >= 1")
    return Par(big(Plus, [dual(y)] * k), y)


def _select(p: SequentProof, pos: int, i: int, k: int, z: Formula) -> SequentProof:
    # turn the z at ``pos`` into the right-nested k-ary sum, selecting summand i
    if k == 1:
        return p
    if i == 0:
        return plus1(pos, big(Plus, [z] * (k - 1)), p)
    return plus2(pos, z, _select(p, pos, i - 1, k - 1, z))


def bool_value_proof(k: int, i: int, y: Formula) -> SequentProof:
    if not 0 <= i < k:
        raise ValueError(f"index {i} out of range 0..{k - 1}")
    return par(0, _select(ax(dual(y)), 0, i, k, dual(y)))


def encode_bool_value(space: Union[int, Sequence[int]], idx: Union[int, BoolIndex], instance: Formula = X) -> ProofStructure:
    sp = _space(space)
    i = idx.linear if isinstance(idx, BoolIndex) else idx
    if isinstance(idx, BoolIndex) and idx.space != sp:
        raise ValueError("index belongs to a different space")
    return desequentialize_with_order(bool_value_proof(math.prod(sp), i, instance))[0]


def decode_bool_value(s: ProofStructure, space: Union[int, Sequence[int]]) -> BoolIndex:
    sp = _space(space)
    k = math.prod(sp)
    for lid, link in s.links.items():
        if link.kind is Kind.CUT:
            why = "ready" if reducible_cuts(s) else "residual"
            raise ValueShapeError(f"{why} cut in a value", lid)
        if not link.weight.is_one:
            raise ValueShapeError(f"weight {link.weight} in a value", lid)
    concl = s.conclusions()
    if len(concl) != 1:
        raise ValueShapeError(f"a value has one conclusion, found {len(concl)}")
    top = s.occurrences[concl[0]]
    if not isinstance(top, Par) or top != bool_type(k, top.right):
        raise ValueShapeError(f"conclusion is not bool^{k}")

    def only(o: int, kinds) -> int:
        prods = s.producers[o]
        if len(prods) != 1:
            raise ValueShapeError(f"occurrence {o} has {len(prods)} producers")
        if s.links[prods[0]].kind not in kinds:
            raise ValueShapeError(f"unexpected {s.links[prods[0]].kind} link", prods[0])
        return prods[0]

    used = [only(concl[0], (Kind.PAR,))]
    left, right = s.links[used[0]].premises
    i, remaining, o = 0, k, left
    while remaining > 1:
        lid = only(o, (Kind.PLUS1, Kind.PLUS2))
        used.append(lid)
        o = s.links[lid].premises[0]
        if s.links[lid].kind is Kind.PLUS1:
            break
        i, remaining = i + 1, remaining - 1
    lid = only(o, (Kind.ID,))
    used.append(lid)
    if set(s.links[lid].conclusions) != {o, right}:
        raise ValueShapeError("the axiom does not close the value", lid)
    extra = sorted(set(s.links) - set(used))
    if extra:
        raise ValueShapeError("link outside the value shape", extra[0])
    return BoolIndex.from_linear(sp, i)


# --------------------------------------------------------------------- move relation


def move_relation_proof(pm: PaddedMachine) -> SequentProof:
    """Sequent proof of |- (&T) * ~T, bool^K[x] programming the padded move relation."""
    mach, m = pm.base, pm.m
    k_out = math.prod(output_space(mach))
    branches = []
    for outs in pm.table:
        leaves = [_select(ax(dual(X)), 0, output_index(mach, *o), k_out, dual(X)) for o in outs]
        branches.append(_fold(nwith, leaves))
    stack = _fold(with_, branches)  # |- +~x, &T
    block = _fold(nwith, [ax(dual(X))] * m, index=0)  # |- ~T, x
    joined = tensor(1, 0, stack, block)  # |- +~x, &T * ~T, x
    return par(1, ex((1, 0, 2), joined))


def _fold(rule, proofs: list[SequentProof], index: int = 1) -> SequentProof:
    out = proofs[-1]
    for p in reversed(proofs[:-1]):
        out = rule(index, p, out)
    return out


@functools.lru_cache(maxsize=64)
def _move_net(pm: PaddedMachine) -> tuple[ProofStructure, list[int]]:
    return desequentialize_with_order(move_relation_proof(pm))


def encode_move_relation(pm: PaddedMachine) -> ProofStructure:
    return _move_net(pm)[0]


def step_net(m: Machine, x: str, s: str) -> ProofStructure:
    """The input value at (x, s), instantiated at T, cut against the move relation."""
    pm = pad_with_halt(m)
    net, order = _move_net(pm)
    t = big(NWith, [X] * pm.m)
    value, vorder = desequentialize_with_order(bool_value_proof(m.p * m.q, input_index(m, x, s), t))
    return cut_together(net, order[0], value, vorder[0])


def run_step(m: Machine, x: str, s: str, check: bool = False) -> Counter:
    """Execute one step by branching normalization and decode every leaf.

    The net pre-check is off by default: the switching count of the
    composed net grows too fast for brute-force enumeration.
    """
    pm = pad_with_halt(m)
    tree = normalize_all(step_net(m, x, s), check=check)
    out = Counter()
    space = output_space(m)
    for leaf in tree.leaves():
        try:
            idx = decode_bool_value(leaf.structure, space)
        except ValueShapeError as e:
            raise AssertionError(f"branch {leaf.path} did not normalize to a value: {e}") from None
        out[decode_output(m, idx)] += 1
    if sum(out.values()) != pm.m:
        raise AssertionError(f"expected {pm.m} branches, got {sum(out.values())}")
    return out


def conclusion_type(m: Machine) -> tuple[Formula, Formula]:
    pm = pad_with_halt(m)
    t = big(NWith, [X] * pm.m)
    return dual(bool_type(m.p * m.q, t)), bool_type(math.prod(output_space(m)), X)
