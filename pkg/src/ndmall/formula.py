"""NDMALL formulas in negation normal form.

Negation is not a connective: ``dual`` computes linear negation, pushing it
down to the atoms.  ``^`` is the self-dual nondeterministic with.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import ClassVar, Sequence

ATOM_RE = re.compile(r"[a-z][a-z0-9_]*")


class FormulaSyntaxError(ValueError):
    def __init__(self, message: str, pos: int):
        super().__init__(f"{message} at position {pos}")
        self.pos = pos


class Formula:
    """Base class; concrete formulas are frozen dataclasses below."""

    __slots__ = ()

    def __str__(self) -> str:
        return print_formula(self)


@dataclass(frozen=True)
class Pos(Formula):
    name: str

    def __post_init__(self):
        if not ATOM_RE.fullmatch(self.name):
            raise ValueError(f"bad atom name {self.name!r}")


@dataclass(frozen=True)
class Neg(Formula):
    name: str

    def __post_init__(self):
        if not ATOM_RE.fullmatch(self.name):
            raise ValueError(f"bad atom name {self.name!r}")


@dataclass(frozen=True)
class Binary(Formula):
    left: Formula
    right: Formula

    symbol: ClassVar[str] = "?"


@dataclass(frozen=True)
class Tensor(Binary):
    symbol: ClassVar[str] = "*"


@dataclass(frozen=True)
class Par(Binary):
    symbol: ClassVar[str] = "@"


@dataclass(frozen=True)
class With(Binary):
    symbol: ClassVar[str] = "&"


@dataclass(frozen=True)
class Plus(Binary):
    symbol: ClassVar[str] = "+"


@dataclass(frozen=True)
class NWith(Binary):
    symbol: ClassVar[str] = "^"


CONNECTIVES: dict[str, type[Binary]] = {
    cls.symbol: cls for cls in (Tensor, Par, With, Plus, NWith)
}
_DUAL_CONNECTIVE: dict[type[Binary], type[Binary]] = {
    Tensor: Par,
    Par: Tensor,
    With: Plus,
    Plus: With,
    NWith: NWith,
}

# Sequents are plain tuples of formulas; order matters for rule indices.
Sequent = tuple


def dual(f: Formula) -> Formula:
    if isinstance(f, Pos):
        return Neg(f.name)
    if isinstance(f, Neg):
        return Pos(f.name)
    if isinstance(f, Binary):
        return _DUAL_CONNECTIVE[type(f)](dual(f.left), dual(f.right))
    raise TypeError(f"not a formula: {f!r}")


def print_formula(f: Formula) -> str:
    if isinstance(f, Pos):
        return f.name
    if isinstance(f, Neg):
        return "~" + f.name
    if isinstance(f, Binary):
        return f"({print_formula(f.left)} {f.symbol} {print_formula(f.right)})"
    raise TypeError(f"not a formula: {f!r}")


def print_sequent(seq: Sequence[Formula]) -> str:
    return "|- " + ", ".join(print_formula(f) for f in seq)


def _skip_ws(text: str, pos: int) -> int:
    while pos < len(text) and text[pos].isspace():
        pos += 1
    return pos


def parse_formula_prefix(text: str, pos: int = 0) -> tuple[Formula, int]:
    """Parse one formula starting at ``pos``; return it and the end offset.

    Used directly by the proof-file reader, where formulas are embedded in
    larger terms.
    """
    pos = _skip_ws(text, pos)
    if pos >= len(text):
        raise FormulaSyntaxError("unexpected end of input", pos)
    ch = text[pos]
    if ch == "~":
        start = pos
        pos = _skip_ws(text, pos + 1)
        m = ATOM_RE.match(text, pos)
        if not m:
            raise FormulaSyntaxError("negation only on atoms", start)
        return Neg(m.group()), m.end()
    if ch == "(":
        left, pos = parse_formula_prefix(text, pos + 1)
        pos = _skip_ws(text, pos)
        if pos >= len(text) or text[pos] not in CONNECTIVES:
            raise FormulaSyntaxError("expected connective", pos)
        cls = CONNECTIVES[text[pos]]
        right, pos = parse_formula_prefix(text, pos + 1)
        pos = _skip_ws(text, pos)
        if pos >= len(text) or text[pos] != ")":
            raise FormulaSyntaxError("expected ')'", pos)
        return cls(left, right), pos + 1
    m = ATOM_RE.match(text, pos)
    if not m:
        raise FormulaSyntaxError(f"unexpected character {ch!r}", pos)
    return Pos(m.group()), m.end()


def parse_formula(text: str) -> Formula:
    f, pos = parse_formula_prefix(text)
    pos = _skip_ws(text, pos)
    if pos != len(text):
        raise FormulaSyntaxError("trailing input", pos)
    return f


def big(cls: type[Binary], parts: Sequence[Formula]) -> Formula:
    """Right-nested n-ary connective: big(Plus, [a, b, c]) = (a + (b + c))."""
    if not parts:
        raise ValueError("need at least one operand")
    out = parts[-1]
    for f in reversed(parts[:-1]):
        out = cls(f, out)
    return out


def size(f: Formula) -> int:
    if isinstance(f, Binary):
        return 1 + size(f.left) + size(f.right)
    return 1
