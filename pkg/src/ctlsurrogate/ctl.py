"""CTL formula AST, parser, canonical printer and seeded generator.

Generated formulas routinely nest hundreds of levels deep, so every
traversal here is iterative; nothing recurses on the tree.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Callable, ClassVar, Iterator, Sequence, TypeVar

from .rng import Xoshiro256

T = TypeVar("T")

IDENT_RE = re.compile(r"[a-z_][a-z0-9_]*\Z")


class FormulaSyntaxError(ValueError):
    def __init__(self, message: str, pos: int):
        super().__init__(f"{message} at position {pos}")
        self.pos = pos


@dataclass(frozen=True, eq=False, repr=False)
class Formula:
    """Base AST node. Equality and hashing go through the pre-order sequence."""

    arity: ClassVar[int] = 0
    keyword: ClassVar[str] = ""

    def children(self) -> tuple[Formula, ...]:
        return ()

    def _key(self) -> tuple:
        return (type(self).__name__,)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Formula):
            return NotImplemented
        return list(preorder_keys(self)) == list(preorder_keys(other))

    def __hash__(self) -> int:
        return hash(tuple(preorder_keys(self)))

    def __repr__(self) -> str:
        return f"<{type(self).__name__} {format_formula(self)}>"


@dataclass(frozen=True, eq=False, repr=False)
class TrueConst(Formula):
    keyword = "true"


@dataclass(frozen=True, eq=False, repr=False)
class FalseConst(Formula):
    keyword = "false"


@dataclass(frozen=True, eq=False, repr=False)
class Atom(Formula):
    name: str

    def __post_init__(self):
        if not IDENT_RE.match(self.name) or self.name in ("true", "false"):
            raise ValueError(f"invalid atom name {self.name!r}")

    def _key(self) -> tuple:
        return ("Atom", self.name)


@dataclass(frozen=True, eq=False, repr=False)
class Unary(Formula):
    arg: Formula
    arity = 1

    def children(self) -> tuple[Formula, ...]:
        return (self.arg,)


@dataclass(frozen=True, eq=False, repr=False)
class Binary(Formula):
    left: Formula
    right: Formula
    arity = 2

    def children(self) -> tuple[Formula, ...]:
        return (self.left, self.right)


class Not(Unary):
    keyword = "!"


class EX(Unary):
    keyword = "EX"


class EF(Unary):
    keyword = "EF"


class EG(Unary):
    keyword = "EG"


class AX(Unary):
    keyword = "AX"


class AF(Unary):
    keyword = "AF"


class AG(Unary):
    keyword = "AG"


class And(Binary):
    keyword = "&"


class Or(Binary):
    keyword = "|"


class Implies(Binary):
    keyword = "->"


class EU(Binary):
    keyword = "E"


class AU(Binary):
    keyword = "A"


TRUE = TrueConst()
FALSE = FalseConst()

UNARY_TYPES: tuple[type[Unary], ...] = (Not, EX, EF, EG, AX, AF, AG)
BINARY_TYPES: tuple[type[Binary], ...] = (And, Or, Implies, EU, AU)
_TEMPORAL_UNARY = {cls.keyword: cls for cls in UNARY_TYPES if cls is not Not}


def preorder(phi: Formula) -> Iterator[Formula]:
    stack = [phi]
    while stack:
        node = stack.pop()
        yield node
        stack.extend(reversed(node.children()))


def preorder_keys(phi: Formula) -> Iterator[tuple]:
    for node in preorder(phi):
        yield node._key()


def fold(phi: Formula, fn: Callable[[Formula, list], T]) -> T:
    """Bottom-up evaluation: ``fn(node, child_results)`` for every node."""
    results: list = []
    stack: list[tuple[Formula, bool]] = [(phi, False)]
    while stack:
        node, expanded = stack.pop()
        kids = node.children()
        if expanded or not kids:
            n = len(kids)
            if n:
                args = results[-n:]
                del results[-n:]
            else:
                args = []
            results.append(fn(node, args))
        else:
            stack.append((node, True))
            for child in reversed(kids):
                stack.append((child, False))
    return results[0]


def from_preorder(nodes: Sequence[tuple[type[Formula], str | None]]) -> Formula:
    """Rebuild a tree from ``(constructor, atom_name)`` pairs in pre-order."""
    stack: list[Formula] = []
    for cls, name in reversed(nodes):
        if cls is Atom:
            stack.append(Atom(name))
        elif cls is TrueConst:
            stack.append(TRUE)
        elif cls is FalseConst:
            stack.append(FALSE)
        elif cls.arity == 1:
            if not stack:
                raise ValueError("malformed pre-order sequence")
            stack.append(cls(stack.pop()))
        else:
            if len(stack) < 2:
                raise ValueError("malformed pre-order sequence")
            left = stack.pop()
            right = stack.pop()
            stack.append(cls(left, right))
    if len(stack) != 1:
        raise ValueError("malformed pre-order sequence")
    return stack[0]


def formula_length(phi: Formula) -> int:
    """Number of AST nodes."""
    return sum(1 for _ in preorder(phi))


def formula_depth(phi: Formula) -> int:
    return fold(phi, lambda node, kids: 1 + max(kids, default=0))


def atoms(phi: Formula) -> set[str]:
    return {n.name for n in preorder(phi) if isinstance(n, Atom)}


def _format_node(node: Formula, kids: list[str]) -> str:
    if isinstance(node, Atom):
        return node.name
    if not kids:
        return node.keyword
    if isinstance(node, (EU, AU)):
        return f"({node.keyword} [ ({kids[0]}) U ({kids[1]}) ])"
    if node.arity == 1:
        return f"({node.keyword} ({kids[0]}))"
    return f"(({kids[0]}) {node.keyword} ({kids[1]}))"


def format_formula(phi: Formula) -> str:
    """Fully parenthesised canonical text; ``parse_formula`` inverts it."""
    return fold(phi, _format_node)


# --- parsing ---------------------------------------------------------------

_TOKEN_RE = re.compile(r"\s*(?:(->)|([&|!()\[\]])|([A-Za-z_][A-Za-z0-9_]*))")

_PREC = {"->": 1, "|": 2, "&": 3}
_BINOP = {"->": Implies, "|": Or, "&": And}


def _tokenize(text: str) -> list[tuple[str, int]]:
    tokens = []
    pos = 0
    n = len(text)
    while True:
        while pos < n and text[pos].isspace():
            pos += 1
        if pos >= n:
            break
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise FormulaSyntaxError(f"unexpected character {text[pos]!r}", pos)
        tok = m.group(1) or m.group(2) or m.group(3)
        tokens.append((tok, m.start(m.lastindex)))
        pos = m.end()
    return tokens


def parse_formula(text: str) -> Formula:
    """Parse CTL text into an AST.

    Precedence from tightest: prefix operators, ``&``, ``|``, then ``->``
    (right-associative). Until is written ``E [ a U b ]`` / ``A [ a U b ]``.
    """
    tokens = _tokenize(text)
    operands: list[Formula] = []
    # entries: ("un", cls, pos) | ("bin", op, pos) | ("(", None, pos)
    # | ("E[", cls, pos) awaiting U | ("EU", cls, pos) awaiting ]
    ops: list[tuple[str, object, int]] = []

    def apply(entry):
        kind, payload, pos = entry
        if kind == "un":
            operands.append(payload(operands.pop()))
        elif kind == "bin":
            right = operands.pop()
            left = operands.pop()
            operands.append(_BINOP[payload](left, right))
        else:
            raise FormulaSyntaxError("unbalanced bracket", pos)

    def reduce_until_group():
        while ops and ops[-1][0] in ("un", "bin"):
            apply(ops.pop())

    expect_operand = True
    i = 0
    while i < len(tokens):
        tok, pos = tokens[i]
        if expect_operand:
            if tok == "true":
                operands.append(TRUE)
                expect_operand = False
            elif tok == "false":
                operands.append(FALSE)
                expect_operand = False
            elif tok == "!":
                ops.append(("un", Not, pos))
            elif tok in _TEMPORAL_UNARY:
                ops.append(("un", _TEMPORAL_UNARY[tok], pos))
            elif tok == "(":
                ops.append(("(", None, pos))
            elif tok in ("E", "A"):
                if i + 1 >= len(tokens) or tokens[i + 1][0] != "[":
                    raise FormulaSyntaxError(f"expected '[' after {tok}", pos)
                ops.append(("E[", EU if tok == "E" else AU, pos))
                i += 1
            elif IDENT_RE.match(tok):
                operands.append(Atom(tok))
                expect_operand = False
            else:
                raise FormulaSyntaxError(f"unexpected token {tok!r}", pos)
        else:
            if tok in _PREC:
                prec = _PREC[tok]
                while ops:
                    kind, payload, _ = ops[-1]
                    if kind == "un":
                        apply(ops.pop())
                    elif kind == "bin" and (
                        _PREC[payload] > prec or (_PREC[payload] == prec and tok != "->")
                    ):
                        apply(ops.pop())
                    else:
                        break
                ops.append(("bin", tok, pos))
                expect_operand = True
            elif tok == ")":
                reduce_until_group()
                if not ops or ops[-1][0] != "(":
                    raise FormulaSyntaxError("unmatched ')'", pos)
                ops.pop()
            elif tok == "U":
                reduce_until_group()
                if not ops or ops[-1][0] != "E[":
                    raise FormulaSyntaxError("'U' outside E[..]/A[..]", pos)
                _, cls, p = ops.pop()
                ops.append(("EU", cls, p))
                expect_operand = True
            elif tok == "]":
                reduce_until_group()
                if not ops or ops[-1][0] != "EU":
                    raise FormulaSyntaxError("unmatched ']'", pos)
                _, cls, _ = ops.pop()
                right = operands.pop()
                left = operands.pop()
                operands.append(cls(left, right))
            else:
                raise FormulaSyntaxError(f"expected operator, got {tok!r}", pos)
        i += 1

    if expect_operand:
        raise FormulaSyntaxError("unexpected end of input", len(text))
    while ops:
        kind, _, pos = ops[-1]
        if kind not in ("un", "bin"):
            raise FormulaSyntaxError("unclosed bracket", pos)
        apply(ops.pop())
    assert len(operands) == 1
    return operands[0]


# --- generation ------------------------------------------------------------

def generate_formula(target_length: int, vocabulary: Sequence[str], rng_seed: int) -> Formula:
    """Random formula with exactly ``target_length`` nodes.

    Budget 1 draws a leaf (true, false, atom with equal odds; atom uniform over
    the vocabulary). Larger budgets draw uniformly among the unary
    constructors, plus the binary ones once the budget reaches 3; a binary
    node splits the remaining budget uniformly with each side at least 1.
    Children are generated left before right.
    """
    if target_length < 1:
        raise ValueError("target_length must be >= 1")
    if not vocabulary:
        raise ValueError("vocabulary must be non-empty")
    rng = Xoshiro256(rng_seed)
    nodes: list[tuple[type[Formula], str | None]] = []
    budgets = [target_length]
    while budgets:
        budget = budgets.pop()
        if budget == 1:
            choice = rng.below(3)
            if choice == 0:
                nodes.append((TrueConst, None))
            elif choice == 1:
                nodes.append((FalseConst, None))
            else:
                nodes.append((Atom, vocabulary[rng.below(len(vocabulary))]))
            continue
        n_choices = len(UNARY_TYPES) + (len(BINARY_TYPES) if budget >= 3 else 0)
        choice = rng.below(n_choices)
        if choice < len(UNARY_TYPES):
            nodes.append((UNARY_TYPES[choice], None))
            budgets.append(budget - 1)
        else:
            nodes.append((BINARY_TYPES[choice - len(UNARY_TYPES)], None))
            left = 1 + rng.below(budget - 2)
            budgets.append(budget - 1 - left)
            budgets.append(left)
    return from_preorder(nodes)
