"""Finite Kripke structures: generation, text format, and SMV export."""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Mapping

from . import ctl
from .rng import Xoshiro256


class KripkeError(ValueError):
    """Semantic problem with a structure (range, totality, empty init)."""


class KripkeSyntaxError(KripkeError):
    def __init__(self, message: str, pos: int):
        super().__init__(f"{message} at position {pos}")
        self.pos = pos


@dataclass(frozen=True)
class KripkeStructure:
    """Total transition system over states ``0..n_states-1``.

    ``labeling[s]`` is the set of propositions true in state ``s``.
    """

    n_states: int
    initial: frozenset[int]
    transitions: frozenset[tuple[int, int]]
    props: tuple[str, ...]
    labeling: tuple[frozenset[str], ...]

    def __post_init__(self):
        n = self.n_states
        if n < 1:
            raise KripkeError("n_states must be positive")
        if not self.initial:
            raise KripkeError("initial set is empty")
        if any(not 0 <= s < n for s in self.initial):
            raise KripkeError("initial state out of range")
        if not self.props:
            raise KripkeError("proposition vocabulary is empty")
        if len(set(self.props)) != len(self.props):
            raise KripkeError("duplicate proposition names")
        for p in self.props:
            if not ctl.IDENT_RE.match(p) or p in ("true", "false"):
                raise KripkeError(f"invalid proposition name {p!r}")
        for s, t in self.transitions:
            if not (0 <= s < n and 0 <= t < n):
                raise KripkeError(f"transition {s}->{t} out of range")
        if len(self.labeling) != n:
            raise KripkeError("labeling must cover every state")
        vocab = set(self.props)
        for s, lab in enumerate(self.labeling):
            if not lab <= vocab:
                raise KripkeError(f"state {s} labeled with unknown props {sorted(lab - vocab)}")
        missing = set(range(n)) - {s for s, _ in self.transitions}
        if missing:
            raise KripkeError(f"transition relation not total: states {sorted(missing)} have no successor")

    @classmethod
    def build(
        cls,
        n_states: int,
        initial: Iterable[int],
        transitions: Iterable[tuple[int, int]],
        props: Iterable[str],
        labeling: Mapping[int, Iterable[str]],
    ) -> KripkeStructure:
        return cls(
            n_states,
            frozenset(initial),
            frozenset((int(s), int(t)) for s, t in transitions),
            tuple(props),
            tuple(frozenset(labeling.get(s, ())) for s in range(n_states)),
        )

    @cached_property
    def successors(self) -> tuple[tuple[int, ...], ...]:
        succ: list[list[int]] = [[] for _ in range(self.n_states)]
        for s, t in sorted(self.transitions):
            succ[s].append(t)
        return tuple(tuple(x) for x in succ)

    @cached_property
    def succ_masks(self) -> tuple[int, ...]:
        return tuple(sum(1 << t for t in ts) for ts in self.successors)

    @cached_property
    def pred_masks(self) -> tuple[int, ...]:
        pred = [0] * self.n_states
        for s, t in self.transitions:
            pred[t] |= 1 << s
        return tuple(pred)

    @cached_property
    def prop_masks(self) -> dict[str, int]:
        masks = {p: 0 for p in self.props}
        for s, lab in enumerate(self.labeling):
            for p in lab:
                masks[p] |= 1 << s
        return masks

    @property
    def initial_mask(self) -> int:
        return sum(1 << s for s in self.initial)


@dataclass(frozen=True)
class GenConfig:
    n_states: int
    n_props: int
    edge_prob: float
    label_prob: float
    rng_seed: int = 0

    def __post_init__(self):
        if self.n_states < 1:
            raise ValueError("n_states must be >= 1")
        if self.n_props < 1:
            raise ValueError("n_props must be >= 1")
        if not 0.0 < self.edge_prob <= 1.0:
            raise ValueError("edge_prob must lie in (0, 1]")
        if not 0.0 <= self.label_prob <= 1.0:
            raise ValueError("label_prob must lie in [0, 1]")
        if not 0 <= self.rng_seed < 2**64:
            raise ValueError("rng_seed must be a 64-bit unsigned integer")


def generate_kripke(config: GenConfig) -> KripkeStructure:
    """Random structure from ``config``.

    Draw order: edges for (s, t) row-major, then labels for (s, prop)
    row-major, one uniform double each. States left without successors
    get a self-loop. The initial set is always ``{0}``.
    """
    rng = Xoshiro256(config.rng_seed)
    n = config.n_states
    props = tuple(f"p{i}" for i in range(config.n_props))
    trans = set()
    for s in range(n):
        for t in range(n):
            if rng.random() < config.edge_prob:
                trans.add((s, t))
    labeling = []
    for s in range(n):
        labeling.append(frozenset(p for p in props if rng.random() < config.label_prob))
    for s in range(n):
        if not any((s, t) in trans for t in range(n)):
            trans.add((s, s))
    return KripkeStructure(n, frozenset({0}), frozenset(trans), props, tuple(labeling))


# --- text format -------------------------------------------------------------

_KTOKEN_RE = re.compile(r"(->)|([;:,])|(\d+)|([A-Za-z_][A-Za-z0-9_]*)")


def _ktokenize(text: str) -> list[tuple[str, str, int]]:
    out = []
    pos = 0
    n = len(text)
    while True:
        while pos < n and text[pos].isspace():
            pos += 1
        if pos >= n:
            return out
        m = _KTOKEN_RE.match(text, pos)
        if m is None:
            raise KripkeSyntaxError(f"unexpected character {text[pos]!r}", pos)
        kind = ("arrow", "punct", "int", "word")[m.lastindex - 1]
        out.append((kind, m.group(0), pos))
        pos = m.end()


class _KParser:
    def __init__(self, text: str):
        self.tokens = _ktokenize(text)
        self.i = 0
        self.end = len(text)

    def peek(self):
        return self.tokens[self.i] if self.i < len(self.tokens) else ("eof", "", self.end)

    def take(self, kind: str, value: str | None = None):
        tok = self.peek()
        if tok[0] != kind or (value is not None and tok[1] != value):
            want = repr(value) if value is not None else kind
            got = repr(tok[1]) if tok[0] != "eof" else "end of input"
            raise KripkeSyntaxError(f"expected {want}, got {got}", tok[2])
        self.i += 1
        return tok

    def parse(self) -> KripkeStructure:
        self.take("word", "states")
        n = int(self.take("int")[1])
        self.take("punct", ";")

        self.take("word", "init")
        initial = [int(self.take("int")[1])]
        while self.peek()[1] == ",":
            self.i += 1
            initial.append(int(self.take("int")[1]))
        self.take("punct", ";")

        self.take("word", "props")
        props = [self.take("word")[1]]
        while self.peek()[0] == "word":
            props.append(self.take("word")[1])
        self.take("punct", ";")

        self.take("word", "trans")
        trans = []
        while True:
            s = int(self.take("int")[1])
            self.take("arrow")
            t = int(self.take("int")[1])
            trans.append((s, t))
            if self.peek()[0] != "int":
                break
        self.take("punct", ";")

        labels: dict[int, list[str]] = {}
        while self.peek()[0] != "eof":
            kw = self.take("word", "label")
            s = int(self.take("int")[1])
            self.take("punct", ":")
            names = []
            while self.peek()[0] == "word":
                names.append(self.take("word")[1])
            self.take("punct", ";")
            if s in labels:
                raise KripkeError(f"duplicate label clause for state {s} (position {kw[2]})")
            labels[s] = names
        if n < 1:
            raise KripkeError("states must be positive")
        missing = [s for s in range(n) if s not in labels]
        if missing:
            raise KripkeError(f"missing label clause for states {missing}")
        extra = [s for s in labels if not 0 <= s < n]
        if extra:
            raise KripkeError(f"label clause for out-of-range states {extra}")
        return KripkeStructure.build(n, initial, trans, props, labels)


def parse_kripke(text: str) -> KripkeStructure:
    """Parse the ``states ...; init ...; props ...; trans ...; label ...;`` format."""
    return _KParser(text).parse()


def serialize_kripke(k: KripkeStructure) -> str:
    parts = [
        f"states {k.n_states};",
        "init " + ",".join(str(s) for s in sorted(k.initial)) + ";",
        "props " + " ".join(k.props) + ";",
        "trans " + " ".join(f"{s}->{t}" for s, t in sorted(k.transitions)) + ";",
    ]
    for s in range(k.n_states):
        names = [p for p in k.props if p in k.labeling[s]]
        parts.append(f"label {s}:" + "".join(" " + p for p in names) + ";")
    return " ".join(parts)


# --- SMV export ----------------------------------------------------------------

# identifiers that would collide with NuSMV keywords or the state variable
_SMV_RESERVED = {
    "state", "next", "init", "case", "esac", "mod", "union", "in", "xor", "xnor",
    "self", "word", "array", "of", "boolean", "integer", "real", "process",
    "signed", "unsigned", "extend", "resize", "sizeof", "uwconst", "swconst",
    "bool", "toint", "count", "abs", "max", "min", "floor", "typeof",
}


def smv_name(prop: str) -> str:
    return prop + "_p" if prop in _SMV_RESERVED else prop


def render_smv_formula(phi: ctl.Formula, props: Iterable[str] = ()) -> str:
    """NuSMV CTL syntax; atoms outside ``props`` (when given) render as FALSE."""
    known = set(props)

    def node(n: ctl.Formula, kids: list[str]) -> str:
        if isinstance(n, ctl.TrueConst):
            return "TRUE"
        if isinstance(n, ctl.FalseConst):
            return "FALSE"
        if isinstance(n, ctl.Atom):
            return smv_name(n.name) if not known or n.name in known else "FALSE"
        if isinstance(n, ctl.EU):
            return f"E [ ({kids[0]}) U ({kids[1]}) ]"
        if isinstance(n, ctl.AU):
            return f"A [ ({kids[0]}) U ({kids[1]}) ]"
        if isinstance(n, ctl.Not):
            return f"!({kids[0]})"
        if n.arity == 1:
            return f"{n.keyword} ({kids[0]})"
        return f"({kids[0]}) {n.keyword} ({kids[1]})"

    return ctl.fold(phi, node)


def export_smv(k: KripkeStructure, phi: ctl.Formula) -> str:
    lines = ["MODULE main", "VAR", f"  state : 0..{k.n_states - 1};", "ASSIGN"]
    init = sorted(k.initial)
    if len(init) == 1:
        lines.append(f"  init(state) := {init[0]};")
    else:
        lines.append("  init(state) := {" + ", ".join(map(str, init)) + "};")
    lines.append("TRANS")
    disjuncts = [f"(state = {s} & next(state) = {t})" for s, t in sorted(k.transitions)]
    lines.append("  " + "\n  | ".join(disjuncts) + ";")
    lines.append("DEFINE")
    for p in k.props:
        states = [s for s in range(k.n_states) if p in k.labeling[s]]
        rhs = " | ".join(f"state = {s}" for s in states) if states else "FALSE"
        lines.append(f"  {smv_name(p)} := {rhs};")
    lines.append(f"CTLSPEC {render_smv_formula(phi, k.props)}")
    return "\n".join(lines) + "\n"
