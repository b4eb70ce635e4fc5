"""Explicit-state CTL model checking.

State sets are Python ints used as bitsets (bit ``s`` set iff state ``s`` is
in the set). ``label_states`` is the fixpoint labeling algorithm;
``check_naive`` is a brute-force path-search oracle that shares no fixpoint
code with it and exists to cross-validate it on small instances.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass
from typing import Iterator

from . import ctl
from .ctl import Formula
from .kripke import KripkeStructure

log = logging.getLogger(__name__)

NAIVE_MAX_STATES = 8
NAIVE_MAX_DEPTH = 16


def mask_to_set(mask: int) -> frozenset[int]:
    out = []
    s = 0
    while mask:
        if mask & 1:
            out.append(s)
        mask >>= 1
        s += 1
    return frozenset(out)


def pre_exists(k: KripkeStructure, target: int) -> int:
    """States with at least one successor in ``target``."""
    pred = k.pred_masks
    out = 0
    s = 0
    while target:
        if target & 1:
            out |= pred[s]
        target >>= 1
        s += 1
    return out


def eu_iterates(k: KripkeStructure, phi: int, psi: int) -> Iterator[int]:
    """Least-fixpoint iterates of E[phi U psi], starting from psi."""
    z = psi
    yield z
    for _ in range(k.n_states):
        nxt = z | (phi & pre_exists(k, z))
        if nxt == z:
            return
        z = nxt
        yield z
    raise AssertionError("EU fixpoint exceeded n_states iterations")


def eg_iterates(k: KripkeStructure, phi: int) -> Iterator[int]:
    """Greatest-fixpoint iterates of EG phi, starting from phi."""
    z = phi
    yield z
    for _ in range(k.n_states):
        nxt = z & pre_exists(k, z)
        if nxt == z:
            return
        z = nxt
        yield z
    raise AssertionError("EG fixpoint exceeded n_states iterations")


def _last(it: Iterator[int]) -> int:
    for z in it:
        pass
    return z


def label_mask(k: KripkeStructure, phi: Formula) -> int:
    """Bitset of states satisfying ``phi``."""
    full = (1 << k.n_states) - 1
    props = k.prop_masks
    unknown: set[str] = set()

    def eu(a: int, b: int) -> int:
        return _last(eu_iterates(k, a, b))

    def eg(a: int) -> int:
        return _last(eg_iterates(k, a))

    def node(n: Formula, kids: list[int]) -> int:
        if isinstance(n, ctl.TrueConst):
            return full
        if isinstance(n, ctl.FalseConst):
            return 0
        if isinstance(n, ctl.Atom):
            if n.name not in props:
                unknown.add(n.name)
                return 0
            return props[n.name]
        if isinstance(n, ctl.Not):
            return full & ~kids[0]
        if isinstance(n, ctl.And):
            return kids[0] & kids[1]
        if isinstance(n, ctl.Or):
            return kids[0] | kids[1]
        if isinstance(n, ctl.Implies):
            return (full & ~kids[0]) | kids[1]
        if isinstance(n, ctl.EX):
            return pre_exists(k, kids[0])
        if isinstance(n, ctl.EU):
            return eu(kids[0], kids[1])
        if isinstance(n, ctl.EG):
            return eg(kids[0])
        if isinstance(n, ctl.EF):
            return eu(full, kids[0])
        if isinstance(n, ctl.AX):
            return full & ~pre_exists(k, full & ~kids[0])
        if isinstance(n, ctl.AF):
            return full & ~eg(full & ~kids[0])
        if isinstance(n, ctl.AG):
            return full & ~eu(full, full & ~kids[0])
        if isinstance(n, ctl.AU):
            not_a = full & ~kids[0]
            not_b = full & ~kids[1]
            return full & ~(eu(not_b, not_a & not_b) | eg(not_b))
        raise TypeError(f"unknown formula node {type(n).__name__}")

    result = ctl.fold(phi, node)
    if unknown:
        log.warning("atoms %s not in structure vocabulary; treated as false", sorted(unknown))
    return result


def label_states(k: KripkeStructure, phi: Formula) -> frozenset[int]:
    return mask_to_set(label_mask(k, phi))


@dataclass(frozen=True)
class SatResult:
    holds: bool
    sat_states: frozenset[int]
    elapsed_ns: int


def check(k: KripkeStructure, phi: Formula) -> SatResult:
    """Verdict is yes iff every initial state satisfies ``phi``.

    ``elapsed_ns`` covers the labeling computation only.
    """
    t0 = time.perf_counter_ns()
    mask = label_mask(k, phi)
    elapsed = time.perf_counter_ns() - t0
    init = k.initial_mask
    return SatResult((mask & init) == init, mask_to_set(mask), elapsed)


# --- brute-force oracle ------------------------------------------------------

def expand_core(phi: Formula) -> Formula:
    """Rewrite into the core {true, false, atom, !, &, |, EX, EU, EG}."""
    NOT = ctl.Not

    def node(n: Formula, kids: list[Formula]) -> Formula:
        if isinstance(n, ctl.Implies):
            return ctl.Or(NOT(kids[0]), kids[1])
        if isinstance(n, ctl.EF):
            return ctl.EU(ctl.TRUE, kids[0])
        if isinstance(n, ctl.AX):
            return NOT(ctl.EX(NOT(kids[0])))
        if isinstance(n, ctl.AF):
            return NOT(ctl.EG(NOT(kids[0])))
        if isinstance(n, ctl.AG):
            return NOT(ctl.EU(ctl.TRUE, NOT(kids[0])))
        if isinstance(n, ctl.AU):
            a, b = kids
            return NOT(ctl.Or(ctl.EU(NOT(b), ctl.And(NOT(a), NOT(b))), ctl.EG(NOT(b))))
        if not kids:
            return n
        return type(n)(*kids)

    return ctl.fold(phi, node)


class _NaiveEvaluator:
    def __init__(self, k: KripkeStructure):
        self.k = k
        self.cache: dict[tuple[int, int], bool] = {}

    def holds(self, phi: Formula, s: int) -> bool:
        key = (id(phi), s)
        hit = self.cache.get(key)
        if hit is None:
            hit = self._eval(phi, s)
            self.cache[key] = hit
        return hit

    def _eval(self, phi: Formula, s: int) -> bool:
        k = self.k
        if isinstance(phi, ctl.TrueConst):
            return True
        if isinstance(phi, ctl.FalseConst):
            return False
        if isinstance(phi, ctl.Atom):
            return phi.name in k.labeling[s]
        if isinstance(phi, ctl.Not):
            return not self.holds(phi.arg, s)
        if isinstance(phi, ctl.And):
            return self.holds(phi.left, s) and self.holds(phi.right, s)
        if isinstance(phi, ctl.Or):
            return self.holds(phi.left, s) or self.holds(phi.right, s)
        if isinstance(phi, ctl.EX):
            return any(self.holds(phi.arg, t) for t in k.successors[s])
        if isinstance(phi, ctl.EU):
            return self._until_path(phi.left, phi.right, s, [s])
        if isinstance(phi, ctl.EG):
            return self._lasso(phi.arg, s, [s])
        raise TypeError(f"naive oracle got non-core node {type(phi).__name__}")

    def _until_path(self, a: Formula, b: Formula, s: int, path: list[int]) -> bool:
        # search simple paths s0..sj of at most n_states states
        if self.holds(b, s):
            return True
        if not self.holds(a, s) or len(path) >= self.k.n_states:
            return False
        for t in self.k.successors[s]:
            if t in path:
                continue
            path.append(t)
            found = self._until_path(a, b, t, path)
            path.pop()
            if found:
                return True
        return False

    def _lasso(self, a: Formula, s: int, path: list[int]) -> bool:
        # simple path inside a-states that closes a cycle back onto itself
        if not self.holds(a, s):
            return False
        for t in self.k.successors[s]:
            if t in path:
                return True
            path.append(t)
            found = self._lasso(a, t, path)
            path.pop()
            if found:
                return True
        return False


def check_naive(k: KripkeStructure, phi: Formula, state: int) -> bool:
    """Does ``state`` satisfy ``phi``, by direct path search.

    Limited to structures of at most 8 states and formulas of depth at most 16.
    """
    if k.n_states > NAIVE_MAX_STATES:
        raise ValueError(f"naive oracle supports at most {NAIVE_MAX_STATES} states")
    if ctl.formula_depth(phi) > NAIVE_MAX_DEPTH:
        raise ValueError(f"naive oracle supports formula depth at most {NAIVE_MAX_DEPTH}")
    if not 0 <= state < k.n_states:
        raise ValueError(f"state {state} out of range")
    return _NaiveEvaluator(k).holds(expand_core(phi), state)


def naive_sat_states(k: KripkeStructure, phi: Formula) -> frozenset[int]:
    """All states accepted by the oracle, sharing one evaluation cache."""
    if k.n_states > NAIVE_MAX_STATES:
        raise ValueError(f"naive oracle supports at most {NAIVE_MAX_STATES} states")
    if ctl.formula_depth(phi) > NAIVE_MAX_DEPTH:
        raise ValueError(f"naive oracle supports formula depth at most {NAIVE_MAX_DEPTH}")
    core = expand_core(phi)
    ev = _NaiveEvaluator(k)
    return frozenset(s for s in range(k.n_states) if ev.holds(core, s))
