import hypothesis.strategies as st
import pytest
from hypothesis import settings

from ctlsurrogate import ctl
from ctlsurrogate.kripke import GenConfig, KripkeStructure, generate_kripke, parse_kripke

settings.register_profile("default", deadline=None, max_examples=100)
settings.load_profile("default")

seeds = st.integers(min_value=0, max_value=2**64 - 1)


@st.composite
def kripke_structures(draw, max_states=6, max_props=3):
    n = draw(st.integers(1, max_states))
    props = tuple(f"p{i}" for i in range(draw(st.integers(1, max_props))))
    succ = [draw(st.sets(st.integers(0, n - 1), min_size=1)) for _ in range(n)]
    labels = {s: draw(st.sets(st.sampled_from(props))) for s in range(n)}
    init = draw(st.sets(st.integers(0, n - 1), min_size=1))
    return KripkeStructure.build(n, init, [(s, t) for s in range(n) for t in succ[s]], props, labels)


def formulas(vocab=("p0", "p1", "p2"), max_leaves=15):
    leaves = st.one_of(st.just(ctl.TRUE), st.just(ctl.FALSE), st.sampled_from(vocab).map(ctl.Atom))

    def extend(children):
        unary = st.tuples(st.sampled_from(ctl.UNARY_TYPES), children).map(lambda t: t[0](t[1]))
        binary = st.tuples(st.sampled_from(ctl.BINARY_TYPES), children, children).map(
            lambda t: t[0](t[1], t[2]))
        return st.one_of(unary, binary)

    return st.recursive(leaves, extend, max_leaves=max_leaves)


@pytest.fixture
def one_state():
    """One state, self-loop, labeled {p0}."""
    return generate_kripke(GenConfig(1, 1, 1.0, 1.0, 7))


@pytest.fixture
def chain():
    """s0 -> s1 -> s1 with L(s0)={p}, L(s1)={q}."""
    return parse_kripke("states 2; init 0; props p q; trans 0->1 1->1; label 0: p; label 1: q;")


ACCEPTANCE_LINES: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[n])
