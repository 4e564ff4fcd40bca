"""Shared fixtures: the two-activity worked-example log and helpers."""

from __future__ import annotations

import os
from pathlib import Path
from types import SimpleNamespace

import pytest

from streampredict import Alphabet, EventLog, Fdfa
from streampredict.events import STOP


def make_demo_log() -> SimpleNamespace:
    """The 30-case log over {a, b} used by the golden automaton tests."""
    alpha = Alphabet()
    a = alpha.intern("a")
    b = alpha.intern("b")
    log = EventLog(
        {
            (a,): 5,
            (a, a): 3,
            (a, a, a): 3,
            (a, a, b): 1,
            (a, a, a, a): 1,
            (b,): 9,
            (b, a): 1,
            (b, b): 5,
            (b, b, a): 1,
            (b, b, b): 1,
        }
    )
    return SimpleNamespace(alpha=alpha, a=a, b=b, log=log)


def make_demo_ngram(ns: SimpleNamespace) -> Fdfa:
    """Hand-built 3-gram automaton for the demo log (independent of learners)."""
    a, b = ns.a, ns.b
    f = Fdfa(ns.alpha)  # state 0: root, access ()
    s_a = f.add_state((a,))
    s_aa = f.add_state((a, a))
    s_ab = f.add_state((a, b))
    s_b = f.add_state((b,))
    s_ba = f.add_state((b, a))
    s_bb = f.add_state((b, b))
    for src, act, tgt, count in [
        (0, a, s_a, 13),
        (0, b, s_b, 17),
        (s_a, a, s_aa, 8),
        (s_a, b, s_ab, 0),
        (s_aa, a, s_aa, 5),
        (s_aa, b, s_ab, 1),
        (s_b, a, s_ba, 1),
        (s_b, b, s_bb, 7),
        (s_bb, a, s_ba, 1),
        (s_bb, b, s_bb, 1),
    ]:
        f.set_edge(src, act, tgt)
        if count:
            f.add_count(src, act, count)
    for state, stop_count in [
        (0, 0),
        (s_a, 5),
        (s_aa, 7),
        (s_ab, 1),
        (s_b, 9),
        (s_ba, 2),
        (s_bb, 6),
    ]:
        if stop_count:
            f.add_count(state, STOP, stop_count)
    return f


def canonical_form(fdfa: Fdfa):
    """Automaton as a sorted access-string-keyed structure for equality tests."""
    def key(access):
        if isinstance(access, frozenset):
            return (1, tuple(sorted(access)))
        return (0, tuple(access))

    return sorted(
        (
            key(fdfa.access(s)),
            dict(fdfa.freq(s)),
            {act: key(fdfa.access(t)) for act, t in fdfa.edges(s).items()},
        )
        for s in fdfa.states()
    )


@pytest.fixture
def demo() -> SimpleNamespace:
    return make_demo_log()


@pytest.fixture
def demo_ngram(demo: SimpleNamespace) -> Fdfa:
    return make_demo_ngram(demo)


@pytest.fixture
def canon():
    return canonical_form


def data_file(name: str) -> Path | None:
    """Locate a benchmark CSV under $STREAMPREDICT_DATA or ./data, if present."""
    candidates = []
    env = os.environ.get("STREAMPREDICT_DATA")
    if env:
        candidates.append(Path(env) / name)
    candidates.append(Path(__file__).resolve().parent.parent / "data" / name)
    for c in candidates:
        if c.is_file():
            return c
    return None
