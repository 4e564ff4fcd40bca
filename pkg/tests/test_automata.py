from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from streampredict import (
    Alphabet,
    EmptyStateError,
    Fdfa,
    ROOT,
    argmax_symbol,
    build_fpt,
)
from streampredict.events import STOP

from conftest import canonical_form


def test_extended_delta_identity(demo_ngram):
    for s in demo_ngram.states():
        assert demo_ngram.walk(s, ()) == s


def test_extended_delta_reaches_aa(demo, demo_ngram):
    s = demo_ngram.walk(ROOT, (demo.a, demo.a))
    assert demo_ngram.access(s) == (demo.a, demo.a)


def test_extended_delta_undefined_at_ba(demo, demo_ngram):
    s_ba = demo_ngram.walk(ROOT, (demo.b, demo.a))
    assert demo_ngram.access(s_ba) == (demo.b, demo.a)
    assert demo_ngram.walk(s_ba, (demo.b,)) is None
    # and the failure propagates through longer words
    assert demo_ngram.walk(ROOT, (demo.b, demo.a, demo.b, demo.a)) is None


@given(st.data())
def test_extended_delta_equals_stepwise_fold(data):
    n_states = data.draw(st.integers(1, 6))
    syms = [2, 3, 4]
    fdfa = Fdfa()
    for _ in range(n_states - 1):
        fdfa.add_state(())
    for s in range(n_states):
        for a in syms:
            if data.draw(st.booleans()):
                fdfa.set_edge(s, a, data.draw(st.integers(0, n_states - 1)))
    word = tuple(data.draw(st.lists(st.sampled_from(syms), max_size=8)))
    start = data.draw(st.integers(0, n_states - 1))

    state = start
    for a in word:
        if state is None:
            break
        state = fdfa.step(state, a)
    assert fdfa.walk(start, word) == state


def test_distribution_demo_exact_rationals(demo, demo_ngram):
    a, b = demo.a, demo.b
    s_aa = demo_ngram.walk(ROOT, (a, a))
    dist = demo_ngram.distribution(s_aa)
    assert dist == {STOP: 7 / 13, a: 5 / 13, b: 1 / 13}
    freq = demo_ngram.freq(s_aa)
    total = demo_ngram.total(s_aa)
    assert Fraction(freq[STOP], total) == Fraction(7, 13)

    s_bb = demo_ngram.walk(ROOT, (b, b))
    assert demo_ngram.distribution(s_bb) == {STOP: 3 / 4, a: 1 / 8, b: 1 / 8}


def test_distribution_single_mass():
    fdfa = Fdfa()
    fdfa.add_count(ROOT, STOP, 1)
    assert fdfa.distribution(ROOT) == {STOP: 1.0}


def test_distribution_zero_total_raises():
    fdfa = Fdfa()
    with pytest.raises(EmptyStateError):
        fdfa.distribution(ROOT)


def test_predict_root_omits_zero_stop(demo, demo_ngram):
    dist = demo_ngram.predict(())
    assert dist == {demo.a: 13 / 30, demo.b: 17 / 30}
    assert STOP not in dist


def test_predict_aa(demo, demo_ngram):
    assert demo_ngram.predict((demo.a, demo.a)) == {
        STOP: 7 / 13,
        demo.a: 5 / 13,
        demo.b: 1 / 13,
    }


def test_predict_unseen_prefix_in_tree_is_undefined(demo):
    fpt = build_fpt(demo.log, demo.alpha)
    assert fpt.predict((demo.a, demo.b)) is None


def test_argmax_basic_and_ties(demo):
    a, b = demo.a, demo.b
    assert argmax_symbol({STOP: 7 / 13, a: 5 / 13, b: 1 / 13}) == STOP
    assert argmax_symbol({a: 0.5, b: 0.5}) == a  # smaller id wins ties
    assert argmax_symbol({b: 1.0}) == b
    with pytest.raises(ValueError):
        argmax_symbol({})


freq_vectors = st.dictionaries(
    st.integers(0, 6), st.integers(0, 40), min_size=1, max_size=5
).filter(lambda d: sum(d.values()) > 0)


@given(freq_vectors)
def test_distribution_sums_to_one(freq):
    fdfa = Fdfa()
    for sym, c in freq.items():
        if c:
            fdfa.add_count(ROOT, sym, c)
    if fdfa.total(ROOT) == 0:
        return
    assert abs(sum(fdfa.distribution(ROOT).values()) - 1.0) <= 1e-9


@given(freq_vectors, st.integers(1, 9))
def test_distribution_scale_equivariant_bitwise(freq, k):
    base, scaled = Fdfa(), Fdfa()
    for sym, c in freq.items():
        if c:
            base.add_count(ROOT, sym, c)
            scaled.add_count(ROOT, sym, c * k)
    if base.total(ROOT) == 0:
        return
    d1, d2 = base.distribution(ROOT), scaled.distribution(ROOT)
    assert d1 == d2  # exact float equality: same rational, same rounding
    assert argmax_symbol(d1) == argmax_symbol(d2)


def test_counts_never_negative():
    fdfa = Fdfa()
    fdfa.add_count(ROOT, STOP, 2)
    fdfa.add_count(ROOT, STOP, -2)
    with pytest.raises(ValueError):
        fdfa.add_count(ROOT, STOP, -1)


def test_deterministic_edges_enforced():
    fdfa = Fdfa()
    s1 = fdfa.add_state((2,))
    s2 = fdfa.add_state((3,))
    fdfa.set_edge(ROOT, 2, s1)
    fdfa.set_edge(ROOT, 2, s1)  # idempotent is fine
    with pytest.raises(ValueError):
        fdfa.set_edge(ROOT, 2, s2)


def test_debug_serialization_roundtrip(demo, demo_ngram):
    text = demo_ngram.to_text()
    assert 'state 0 access=[] stop=0' in text
    assert '"b"(0) ->' in text  # the structural zero-count edge survives
    parsed = Fdfa.from_text(text, Alphabet())
    parsed.validate()
    assert canonical_form(parsed) == canonical_form(demo_ngram)


def test_from_text_rejects_corruption(demo_ngram):
    good = demo_ngram.to_text()
    with pytest.raises(ValueError):
        Fdfa.from_text("not a dump\n")
    with pytest.raises(ValueError):
        Fdfa.from_text(good.replace("-> 3", "-> 99"))


def test_validate_flags_count_without_edge():
    fdfa = Fdfa()
    fdfa.add_count(ROOT, 5, 3)  # activity count with no transition
    with pytest.raises(ValueError):
        fdfa.validate()
