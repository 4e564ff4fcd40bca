"""Batch construction of frequency automata from event logs.

Four learners share the same substrate: the frequency prefix tree keeps every
seen prefix as its own state, the n-gram quotients prefixes by their last
``n-1`` activities, the bag quotients them by the set of activities seen so
far, and Alergia merges prefix-tree states greedily whenever a Hoeffding test
cannot tell their futures apart.

n-gram states are exactly the suffix classes of seen prefixes. On top of the
traversal-induced transitions, every state is linked from its access-string
parent when that parent class exists: the state for ``w`` gets an incoming
(possibly zero-count) transition from the state for ``w[:-1]`` on ``w[-1]``.
That keeps states reachable by parsing their access string from the root,
which is what the backoff query below relies on. The link is added no matter
which of the two states appears first, so the automaton does not depend on
construction order.
"""

from __future__ import annotations

import math
from typing import Mapping

from .automata import ROOT, Distribution, Fdfa
from .events import STOP, Alphabet, EventLog


def _suffix_class(word: tuple[int, ...], n: int) -> tuple[int, ...]:
    """Access string of the n-gram state reached after ``word``."""
    if n == 1:
        return ()
    if len(word) < n - 1:
        return word
    return word[len(word) - (n - 1):]


class SuffixClassRegistry:
    """Creates and indexes n-gram class states, wiring access-chain edges.

    A state whose parent class does not exist yet is parked until (and
    unless) the parent is created, at which point the chain edge is added
    with zero count.
    """

    def __init__(self, fdfa: Fdfa, n: int) -> None:
        self.fdfa = fdfa
        self.n = n
        self.index: dict[tuple[int, ...], int] = {(): ROOT}
        self._orphans: dict[tuple[int, ...], list[int]] = {}

    def state(self, cls: tuple[int, ...]) -> int:
        sid = self.index.get(cls)
        if sid is not None:
            return sid
        fdfa = self.fdfa
        sid = fdfa.add_state(cls)
        self.index[cls] = sid
        if cls:
            parent = self.index.get(cls[:-1])
            if parent is not None:
                if fdfa.step(parent, cls[-1]) is None:
                    fdfa.set_edge(parent, cls[-1], sid)
            else:
                self._orphans.setdefault(cls[:-1], []).append(sid)
        for child in self._orphans.pop(cls, []):
            act = fdfa.access(child)[-1]
            if fdfa.step(sid, act) is None:
                fdfa.set_edge(sid, act, child)
        return sid

    def successor(self, state: int, activity: int) -> int:
        """Class state reached from ``state`` on ``activity`` (creates it)."""
        return self.state(
            _suffix_class(self.fdfa.access(state) + (activity,), self.n)
        )


def build_fpt(log: EventLog, alphabet: Alphabet | None = None) -> Fdfa:
    """Arrange a log as a frequency prefix tree.

    Each state is one seen prefix; ``f(s)(a)`` counts the sequences extending
    the prefix with ``a`` and ``f(s)(stop)`` counts the sequences equal to it.
    """
    fdfa = Fdfa(alphabet)
    for seq, mult in log.items():
        state = ROOT
        for act in seq:
            fdfa.add_count(state, act, mult)
            nxt = fdfa.step(state, act)
            if nxt is None:
                nxt = fdfa.add_state(fdfa.access(state) + (act,))
                fdfa.set_edge(state, act, nxt)
            state = nxt
        fdfa.add_count(state, STOP, mult)
    return fdfa


def build_ngram(log: EventLog, n: int, alphabet: Alphabet | None = None) -> Fdfa:
    """Construct an n-gram automaton directly, without an intermediate tree."""
    if n < 1:
        raise ValueError("n-gram window must be >= 1")
    fdfa = Fdfa(alphabet)
    registry = SuffixClassRegistry(fdfa, n)
    for seq, mult in log.items():
        state = ROOT
        for act in seq:
            target = registry.successor(state, act)
            if fdfa.step(state, act) is None:
                fdfa.set_edge(state, act, target)
            fdfa.add_count(state, act, mult)
            state = target
        fdfa.add_count(state, STOP, mult)
    return fdfa


def fold_fpt_to_ngram(fpt: Fdfa, n: int) -> Fdfa:
    """Quotient a prefix tree by last-(n-1)-suffix equivalence.

    Frequencies of merged states are summed and transitions re-target the
    class representatives. Used as the independent oracle for build_ngram.
    """
    if n < 1:
        raise ValueError("n-gram window must be >= 1")
    fdfa = Fdfa(fpt.alphabet)
    registry = SuffixClassRegistry(fdfa, n)
    mapped = [registry.state(_suffix_class(fpt.access(node), n)) for node in fpt.states()]
    for node in fpt.states():
        state = mapped[node]
        for sym, c in fpt.freq(node).items():
            if c:
                fdfa.add_count(state, sym, c)
        for act, child in fpt.edges(node).items():
            fdfa.set_edge(state, act, mapped[child])
    return fdfa


def build_bag(log: EventLog, alphabet: Alphabet | None = None) -> Fdfa:
    """Automaton whose states are the sets of activities seen so far in a case."""
    fdfa = Fdfa(alphabet, root_access=frozenset())
    index: dict[frozenset[int], int] = {frozenset(): ROOT}
    for seq, mult in log.items():
        state = ROOT
        for act in seq:
            target_set = fdfa.access(state) | {act}
            target = index.get(target_set)
            if target is None:
                target = fdfa.add_state(target_set)
                index[target_set] = target
            if fdfa.step(state, act) is None:
                fdfa.set_edge(state, act, target)
            fdfa.add_count(state, act, mult)
            state = target
        fdfa.add_count(state, STOP, mult)
    return fdfa


# -- Alergia ----------------------------------------------------------------


def hoeffding_bound(n1: int, n2: int, alpha: float) -> float:
    return math.sqrt(math.log(2.0 / alpha) / 2.0) * (1.0 / math.sqrt(n1) + 1.0 / math.sqrt(n2))


def hoeffding_compatible(
    f1: Mapping[int, int], f2: Mapping[int, int], alpha: float
) -> bool:
    """Hoeffding incompatibility test between two frequency vectors.

    Compatible iff for every symbol the empirical frequencies differ by less
    than ``sqrt(ln(2/alpha)/2) * (1/sqrt(n1) + 1/sqrt(n2))``.
    """
    if not 0.0 < alpha <= 1.0:
        raise ValueError("alpha must be in (0, 1]")
    n1 = sum(f1.values())
    n2 = sum(f2.values())
    if n1 == 0 or n2 == 0:
        raise ValueError("hoeffding test requires both totals >= 1")
    bound = hoeffding_bound(n1, n2, alpha)
    for sym in set(f1) | set(f2):
        if abs(f1.get(sym, 0) / n1 - f2.get(sym, 0) / n2) >= bound:
            return False
    return True


def _compatible_recursive(
    fdfa: Fdfa, s1: int, s2: int, alpha: float, visited: set[tuple[int, int]]
) -> bool:
    """Two states are mergeable if their vectors pass the test and so do all
    successor pairs reachable on common activities."""
    if s1 == s2:
        return True
    key = (s1, s2)
    if key in visited:
        return True
    visited.add(key)
    f1, f2 = fdfa.freq(s1), fdfa.freq(s2)
    if sum(f1.values()) == 0 or sum(f2.values()) == 0:
        return True  # no evidence to distinguish
    if not hoeffding_compatible(f1, f2, alpha):
        return False
    for act, t1 in fdfa.edges(s1).items():
        t2 = fdfa.step(s2, act)
        if t2 is not None and not _compatible_recursive(fdfa, t1, t2, alpha, visited):
            return False
    return True


def alergia(fpt: Fdfa, alpha: float) -> Fdfa:
    """Greedy top-down state merging on a prefix tree.

    Red states form the merged core; blue states are their unmerged children,
    examined shortest-access-first in lexicographic order. A blue state folds
    into the first compatible red state (frequencies summed, nondeterminism
    resolved by recursive merging); otherwise it is promoted to red.
    """
    if not 0.0 < alpha <= 1.0:
        raise ValueError("alpha must be in (0, 1]")
    a = fpt.copy()
    parent: dict[int, tuple[int, int]] = {}  # blue state -> (parent, activity)
    for s in a.states():
        for act, t in a.edges(s).items():
            parent[t] = (s, act)

    alive = [True] * a.state_count

    def fold(dst: int, src: int) -> None:
        if dst == src:
            return
        alive[src] = False
        for sym, c in list(a.freq(src).items()):
            if c:
                a.add_count(dst, sym, c)
        for act, child in list(a.edges(src).items()):
            existing = a.step(dst, act)
            if existing is None:
                a.set_edge(dst, act, child)
                parent[child] = (dst, act)
            else:
                fold(existing, child)

    def merge(red: int, blue: int) -> None:
        p, act = parent[blue]
        a.redirect_edge(p, act, red)  # blue has exactly one incoming tree edge
        fold(red, blue)

    reds: list[int] = [ROOT]
    red_set = {ROOT}

    def blue_frontier() -> list[int]:
        frontier = {
            t
            for r in reds
            for t in a.edges(r).values()
            if t not in red_set and alive[t]
        }
        return sorted(frontier, key=lambda s: (len(a.access(s)), a.access(s)))

    blues = blue_frontier()
    while blues:
        b = blues[0]
        for r in reds:
            if _compatible_recursive(a, r, b, alpha, set()):
                merge(r, b)
                break
        else:
            reds.append(b)
            red_set.add(b)
        blues = blue_frontier()

    # Compact the surviving states into a fresh arena, BFS from the root.
    out = Fdfa(a.alphabet, root_access=a.access(ROOT))
    remap = {ROOT: ROOT}
    queue = [ROOT]
    while queue:
        s = queue.pop(0)
        for act in sorted(a.edges(s)):
            t = a.edges(s)[act]
            if t not in remap:
                remap[t] = out.add_state(a.access(t))
                queue.append(t)
            out.set_edge(remap[s], act, remap[t])
        for sym, c in a.freq(s).items():
            if c:
                out.add_count(remap[s], sym, c)
    return out


def backoff_distribution(fdfa: Fdfa, word: tuple[int, ...]) -> Distribution | None:
    """Parse progressively shorter suffixes of ``word`` from the root.

    Returns the distribution of the first reachable state with nonzero total,
    or None when even the empty suffix yields no information.
    """
    for start in range(len(word) + 1):
        state = fdfa.walk(ROOT, word[start:])
        if state is None or fdfa.total(state) == 0:
            continue
        return fdfa.distribution(state)
    return None
