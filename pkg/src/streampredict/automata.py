"""Frequency automata and the probability view derived from them.

An ``Fdfa`` holds a state arena, a partial deterministic transition function
over activities, and one integer frequency vector per state (counts over
activities plus the stop symbol). Probabilities are never stored: a state's
distribution is derived on demand by exact integer normalization, so scaling
all counts at a state by the same factor leaves the derived distribution
bitwise unchanged.

State 0 is always the root. Transitions may exist structurally with a usage
count of zero; that is how an n-gram keeps every state reachable via its
access string.
"""

from __future__ import annotations

import json
from typing import Iterable, Mapping

from .events import STOP, Alphabet

ROOT = 0

#: A probability vector over symbols; zero-probability symbols are absent.
Distribution = dict[int, float]


class EmptyStateError(ValueError):
    """Raised when a distribution is requested at a state with zero total count."""


class Fdfa:
    """Frequency deterministic finite automaton with per-state access annotations.

    The access annotation identifies a state for the learner that built the
    automaton: a prefix tuple for prefix trees, a suffix-class tuple for
    n-grams, a frozenset for bags. The automaton itself only requires it to
    be hashable.
    """

    __slots__ = ("alphabet", "_freq", "_edges", "_access")

    def __init__(self, alphabet: Alphabet | None = None, root_access=()) -> None:
        self.alphabet = alphabet
        self._freq: list[dict[int, int]] = []
        self._edges: list[dict[int, int]] = []
        self._access: list = []
        self.add_state(root_access)

    # -- structure ---------------------------------------------------------

    def add_state(self, access) -> int:
        self._freq.append({})
        self._edges.append({})
        self._access.append(access)
        return len(self._freq) - 1

    @property
    def state_count(self) -> int:
        return len(self._freq)

    def states(self) -> range:
        return range(len(self._freq))

    def access(self, state: int):
        return self._access[state]

    def step(self, state: int, activity: int) -> int | None:
        return self._edges[state].get(activity)

    def set_edge(self, state: int, activity: int, target: int) -> None:
        existing = self._edges[state].get(activity)
        if existing is not None and existing != target:
            raise ValueError(
                f"nondeterministic edge: state {state} on {activity} already -> {existing}"
            )
        self._edges[state][activity] = target

    def redirect_edge(self, state: int, activity: int, target: int) -> None:
        """Re-point an existing transition; used by state-merging learners."""
        if activity not in self._edges[state]:
            raise KeyError(f"no edge on {activity} at state {state}")
        self._edges[state][activity] = target

    def edges(self, state: int) -> Mapping[int, int]:
        return self._edges[state]

    # -- frequencies -------------------------------------------------------

    def count(self, state: int, symbol: int) -> int:
        return self._freq[state].get(symbol, 0)

    def add_count(self, state: int, symbol: int, delta: int) -> None:
        new = self._freq[state].get(symbol, 0) + delta
        if new < 0:
            raise ValueError(
                f"frequency underflow at state {state}, symbol {symbol}"
            )
        if new == 0:
            self._freq[state].pop(symbol, None)
        else:
            self._freq[state][symbol] = new

    def freq(self, state: int) -> Mapping[int, int]:
        return self._freq[state]

    def total(self, state: int) -> int:
        return sum(self._freq[state].values())

    def total_mass(self) -> int:
        """Sum of every count in the automaton."""
        return sum(sum(f.values()) for f in self._freq)

    # -- semantics ---------------------------------------------------------

    def walk(self, state: int, word: Iterable[int]) -> int | None:
        """Extended transition function; None as soon as a step is undefined."""
        s: int | None = state
        for a in word:
            s = self._edges[s].get(a)  # type: ignore[index]
            if s is None:
                return None
        return s

    def distribution(self, state: int) -> Distribution:
        """Normalize the state's frequency vector into a probability vector."""
        freq = self._freq[state]
        total = sum(freq.values())
        if total == 0:
            raise EmptyStateError(f"state {state} has zero total frequency")
        return {sym: c / total for sym, c in freq.items()}

    def predict(self, word: Iterable[int]) -> Distribution | None:
        """Distribution after parsing ``word`` from the root; None if the parse fails."""
        s = self.walk(ROOT, word)
        if s is None:
            return None
        return self.distribution(s)

    # -- utilities ----------------------------------------------------------

    def validate(self) -> None:
        """Check structural invariants; raises ValueError on the first violation.

        Counts are attached either to the stop symbol or to an existing
        outgoing edge, and every edge target is a valid state id.
        """
        n = self.state_count
        for s in self.states():
            for act, tgt in self._edges[s].items():
                if not (0 <= tgt < n):
                    raise ValueError(f"state {s}: edge on {act} targets invalid {tgt}")
                if act == STOP:
                    raise ValueError(f"state {s}: transition labeled with stop symbol")
            for sym, c in self._freq[s].items():
                if c < 0:
                    raise ValueError(f"state {s}: negative count on {sym}")
                if sym != STOP and sym not in self._edges[s]:
                    raise ValueError(f"state {s}: count on {sym} without an edge")

    def copy(self) -> "Fdfa":
        dup = Fdfa.__new__(Fdfa)
        dup.alphabet = self.alphabet
        dup._freq = [dict(f) for f in self._freq]
        dup._edges = [dict(e) for e in self._edges]
        dup._access = list(self._access)
        return dup

    def _render_symbol(self, symbol: int) -> str:
        if self.alphabet is not None:
            return self.alphabet.surface(symbol)
        return f"#{symbol}"

    def _render_access(self, access) -> tuple[str, list]:
        if isinstance(access, frozenset):
            return "set", sorted(self._render_symbol(s) for s in access)
        return "tuple", [self._render_symbol(s) for s in access]

    def to_text(self) -> str:
        """Plain-text adjacency dump: one state block per state.

        Line format::

            state <id> access=<json list> stop=<count>
              <activity json>(<count>) -> <target id>
        """
        kinds = {self._render_access(a)[0] for a in self._access}
        kind = "set" if kinds == {"set"} else "tuple"
        lines = [f"fdfa v1 states={self.state_count} access={kind}"]
        for s in self.states():
            _, rendered = self._render_access(self._access[s])
            lines.append(
                f"state {s} access={json.dumps(rendered)} stop={self.count(s, STOP)}"
            )
            for act in sorted(self._edges[s]):
                tgt = self._edges[s][act]
                lines.append(
                    f"  {json.dumps(self._render_symbol(act))}({self.count(s, act)}) -> {tgt}"
                )
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str, alphabet: Alphabet | None = None) -> "Fdfa":
        """Parse a :meth:`to_text` dump. Raises ValueError on malformed input."""
        lines = [ln for ln in text.splitlines() if ln.strip()]
        if not lines or not lines[0].startswith("fdfa v1 "):
            raise ValueError("not an fdfa dump (missing header)")
        header = dict(
            part.split("=", 1) for part in lines[0].split()[1:] if "=" in part
        )
        n_states = int(header["states"])
        kind = header.get("access", "tuple")
        if alphabet is None:
            alphabet = Alphabet()
        fdfa = cls(alphabet)
        for _ in range(n_states - 1):
            fdfa.add_state(())

        current = None
        seen = set()
        for ln in lines[1:]:
            if ln.startswith("state "):
                head, stop_part = ln.rsplit(" stop=", 1)
                _, sid_str, access_part = head.split(" ", 2)
                current = int(sid_str)
                if current in seen or not (0 <= current < n_states):
                    raise ValueError(f"bad state id {current}")
                seen.add(current)
                surfaces = json.loads(access_part[len("access="):])
                symbols = [alphabet.encode(sf) for sf in surfaces]
                fdfa._access[current] = (
                    frozenset(symbols) if kind == "set" else tuple(symbols)
                )
                stop_count = int(stop_part)
                if stop_count:
                    fdfa.add_count(current, STOP, stop_count)
            elif ln.startswith("  ") and current is not None:
                body, tgt_str = ln.strip().rsplit(" -> ", 1)
                surface_json, count_part = body.rsplit("(", 1)
                count = int(count_part.rstrip(")"))
                symbol = alphabet.encode(json.loads(surface_json))
                target = int(tgt_str)
                if not (0 <= target < n_states):
                    raise ValueError(f"edge target {target} out of range")
                fdfa.set_edge(current, symbol, target)
                if count:
                    fdfa.add_count(current, symbol, count)
            else:
                raise ValueError(f"unparseable line: {ln!r}")
        if len(seen) != n_states:
            raise ValueError("state count mismatch")
        return fdfa


def argmax_symbol(dist: Distribution) -> int:
    """Symbol with the highest probability; ties go to the smallest symbol id."""
    if not dist:
        raise ValueError("cannot take argmax of an empty distribution")
    best_sym = -1
    best_p = -1.0
    for sym, p in dist.items():
        if p > best_p or (p == best_p and sym < best_sym):
            best_sym, best_p = sym, p
    return best_sym
