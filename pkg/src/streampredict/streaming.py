"""Streaming predictors: per-case state tracking with incremental updates.

Every predictor follows the same two-verb contract: ``update`` consumes one
event and mutates internal state, ``query`` returns the probability
distribution over the next symbol for a case, or None to abstain. Queries
never mutate.

The automaton predictors all run the same bookkeeping per event. With ``s``
the case's current state (the root for unseen cases):

1. a brand-new case first increments ``f(s)(stop)``, so the case is counted
   as a sequence that currently ends at ``s``;
2. ``f(s)(stop)`` is decremented and ``f(s)(activity)`` incremented: one
   fewer sequence stops here, one more continues;
3. the successor state and transition are created if missing (suffix class
   for n-grams, tree child for prefix trees, set union for bags);
4. the successor's stop count is incremented and the case tracker moves.

Replaying any interleaving of a set of complete cases therefore leaves the
automaton with exactly the frequencies the batch learners compute from the
corresponding multiset log.
"""

from __future__ import annotations

import abc
from dataclasses import dataclass, field

from .automata import ROOT, Distribution, Fdfa
from .events import STOP, Alphabet, Event
from .learners import SuffixClassRegistry, backoff_distribution


class Predictor(abc.ABC):
    """Contract shared by base predictors, ensembles, and external plug-ins."""

    name: str = "predictor"
    #: whether state_visits() returns meaningful evidence counts
    supports_state_visits: bool = False

    @abc.abstractmethod
    def update(self, event: Event) -> None:
        """Learn from exactly one event."""

    @abc.abstractmethod
    def query(self, case: str) -> Distribution | None:
        """Next-symbol distribution for a case; None means abstain."""

    def state_visits(self, case: str) -> int | None:
        """Total frequency at the case's current state, if the notion applies."""
        return None

    @property
    def state_count(self) -> int | None:
        return None


@dataclass
class PredictorStats:
    """Counters the evaluation layer fills in while driving a predictor."""

    updates: int = 0
    queries: int = 0
    latency_ms: list[float] = field(default_factory=list)


class AutomatonPredictor(Predictor):
    """Shared machinery: an Fdfa plus a map from active cases to states.

    The tracker stores only cases actually seen; an unmapped case is
    implicitly at the root. ``max_cases`` optionally evicts the least
    recently updated case mappings (the automaton keeps their counts).
    """

    supports_state_visits = True

    def __init__(
        self,
        name: str,
        alphabet: Alphabet | None = None,
        root_access=(),
        max_cases: int | None = None,
    ) -> None:
        self.name = name
        self.fdfa = Fdfa(alphabet, root_access=root_access)
        self.cases: dict[str, int] = {}
        self.max_cases = max_cases

    def current_state(self, case: str) -> int:
        return self.cases.get(case, ROOT)

    def update(self, event: Event) -> None:
        s = self.cases.get(event.case)
        if s is None:
            s = ROOT
            self.fdfa.add_count(s, STOP, 1)
        self.fdfa.add_count(s, STOP, -1)
        self.fdfa.add_count(s, event.activity, 1)
        target = self.fdfa.step(s, event.activity)
        if target is None:
            target = self._create_successor(s, event.activity)
        self.fdfa.add_count(target, STOP, 1)
        if self.max_cases is None:
            self.cases[event.case] = target
        else:
            self.cases.pop(event.case, None)  # refresh recency
            self.cases[event.case] = target
            if len(self.cases) > self.max_cases:
                del self.cases[next(iter(self.cases))]

    def query(self, case: str) -> Distribution | None:
        s = self.current_state(case)
        if self.fdfa.total(s) == 0:
            return None
        return self.fdfa.distribution(s)

    def state_visits(self, case: str) -> int | None:
        return self.fdfa.total(self.current_state(case))

    @property
    def state_count(self) -> int | None:
        return self.fdfa.state_count

    def _create_successor(self, state: int, activity: int) -> int:
        raise NotImplementedError


class NGramPredictor(AutomatonPredictor):
    """Streaming n-gram: states are the last ``n-1`` symbols of a case history."""

    def __init__(
        self,
        n: int,
        alphabet: Alphabet | None = None,
        name: str | None = None,
        max_cases: int | None = None,
    ) -> None:
        if n < 1:
            raise ValueError("n-gram window must be >= 1")
        super().__init__(name or f"{n}-gram", alphabet, max_cases=max_cases)
        self.n = n
        self._registry = SuffixClassRegistry(self.fdfa, n)

    def _create_successor(self, state: int, activity: int) -> int:
        target = self._registry.successor(state, activity)
        if self.fdfa.step(state, activity) is None:
            self.fdfa.set_edge(state, activity, target)
        return target

    def query(self, case: str) -> Distribution | None:
        s = self.current_state(case)
        if self.fdfa.total(s) > 0:
            return self.fdfa.distribution(s)
        # Zero-information state: shorten the context from the left.
        return backoff_distribution(self.fdfa, self.fdfa.access(s))


class FptPredictor(AutomatonPredictor):
    """Streaming frequency prefix tree; abstains instead of backing off."""

    def __init__(
        self,
        alphabet: Alphabet | None = None,
        name: str = "fpt",
        max_cases: int | None = None,
    ) -> None:
        super().__init__(name, alphabet, max_cases=max_cases)

    def _create_successor(self, state: int, activity: int) -> int:
        target = self.fdfa.add_state(self.fdfa.access(state) + (activity,))
        self.fdfa.set_edge(state, activity, target)
        return target


class BagPredictor(AutomatonPredictor):
    """Streaming bag: states are the sets of activities a case has shown."""

    def __init__(
        self,
        alphabet: Alphabet | None = None,
        name: str = "bag",
        max_cases: int | None = None,
    ) -> None:
        super().__init__(name, alphabet, root_access=frozenset(), max_cases=max_cases)
        self._index: dict[frozenset[int], int] = {frozenset(): ROOT}

    def _create_successor(self, state: int, activity: int) -> int:
        target_set = self.fdfa.access(state) | {activity}
        target = self._index.get(target_set)
        if target is None:
            target = self.fdfa.add_state(target_set)
            self._index[target_set] = target
        self.fdfa.set_edge(state, activity, target)
        return target
