"""Ensemble predictors: soft/hard/adaptive voting and visit-threshold fallback.

Ensembles satisfy the same Predictor contract as their members, so they nest:
a voting ensemble can itself vote inside another ensemble. Updates are always
forwarded verbatim to every member, which keeps each member bit-identical to
the same model trained standalone on the same stream.
"""

from __future__ import annotations

from .automata import Distribution, argmax_symbol
from .events import RESERVED_SYMBOLS, Event
from .streaming import Predictor


def mean_distribution(dists: list[Distribution]) -> Distribution:
    """Unweighted arithmetic mean of probability vectors."""
    if not dists:
        raise ValueError("cannot average zero distributions")
    merged: Distribution = {}
    for d in dists:
        for sym, p in d.items():
            merged[sym] = merged.get(sym, 0.0) + p
    k = len(dists)
    return {sym: p / k for sym, p in merged.items()}


def plurality_winner(votes: list[int]) -> int:
    """Most frequent symbol; ties broken by the smallest symbol id."""
    if not votes:
        raise ValueError("cannot pick a winner from zero votes")
    tally: dict[int, int] = {}
    for v in votes:
        tally[v] = tally.get(v, 0) + 1
    return min(tally, key=lambda sym: (-tally[sym], sym))


def dirac(symbol: int) -> Distribution:
    return {symbol: 1.0}


class _VotingBase(Predictor):
    def __init__(self, members: list[Predictor], name: str) -> None:
        if len(members) < 2:
            raise ValueError("a voting ensemble needs at least 2 members")
        self.members = list(members)
        self.name = name

    def update(self, event: Event) -> None:
        for m in self.members:
            m.update(event)

    def _answers(self, case: str) -> list[Distribution]:
        return [d for d in (m.query(case) for m in self.members) if d is not None]


class SoftVoting(_VotingBase):
    """Average the members' distributions; abstain only if everyone does."""

    def __init__(self, members: list[Predictor], name: str = "soft-voting") -> None:
        super().__init__(members, name)

    def query(self, case: str) -> Distribution | None:
        answers = self._answers(case)
        if not answers:
            return None
        return mean_distribution(answers)


class HardVoting(_VotingBase):
    """Each member casts its argmax; the plurality winner becomes a Dirac."""

    def __init__(self, members: list[Predictor], name: str = "hard-voting") -> None:
        super().__init__(members, name)

    def query(self, case: str) -> Distribution | None:
        votes = [argmax_symbol(d) for d in self._answers(case)]
        if not votes:
            return None
        return dirac(plurality_winner(votes))


class AdaptiveVoting(_VotingBase):
    """Route queries to the member with the best running accuracy.

    Before forwarding an update, each member is scored on the incoming event:
    its current prediction for the case is compared against the event's
    activity, counting abstentions as misses. Scores are running means by
    default; pass ``decay`` (e.g. 0.995) for an exponentially weighted
    variant that adapts under drift. Members that were never scored are not
    eligible for selection until they are.
    """

    def __init__(
        self,
        members: list[Predictor],
        name: str = "adaptive-voting",
        decay: float | None = None,
    ) -> None:
        super().__init__(members, name)
        if decay is not None and not 0.0 < decay < 1.0:
            raise ValueError("decay must be in (0, 1)")
        self.decay = decay
        self._scored = [0] * len(self.members)
        self._score = [0.0] * len(self.members)

    def accuracy(self, index: int) -> float | None:
        if self._scored[index] == 0:
            return None
        if self.decay is not None:
            return self._score[index]
        return self._score[index] / self._scored[index]

    def update(self, event: Event) -> None:
        # Synthetic start markers carry no signal about member quality.
        if event.activity not in RESERVED_SYMBOLS:
            for i, m in enumerate(self.members):
                d = m.query(event.case)
                hit = d is not None and argmax_symbol(d) == event.activity
                self._scored[i] += 1
                if self.decay is None:
                    self._score[i] += 1.0 if hit else 0.0
                else:
                    self._score[i] = self.decay * self._score[i] + (
                        1.0 - self.decay
                    ) * (1.0 if hit else 0.0)
        for m in self.members:
            m.update(event)

    def query(self, case: str) -> Distribution | None:
        ranked = sorted(
            range(len(self.members)),
            key=lambda i: (-(self.accuracy(i) if self.accuracy(i) is not None else -1.0), i),
        )
        for i in ranked:
            d = self.members[i].query(case)
            if d is not None:
                return d
        return None


class FallbackPredictor(Predictor):
    """Answer from the primary model only once its state has enough evidence.

    The primary must expose per-case visit counts (all automaton predictors
    do). When the current state has fewer than ``min_visits`` total
    observations, or the primary abstains, the secondary answers instead.
    """

    def __init__(
        self,
        primary: Predictor,
        secondary: Predictor,
        min_visits: int = 10,
        name: str = "fallback",
    ) -> None:
        if not primary.supports_state_visits:
            raise ValueError("fallback primary must expose state visit counts")
        self.primary = primary
        self.secondary = secondary
        self.min_visits = min_visits
        self.name = name

    @property
    def members(self) -> list[Predictor]:
        return [self.primary, self.secondary]

    def update(self, event: Event) -> None:
        self.primary.update(event)
        self.secondary.update(event)

    def query(self, case: str) -> Distribution | None:
        visits = self.primary.state_visits(case)
        if visits is not None and visits >= self.min_visits:
            d = self.primary.query(case)
            if d is not None:
                return d
        return self.secondary.query(case)
