"""Activities, events, and multiset event logs.

Activities are interned into dense integer symbols so that frequency vectors
can be indexed cheaply. Two symbol ids are reserved: ``STOP`` marks the end
of a case and ``INIT`` marks the start of a case in streaming mode. Real
activities start at index 2 and grow without bound as new surface strings
arrive.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping

STOP = 0
INIT = 1
FIRST_ACTIVITY = 2

#: Symbols below this index are reserved markers, not activities.
RESERVED_SYMBOLS = (STOP, INIT)

DEFAULT_STOP_SURFACE = "__stop__"
DEFAULT_INIT_SURFACE = "__init__"


class ReservedSymbolError(ValueError):
    """An activity surface collided with a reserved sentinel."""


class Alphabet:
    """Injective, thread-safe mapping between surface strings and symbol ids.

    Equal surfaces always yield the same id, distinct surfaces distinct ids.
    The sentinel surfaces for stop/init are configurable so datasets whose
    activity names would collide can pick different ones.
    """

    def __init__(
        self,
        stop_surface: str = DEFAULT_STOP_SURFACE,
        init_surface: str = DEFAULT_INIT_SURFACE,
    ) -> None:
        if stop_surface == init_surface:
            raise ValueError("stop and init sentinels must differ")
        self.stop_surface = stop_surface
        self.init_surface = init_surface
        self._lock = threading.Lock()
        self._surfaces: list[str] = [stop_surface, init_surface]
        self._ids: dict[str, int] = {stop_surface: STOP, init_surface: INIT}

    def intern(self, surface: str) -> int:
        """Return the symbol id for ``surface``, extending the alphabet if new.

        Raises ReservedSymbolError if the surface equals a sentinel.
        """
        if surface == self.stop_surface or surface == self.init_surface:
            raise ReservedSymbolError(
                f"activity surface {surface!r} collides with a reserved sentinel"
            )
        with self._lock:
            sym = self._ids.get(surface)
            if sym is None:
                sym = len(self._surfaces)
                self._surfaces.append(surface)
                self._ids[surface] = sym
            return sym

    def encode(self, surface: str) -> int:
        """Like :meth:`intern` but maps sentinel surfaces to STOP/INIT."""
        if surface == self.stop_surface:
            return STOP
        if surface == self.init_surface:
            return INIT
        return self.intern(surface)

    def lookup(self, surface: str) -> int | None:
        """Symbol id for a surface already interned, else None."""
        with self._lock:
            return self._ids.get(surface)

    def surface(self, symbol: int) -> str:
        with self._lock:
            return self._surfaces[symbol]

    def __len__(self) -> int:
        """Number of symbols including the two sentinels."""
        with self._lock:
            return len(self._surfaces)

    @property
    def activity_count(self) -> int:
        return len(self) - len(RESERVED_SYMBOLS)

    def activities(self) -> list[int]:
        return list(range(FIRST_ACTIVITY, len(self)))

    def __contains__(self, surface: str) -> bool:
        return self.lookup(surface) is not None


@dataclass(frozen=True)
class Event:
    """One (case, activity) observation; the atomic unit of logs and streams."""

    case: str
    activity: int

    def __post_init__(self) -> None:
        if not self.case:
            raise ValueError("event case id must be nonempty")


class EventLog:
    """Finite multiset of activity sequences, one entry per completed case.

    Order across cases is deliberately absent; only the in-case order of
    activities is preserved.
    """

    def __init__(self, entries: Mapping[tuple[int, ...], int] | None = None) -> None:
        self._entries: dict[tuple[int, ...], int] = {}
        if entries:
            for seq, mult in entries.items():
                self.add(tuple(seq), mult)

    def add(self, sequence: tuple[int, ...], multiplicity: int = 1) -> None:
        if multiplicity < 1:
            raise ValueError("multiplicity must be >= 1")
        if len(sequence) == 0:
            raise ValueError("the empty sequence cannot appear in an event log")
        self._entries[sequence] = self._entries.get(sequence, 0) + multiplicity

    def multiplicity(self, sequence: tuple[int, ...]) -> int:
        return self._entries.get(tuple(sequence), 0)

    def items(self) -> Iterator[tuple[tuple[int, ...], int]]:
        return iter(self._entries.items())

    def sequences(self) -> Iterator[tuple[int, ...]]:
        """Each case sequence, repeated by multiplicity."""
        for seq, mult in self._entries.items():
            for _ in range(mult):
                yield seq

    @property
    def case_count(self) -> int:
        return sum(self._entries.values())

    @property
    def event_count(self) -> int:
        return sum(len(s) * m for s, m in self._entries.items())

    def __len__(self) -> int:
        """Number of distinct sequences in the support."""
        return len(self._entries)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, EventLog):
            return NotImplemented
        return self._entries == other._entries

    def __repr__(self) -> str:
        return f"EventLog({self._entries!r})"


def log_from_stream(stream: Iterable[Event]) -> EventLog:
    """Fold an interleaved event stream into a multiset log.

    Events are grouped per case in arrival order; every case present in the
    stream is treated as complete. Any interleaving that preserves per-case
    order produces the same log.
    """
    per_case: dict[str, list[int]] = {}
    for ev in stream:
        per_case.setdefault(ev.case, []).append(ev.activity)
    log = EventLog()
    for seq in per_case.values():
        log.add(tuple(seq))
    return log
