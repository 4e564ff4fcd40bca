"""Event-log ingestion: CSV loading, event ordering, and train/val/test splits.

The canonical input is a headered CSV with one event per row. Column names
are configurable; activities are interned into the run's alphabet and case
ids are kept as strings. Events are ordered either by a timestamp column
(stable, so ties keep file order) or by file order alone.
"""

from __future__ import annotations

import csv
import math
import random
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

from .events import (
    DEFAULT_INIT_SURFACE,
    DEFAULT_STOP_SURFACE,
    Alphabet,
    Event,
    EventLog,
    ReservedSymbolError,
)


class DatasetError(Exception):
    """A dataset file is missing, malformed, or inconsistent with its config."""


@dataclass
class DatasetConfig:
    path: str
    case_column: str = "case_id"
    activity_column: str = "activity"
    timestamp_column: str = "timestamp"
    order_by: str = "timestamp"  # or "file"
    stop_surface: str = DEFAULT_STOP_SURFACE
    init_surface: str = DEFAULT_INIT_SURFACE

    def __post_init__(self) -> None:
        if self.case_column == self.activity_column:
            raise ValueError("case and activity columns must differ")
        if self.order_by not in ("timestamp", "file"):
            raise ValueError("order_by must be 'timestamp' or 'file'")


_FALLBACK_TS_FORMATS = (
    "%Y-%m-%d %H:%M:%S",
    "%Y/%m/%d %H:%M:%S",
    "%d.%m.%Y %H:%M:%S",
    "%d-%m-%Y %H:%M:%S",
    "%Y-%m-%d",
)


def _parse_timestamp(raw: str) -> datetime:
    text = raw.strip()
    iso = text[:-1] + "+00:00" if text.endswith("Z") else text
    try:
        ts = datetime.fromisoformat(iso)
    except ValueError:
        ts = None
        for fmt in _FALLBACK_TS_FORMATS:
            try:
                ts = datetime.strptime(text, fmt)
                break
            except ValueError:
                continue
        if ts is None:
            raise ValueError(f"unparseable timestamp {raw!r}")
    if ts.tzinfo is None:
        ts = ts.replace(tzinfo=timezone.utc)
    return ts


def load_event_stream(
    cfg: DatasetConfig, alphabet: Alphabet | None = None
) -> tuple[list[Event], Alphabet]:
    """Read a CSV event log into an ordered event list, interning activities.

    Raises DatasetError (with the offending row number, header = row 1) on
    missing columns, empty fields, or bad timestamps.
    """
    if alphabet is None:
        alphabet = Alphabet(stop_surface=cfg.stop_surface, init_surface=cfg.init_surface)
    path = Path(cfg.path)
    if not path.is_file():
        raise DatasetError(f"dataset file not found: {path}")

    by_time = cfg.order_by == "timestamp"
    rows: list[tuple[datetime, Event]] = []
    events: list[Event] = []
    with path.open(newline="", encoding="utf-8-sig") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            return [], alphabet
        needed = [cfg.case_column, cfg.activity_column]
        if by_time:
            needed.append(cfg.timestamp_column)
        missing = [c for c in needed if c not in reader.fieldnames]
        if missing:
            raise DatasetError(f"{path}: missing column(s) {', '.join(missing)}")
        for lineno, row in enumerate(reader, start=2):
            case = (row.get(cfg.case_column) or "").strip()
            activity = row.get(cfg.activity_column) or ""
            if not case or not activity:
                raise DatasetError(f"{path}:{lineno}: empty case id or activity")
            try:
                ev = Event(case=str(case), activity=alphabet.intern(activity))
            except ReservedSymbolError as exc:
                raise DatasetError(f"{path}:{lineno}: {exc}") from exc
            if by_time:
                raw_ts = row.get(cfg.timestamp_column) or ""
                try:
                    rows.append((_parse_timestamp(raw_ts), ev))
                except ValueError as exc:
                    raise DatasetError(f"{path}:{lineno}: {exc}") from exc
            else:
                events.append(ev)
    if by_time:
        rows.sort(key=lambda pair: pair[0])  # stable: ties keep file order
        events = [ev for _, ev in rows]
    return events, alphabet


def dataset_stats(events: list[Event]) -> dict[str, int]:
    """Event/case/activity counts, for cross-checking against published tables."""
    cases = set()
    activities = set()
    for ev in events:
        cases.add(ev.case)
        activities.add(ev.activity)
    return {"events": len(events), "cases": len(cases), "activities": len(activities)}


@dataclass
class SplitSpec:
    train: float = 0.70
    val: float = 0.15
    test: float = 0.15
    seed: int = 0

    def __post_init__(self) -> None:
        if min(self.train, self.val, self.test) < 0:
            raise ValueError("split fractions must be nonnegative")
        if abs(self.train + self.val + self.test - 1.0) > 1e-9:
            raise ValueError("split fractions must sum to 1")


def split_log(log: EventLog, spec: SplitSpec) -> tuple[EventLog, EventLog, EventLog]:
    """Shuffle cases with the seeded RNG and cut them into three disjoint logs.

    Train and validation sizes are floors of their fractions; the remainder
    is the test set, so the three parts always partition the input cases.
    """
    cases = list(log.sequences())
    if len(cases) < 3:
        raise ValueError("need at least 3 cases to split")
    rng = random.Random(spec.seed)
    rng.shuffle(cases)
    n_train = math.floor(spec.train * len(cases))
    n_val = math.floor(spec.val * len(cases))
    parts = (cases[:n_train], cases[n_train:n_train + n_val], cases[n_train + n_val:])
    out = []
    for part in parts:
        part_log = EventLog()
        for seq in part:
            part_log.add(seq)
        out.append(part_log)
    return out[0], out[1], out[2]


def stream_from_log(
    log: EventLog, seed: int = 0, case_prefix: str = "c"
) -> list[Event]:
    """Render a multiset log as one random interleaving of per-case streams.

    Useful for replaying batch logs through streaming predictors; per-case
    order is preserved, cross-case order is randomized by the seed.
    """
    rng = random.Random(seed)
    pending: list[tuple[str, list[int]]] = []
    for idx, seq in enumerate(log.sequences()):
        pending.append((f"{case_prefix}{idx}", list(seq)))
    events: list[Event] = []
    while pending:
        i = rng.randrange(len(pending))
        case, seq = pending[i]
        events.append(Event(case=case, activity=seq.pop(0)))
        if not seq:
            pending.pop(i)
    return events
