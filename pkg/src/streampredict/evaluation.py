"""Batch and streaming evaluation: accuracy, latency, rolling curves, reports.

Streaming evaluation follows the query-before-update discipline: for every
event, each model is first asked to predict the case's next activity, the
argmax is scored against the event (abstentions count as wrong), and only
then does the model learn the event. The first event of each case is
predicted from a start-marker context, injected ahead of it exactly once per
case; start-marker events themselves update the models but are never scored.

Batch evaluation walks every test sequence position by position, including
the terminal stop prediction, and weights sequences by their multiplicity.
"""

from __future__ import annotations

import statistics
import time
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .automata import argmax_symbol
from .datasets import SplitSpec, split_log
from .events import (
    DEFAULT_INIT_SURFACE,
    INIT,
    RESERVED_SYMBOLS,
    STOP,
    Alphabet,
    Event,
    EventLog,
)
from .models import BatchModel, ModelSpec, build_batch_model
from .pipeline import FunctionTerm, DataItem, IterableSource, KeyFilter, SinkTerm, Term
from .streaming import Predictor, PredictorStats


@dataclass
class EvalReport:
    """Outcome of evaluating one model on one stream or test set."""

    model: str
    predictions: int
    correct: int
    accuracy: float | None
    accuracy_stddev: float | None = None
    mean_latency_ms: float | None = None
    median_latency_ms: float | None = None
    rolling: list[float] = field(default_factory=list)
    states: int | None = None

    @property
    def accuracy_pct(self) -> float | None:
        return None if self.accuracy is None else 100.0 * self.accuracy


class _Tally:
    """Accumulates verdicts into an EvalReport."""

    def __init__(self, collect_rolling: bool = True) -> None:
        self.predictions = 0
        self.correct = 0
        self.rolling: list[float] = []
        self.latencies: list[float] = []
        self.collect_rolling = collect_rolling

    def score(self, hit: bool, latency_ms: float | None = None) -> None:
        self.predictions += 1
        self.correct += hit
        if self.collect_rolling:
            self.rolling.append(self.correct / self.predictions)
        if latency_ms is not None:
            self.latencies.append(latency_ms)

    def report(self, model: str, states: int | None = None) -> EvalReport:
        acc = self.correct / self.predictions if self.predictions else None
        mean_lat = statistics.fmean(self.latencies) if self.latencies else None
        med_lat = statistics.median(self.latencies) if self.latencies else None
        return EvalReport(
            model=model,
            predictions=self.predictions,
            correct=self.correct,
            accuracy=acc,
            mean_latency_ms=mean_lat,
            median_latency_ms=med_lat,
            rolling=self.rolling,
            states=states,
        )


def evaluate_streaming(
    models: Sequence[Predictor],
    stream: Iterable[Event],
    inject_init: bool = True,
    collect_rolling: bool = True,
) -> list[EvalReport]:
    """Replay a stream through every model, scoring each event before learning it.

    Events whose activity is a reserved marker (a pre-injected start symbol)
    only update the models. Per-event latency is the wall time of one query
    plus one update.
    """
    tallies = [_Tally(collect_rolling) for _ in models]
    seen: set[str] = set()
    for ev in stream:
        if ev.activity in RESERVED_SYMBOLS:
            seen.add(ev.case)
            for m in models:
                m.update(ev)
            continue
        if inject_init and ev.case not in seen:
            start = Event(ev.case, INIT)
            for m in models:
                m.update(start)
        seen.add(ev.case)
        for m, tally in zip(models, tallies):
            t0 = time.perf_counter()
            dist = m.query(ev.case)
            predicted = argmax_symbol(dist) if dist else None
            t1 = time.perf_counter()
            m.update(ev)
            t2 = time.perf_counter()
            tally.score(predicted == ev.activity, (t2 - t0) * 1e3)
    return [
        tally.report(m.name, states=m.state_count) for m, tally in zip(models, tallies)
    ]


def evaluate_batch(
    model: BatchModel, test: EventLog, collect_rolling: bool = True
) -> EvalReport:
    """Score a trained model on a test log, position by position.

    For a sequence ``w`` the model answers ``len(w) + 1`` queries: one per
    activity given the preceding prefix, and a final stop prediction given
    the whole sequence. Abstentions are wrong.
    """
    tally = _Tally(collect_rolling)
    for seq in test.sequences():
        for i in range(len(seq) + 1):
            actual = seq[i] if i < len(seq) else STOP
            t0 = time.perf_counter()
            dist = model.distribution_for(seq[:i])
            predicted = argmax_symbol(dist) if dist else None
            t1 = time.perf_counter()
            tally.score(predicted == actual, (t1 - t0) * 1e3)
    return tally.report(model.name, states=model.state_count)


def average_reports(runs: list[EvalReport]) -> EvalReport:
    """Summarize repeated evaluations of one model: mean accuracy +- stddev."""
    if not runs:
        raise ValueError("no reports to average")
    accs = [r.accuracy for r in runs if r.accuracy is not None]
    lats = [r.mean_latency_ms for r in runs if r.mean_latency_ms is not None]
    states = [r.states for r in runs if r.states is not None]
    return EvalReport(
        model=runs[0].model,
        predictions=sum(r.predictions for r in runs),
        correct=sum(r.correct for r in runs),
        accuracy=statistics.fmean(accs) if accs else None,
        accuracy_stddev=statistics.stdev(accs) if len(accs) >= 2 else None,
        mean_latency_ms=statistics.fmean(lats) if lats else None,
        median_latency_ms=None,
        rolling=runs[0].rolling,
        states=round(statistics.fmean(states)) if states else None,
    )


def run_batch_evaluation(
    specs: Sequence[ModelSpec],
    log: EventLog,
    alphabet: Alphabet | None,
    split: SplitSpec,
    runs: int = 5,
) -> list[EvalReport]:
    """Train/test each spec over ``runs`` reseeded splits and average."""
    per_model: dict[str, list[EvalReport]] = {s.display_name: [] for s in specs}
    for r in range(runs):
        seeded = SplitSpec(split.train, split.val, split.test, seed=split.seed + r)
        train, _val, test = split_log(log, seeded)
        for spec in specs:
            model = build_batch_model(spec, train, alphabet)
            per_model[spec.display_name].append(
                evaluate_batch(model, test, collect_rolling=(r == 0))
            )
    return [average_reports(per_model[s.display_name]) for s in specs]


# -- report emission -------------------------------------------------------------


def emit_report(
    reports: Sequence[EvalReport] | EvalReport,
    out: str,
    format: str = "table",
) -> None:
    """Write reports as a TSV table or as rolling-accuracy curve CSV rows."""
    if isinstance(reports, EvalReport):
        reports = [reports]
    if format == "table":
        lines = ["model\taccuracy_pct\tstates\tmean_latency_ms"]
        for r in reports:
            acc = "" if r.accuracy_pct is None else f"{r.accuracy_pct:.2f}"
            states = "N/A" if r.states is None else str(r.states)
            lat = "" if r.mean_latency_ms is None else f"{r.mean_latency_ms:.2f}"
            lines.append(f"{r.model}\t{acc}\t{states}\t{lat}")
    elif format == "curve-csv":
        lines = ["event_index,model,rolling_accuracy"]
        for r in reports:
            for i, acc in enumerate(r.rolling):
                lines.append(f"{i},{r.model},{acc:.6f}")
    else:
        raise ValueError(f"unknown report format {format!r}")
    with open(out, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


# -- pipeline terms ----------------------------------------------------------------


def rows_from_events(events: Iterable[Event], alphabet: Alphabet) -> list[dict]:
    """Render events as plain records for feeding a pipeline source."""
    return [
        {"case_id": ev.case, "activity": alphabet.surface(ev.activity)}
        for ev in events
    ]


class StartSymbolInjector(FunctionTerm):
    """Emits a start-marker record ahead of each case's first event."""

    def __init__(
        self,
        init_surface: str = DEFAULT_INIT_SURFACE,
        case_key: str = "case_id",
        activity_key: str = "activity",
        name: str | None = None,
    ) -> None:
        super().__init__(name or "add-start-symbol")
        self.init_surface = init_surface
        self.case_key = case_key
        self.activity_key = activity_key
        self._seen: set[str] = set()

    def process(self, item: DataItem):
        case = str(item.data[self.case_key])
        if case not in self._seen:
            self._seen.add(case)
            yield {self.case_key: case, self.activity_key: self.init_surface}
        yield dict(item.data)


class PredictorTerm(FunctionTerm):
    """Wraps a streaming predictor: query-then-update per event, emits verdicts."""

    def __init__(
        self,
        predictor: Predictor,
        alphabet: Alphabet,
        case_key: str = "case_id",
        activity_key: str = "activity",
        name: str | None = None,
    ) -> None:
        super().__init__(name or f"predict-{predictor.name}")
        self.predictor = predictor
        self.alphabet = alphabet
        self.case_key = case_key
        self.activity_key = activity_key
        self.stats = PredictorStats()

    def process(self, item: DataItem):
        case = str(item.data[self.case_key])
        symbol = self.alphabet.encode(str(item.data[self.activity_key]))
        t0 = time.perf_counter()
        dist = self.predictor.query(case)
        predicted = argmax_symbol(dist) if dist else None
        t1 = time.perf_counter()
        self.predictor.update(Event(case, symbol))
        t2 = time.perf_counter()
        self.stats.queries += 1
        self.stats.updates += 1
        self.stats.latency_ms.append((t2 - t0) * 1e3)
        yield {
            "model": self.predictor.name,
            "case": case,
            "actual": symbol,
            "predicted": predicted,
            "correct": predicted == symbol,
            "scored": symbol not in RESERVED_SYMBOLS,
            "latency_ms": (t2 - t0) * 1e3,
        }


class BatchScoreTerm(FunctionTerm):
    """Scores a trained batch model over incoming test sequences."""

    def __init__(self, model: BatchModel, name: str | None = None) -> None:
        super().__init__(name or f"score-{model.name}")
        self.model = model

    def process(self, item: DataItem):
        seq = tuple(item.data["sequence"])
        for i in range(len(seq) + 1):
            actual = seq[i] if i < len(seq) else STOP
            t0 = time.perf_counter()
            dist = self.model.distribution_for(seq[:i])
            predicted = argmax_symbol(dist) if dist else None
            t1 = time.perf_counter()
            yield {
                "model": self.model.name,
                "actual": actual,
                "predicted": predicted,
                "correct": predicted == actual,
                "scored": True,
                "latency_ms": (t1 - t0) * 1e3,
            }


class EvaluationTerm(SinkTerm):
    """Aggregates verdict records into an EvalReport."""

    def __init__(
        self,
        model_name: str,
        states: "int | None" = None,
        collect_rolling: bool = True,
        name: str | None = None,
    ) -> None:
        super().__init__(name or f"eval-{model_name}")
        self.model_name = model_name
        self.states = states
        self._tally = _Tally(collect_rolling)

    def consume(self, item: DataItem) -> None:
        if item.data.get("scored"):
            self._tally.score(bool(item.data["correct"]), item.data.get("latency_ms"))

    @property
    def report(self) -> EvalReport:
        return self._tally.report(self.model_name, states=self.states)


def streaming_pipeline(
    predictors: Sequence[Predictor],
    rows: Iterable[dict],
    alphabet: Alphabet,
    collect_rolling: bool = True,
) -> tuple[Term, list[EvaluationTerm]]:
    """Standard streaming topology: source, key filter, start-symbol
    injection, then one predictor+evaluation branch per model in parallel."""
    evals = []
    branches: Term | None = None
    for p in predictors:
        ev = EvaluationTerm(p.name, collect_rolling=collect_rolling)
        evals.append(ev)
        branch = PredictorTerm(p, alphabet) * ev
        branches = branch if branches is None else (branches | branch)
    if branches is None:
        raise ValueError("need at least one predictor")
    root = (
        IterableSource(rows, name="event-source")
        * KeyFilter(["case_id", "activity"], name="key-filter")
        * StartSymbolInjector(init_surface=alphabet.init_surface)
        * branches
    )
    return root, evals


def batch_pipeline(
    models: Sequence[BatchModel],
    test: EventLog,
    collect_rolling: bool = True,
) -> tuple[Term, list[EvaluationTerm]]:
    """Batch topology: a source of test sequences fanned out to one
    score+evaluation branch per trained model."""
    rows = [{"sequence": list(seq)} for seq in test.sequences()]
    evals = []
    branches: Term | None = None
    for m in models:
        ev = EvaluationTerm(m.name, states=m.state_count, collect_rolling=collect_rolling)
        evals.append(ev)
        branch = BatchScoreTerm(m) * ev
        branches = branch if branches is None else (branches | branch)
    if branches is None:
        raise ValueError("need at least one model")
    return IterableSource(rows, name="test-source") * branches, evals
