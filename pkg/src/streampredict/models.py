"""Model specifications and their batch/streaming instantiations.

A ModelSpec is a small tree (ensembles hold child specs) that the CLI parses
from config files and the evaluation harness turns into either streaming
predictors or batch models. Batch models answer distribution queries for a
prefix of activities; parsing semantics differ per learner: n-grams back off
to shorter suffixes, everything else abstains when the parse dies.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Mapping

from .automata import ROOT, Distribution, Fdfa, argmax_symbol
from .ensembles import (
    AdaptiveVoting,
    FallbackPredictor,
    HardVoting,
    SoftVoting,
    dirac,
    mean_distribution,
    plurality_winner,
)
from .events import Alphabet, EventLog
from .learners import alergia, backoff_distribution, build_bag, build_fpt, build_ngram
from .streaming import BagPredictor, FptPredictor, NGramPredictor, Predictor


class ModelSpecError(ValueError):
    """A model specification is malformed or unsupported in the given mode."""


BASE_KINDS = ("fpt", "bag", "ngram", "alergia")
ENSEMBLE_KINDS = ("soft", "hard", "adaptive", "fallback")


@dataclass
class ModelSpec:
    kind: str
    n: int | None = None
    alpha: float | None = None
    members: list["ModelSpec"] = field(default_factory=list)
    primary: "ModelSpec | None" = None
    secondary: "ModelSpec | None" = None
    min_visits: int = 10
    name: str | None = None

    def __post_init__(self) -> None:
        if self.kind not in BASE_KINDS + ENSEMBLE_KINDS:
            raise ModelSpecError(f"unknown model kind {self.kind!r}")
        if self.kind == "ngram" and (self.n is None or self.n < 1):
            raise ModelSpecError("ngram spec needs n >= 1")
        if self.kind == "alergia":
            if self.alpha is None:
                self.alpha = 0.5
            if not 0.0 < self.alpha <= 1.0:
                raise ModelSpecError("alergia alpha must be in (0, 1]")
        if self.kind in ("soft", "hard", "adaptive") and len(self.members) < 2:
            raise ModelSpecError(f"{self.kind} voting needs at least 2 members")
        if self.kind == "fallback" and (self.primary is None or self.secondary is None):
            raise ModelSpecError("fallback needs primary and secondary members")

    @property
    def display_name(self) -> str:
        if self.name:
            return self.name
        if self.kind == "ngram":
            return f"{self.n}-gram"
        if self.kind == "alergia":
            return "alergia"
        if self.kind in ("soft", "hard", "adaptive"):
            return f"{self.kind}-voting"
        return self.kind


_COMPACT_NGRAM = re.compile(r"^(?:ngram(\d+)|(\d+)-gram)$")
_COMPACT_ALERGIA = re.compile(r"^alergia([0-9.]+)?$")
_COMPACT_ENSEMBLE = re.compile(r"^(soft|hard|adaptive|fallback)\((.*)\)$")


def _split_args(body: str) -> list[str]:
    parts, depth, cur = [], 0, []
    for ch in body:
        if ch == "," and depth == 0:
            parts.append("".join(cur).strip())
            cur = []
        else:
            depth += ch == "("
            depth -= ch == ")"
            cur.append(ch)
    if cur:
        parts.append("".join(cur).strip())
    return [p for p in parts if p]


def parse_compact_spec(text: str) -> ModelSpec:
    """Parse the compact override syntax: ``fpt``, ``ngram5``, ``alergia0.5``,
    ``soft(fpt,bag,ngram3)``, ``fallback(fpt,ngram5,10)``."""
    text = text.strip()
    if text in ("fpt", "bag"):
        return ModelSpec(kind=text)
    m = _COMPACT_NGRAM.match(text)
    if m:
        return ModelSpec(kind="ngram", n=int(m.group(1) or m.group(2)))
    m = _COMPACT_ALERGIA.match(text)
    if m:
        return ModelSpec(kind="alergia", alpha=float(m.group(1)) if m.group(1) else None)
    m = _COMPACT_ENSEMBLE.match(text)
    if m:
        kind, body = m.group(1), m.group(2)
        args = _split_args(body)
        if kind == "fallback":
            if len(args) not in (2, 3):
                raise ModelSpecError("fallback(primary,secondary[,min_visits])")
            min_visits = int(args[2]) if len(args) == 3 else 10
            return ModelSpec(
                kind="fallback",
                primary=parse_compact_spec(args[0]),
                secondary=parse_compact_spec(args[1]),
                min_visits=min_visits,
            )
        return ModelSpec(kind=kind, members=[parse_compact_spec(a) for a in args])
    raise ModelSpecError(f"cannot parse model spec {text!r}")


def spec_from_mapping(obj: Mapping) -> ModelSpec:
    """Build a ModelSpec from a config-table mapping (nested for ensembles)."""
    if "kind" not in obj:
        raise ModelSpecError(f"model table needs a 'kind': {obj!r}")
    kind = str(obj["kind"])
    members = [spec_from_mapping(m) for m in obj.get("members", [])]
    primary = obj.get("primary")
    secondary = obj.get("secondary")
    return ModelSpec(
        kind=kind,
        n=int(obj["n"]) if "n" in obj else None,
        alpha=float(obj["alpha"]) if "alpha" in obj else None,
        members=members,
        primary=spec_from_mapping(primary) if primary else None,
        secondary=spec_from_mapping(secondary) if secondary else None,
        min_visits=int(obj.get("min_visits", 10)),
        name=obj.get("name"),
    )


# -- streaming ----------------------------------------------------------------


def build_streaming_predictor(spec: ModelSpec, alphabet: Alphabet) -> Predictor:
    name = spec.display_name
    if spec.kind == "fpt":
        return FptPredictor(alphabet, name=name)
    if spec.kind == "bag":
        return BagPredictor(alphabet, name=name)
    if spec.kind == "ngram":
        return NGramPredictor(spec.n, alphabet, name=name)  # type: ignore[arg-type]
    if spec.kind == "alergia":
        raise ModelSpecError("alergia is a batch-only learner")
    if spec.kind == "fallback":
        return FallbackPredictor(
            build_streaming_predictor(spec.primary, alphabet),  # type: ignore[arg-type]
            build_streaming_predictor(spec.secondary, alphabet),  # type: ignore[arg-type]
            min_visits=spec.min_visits,
            name=name,
        )
    members = [build_streaming_predictor(m, alphabet) for m in spec.members]
    if spec.kind == "soft":
        return SoftVoting(members, name=name)
    if spec.kind == "hard":
        return HardVoting(members, name=name)
    return AdaptiveVoting(members, name=name)


# -- batch ----------------------------------------------------------------------


class BatchModel:
    """A trained model answering next-symbol queries for activity prefixes."""

    name = "model"

    def distribution_for(self, prefix: tuple[int, ...]) -> Distribution | None:
        raise NotImplementedError

    def visits_for(self, prefix: tuple[int, ...]) -> int:
        """Evidence mass at the state the prefix reaches; 0 if unparseable."""
        return 0

    @property
    def state_count(self) -> int | None:
        return None


class AutomatonBatchModel(BatchModel):
    def __init__(self, fdfa: Fdfa, name: str, backoff: bool = False) -> None:
        self.fdfa = fdfa
        self.name = name
        self.backoff = backoff

    def distribution_for(self, prefix: tuple[int, ...]) -> Distribution | None:
        if self.backoff:
            return backoff_distribution(self.fdfa, prefix)
        state = self.fdfa.walk(ROOT, prefix)
        if state is None or self.fdfa.total(state) == 0:
            return None
        return self.fdfa.distribution(state)

    def visits_for(self, prefix: tuple[int, ...]) -> int:
        state = self.fdfa.walk(ROOT, prefix)
        return 0 if state is None else self.fdfa.total(state)

    @property
    def state_count(self) -> int | None:
        return self.fdfa.state_count


class VotingBatchModel(BatchModel):
    def __init__(self, members: list[BatchModel], mode: str, name: str) -> None:
        self.members = members
        self.mode = mode
        self.name = name

    def distribution_for(self, prefix: tuple[int, ...]) -> Distribution | None:
        answers = [
            d for d in (m.distribution_for(prefix) for m in self.members) if d is not None
        ]
        if not answers:
            return None
        if self.mode == "soft":
            return mean_distribution(answers)
        return dirac(plurality_winner([argmax_symbol(d) for d in answers]))


class FallbackBatchModel(BatchModel):
    def __init__(
        self, primary: BatchModel, secondary: BatchModel, min_visits: int, name: str
    ) -> None:
        self.primary = primary
        self.secondary = secondary
        self.min_visits = min_visits
        self.name = name

    def distribution_for(self, prefix: tuple[int, ...]) -> Distribution | None:
        if self.primary.visits_for(prefix) >= self.min_visits:
            d = self.primary.distribution_for(prefix)
            if d is not None:
                return d
        return self.secondary.distribution_for(prefix)


def build_batch_model(
    spec: ModelSpec, train: EventLog, alphabet: Alphabet | None = None
) -> BatchModel:
    name = spec.display_name
    if spec.kind == "fpt":
        return AutomatonBatchModel(build_fpt(train, alphabet), name)
    if spec.kind == "bag":
        return AutomatonBatchModel(build_bag(train, alphabet), name)
    if spec.kind == "ngram":
        return AutomatonBatchModel(build_ngram(train, spec.n, alphabet), name, backoff=True)
    if spec.kind == "alergia":
        merged = alergia(build_fpt(train, alphabet), spec.alpha)  # type: ignore[arg-type]
        return AutomatonBatchModel(merged, name)
    if spec.kind == "fallback":
        return FallbackBatchModel(
            build_batch_model(spec.primary, train, alphabet),  # type: ignore[arg-type]
            build_batch_model(spec.secondary, train, alphabet),  # type: ignore[arg-type]
            spec.min_visits,
            name,
        )
    if spec.kind == "adaptive":
        raise ModelSpecError("adaptive voting is streaming-only")
    members = [build_batch_model(m, train, alphabet) for m in spec.members]
    return VotingBatchModel(members, spec.kind, name)
