"""Command-line entry point.

``streampredict run --config cfg.toml`` wires a dataset, a model list, and an
evaluation mode into a pipeline run and writes a result table plus optional
rolling-accuracy curves. ``streampredict inspect dump.txt`` summarizes and
validates a serialized automaton.

Exit codes: 0 success, 2 invalid configuration or input, 3 dataset errors.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

try:
    import tomllib  # Python >= 3.11
except ModuleNotFoundError:  # pragma: no cover
    import tomli as tomllib

from .automata import Fdfa
from .datasets import (
    DatasetConfig,
    DatasetError,
    SplitSpec,
    load_event_stream,
    split_log,
)
from .evaluation import (
    average_reports,
    batch_pipeline,
    emit_report,
    rows_from_events,
    streaming_pipeline,
)
from .events import STOP, log_from_stream
from .models import (
    ModelSpec,
    ModelSpecError,
    _split_args,
    build_batch_model,
    build_streaming_predictor,
    parse_compact_spec,
    spec_from_mapping,
)
from .pipeline import run_pipeline

log = logging.getLogger("streampredict")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATASET = 3


class ConfigError(Exception):
    pass


@dataclass
class RunConfig:
    dataset: DatasetConfig
    mode: str
    models: list[ModelSpec]
    split: SplitSpec = field(default_factory=SplitSpec)
    runs: int = 5
    table_out: str = "results-table.tsv"
    curve_out: str | None = None

    def __post_init__(self) -> None:
        if self.mode not in ("batch", "streaming"):
            raise ConfigError(f"mode must be batch or streaming, got {self.mode!r}")
        if not self.models:
            raise ConfigError("at least one model must be configured")
        names = [m.display_name for m in self.models]
        if len(set(names)) != len(names):
            raise ConfigError(f"model names must be unique, got {names}")
        if self.runs < 1:
            raise ConfigError("runs must be >= 1")


def _coerce(value: str) -> Any:
    low = value.lower()
    if low in ("true", "false"):
        return low == "true"
    for cast in (int, float):
        try:
            return cast(value)
        except ValueError:
            continue
    return value


def _apply_override(raw: dict, key: str, value: str) -> None:
    if key == "models":
        raw["models"] = [parse_compact_spec(p) for p in _split_args(value)]
        return
    node = raw
    parts = key.split(".")
    for part in parts[:-1]:
        node = node.setdefault(part, {})
        if not isinstance(node, dict):
            raise ConfigError(f"cannot override through non-table key {part!r}")
    node[parts[-1]] = _coerce(value)


def load_config(path: str, overrides: list[str], base_dir: Path | None = None) -> RunConfig:
    cfg_path = Path(path)
    try:
        with cfg_path.open("rb") as fh:
            raw = tomllib.load(fh)
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc

    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override must look like key=value, got {item!r}")
        key, value = item.split("=", 1)
        _apply_override(raw, key.strip(), value.strip())

    try:
        ds_raw = dict(raw.get("dataset") or {})
        if "path" not in ds_raw:
            raise ConfigError("config needs dataset.path")
        ds_path = Path(ds_raw["path"])
        if not ds_path.is_absolute():
            ds_raw["path"] = str((base_dir or cfg_path.parent) / ds_path)
        dataset = DatasetConfig(**ds_raw)

        models_raw = raw.get("models") or []
        models = [
            m if isinstance(m, ModelSpec) else spec_from_mapping(m) for m in models_raw
        ]

        split_raw = dict(raw.get("split") or {})
        runs = int(split_raw.pop("runs", 5))
        split = SplitSpec(**split_raw) if split_raw else SplitSpec()

        out_raw = raw.get("output") or {}
        return RunConfig(
            dataset=dataset,
            mode=str(raw.get("mode", "streaming")),
            models=models,
            split=split,
            runs=runs,
            table_out=out_raw.get("table", "results-table.tsv"),
            curve_out=out_raw.get("curve"),
        )
    except (TypeError, ValueError, ModelSpecError) as exc:
        raise ConfigError(str(exc)) from exc


def _resolve_out(path: str, out_dir: str | None) -> str:
    p = Path(path)
    if out_dir is not None and not p.is_absolute():
        p = Path(out_dir) / p
    p.parent.mkdir(parents=True, exist_ok=True)
    return str(p)


def cmd_run(args: argparse.Namespace) -> int:
    overrides = list(args.override or [])
    if args.mode:
        overrides.append(f"mode={args.mode}")
    if args.seed is not None:
        overrides.append(f"split.seed={args.seed}")
    try:
        cfg = load_config(args.config, overrides)
    except ConfigError as exc:
        log.error("invalid configuration: %s", exc)
        return EXIT_CONFIG

    try:
        events, alphabet = load_event_stream(cfg.dataset)
    except DatasetError as exc:
        log.error("dataset error: %s", exc)
        return EXIT_DATASET

    try:
        if cfg.mode == "streaming":
            reports = _run_streaming(cfg, events, alphabet)
        else:
            reports = _run_batch(cfg, events, alphabet)
    except (ModelSpecError, ValueError) as exc:
        log.error("cannot run configuration: %s", exc)
        return EXIT_CONFIG

    table_path = _resolve_out(cfg.table_out, args.out_dir)
    emit_report(reports, table_path, format="table")
    log.info("wrote %s", table_path)
    if cfg.curve_out:
        curve_path = _resolve_out(cfg.curve_out, args.out_dir)
        emit_report(reports, curve_path, format="curve-csv")
        log.info("wrote %s", curve_path)
    return EXIT_OK


def _run_streaming(cfg: RunConfig, events, alphabet):
    predictors = [build_streaming_predictor(s, alphabet) for s in cfg.models]
    rows = rows_from_events(events, alphabet)
    root, evals = streaming_pipeline(
        predictors, rows, alphabet, collect_rolling=cfg.curve_out is not None
    )
    handle = run_pipeline(root)
    handle.join()
    handle.check()
    for p, ev in zip(predictors, evals):
        ev.states = p.state_count
    return [ev.report for ev in evals]


def _run_batch(cfg: RunConfig, events, alphabet):
    full_log = log_from_stream(events)
    per_model: dict[str, list] = {s.display_name: [] for s in cfg.models}
    for r in range(cfg.runs):
        seeded = SplitSpec(cfg.split.train, cfg.split.val, cfg.split.test, seed=cfg.split.seed + r)
        train, _val, test = split_log(full_log, seeded)
        trained = [build_batch_model(s, train, alphabet) for s in cfg.models]
        root, evals = batch_pipeline(
            trained, test, collect_rolling=(r == 0 and cfg.curve_out is not None)
        )
        handle = run_pipeline(root)
        handle.join()
        handle.check()
        for ev in evals:
            per_model[ev.model_name].append(ev.report)
    return [average_reports(per_model[s.display_name]) for s in cfg.models]


def cmd_inspect(args: argparse.Namespace) -> int:
    try:
        text = Path(args.dump).read_text(encoding="utf-8")
        fdfa = Fdfa.from_text(text)
        fdfa.validate()
    except (OSError, ValueError, KeyError) as exc:
        log.error("cannot inspect %s: %s", args.dump, exc)
        return EXIT_CONFIG
    transitions = sum(len(fdfa.edges(s)) for s in fdfa.states())
    stop_mass = sum(fdfa.count(s, STOP) for s in fdfa.states())
    print(f"states: {fdfa.state_count}")
    print(f"transitions: {transitions}")
    print(f"total frequency mass: {fdfa.total_mass()}")
    print(f"stop mass (cases): {stop_mass}")
    if fdfa.alphabet is not None:
        print(f"alphabet size: {fdfa.alphabet.activity_count}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="streampredict",
        description="Next-activity prediction over event logs, batch or streaming.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="evaluate models per a config file")
    run_p.add_argument("--config", required=True, help="TOML run configuration")
    run_p.add_argument("--mode", choices=["batch", "streaming"], help="override mode")
    run_p.add_argument("--seed", type=int, help="override the split seed")
    run_p.add_argument("--out-dir", help="directory for relative output paths")
    run_p.add_argument(
        "--override",
        action="append",
        metavar="K=V",
        help="override a config key (dotted path); repeatable",
    )
    run_p.set_defaults(fn=cmd_run)

    ins_p = sub.add_parser("inspect", help="summarize a serialized automaton dump")
    ins_p.add_argument("dump", help="path to a plain-text automaton dump")
    ins_p.set_defaults(fn=cmd_inspect)
    return parser


def main(argv: list[str] | None = None) -> int:
    level = os.environ.get("STREAMPREDICT_LOG", "warning").upper()
    logging.basicConfig(
        level=getattr(logging, level, logging.WARNING),
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    args = build_parser().parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
