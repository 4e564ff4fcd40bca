"""Next-activity prediction over discrete, case-based event logs.

Batch learners build frequency automata from completed logs; streaming
predictors learn the same automata one event at a time while answering
queries; ensembles combine either kind; a small term-based pipeline runtime
runs everything concurrently; and the evaluation harness scores accuracy,
latency, and rolling-accuracy curves in both modes.
"""

from .automata import ROOT, Distribution, EmptyStateError, Fdfa, argmax_symbol
from .datasets import (
    DatasetConfig,
    DatasetError,
    SplitSpec,
    dataset_stats,
    load_event_stream,
    split_log,
    stream_from_log,
)
from .ensembles import (
    AdaptiveVoting,
    FallbackPredictor,
    HardVoting,
    SoftVoting,
    dirac,
    mean_distribution,
    plurality_winner,
)
from .evaluation import (
    EvalReport,
    EvaluationTerm,
    PredictorTerm,
    StartSymbolInjector,
    average_reports,
    batch_pipeline,
    emit_report,
    evaluate_batch,
    evaluate_streaming,
    rows_from_events,
    run_batch_evaluation,
    streaming_pipeline,
)
from .events import (
    INIT,
    RESERVED_SYMBOLS,
    STOP,
    Alphabet,
    Event,
    EventLog,
    ReservedSymbolError,
    log_from_stream,
)
from .learners import (
    alergia,
    backoff_distribution,
    build_bag,
    build_fpt,
    build_ngram,
    fold_fpt_to_ngram,
    hoeffding_bound,
    hoeffding_compatible,
)
from .models import (
    BatchModel,
    ModelSpec,
    ModelSpecError,
    build_batch_model,
    build_streaming_predictor,
    parse_compact_spec,
)
from .pipeline import (
    END,
    CollectSink,
    CompositionError,
    DataItem,
    DataStream,
    FunctionTerm,
    IterableSource,
    KeyFilter,
    MergeByArrival,
    PipelineError,
    RunHandle,
    SinkTerm,
    SourceTerm,
    StreamOwnershipError,
    StreamView,
    Term,
    Transform,
    compose_parallel,
    compose_sequential,
    run_pipeline,
)
from .streaming import (
    AutomatonPredictor,
    BagPredictor,
    FptPredictor,
    NGramPredictor,
    Predictor,
    PredictorStats,
)

__version__ = "0.1.0"

__all__ = [
    "Alphabet", "Event", "EventLog", "ReservedSymbolError", "log_from_stream",
    "STOP", "INIT", "RESERVED_SYMBOLS",
    "Fdfa", "Distribution", "EmptyStateError", "ROOT", "argmax_symbol",
    "build_fpt", "build_ngram", "fold_fpt_to_ngram", "build_bag",
    "hoeffding_bound", "hoeffding_compatible", "alergia", "backoff_distribution",
    "Predictor", "PredictorStats", "AutomatonPredictor",
    "NGramPredictor", "FptPredictor", "BagPredictor",
    "SoftVoting", "HardVoting", "AdaptiveVoting", "FallbackPredictor",
    "mean_distribution", "plurality_winner", "dirac",
    "Term", "SourceTerm", "FunctionTerm", "SinkTerm", "DataStream", "StreamView",
    "DataItem", "END", "IterableSource", "Transform", "KeyFilter",
    "MergeByArrival", "CollectSink", "compose_sequential", "compose_parallel",
    "run_pipeline", "RunHandle", "PipelineError", "CompositionError",
    "StreamOwnershipError",
    "DatasetConfig", "DatasetError", "SplitSpec", "load_event_stream",
    "dataset_stats", "split_log", "stream_from_log",
    "EvalReport", "evaluate_batch", "evaluate_streaming", "run_batch_evaluation",
    "average_reports", "emit_report", "rows_from_events",
    "StartSymbolInjector", "PredictorTerm", "EvaluationTerm",
    "streaming_pipeline", "batch_pipeline",
    "ModelSpec", "ModelSpecError", "BatchModel",
    "build_streaming_predictor", "build_batch_model", "parse_compact_spec",
]
