"""Metrics, error taxonomy, resource metering, and evaluation protocols."""

from minutemeta.evaluation.meter import (
    MeterAccumulator,
    ResourceMeter,
    ResourceReport,
    measure,
)
from minutemeta.evaluation.metrics import (
    EntityScores,
    PRF,
    entity_prf,
    entity_prf_corpus,
    normalize_text,
    normalize_tokens,
    squad_em,
    squad_f1,
)
from minutemeta.evaluation.protocols import (
    ProtocolRecipe,
    StageStack,
    evaluate_fold,
    run_global_eval,
    run_incremental,
    run_leave_one_out,
)
from minutemeta.evaluation.report import EvalReport
from minutemeta.evaluation.taxonomy import ErrorCounts, error_taxonomy, error_taxonomy_corpus

__all__ = [
    "EvalReport",
    "ProtocolRecipe",
    "StageStack",
    "evaluate_fold",
    "run_global_eval",
    "run_incremental",
    "run_leave_one_out",
    "EntityScores",
    "ErrorCounts",
    "MeterAccumulator",
    "PRF",
    "ResourceMeter",
    "ResourceReport",
    "entity_prf",
    "entity_prf_corpus",
    "error_taxonomy",
    "error_taxonomy_corpus",
    "measure",
    "normalize_text",
    "normalize_tokens",
    "squad_em",
    "squad_f1",
]
