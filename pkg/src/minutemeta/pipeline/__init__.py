"""End-to-end extraction: stage composition and record assembly."""

from minutemeta.pipeline.extract import (
    PipelineConfig,
    assemble_record,
    batch_extract,
    extract,
    predict_region,
    run_ablation_no_mbd,
    write_records,
)
from minutemeta.pipeline.record import (
    MeetingType,
    MetadataRecord,
    Participant,
    Provenance,
    classify_meeting_type,
)

__all__ = [
    "MeetingType",
    "MetadataRecord",
    "Participant",
    "PipelineConfig",
    "Provenance",
    "assemble_record",
    "batch_extract",
    "classify_meeting_type",
    "extract",
    "predict_region",
    "run_ablation_no_mbd",
    "write_records",
]
