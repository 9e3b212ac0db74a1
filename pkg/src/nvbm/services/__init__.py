"""Service layer: pipeline orchestration and reporting."""

from nvbm.services.pipeline_service import PipelineResult, PipelineService
from nvbm.services.report_service import TraceReport, build_report, format_report

__all__ = [
    "PipelineResult",
    "PipelineService",
    "TraceReport",
    "build_report",
    "format_report",
]
