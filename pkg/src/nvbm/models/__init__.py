"""Data models for the nvbm toolchain."""

from nvbm.models.pydantic_models import (
    MASK32,
    AddressRebase,
    ArbiterPolicy,
    ArbiterState,
    CodegenOptions,
    Command,
    CommandKind,
    CsbTransaction,
    DbbTransaction,
    MapConfig,
    MasterId,
    MemoryMap,
    ModelMetadata,
    PipelineConfig,
    PollMode,
    PollPolicy,
    Region,
    SimStatus,
    SyntheticTraceSpec,
    TraceBundle,
    TraceShape,
)

__all__ = [
    "MASK32",
    "AddressRebase",
    "ArbiterPolicy",
    "ArbiterState",
    "CodegenOptions",
    "Command",
    "CommandKind",
    "CsbTransaction",
    "DbbTransaction",
    "MapConfig",
    "MasterId",
    "MemoryMap",
    "ModelMetadata",
    "PipelineConfig",
    "PollMode",
    "PollPolicy",
    "Region",
    "SimStatus",
    "SyntheticTraceSpec",
    "TraceBundle",
    "TraceShape",
]
