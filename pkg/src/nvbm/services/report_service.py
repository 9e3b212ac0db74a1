"""Trace and pipeline statistics."""

from dataclasses import asdict, dataclass, field
from typing import Any

from nvbm.codegen.assembler import Program
from nvbm.commands.generator import command_stats
from nvbm.models.pydantic_models import Command, ModelMetadata, TraceBundle
from nvbm.sim.bus import MASTER_ORDER
from nvbm.sim.soc import SimResult
from nvbm.weights.image import MemoryImage


@dataclass
class TraceReport:
    """Counts describing one trace and the artifacts derived from it."""

    source: str = ""
    csb_writes: int = 0
    csb_reads: int = 0
    dbb_reads: int = 0
    dbb_writes: int = 0
    dbb_read_bytes: int = 0
    dbb_write_bytes: int = 0
    skipped_lines: int = 0
    polled_reads: int = 0
    image_base: int = 0
    image_bytes: int = 0
    image_span_bytes: int = 0
    excluded_bytes: int = 0
    program_instructions: int = 0
    status: str | None = None
    retired_instructions: int = 0
    grants: dict[str, int] = field(default_factory=lambda: {m.value: 0 for m in MASTER_ORDER})
    model: dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


def build_report(
    bundle: TraceBundle,
    commands: list[Command] | None = None,
    image: MemoryImage | None = None,
    excluded: frozenset[int] = frozenset(),
    program: Program | None = None,
    sim: SimResult | None = None,
    metadata: ModelMetadata | None = None,
) -> TraceReport:
    """Collect statistics from whichever pipeline products are available."""
    report = TraceReport(source=bundle.source, skipped_lines=bundle.skipped)
    report.csb_writes = sum(1 for tx in bundle.csb if tx.is_write)
    report.csb_reads = len(bundle.csb) - report.csb_writes
    for tx in bundle.dbb:
        if tx.is_write:
            report.dbb_writes += 1
            report.dbb_write_bytes += len(tx.payload)
        else:
            report.dbb_reads += 1
            report.dbb_read_bytes += len(tx.payload)
    if commands is not None:
        report.polled_reads = command_stats(commands).polled_reads
    if image is not None:
        report.image_base = image.base
        report.image_bytes = len(image)
        report.image_span_bytes = image.span_bytes
    report.excluded_bytes = len(excluded)
    if program is not None:
        report.program_instructions = len(program.words)
    if sim is not None:
        report.status = sim.status.value
        report.retired_instructions = sim.retired_instructions
        report.grants = {m.value: sim.bus_grants.get(m, 0) for m in MASTER_ORDER}
    if metadata is not None:
        report.model = metadata.model_dump(exclude_none=True)
    return report


def format_report(report: TraceReport) -> str:
    """Render a report as ``key = value`` lines in a fixed order."""
    lines: list[tuple[str, object]] = [
        ("source", report.source or "-"),
        ("csb_writes", report.csb_writes),
        ("csb_reads", report.csb_reads),
        ("dbb_reads", report.dbb_reads),
        ("dbb_writes", report.dbb_writes),
        ("dbb_read_bytes", report.dbb_read_bytes),
        ("dbb_write_bytes", report.dbb_write_bytes),
        ("skipped_lines", report.skipped_lines),
        ("polled_reads", report.polled_reads),
        ("image_base", f"0x{report.image_base:08x}"),
        ("image_bytes", report.image_bytes),
        ("image_span_bytes", report.image_span_bytes),
        ("excluded_bytes", report.excluded_bytes),
        ("program_instructions", report.program_instructions),
    ]
    if report.status is not None:
        lines.append(("status", report.status))
        lines.append(("retired_instructions", report.retired_instructions))
    lines.extend((f"grants.{name}", count) for name, count in report.grants.items())
    # Reference figures are echoed as given, never derived
    lines.extend((f"model.{key}", value) for key, value in report.model.items())
    return "".join(f"{key} = {value}\n" for key, value in lines)
