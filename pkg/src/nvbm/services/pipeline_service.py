"""Service layer for the log-to-simulation pipeline."""

import logging
from collections.abc import Iterator
from contextlib import contextmanager
from dataclasses import dataclass
from pathlib import Path

from nvbm.codegen.assembler import Program, assemble
from nvbm.codegen.emitter import check_mailbox, emit_asm
from nvbm.commands.config_file import emit_config
from nvbm.commands.generator import to_commands
from nvbm.config import load_map_config, load_model_metadata
from nvbm.errors import SimulationError, StageError
from nvbm.models.pydantic_models import (
    AddressRebase,
    CodegenOptions,
    Command,
    DbbTransaction,
    MapConfig,
    ModelMetadata,
    PipelineConfig,
    PollMode,
    PollPolicy,
    SimStatus,
    TraceBundle,
)
from nvbm.services.report_service import build_report, format_report
from nvbm.sim.nvdla import script_from_commands
from nvbm.sim.soc import DbbReplayer, SimResult, format_result, run
from nvbm.trace.parser import parse_log
from nvbm.weights.builder import DEFAULT_REBASE_WINDOW, build_image, default_rebase
from nvbm.weights.image import MemoryImage
from nvbm.weights.writers import emit_bin, emit_mem, emit_program_bin

logger = logging.getLogger(__name__)

# Artifact file names inside the output directory
TRACE_FILE = "trace.json"
CONFIG_FILE = "config.cfg"
WEIGHTS_BIN = "weights.bin"
WEIGHTS_META = "weights.meta"
WEIGHTS_MEM = "weights.mem"
PROGRAM_ASM = "program.s"
PROGRAM_MEM = "program.mem"
PROGRAM_BIN = "program.bin"
RESULT_FILE = "result.txt"
REPORT_FILE = "report.txt"


@contextmanager
def stage(name: str) -> Iterator[None]:
    """Attribute any failure inside the block to pipeline stage ``name``."""
    logger.info("stage %s", name)
    try:
        yield
    except StageError:
        raise
    except Exception as e:
        raise StageError(name, e) from e


def poll_policy(mode: PollMode, listed: frozenset[int], map_config: MapConfig) -> PollPolicy:
    return PollPolicy(
        mode=mode,
        listed=listed if mode is PollMode.LISTED else frozenset(),
        masks=map_config.masks,
    )


def resolve_rebase(
    dbb: list[DbbTransaction],
    map_config: MapConfig,
    rebase_from: int | None = None,
    rebase_to: int | None = None,
) -> AddressRebase:
    """Combine command-line, map-file and trace-derived rebase settings.

    Explicit values win over the map file; the lowest DBB address and the
    DRAM start fill in whatever is left.

    Raises:
        ValueError: The resulting window does not fit in DRAM.
    """
    memory_map = map_config.memory_map
    derived = default_rebase(dbb, memory_map)
    from_base = rebase_from if rebase_from is not None else map_config.rebase_from
    to_base = rebase_to if rebase_to is not None else map_config.rebase_to
    to_base = to_base if to_base is not None else memory_map.dram_start
    window = map_config.rebase_window or min(DEFAULT_REBASE_WINDOW, memory_map.dram_end + 1 - to_base)
    rebase = AddressRebase(
        from_base=from_base if from_base is not None else derived.from_base,
        to_base=to_base,
        window=window,
    )
    rebase.check_against(memory_map)
    return rebase


def codegen_options(map_config: MapConfig) -> CodegenOptions:
    return CodegenOptions(result_addr=map_config.result_addr)


@dataclass
class PipelineResult:
    """Products of one pipeline run."""

    out_dir: Path
    bundle: TraceBundle
    commands: list[Command]
    image: MemoryImage
    excluded: frozenset[int]
    program: Program
    sim: SimResult
    report_text: str

    @property
    def ok(self) -> bool:
        replay_ok = self.sim.replay is None or self.sim.replay.ok
        return self.sim.status is SimStatus.SUCCESS and replay_ok


class PipelineService:
    """Runs every stage from VP log to simulation and writes the artifacts.

    Stage names used in errors: config, parse, gen-config, gen-weights,
    gen-asm, assemble, simulate, replay, report.
    """

    def __init__(self, config: PipelineConfig) -> None:
        self._config = config
        self._out = Path(config.out_dir)

    def _write(self, name: str, content: str | bytes) -> None:
        path = self._out / name
        if isinstance(content, bytes):
            path.write_bytes(content)
        else:
            path.write_text(content, newline="\n")

    def run(self) -> PipelineResult:
        """Execute the pipeline.

        Returns:
            PipelineResult whose ``ok`` is True.

        Raises:
            StageError: Naming the first failing stage. Artifacts of earlier
                stages, and the result files of a failed simulation, are
                still written.
        """
        cfg = self._config
        with stage("config"):
            map_config = load_map_config(Path(cfg.map_path) if cfg.map_path else None)
            metadata: ModelMetadata | None = None
            if cfg.model_meta_path:
                metadata = load_model_metadata(Path(cfg.model_meta_path), cfg.model_name)
            self._out.mkdir(parents=True, exist_ok=True)
        memory_map = map_config.memory_map

        with stage("parse"):
            log_path = Path(cfg.log_path)
            bundle = parse_log(log_path.read_text(), lenient=cfg.lenient, source=log_path.name)
            self._write(TRACE_FILE, bundle.model_dump_json(indent=2) + "\n")

        with stage("gen-config"):
            commands = to_commands(bundle.csb, poll_policy(cfg.poll_mode, cfg.poll_listed, map_config))
            self._write(CONFIG_FILE, emit_config(commands))

        with stage("gen-weights"):
            rebase = resolve_rebase(bundle.dbb, map_config, cfg.rebase_from, cfg.rebase_to)
            image, excluded = build_image(bundle.dbb, rebase, memory_map)
            data, bin_meta = emit_bin(image)
            self._write(WEIGHTS_BIN, data)
            self._write(WEIGHTS_META, bin_meta.to_text())
            self._write(WEIGHTS_MEM, emit_mem(image))

        with stage("gen-asm"):
            opts = codegen_options(map_config)
            check_mailbox(opts, memory_map, (image.base, image.limit))
            asm = emit_asm(commands, memory_map, opts)
            self._write(PROGRAM_ASM, asm)

        with stage("assemble"):
            program = assemble(asm, origin=opts.origin)
            self._write(PROGRAM_MEM, emit_mem(program))
            self._write(PROGRAM_BIN, emit_program_bin(program))

        with stage("simulate"):
            replayer = DbbReplayer(bundle.dbb, rebase) if cfg.replay else None
            sim = run(
                program,
                image,
                memory_map,
                script_from_commands(commands),
                watchdog=cfg.watchdog,
                policy=cfg.arbiter,
                opts=opts,
                replay=replayer,
            )
            self._write(RESULT_FILE, format_result(sim))

        with stage("report"):
            report_text = format_report(
                build_report(bundle, commands, image, excluded, program, sim, metadata)
            )
            self._write(REPORT_FILE, report_text)

        with stage("simulate"):
            if sim.status is not SimStatus.SUCCESS:
                raise SimulationError(f"status {sim.status.value}" + (f": {sim.detail}" if sim.detail else ""))
        with stage("replay"):
            if sim.replay is not None and not sim.replay.ok:
                first = sim.replay.mismatches[0]
                raise SimulationError(
                    f"{len(sim.replay.mismatches)} DBB reads mismatch, first at seq {first.seq} addr 0x{first.addr:x}"
                )

        logger.info("pipeline finished: %s", sim.status.value)
        return PipelineResult(
            out_dir=self._out,
            bundle=bundle,
            commands=commands,
            image=image,
            excluded=excluded,
            program=program,
            sim=sim,
            report_text=report_text,
        )
