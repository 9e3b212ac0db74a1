"""CLI interface for nvbm."""

import json
from collections.abc import Iterator
from contextlib import contextmanager
from pathlib import Path
from typing import Any

import typer
from pydantic import ValidationError
from rich.console import Console

from nvbm import __version__
from nvbm.codegen.assembler import assemble, disassemble
from nvbm.codegen.emitter import check_mailbox, emit_asm
from nvbm.commands.config_file import emit_config, parse_config
from nvbm.commands.generator import to_commands
from nvbm.commands.nvdla_trace import parse_nvdla_trace
from nvbm.config import Settings, configure_logging, load_map_config, load_model_metadata, load_trace_spec
from nvbm.errors import StageError
from nvbm.models.pydantic_models import (
    ArbiterPolicy,
    PipelineConfig,
    PollMode,
    SimStatus,
    SyntheticTraceSpec,
    TraceBundle,
    TraceShape,
)
from nvbm.services.pipeline_service import (
    PipelineService,
    codegen_options,
    poll_policy,
    resolve_rebase,
    stage,
)
from nvbm.services.report_service import build_report, format_report
from nvbm.sim.nvdla import script_from_commands
from nvbm.sim.soc import DbbReplayer, format_result, run
from nvbm.trace.parser import parse_log
from nvbm.trace.synthetic import gen_synthetic_trace
from nvbm.weights.builder import build_image
from nvbm.weights.writers import (
    BinMetadata,
    emit_bin,
    emit_mem,
    emit_program_bin,
    load_bin,
    program_from_mem,
)

app = typer.Typer(
    name="nvbm",
    help="NVDLA virtual-platform traces to bare-metal RISC-V programs, with a SoC simulator",
    add_completion=False,
)
# Diagnostics only; artifacts go to files and JSON to stdout
console = Console(stderr=True)


def output_json(data: Any) -> None:
    """Output JSON to stdout."""
    print(json.dumps(data, indent=2, ensure_ascii=False))


def version_callback(value: bool) -> None:
    """Print version and exit."""
    if value:
        print(f"nvbm version {__version__}")
        raise typer.Exit()


@app.callback()
def main(
    version: bool = typer.Option(
        None,
        "--version",
        "-v",
        help="Show version and exit.",
        callback=version_callback,
        is_eager=True,
    ),
) -> None:
    """NVDLA bare-metal toolchain."""
    try:
        settings = Settings()
    except ValidationError as e:
        console.print(f"[red]Invalid environment: {e.errors()[0]['msg']}[/red]")
        raise typer.Exit(2) from None
    configure_logging(settings.log, console)


@contextmanager
def _exit_on_failure() -> Iterator[None]:
    """Report a failed stage on stderr and exit 1."""
    try:
        yield
    except StageError as e:
        console.print(f"[red]error: stage {e.stage} failed: {e.cause}[/red]")
        raise typer.Exit(1) from e


def _addr(value: str | None, option: str) -> int | None:
    if value is None:
        return None
    try:
        return int(value, 0)
    except ValueError:
        raise typer.BadParameter(f"{value!r} is not an integer", param_hint=option) from None


def _addr_set(value: str | None) -> frozenset[int]:
    if not value:
        return frozenset()
    return frozenset(a for a in (_addr(v.strip(), "--listed") for v in value.split(",")) if a is not None)


def _write_text(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, newline="\n")


def _read_bundle(log: Path, lenient: bool) -> TraceBundle:
    """Read a VP log, or a trace.json written by ``parse``/``run``."""
    text = log.read_text()
    if log.suffix == ".json":
        return TraceBundle.model_validate_json(text)
    return parse_log(text, lenient=lenient, source=log.name)


MapOption = typer.Option(None, "--map", help="Memory-map configuration file.")
PollOption = typer.Option(PollMode.ALL, "--poll", help="Poll policy for register reads.")
ListedOption = typer.Option(None, "--listed", help="Comma-separated addresses polled under --poll listed.")
LenientOption = typer.Option(False, "--lenient", help="Skip malformed transaction lines.")
RebaseFromOption = typer.Option(None, "--rebase-from", help="VP base address of the DBB window.")
RebaseToOption = typer.Option(None, "--rebase-to", help="SoC DRAM address the VP base maps to.")
WatchdogOption = typer.Option(10_000_000, "--watchdog", min=1, help="Maximum retired instructions.")
ArbiterOption = typer.Option(ArbiterPolicy.ROUND_ROBIN, "--arbiter", help="DRAM arbiter policy.")


@app.command(name="run")
def run_pipeline(
    log: Path = typer.Argument(..., help="VP log file."),
    out: Path = typer.Option(..., "--out", "-o", help="Artifact output directory."),
    map_path: Path | None = MapOption,
    poll: PollMode = PollOption,
    listed: str | None = ListedOption,
    rebase_from: str | None = RebaseFromOption,
    rebase_to: str | None = RebaseToOption,
    watchdog: int = WatchdogOption,
    lenient: bool = LenientOption,
    replay: bool = typer.Option(True, "--replay/--no-replay", help="Replay DBB traffic during simulation."),
    arbiter: ArbiterPolicy = ArbiterOption,
    model_meta: Path | None = typer.Option(None, "--model-meta", help="Model metadata YAML for the report."),
    model_name: str | None = typer.Option(None, "--model", help="Entry of a multi-model metadata file."),
) -> None:
    """Run the whole flow: parse, generate, assemble, simulate, report."""
    config = PipelineConfig(
        log_path=str(log),
        out_dir=str(out),
        map_path=str(map_path) if map_path else None,
        model_meta_path=str(model_meta) if model_meta else None,
        model_name=model_name,
        poll_mode=poll,
        poll_listed=_addr_set(listed),
        rebase_from=_addr(rebase_from, "--rebase-from"),
        rebase_to=_addr(rebase_to, "--rebase-to"),
        watchdog=watchdog,
        lenient=lenient,
        replay=replay,
        arbiter=arbiter,
    )
    with _exit_on_failure():
        result = PipelineService(config).run()
    console.print(
        f"[green]{result.sim.status.value}[/green]: {len(result.sim.observed_writes)} register writes, "
        f"{result.sim.retired_instructions} instructions, artifacts in {out}"
    )


@app.command()
def report(
    log: Path = typer.Argument(..., help="VP log file or trace.json."),
    map_path: Path | None = MapOption,
    poll: PollMode = PollOption,
    lenient: bool = LenientOption,
    simulate: bool = typer.Option(False, "--simulate", help="Also simulate to report grants."),
    model_meta: Path | None = typer.Option(None, "--model-meta", help="Model metadata YAML to echo."),
    model_name: str | None = typer.Option(None, "--model", help="Entry of a multi-model metadata file."),
    json_output: bool = typer.Option(False, "--json", help="Output as JSON."),
) -> None:
    """Print trace and artifact statistics."""
    with _exit_on_failure():
        with stage("config"):
            map_config = load_map_config(map_path)
            metadata = load_model_metadata(model_meta, model_name) if model_meta else None
        with stage("parse"):
            bundle = _read_bundle(log, lenient)
        with stage("gen-config"):
            commands = to_commands(bundle.csb, poll_policy(poll, frozenset(), map_config))
        with stage("gen-weights"):
            rebase = resolve_rebase(bundle.dbb, map_config)
            image, excluded = build_image(bundle.dbb, rebase, map_config.memory_map)
        with stage("assemble"):
            opts = codegen_options(map_config)
            program = assemble(emit_asm(commands, map_config.memory_map, opts), opts.origin)
        sim = None
        if simulate:
            with stage("simulate"):
                sim = run(program, image, map_config.memory_map, script_from_commands(commands), opts=opts)
        stats = build_report(bundle, commands, image, excluded, program, sim, metadata)

    if json_output:
        output_json(stats.to_dict())
    else:
        print(format_report(stats), end="")


@app.command(name="gen-trace")
def gen_trace(
    out: Path = typer.Argument(..., help="Log file to write."),
    spec: Path | None = typer.Option(None, "--spec", help="YAML trace recipe; flags are ignored when given."),
    csb_writes: int = typer.Option(3, "--csb-writes", min=0),
    csb_reads: int = typer.Option(1, "--csb-reads", min=0),
    dbb_reads: int = typer.Option(0, "--dbb-reads", min=0),
    dbb_writes: int = typer.Option(0, "--dbb-writes", min=0),
    chatter: int = typer.Option(0, "--chatter", min=0, help="Unrelated log lines to mix in."),
    shape: TraceShape = typer.Option(TraceShape.SANITY, "--shape"),
    seed: int = typer.Option(0, "--seed", min=0),
) -> None:
    """Write a deterministic synthetic VP log."""
    with _exit_on_failure(), stage("gen-trace"):
        if spec is not None:
            trace_spec = load_trace_spec(spec)
        else:
            trace_spec = SyntheticTraceSpec(
                csb_writes=csb_writes,
                csb_reads=csb_reads,
                dbb_reads=dbb_reads,
                dbb_writes=dbb_writes,
                chatter_lines=chatter,
                shape=shape,
                seed=seed,
            )
        text, bundle = gen_synthetic_trace(trace_spec)
        _write_text(out, text)
    console.print(f"wrote {len(bundle.csb)} CSB and {len(bundle.dbb)} DBB transactions to {out}")


@app.command()
def parse(
    log: Path = typer.Argument(..., help="VP log file."),
    out: Path | None = typer.Option(None, "--out", "-o", help="trace.json to write."),
    lenient: bool = LenientOption,
    json_output: bool = typer.Option(False, "--json", help="Also print the bundle as JSON."),
) -> None:
    """Parse a VP log into CSB and DBB transactions."""
    with _exit_on_failure(), stage("parse"):
        bundle = parse_log(log.read_text(), lenient=lenient, source=log.name)
        if out is not None:
            _write_text(out, bundle.model_dump_json(indent=2) + "\n")
    if json_output:
        output_json(bundle.model_dump(mode="json"))
    console.print(f"{len(bundle.csb)} CSB, {len(bundle.dbb)} DBB transactions, {bundle.skipped} lines skipped")


@app.command(name="gen-config")
def gen_config(
    log: Path = typer.Argument(..., help="VP log file or trace.json."),
    out: Path = typer.Option(..., "--out", "-o", help="Configuration file to write."),
    map_path: Path | None = MapOption,
    poll: PollMode = PollOption,
    listed: str | None = ListedOption,
    lenient: bool = LenientOption,
) -> None:
    """Generate the write_reg/read_reg configuration file."""
    with _exit_on_failure():
        with stage("config"):
            map_config = load_map_config(map_path)
        with stage("parse"):
            bundle = _read_bundle(log, lenient)
        with stage("gen-config"):
            commands = to_commands(bundle.csb, poll_policy(poll, _addr_set(listed), map_config))
            _write_text(out, emit_config(commands))
    console.print(f"wrote {len(commands)} commands to {out}")


@app.command(name="import-trace")
def import_trace(
    trace: Path = typer.Argument(..., help="NVDLA test trace (input.txn)."),
    out: Path = typer.Option(..., "--out", "-o", help="Configuration file to write."),
    strip_base: str = typer.Option("0x0", "--strip-base", help="Subtracted from every register address."),
) -> None:
    """Convert an NVDLA test trace into a configuration file."""
    base = _addr(strip_base, "--strip-base") or 0
    with _exit_on_failure(), stage("gen-config"):
        imported = parse_nvdla_trace(trace.read_text(), base)
        _write_text(out, emit_config(imported.commands))
    console.print(f"wrote {len(imported.commands)} commands to {out}, skipped {len(imported.skipped)} lines")


@app.command(name="gen-weights")
def gen_weights(
    log: Path = typer.Argument(..., help="VP log file or trace.json."),
    out: Path = typer.Option(..., "--out", "-o", help=".bin file; .meta and .mem are written beside it."),
    map_path: Path | None = MapOption,
    rebase_from: str | None = RebaseFromOption,
    rebase_to: str | None = RebaseToOption,
    lenient: bool = LenientOption,
) -> None:
    """Build the DRAM preload image from DBB transactions."""
    from_addr = _addr(rebase_from, "--rebase-from")
    to_addr = _addr(rebase_to, "--rebase-to")
    with _exit_on_failure():
        with stage("config"):
            map_config = load_map_config(map_path)
        with stage("parse"):
            bundle = _read_bundle(log, lenient)
        with stage("gen-weights"):
            rebase = resolve_rebase(bundle.dbb, map_config, from_addr, to_addr)
            image, excluded = build_image(bundle.dbb, rebase, map_config.memory_map)
            data, meta = emit_bin(image)
            out.parent.mkdir(parents=True, exist_ok=True)
            out.write_bytes(data)
            _write_text(out.with_suffix(".meta"), meta.to_text())
            _write_text(out.with_suffix(".mem"), emit_mem(image))
    console.print(f"image: {len(image)} bytes at 0x{image.base:08x}, {len(excluded)} bytes excluded")


@app.command(name="gen-asm")
def gen_asm(
    config_file: Path = typer.Argument(..., help="Configuration file."),
    out: Path = typer.Option(..., "--out", "-o", help="Assembly file to write."),
    map_path: Path | None = MapOption,
) -> None:
    """Generate RV32I assembly from a configuration file."""
    with _exit_on_failure():
        with stage("config"):
            map_config = load_map_config(map_path)
        with stage("gen-config"):
            commands = parse_config(config_file.read_text())
        with stage("gen-asm"):
            _write_text(out, emit_asm(commands, map_config.memory_map, codegen_options(map_config)))
    console.print(f"wrote program for {len(commands)} commands to {out}")


@app.command(name="assemble")
def assemble_cmd(
    source: Path = typer.Argument(..., help="Assembly source."),
    out: Path = typer.Option(..., "--out", "-o", help=".mem file to write."),
    bin_out: Path | None = typer.Option(None, "--bin", help="Also write raw program words."),
    origin: str = typer.Option("0x0", "--origin", help="Program memory address of the first word."),
) -> None:
    """Assemble a source file into a .mem image."""
    origin_addr = _addr(origin, "--origin") or 0
    with _exit_on_failure(), stage("assemble"):
        program = assemble(source.read_text(), origin_addr)
        _write_text(out, emit_mem(program))
        if bin_out is not None:
            bin_out.write_bytes(emit_program_bin(program))
    console.print(f"assembled {len(program.words)} instructions to {out}")


@app.command(name="disassemble")
def disassemble_cmd(
    mem: Path = typer.Argument(..., help="Program .mem file."),
    out: Path = typer.Option(..., "--out", "-o", help="Assembly file to write."),
) -> None:
    """Disassemble a program .mem file into canonical source."""
    with _exit_on_failure(), stage("disassemble"):
        program = program_from_mem(mem.read_text())
        _write_text(out, disassemble(program))
    console.print(f"disassembled {len(program.words)} instructions to {out}")


@app.command()
def simulate(
    program_mem: Path = typer.Argument(..., help="Program .mem file."),
    out: Path = typer.Option(..., "--out", "-o", help="Result report to write."),
    weights: Path | None = typer.Option(None, "--weights", help="DRAM preload .bin (with .meta beside it)."),
    config_file: Path | None = typer.Option(None, "--config", help="Configuration file answering register reads."),
    trace: Path | None = typer.Option(None, "--trace", help="Log or trace.json whose DBB traffic is replayed."),
    map_path: Path | None = MapOption,
    watchdog: int = WatchdogOption,
    delay: int = typer.Option(0, "--delay", min=0, help="Not-ready reads before each register answer."),
    arbiter: ArbiterPolicy = ArbiterOption,
    rebase_from: str | None = RebaseFromOption,
    rebase_to: str | None = RebaseToOption,
) -> None:
    """Run a program on the SoC model."""
    from_addr = _addr(rebase_from, "--rebase-from")
    to_addr = _addr(rebase_to, "--rebase-to")
    with _exit_on_failure():
        with stage("config"):
            map_config = load_map_config(map_path)
            opts = codegen_options(map_config)
        with stage("simulate"):
            program = program_from_mem(program_mem.read_text())
            image = None
            if weights is not None:
                meta = BinMetadata.from_text(weights.with_suffix(".meta").read_text())
                image = load_bin(weights.read_bytes(), meta)
                check_mailbox(opts, map_config.memory_map, (image.base, image.limit))
            commands = parse_config(config_file.read_text()) if config_file is not None else []
            replayer = None
            if trace is not None:
                dbb = _read_bundle(trace, lenient=False).dbb
                rebase = resolve_rebase(dbb, map_config, from_addr, to_addr)
                replayer = DbbReplayer(dbb, rebase)
            result = run(
                program,
                image,
                map_config.memory_map,
                script_from_commands(commands, delay=delay),
                watchdog=watchdog,
                policy=arbiter,
                opts=opts,
                replay=replayer,
            )
            _write_text(out, format_result(result))

    console.print(f"{result.status.value} after {result.retired_instructions} instructions")
    if result.status is not SimStatus.SUCCESS:
        console.print(f"[red]error: stage simulate failed: {result.detail or result.status.value}[/red]")
        raise typer.Exit(1)
    if result.replay is not None and not result.replay.ok:
        console.print(f"[red]error: stage replay failed: {len(result.replay.mismatches)} mismatches[/red]")
        raise typer.Exit(1)


if __name__ == "__main__":
    app()
