"""Integration tests for CLI commands."""

import json
from pathlib import Path

import pytest
from typer.testing import CliRunner

from nvbm.cli import app

FIXTURES = Path(__file__).parent.parent / "fixtures"
SANITY_LOG = FIXTURES / "sanity.log"
SANITY_TXN = FIXTURES / "sanity.txn"
GOLDEN = FIXTURES / "sanity"

GOLDEN_FILES = [
    "config.cfg",
    "program.s",
    "program.mem",
    "program.bin",
    "weights.bin",
    "weights.meta",
    "weights.mem",
    "result.txt",
]


@pytest.fixture
def runner() -> CliRunner:
    """Create a CLI test runner."""
    return CliRunner()


@pytest.fixture(autouse=True)
def quiet_logging(monkeypatch: pytest.MonkeyPatch) -> None:
    """Keep diagnostics off regardless of the caller's environment."""
    monkeypatch.delenv("NVBM_LOG", raising=False)


class TestVersionOption:
    """Tests for --version option."""

    def test_version_flag(self, runner: CliRunner) -> None:
        """--version should show version and exit."""
        result = runner.invoke(app, ["--version"])

        assert result.exit_code == 0
        assert "nvbm version" in result.output


class TestHelpOption:
    """Tests for --help option."""

    def test_help_shows_available_commands(self, runner: CliRunner) -> None:
        """--help should list every pipeline stage."""
        result = runner.invoke(app, ["--help"])

        assert result.exit_code == 0
        for command in [
            "run",
            "report",
            "gen-trace",
            "parse",
            "gen-config",
            "import-trace",
            "gen-weights",
            "gen-asm",
            "assemble",
            "disassemble",
            "simulate",
        ]:
            assert command in result.output

    def test_invalid_log_level(self, runner: CliRunner, monkeypatch: pytest.MonkeyPatch) -> None:
        """An unknown NVBM_LOG value is a usage error."""
        monkeypatch.setenv("NVBM_LOG", "loud")

        result = runner.invoke(app, ["parse", str(SANITY_LOG)])

        assert result.exit_code == 2


class TestRunCommand:
    """Tests for the end-to-end run command."""

    def test_sanity_matches_golden_artifacts(self, runner: CliRunner, tmp_path: Path) -> None:
        """Every artifact of the sanity trace should be byte-identical to the goldens."""
        out = tmp_path / "out"

        result = runner.invoke(app, ["run", str(SANITY_LOG), "-o", str(out)])

        assert result.exit_code == 0, result.output
        for name in GOLDEN_FILES:
            assert (out / name).read_bytes() == (GOLDEN / name).read_bytes(), name
        assert (out / "trace.json").exists()
        assert (out / "report.txt").exists()

    def test_runs_are_deterministic(self, runner: CliRunner, tmp_path: Path) -> None:
        """Two runs on the same input produce identical files."""
        first, second = tmp_path / "a", tmp_path / "b"

        runner.invoke(app, ["run", str(SANITY_LOG), "-o", str(first)])
        runner.invoke(app, ["run", str(SANITY_LOG), "-o", str(second)])

        names = sorted(p.name for p in first.iterdir())
        assert names == sorted(p.name for p in second.iterdir())
        for name in names:
            assert (first / name).read_bytes() == (second / name).read_bytes(), name

    def test_empty_log_succeeds(self, runner: CliRunner, tmp_path: Path) -> None:
        """An empty log yields a program that only reports success."""
        log = tmp_path / "empty.log"
        log.write_text("")
        out = tmp_path / "out"

        result = runner.invoke(app, ["run", str(log), "-o", str(out)])

        assert result.exit_code == 0, result.output
        assert (out / "config.cfg").read_text() == ""
        assert (out / "weights.bin").read_bytes() == b""
        assert "status = success\n" in (out / "result.txt").read_text()

    def test_malformed_log_fails_in_parse(self, runner: CliRunner, tmp_path: Path) -> None:
        """A malformed line aborts strict parsing with exit 1."""
        log = tmp_path / "bad.log"
        log.write_text("nvdla.csb_adaptor: garbage\n")

        result = runner.invoke(app, ["run", str(log), "-o", str(tmp_path / "out")])

        assert result.exit_code == 1
        assert "parse" in result.output

    def test_lenient_skips_malformed_lines(self, runner: CliRunner, tmp_path: Path) -> None:
        """--lenient runs past malformed lines."""
        log = tmp_path / "bad.log"
        log.write_text(SANITY_LOG.read_text() + "nvdla.csb_adaptor: garbage\n")
        out = tmp_path / "out"

        result = runner.invoke(app, ["run", str(log), "-o", str(out), "--lenient"])

        assert result.exit_code == 0, result.output
        assert "skipped_lines = 1\n" in (out / "report.txt").read_text()

    def test_watchdog_failure_names_simulate(self, runner: CliRunner, tmp_path: Path) -> None:
        """A watchdog expiry fails the simulate stage and keeps the result file."""
        out = tmp_path / "out"

        result = runner.invoke(app, ["run", str(SANITY_LOG), "-o", str(out), "--watchdog", "5"])

        assert result.exit_code == 1
        assert "simulate" in result.output
        assert "status = watchdog_expired\n" in (out / "result.txt").read_text()

    def test_model_metadata_in_report(self, runner: CliRunner, tmp_path: Path) -> None:
        """Model metadata is echoed into report.txt."""
        meta = tmp_path / "lenet.yaml"
        meta.write_text("name: LeNet-5\nmodel_size: 1.7 MB\n")
        out = tmp_path / "out"

        result = runner.invoke(app, ["run", str(SANITY_LOG), "-o", str(out), "--model-meta", str(meta)])

        assert result.exit_code == 0, result.output
        assert "model.model_size = 1.7 MB\n" in (out / "report.txt").read_text()

    def test_run_with_named_model(self, runner: CliRunner, tmp_path: Path) -> None:
        """run --model selects the report's metadata entry."""
        meta = tmp_path / "models.yaml"
        meta.write_text("models:\n  - name: LeNet-5\n  - name: ResNet-18\n    model_size: 44.7 MB\n")
        out = tmp_path / "out"

        result = runner.invoke(
            app, ["run", str(SANITY_LOG), "-o", str(out), "--model-meta", str(meta), "--model", "ResNet-18"]
        )

        assert result.exit_code == 0, result.output
        report_text = (out / "report.txt").read_text()
        assert "model.name = ResNet-18\n" in report_text
        assert "model.model_size = 44.7 MB\n" in report_text

    def test_bad_rebase_value_is_usage_error(self, runner: CliRunner, tmp_path: Path) -> None:
        """Non-numeric addresses are rejected before any stage runs."""
        result = runner.invoke(
            app, ["run", str(SANITY_LOG), "-o", str(tmp_path / "out"), "--rebase-to", "dram"]
        )

        assert result.exit_code == 2


class TestStageCommands:
    """Tests running the stages one command at a time."""

    def test_stages_compose_to_golden(self, runner: CliRunner, tmp_path: Path) -> None:
        """Chaining the stage commands reproduces the run artifacts."""
        steps = [
            ["parse", str(SANITY_LOG), "-o", str(tmp_path / "trace.json")],
            ["gen-config", str(tmp_path / "trace.json"), "-o", str(tmp_path / "config.cfg")],
            ["gen-weights", str(tmp_path / "trace.json"), "-o", str(tmp_path / "weights.bin")],
            ["gen-asm", str(tmp_path / "config.cfg"), "-o", str(tmp_path / "program.s")],
            [
                "assemble",
                str(tmp_path / "program.s"),
                "-o",
                str(tmp_path / "program.mem"),
                "--bin",
                str(tmp_path / "program.bin"),
            ],
            [
                "simulate",
                str(tmp_path / "program.mem"),
                "-o",
                str(tmp_path / "result.txt"),
                "--weights",
                str(tmp_path / "weights.bin"),
                "--config",
                str(tmp_path / "config.cfg"),
                "--trace",
                str(tmp_path / "trace.json"),
            ],
        ]

        for args in steps:
            result = runner.invoke(app, args)
            assert result.exit_code == 0, f"{args[0]}: {result.output}"

        for name in GOLDEN_FILES:
            assert (tmp_path / name).read_bytes() == (GOLDEN / name).read_bytes(), name

    def test_imported_trace_simulates(self, runner: CliRunner, tmp_path: Path) -> None:
        """An NVDLA test trace imports, assembles and runs to success."""
        config = tmp_path / "config.cfg"
        steps = [
            ["import-trace", str(SANITY_TXN), "-o", str(config), "--strip-base", "0xffff0000"],
            ["gen-asm", str(config), "-o", str(tmp_path / "program.s")],
            ["assemble", str(tmp_path / "program.s"), "-o", str(tmp_path / "program.mem")],
            ["simulate", str(tmp_path / "program.mem"), "-o", str(tmp_path / "result.txt"), "--config", str(config)],
        ]

        for args in steps:
            result = runner.invoke(app, args)
            assert result.exit_code == 0, f"{args[0]}: {result.output}"

        assert config.read_text().splitlines() == [
            "write_reg 0x00003004 0x00000001",
            "write_reg 0x0000500c 0x00000800",
            "read_reg 0x0000000c 0x00000001 0xffffffff once",
            "read_reg 0x00005010 0x00001200 0x0000ff00 poll",
            "read_reg 0x00003004 0x00000001 0xffffffff poll",
        ]
        result_text = (tmp_path / "result.txt").read_text()
        assert "status = success\n" in result_text
        assert "observed_writes = 2\n" in result_text

    def test_import_trace_unknown_command_fails(self, runner: CliRunner, tmp_path: Path) -> None:
        """An unknown trace command fails with its line number."""
        trace = tmp_path / "bad.txn"
        trace.write_text("write_reg 0x4 0x1\nreg_poke 0x4 0x1\n")

        result = runner.invoke(app, ["import-trace", str(trace), "-o", str(tmp_path / "config.cfg")])

        assert result.exit_code == 1
        assert "line 2" in result.output

    def test_parse_json_output(self, runner: CliRunner) -> None:
        """parse --json prints the bundle."""
        result = runner.invoke(app, ["parse", str(SANITY_LOG), "--json"])

        assert result.exit_code == 0
        data = json.loads(result.stdout[: result.stdout.rindex("}") + 1])
        assert len(data["csb"]) == 4
        assert data["dbb"][0]["payload"] == "8877665544332211"

    def test_gen_trace_defaults_to_sanity_shape(self, runner: CliRunner, tmp_path: Path) -> None:
        """gen-trace writes a parseable log of writes then a read."""
        from nvbm.trace.parser import parse_log

        log = tmp_path / "synthetic.log"

        result = runner.invoke(app, ["gen-trace", str(log), "--seed", "42"])

        assert result.exit_code == 0
        bundle = parse_log(log.read_text())
        assert [tx.is_write for tx in bundle.csb] == [True, True, True, False]

    def test_gen_trace_from_recipe(self, runner: CliRunner, tmp_path: Path) -> None:
        """A YAML recipe drives gen-trace."""
        from nvbm.trace.parser import parse_log

        recipe = tmp_path / "recipe.yaml"
        recipe.write_text("csb_writes: 5\ndbb_reads: 2\nseed: 3\n")
        log = tmp_path / "synthetic.log"

        result = runner.invoke(app, ["gen-trace", str(log), "--spec", str(recipe)])

        assert result.exit_code == 0
        bundle = parse_log(log.read_text())
        assert (len(bundle.csb), len(bundle.dbb)) == (5, 2)

    def test_assemble_disassemble_round_trip(self, runner: CliRunner, tmp_path: Path) -> None:
        """Disassembled output reassembles to the same .mem."""
        first = tmp_path / "first.mem"
        source = tmp_path / "round.s"
        second = tmp_path / "second.mem"

        runner.invoke(app, ["assemble", str(GOLDEN / "program.s"), "-o", str(first)])
        runner.invoke(app, ["disassemble", str(first), "-o", str(source)])
        result = runner.invoke(app, ["assemble", str(source), "-o", str(second)])

        assert result.exit_code == 0
        assert second.read_text() == first.read_text() == (GOLDEN / "program.mem").read_text()

    def test_assemble_error_names_stage(self, runner: CliRunner, tmp_path: Path) -> None:
        """Assembly errors exit 1 and name the stage."""
        source = tmp_path / "bad.s"
        source.write_text("nop\n")

        result = runner.invoke(app, ["assemble", str(source), "-o", str(tmp_path / "bad.mem")])

        assert result.exit_code == 1
        assert "assemble" in result.output


class TestSimulateCommand:
    """Tests for the simulate command."""

    def test_watchdog_zero_is_usage_error(self, runner: CliRunner, tmp_path: Path) -> None:
        """--watchdog must be positive."""
        result = runner.invoke(
            app,
            ["simulate", str(GOLDEN / "program.mem"), "-o", str(tmp_path / "r.txt"), "--watchdog", "0"],
        )

        assert result.exit_code == 2

    def test_delayed_register_still_succeeds(self, runner: CliRunner, tmp_path: Path) -> None:
        """Polling absorbs not-ready register reads."""
        out = tmp_path / "result.txt"

        result = runner.invoke(
            app,
            [
                "simulate",
                str(GOLDEN / "program.mem"),
                "-o",
                str(out),
                "--config",
                str(GOLDEN / "config.cfg"),
                "--delay",
                "5",
            ],
        )

        assert result.exit_code == 0, result.output
        assert "stalled_reads = 5\n" in out.read_text()

    def test_missing_script_fails(self, runner: CliRunner, tmp_path: Path) -> None:
        """Without a config the register read has no answer."""
        out = tmp_path / "result.txt"

        result = runner.invoke(app, ["simulate", str(GOLDEN / "program.mem"), "-o", str(out)])

        assert result.exit_code == 1
        assert "simulate" in result.output
        assert "status = script_mismatch\n" in out.read_text()


class TestReportCommand:
    """Tests for the report command."""

    def test_sanity_counts(self, runner: CliRunner) -> None:
        """The sanity trace statistics are printed to stdout."""
        result = runner.invoke(app, ["report", str(SANITY_LOG)])

        assert result.exit_code == 0
        for line in [
            "csb_writes = 3",
            "csb_reads = 1",
            "dbb_reads = 2",
            "dbb_writes = 1",
            "dbb_read_bytes = 16",
            "dbb_write_bytes = 8",
            "polled_reads = 1",
            "image_bytes = 16",
            "excluded_bytes = 8",
            "program_instructions = 36",
        ]:
            assert line in result.stdout.splitlines()
        assert "status" not in result.stdout

    def test_json_output(self, runner: CliRunner) -> None:
        """--json emits the report as a JSON object."""
        result = runner.invoke(app, ["report", str(SANITY_LOG), "--json"])

        assert result.exit_code == 0
        data = json.loads(result.stdout)
        assert data["csb_writes"] == 3
        assert data["image_base"] == 0x10_0000

    def test_simulate_adds_status(self, runner: CliRunner) -> None:
        """--simulate reports the simulation status."""
        result = runner.invoke(app, ["report", str(SANITY_LOG), "--simulate"])

        assert result.exit_code == 0
        assert "status = success" in result.stdout.splitlines()

    def test_named_model(self, runner: CliRunner, tmp_path: Path) -> None:
        """--model selects one entry of a metadata list."""
        meta = tmp_path / "models.yaml"
        meta.write_text("models:\n  - name: LeNet-5\n  - name: ResNet-50\n    input_size: 3x224x224\n")

        result = runner.invoke(
            app, ["report", str(SANITY_LOG), "--model-meta", str(meta), "--model", "ResNet-50"]
        )

        assert result.exit_code == 0
        assert "model.input_size = 3x224x224" in result.stdout.splitlines()
