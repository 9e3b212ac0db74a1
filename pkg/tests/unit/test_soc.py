"""Unit tests for the CPU, scripted NVDLA and SoC run loop."""

import random

import pytest

from nvbm.codegen.assembler import Program, assemble
from nvbm.codegen.emitter import emit_asm
from nvbm.commands.generator import to_commands
from nvbm.errors import ScriptMismatch
from nvbm.models.pydantic_models import (
    DEFAULT_FAILURE_CODE,
    DEFAULT_SUCCESS_CODE,
    AddressRebase,
    ArbiterPolicy,
    Command,
    CsbTransaction,
    DbbTransaction,
    MasterId,
    MemoryMap,
    SimStatus,
)
from nvbm.sim.bus import SystemBus
from nvbm.sim.cpu import Cpu
from nvbm.sim.dram import Dram
from nvbm.sim.nvdla import ScriptedNvdla, ScriptEntry, not_ready_value, script_from_commands
from nvbm.sim.soc import DbbReplayer, Soc, format_result, replay_dbb, run
from nvbm.weights.builder import DEFAULT_REBASE_WINDOW, build_image
from nvbm.weights.image import MemoryImage

VP_BASE = 0xC000_0000
REBASE = AddressRebase(from_base=VP_BASE, to_base=0x10_0000, window=DEFAULT_REBASE_WINDOW)

SUCCESS_TAIL = (
    "lui x5, 0x20100\n"
    "addi x5, x5, -0x10\n"
    "lui x6, 0x600d6\n"
    "addi x6, x6, 0xd\n"
    "sw x6, 0(x5)\n"
    "jal x0, .\n"
)


def _program(cmds: list[Command]) -> Program:
    return assemble(emit_asm(cmds))


def _tx(seq: int, addr: int, payload: bytes, is_write: bool = False) -> DbbTransaction:
    return DbbTransaction(seq=seq, addr=addr, payload=payload, is_write=is_write)


class TestScriptedNvdla:
    """Tests for the scripted register device."""

    def test_script_from_commands_skips_writes(self) -> None:
        """Only read_reg commands become script entries."""
        cmds = [Command.write(0x4, 1), Command.read(0xC, 0x3, mask=0x1)]

        assert script_from_commands(cmds, delay=2) == [ScriptEntry(0xC, 0x1, 0x1, 2)]

    def test_per_read_delays_must_match(self) -> None:
        """A delays list must cover every read."""
        with pytest.raises(ValueError):
            script_from_commands([Command.read(0xC, 1)], delays=[1, 2])

    def test_not_ready_value_fails_masked_compare(self) -> None:
        """The stall response differs from the expected value under the mask."""
        entry = ScriptEntry(0xC, 0x1, 0x1)

        assert not_ready_value(entry) & entry.mask != entry.value
        assert not_ready_value(ScriptEntry(0xC, 0x0, 0x0)) == 0xFFFF_FFFF

    def test_delay_then_answer(self) -> None:
        """Delayed reads stall before the entry is consumed."""
        nvdla = ScriptedNvdla([ScriptEntry(0xC, 0x1, delay=2)])

        values = [nvdla.read(0xC) for _ in range(3)]

        assert values == [0xFFFF_FFFE, 0xFFFF_FFFE, 0x1]
        assert nvdla.stalled_reads == 2
        assert nvdla.remaining == 0

    def test_wrong_register_mismatches(self) -> None:
        """A read of another register than the script head fails."""
        nvdla = ScriptedNvdla([ScriptEntry(0xC, 0x1)])

        with pytest.raises(ScriptMismatch) as exc_info:
            nvdla.read(0x10)

        assert exc_info.value.expected == 0xC

    def test_exhausted_script_mismatches(self) -> None:
        """Reading past the script end fails."""
        with pytest.raises(ScriptMismatch):
            ScriptedNvdla().read(0xC)

    def test_stride_converts_bus_addresses(self) -> None:
        """Bus addresses are scaled back to CSB addresses."""
        nvdla = ScriptedNvdla(memory_map=MemoryMap(csb_stride=4))

        nvdla.write(0x400, 7)

        assert nvdla.write_log == [(0x100, 7)]

    def test_zero_mask_answers_without_stalling(self) -> None:
        """Every response passes a zero mask, so delayed entries answer at once."""
        nvdla = ScriptedNvdla([ScriptEntry(0xC, 0x0, 0x0, delay=3), ScriptEntry(0x10, 0x5, delay=1)])

        assert nvdla.read(0xC) == 0x0
        assert nvdla.stalled_reads == 0
        assert nvdla.remaining == 1
        assert nvdla.read(0x10) == not_ready_value(ScriptEntry(0x10, 0x5))


class TestCpu:
    """Step-level tests for instructions generated programs rarely use."""

    @staticmethod
    def _stepped(source: str, steps: int) -> Cpu:
        cpu = Cpu(assemble(source))
        bus = SystemBus(MemoryMap(), Dram(), ScriptedNvdla())
        for _ in range(steps):
            cpu.step(bus)
        return cpu

    def test_auipc_adds_upper_immediate_to_pc(self) -> None:
        """auipc writes pc + (imm << 12), wrapping at 32 bits."""
        cpu = self._stepped("addi x0, x0, 0\nauipc x5, 0x12345\nauipc x6, 0xfffff\n", 3)

        assert cpu.x[5] == 0x1234_5004
        assert cpu.x[6] == 0xFFFF_F008
        assert cpu.pc == 12

    def test_andi_sign_extends_immediate(self) -> None:
        """Negative andi immediates keep the upper register bits."""
        source = (
            "lui x6, 0xabcde\n"
            "addi x6, x6, 0x123\n"
            "andi x7, x6, -0x800\n"
            "andi x8, x6, 0x7ff\n"
            "andi x0, x6, -0x1\n"
        )

        cpu = self._stepped(source, 5)

        assert cpu.x[6] == 0xABCD_E123
        assert cpu.x[7] == 0xABCD_E000
        assert cpu.x[8] == 0x123
        assert cpu.x[0] == 0

    def test_jalr_clears_low_bit_and_links(self) -> None:
        """jalr jumps to (rs1 + imm) & ~1 and links pc + 4."""
        source = "addi x5, x0, 0x11\njalr x1, 4(x5)\nebreak\nebreak\nebreak\naddi x7, x0, 1\n"

        cpu = self._stepped(source, 3)

        assert cpu.x[1] == 8
        assert cpu.x[7] == 1
        assert cpu.pc == 24
        assert not cpu.halted

    def test_jalr_reads_base_before_linking(self) -> None:
        """With rd == rs1 the target uses the old register value."""
        source = "addi x5, x0, 0x15\njalr x5, -9(x5)\nebreak\naddi x7, x0, 2\n"

        cpu = self._stepped(source, 3)

        assert cpu.x[5] == 8
        assert cpu.x[7] == 2


class TestRun:
    """Tests for run on generated programs."""

    def test_single_write(self) -> None:
        """One write_reg yields one observed write and success."""
        result = run(_program([Command.write(0x3004, 0x1)]))

        assert result.status is SimStatus.SUCCESS
        assert result.observed_writes == [(0x3004, 0x1)]
        assert result.mailbox == DEFAULT_SUCCESS_CODE

    @pytest.mark.parametrize("delay", [0, 1, 5, 100, 1000])
    def test_polling_survives_delays(self, delay: int) -> None:
        """Polled reads keep looping until the register is ready."""
        cmds = [Command.write(0x3004, 0x1), Command.read(0xC, 0x1)]
        baseline = run(_program(cmds), script=script_from_commands(cmds))

        result = run(_program(cmds), script=script_from_commands(cmds, delay=delay))

        assert result.status is SimStatus.SUCCESS
        assert result.observed_writes == [(0x3004, 0x1)]
        assert result.stalled_reads == delay
        assert result.retired_instructions == baseline.retired_instructions + 3 * delay

    def test_zero_mask_read_with_delay(self) -> None:
        """A mask-0 read answers without stalling and the next poll still waits."""
        cmds = [Command.read(0xC, 0x0, mask=0x0), Command.read(0x10, 0x5)]

        result = run(_program(cmds), script=script_from_commands(cmds, delay=3))

        assert result.status is SimStatus.SUCCESS
        assert result.stalled_reads == 3

    def test_watchdog_expires(self) -> None:
        """A register that never becomes ready trips the watchdog."""
        cmds = [Command.read(0xC, 0x1)]

        result = run(_program(cmds), script=script_from_commands(cmds, delay=10**9), watchdog=10)

        assert result.status is SimStatus.WATCHDOG_EXPIRED
        assert result.retired_instructions == 10
        assert result.events[-1].kind == "watchdog_expired"

    def test_single_check_failure(self) -> None:
        """A wrong value on a single check ends in the failure handler."""
        cmds = [Command.read(0xC, 0x1, poll=False), Command.write(0x4, 0x2)]

        result = run(_program(cmds), script=[ScriptEntry(0xC, 0x2)])

        assert result.status is SimStatus.FAILURE
        assert result.mailbox == DEFAULT_FAILURE_CODE
        assert result.observed_writes == []

    def test_script_mismatch(self) -> None:
        """Reading with no script entry stops the run."""
        result = run(_program([Command.read(0xC, 0x1)]))

        assert result.status is SimStatus.SCRIPT_MISMATCH
        assert "0x0000000c" in result.detail

    def test_bus_fault(self) -> None:
        """A load past DRAM is a bus fault."""
        program = assemble("lui x5, 0x20100\nlw x6, 0(x5)\njal x0, .\n")

        result = run(program)

        assert result.status is SimStatus.BUS_FAULT
        assert result.retired_instructions == 1

    def test_unsupported_instruction(self) -> None:
        """Running off the end of the program hits an undecodable word."""
        result = run(assemble("addi x1, x0, 1\n"))

        assert result.status is SimStatus.UNSUPPORTED_INSTRUCTION
        assert result.retired_instructions == 1

    def test_ebreak_halts(self) -> None:
        """ebreak stops the core; without a mailbox write that is a failure."""
        result = run(assemble("ebreak\n"))

        assert result.status is SimStatus.FAILURE
        assert result.mailbox == 0

    def test_watchdog_must_be_positive(self) -> None:
        """A zero watchdog is rejected."""
        with pytest.raises(ValueError):
            run(_program([]), watchdog=0)

    def test_program_too_large(self) -> None:
        """Programs must fit program memory."""
        with pytest.raises(ValueError):
            run(_program([Command.write(0x4, 1)] * 4), memory_map=MemoryMap(program_words=16))

    def test_image_preloaded(self) -> None:
        """A program can read preloaded DRAM content."""
        image = MemoryImage.from_spans([(0x10_0000, (0x1234).to_bytes(4, "little"))])
        program = assemble("lui x5, 0x100\nlw x7, 0(x5)\n" + SUCCESS_TAIL)

        soc = Soc(program, image)
        result = soc.run(1000)

        assert result.status is SimStatus.SUCCESS
        assert soc.cpu.x[7] == 0x1234

    @pytest.mark.parametrize("seed", range(15))
    def test_replay_equivalence(self, seed: int) -> None:
        """Observed writes equal the write_reg subsequence of the commands."""
        rng = random.Random(seed)
        csb = [
            CsbTransaction(
                seq=i, addr=4 * rng.randrange(0x4_0000), data=rng.getrandbits(32), is_write=rng.random() < 0.7
            )
            for i in range(rng.randint(0, 40))
        ]
        cmds = to_commands(csb)

        result = run(_program(cmds), script=script_from_commands(cmds))

        assert result.status is SimStatus.SUCCESS
        assert result.observed_writes == [(c.addr, c.data) for c in cmds if c.is_write]

    def test_deterministic(self) -> None:
        """Identical inputs give identical results."""
        cmds = [Command.write(0x3004, 0x1), Command.read(0xC, 0x1)]

        first = run(_program(cmds), script=script_from_commands(cmds, delay=3))
        second = run(_program(cmds), script=script_from_commands(cmds, delay=3))

        assert first == second


class TestInterleavedReplay:
    """Tests for CPU and DBB replay sharing DRAM through the arbiter."""

    @staticmethod
    def _store_program(stores: int) -> Program:
        return assemble("lui x5, 0x100\n" + "sw x0, 0(x5)\n" * stores + SUCCESS_TAIL)

    def test_round_robin_is_fair(self) -> None:
        """Neither master waits more than one grant."""
        dbb = [_tx(i, VP_BASE + 0x1000 + 8 * i, bytes(8)) for i in range(40)]

        result = run(self._store_program(50), replay=DbbReplayer(dbb, REBASE))

        assert result.status is SimStatus.SUCCESS
        assert result.bus_grants == {MasterId.CPU: 51, MasterId.DBB: 80}
        assert result.max_wait[MasterId.CPU] <= 1
        assert result.max_wait[MasterId.DBB] <= 1
        assert result.replay is not None
        assert result.replay.ok

    def test_round_robin_is_fair_over_long_runs(self) -> None:
        """Thousands of stores against thousands of beats keep both waits at one grant."""
        dbb = [_tx(i, VP_BASE + 0x1000 + 8 * i, bytes(8)) for i in range(5000)]

        result = run(self._store_program(5000), replay=DbbReplayer(dbb, REBASE))

        assert result.status is SimStatus.SUCCESS
        assert result.bus_grants == {MasterId.CPU: 5001, MasterId.DBB: 10000}
        assert result.max_wait[MasterId.CPU] <= 1
        assert result.max_wait[MasterId.DBB] <= 1
        assert result.replay is not None
        assert result.replay.ok
        assert result.replay.reads_checked == 5000

    def test_dbb_first_delays_cpu(self) -> None:
        """With DBB priority the CPU waits for the whole replay."""
        dbb = [_tx(i, VP_BASE + 0x1000 + 8 * i, bytes(8)) for i in range(10)]

        result = run(
            self._store_program(1),
            replay=DbbReplayer(dbb, REBASE),
            policy=ArbiterPolicy.DBB_FIRST,
        )

        assert result.status is SimStatus.SUCCESS
        assert result.max_wait[MasterId.CPU] >= 1

    def test_replay_sees_preloaded_image(self) -> None:
        """Replaying the trace over its own image verifies cleanly."""
        dbb = [
            _tx(0, VP_BASE, bytes(range(8))),
            _tx(1, VP_BASE + 0x100, b"\xff" * 8, is_write=True),
            _tx(2, VP_BASE + 0x100, b"\xff" * 8),
        ]
        image, _ = build_image(dbb, REBASE)

        result = run(_program([]), image, replay=DbbReplayer(dbb, REBASE))

        assert result.replay is not None
        assert result.replay.transactions == 3
        assert result.replay.reads_checked == 2
        assert result.replay.writes_applied == 1
        assert result.replay.ok

    def test_format_result(self) -> None:
        """The result report lists the fixed keys in order."""
        result = run(_program([Command.write(0x3004, 0x1)]))

        lines = format_result(result).splitlines()

        assert lines[0] == "status = success"
        assert lines[2] == "observed_writes = 1"
        assert "mailbox = 0x600d600d" in lines
        assert [line.split(" = ")[0] for line in lines[5:9]] == [
            "grants.cpu",
            "grants.dbb",
            "max_wait.cpu",
            "max_wait.dbb",
        ]


class TestReplayDbb:
    """Tests for replay_dbb."""

    def test_clean_replay(self) -> None:
        """An image built from the trace verifies every read."""
        rng = random.Random(4)
        dbb = [
            _tx(i, VP_BASE + 8 * rng.randrange(32), rng.randbytes(8), is_write=rng.random() < 0.3)
            for i in range(60)
        ]
        reads = []
        shadow: dict[int, int] = {}
        for tx in dbb:
            for i, value in enumerate(tx.payload):
                if tx.is_write:
                    shadow[tx.addr + i] = value
                else:
                    shadow.setdefault(tx.addr + i, value)
            if not tx.is_write:
                reads.append(_tx(tx.seq, tx.addr, bytes(shadow[tx.addr + i] for i in range(8))))
        consistent = sorted([tx for tx in dbb if tx.is_write] + reads, key=lambda t: t.seq)
        image, _ = build_image(consistent, REBASE)

        report = replay_dbb(image, consistent, REBASE)

        assert report.ok
        assert report.transactions == 60
        assert report.sub_accesses == 120

    def test_corrupted_byte(self) -> None:
        """Exactly the reads covering a corrupted byte mismatch."""
        a = bytes(range(1, 9))
        dbb = [
            _tx(0, VP_BASE, a),
            _tx(1, VP_BASE + 8, bytes(range(9, 17))),
            _tx(2, VP_BASE, a[:4]),
        ]
        image, _ = build_image(dbb, REBASE)
        content = image.to_bytes_map()
        content[0x10_0001] ^= 0xFF

        report = replay_dbb(MemoryImage.from_bytes(content), dbb, REBASE)

        assert [(m.seq, m.addr) for m in report.mismatches] == [(0, 0x10_0000), (2, 0x10_0000)]
        assert report.first_mismatch is not None
        assert report.first_mismatch.expected == a

    def test_empty_trace(self) -> None:
        """No transactions give an empty report."""
        report = replay_dbb(MemoryImage(), [], REBASE)

        assert (report.transactions, report.sub_accesses, report.mismatches) == (0, 0, [])

    def test_replay_writes_update_dram(self) -> None:
        """Replayed writes are visible to later reads."""
        dbb = [_tx(0, VP_BASE, b"\x01" * 4, is_write=True), _tx(1, VP_BASE, b"\x01" * 4)]

        assert replay_dbb(MemoryImage(), dbb, REBASE).ok

    def test_replayer_writes_through_to_dram(self) -> None:
        """The replayer applies writes to the DRAM it is given."""
        dram = Dram()
        replayer = DbbReplayer([_tx(0, VP_BASE, b"\xaa\xbb\xcc\xdd", is_write=True)], REBASE)
        while replayer.pending:
            replayer.issue(dram)

        assert dram.read_word(0x10_0000) == 0xDDCC_BBAA
