"""SoC top level: CPU, DRAM, scripted NVDLA and the DBB replay master.

One loop iteration is one bus cycle. The CPU retires one instruction per
cycle unless its data access targets DRAM and the arbiter grants the DBB
replayer instead; the replayer issues one 32-bit DRAM sub-access per grant.
"""

import logging
from collections.abc import Iterable
from dataclasses import dataclass, field
from typing import NamedTuple

from nvbm.codegen.assembler import Program
from nvbm.errors import BusFault, ScriptMismatch, UnsupportedInstruction
from nvbm.models.pydantic_models import (
    AddressRebase,
    ArbiterPolicy,
    CodegenOptions,
    DbbTransaction,
    MasterId,
    MemoryMap,
    Region,
    SimStatus,
)
from nvbm.sim.bus import MASTER_ORDER, Arbiter, SimEvent, SystemBus, decode_address
from nvbm.sim.cpu import MEMORY_OPS, Cpu
from nvbm.sim.dram import Dram, WidthConverter
from nvbm.sim.nvdla import ScriptedNvdla, ScriptEntry
from nvbm.weights.builder import rebase_addr
from nvbm.weights.image import MemoryImage

logger = logging.getLogger(__name__)


class ReplayMismatch(NamedTuple):
    """A DBB read whose payload differs from DRAM content."""

    seq: int
    addr: int
    expected: bytes
    actual: bytes


@dataclass
class ReplayReport:
    """Outcome of replaying DBB transactions against DRAM."""

    transactions: int = 0
    reads_checked: int = 0
    writes_applied: int = 0
    sub_accesses: int = 0
    mismatches: list[ReplayMismatch] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.mismatches

    @property
    def first_mismatch(self) -> ReplayMismatch | None:
        return self.mismatches[0] if self.mismatches else None


class _SubAccess(NamedTuple):
    tx_index: int
    addr: int
    data: bytes
    last: bool


class DbbReplayer:
    """Second bus master replaying DBB transactions one 32-bit word per grant.

    Raises:
        AddressOutOfWindow: A transaction escapes the rebase window.
    """

    def __init__(
        self,
        dbb: Iterable[DbbTransaction],
        rebase: AddressRebase,
        converter: WidthConverter | None = None,
    ) -> None:
        self.converter = converter or WidthConverter()
        self.transactions = list(dbb)
        self.report = ReplayReport(transactions=len(self.transactions))
        self._queue: list[_SubAccess] = []
        for index, tx in enumerate(self.transactions):
            start = rebase_addr(tx.addr, rebase)
            rebase_addr(tx.end - 1, rebase)
            parts = self.converter.split(start, tx.payload)
            for n, (addr, data) in enumerate(parts):
                self._queue.append(_SubAccess(index, addr, data, n == len(parts) - 1))
        self._queue.reverse()
        self._read_back: list[tuple[int, bytes]] = []

    @property
    def pending(self) -> bool:
        return bool(self._queue)

    def issue(self, dram: Dram) -> None:
        """Perform the next sub-access against DRAM."""
        access = self._queue.pop()
        tx = self.transactions[access.tx_index]
        self.report.sub_accesses += 1
        if tx.is_write:
            dram.write_bytes(access.addr, access.data)
        else:
            self._read_back.append((access.addr, dram.read_bytes(access.addr, len(access.data))))
        if not access.last:
            return
        if tx.is_write:
            self.report.writes_applied += 1
            return
        self.report.reads_checked += 1
        actual = self.converter.join(self._read_back)
        self._read_back = []
        if actual != tx.payload:
            addr = access.addr + len(access.data) - len(tx.payload)
            self.report.mismatches.append(ReplayMismatch(tx.seq, addr, tx.payload, actual))
            logger.debug("DBB read seq %d at 0x%x mismatches DRAM", tx.seq, addr)


@dataclass
class SimResult:
    """Everything observed during one simulation run."""

    status: SimStatus
    observed_writes: list[tuple[int, int]]
    retired_instructions: int
    bus_grants: dict[MasterId, int]
    max_wait: dict[MasterId, int]
    mailbox: int | None
    events: list[SimEvent] = field(default_factory=list)
    stalled_reads: int = 0
    detail: str = ""
    replay: ReplayReport | None = None


class Soc:
    """The simulated system: wire up devices, preload DRAM, run.

    Args:
        program: Program loaded into program memory.
        image: DRAM preload image.
        memory_map: Address map; also sizes program memory.
        script: Responses of the scripted NVDLA to register reads.
        policy: DRAM arbiter policy.
        opts: Mailbox address and completion codes.
    """

    def __init__(
        self,
        program: Program,
        image: MemoryImage | None = None,
        memory_map: MemoryMap | None = None,
        script: Iterable[ScriptEntry] = (),
        policy: ArbiterPolicy = ArbiterPolicy.ROUND_ROBIN,
        opts: CodegenOptions | None = None,
    ) -> None:
        self.memory_map = memory_map or MemoryMap()
        self.opts = opts or CodegenOptions()
        self.dram = Dram(self.memory_map)
        if image is not None:
            self.dram.load_image(image)
        self.nvdla = ScriptedNvdla(script, self.memory_map)
        self.bus = SystemBus(self.memory_map, self.dram, self.nvdla)
        self.arbiter = Arbiter(policy)
        self.cpu = Cpu(program, self.memory_map.program_words)

    def _cpu_needs_dram(self) -> bool:
        instr = self.cpu.peek()
        if instr.mnemonic not in MEMORY_OPS:
            return False
        return decode_address(self.cpu.effective_address(instr), self.memory_map) is Region.DRAM

    def _mailbox(self) -> int | None:
        try:
            return self.dram.read_word(self.opts.result_addr)
        except BusFault:
            return None

    def run(self, watchdog: int, replay: DbbReplayer | None = None) -> SimResult:
        """Run until the CPU halts or fails and any replay is drained.

        Args:
            watchdog: Maximum retired instructions.
            replay: DBB master interleaved with the CPU through the arbiter.

        Raises:
            ValueError: watchdog is not positive.
        """
        if watchdog <= 0:
            raise ValueError("watchdog must be > 0")
        status: SimStatus | None = None
        detail = ""
        cpu = self.cpu

        while True:
            cpu_active = status is None and not cpu.halted
            cpu_ok = status in (None, SimStatus.SUCCESS, SimStatus.FAILURE)
            replay_active = replay is not None and replay.pending and cpu_ok
            if not cpu_active and not replay_active:
                break
            if cpu_active and cpu.retired >= watchdog:
                status, detail = SimStatus.WATCHDOG_EXPIRED, f"{cpu.retired} instructions retired"
                break

            requests: set[MasterId] = set()
            try:
                if cpu_active and self._cpu_needs_dram():
                    requests.add(MasterId.CPU)
            except BusFault as e:
                status, detail = SimStatus.BUS_FAULT, str(e)
                continue
            except UnsupportedInstruction as e:
                status, detail = SimStatus.UNSUPPORTED_INSTRUCTION, str(e)
                continue
            if replay_active:
                requests.add(MasterId.DBB)
            granted = self.arbiter.grant(requests) if requests else None

            if cpu_active and (MasterId.CPU not in requests or granted is MasterId.CPU):
                try:
                    cpu.step(self.bus)
                except BusFault as e:
                    status, detail = SimStatus.BUS_FAULT, str(e)
                except ScriptMismatch as e:
                    status, detail = SimStatus.SCRIPT_MISMATCH, str(e)
                if cpu.halted and status is None:
                    mailbox = self._mailbox()
                    status = SimStatus.SUCCESS if mailbox == self.opts.success_code else SimStatus.FAILURE
            if granted is MasterId.DBB and replay is not None:
                replay.issue(self.dram)

        if status is None:
            status = SimStatus.FAILURE
        if status is not SimStatus.SUCCESS:
            self.bus.events.append(SimEvent(status.value, cpu.pc, 0, MasterId.CPU))
        logger.info("simulation %s after %d instructions", status.value, cpu.retired)
        return SimResult(
            status=status,
            observed_writes=list(self.nvdla.write_log),
            retired_instructions=cpu.retired,
            bus_grants=dict(self.arbiter.grants),
            max_wait=dict(self.arbiter.max_wait),
            mailbox=self._mailbox(),
            events=self.bus.events,
            stalled_reads=self.nvdla.stalled_reads,
            detail=detail,
            replay=replay.report if replay is not None else None,
        )


def run(
    program: Program,
    image: MemoryImage | None = None,
    memory_map: MemoryMap | None = None,
    script: Iterable[ScriptEntry] = (),
    watchdog: int = 10_000_000,
    policy: ArbiterPolicy = ArbiterPolicy.ROUND_ROBIN,
    opts: CodegenOptions | None = None,
    replay: DbbReplayer | None = None,
) -> SimResult:
    """Build a Soc and run it once. See Soc.run."""
    soc = Soc(program, image, memory_map, script, policy, opts)
    return soc.run(watchdog, replay)


def replay_dbb(
    image: MemoryImage,
    dbb: Iterable[DbbTransaction],
    rebase: AddressRebase,
    memory_map: MemoryMap | None = None,
) -> ReplayReport:
    """Replay DBB transactions alone against DRAM preloaded with ``image``.

    Raises:
        AddressOutOfWindow: A transaction escapes the rebase window.
        BusFault: A rebased access falls outside DRAM.
    """
    dram = Dram(memory_map)
    dram.load_image(image)
    replayer = DbbReplayer(dbb, rebase)
    arbiter = Arbiter()
    while replayer.pending:
        arbiter.grant({MasterId.DBB})
        replayer.issue(dram)
    report = replayer.report
    logger.info(
        "replayed %d DBB transactions: %d reads checked, %d mismatches",
        report.transactions,
        report.reads_checked,
        len(report.mismatches),
    )
    return report


def format_result(result: SimResult) -> str:
    """Line-oriented ``key = value`` report of a simulation."""
    lines = [
        ("status", result.status.value),
        ("retired_instructions", str(result.retired_instructions)),
        ("observed_writes", str(len(result.observed_writes))),
        ("stalled_reads", str(result.stalled_reads)),
        ("mailbox", f"0x{result.mailbox:08x}" if result.mailbox is not None else "none"),
    ]
    for master in MASTER_ORDER:
        lines.append((f"grants.{master.value}", str(result.bus_grants.get(master, 0))))
    for master in MASTER_ORDER:
        lines.append((f"max_wait.{master.value}", str(result.max_wait.get(master, 0))))
    if result.replay is not None:
        lines.append(("replay.transactions", str(result.replay.transactions)))
        lines.append(("replay.mismatches", str(len(result.replay.mismatches))))
    if result.detail:
        lines.append(("detail", result.detail))
    return "".join(f"{key} = {value}\n" for key, value in lines)
