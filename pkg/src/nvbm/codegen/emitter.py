"""Register commands to bare-metal RV32I assembly.

Each write_reg materializes address and data with lui/addi pairs and
stores once. Each read_reg loads, masks and compares: polled reads branch
back until the value matches, single checks branch to the failure handler.
The program ends by storing a success or failure code to a DRAM mailbox
and spinning on a self-loop.
"""

import logging

from nvbm.codegen.isa import format_imm, hi_lo
from nvbm.commands.config_file import format_command
from nvbm.commands.generator import command_stats
from nvbm.errors import AddressOutOfWindow
from nvbm.models.pydantic_models import CodegenOptions, Command, MemoryMap

logger = logging.getLogger(__name__)

WRITE_BLOCK = 5
READ_BLOCK = 9
LONG_CHECK_BLOCK = 10
EPILOGUE = 6
B_RANGE = 4094

FAIL_LABEL = "fail"
HALT_OK_LABEL = "halt_ok"
HALT_FAIL_LABEL = "halt_fail"


def _load_imm(reg: int, value: int) -> list[str]:
    hi, lo = hi_lo(value)
    return [f"lui x{reg}, 0x{hi:x}", f"addi x{reg}, x{reg}, {format_imm(lo)}"]


def _long_checks(cmds: list[Command]) -> set[int]:
    """Indices of single-check reads whose branch to ``fail`` is out of B range.

    Walks backwards so the distance from each branch to the failure handler
    is exact: it only depends on the forms chosen for later commands.
    """
    long_forms: set[int] = set()
    after = EPILOGUE
    for i in range(len(cmds) - 1, -1, -1):
        cmd = cmds[i]
        if cmd.is_write:
            after += WRITE_BLOCK
        elif cmd.poll:
            after += READ_BLOCK
        elif 4 * (1 + after) > B_RANGE:
            long_forms.add(i)
            after += LONG_CHECK_BLOCK
        else:
            after += READ_BLOCK
    return long_forms


def _mailbox_store(opts: CodegenOptions, code: int) -> list[str]:
    addr_reg, data_reg = opts.scratch_regs[0], opts.scratch_regs[1]
    return [
        *_load_imm(addr_reg, opts.result_addr),
        *_load_imm(data_reg, code),
        f"sw x{data_reg}, 0(x{addr_reg})",
    ]


def check_mailbox(opts: CodegenOptions, memory_map: MemoryMap, image_span: tuple[int, int] | None = None) -> None:
    """Ensure the mailbox word is in DRAM and outside the preload image span.

    Raises:
        AddressOutOfWindow: Mailbox outside DRAM or inside [base, limit).
    """
    if not memory_map.dram_start <= opts.result_addr <= memory_map.dram_end - 3:
        raise AddressOutOfWindow(opts.result_addr, "DRAM (mailbox)")
    if image_span is not None:
        base, limit = image_span
        if base < limit and base < opts.result_addr + 4 and opts.result_addr < limit:
            raise AddressOutOfWindow(opts.result_addr, f"free DRAM outside image [0x{base:x}, 0x{limit:x})")


def emit_asm(
    cmds: list[Command],
    memory_map: MemoryMap | None = None,
    opts: CodegenOptions | None = None,
) -> str:
    """Generate assembly that replays the commands on the NVDLA register window.

    Args:
        cmds: Register commands in execution order.
        memory_map: Supplies the NVDLA window and CSB stride.
        opts: Mailbox, completion codes and scratch registers.

    Returns:
        Assembly source text.

    Raises:
        AddressOutOfWindow: A command address maps outside the NVDLA window,
            or the mailbox is outside DRAM.
    """
    memory_map = memory_map or MemoryMap()
    opts = opts or CodegenOptions()
    check_mailbox(opts, memory_map)
    addr_reg, data_reg, mask_reg, expect_reg = opts.scratch_regs
    stats = command_stats(cmds)
    long_forms = _long_checks(cmds)

    out = [
        "# nvbm: bare-metal NVDLA register program",
        f"# commands: {stats.total} (write_reg {stats.writes}, read_reg {stats.reads})",
    ]

    def emit(*instrs: str) -> None:
        out.extend(f"    {instr}" for instr in instrs)

    for i, cmd in enumerate(cmds):
        bus_addr = memory_map.csb_to_bus(cmd.addr)
        if not memory_map.nvdla_start <= bus_addr <= memory_map.nvdla_end:
            raise AddressOutOfWindow(
                bus_addr, f"NVDLA [0x{memory_map.nvdla_start:x}, 0x{memory_map.nvdla_end:x}]"
            )
        out.append(f"# {format_command(cmd)}")
        emit(*_load_imm(addr_reg, bus_addr))
        if cmd.is_write:
            emit(*_load_imm(data_reg, cmd.data), f"sw x{data_reg}, 0(x{addr_reg})")
            continue

        emit(*_load_imm(mask_reg, cmd.mask), *_load_imm(expect_reg, cmd.data))
        loop = f"poll{i}"
        if cmd.poll:
            out.append(f"{loop}:")
        emit(f"lw x{data_reg}, 0(x{addr_reg})", f"and x{data_reg}, x{data_reg}, x{mask_reg}")
        if cmd.poll:
            emit(f"bne x{data_reg}, x{expect_reg}, {loop}")
        elif i in long_forms:
            ok = f"check{i}_ok"
            emit(f"beq x{data_reg}, x{expect_reg}, {ok}", f"jal x0, {FAIL_LABEL}")
            out.append(f"{ok}:")
        else:
            emit(f"bne x{data_reg}, x{expect_reg}, {FAIL_LABEL}")

    out.append(f"# success: mailbox <- 0x{opts.success_code:08x}")
    emit(*_mailbox_store(opts, opts.success_code))
    out.append(f"{HALT_OK_LABEL}:")
    emit(f"jal x0, {HALT_OK_LABEL}")

    out.append(f"# failure: mailbox <- 0x{opts.failure_code:08x}")
    out.append(f"{FAIL_LABEL}:")
    emit(*_mailbox_store(opts, opts.failure_code))
    out.append(f"{HALT_FAIL_LABEL}:")
    emit(f"jal x0, {HALT_FAIL_LABEL}")

    logger.info("generated program for %d commands (%d long checks)", len(cmds), len(long_forms))
    return "".join(f"{line}\n" for line in out)
