"""Import register commands from NVDLA hardware test traces (input.txn).

The NVDLA verification traces drive the register file with ``write_reg``,
``read_reg``, ``poll_reg_equal`` and ``poll_field_equal`` lines, mixed with
memory and synchronization commands that have no register-level meaning
here. Register commands become a command list for ``emit_asm``; the rest
are skipped and reported.
"""

import logging
from dataclasses import dataclass, field

from nvbm.commands.config_file import parse_hex32
from nvbm.errors import ConfigSyntaxError
from nvbm.models.pydantic_models import Command

logger = logging.getLogger(__name__)

# Operand count per register command, excluding the opcode
REGISTER_OPS = {
    "write_reg": 2,
    "read_reg": 3,
    "poll_reg_equal": 2,
    "poll_field_equal": 3,
}

# Memory, checking and synchronization commands with no register access
SKIPPED_OPS = frozenset(
    {
        "load_mem",
        "mem_load",
        "mem_init",
        "mem_release",
        "dump_mem",
        "check_crc",
        "check_file",
        "check_nothing",
        "intr_notify",
        "sync_notify",
        "sync_wait",
        "wait",
    }
)


@dataclass
class ImportedTrace:
    """Commands recovered from a test trace and the lines left out."""

    commands: list[Command] = field(default_factory=list)
    skipped: list[tuple[int, str]] = field(default_factory=list)


def _csb_addr(token: str, strip_base: int, line_no: int) -> int:
    addr = parse_hex32(token, "address", line_no)
    if addr < strip_base:
        raise ConfigSyntaxError(line_no, f"address 0x{addr:08x} is below the stripped base 0x{strip_base:08x}")
    return addr - strip_base


def parse_nvdla_trace(text: str, strip_base: int = 0) -> ImportedTrace:
    """Parse an NVDLA test trace into register commands.

    ``read_reg ADDR MASK DATA`` checks once; ``poll_reg_equal ADDR DATA`` and
    ``poll_field_equal ADDR MASK DATA`` poll until the masked value matches.
    Text after ``#`` is a comment.

    Args:
        text: Trace file contents.
        strip_base: Subtracted from every register address, for traces that
            address the register file through a bus offset.

    Raises:
        ConfigSyntaxError: With the 1-based line number of an unknown command
            or a malformed register command.
    """
    imported = ImportedTrace()
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        op, *operands = line.split()
        if op in SKIPPED_OPS:
            logger.debug("line %d: %s skipped", line_no, op)
            imported.skipped.append((line_no, op))
            continue
        arity = REGISTER_OPS.get(op)
        if arity is None:
            raise ConfigSyntaxError(line_no, f"unknown trace command {op!r}")
        if len(operands) != arity:
            raise ConfigSyntaxError(line_no, f"{op} takes {arity} operands, got {len(operands)}")

        addr = _csb_addr(operands[0], strip_base, line_no)
        if op == "write_reg":
            cmd = Command.write(addr, parse_hex32(operands[1], "data", line_no))
        elif op == "poll_reg_equal":
            cmd = Command.read(addr, parse_hex32(operands[1], "expected value", line_no))
        else:
            mask = parse_hex32(operands[1], "mask", line_no)
            data = parse_hex32(operands[2], "expected value", line_no)
            cmd = Command.read(addr, data, mask=mask, poll=op == "poll_field_equal")
        imported.commands.append(cmd)

    logger.info(
        "imported %d register commands, skipped %d other lines",
        len(imported.commands),
        len(imported.skipped),
    )
    return imported
