"""Configuration file (write_reg/read_reg lines) serialization."""

import re

from pydantic import ValidationError

from nvbm.errors import ConfigSyntaxError
from nvbm.models.pydantic_models import Command, CommandKind

_HEX32_RE = re.compile(r"0x[0-9a-fA-F]{1,8}")


def format_command(cmd: Command) -> str:
    """Canonical configuration line for one command."""
    if cmd.kind is CommandKind.WRITE_REG:
        return f"write_reg 0x{cmd.addr:08x} 0x{cmd.data:08x}"
    mode = "poll" if cmd.poll else "once"
    return f"read_reg 0x{cmd.addr:08x} 0x{cmd.data:08x} 0x{cmd.mask:08x} {mode}"


def emit_config(cmds: list[Command]) -> str:
    """Serialize commands, one line each, LF-terminated."""
    return "".join(f"{format_command(cmd)}\n" for cmd in cmds)


def parse_hex32(token: str, what: str, line_no: int) -> int:
    if _HEX32_RE.fullmatch(token) is None:
        raise ConfigSyntaxError(line_no, f"{what} {token!r} is not a 0x-prefixed 32-bit hex value")
    return int(token, 16)


def parse_config(text: str) -> list[Command]:
    """Parse configuration text produced by emit_config.

    Blank lines and lines starting with ``#`` are ignored.

    Raises:
        ConfigSyntaxError: With the 1-based line number of the offending line.
    """
    cmds = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        tokens = line.split()
        op = tokens[0]
        if op == "write_reg":
            if len(tokens) != 3:
                raise ConfigSyntaxError(line_no, f"write_reg takes 2 operands, got {len(tokens) - 1}")
            cmds.append(
                Command.write(parse_hex32(tokens[1], "address", line_no), parse_hex32(tokens[2], "data", line_no))
            )
        elif op == "read_reg":
            if len(tokens) != 5:
                raise ConfigSyntaxError(line_no, f"read_reg takes 4 operands, got {len(tokens) - 1}")
            if tokens[4] not in ("poll", "once"):
                raise ConfigSyntaxError(line_no, f"read mode {tokens[4]!r} must be poll or once")
            try:
                cmds.append(
                    Command(
                        kind=CommandKind.READ_REG,
                        addr=parse_hex32(tokens[1], "address", line_no),
                        data=parse_hex32(tokens[2], "expected value", line_no),
                        mask=parse_hex32(tokens[3], "mask", line_no),
                        poll=tokens[4] == "poll",
                    )
                )
            except ValidationError as e:
                raise ConfigSyntaxError(line_no, "expected value has bits outside the mask") from e
        else:
            raise ConfigSyntaxError(line_no, f"unknown command {op!r}")
    return cmds
