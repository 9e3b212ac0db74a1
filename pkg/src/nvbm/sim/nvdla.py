"""Scripted stand-in for the NVDLA register file.

Writes are logged in order. Reads are answered from a script derived from
the command list: each entry names the register the program must read next
and the value to return, optionally after a number of not-yet-ready reads.
"""

import logging
from collections import deque
from collections.abc import Iterable, Sequence
from typing import NamedTuple

from nvbm.errors import ScriptMismatch
from nvbm.models.pydantic_models import MASK32, Command, MemoryMap

logger = logging.getLogger(__name__)


class ScriptEntry(NamedTuple):
    """Expected register read and its response."""

    addr: int
    value: int
    mask: int = MASK32
    delay: int = 0


def script_from_commands(
    cmds: Iterable[Command],
    delay: int = 0,
    delays: Sequence[int] | None = None,
) -> list[ScriptEntry]:
    """Script answering every read_reg with its expected value.

    Args:
        cmds: Command list in execution order.
        delay: Not-ready reads before each answer.
        delays: Per-read override, indexed by position among read_reg commands.
    """
    reads = [cmd for cmd in cmds if not cmd.is_write]
    if delays is not None and len(delays) != len(reads):
        raise ValueError(f"{len(delays)} delays for {len(reads)} reads")
    return [
        ScriptEntry(cmd.addr, cmd.data, cmd.mask, delays[i] if delays is not None else delay)
        for i, cmd in enumerate(reads)
    ]


def not_ready_value(entry: ScriptEntry) -> int:
    """A response that fails the masked comparison of ``entry``."""
    return entry.value ^ (entry.mask or MASK32)


class ScriptedNvdla:
    """Register device on the NVDLA window, addressed by CSB address."""

    def __init__(self, script: Iterable[ScriptEntry] = (), memory_map: MemoryMap | None = None) -> None:
        self.memory_map = memory_map or MemoryMap()
        self.write_log: list[tuple[int, int]] = []
        self.stalled_reads = 0
        self.last_read_consumed = False
        self._script = deque(script)
        self._waited = 0

    @property
    def remaining(self) -> int:
        return len(self._script)

    def write(self, bus_addr: int, data: int) -> None:
        addr = self.memory_map.bus_to_csb(bus_addr)
        self.write_log.append((addr, data))

    def read(self, bus_addr: int) -> int:
        """Answer a register read from the script head.

        Entries with a zero mask answer at once: no response can fail their
        comparison, so a stall would end the poll without consuming them.

        Raises:
            ScriptMismatch: The script is empty or expects another register.
        """
        addr = self.memory_map.bus_to_csb(bus_addr)
        if not self._script:
            raise ScriptMismatch(addr, None)
        entry = self._script[0]
        if entry.addr != addr:
            raise ScriptMismatch(addr, entry.addr)
        if entry.mask and self._waited < entry.delay:
            self._waited += 1
            self.stalled_reads += 1
            self.last_read_consumed = False
            return not_ready_value(entry)
        self._script.popleft()
        self._waited = 0
        self.last_read_consumed = True
        logger.debug("register 0x%08x read as 0x%08x", addr, entry.value)
        return entry.value
