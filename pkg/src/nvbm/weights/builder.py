"""DRAM preload image construction from DBB transactions.

The first transaction touching a byte decides its fate: read-first bytes are
original weights or input and go into the preload image; write-first bytes
are produced at runtime and are excluded. Later touches are ignored.
"""

import logging
from enum import Enum
from typing import NamedTuple

from nvbm.errors import AddressOutOfWindow
from nvbm.models.pydantic_models import AddressRebase, DbbTransaction, MemoryMap
from nvbm.weights.image import MemoryImage

logger = logging.getLogger(__name__)

REBASE_ALIGN = 0x1000
DEFAULT_REBASE_WINDOW = 512 * 1024 * 1024


class TouchKind(str, Enum):
    READ = "read"
    WRITE = "write"


class FirstTouch(NamedTuple):
    """First DBB access of one (rebased) byte address."""

    kind: TouchKind
    seq: int
    value: int | None


def rebase_addr(addr: int, rebase: AddressRebase) -> int:
    """Translate a VP address into the SoC DRAM window.

    Raises:
        AddressOutOfWindow: addr is below from_base or beyond the window.
    """
    offset = addr - rebase.from_base
    if offset < 0 or offset >= rebase.window:
        raise AddressOutOfWindow(
            addr, f"rebase window [0x{rebase.from_base:x}, 0x{rebase.from_base + rebase.window:x})"
        )
    return rebase.to_base + offset


def default_rebase(dbb: list[DbbTransaction], memory_map: MemoryMap | None = None) -> AddressRebase:
    """Lowest DBB address (4 KiB aligned) maps to the DRAM start."""
    memory_map = memory_map or MemoryMap()
    from_base = min((tx.addr for tx in dbb), default=0) & ~(REBASE_ALIGN - 1)
    window = min(DEFAULT_REBASE_WINDOW, memory_map.dram_size)
    return AddressRebase(from_base=from_base, to_base=memory_map.dram_start, window=window)


def _rebased_start(tx: DbbTransaction, rebase: AddressRebase, memory_map: MemoryMap) -> int:
    start = rebase_addr(tx.addr, rebase)
    rebase_addr(tx.end - 1, rebase)
    if start < memory_map.dram_start or start + len(tx.payload) - 1 > memory_map.dram_end:
        raise AddressOutOfWindow(
            start, f"DRAM [0x{memory_map.dram_start:x}, 0x{memory_map.dram_end:x}]"
        )
    return start


def first_touches(
    dbb: list[DbbTransaction],
    rebase: AddressRebase,
    memory_map: MemoryMap | None = None,
) -> dict[int, FirstTouch]:
    """Per-byte record of the first transaction touching each rebased address.

    Raises:
        AddressOutOfWindow: A transaction escapes the rebase window or DRAM.
    """
    memory_map = memory_map or MemoryMap()
    touches: dict[int, FirstTouch] = {}
    for tx in sorted(dbb, key=lambda t: t.seq):
        start = _rebased_start(tx, rebase, memory_map)
        kind = TouchKind.WRITE if tx.is_write else TouchKind.READ
        for i, value in enumerate(tx.payload):
            if start + i not in touches:
                touches[start + i] = FirstTouch(kind, tx.seq, None if tx.is_write else value)
    return touches


def build_image(
    dbb: list[DbbTransaction],
    rebase: AddressRebase,
    memory_map: MemoryMap | None = None,
) -> tuple[MemoryImage, frozenset[int]]:
    """Build the preload image using the first-occurrence rule.

    Args:
        dbb: DBB transactions in trace order.
        rebase: VP to SoC address translation.
        memory_map: Map whose DRAM window bounds the image.

    Returns:
        Tuple of (image, excluded byte addresses).

    Raises:
        AddressOutOfWindow: A rebased transaction escapes the DRAM window.
    """
    touches = first_touches(dbb, rebase, memory_map)
    content = {a: t.value for a, t in touches.items() if t.value is not None}
    excluded = frozenset(a for a, t in touches.items() if t.kind is TouchKind.WRITE)
    image = MemoryImage.from_bytes(content)
    logger.info(
        "weight image: %d bytes in %d spans, %d bytes excluded",
        len(image),
        len(image.spans),
        len(excluded),
    )
    return image, excluded
