"""Sparse DRAM model and the 64-to-32-bit width converter."""

from nvbm.errors import BusFault
from nvbm.models.pydantic_models import MASK32, MemoryMap
from nvbm.weights.image import MemoryImage

PAGE_SIZE = 0x1000
WORD_BYTES = 4


class Dram:
    """Zero-initialized byte-addressable DRAM over the map's DRAM window.

    Pages are allocated on first write, so a 512 MiB window costs nothing
    until touched.
    """

    def __init__(self, memory_map: MemoryMap | None = None) -> None:
        self.memory_map = memory_map or MemoryMap()
        self._pages: dict[int, bytearray] = {}

    def _check(self, addr: int, length: int) -> None:
        if addr < self.memory_map.dram_start or addr + length - 1 > self.memory_map.dram_end:
            raise BusFault(addr, "outside DRAM")

    def read_bytes(self, addr: int, length: int) -> bytes:
        self._check(addr, length)
        out = bytearray()
        while length > 0:
            page_no, offset = divmod(addr, PAGE_SIZE)
            chunk = min(length, PAGE_SIZE - offset)
            page = self._pages.get(page_no)
            out += page[offset : offset + chunk] if page is not None else bytes(chunk)
            addr += chunk
            length -= chunk
        return bytes(out)

    def write_bytes(self, addr: int, data: bytes) -> None:
        self._check(addr, len(data))
        pos = 0
        while pos < len(data):
            page_no, offset = divmod(addr + pos, PAGE_SIZE)
            chunk = min(len(data) - pos, PAGE_SIZE - offset)
            page = self._pages.setdefault(page_no, bytearray(PAGE_SIZE))
            page[offset : offset + chunk] = data[pos : pos + chunk]
            pos += chunk

    def read_word(self, addr: int) -> int:
        return int.from_bytes(self.read_bytes(addr, WORD_BYTES), "little")

    def write_word(self, addr: int, value: int) -> None:
        self.write_bytes(addr, (value & MASK32).to_bytes(WORD_BYTES, "little"))

    def load_image(self, image: MemoryImage) -> None:
        """Preload populated image bytes; gaps keep their current content."""
        for span in image.spans:
            self.write_bytes(span.addr, span.data)

    @property
    def pages_allocated(self) -> int:
        return len(self._pages)


class WidthConverter:
    """Splits DBB beats into 32-bit DRAM sub-accesses, low word first."""

    def __init__(self, beat_bytes: int = 8, word_bytes: int = WORD_BYTES) -> None:
        if beat_bytes % word_bytes:
            raise ValueError("beat width must be a multiple of the word width")
        self.beat_bytes = beat_bytes
        self.word_bytes = word_bytes

    def split(self, addr: int, payload: bytes) -> list[tuple[int, bytes]]:
        """(address, word bytes) for each sub-access of a payload."""
        if len(payload) % self.word_bytes:
            raise ValueError(f"payload of {len(payload)} bytes is not whole words")
        return [
            (addr + i, payload[i : i + self.word_bytes]) for i in range(0, len(payload), self.word_bytes)
        ]

    @staticmethod
    def join(parts: list[tuple[int, bytes]]) -> bytes:
        """Reassemble a payload from its sub-accesses in address order."""
        return b"".join(data for _, data in sorted(parts, key=lambda p: p[0]))
