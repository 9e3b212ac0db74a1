"""Sparse byte-addressed memory image."""

from bisect import bisect_right
from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field


@dataclass(frozen=True)
class Span:
    """Contiguous populated bytes starting at ``addr``."""

    addr: int
    data: bytes

    @property
    def end(self) -> int:
        return self.addr + len(self.data)


@dataclass(frozen=True)
class MemoryImage:
    """DRAM preload content as sorted, disjoint, coalesced spans.

    Spans handed to the constructor are sorted and adjacent ones merged;
    overlapping spans raise ValueError. An empty image has base == limit == 0.
    """

    spans: tuple[Span, ...] = ()
    _starts: tuple[int, ...] = field(default=(), init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        merged: list[Span] = []
        for span in sorted((s for s in self.spans if s.data), key=lambda s: s.addr):
            if merged and span.addr < merged[-1].end:
                raise ValueError(f"span at 0x{span.addr:x} overlaps span at 0x{merged[-1].addr:x}")
            if merged and span.addr == merged[-1].end:
                merged[-1] = Span(merged[-1].addr, merged[-1].data + span.data)
            else:
                merged.append(span)
        object.__setattr__(self, "spans", tuple(merged))
        object.__setattr__(self, "_starts", tuple(s.addr for s in merged))

    @classmethod
    def from_bytes(cls, content: Mapping[int, int]) -> "MemoryImage":
        """Build from a byte-address -> byte-value mapping."""
        spans: list[Span] = []
        run_start = run_end = -1
        run = bytearray()
        for addr in sorted(content):
            if addr != run_end:
                if run:
                    spans.append(Span(run_start, bytes(run)))
                run_start, run = addr, bytearray()
            run.append(content[addr])
            run_end = addr + 1
        if run:
            spans.append(Span(run_start, bytes(run)))
        return cls(tuple(spans))

    @classmethod
    def from_spans(cls, spans: Iterable[tuple[int, bytes]]) -> "MemoryImage":
        return cls(tuple(Span(addr, bytes(data)) for addr, data in spans))

    @property
    def base(self) -> int:
        return self.spans[0].addr if self.spans else 0

    @property
    def limit(self) -> int:
        return self.spans[-1].end if self.spans else 0

    @property
    def span_bytes(self) -> int:
        """Bytes from base to limit, gaps included."""
        return self.limit - self.base

    def __len__(self) -> int:
        return sum(len(s.data) for s in self.spans)

    def _span_at(self, addr: int) -> Span | None:
        i = bisect_right(self._starts, addr) - 1
        if i >= 0 and addr < self.spans[i].end:
            return self.spans[i]
        return None

    def byte_at(self, addr: int) -> int | None:
        """Populated byte at ``addr``, or None."""
        span = self._span_at(addr)
        return span.data[addr - span.addr] if span is not None else None

    def read(self, addr: int, length: int) -> bytes:
        """Read bytes; unpopulated addresses read as 0x00."""
        out = bytearray(length)
        for span in self.spans:
            lo = max(addr, span.addr)
            hi = min(addr + length, span.end)
            if lo < hi:
                out[lo - addr : hi - addr] = span.data[lo - span.addr : hi - span.addr]
        return bytes(out)

    def to_bytes_map(self) -> dict[int, int]:
        return {span.addr + i: b for span in self.spans for i, b in enumerate(span.data)}
