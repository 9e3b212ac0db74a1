"""Deterministic synthetic VP logs for tests and demos."""

import random

from nvbm.models.pydantic_models import (
    CsbTransaction,
    DbbTransaction,
    SyntheticTraceSpec,
    TraceBundle,
    TraceShape,
)
from nvbm.trace.parser import format_csb_line, format_dbb_line

# Lines a real VP log interleaves with adaptor traffic
CHATTER = (
    "qemu-system-aarch64: info: loading kernel image",
    "SystemC: simulation time 1200 ns",
    "nvdla.gic: irq 0 deasserted",
    "[nvdla_runtime] submitting task 0",
    "axi2mem: window configured",
    "nvdla: loadable parsed, 9 layers",
)


def _csb_transactions(spec: SyntheticTraceSpec, rng: random.Random) -> list[CsbTransaction]:
    kinds = [True] * spec.csb_writes + [False] * spec.csb_reads
    if spec.shape is TraceShape.SHUFFLED:
        rng.shuffle(kinds)

    lo, hi = spec.csb_addr_range
    first = (lo + 3) & ~3
    last = hi & ~3
    txs = []
    for seq, is_write in enumerate(kinds):
        addr = rng.randrange(first, last + 1, 4) if first <= last else lo
        txs.append(CsbTransaction(seq=seq, addr=addr, data=rng.getrandbits(32), is_write=is_write))
    return txs


def _dbb_transactions(spec: SyntheticTraceSpec, rng: random.Random) -> list[DbbTransaction]:
    """Bursts that behave like real memory: reads return what the shadow holds."""
    kinds = [False] * spec.dbb_reads + [True] * spec.dbb_writes
    rng.shuffle(kinds)

    lo, hi = spec.dbb_addr_range
    beat = spec.beat_bytes
    shadow: dict[int, int] = {}
    txs = []
    for seq, is_write in enumerate(kinds):
        length = beat * rng.randint(1, spec.max_beats)
        first = (lo + beat - 1) // beat * beat
        last = (hi - length + 1) // beat * beat
        addr = rng.randrange(first, last + 1, beat) if first <= last else lo

        if is_write:
            payload = rng.randbytes(length)
            for i, value in enumerate(payload):
                shadow[addr + i] = value
        else:
            content = []
            for i in range(length):
                if addr + i not in shadow:
                    shadow[addr + i] = rng.getrandbits(8)
                content.append(shadow[addr + i])
            payload = bytes(content)
        txs.append(DbbTransaction(seq=seq, addr=addr, payload=payload, is_write=is_write))
    return txs


def gen_synthetic_trace(spec: SyntheticTraceSpec) -> tuple[str, TraceBundle]:
    """Generate a log text and the bundle it encodes.

    CSB and DBB lines are interleaved at random and optional chatter lines
    are mixed in; ``parse_log(text, source=spec.source)`` equals the bundle.

    Args:
        spec: Counts, address ranges and seed.

    Returns:
        Tuple of (log text, ground-truth bundle).
    """
    rng = random.Random(spec.seed)
    csb = _csb_transactions(spec, rng)
    dbb = _dbb_transactions(spec, rng)

    lines: list[str] = []
    ci = di = 0
    while ci < len(csb) or di < len(dbb):
        take_csb = di >= len(dbb) or (ci < len(csb) and rng.random() < 0.5)
        if take_csb:
            lines.append(format_csb_line(csb[ci]))
            ci += 1
        else:
            lines.append(format_dbb_line(dbb[di]))
            di += 1

    for _ in range(spec.chatter_lines):
        lines.insert(rng.randint(0, len(lines)), rng.choice(CHATTER))

    text = "".join(f"{line}\n" for line in lines)
    return text, TraceBundle(csb=csb, dbb=dbb, source=spec.source)


def emit_log(bundle: TraceBundle) -> str:
    """Render a bundle as canonical log text: CSB lines first, then DBB lines."""
    lines = [format_csb_line(tx) for tx in bundle.csb]
    lines.extend(format_dbb_line(tx) for tx in bundle.dbb)
    return "".join(f"{line}\n" for line in lines)
