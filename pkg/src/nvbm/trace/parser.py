"""Virtual-platform log parsing into CSB and DBB transactions.

A matching line carries one of the interface keywords followed by
whitespace-separated ``key=value`` tokens, in any order::

    nvdla.csb_adaptor: iswrite=1 addr=0x00003004 data=0x00000001
    nvdla.dbb_adaptor: iswrite=0 addr=0xc0000000 data=0x1122334455667788 len=8

Text before the keyword (timestamps, module paths) and unknown tokens are ignored.
DBB ``data`` is stored little-endian: its lowest byte lands at ``addr``.
"""

import logging
import re

from nvbm.errors import MalformedTransactionLine, PayloadLengthError
from nvbm.models.pydantic_models import MASK32, MAX_U64, CsbTransaction, DbbTransaction, TraceBundle

logger = logging.getLogger(__name__)

CSB_KEYWORD = "nvdla.csb_adaptor"
DBB_KEYWORD = "nvdla.dbb_adaptor"

_HEX_RE = re.compile(r"0[xX]([0-9a-fA-F]+)")
_DEC_RE = re.compile(r"[0-9]+")


def _fields(line: str, keyword: str, line_no: int | None) -> dict[str, str]:
    """Collect ``key=value`` tokens following the keyword."""
    rest = line[line.index(keyword) + len(keyword) :]
    if rest and not (rest[0] == ":" or rest[0].isspace()):
        raise MalformedTransactionLine(line_no, f"no separator after {keyword}", line)
    fields: dict[str, str] = {}
    for token in rest.lstrip(":").split():
        key, sep, value = token.partition("=")
        if not sep:
            continue
        if key in fields:
            raise MalformedTransactionLine(line_no, f"duplicate field {key!r}", line)
        fields[key] = value
    return fields


def _require(fields: dict[str, str], key: str, line: str, line_no: int | None) -> str:
    try:
        return fields[key]
    except KeyError:
        raise MalformedTransactionLine(line_no, f"missing field {key!r}", line) from None


def _hex_field(fields: dict[str, str], key: str, line: str, line_no: int | None) -> tuple[int, int]:
    """Return (value, digit count) of a 0x-prefixed hex field."""
    raw = _require(fields, key, line, line_no)
    match = _HEX_RE.fullmatch(raw)
    if match is None:
        raise MalformedTransactionLine(line_no, f"{key}={raw!r} is not 0x-prefixed hex", line)
    digits = match.group(1)
    return int(digits, 16), len(digits)


def _iswrite(fields: dict[str, str], line: str, line_no: int | None) -> bool:
    raw = _require(fields, "iswrite", line, line_no)
    if raw not in ("0", "1"):
        raise MalformedTransactionLine(line_no, f"iswrite={raw!r} must be 0 or 1", line)
    return raw == "1"


def parse_csb_line(line: str, seq: int = 0, line_no: int | None = None) -> CsbTransaction | None:
    """Parse one CSB register transaction.

    Args:
        line: One log line (without line terminator).
        seq: Sequence number to assign.
        line_no: 1-based line number for diagnostics.

    Returns:
        The transaction, or None if the line does not carry the CSB keyword.

    Raises:
        MalformedTransactionLine: Keyword present but fields do not parse.
    """
    if CSB_KEYWORD not in line:
        return None
    fields = _fields(line, CSB_KEYWORD, line_no)
    is_write = _iswrite(fields, line, line_no)
    addr, _ = _hex_field(fields, "addr", line, line_no)
    data, _ = _hex_field(fields, "data", line, line_no)
    if addr > MASK32:
        raise MalformedTransactionLine(line_no, f"addr 0x{addr:x} exceeds 32 bits", line)
    if data > MASK32:
        raise MalformedTransactionLine(line_no, f"data 0x{data:x} exceeds 32 bits", line)
    return CsbTransaction(seq=seq, addr=addr, data=data, is_write=is_write)


def parse_dbb_line(line: str, seq: int = 0, line_no: int | None = None) -> DbbTransaction | None:
    """Parse one DBB memory transaction.

    The byte count comes from ``len`` (decimal) when present, otherwise from
    the number of hex digits in ``data``.

    Raises:
        MalformedTransactionLine: Keyword present but fields do not parse.
        PayloadLengthError: Byte count is zero or not a multiple of 4.
    """
    if DBB_KEYWORD not in line:
        return None
    fields = _fields(line, DBB_KEYWORD, line_no)
    is_write = _iswrite(fields, line, line_no)
    addr, _ = _hex_field(fields, "addr", line, line_no)
    data, digits = _hex_field(fields, "data", line, line_no)

    if "len" in fields:
        if _DEC_RE.fullmatch(fields["len"]) is None:
            raise MalformedTransactionLine(line_no, f"len={fields['len']!r} is not decimal", line)
        length = int(fields["len"])
    else:
        length = (digits + 1) // 2

    if length == 0 or length % 4:
        raise PayloadLengthError(line_no, f"payload length {length} is not a positive multiple of 4", line)
    if data >> (8 * length):
        raise MalformedTransactionLine(line_no, f"data does not fit in {length} bytes", line)
    if addr > MAX_U64 or addr + length > MAX_U64 + 1:
        raise MalformedTransactionLine(line_no, "transaction exceeds the 64-bit address space", line)

    return DbbTransaction(
        seq=seq, addr=addr, payload=data.to_bytes(length, "little"), is_write=is_write
    )


def parse_log(text: str, lenient: bool = False, source: str = "") -> TraceBundle:
    """Parse a VP log into a TraceBundle.

    Each line carrying exactly one of the two keywords yields one transaction;
    everything else is ignored. Sequence numbers count matched lines per list.

    Args:
        text: Log text, any line endings.
        lenient: Skip malformed lines with a warning instead of raising.
        source: Provenance label stored on the bundle.

    Raises:
        MalformedTransactionLine: On the first malformed line, in strict mode.
    """
    csb: list[CsbTransaction] = []
    dbb: list[DbbTransaction] = []
    skipped = 0

    for line_no, line in enumerate(text.splitlines(), start=1):
        has_csb = CSB_KEYWORD in line
        has_dbb = DBB_KEYWORD in line
        if has_csb == has_dbb:
            if has_csb:
                logger.debug("line %d carries both keywords, ignored", line_no)
            continue
        try:
            if has_csb:
                csb_tx = parse_csb_line(line, seq=len(csb), line_no=line_no)
                assert csb_tx is not None
                csb.append(csb_tx)
            else:
                dbb_tx = parse_dbb_line(line, seq=len(dbb), line_no=line_no)
                assert dbb_tx is not None
                dbb.append(dbb_tx)
        except MalformedTransactionLine as e:
            if not lenient:
                raise
            skipped += 1
            logger.warning("skipping malformed line %d: %s", line_no, e.reason)

    logger.info("parsed %d CSB and %d DBB transactions from %s", len(csb), len(dbb), source or "log")
    return TraceBundle(csb=csb, dbb=dbb, source=source, skipped=skipped)


def format_csb_line(tx: CsbTransaction) -> str:
    """Canonical log line for a CSB transaction."""
    return f"{CSB_KEYWORD}: iswrite={int(tx.is_write)} addr=0x{tx.addr:08x} data=0x{tx.data:08x}"


def format_dbb_line(tx: DbbTransaction) -> str:
    """Canonical log line for a DBB transaction."""
    value = int.from_bytes(tx.payload, "little")
    digits = 2 * len(tx.payload)
    return (
        f"{DBB_KEYWORD}: iswrite={int(tx.is_write)} addr=0x{tx.addr:08x} "
        f"data=0x{value:0{digits}x} len={len(tx.payload)}"
    )
