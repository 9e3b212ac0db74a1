"""``.bin`` and ``.mem`` artifact writers and loaders.

``.bin`` is a flat little-endian dump from image base to limit with gaps
filled with 0x00, described by a sidecar ``base=0x..`` / ``length=..`` file.
``.mem`` is readmemh-style text: ``@<word address>`` directives followed by
one 8-hex-digit word per line, where word address = byte address / 4.
"""

import re
from dataclasses import dataclass

from nvbm.codegen.assembler import Program
from nvbm.errors import ConfigSyntaxError
from nvbm.weights.image import MemoryImage

WORD_SIZE = 4

_META_RE = re.compile(r"(base|length)\s*=\s*(\S+)")
_WORD_RE = re.compile(r"[0-9a-fA-F]{1,8}")


@dataclass(frozen=True)
class BinMetadata:
    """Where a ``.bin`` dump belongs in DRAM."""

    base: int
    length: int

    def to_text(self) -> str:
        return f"base=0x{self.base:08x}\nlength={self.length}\n"

    @classmethod
    def from_text(cls, text: str) -> "BinMetadata":
        values: dict[str, int] = {}
        for line_no, raw in enumerate(text.splitlines(), start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            match = _META_RE.fullmatch(line)
            if match is None:
                raise ConfigSyntaxError(line_no, f"expected base=0x<hex> or length=<decimal>, got {line!r}")
            key, value = match.groups()
            try:
                values[key] = int(value, 16) if key == "base" else int(value)
            except ValueError:
                raise ConfigSyntaxError(line_no, f"bad {key} value {value!r}") from None
        if set(values) != {"base", "length"}:
            raise ConfigSyntaxError(None, "metadata needs both base and length")
        return cls(base=values["base"], length=values["length"])


def emit_bin(image: MemoryImage) -> tuple[bytes, BinMetadata]:
    """Flat dump of the image and its placement metadata."""
    return image.read(image.base, image.span_bytes), BinMetadata(image.base, image.span_bytes)


def load_bin(data: bytes, metadata: BinMetadata) -> MemoryImage:
    """Rebuild an image from a ``.bin`` dump; gap bytes come back as 0x00."""
    if len(data) != metadata.length:
        raise ValueError(f".bin holds {len(data)} bytes, metadata says {metadata.length}")
    return MemoryImage.from_spans([(metadata.base, data)] if data else [])


def _image_words(image: MemoryImage) -> dict[int, int]:
    words: dict[int, int] = {}
    for span in image.spans:
        for i, value in enumerate(span.data):
            addr = span.addr + i
            word_addr, lane = divmod(addr, WORD_SIZE)
            words[word_addr] = words.get(word_addr, 0) | (value << (8 * lane))
    return words


def emit_mem(source: MemoryImage | Program) -> str:
    """readmemh text for an image or a program.

    Partial words are zero-padded. A directive opens each run of consecutive
    word addresses.
    """
    if isinstance(source, Program):
        words = {source.origin // WORD_SIZE + i: w for i, w in enumerate(source.words)}
    else:
        words = _image_words(source)

    lines: list[str] = []
    expected: int | None = None
    for word_addr in sorted(words):
        if word_addr != expected:
            lines.append(f"@{word_addr:08x}")
        lines.append(f"{words[word_addr]:08x}")
        expected = word_addr + 1
    return "".join(f"{line}\n" for line in lines)


def load_mem(text: str) -> dict[int, int]:
    """Parse readmemh text into word address -> word.

    Raises:
        ConfigSyntaxError: Malformed directive or word.
    """
    words: dict[int, int] = {}
    addr = 0
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("//", 1)[0].split("#", 1)[0].strip()
        if not line:
            continue
        for token in line.split():
            if token.startswith("@"):
                try:
                    addr = int(token[1:], 16)
                except ValueError:
                    raise ConfigSyntaxError(line_no, f"bad address directive {token!r}") from None
                continue
            if _WORD_RE.fullmatch(token) is None:
                raise ConfigSyntaxError(line_no, f"bad word {token!r}")
            words[addr] = int(token, 16)
            addr += 1
    return words


def image_from_mem(text: str) -> MemoryImage:
    content: dict[int, int] = {}
    for word_addr, word in load_mem(text).items():
        for lane, value in enumerate(word.to_bytes(WORD_SIZE, "little")):
            content[word_addr * WORD_SIZE + lane] = value
    return MemoryImage.from_bytes(content)


def program_from_mem(text: str) -> Program:
    """Load a program written by emit_mem; words must be contiguous.

    Raises:
        ConfigSyntaxError: Empty text or a gap between words.
    """
    words = load_mem(text)
    if not words:
        raise ConfigSyntaxError(None, "program .mem holds no words")
    first = min(words)
    if sorted(words) != list(range(first, first + len(words))):
        raise ConfigSyntaxError(None, "program .mem words are not contiguous")
    return Program(origin=first * WORD_SIZE, words=tuple(words[a] for a in sorted(words)))


def emit_program_bin(program: Program) -> bytes:
    """Raw little-endian program words."""
    return b"".join(word.to_bytes(WORD_SIZE, "little") for word in program.words)
