"""Two-pass assembler and disassembler for the RV32I subset.

Source grammar: one instruction per line, optional ``label:`` prefixes,
``#`` comments, registers ``x0``-``x31``, decimal or 0x-hex immediates.
Branch and jump targets are a label, ``.`` (the instruction itself) or a
signed pc-relative byte offset.
"""

import re
from dataclasses import dataclass, field

from nvbm.codegen.isa import FORMATS, Instruction, decode_instr, encode_instr, format_instr
from nvbm.errors import (
    AsmError,
    DuplicateLabel,
    InvalidRegister,
    UndefinedLabel,
    UnknownMnemonic,
)

_LABEL_RE = re.compile(r"\s*([A-Za-z_][\w.]*)\s*:")
_REG_RE = re.compile(r"x([0-9]|[12][0-9]|3[01])")
_INT_RE = re.compile(r"[+-]?(0[xX][0-9a-fA-F]+|[0-9]+)")
_MEM_RE = re.compile(r"(.+)\((.+)\)")
_IDENT_RE = re.compile(r"[A-Za-z_][\w.]*")

# Operand count per format
_ARITY = {"U": 2, "I": 3, "L": 2, "R": 3, "S": 2, "B": 3, "J": 2, "N": 0}


@dataclass(frozen=True)
class Program:
    """Encoded program placed at ``origin`` in program memory."""

    origin: int
    words: tuple[int, ...]
    symbols: dict[str, int] = field(default_factory=dict, compare=False)

    @property
    def end(self) -> int:
        return self.origin + 4 * len(self.words)


@dataclass
class _SourceLine:
    line_no: int
    addr: int
    mnemonic: str
    operands: list[str]


def _reg(text: str, line_no: int) -> int:
    match = _REG_RE.fullmatch(text.strip())
    if match is None:
        raise InvalidRegister(line_no, f"{text.strip()!r} is not a register x0-x31")
    return int(match.group(1))


def _int(text: str, line_no: int) -> int:
    text = text.strip()
    match = _INT_RE.fullmatch(text)
    if match is None:
        raise AsmError(line_no, f"{text!r} is not an integer")
    digits = match.group(1)
    value = int(digits, 16) if digits[:2].lower() == "0x" else int(digits)
    return -value if text.startswith("-") else value


def _mem(text: str, line_no: int) -> tuple[int, int]:
    """Parse ``imm(xN)`` into (imm, reg)."""
    match = _MEM_RE.fullmatch(text.strip())
    if match is None:
        raise AsmError(line_no, f"{text.strip()!r} is not an offset(register) operand")
    return _int(match.group(1), line_no), _reg(match.group(2), line_no)


def _split_source(text: str, origin: int) -> tuple[list[_SourceLine], dict[str, int]]:
    """First pass: strip comments, collect labels and instruction lines."""
    lines: list[_SourceLine] = []
    symbols: dict[str, int] = {}
    for line_no, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0]
        while (match := _LABEL_RE.match(body)) is not None:
            label = match.group(1)
            if label in symbols:
                raise DuplicateLabel(line_no, f"label {label!r} already defined")
            symbols[label] = origin + 4 * len(lines)
            body = body[match.end() :]
        body = body.strip()
        if not body:
            continue
        mnemonic, *tail = body.split(None, 1)
        mnemonic = mnemonic.lower()
        rest = tail[0] if tail else ""
        if mnemonic not in FORMATS:
            raise UnknownMnemonic(line_no, f"unknown mnemonic {mnemonic!r}")
        operands = [op.strip() for op in rest.split(",")] if rest.strip() else []
        lines.append(_SourceLine(line_no, origin + 4 * len(lines), mnemonic, operands))
    return lines, symbols


def _target(text: str, pc: int, symbols: dict[str, int], line_no: int) -> int:
    text = text.strip()
    if text == ".":
        return 0
    if _IDENT_RE.fullmatch(text):
        if text not in symbols:
            raise UndefinedLabel(line_no, f"undefined label {text!r}")
        return symbols[text] - pc
    return _int(text, line_no)


def _instruction(src: _SourceLine, symbols: dict[str, int]) -> Instruction:
    m, ops, n = src.mnemonic, src.operands, src.line_no
    fmt = FORMATS[m][0]
    if len(ops) != _ARITY[fmt]:
        raise AsmError(n, f"{m} takes {_ARITY[fmt]} operands, got {len(ops)}")
    if fmt == "U":
        return Instruction(m, rd=_reg(ops[0], n), imm=_int(ops[1], n))
    if fmt == "I":
        return Instruction(m, rd=_reg(ops[0], n), rs1=_reg(ops[1], n), imm=_int(ops[2], n))
    if fmt == "L":
        imm, rs1 = _mem(ops[1], n)
        return Instruction(m, rd=_reg(ops[0], n), rs1=rs1, imm=imm)
    if fmt == "R":
        return Instruction(m, rd=_reg(ops[0], n), rs1=_reg(ops[1], n), rs2=_reg(ops[2], n))
    if fmt == "S":
        imm, rs1 = _mem(ops[1], n)
        return Instruction(m, rs1=rs1, rs2=_reg(ops[0], n), imm=imm)
    if fmt == "B":
        return Instruction(
            m, rs1=_reg(ops[0], n), rs2=_reg(ops[1], n), imm=_target(ops[2], src.addr, symbols, n)
        )
    if fmt == "J":
        return Instruction(m, rd=_reg(ops[0], n), imm=_target(ops[1], src.addr, symbols, n))
    return Instruction(m)


def assemble(text: str, origin: int = 0) -> Program:
    """Assemble source text into a Program.

    Args:
        text: Assembly source.
        origin: Program memory address of the first instruction.

    Raises:
        UnknownMnemonic, UndefinedLabel, DuplicateLabel, ImmediateOutOfRange,
        InvalidRegister, AsmError: With the 1-based source line number.
    """
    lines, symbols = _split_source(text, origin)
    words = []
    for src in lines:
        try:
            words.append(encode_instr(_instruction(src, symbols)))
        except AsmError as e:
            if e.line_no is not None:
                raise
            raise type(e)(src.line_no, e.reason) from e
    return Program(origin=origin, words=tuple(words), symbols=symbols)


def disassemble(program: Program) -> str:
    """Canonical source for a program: one instruction per line, numeric targets.

    Raises:
        UndecodableWord: A word outside the supported subset.
    """
    return "".join(
        f"{format_instr(decode_instr(word, program.origin + 4 * i))}\n"
        for i, word in enumerate(program.words)
    )
