"""RV32I base-subset instruction encoding and decoding.

Only the instructions generated programs need are supported:
lui, auipc, addi, andi, and, lw, sw, beq, bne, jal, jalr, ebreak.
"""

from dataclasses import dataclass

from nvbm.errors import (
    ImmediateOutOfRange,
    InvalidRegister,
    UndecodableWord,
    UndefinedLabel,
    UnknownMnemonic,
)

MASK32 = 0xFFFF_FFFF
EBREAK_WORD = 0x0010_0073

# mnemonic -> (format, opcode, funct3, funct7)
FORMATS: dict[str, tuple[str, int, int, int]] = {
    "lui": ("U", 0x37, 0, 0),
    "auipc": ("U", 0x17, 0, 0),
    "addi": ("I", 0x13, 0x0, 0),
    "andi": ("I", 0x13, 0x7, 0),
    "lw": ("L", 0x03, 0x2, 0),
    "jalr": ("L", 0x67, 0x0, 0),
    "and": ("R", 0x33, 0x7, 0x00),
    "sw": ("S", 0x23, 0x2, 0),
    "beq": ("B", 0x63, 0x0, 0),
    "bne": ("B", 0x63, 0x1, 0),
    "jal": ("J", 0x6F, 0, 0),
    "ebreak": ("N", 0x73, 0, 0),
}

# Signed (lo, hi) immediate range and required alignment per format
IMM_RANGES: dict[str, tuple[int, int, int]] = {
    "U": (0, 0xF_FFFF, 1),
    "I": (-2048, 2047, 1),
    "L": (-2048, 2047, 1),
    "S": (-2048, 2047, 1),
    "B": (-4096, 4094, 2),
    "J": (-(1 << 20), (1 << 20) - 2, 2),
    "R": (0, 0, 1),
    "N": (0, 0, 1),
}

_DECODE_I = {0x0: "addi", 0x7: "andi"}
_DECODE_B = {0x0: "beq", 0x1: "bne"}


@dataclass(frozen=True, slots=True)
class Instruction:
    """One instruction with numeric operands.

    ``imm`` holds the U-type upper immediate, the signed I/S offset, or the
    pc-relative B/J offset. ``label`` names an unresolved B/J target.
    Operands a format does not use stay 0.
    """

    mnemonic: str
    rd: int = 0
    rs1: int = 0
    rs2: int = 0
    imm: int = 0
    label: str | None = None

    @property
    def fmt(self) -> str:
        return FORMATS[self.mnemonic][0]


def sext(value: int, bits: int) -> int:
    """Sign-extend the low ``bits`` of value."""
    value &= (1 << bits) - 1
    return value - (1 << bits) if value >> (bits - 1) else value


def hi_lo(value: int) -> tuple[int, int]:
    """Split a 32-bit value for a lui/addi pair.

    ``hi`` is rounded so that adding the sign-extended 12-bit ``lo`` restores
    the value: ((hi << 12) + lo) & 0xFFFFFFFF == value.
    """
    value &= MASK32
    hi = ((value + 0x800) >> 12) & 0xF_FFFF
    lo = sext(value, 12)
    return hi, lo


def _check_reg(reg: int, name: str) -> int:
    if not 0 <= reg <= 31:
        raise InvalidRegister(None, f"{name} x{reg} is not a register x0-x31")
    return reg


def check_imm(fmt: str, imm: int, mnemonic: str) -> None:
    lo, hi, align = IMM_RANGES[fmt]
    if not lo <= imm <= hi or imm % align:
        raise ImmediateOutOfRange(None, f"{mnemonic} immediate {imm} outside [{lo}, {hi}] step {align}")


def encode_instr(instr: Instruction) -> int:
    """Encode one instruction as a 32-bit word.

    Raises:
        InvalidRegister: A register index outside x0-x31.
        ImmediateOutOfRange: Immediate outside its format's range or misaligned.
        UndefinedLabel: The instruction still carries an unresolved label.
    """
    if instr.mnemonic not in FORMATS:
        raise UnknownMnemonic(None, f"unsupported mnemonic {instr.mnemonic!r}")
    if instr.label is not None:
        raise UndefinedLabel(None, f"unresolved label {instr.label!r}")
    fmt, opcode, funct3, funct7 = FORMATS[instr.mnemonic]
    rd = _check_reg(instr.rd, "rd")
    rs1 = _check_reg(instr.rs1, "rs1")
    rs2 = _check_reg(instr.rs2, "rs2")
    imm = instr.imm
    check_imm(fmt, imm, instr.mnemonic)

    if fmt == "U":
        word = (imm << 12) | (rd << 7) | opcode
    elif fmt in ("I", "L"):
        word = ((imm & 0xFFF) << 20) | (rs1 << 15) | (funct3 << 12) | (rd << 7) | opcode
    elif fmt == "R":
        word = (funct7 << 25) | (rs2 << 20) | (rs1 << 15) | (funct3 << 12) | (rd << 7) | opcode
    elif fmt == "S":
        imm &= 0xFFF
        word = (
            ((imm >> 5) << 25) | (rs2 << 20) | (rs1 << 15) | (funct3 << 12)
            | ((imm & 0x1F) << 7) | opcode
        )
    elif fmt == "B":
        imm &= 0x1FFF
        word = (
            (((imm >> 12) & 1) << 31)
            | (((imm >> 5) & 0x3F) << 25)
            | (rs2 << 20)
            | (rs1 << 15)
            | (funct3 << 12)
            | (((imm >> 1) & 0xF) << 8)
            | (((imm >> 11) & 1) << 7)
            | opcode
        )
    elif fmt == "J":
        imm &= 0x1F_FFFF
        word = (
            (((imm >> 20) & 1) << 31)
            | (((imm >> 1) & 0x3FF) << 21)
            | (((imm >> 11) & 1) << 20)
            | (((imm >> 12) & 0xFF) << 12)
            | (rd << 7)
            | opcode
        )
    else:
        word = EBREAK_WORD
    return word & MASK32


def decode_instr(word: int, addr: int | None = None) -> Instruction:
    """Decode a 32-bit word of the supported subset.

    Raises:
        UndecodableWord: The word is not in the subset.
    """
    word &= MASK32
    opcode = word & 0x7F
    rd = (word >> 7) & 0x1F
    funct3 = (word >> 12) & 0x7
    rs1 = (word >> 15) & 0x1F
    rs2 = (word >> 20) & 0x1F
    funct7 = word >> 25

    if opcode in (0x37, 0x17):
        return Instruction("lui" if opcode == 0x37 else "auipc", rd=rd, imm=word >> 12)
    if opcode == 0x13 and funct3 in _DECODE_I:
        return Instruction(_DECODE_I[funct3], rd=rd, rs1=rs1, imm=sext(word >> 20, 12))
    if opcode == 0x03 and funct3 == 0x2:
        return Instruction("lw", rd=rd, rs1=rs1, imm=sext(word >> 20, 12))
    if opcode == 0x67 and funct3 == 0x0:
        return Instruction("jalr", rd=rd, rs1=rs1, imm=sext(word >> 20, 12))
    if opcode == 0x33 and funct3 == 0x7 and funct7 == 0:
        return Instruction("and", rd=rd, rs1=rs1, rs2=rs2)
    if opcode == 0x23 and funct3 == 0x2:
        return Instruction("sw", rs1=rs1, rs2=rs2, imm=sext((funct7 << 5) | rd, 12))
    if opcode == 0x63 and funct3 in _DECODE_B:
        imm = (
            ((word >> 31) << 12)
            | (((word >> 7) & 1) << 11)
            | (((word >> 25) & 0x3F) << 5)
            | (((word >> 8) & 0xF) << 1)
        )
        return Instruction(_DECODE_B[funct3], rs1=rs1, rs2=rs2, imm=sext(imm, 13))
    if opcode == 0x6F:
        imm = (
            ((word >> 31) << 20)
            | (((word >> 12) & 0xFF) << 12)
            | (((word >> 20) & 1) << 11)
            | (((word >> 21) & 0x3FF) << 1)
        )
        return Instruction("jal", rd=rd, imm=sext(imm, 21))
    if word == EBREAK_WORD:
        return Instruction("ebreak")
    raise UndecodableWord(word, addr)


def format_imm(value: int) -> str:
    """Signed hex immediate: 0x4, -0x800."""
    return f"-0x{-value:x}" if value < 0 else f"0x{value:x}"


def format_instr(instr: Instruction) -> str:
    """Canonical assembly text for one instruction (no indentation)."""
    m = instr.mnemonic
    fmt = instr.fmt
    target = instr.label if instr.label is not None else str(instr.imm)
    if fmt == "U":
        return f"{m} x{instr.rd}, 0x{instr.imm:x}"
    if fmt == "I":
        return f"{m} x{instr.rd}, x{instr.rs1}, {format_imm(instr.imm)}"
    if fmt == "L":
        return f"{m} x{instr.rd}, {instr.imm}(x{instr.rs1})"
    if fmt == "R":
        return f"{m} x{instr.rd}, x{instr.rs1}, x{instr.rs2}"
    if fmt == "S":
        return f"{m} x{instr.rs2}, {instr.imm}(x{instr.rs1})"
    if fmt == "B":
        return f"{m} x{instr.rs1}, x{instr.rs2}, {target}"
    if fmt == "J":
        return f"{m} x{instr.rd}, {target}"
    return m
