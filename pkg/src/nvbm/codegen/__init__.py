"""RV32I code generation, assembly and disassembly."""

from nvbm.codegen.assembler import Program, assemble, disassemble
from nvbm.codegen.emitter import check_mailbox, emit_asm
from nvbm.codegen.isa import Instruction, decode_instr, encode_instr, format_instr, hi_lo

__all__ = [
    "Instruction",
    "Program",
    "assemble",
    "check_mailbox",
    "decode_instr",
    "disassemble",
    "emit_asm",
    "encode_instr",
    "format_instr",
    "hi_lo",
]
