"""Functional RV32I interpreter for the generated instruction subset."""

from collections.abc import Callable

from nvbm.codegen.assembler import Program
from nvbm.codegen.isa import Instruction, decode_instr
from nvbm.errors import BusFault, UndecodableWord, UnsupportedInstruction
from nvbm.models.pydantic_models import DEFAULT_PROGRAM_WORDS, MASK32
from nvbm.sim.bus import SystemBus

MEMORY_OPS = frozenset({"lw", "sw"})


class Cpu:
    """Instruction-at-a-time RV32I core fetching from a private program memory.

    The core halts on ``ebreak`` or on an instruction whose next pc is its
    own pc (``jal x0, 0``).
    """

    def __init__(self, program: Program, program_words: int = DEFAULT_PROGRAM_WORDS) -> None:
        if program.end > 4 * program_words:
            raise ValueError(f"program ends at 0x{program.end:x}, beyond {program_words} words of program memory")
        self.program = program
        self.program_words = program_words
        self.x = [0] * 32
        self.pc = program.origin
        self.retired = 0
        self.halted = False
        self._decoded: dict[int, Instruction] = {}
        self._handlers: dict[str, Callable[[Instruction, SystemBus], int]] = {
            "lui": self._lui,
            "auipc": self._auipc,
            "addi": self._addi,
            "andi": self._andi,
            "and": self._and,
            "lw": self._lw,
            "sw": self._sw,
            "beq": self._beq,
            "bne": self._bne,
            "jal": self._jal,
            "jalr": self._jalr,
            "ebreak": self._ebreak,
        }

    def _set(self, rd: int, value: int) -> None:
        if rd:
            self.x[rd] = value & MASK32

    def peek(self) -> Instruction:
        """Decode the instruction at pc without executing it.

        Raises:
            BusFault: pc outside program memory or misaligned.
            UnsupportedInstruction: The word is outside the supported subset.
        """
        cached = self._decoded.get(self.pc)
        if cached is not None:
            return cached
        if self.pc % 4 or not 0 <= self.pc < 4 * self.program_words:
            raise BusFault(self.pc, "instruction fetch outside program memory")
        index = (self.pc - self.program.origin) // 4
        word = self.program.words[index] if 0 <= index < len(self.program.words) else 0
        try:
            instr = decode_instr(word, self.pc)
        except UndecodableWord:
            raise UnsupportedInstruction(word, self.pc) from None
        self._decoded[self.pc] = instr
        return instr

    def effective_address(self, instr: Instruction) -> int:
        return (self.x[instr.rs1] + instr.imm) & MASK32

    def step(self, bus: SystemBus) -> None:
        """Execute one instruction; bus faults propagate without retiring it."""
        instr = self.peek()
        pc = self.pc
        next_pc = self._handlers[instr.mnemonic](instr, bus)
        self.retired += 1
        if next_pc == pc or instr.mnemonic == "ebreak":
            self.halted = True
        self.pc = next_pc & MASK32

    def _lui(self, i: Instruction, bus: SystemBus) -> int:
        self._set(i.rd, i.imm << 12)
        return self.pc + 4

    def _auipc(self, i: Instruction, bus: SystemBus) -> int:
        self._set(i.rd, self.pc + (i.imm << 12))
        return self.pc + 4

    def _addi(self, i: Instruction, bus: SystemBus) -> int:
        self._set(i.rd, self.x[i.rs1] + i.imm)
        return self.pc + 4

    def _andi(self, i: Instruction, bus: SystemBus) -> int:
        self._set(i.rd, self.x[i.rs1] & (i.imm & MASK32))
        return self.pc + 4

    def _and(self, i: Instruction, bus: SystemBus) -> int:
        self._set(i.rd, self.x[i.rs1] & self.x[i.rs2])
        return self.pc + 4

    def _lw(self, i: Instruction, bus: SystemBus) -> int:
        self._set(i.rd, bus.load(self.effective_address(i)))
        return self.pc + 4

    def _sw(self, i: Instruction, bus: SystemBus) -> int:
        bus.store(self.effective_address(i), self.x[i.rs2])
        return self.pc + 4

    def _beq(self, i: Instruction, bus: SystemBus) -> int:
        return self.pc + i.imm if self.x[i.rs1] == self.x[i.rs2] else self.pc + 4

    def _bne(self, i: Instruction, bus: SystemBus) -> int:
        return self.pc + i.imm if self.x[i.rs1] != self.x[i.rs2] else self.pc + 4

    def _jal(self, i: Instruction, bus: SystemBus) -> int:
        link = self.pc + 4
        self._set(i.rd, link)
        return self.pc + i.imm

    def _jalr(self, i: Instruction, bus: SystemBus) -> int:
        target = (self.x[i.rs1] + i.imm) & ~1
        self._set(i.rd, self.pc + 4)
        return target

    def _ebreak(self, i: Instruction, bus: SystemBus) -> int:
        return self.pc
