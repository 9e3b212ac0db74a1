"""Exception hierarchy for the nvbm toolchain."""


class NvbmError(Exception):
    """Base class for all toolchain errors."""


class LineError(NvbmError):
    """Error tied to a 1-based line of some text input."""

    def __init__(self, line_no: int | None, reason: str) -> None:
        self.line_no = line_no
        self.reason = reason
        super().__init__(f"line {line_no}: {reason}" if line_no is not None else reason)


class MalformedTransactionLine(LineError):
    """A log line carries a transaction keyword but its fields do not parse."""

    def __init__(self, line_no: int | None, reason: str, line: str = "") -> None:
        self.line = line
        super().__init__(line_no, reason)


class PayloadLengthError(MalformedTransactionLine):
    """A DBB payload is empty or not a multiple of 4 bytes."""


class ConfigSyntaxError(LineError):
    """A configuration or memory-map file line does not parse."""


class AddressOutOfWindow(NvbmError):
    """An address falls outside the window it must live in."""

    def __init__(self, addr: int, window: str) -> None:
        self.addr = addr
        self.window = window
        super().__init__(f"address 0x{addr:x} outside {window}")


class AsmError(LineError):
    """Assembly source error."""


class UnknownMnemonic(AsmError):
    pass


class UndefinedLabel(AsmError):
    pass


class DuplicateLabel(AsmError):
    pass


class ImmediateOutOfRange(AsmError):
    pass


class InvalidRegister(AsmError):
    pass


class UndecodableWord(NvbmError):
    """A 32-bit word is not an instruction of the supported subset."""

    def __init__(self, word: int, addr: int | None = None) -> None:
        self.word = word
        self.addr = addr
        where = f" at 0x{addr:08x}" if addr is not None else ""
        super().__init__(f"undecodable word 0x{word:08x}{where}")


class SimulationError(NvbmError):
    """Raised inside the simulator; converted to a SimStatus by the run loop."""


class BusFault(SimulationError):
    def __init__(self, addr: int, reason: str = "no device") -> None:
        self.addr = addr
        super().__init__(f"bus fault at 0x{addr:08x}: {reason}")


class UnsupportedInstruction(SimulationError):
    def __init__(self, word: int, pc: int) -> None:
        self.word = word
        self.pc = pc
        super().__init__(f"unsupported instruction 0x{word:08x} at pc 0x{pc:08x}")


class ScriptMismatch(SimulationError):
    """The program read a register the NVDLA script did not expect next."""

    def __init__(self, addr: int, expected: int | None) -> None:
        self.addr = addr
        self.expected = expected
        want = f"0x{expected:08x}" if expected is not None else "no further reads"
        super().__init__(f"read of 0x{addr:08x}, script expects {want}")


class StageError(NvbmError):
    """A pipeline stage failed; wraps the underlying cause."""

    def __init__(self, stage: str, cause: Exception) -> None:
        self.stage = stage
        self.cause = cause
        super().__init__(f"stage {stage} failed: {cause}")
