"""Pydantic models for data validation."""

from enum import Enum

from pydantic import BaseModel, ConfigDict, Field, field_serializer, field_validator, model_validator

MASK32 = 0xFFFF_FFFF
MAX_U64 = (1 << 64) - 1

DEFAULT_RESULT_ADDR = 0x200F_FFF0
DEFAULT_SUCCESS_CODE = 0x600D_600D
DEFAULT_FAILURE_CODE = 0xBAAD_BAAD
DEFAULT_SCRATCH_REGS = (5, 6, 7, 28)
DEFAULT_PROGRAM_WORDS = 1 << 18


class CommandKind(str, Enum):
    """Register command kinds of the configuration file."""

    WRITE_REG = "write_reg"
    READ_REG = "read_reg"


class PollMode(str, Enum):
    """How trace-time register reads are enforced by generated code."""

    ALL = "all"
    LISTED = "listed"
    STRICT = "strict"


class MasterId(str, Enum):
    """Bus masters competing for DRAM."""

    CPU = "cpu"
    DBB = "dbb"


class ArbiterPolicy(str, Enum):
    """DRAM arbiter grant policies."""

    ROUND_ROBIN = "round_robin"
    CPU_FIRST = "cpu_first"
    DBB_FIRST = "dbb_first"


class Region(str, Enum):
    """Result of decoding a data address against the memory map."""

    NVDLA = "nvdla"
    DRAM = "dram"
    FAULT = "fault"


class SimStatus(str, Enum):
    """Terminal status of a simulation run."""

    SUCCESS = "success"
    FAILURE = "failure"
    WATCHDOG_EXPIRED = "watchdog_expired"
    BUS_FAULT = "bus_fault"
    SCRIPT_MISMATCH = "script_mismatch"
    UNSUPPORTED_INSTRUCTION = "unsupported_instruction"


class TraceShape(str, Enum):
    """Ordering of CSB transactions in a synthetic trace."""

    SHUFFLED = "shuffled"
    SANITY = "sanity"


class CsbTransaction(BaseModel):
    """One configuration-space register access recorded by the virtual platform."""

    seq: int = Field(..., ge=0, description="Position among CSB transactions of the log")
    addr: int = Field(..., ge=0, le=MASK32, description="Register byte address")
    data: int = Field(..., ge=0, le=MASK32, description="Register value")
    is_write: bool

    model_config = ConfigDict(frozen=True)


class DbbTransaction(BaseModel):
    """One data-backbone memory access recorded by the virtual platform."""

    seq: int = Field(..., ge=0, description="Position among DBB transactions of the log")
    addr: int = Field(..., ge=0, le=MAX_U64, description="VP byte address")
    payload: bytes = Field(..., description="Bytes in memory order (lowest address first)")
    is_write: bool

    model_config = ConfigDict(frozen=True)

    @field_validator("payload", mode="before")
    @classmethod
    def _payload_from_hex(cls, value: object) -> object:
        if isinstance(value, str):
            return bytes.fromhex(value)
        return value

    @field_serializer("payload", when_used="json")
    def _payload_to_hex(self, payload: bytes) -> str:
        return payload.hex()

    @model_validator(mode="after")
    def _check_extent(self) -> "DbbTransaction":
        if len(self.payload) < 4 or len(self.payload) % 4:
            raise ValueError(f"payload length {len(self.payload)} is not a positive multiple of 4")
        if self.addr + len(self.payload) > MAX_U64 + 1:
            raise ValueError("transaction wraps the 64-bit address space")
        return self

    @property
    def end(self) -> int:
        """One past the last byte address touched."""
        return self.addr + len(self.payload)


class TraceBundle(BaseModel):
    """Ordered CSB and DBB transactions parsed from one log."""

    csb: list[CsbTransaction] = Field(default_factory=list)
    dbb: list[DbbTransaction] = Field(default_factory=list)
    source: str = Field("", description="Provenance label")
    skipped: int = Field(0, ge=0, description="Malformed lines skipped in lenient mode")

    model_config = ConfigDict(frozen=True)

    @model_validator(mode="after")
    def _check_order(self) -> "TraceBundle":
        for name, txs in (("csb", self.csb), ("dbb", self.dbb)):
            for prev, cur in zip(txs, txs[1:]):
                if cur.seq <= prev.seq:
                    raise ValueError(f"{name} transactions out of order at seq {cur.seq}")
        return self

    def same_transactions(self, other: "TraceBundle") -> bool:
        """Compare transaction content, ignoring provenance."""
        return self.csb == other.csb and self.dbb == other.dbb


class Command(BaseModel):
    """One write_reg or read_reg action of the configuration file."""

    kind: CommandKind
    addr: int = Field(..., ge=0, le=MASK32)
    data: int = Field(..., ge=0, le=MASK32, description="Write data or expected read value")
    mask: int = Field(MASK32, ge=0, le=MASK32)
    poll: bool = False

    model_config = ConfigDict(frozen=True)

    @model_validator(mode="after")
    def _check_kind_fields(self) -> "Command":
        if self.kind is CommandKind.WRITE_REG:
            if self.poll or self.mask != MASK32:
                raise ValueError("write_reg carries no mask or poll flag")
        elif self.data & ~self.mask & MASK32:
            raise ValueError("read_reg expected value has bits outside its mask")
        return self

    @classmethod
    def write(cls, addr: int, data: int) -> "Command":
        return cls(kind=CommandKind.WRITE_REG, addr=addr, data=data)

    @classmethod
    def read(cls, addr: int, data: int, mask: int = MASK32, poll: bool = True) -> "Command":
        return cls(kind=CommandKind.READ_REG, addr=addr, data=data & mask, mask=mask, poll=poll)

    @property
    def is_write(self) -> bool:
        return self.kind is CommandKind.WRITE_REG


class PollPolicy(BaseModel):
    """Selects poll-until-match or single-check for each register read."""

    mode: PollMode = PollMode.ALL
    listed: frozenset[int] = Field(default_factory=frozenset)
    default_mask: int = Field(MASK32, ge=0, le=MASK32)
    masks: dict[int, int] = Field(default_factory=dict, description="Per-address mask overrides")

    model_config = ConfigDict(frozen=True)

    @model_validator(mode="after")
    def _check_listed(self) -> "PollPolicy":
        if self.listed and self.mode is not PollMode.LISTED:
            raise ValueError("listed addresses only apply to the listed poll mode")
        for addr, mask in self.masks.items():
            if not (0 <= addr <= MASK32 and 0 <= mask <= MASK32):
                raise ValueError(f"mask override 0x{addr:x} = 0x{mask:x} out of range")
        return self

    def mask_for(self, addr: int) -> int:
        return self.masks.get(addr, self.default_mask)

    def polls(self, addr: int) -> bool:
        if self.mode is PollMode.ALL:
            return True
        if self.mode is PollMode.LISTED:
            return addr in self.listed
        return False


class MemoryMap(BaseModel):
    """Data address map of the SoC system bus."""

    nvdla_start: int = Field(0x0, ge=0, le=MASK32)
    nvdla_end: int = Field(0xF_FFFF, ge=0, le=MASK32)
    dram_start: int = Field(0x10_0000, ge=0, le=MASK32)
    dram_end: int = Field(0x200F_FFFF, ge=0, le=MASK32)
    csb_stride: int = Field(1, description="Byte stride of one CSB register offset (1 or 4)")
    program_words: int = Field(DEFAULT_PROGRAM_WORDS, gt=0, description="Program memory size in words")

    model_config = ConfigDict(frozen=True)

    @model_validator(mode="after")
    def _check_ranges(self) -> "MemoryMap":
        if self.nvdla_start > self.nvdla_end or self.dram_start > self.dram_end:
            raise ValueError("memory map range start exceeds its end")
        if not (self.nvdla_end < self.dram_start or self.dram_end < self.nvdla_start):
            raise ValueError("NVDLA and DRAM ranges overlap")
        if self.csb_stride not in (1, 4):
            raise ValueError("csb_stride must be 1 or 4")
        return self

    @property
    def dram_size(self) -> int:
        return self.dram_end - self.dram_start + 1

    def csb_to_bus(self, csb_addr: int) -> int:
        """Byte address on the system bus for a CSB register address."""
        return self.nvdla_start + csb_addr * self.csb_stride

    def bus_to_csb(self, bus_addr: int) -> int:
        return (bus_addr - self.nvdla_start) // self.csb_stride


class AddressRebase(BaseModel):
    """Translation of VP addresses into the SoC DRAM window."""

    from_base: int = Field(..., ge=0, le=MAX_U64)
    to_base: int = Field(..., ge=0, le=MAX_U64)
    window: int = Field(..., gt=0)

    model_config = ConfigDict(frozen=True)

    def check_against(self, memory_map: MemoryMap) -> None:
        """Raise ValueError unless the target window lies inside DRAM."""
        if self.to_base < memory_map.dram_start:
            raise ValueError(f"rebase target 0x{self.to_base:x} below DRAM start")
        if self.to_base + self.window > memory_map.dram_end + 1:
            raise ValueError(f"rebase window 0x{self.window:x} at 0x{self.to_base:x} exceeds DRAM")


class CodegenOptions(BaseModel):
    """Knobs for bare-metal program generation."""

    result_addr: int = Field(DEFAULT_RESULT_ADDR, ge=0, le=MASK32)
    success_code: int = Field(DEFAULT_SUCCESS_CODE, ge=0, le=MASK32)
    failure_code: int = Field(DEFAULT_FAILURE_CODE, ge=0, le=MASK32)
    scratch_regs: tuple[int, int, int, int] = Field(
        DEFAULT_SCRATCH_REGS, description="Registers for address, data, mask, expected value"
    )
    origin: int = Field(0, ge=0, le=MASK32, description="Program memory start address")

    model_config = ConfigDict(frozen=True)

    @model_validator(mode="after")
    def _check_options(self) -> "CodegenOptions":
        regs = self.scratch_regs
        if len(set(regs)) != 4 or not all(1 <= r <= 31 for r in regs):
            raise ValueError("scratch_regs must be four distinct registers x1-x31")
        if self.result_addr % 4 or self.origin % 4:
            raise ValueError("result_addr and origin must be word aligned")
        if self.success_code == self.failure_code:
            raise ValueError("success and failure codes must differ")
        return self


class ArbiterState(BaseModel):
    """Arbiter policy and the master granted last."""

    policy: ArbiterPolicy = ArbiterPolicy.ROUND_ROBIN
    last_granted: MasterId | None = None

    model_config = ConfigDict(frozen=True)


class MapConfig(BaseModel):
    """Everything read from a memory-map configuration file."""

    memory_map: MemoryMap = Field(default_factory=MemoryMap)
    result_addr: int = Field(DEFAULT_RESULT_ADDR, ge=0, le=MASK32)
    rebase_from: int | None = Field(None, description="VP base address; derived from the trace if unset")
    rebase_to: int | None = Field(None, description="SoC base address; DRAM start if unset")
    rebase_window: int | None = Field(None, gt=0)
    masks: dict[int, int] = Field(default_factory=dict)

    model_config = ConfigDict(frozen=True)


class SyntheticTraceSpec(BaseModel):
    """Recipe for a deterministic synthetic VP log."""

    csb_writes: int = Field(0, ge=0)
    csb_reads: int = Field(0, ge=0)
    dbb_reads: int = Field(0, ge=0)
    dbb_writes: int = Field(0, ge=0)
    csb_addr_range: tuple[int, int] = Field((0x0, 0xF_FFFC), description="Inclusive word-aligned range")
    dbb_addr_range: tuple[int, int] = Field((0xC000_0000, 0xC000_FFFF))
    beat_bytes: int = Field(8, description="Bytes per DBB beat")
    max_beats: int = Field(4, ge=1)
    chatter_lines: int = Field(0, ge=0, description="Unrelated log lines mixed in")
    shape: TraceShape = TraceShape.SHUFFLED
    seed: int = Field(0, ge=0, le=MAX_U64)
    source: str = "synthetic"

    model_config = ConfigDict(frozen=True)

    @model_validator(mode="after")
    def _check_ranges(self) -> "SyntheticTraceSpec":
        lo, hi = self.csb_addr_range
        if not (0 <= lo <= hi <= MASK32):
            raise ValueError("csb_addr_range must be an ordered 32-bit range")
        dlo, dhi = self.dbb_addr_range
        if not (0 <= dlo <= dhi <= MAX_U64):
            raise ValueError("dbb_addr_range must be an ordered 64-bit range")
        if self.beat_bytes not in (4, 8):
            raise ValueError("beat_bytes must be 4 or 8")
        if dhi - dlo + 1 < self.beat_bytes * self.max_beats:
            raise ValueError("dbb_addr_range too small for one burst")
        return self


class ModelMetadata(BaseModel):
    """Documentation metadata about the network a trace came from."""

    name: str
    input_size: str | None = Field(None, description="e.g. 1x28x28")
    model_size: str | None = Field(None, description="e.g. 1.7 MB")
    reference_latency_ms: float | None = Field(None, ge=0, description="Published figure, not computed")
    reference_cycles: int | None = Field(None, ge=0, description="Published figure, not computed")
    clock_mhz: float | None = Field(None, gt=0)

    model_config = ConfigDict(frozen=True)


class PipelineConfig(BaseModel):
    """Inputs and knobs for one end-to-end pipeline run."""

    log_path: str
    out_dir: str
    map_path: str | None = None
    model_meta_path: str | None = None
    model_name: str | None = Field(None, description="Entry of a multi-model metadata file")
    poll_mode: PollMode = PollMode.ALL
    poll_listed: frozenset[int] = Field(default_factory=frozenset)
    rebase_from: int | None = None
    rebase_to: int | None = None
    watchdog: int = Field(10_000_000, gt=0)
    lenient: bool = False
    replay: bool = True
    arbiter: ArbiterPolicy = ArbiterPolicy.ROUND_ROBIN

    model_config = ConfigDict(frozen=True, protected_namespaces=())
