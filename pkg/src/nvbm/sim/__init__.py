"""Functional SoC model: RV32I core, system bus, DRAM and scripted NVDLA."""

from nvbm.sim.bus import Arbiter, SimEvent, SystemBus, arbiter_grant, decode_address
from nvbm.sim.cpu import Cpu
from nvbm.sim.dram import Dram, WidthConverter
from nvbm.sim.nvdla import ScriptedNvdla, ScriptEntry, script_from_commands
from nvbm.sim.soc import (
    DbbReplayer,
    ReplayMismatch,
    ReplayReport,
    SimResult,
    Soc,
    format_result,
    replay_dbb,
    run,
)

__all__ = [
    "Arbiter",
    "Cpu",
    "DbbReplayer",
    "Dram",
    "ReplayMismatch",
    "ReplayReport",
    "ScriptEntry",
    "ScriptedNvdla",
    "SimEvent",
    "SimResult",
    "Soc",
    "SystemBus",
    "WidthConverter",
    "arbiter_grant",
    "decode_address",
    "format_result",
    "replay_dbb",
    "run",
    "script_from_commands",
]
