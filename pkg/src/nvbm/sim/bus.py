"""System bus: address decoder, DRAM arbiter and CPU data-access routing."""

import logging
from collections.abc import Collection
from typing import NamedTuple

from nvbm.errors import BusFault
from nvbm.models.pydantic_models import MASK32, ArbiterPolicy, ArbiterState, MasterId, MemoryMap, Region
from nvbm.sim.dram import Dram
from nvbm.sim.nvdla import ScriptedNvdla

logger = logging.getLogger(__name__)

# Cyclic order used by round-robin arbitration
MASTER_ORDER: tuple[MasterId, ...] = (MasterId.CPU, MasterId.DBB)


class SimEvent(NamedTuple):
    """One observable bus event."""

    kind: str
    addr: int
    data: int
    master: MasterId


def decode_address(addr: int, memory_map: MemoryMap) -> Region:
    """Select the slave device for a 32-bit data address."""
    if memory_map.nvdla_start <= addr <= memory_map.nvdla_end:
        return Region.NVDLA
    if memory_map.dram_start <= addr <= memory_map.dram_end:
        return Region.DRAM
    return Region.FAULT


def arbiter_grant(requests: Collection[MasterId], state: ArbiterState) -> tuple[MasterId, ArbiterState]:
    """Grant exactly one requesting master.

    Round-robin grants the requester following ``last_granted`` in cyclic
    order; fixed priority always prefers its master when it requests.

    Raises:
        ValueError: No master is requesting.
    """
    if not requests:
        raise ValueError("arbiter_grant needs at least one request")
    if state.policy is ArbiterPolicy.CPU_FIRST:
        order = MASTER_ORDER
    elif state.policy is ArbiterPolicy.DBB_FIRST:
        order = MASTER_ORDER[::-1]
    else:
        start = 0 if state.last_granted is None else MASTER_ORDER.index(state.last_granted) + 1
        order = MASTER_ORDER[start:] + MASTER_ORDER[:start]
    granted = next(m for m in order if m in requests)
    return granted, state.model_copy(update={"last_granted": granted})


class Arbiter:
    """Stateful arbiter that also tracks grant counts and wait streaks."""

    def __init__(self, policy: ArbiterPolicy = ArbiterPolicy.ROUND_ROBIN) -> None:
        self.state = ArbiterState(policy=policy)
        self.cycles = 0
        self.grants = dict.fromkeys(MASTER_ORDER, 0)
        self.max_wait = dict.fromkeys(MASTER_ORDER, 0)
        self._waiting = dict.fromkeys(MASTER_ORDER, 0)

    def grant(self, requests: Collection[MasterId]) -> MasterId:
        granted, self.state = arbiter_grant(requests, self.state)
        self.cycles += 1
        self.grants[granted] += 1
        for master in MASTER_ORDER:
            if master in requests and master is not granted:
                self._waiting[master] += 1
                self.max_wait[master] = max(self.max_wait[master], self._waiting[master])
            else:
                self._waiting[master] = 0
        return granted


class SystemBus:
    """Routes CPU 32-bit loads and stores to NVDLA or DRAM.

    Program memory is a separate fetch space and is not reachable here.
    """

    def __init__(self, memory_map: MemoryMap, dram: Dram, nvdla: ScriptedNvdla) -> None:
        self.memory_map = memory_map
        self.dram = dram
        self.nvdla = nvdla
        self.events: list[SimEvent] = []

    def _route(self, addr: int) -> Region:
        region = decode_address(addr, self.memory_map)
        if region is Region.FAULT:
            raise BusFault(addr)
        if addr % 4:
            raise BusFault(addr, "misaligned word access")
        return region

    def load(self, addr: int) -> int:
        if self._route(addr) is Region.NVDLA:
            value = self.nvdla.read(addr)
            if self.nvdla.last_read_consumed:
                self.events.append(SimEvent("nvdla_read", self.memory_map.bus_to_csb(addr), value, MasterId.CPU))
            return value
        return self.dram.read_word(addr)

    def store(self, addr: int, value: int) -> None:
        value &= MASK32
        if self._route(addr) is Region.NVDLA:
            self.nvdla.write(addr, value)
            self.events.append(SimEvent("nvdla_write", self.memory_map.bus_to_csb(addr), value, MasterId.CPU))
        else:
            self.dram.write_word(addr, value)
            self.events.append(SimEvent("dram_write", addr, value, MasterId.CPU))
        logger.debug("store 0x%08x <- 0x%08x", addr, value)
