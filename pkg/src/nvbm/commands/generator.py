"""CSB transactions to register commands."""

from dataclasses import dataclass

from nvbm.models.pydantic_models import Command, CommandKind, CsbTransaction, PollPolicy


def to_commands(csb: list[CsbTransaction], policy: PollPolicy | None = None) -> list[Command]:
    """Map each CSB transaction to one command, preserving order.

    Writes become write_reg with the traced data. Reads become read_reg whose
    expected value is the traced data under the address mask; whether the
    generated code polls or checks once is decided by the policy.

    Args:
        csb: CSB transactions in trace order.
        policy: Poll policy; defaults to polling every read with a full mask.

    Returns:
        Commands, same length and order as the input.
    """
    policy = policy or PollPolicy()
    commands = []
    for tx in csb:
        if tx.is_write:
            commands.append(Command.write(tx.addr, tx.data))
        else:
            mask = policy.mask_for(tx.addr)
            commands.append(Command.read(tx.addr, tx.data, mask=mask, poll=policy.polls(tx.addr)))
    return commands


@dataclass
class CommandStats:
    """Counts over a command list."""

    writes: int
    reads: int
    polled_reads: int

    @property
    def total(self) -> int:
        return self.writes + self.reads


def command_stats(cmds: list[Command]) -> CommandStats:
    writes = sum(1 for c in cmds if c.kind is CommandKind.WRITE_REG)
    polled = sum(1 for c in cmds if c.kind is CommandKind.READ_REG and c.poll)
    return CommandStats(writes=writes, reads=len(cmds) - writes, polled_reads=polled)
