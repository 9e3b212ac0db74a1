"""Register command generation and configuration files."""

from nvbm.commands.config_file import emit_config, format_command, parse_config
from nvbm.commands.generator import CommandStats, command_stats, to_commands
from nvbm.commands.nvdla_trace import ImportedTrace, parse_nvdla_trace

__all__ = [
    "CommandStats",
    "ImportedTrace",
    "command_stats",
    "emit_config",
    "format_command",
    "parse_config",
    "parse_nvdla_trace",
    "to_commands",
]
