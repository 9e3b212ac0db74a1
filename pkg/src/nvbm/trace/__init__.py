"""VP log parsing and synthetic trace generation."""

from nvbm.trace.parser import (
    CSB_KEYWORD,
    DBB_KEYWORD,
    format_csb_line,
    format_dbb_line,
    parse_csb_line,
    parse_dbb_line,
    parse_log,
)
from nvbm.trace.synthetic import emit_log, gen_synthetic_trace

__all__ = [
    "CSB_KEYWORD",
    "DBB_KEYWORD",
    "emit_log",
    "format_csb_line",
    "format_dbb_line",
    "gen_synthetic_trace",
    "parse_csb_line",
    "parse_dbb_line",
    "parse_log",
]
