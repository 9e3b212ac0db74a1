"""DRAM preload image construction and memory artifact formats."""

from nvbm.weights.builder import (
    FirstTouch,
    TouchKind,
    build_image,
    default_rebase,
    first_touches,
    rebase_addr,
)
from nvbm.weights.image import MemoryImage, Span
from nvbm.weights.writers import (
    BinMetadata,
    emit_bin,
    emit_mem,
    emit_program_bin,
    image_from_mem,
    load_bin,
    load_mem,
    program_from_mem,
)

__all__ = [
    "BinMetadata",
    "FirstTouch",
    "MemoryImage",
    "Span",
    "TouchKind",
    "build_image",
    "default_rebase",
    "emit_bin",
    "emit_mem",
    "emit_program_bin",
    "first_touches",
    "image_from_mem",
    "load_bin",
    "load_mem",
    "program_from_mem",
    "rebase_addr",
]
