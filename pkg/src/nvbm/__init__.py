"""nvbm - NVDLA virtual-platform traces to bare-metal RISC-V programs and memory images."""

__version__ = "0.1.0"
