"""Optomechanical quantum-memory simulator and click-stream analysis toolkit."""

from phonomem.fock import (
    DensityMatrix,
    FockSpace,
    ModePrep,
    apply_beamsplitter,
    apply_two_mode_squeeze,
    build_state,
    mode_stats,
    partial_trace,
    project,
)

__version__ = "0.1.0"

__all__ = [
    "DensityMatrix",
    "FockSpace",
    "ModePrep",
    "apply_beamsplitter",
    "apply_two_mode_squeeze",
    "build_state",
    "mode_stats",
    "partial_trace",
    "project",
    "__version__",
]
