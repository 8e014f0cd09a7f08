"""Relative debugging of serial programs against their SPMD counterparts."""

from ._core import (
    RelcheckError,
    analyze,
    block_bounds,
    checksum,
    compare_global,
    execute,
    format,
    modifying_routines,
    parallelize,
    run,
)

__all__ = [
    "RelcheckError",
    "analyze",
    "block_bounds",
    "checksum",
    "compare_global",
    "execute",
    "format",
    "modifying_routines",
    "parallelize",
    "run",
]
