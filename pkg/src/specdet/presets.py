"""Canned experiment grids mirroring the reference evaluation setup.

``paper1d``: N = 1024 bins, signal lengths {16, 64, 256}, SNR -3..19 dB in
2 dB steps, all three detectors.  ``paper2d``: 128 x 128 grid with square
signals of side {4, 16, 64}.  Trial counts are a knob so desk-scale runs
finish in minutes while preserving the grid shape.
"""

from __future__ import annotations

from .simkit import Cell

SNR_GRID_DB = [float(db) for db in range(-3, 20, 2)]  # 12 points
SIZES_1D = [16, 64, 256]
SIZES_2D = [4, 16, 64]
DETECTORS = ["exhaustive", "binary", "oracle"]


def paper1d_cells() -> list[Cell]:
    return [
        Cell(det, (1024,), size, db)
        for det in DETECTORS
        for size in SIZES_1D
        for db in SNR_GRID_DB
    ]


def paper2d_cells() -> list[Cell]:
    return [
        Cell(det, (128, 128), size, db)
        for det in DETECTORS
        for size in SIZES_2D
        for db in SNR_GRID_DB
    ]


PRESETS = {
    "paper1d": paper1d_cells,
    "paper2d": paper2d_cells,
}
