"""Shared tile-canvas renderer for the built-in cores.

All built-in cores draw on a 32x28 grid of 8x8-pixel tiles and upscale to the
common 256x224 screen.  Colors are packed RGBA words (R in the high byte).
"""

from __future__ import annotations

import numpy as np

TILE = 8
GRID_W = 32
GRID_H = 28
SCREEN_W = GRID_W * TILE
SCREEN_H = GRID_H * TILE


def pack(r: int, g: int, b: int, a: int = 255) -> int:
    return (r << 24) | (g << 16) | (b << 8) | a


def gray(level: int) -> int:
    return pack(level, level, level)


def blank_canvas(fill: int) -> np.ndarray:
    """Fresh (GRID_H, GRID_W) uint32 tile canvas."""
    canvas = np.empty((GRID_H, GRID_W), dtype=np.uint32)
    canvas.fill(fill)
    return canvas


def upscale(canvas: np.ndarray) -> np.ndarray:
    """Expand a tile canvas to flat screen pixels (row-major, SCREEN_H*SCREEN_W)."""
    return np.repeat(np.repeat(canvas, TILE, axis=0), TILE, axis=1).ravel()
