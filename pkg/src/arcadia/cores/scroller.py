"""Side-scrolling platformer core.

A 65-cell level walked left to right: collect coins (+100), avoid enemy
contact (instant death), reach the flag at the far right for a time bonus of
10 points per frame left on the clock.  Most coins and all enemies sit to the
right of the spawn, so score correlates with rightward progress.

The sky is filled with per-frame noise so no two frames of an episode are
pixel-identical, even when the player stands still.  Noise luminance is kept
in the 8..23 band, well inside the darkest quantization bucket of the
standard preprocessing chain, so it never masks sprite features.
"""

from __future__ import annotations

from typing import Mapping, Tuple

import numpy as np

from ..core import CoreInfo, Frame, GameCore, SplitMix64, StateVars
from .pad import BTN_B, BTN_LEFT, BTN_RIGHT, NUM_BUTTONS
from .render import GRID_W, SCREEN_H, SCREEN_W, blank_canvas, gray, pack, upscale

LEVEL_CELLS = 64          # goal sits at this cell index
SUBS_PER_CELL = 4
START_CELL = 4
TIME_LIMIT = 1200         # frames; bonus pays 10 per unused frame
COIN_VALUE = 100
NUM_COINS = 8
NUM_ENEMIES = 3

GROUND_TOP = 22           # first tile row of solid ground
JUMP_VELOCITY = 6         # 13 airborne frames, 3.25 cells of travel

_U64 = np.uint64


def _noise_rows(seed: int, t: int, cam: int) -> np.ndarray:
    """Sky noise for rows [0, GROUND_TOP), pure in (seed, t, cam)."""
    base = (seed + t * 0x9E3779B97F4A7C15) & ((1 << 64) - 1)
    xs = np.arange(cam, cam + GRID_W, dtype=np.uint64)[None, :]
    ys = np.arange(GROUND_TOP, dtype=np.uint64)[:, None]
    z = _U64(base) + xs * _U64(0xC2B2AE3D27D4EB4F) + ys * _U64(0xD6E8FEB86659FD93)
    z = (z ^ (z >> _U64(30))) * _U64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> _U64(27))) * _U64(0x94D049BB133111EB)
    z ^= z >> _U64(31)
    levels = (8 + ((z >> _U64(32)) & _U64(0xF))).astype(np.uint32)
    return (levels << 24) | (levels << 16) | (levels << 8) | np.uint32(255)


COL_GROUND = gray(112)
COL_PLAYER = gray(224)
COL_ENEMY = pack(176, 32, 32)
COL_COIN = pack(176, 176, 0)
COL_FLAG = gray(208)


class ScrollerCore(GameCore):
    NAME = "scroller"
    STATE_VERSION = "1"

    _INFO = CoreInfo(
        name="scroller",
        num_players=1,
        num_buttons=NUM_BUTTONS,
        frame_rate=60,
        screen_width=SCREEN_W,
        screen_height=SCREEN_H,
        config_keys=(),
    )

    def __init__(self) -> None:
        super().__init__()
        self._frame_cache: dict = {}

    @property
    def info(self) -> CoreInfo:
        return self._INFO

    def canonical_mask(self, mask: int) -> int:
        move = mask & (BTN_LEFT | BTN_RIGHT)
        if move == BTN_LEFT | BTN_RIGHT:
            move = 0  # opposing directions cancel
        return move | (mask & BTN_B)

    # -- world -----------------------------------------------------------

    def _reset_world(self, seed: int, config: Mapping[str, object]) -> None:
        rng = SplitMix64(seed ^ 0x5C80AD5)
        self._noise_seed = rng.next_u64()

        taken = {START_CELL}
        enemies = []
        while len(enemies) < NUM_ENEMIES:
            cell = 8 + rng.randrange(LEVEL_CELLS - 12)
            if all(abs(cell - e) >= 4 for e in enemies) and cell not in taken:
                enemies.append(cell)
                taken.add(cell)
        self._enemies = tuple(sorted(enemies))

        # Two coins left of the spawn, the rest strictly to its right.
        coins = [rng.randrange(2), 2 + rng.randrange(2)]
        while len(coins) < NUM_COINS:
            cell = 8 + rng.randrange(LEVEL_CELLS - 10)
            if cell not in taken:
                coins.append(cell)
                taken.add(cell)
        self._coins = sorted(coins)
        self._coin_slots = tuple(self._coins)  # fixed order for state vars

        self._x = START_CELL * SUBS_PER_CELL
        self._y = 0
        self._vy = 0
        self._t = 0
        self._score = 0
        self._outcome = 0  # 0 running, 1 goal, 2 death, 3 timeout

    def _advance(self, masks: Tuple[int, ...]) -> bool:
        mask = self.canonical_mask(masks[0])
        if mask & BTN_LEFT:
            self._x -= 1
        elif mask & BTN_RIGHT:
            self._x += 1
        self._x = min(max(self._x, 0), LEVEL_CELLS * SUBS_PER_CELL)

        if mask & BTN_B and self._y == 0 and self._vy == 0:
            self._vy = JUMP_VELOCITY
        if self._vy != 0 or self._y > 0:
            self._y += self._vy
            self._vy -= 1
            if self._y <= 0:
                self._y = 0
                self._vy = 0

        self._t += 1
        cell = self._x // SUBS_PER_CELL

        if cell in self._coins:
            self._coins.remove(cell)
            self._score += COIN_VALUE

        if cell >= LEVEL_CELLS:
            self._score += max(0, TIME_LIMIT - self._t) * 10
            self._outcome = 1
            return True
        if self._y < 6 and cell in self._enemies:
            self._outcome = 2
            return True
        if self._t >= TIME_LIMIT:
            self._outcome = 3
            return True
        return False

    # -- observation -------------------------------------------------------

    def _state_vars(self) -> StateVars:
        vars_: StateVars = {
            "score": self._score,
            "time": self._t,
            "x_position": self._x,
            "y_position": self._y,
            "coins_remaining": len(self._coins),
            "goal_x": LEVEL_CELLS * SUBS_PER_CELL,
        }
        for i, cell in enumerate(self._enemies):
            vars_[f"enemy{i}_x"] = cell * SUBS_PER_CELL
        remaining = set(self._coins)
        for i, cell in enumerate(self._coin_slots):
            vars_[f"coin{i}_x"] = cell * SUBS_PER_CELL if cell in remaining else -1
        return vars_

    def render(self) -> Frame:
        cell = self._x // SUBS_PER_CELL
        cam = min(max(cell - GRID_W // 2, 0), LEVEL_CELLS + 1 - GRID_W)
        key = (
            cam,
            cell,
            self._y // SUBS_PER_CELL,
            tuple(self._coins),
            self._enemies,
            self._noise_seed,
            self._t,
        )
        return Frame(
            SCREEN_W,
            SCREEN_H,
            render=lambda: self._render_pixels(key),
            digest=("scroller", key),
        )

    @staticmethod
    def _render_pixels(key: tuple) -> np.ndarray:
        cam, cell, y_cells, coins, enemies, noise_seed, t = key
        canvas = blank_canvas(COL_GROUND)
        canvas[:GROUND_TOP, :] = _noise_rows(noise_seed, t, cam)

        def col(c: int) -> int:
            return c - cam

        for e in enemies:
            c = col(e)
            if 0 <= c < GRID_W:
                canvas[GROUND_TOP - 2 : GROUND_TOP, c] = COL_ENEMY
        for c_cell in coins:
            c = col(c_cell)
            if 0 <= c < GRID_W:
                canvas[GROUND_TOP - 4, c] = COL_COIN
        flag = col(LEVEL_CELLS)
        if 0 <= flag < GRID_W:
            canvas[GROUND_TOP - 6 : GROUND_TOP, flag] = COL_FLAG

        pc = col(cell)
        if 0 <= pc < GRID_W:
            top = GROUND_TOP - 2 - y_cells
            canvas[top : top + 2, pc] = COL_PLAYER
        return upscale(canvas)

    # -- savestates ----------------------------------------------------------

    def _state_payload(self) -> Mapping[str, object]:
        return {
            "noise_seed": self._noise_seed,
            "enemies": list(self._enemies),
            "coins": self._coins,
            "coin_slots": list(self._coin_slots),
            "x": self._x,
            "y": self._y,
            "vy": self._vy,
            "t": self._t,
            "score": self._score,
            "outcome": self._outcome,
        }

    def _load_payload(self, payload: Mapping[str, object]) -> None:
        self._noise_seed = int(payload["noise_seed"])  # type: ignore[arg-type]
        self._enemies = tuple(payload["enemies"])  # type: ignore[arg-type]
        self._coins = list(payload["coins"])  # type: ignore[arg-type]
        self._coin_slots = tuple(payload["coin_slots"])  # type: ignore[arg-type]
        self._x = int(payload["x"])  # type: ignore[arg-type]
        self._y = int(payload["y"])  # type: ignore[arg-type]
        self._vy = int(payload["vy"])  # type: ignore[arg-type]
        self._t = int(payload["t"])  # type: ignore[arg-type]
        self._score = int(payload["score"])  # type: ignore[arg-type]
        self._outcome = int(payload["outcome"])  # type: ignore[arg-type]
