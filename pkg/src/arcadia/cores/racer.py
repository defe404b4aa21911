"""Lap-racing core with deliberately sparse scoring.

The car runs a 1800-unit circuit for 4 laps and the only score events are
+1000 per completed lap, so at the speed cap of 6 units/frame the first
reward cannot arrive before frame 300.  Seeded curves push the car sideways;
leaving the 5-lane track halves speed every frame and bleeds position, which
makes undirected play stall near the start line.

The picture is a fixed-palette dashboard (curve marker, car lane, speed bar,
lap pips) with no animated background, so the number of distinct frames per
episode stays small.
"""

from __future__ import annotations

from typing import Mapping, Tuple

from ..core import CoreInfo, Frame, GameCore, SplitMix64, StateVars
from .render import GRID_W, SCREEN_H, SCREEN_W, blank_canvas, gray, pack, upscale
from .pad import BTN_B, BTN_LEFT, BTN_RIGHT, NUM_BUTTONS

TRACK_LENGTH = 1800       # position units per lap
LAPS_REQUIRED = 4
LAP_SCORE = 1000
SPEED_CAP = 6
LAT_LIMIT = 4             # hard clamp on lateral position
TRACK_HALF_WIDTH = 2      # |lateral| above this is off-track
SEGMENT_UNITS = 150       # one curve segment per 150 position units
TIME_LIMIT = 3600

COL_BG = gray(16)
COL_ROAD = gray(64)
COL_CAR = gray(224)
COL_CAR_OFF = pack(224, 64, 64)
COL_MARK = gray(160)
COL_BAR = gray(224)
COL_PIP = pack(176, 176, 0)

_SEGMENTS_PER_LAP = TRACK_LENGTH // SEGMENT_UNITS


class RacerCore(GameCore):
    NAME = "racer"
    STATE_VERSION = "1"

    _INFO = CoreInfo(
        name="racer",
        num_players=1,
        num_buttons=NUM_BUTTONS,
        frame_rate=60,
        screen_width=SCREEN_W,
        screen_height=SCREEN_H,
        config_keys=(),
    )

    def __init__(self) -> None:
        super().__init__()
        self._frames: dict = {}

    @property
    def info(self) -> CoreInfo:
        return self._INFO

    def canonical_mask(self, mask: int) -> int:
        move = mask & (BTN_LEFT | BTN_RIGHT)
        if move == BTN_LEFT | BTN_RIGHT:
            move = 0
        return move | (mask & BTN_B)

    # -- world ---------------------------------------------------------

    def _reset_world(self, seed: int, config: Mapping[str, object]) -> None:
        rng = SplitMix64(seed ^ 0x4ACE2)
        curves = [0]  # gentle start: first segment is always straight
        while len(curves) < _SEGMENTS_PER_LAP:
            curves.append(rng.randrange(3) - 1)
        self._curves = tuple(curves)
        self._position = 0
        self._lateral = 0
        self._speed = 0
        self._laps = 0
        self._t = 0
        self._score = 0

    def _curve_at(self, position: int) -> int:
        return self._curves[(position % TRACK_LENGTH) // SEGMENT_UNITS]

    def _advance(self, masks: Tuple[int, ...]) -> bool:
        mask = self.canonical_mask(masks[0])
        steer = (1 if mask & BTN_RIGHT else 0) - (1 if mask & BTN_LEFT else 0)

        # lateral dynamics run at half frame rate so steering stays gentle
        if self._t % 2 == 0:
            self._lateral += steer + self._curve_at(self._position)
            self._lateral = min(max(self._lateral, -LAT_LIMIT), LAT_LIMIT)

        if abs(self._lateral) <= TRACK_HALF_WIDTH:
            if mask & BTN_B:
                self._speed = min(self._speed + 1, SPEED_CAP)
            else:
                self._speed = max(self._speed - 1, 0)
            self._position += self._speed
        else:
            self._speed //= 2
            self._position = max(self._position - 2, self._laps * TRACK_LENGTH)

        if self._position >= (self._laps + 1) * TRACK_LENGTH:
            self._laps += 1
            self._score += LAP_SCORE
            if self._laps >= LAPS_REQUIRED:
                self._t += 1
                return True

        self._t += 1
        return self._t >= TIME_LIMIT

    # -- observation -----------------------------------------------------

    def _state_vars(self) -> StateVars:
        return {
            "score": self._score,
            "speed": self._speed,
            "lap": self._laps,
            "position": self._position,
            "lateral": self._lateral,
            "curve": self._curve_at(self._position),
            "time": self._t,
        }

    def render(self) -> Frame:
        key = (
            self._lateral,
            self._curve_at(self._position),
            self._speed,
            self._laps,
        )
        frame = self._frames.get(key)
        if frame is None:
            frame = Frame(
                SCREEN_W,
                SCREEN_H,
                render=lambda: self._render_pixels(key),
                digest=("racer", key),
            )
            if len(self._frames) > 1024:
                self._frames.clear()
            self._frames[key] = frame
        return frame

    @staticmethod
    def _render_pixels(key: tuple) -> np.ndarray:
        lateral, curve, speed, laps = key
        canvas = blank_canvas(COL_BG)

        # road band: 5 lanes of 3 tiles each, centered
        road_left = GRID_W // 2 - 3 * TRACK_HALF_WIDTH - 1
        road_right = GRID_W // 2 + 3 * TRACK_HALF_WIDTH + 2
        canvas[8:24, road_left:road_right] = COL_ROAD

        # upcoming-curve marker: a 4x4 block left, center, or right
        mark_col = {-1: 3, 0: 14, 1: 25}[curve]
        canvas[1:5, mark_col : mark_col + 4] = COL_MARK

        # car: 3 tiles wide at its lane, red when off-track
        car_col = GRID_W // 2 + lateral * 3 - 1
        color = COL_CAR if abs(lateral) <= TRACK_HALF_WIDTH else COL_CAR_OFF
        canvas[18:21, car_col : car_col + 3] = color

        # speed bar along the bottom
        if speed > 0:
            canvas[26:28, 2 : 2 + speed * 4] = COL_BAR

        # one pip per finished lap
        for i in range(laps):
            canvas[25, 2 + i * 2] = COL_PIP
        return upscale(canvas)

    # -- savestates ---------------------------------------------------------

    def _state_payload(self) -> Mapping[str, object]:
        return {
            "curves": list(self._curves),
            "position": self._position,
            "lateral": self._lateral,
            "speed": self._speed,
            "laps": self._laps,
            "t": self._t,
            "score": self._score,
        }

    def _load_payload(self, payload: Mapping[str, object]) -> None:
        self._curves = tuple(payload["curves"])  # type: ignore[arg-type]
        self._position = int(payload["position"])  # type: ignore[arg-type]
        self._lateral = int(payload["lateral"])  # type: ignore[arg-type]
        self._speed = int(payload["speed"])  # type: ignore[arg-type]
        self._laps = int(payload["laps"])  # type: ignore[arg-type]
        self._t = int(payload["t"])  # type: ignore[arg-type]
        self._score = int(payload["score"])  # type: ignore[arg-type]
