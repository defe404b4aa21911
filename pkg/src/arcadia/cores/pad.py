"""Button layout shared by the built-in cores: a classic 12-button pad."""

from __future__ import annotations

BTN_B = 1 << 0
BTN_Y = 1 << 1
BTN_SELECT = 1 << 2
BTN_START = 1 << 3
BTN_UP = 1 << 4
BTN_DOWN = 1 << 5
BTN_LEFT = 1 << 6
BTN_RIGHT = 1 << 7
BTN_A = 1 << 8
BTN_X = 1 << 9
BTN_L = 1 << 10
BTN_R = 1 << 11

NUM_BUTTONS = 12
