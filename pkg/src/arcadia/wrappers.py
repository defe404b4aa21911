"""Observation preprocessing and reward shaping.

Preprocessing follows the common evaluation setup for pixel agents: RGBA is
reduced to integer luminance, then bilinearly resized to 84x84.  Both steps
are pinned exactly so observations are bit-reproducible:

* luminance = (299*R + 587*G + 114*B + 500) // 1000 (round half up, exact
  integer arithmetic; the coefficients sum to 1.000 so gray stays gray);
* the resize uses the half-pixel-center convention,
  src = (dst + 0.5) * (src_size / dst_size) - 0.5, with edge clamping, and
  the float result is rounded half up back to uint8.

Reward shaping is a pure function of (raw reward, previous vars, current
vars); the shaped environment never changes frames, vars, or termination.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Optional, Tuple, Union

import numpy as np

from .core import Frame, StateVars
from .env import Environment, StepResult
from .errors import ShapingError, UsageError

TARGET_SIZE = 84

def _axis_weights(src: int, dst: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    centers = (np.arange(dst, dtype=np.float64) + 0.5) * (src / dst) - 0.5
    centers = np.clip(centers, 0.0, src - 1.0)
    lo = np.floor(centers).astype(np.int64)
    hi = np.minimum(lo + 1, src - 1)
    w_hi = centers - lo
    return lo, hi, 1.0 - w_hi, w_hi


class _ResizePlan:
    """Gather indices, weights, and scratch buffers for one source geometry."""

    def __init__(self, height: int, width: int) -> None:
        self.rlo, self.rhi, rw0, rw1 = _axis_weights(height, TARGET_SIZE)
        self.clo, self.chi, self.cw0, self.cw1 = _axis_weights(width, TARGET_SIZE)
        self.rw0 = rw0[:, None]
        self.rw1 = rw1[:, None]
        self.a = np.empty((TARGET_SIZE, width), dtype=np.float64)
        self.b = np.empty((TARGET_SIZE, width), dtype=np.float64)
        self.c = np.empty((TARGET_SIZE, TARGET_SIZE), dtype=np.float64)
        self.d = np.empty((TARGET_SIZE, TARGET_SIZE), dtype=np.float64)


_plans: Dict[Tuple[int, int], _ResizePlan] = {}


def _resize_plan(height: int, width: int) -> _ResizePlan:
    plan = _plans.get((height, width))
    if plan is None:
        plan = _ResizePlan(height, width)
        _plans[(height, width)] = plan
    return plan


def luminance(frame: Frame) -> np.ndarray:
    """Integer luminance plane, shape (height, width), dtype uint8."""
    px = frame.pixels.reshape(frame.height, frame.width)
    value = 299 * (px >> 24) + 587 * ((px >> 16) & 0xFF) + 114 * ((px >> 8) & 0xFF)
    return ((value + 500) // 1000).astype(np.uint8)


def preprocess(frame: Frame) -> np.ndarray:
    """Luminance then bilinear resize; returns (84, 84) uint8.

    Every output value is ``round_half_up(w0 * lum[lo] + w1 * lum[hi])``
    applied per axis; the arithmetic is plain multiply-then-add in float64 so
    a per-pixel reimplementation reproduces it bit for bit.
    """
    lum = luminance(frame)
    p = _resize_plan(frame.height, frame.width)
    np.multiply(lum[p.rlo, :], p.rw0, out=p.a)
    np.multiply(lum[p.rhi, :], p.rw1, out=p.b)
    np.add(p.a, p.b, out=p.a)
    rows = p.a
    np.multiply(rows[:, p.clo], p.cw0, out=p.c)
    np.multiply(rows[:, p.chi], p.cw1, out=p.d)
    np.add(p.c, p.d, out=p.c)
    np.add(p.c, 0.5, out=p.c)
    np.floor(p.c, out=p.c)
    return p.c.astype(np.uint8)


# -- reward shaping ----------------------------------------------------------

SHAPING_MODES = ("none", "add_speed", "position_bonus")

_DEFAULT_VARS = {"add_speed": "speed", "position_bonus": "x_position"}


@dataclass(frozen=True)
class ShapingSpec:
    """How to augment the raw reward.

    ``add_speed`` adds ``weight * vars[var_name]`` every step.
    ``position_bonus`` adds ``weight`` times the step's change in
    ``vars[var_name]`` (or the raw value itself with ``absolute=True``,
    which pays for standing far along rather than for moving).
    """

    mode: str = "none"
    weight: float = 1.0
    var_name: str = ""
    absolute: bool = False

    def __post_init__(self) -> None:
        if self.mode not in SHAPING_MODES:
            raise ShapingError(
                f"unknown shaping mode {self.mode!r}; expected one of {', '.join(SHAPING_MODES)}"
            )
        if self.absolute and self.mode != "position_bonus":
            raise ShapingError("absolute applies only to position_bonus")
        if not self.var_name and self.mode != "none":
            object.__setattr__(self, "var_name", _DEFAULT_VARS[self.mode])


def shape_reward(
    raw: float, prev_vars: StateVars, vars_: StateVars, spec: ShapingSpec
) -> float:
    if spec.mode == "none":
        return raw
    name = spec.var_name
    if name not in vars_:
        raise ShapingError(f"shaping variable {name!r} not in state vars")
    if spec.mode == "add_speed":
        return raw + spec.weight * vars_[name]
    if spec.absolute:
        return raw + spec.weight * vars_[name]
    return raw + spec.weight * (vars_[name] - prev_vars[name])


class ShapedEnv:
    """Environment decorator that rewrites only the reward channel."""

    def __init__(self, env: Environment, spec: ShapingSpec) -> None:
        if env.num_players != 1:
            raise ShapingError("reward shaping supports single-player environments only")
        self.env = env
        self.spec = spec
        self._prev_vars: Optional[StateVars] = None

    def reset(self, seed: Optional[int] = None) -> StepResult:
        result = self.env.reset(seed)
        self._prev_vars = result.vars
        return result

    def step(self, action: Union[int, Tuple[int, ...]]) -> StepResult:
        if self._prev_vars is None:
            raise UsageError("step before reset")
        result = self.env.step(action)
        shaped = shape_reward(result.rewards[0], self._prev_vars, result.vars, self.spec)
        self._prev_vars = result.vars
        return result._replace(rewards=(shaped,))

    def observe_vars(self) -> StateVars:
        return self.env.observe_vars()

    def action_set(self, minimal: bool = True) -> Tuple[int, ...]:
        return self.env.action_set(minimal)

    @property
    def num_players(self) -> int:
        return self.env.num_players

    @property
    def terminal(self) -> bool:
        return self.env.terminal
