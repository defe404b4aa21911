"""Scripted reference players.

Each expert is a pure function of the public state vars, played at full frame
rate (no action repeat), the way a practiced human would drive the game.
Their average scores are the "skilled play" anchors for score normalization;
a uniform-random player provides the other anchor.
"""

from __future__ import annotations

from typing import Callable, Mapping, Optional

from .core import StateVars, create_core
from .cores.duel import BLOCK
from .cores.pad import BTN_A, BTN_B, BTN_LEFT, BTN_RIGHT, BTN_Y
from .cores.scroller import NUM_ENEMIES
from .errors import UsageError

ExpertPolicy = Callable[[StateVars], int]


def scroller_expert(vars_: StateVars) -> int:
    """Run right, hopping over each sentry just before entering its cell."""
    x = vars_["x_position"]
    mask = BTN_RIGHT
    if vars_["y_position"] == 0:
        for i in range(NUM_ENEMIES):
            d = vars_[f"enemy{i}_x"] - x
            if 2 <= d <= 9:
                mask |= BTN_B
                break
    return mask


def racer_expert(vars_: StateVars) -> int:
    """Full throttle, counter-steering drift and recentering the car."""
    lateral = vars_["lateral"]
    steer = -lateral if lateral else -vars_["curve"]
    mask = BTN_B
    if steer < 0:
        mask |= BTN_LEFT
    elif steer > 0:
        mask |= BTN_RIGHT
    return mask


def duel_expert(vars_: StateVars) -> int:
    """Seat-1 play: punish blocks low, attack high otherwise, guard in range."""
    gap = vars_["x_p2"] - vars_["x_p1"]
    opp_blocked = vars_["intent_p2"] == BLOCK
    if vars_["cooldown_p1"] == 0 and gap <= 2 and opp_blocked:
        return BTN_Y
    if vars_["cooldown_p1"] == 0 and gap <= 3 and not opp_blocked:
        return BTN_B
    if gap <= 4:
        return BTN_A
    return BTN_RIGHT


def duel_turtle(vars_: StateVars) -> int:
    """Seat-2 rival: stands and blocks, punishing adjacency with low attacks."""
    gap = vars_["x_p2"] - vars_["x_p1"]
    if vars_["cooldown_p2"] == 0 and gap <= 2:
        return BTN_Y
    return BTN_A


def duel_aggressor(vars_: StateVars) -> int:
    """Seat-2 rival: charges and throws high attacks, never guards."""
    gap = vars_["x_p2"] - vars_["x_p1"]
    if vars_["cooldown_p2"] == 0 and gap <= 3:
        return BTN_B
    return BTN_LEFT if vars_["x_p1"] < vars_["x_p2"] else BTN_RIGHT


def duel_counter(vars_: StateVars) -> int:
    """Seat-2 rival: guards high attacks, punishes approach, otherwise roams.

    Nothing the other fighter learned against an attackable opponent keeps
    paying off here, which makes it a harsh sparring partner.
    """
    gap = vars_["x_p2"] - vars_["x_p1"]
    at_wall = vars_["x_p2"] >= 29
    if gap <= 2:
        mask = BTN_Y if vars_["cooldown_p2"] == 0 else 0
        return mask if at_wall else mask | BTN_RIGHT
    if gap <= 4:
        return BTN_A if at_wall else BTN_A | BTN_RIGHT
    # deterministic roam, biased toward the other fighter so clashes happen
    phase = ((vars_["time"] // 16) * 0x9E3779B97F4A7C15 >> 60) % 5
    return BTN_LEFT if phase < 3 else BTN_RIGHT


def duel_master(vars_: StateVars) -> int:
    """Seat-2 rival: the built-in sparring logic with every lapse removed.

    Same look and positioning as the in-core opponent, so a fighter tuned
    against that opponent meets familiar situations and loses them.
    """
    gap = vars_["x_p2"] - vars_["x_p1"]
    blocking = vars_["intent_p1"] == 3
    if vars_["cooldown_p2"] == 0 and gap <= 2 and blocking:
        return BTN_Y
    if vars_["cooldown_p2"] == 0 and gap <= 3 and not blocking:
        return BTN_B
    if gap <= 4:
        return BTN_A
    return BTN_LEFT


_EXPERTS = {
    "scroller": scroller_expert,
    "racer": racer_expert,
    "duel": duel_expert,
}


def expert_policy(core_name: str) -> ExpertPolicy:
    try:
        return _EXPERTS[core_name]
    except KeyError:
        raise UsageError(f"no expert for core {core_name!r}") from None


def play_expert(
    core_name: str,
    seed: int,
    config: Optional[Mapping[str, object]] = None,
    max_frames: int = 18_000,
) -> int:
    """Run the expert at frame granularity; returns the final score."""
    policy = expert_policy(core_name)
    core = create_core(core_name)
    core.reset(seed, config)
    players = core.info.num_players
    for _ in range(max_frames):
        mask = policy(core.state_vars())
        _, vars_, terminal = core.step((mask,) * players)
        if terminal:
            return vars_["score"]
    return core.state_vars()["score"]
