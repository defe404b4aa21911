"""Built-in game cores; importing this package registers them."""

from __future__ import annotations

from ..core import register_core
from .duel import DuelCore, scripted_opponent_mask
from .racer import RacerCore
from .scroller import ScrollerCore

register_core(ScrollerCore.NAME, ScrollerCore)
register_core(RacerCore.NAME, RacerCore)
register_core(DuelCore.NAME, DuelCore)

__all__ = ["DuelCore", "RacerCore", "ScrollerCore", "scripted_opponent_mask"]
