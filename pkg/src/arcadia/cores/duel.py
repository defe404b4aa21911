"""Two-fighter dueling core.

Two fighters on a 32-cell strip trade 10-damage hits against 100 health.
High attacks reach 3 cells but are stopped by a block; low attacks reach only
2 cells and ignore blocks, at the price of a longer cooldown.  Hits resolve
simultaneously, so mutual knockouts (and therefore exact draws) are possible,
and nothing forces the fighters together: two idle players time out at the
step cap with zero score on both sides.

In single-player mode the right-hand fighter is driven by a built-in policy
whose competence is set by the ``difficulty`` config key.  The world is
mirror-covariant: reflecting every position about the arena center and
swapping the seats yields a world whose frames are exactly the horizontal
flips of the original.  That makes one set of learned weights reusable from
either seat (flip the observation, swap the left/right buttons).

Scoring: ``score`` is total damage dealt by player 1, ``score_p2`` damage
dealt by player 2.  A fighter wins by bringing the opponent to zero health
before the 3600-frame cap.
"""

from __future__ import annotations

from typing import Mapping, Optional, Tuple

from ..core import CoreInfo, Frame, GameCore, SplitMix64, StateVars
from ..core import parse_config_choice, parse_config_int
from ..errors import ConfigurationError
from .render import GRID_W, SCREEN_H, SCREEN_W, blank_canvas, gray, upscale
from .pad import BTN_A, BTN_B, BTN_LEFT, BTN_RIGHT, BTN_Y, NUM_BUTTONS

ARENA_CELLS = 32          # fighter positions are cells [0, ARENA_CELLS)
MAX_HEALTH = 100
HIT_DAMAGE = 10
HIGH_RANGE = 3            # max gap for a high attack to land
LOW_RANGE = 2
HIGH_COOLDOWN = 8
LOW_COOLDOWN = 12
MIN_GAP = 2               # fighters can never be closer than this
TIME_LIMIT = 3600

# combat intents after canonicalization
IDLE, HIGH, LOW, BLOCK = 0, 1, 2, 3

DIFFICULTY_SMART_PERCENT = {"medium": 35, "very_hard": 80}

COL_BG = gray(16)
COL_GROUND = gray(112)
COL_BODY = gray(224)
COL_ARM = gray(192)
COL_SHIELD = gray(144)
COL_BAR = gray(208)

GROUND_TOP = 24
BODY_TOP = 18             # body spans rows [BODY_TOP, GROUND_TOP)
ARM_ROW_HIGH = 19
ARM_ROW_LOW = 22
SHIELD_ROW = 20
BAR_ROW = 2


def _combat_intent(mask: int) -> int:
    if mask & BTN_B:
        return HIGH
    if mask & BTN_Y:
        return LOW
    if mask & BTN_A:
        return BLOCK
    return IDLE


class DuelCore(GameCore):
    NAME = "duel"
    STATE_VERSION = "1"

    CONFIG_KEYS = ("difficulty", "players", "p1_x", "p2_x")

    def __init__(self) -> None:
        super().__init__()
        self._players = 1
        self._difficulty = "medium"
        self._frames: dict = {}

    @property
    def info(self) -> CoreInfo:
        return CoreInfo(
            name="duel",
            num_players=self._players,
            num_buttons=NUM_BUTTONS,
            frame_rate=60,
            screen_width=SCREEN_W,
            screen_height=SCREEN_H,
            config_keys=self.CONFIG_KEYS,
        )

    def canonical_mask(self, mask: int) -> int:
        move = mask & (BTN_LEFT | BTN_RIGHT)
        if move == BTN_LEFT | BTN_RIGHT:
            move = 0
        combat = _combat_intent(mask)
        button = (0, BTN_B, BTN_Y, BTN_A)[combat]
        return move | button

    # -- world -------------------------------------------------------------

    def _reset_world(self, seed: int, config: Mapping[str, object]) -> None:
        self._players = int(parse_config_choice(config, "players", "1", ("1", "2")))
        self._difficulty = parse_config_choice(
            config, "difficulty", "medium", tuple(DIFFICULTY_SMART_PERCENT)
        )
        self._rng = SplitMix64(seed ^ 0xD0E1)

        x1 = parse_config_int(config, "p1_x", -1, -1, ARENA_CELLS - 3)
        x2 = parse_config_int(config, "p2_x", -1, -1, ARENA_CELLS - 1)
        if x1 < 0:
            x1 = 8 + self._rng.randrange(6)
        if x2 < 0:
            x2 = ARENA_CELLS - 9 - self._rng.randrange(6)
        if x2 - x1 < MIN_GAP:
            raise ConfigurationError(
                f"p1_x must be at least {MIN_GAP} left of p2_x, got {x1} and {x2}"
            )
        self._x = [x1, x2]
        self._health = [MAX_HEALTH, MAX_HEALTH]
        self._cooldown = [0, 0]
        self._dealt = [0, 0]
        # opponent intent from the previous frame, visible to the built-in policy
        self._prev_intent = [IDLE, IDLE]
        self._last_attack = [IDLE, IDLE]   # pose shown while the arm is extended
        self._arm_frames = [0, 0]
        self._t = 0

    def _advance(self, masks: Tuple[int, ...]) -> bool:
        m1 = self.canonical_mask(masks[0])
        m2 = self.canonical_mask(masks[1]) if self._players == 2 else self._policy_mask()

        intents = [_combat_intent(m1), _combat_intent(m2)]
        moves = []
        for m in (m1, m2):
            moves.append((1 if m & BTN_RIGHT else 0) - (1 if m & BTN_LEFT else 0))

        for i in (0, 1):
            if self._cooldown[i] > 0:
                self._cooldown[i] -= 1
            if self._arm_frames[i] > 0:
                self._arm_frames[i] -= 1

        attacks = [IDLE, IDLE]
        for i in (0, 1):
            if intents[i] in (HIGH, LOW) and self._cooldown[i] == 0:
                attacks[i] = intents[i]
                self._cooldown[i] = HIGH_COOLDOWN if intents[i] == HIGH else LOW_COOLDOWN
                self._last_attack[i] = intents[i]
                self._arm_frames[i] = 4

        tx1 = min(max(self._x[0] + moves[0], 0), ARENA_CELLS - 1)
        tx2 = min(max(self._x[1] + moves[1], 0), ARENA_CELLS - 1)
        if tx2 - tx1 >= MIN_GAP:
            self._x = [tx1, tx2]

        gap = self._x[1] - self._x[0]
        blocking = [intents[0] == BLOCK, intents[1] == BLOCK]
        for i in (0, 1):
            j = 1 - i
            lands = (attacks[i] == HIGH and gap <= HIGH_RANGE and not blocking[j]) or (
                attacks[i] == LOW and gap <= LOW_RANGE
            )
            if lands:
                dealt = min(HIT_DAMAGE, self._health[j])
                self._health[j] -= dealt
                self._dealt[i] += dealt

        self._prev_intent = intents
        self._t += 1
        return self._health[0] == 0 or self._health[1] == 0 or self._t >= TIME_LIMIT

    def _policy_mask(self) -> int:
        return scripted_opponent_mask(self, seat=1)

    # -- observation -------------------------------------------------------

    def _state_vars(self) -> StateVars:
        return {
            "score": self._dealt[0],
            "score_p2": self._dealt[1],
            "health_p1": self._health[0],
            "health_p2": self._health[1],
            "x_p1": self._x[0],
            "x_p2": self._x[1],
            "cooldown_p1": self._cooldown[0],
            "cooldown_p2": self._cooldown[1],
            "intent_p1": self._prev_intent[0],
            "intent_p2": self._prev_intent[1],
            "time": self._t,
        }

    def render(self) -> Frame:
        key = (
            self._x[0],
            self._x[1],
            (self._health[0] + 24) // 25,
            (self._health[1] + 24) // 25,
            self._last_attack[0] if self._arm_frames[0] > 0 else IDLE,
            self._last_attack[1] if self._arm_frames[1] > 0 else IDLE,
            self._prev_intent[0] == BLOCK,
            self._prev_intent[1] == BLOCK,
        )
        frame = self._frames.get(key)
        if frame is None:
            frame = Frame(
                SCREEN_W,
                SCREEN_H,
                render=lambda: self._render_pixels(key),
                digest=("duel", key),
            )
            if len(self._frames) > 4096:
                self._frames.clear()
            self._frames[key] = frame
        return frame

    @staticmethod
    def _render_pixels(key: tuple) -> np.ndarray:
        x1, x2, bar1, bar2, arm1, arm2, block1, block2 = key
        canvas = blank_canvas(COL_BG)
        canvas[GROUND_TOP:, :] = COL_GROUND

        # four-segment health gauges growing inward from either corner,
        # two tiles per segment so the pooled features resolve them
        if bar1 > 0:
            canvas[BAR_ROW, 2 : 2 + 2 * bar1] = COL_BAR
        if bar2 > 0:
            canvas[BAR_ROW, GRID_W - 2 - 2 * bar2 : GRID_W - 2] = COL_BAR

        for x, arm, block, toward in ((x1, arm1, block1, 1), (x2, arm2, block2, -1)):
            canvas[BODY_TOP:GROUND_TOP, x] = COL_BODY
            side = x + toward
            if 0 <= side < GRID_W:
                if arm == HIGH:
                    canvas[ARM_ROW_HIGH, side] = COL_ARM
                elif arm == LOW:
                    canvas[ARM_ROW_LOW, side] = COL_ARM
                if block:
                    canvas[SHIELD_ROW, side] = COL_SHIELD
        return upscale(canvas)

    # -- savestates ----------------------------------------------------------

    def _state_payload(self) -> Mapping[str, object]:
        return {
            "players": self._players,
            "difficulty": self._difficulty,
            "rng": self._rng.state,
            "x": list(self._x),
            "health": list(self._health),
            "cooldown": list(self._cooldown),
            "dealt": list(self._dealt),
            "prev_intent": list(self._prev_intent),
            "last_attack": list(self._last_attack),
            "arm_frames": list(self._arm_frames),
            "t": self._t,
        }

    def _load_payload(self, payload: Mapping[str, object]) -> None:
        self._players = int(payload["players"])  # type: ignore[arg-type]
        self._difficulty = str(payload["difficulty"])
        self._rng = SplitMix64(0)
        self._rng.state = int(payload["rng"])  # type: ignore[arg-type]
        self._x = [int(v) for v in payload["x"]]  # type: ignore[union-attr]
        self._health = [int(v) for v in payload["health"]]  # type: ignore[union-attr]
        self._cooldown = [int(v) for v in payload["cooldown"]]  # type: ignore[union-attr]
        self._dealt = [int(v) for v in payload["dealt"]]  # type: ignore[union-attr]
        self._prev_intent = [int(v) for v in payload["prev_intent"]]  # type: ignore[union-attr]
        self._last_attack = [int(v) for v in payload["last_attack"]]  # type: ignore[union-attr]
        self._arm_frames = [int(v) for v in payload["arm_frames"]]  # type: ignore[union-attr]
        self._t = int(payload["t"])  # type: ignore[arg-type]


_CANONICAL_DUEL_MASKS = tuple(
    move | button
    for move in (0, BTN_LEFT, BTN_RIGHT)
    for button in (0, BTN_B, BTN_Y, BTN_A)
)


def scripted_opponent_mask(core: DuelCore, seat: int, rng: Optional[SplitMix64] = None) -> int:
    """One frame of the built-in duel policy for the given seat (0 or 1).

    With probability set by the core's difficulty it plays the tactically
    right move (punish a block with a low attack, block while recovering,
    close distance otherwise); the rest of the time it acts uniformly at
    random over the canonical actions.
    """
    rng = rng if rng is not None else core._rng
    me, opp = seat, 1 - seat
    smart = DIFFICULTY_SMART_PERCENT[core._difficulty]
    if not rng.chance(smart, 100):
        return _CANONICAL_DUEL_MASKS[rng.randrange(len(_CANONICAL_DUEL_MASKS))]

    gap = abs(core._x[opp] - core._x[me])
    toward = BTN_RIGHT if core._x[opp] > core._x[me] else BTN_LEFT
    opp_blocked = core._prev_intent[opp] == BLOCK
    if core._cooldown[me] == 0 and gap <= LOW_RANGE and opp_blocked:
        return BTN_Y
    if core._cooldown[me] == 0 and gap <= HIGH_RANGE and not opp_blocked:
        return BTN_B
    if gap <= HIGH_RANGE + 1:
        return BTN_A  # hold guard while out of options
    return toward
