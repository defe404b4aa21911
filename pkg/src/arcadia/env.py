"""Environment runtime over a game core.

Responsibilities on top of the raw core: action repeat (``frame_skip``),
score-delta rewards, the wall-clock episode cap, optional reward clipping,
and the fully-competitive two-player reward (each player receives its own
score delta minus the opponent's, so the rewards always sum to zero).

Reseeding: ``reset()`` without an explicit seed starts episode ``i`` with
``base_seed + i``, so a single environment object walks a deterministic
sequence of distinct episodes.
"""

from __future__ import annotations

from typing import Mapping, NamedTuple, Optional, Sequence, Tuple, Union

from .core import Frame, GameCore, StateVars, create_core
from .errors import ConfigurationError, UsageError

DEFAULT_FRAME_SKIP = 4
EPISODE_CAP_MINUTES = 5


class StepResult(NamedTuple):
    """What one environment step produced.

    ``rewards`` has one entry per player; ``reward`` is player 1's entry.
    ``frames_elapsed`` counts emulated frames since reset.
    """

    frame: Frame
    vars: StateVars
    rewards: Tuple[float, ...]
    terminal: bool
    frames_elapsed: int

    @property
    def reward(self) -> float:
        return self.rewards[0]


def minimal_action_set(core: GameCore) -> Tuple[int, ...]:
    """Sorted canonical representatives of the core's behavior-distinct masks."""
    reps = {core.canonical_mask(m) for m in range(1 << core.info.num_buttons)}
    return tuple(sorted(reps))


def full_action_set(core: GameCore) -> Tuple[int, ...]:
    return tuple(range(1 << core.info.num_buttons))


class Environment:
    """Episode-structured wrapper around a registered core."""

    def __init__(
        self,
        core_name: str,
        *,
        frame_skip: int = DEFAULT_FRAME_SKIP,
        max_episode_frames: Optional[int] = None,
        reward_clip: Optional[float] = None,
        core_config: Optional[Mapping[str, object]] = None,
    ) -> None:
        if frame_skip < 1:
            raise ConfigurationError(f"frame_skip must be >= 1, got {frame_skip}")
        if max_episode_frames is not None and max_episode_frames < 1:
            raise ConfigurationError(
                f"max_episode_frames must be >= 1, got {max_episode_frames}"
            )
        if reward_clip is not None and not reward_clip > 0:
            raise ConfigurationError(f"reward_clip must be > 0, got {reward_clip}")
        self.core_name = core_name
        self.frame_skip = frame_skip
        self.reward_clip = reward_clip
        self.core_config = dict(core_config or {})
        self.core = create_core(core_name)
        self._explicit_cap = max_episode_frames
        self._base_seed: Optional[int] = None
        self._episodes = 0
        self._frames = 0
        self._terminal = True
        self._started = False
        self._vars: StateVars = {}

    # -- configuration ----------------------------------------------------

    @classmethod
    def from_settings(cls, settings: Mapping[str, str]) -> "Environment":
        """Build from a flat string map (the config-file format).

        Core options use a ``core.`` prefix, e.g. ``core.difficulty=medium``.
        """
        known = {"core", "frame_skip", "max_episode_frames", "reward_clip"}
        core_config = {}
        plain = {}
        for key, value in settings.items():
            if key.startswith("core."):
                core_config[key[len("core.") :]] = value
            elif key in known:
                plain[key] = value
            else:
                raise ConfigurationError(
                    f"unknown environment setting {key!r}"
                    f" (supported: {', '.join(sorted(known))}, core.*)"
                )
        if "core" not in plain:
            raise ConfigurationError("missing required setting 'core'")
        try:
            frame_skip = int(plain.get("frame_skip", DEFAULT_FRAME_SKIP))
            cap = plain.get("max_episode_frames")
            max_frames = int(cap) if cap is not None else None
            clip = plain.get("reward_clip")
            reward_clip = float(clip) if clip is not None else None
        except ValueError as exc:
            raise ConfigurationError(f"malformed environment setting: {exc}") from None
        return cls(
            plain["core"],
            frame_skip=frame_skip,
            max_episode_frames=max_frames,
            reward_clip=reward_clip,
            core_config=core_config,
        )

    def spawn(self) -> "Environment":
        """Fresh environment with identical configuration and no episode state."""
        return Environment(
            self.core_name,
            frame_skip=self.frame_skip,
            max_episode_frames=self._explicit_cap,
            reward_clip=self.reward_clip,
            core_config=self.core_config,
        )

    # -- episode lifecycle ---------------------------------------------------

    @property
    def num_players(self) -> int:
        # "players" is a reserved core config key: a core that supports more
        # than one seat must select the seat count through it.  Honouring it
        # here keeps the answer right before the first reset.
        declared = self.core_config.get("players")
        if declared is not None:
            try:
                count = int(declared)
            except (TypeError, ValueError):
                raise ConfigurationError(
                    f"core config 'players' must be an integer, got {declared!r}"
                ) from None
            if count not in (1, 2):
                raise ConfigurationError(f"core config 'players' must be 1 or 2, got {count}")
            return count
        return self.core.info.num_players

    @property
    def max_episode_frames(self) -> int:
        if self._explicit_cap is not None:
            return self._explicit_cap
        return EPISODE_CAP_MINUTES * 60 * self.core.info.frame_rate

    def reset(self, seed: Optional[int] = None) -> StepResult:
        if seed is not None:
            self._base_seed = seed
            self._episodes = 0
        elif self._base_seed is None:
            raise UsageError("first reset needs an explicit seed")
        episode_seed = self._base_seed + self._episodes
        self._episodes += 1
        frame = self.core.reset(episode_seed, self.core_config)
        self._vars = self.core.state_vars()
        self._frames = 0
        self._terminal = False
        self._started = True
        zeros = (0.0,) * self.num_players
        return StepResult(frame, dict(self._vars), zeros, False, 0)

    def step(self, action: Union[int, Sequence[int]]) -> StepResult:
        if not self._started:
            raise UsageError("step before reset")
        if self._terminal:
            raise UsageError("episode is over; call reset")
        players = self.num_players
        if isinstance(action, int):
            if players != 1:
                raise UsageError(f"core has {players} players, pass a mask per player")
            masks: Tuple[int, ...] = (action,)
        else:
            masks = tuple(action)
            if len(masks) != players:
                raise UsageError(f"expected {players} masks, got {len(masks)}")

        before = self._vars
        cap = self.max_episode_frames
        frame: Frame
        vars_: StateVars = before
        terminal = False
        for _ in range(self.frame_skip):
            frame, vars_, terminal = self.core.step(masks)
            self._frames += 1
            if terminal or self._frames >= cap:
                terminal = True
                break
        self._vars = vars_
        self._terminal = terminal

        if players == 2:
            d1 = float(vars_["score"] - before["score"])
            d2 = float(vars_["score_p2"] - before["score_p2"])
            rewards: Tuple[float, ...] = (d1 - d2, d2 - d1)
        else:
            rewards = (float(vars_["score"] - before["score"]),)
        if self.reward_clip is not None:
            c = self.reward_clip
            rewards = tuple(min(max(r, -c), c) for r in rewards)
        return StepResult(frame, dict(vars_), rewards, terminal, self._frames)

    def observe_vars(self) -> StateVars:
        if not self._started:
            raise UsageError("observe before reset")
        return dict(self._vars)

    @property
    def terminal(self) -> bool:
        return self._terminal

    # -- action space ----------------------------------------------------------

    def action_set(self, minimal: bool = True) -> Tuple[int, ...]:
        return minimal_action_set(self.core) if minimal else full_action_set(self.core)
