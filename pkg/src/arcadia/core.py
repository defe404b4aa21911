"""Plugin contract for in-process game cores.

A core is a deterministic state machine: ``reset(seed, config)`` puts it at
frame 0 of an episode, ``step(actions)`` advances exactly one emulated frame,
and ``serialize``/``deserialize`` snapshot the full state for replay.  Cores
are registered in a static registry keyed by name and reached through
:mod:`arcadia.env`.

Determinism contract: ``(seed, config, action sequence)`` fully determines
every frame, every state-var map, and the terminal flag.  Cores draw all of
their randomness from a :class:`SplitMix64` stream seeded at reset.
"""

from __future__ import annotations

import json
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Callable, Dict, Mapping, Optional, Sequence, Tuple

import numpy as np

from .errors import ConfigurationError, IncompatibleStateError, UnknownCoreError, UsageError

MASK64 = (1 << 64) - 1

# Maps are plain ints; only the low `num_buttons` bits may ever be set.
MAX_BUTTONS = 16

StateVars = Dict[str, int]


def combine_masks(a: int, b: int) -> int:
    """Bit-wise OR of two button masks (simultaneous presses)."""
    return a | b


def mask_valid(mask: int, num_buttons: int) -> bool:
    return 0 <= mask < (1 << num_buttons)


class SplitMix64:
    """Tiny deterministic PRNG with a single 64-bit word of state.

    Used instead of ``random.Random`` so savestates stay compact and
    byte-stable across platforms.
    """

    __slots__ = ("state",)

    def __init__(self, seed: int) -> None:
        self.state = seed & MASK64

    def next_u64(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        return (z ^ (z >> 31)) & MASK64

    def randrange(self, n: int) -> int:
        """Uniform-ish integer in [0, n); modulo bias is negligible for game logic."""
        return self.next_u64() % n

    def chance(self, num: int, den: int) -> bool:
        """True with probability num/den."""
        return self.next_u64() % den < num


@dataclass(frozen=True)
class CoreInfo:
    """Static facts a core declares about itself."""

    name: str
    num_players: int
    num_buttons: int
    frame_rate: int
    screen_width: int
    screen_height: int
    config_keys: Tuple[str, ...]

    def __post_init__(self) -> None:
        if self.num_players not in (1, 2):
            raise ValueError("num_players must be 1 or 2")
        if not 1 <= self.num_buttons <= MAX_BUTTONS:
            raise ValueError(f"num_buttons must be in [1, {MAX_BUTTONS}]")
        if self.frame_rate <= 0:
            raise ValueError("frame_rate must be positive")


class Frame:
    """One screen of 32-bit RGBA pixels, row-major.

    Pixels are packed ``R<<24 | G<<16 | B<<8 | A`` and materialized lazily:
    cores hand over a pure render function of an immutable visual key, so
    frames that are never looked at cost almost nothing.  ``digest`` is a
    hashable fingerprint with the guarantee that, within one core name and
    version, equal digests imply byte-identical pixels.
    """

    __slots__ = ("width", "height", "digest", "_pixels", "_render")

    def __init__(
        self,
        width: int,
        height: int,
        *,
        pixels: Optional[np.ndarray] = None,
        render: Optional[Callable[[], np.ndarray]] = None,
        digest: object = None,
    ) -> None:
        if width <= 0 or height <= 0:
            raise ValueError("frame dimensions must be positive")
        if pixels is None and render is None:
            raise ValueError("frame needs pixels or a render function")
        self.width = width
        self.height = height
        self.digest = digest
        self._pixels = pixels
        self._render = render

    @property
    def pixels(self) -> np.ndarray:
        """Flat uint32 array of length width*height (row-major)."""
        if self._pixels is None:
            px = self._render()  # type: ignore[misc]
            if px.shape != (self.width * self.height,):
                raise ValueError("rendered pixel count does not match frame dimensions")
            px.setflags(write=False)
            self._pixels = px
        return self._pixels

    def rgba(self) -> np.ndarray:
        """Pixels as a (height, width, 4) uint8 array in R, G, B, A order."""
        px = self.pixels
        out = np.empty((self.height, self.width, 4), dtype=np.uint8)
        flat = px.reshape(self.height, self.width)
        out[..., 0] = (flat >> 24) & 0xFF
        out[..., 1] = (flat >> 16) & 0xFF
        out[..., 2] = (flat >> 8) & 0xFF
        out[..., 3] = flat & 0xFF
        return out

    def same_pixels(self, other: "Frame") -> bool:
        return (
            self.width == other.width
            and self.height == other.height
            and bool(np.array_equal(self.pixels, other.pixels))
        )


@dataclass(frozen=True)
class CoreState:
    """Opaque savestate: accepted only by the producing core name and version."""

    core_name: str
    version: str
    data: bytes


class GameCore(ABC):
    """Base class all cores implement.

    Subclasses provide ``_reset_world``, ``_advance``, ``render``,
    ``_state_vars``, and payload (de)serialization; the base class owns the
    usage-error bookkeeping so every core rejects bad calls identically.
    """

    NAME: str = ""
    STATE_VERSION: str = "1"

    def __init__(self) -> None:
        self._ready = False
        self._terminal = False

    # -- identity ------------------------------------------------------

    @property
    @abstractmethod
    def info(self) -> CoreInfo:
        """Core facts; ``num_players`` may depend on the active configuration."""

    # -- lifecycle -----------------------------------------------------

    def reset(self, seed: int, config: Optional[Mapping[str, object]] = None) -> Frame:
        """Start a new episode at frame 0; returns the initial frame."""
        cfg = dict(config or {})
        allowed = set(self.info.config_keys)
        for key in cfg:
            if key not in allowed:
                raise ConfigurationError(
                    f"unknown config key {key!r} for core {self.NAME!r}"
                    f" (supported: {', '.join(sorted(allowed)) or 'none'})"
                )
        self._reset_world(seed & MASK64, cfg)
        self._ready = True
        self._terminal = False
        return self.render()

    def step(self, actions: Sequence[int]) -> Tuple[Frame, StateVars, bool]:
        """Advance exactly one emulated frame under the given per-player masks."""
        if not self._ready:
            raise UsageError("step before reset")
        if self._terminal:
            raise UsageError("step after terminal; reset the core first")
        players = self.info.num_players
        if len(actions) != players:
            raise UsageError(f"expected {players} action mask(s), got {len(actions)}")
        nb = self.info.num_buttons
        for mask in actions:
            if not mask_valid(mask, nb):
                raise UsageError(f"mask {mask:#x} sets bits above the core's {nb} buttons")
        self._terminal = self._advance(tuple(actions))
        return self.render(), self.state_vars(), self._terminal

    def state_vars(self) -> StateVars:
        """Fresh copy of the auxiliary state map; always contains "score"."""
        if not self._ready:
            raise UsageError("state_vars before reset")
        return self._state_vars()

    @property
    def terminal(self) -> bool:
        return self._terminal

    # -- savestates ------------------------------------------------------

    def serialize(self) -> CoreState:
        if not self._ready:
            raise UsageError("serialize before reset")
        payload = dict(self._state_payload())
        payload["__terminal"] = int(self._terminal)
        data = json.dumps(payload, sort_keys=True, separators=(",", ":")).encode("ascii")
        return CoreState(core_name=self.NAME, version=self.STATE_VERSION, data=data)

    def deserialize(self, state: CoreState) -> None:
        if state.core_name != self.NAME or state.version != self.STATE_VERSION:
            raise IncompatibleStateError(
                f"savestate is for {state.core_name!r} v{state.version}, "
                f"this core is {self.NAME!r} v{self.STATE_VERSION}"
            )
        payload = json.loads(state.data.decode("ascii"))
        self._terminal = bool(payload.pop("__terminal"))
        self._load_payload(payload)
        self._ready = True

    # -- action semantics ------------------------------------------------

    def canonical_mask(self, mask: int) -> int:
        """Collapse a mask to the representative of its behavior class.

        Two masks with the same canonical form are guaranteed by the core to
        produce identical dynamics in every state.  Default: every mask is
        distinct.
        """
        return mask

    # -- subclass surface -------------------------------------------------

    @abstractmethod
    def _reset_world(self, seed: int, config: Mapping[str, object]) -> None: ...

    @abstractmethod
    def _advance(self, masks: Tuple[int, ...]) -> bool:
        """Run one frame; returns True iff the episode ended on this frame."""

    @abstractmethod
    def render(self) -> Frame:
        """Frame for the current state; pure, callable repeatedly."""

    @abstractmethod
    def _state_vars(self) -> StateVars: ...

    @abstractmethod
    def _state_payload(self) -> Mapping[str, object]: ...

    @abstractmethod
    def _load_payload(self, payload: Mapping[str, object]) -> None: ...


# -- registry ------------------------------------------------------------

_REGISTRY: Dict[str, Callable[[], GameCore]] = {}


def register_core(name: str, factory: Callable[[], GameCore]) -> None:
    _REGISTRY[name] = factory


def create_core(name: str) -> GameCore:
    try:
        factory = _REGISTRY[name]
    except KeyError:
        raise UnknownCoreError(
            f"no core named {name!r}; registered: {', '.join(sorted(_REGISTRY)) or 'none'}"
        ) from None
    return factory()


def registered_cores() -> Tuple[str, ...]:
    return tuple(sorted(_REGISTRY))


def parse_config_int(
    config: Mapping[str, object], key: str, default: int, lo: int, hi: int
) -> int:
    """Shared typed accessor for integer config values with range checking."""
    raw = config.get(key, default)
    try:
        value = int(raw)  # type: ignore[arg-type]
    except (TypeError, ValueError):
        raise ConfigurationError(
            f"config key {key!r} must be an integer in [{lo}, {hi}], got {raw!r}"
        ) from None
    if not lo <= value <= hi:
        raise ConfigurationError(
            f"config key {key!r} must be in [{lo}, {hi}], got {value}"
        )
    return value


def parse_config_choice(
    config: Mapping[str, object], key: str, default: str, choices: Sequence[str]
) -> str:
    raw = str(config.get(key, default))
    if raw not in choices:
        raise ConfigurationError(
            f"config key {key!r} must be one of {{{', '.join(choices)}}}, got {raw!r}"
        )
    return raw
