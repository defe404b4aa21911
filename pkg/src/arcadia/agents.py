"""Tabular Q-learning reference agent over pooled pixel features.

The feature map mean-pools the 84x84 preprocessed screen on a grid x grid
layout (cell boundaries at floor(k*84/grid), so cells differ by one pixel
when the grid does not divide 84) and quantizes each cell's mean to
``levels`` buckets: level = sum * levels // (256 * cell_pixels).  The byte
string of levels is the table key.

Learning is the classic one-step update against a periodically synced
target table:

    theta(s, a) += alpha * (R + gamma * max_a' Q(s', a'; theta') - Q(s, a; theta))

with a zero bootstrap on terminal transitions.  The target table is replaced
by a copy of the online table every ``target_sync_period`` updates.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Iterable, Optional, Sequence, TextIO, Tuple

import numpy as np

from .core import Frame, SplitMix64
from .errors import NumericError, UsageError
from .wrappers import TARGET_SIZE, preprocess


@dataclass(frozen=True)
class FeatureSpec:
    grid: int = 8
    levels: int = 8

    def __post_init__(self) -> None:
        if not 1 <= self.grid <= TARGET_SIZE:
            raise ValueError(f"grid must be in [1, {TARGET_SIZE}]")
        if not 2 <= self.levels <= 256:
            raise ValueError("levels must be in [2, 256]")


def _pool_plan(grid: int) -> Tuple[np.ndarray, np.ndarray]:
    bounds = (np.arange(grid) * TARGET_SIZE) // grid
    counts = np.diff(np.append(bounds, TARGET_SIZE))
    return bounds.astype(np.int64), counts.astype(np.int64)


_plan_cache: Dict[int, Tuple[np.ndarray, np.ndarray]] = {}


def featurize(obs: np.ndarray, spec: FeatureSpec) -> np.ndarray:
    """Quantized grid x grid level map (uint8) of an 84x84 uint8 observation."""
    plan = _plan_cache.get(spec.grid)
    if plan is None:
        plan = _pool_plan(spec.grid)
        _plan_cache[spec.grid] = plan
    bounds, counts = plan
    sums = np.add.reduceat(np.add.reduceat(obs.astype(np.int64), bounds, axis=0), bounds, axis=1)
    pixels = np.outer(counts, counts)
    return ((sums * spec.levels) // (256 * pixels)).astype(np.uint8)


class FeatureExtractor:
    """Frame -> table key, memoized on the frame's content digest.

    ``mirror=True`` featurizes the horizontally flipped observation, which is
    how a policy trained on the left seat of a mirror-covariant core is
    applied from the right seat.
    """

    def __init__(self, spec: Optional[FeatureSpec] = None) -> None:
        self.spec = spec or FeatureSpec()
        self._memo: Dict[object, bytes] = {}

    def key_of(self, frame: Frame, mirror: bool = False) -> bytes:
        digest = frame.digest
        memo_key = None if digest is None else (digest, mirror)
        if memo_key is not None:
            hit = self._memo.get(memo_key)
            if hit is not None:
                return hit
        obs = preprocess(frame)
        if mirror:
            obs = obs[:, ::-1]
        key = featurize(obs, self.spec).tobytes()
        if memo_key is not None:
            if len(self._memo) > 200_000:
                self._memo.clear()
            self._memo[memo_key] = key
        return key


class QFunction:
    """Dense per-state action-value rows stored sparsely by feature key."""

    def __init__(self, num_actions: int) -> None:
        if num_actions < 1:
            raise ValueError("num_actions must be positive")
        self.num_actions = num_actions
        self.table: Dict[bytes, np.ndarray] = {}

    def row(self, key: bytes) -> np.ndarray:
        values = self.table.get(key)
        if values is None:
            values = np.zeros(self.num_actions, dtype=np.float64)
            self.table[key] = values
        return values

    def value(self, key: bytes, action: int) -> float:
        values = self.table.get(key)
        return 0.0 if values is None else float(values[action])

    def max_value(self, key: bytes) -> float:
        values = self.table.get(key)
        return 0.0 if values is None else float(values.max())

    def best_action(self, key: bytes) -> int:
        values = self.table.get(key)
        return 0 if values is None else int(np.argmax(values))

    def copy(self) -> "QFunction":
        clone = QFunction(self.num_actions)
        clone.table = {k: v.copy() for k, v in self.table.items()}
        return clone

    def __len__(self) -> int:
        return len(self.table)

    # -- text persistence: one "feature-key action value" triple per line --

    def save(self, stream: TextIO) -> None:
        stream.write(f"# q-table v1 actions={self.num_actions}\n")
        for key in sorted(self.table):
            values = self.table[key]
            hexkey = key.hex()
            for action in range(self.num_actions):
                # float() first: ndarray scalars repr as np.float64(...) and
                # would not parse back
                stream.write(f"{hexkey} {action} {float(values[action])!r}\n")

    @classmethod
    def load(cls, stream: TextIO) -> "QFunction":
        header = stream.readline().strip()
        if not header.startswith("# q-table v1 actions="):
            raise UsageError("not a q-table file (missing v1 header)")
        table = cls(int(header.rsplit("=", 1)[1]))
        for line_no, line in enumerate(stream, start=2):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 3:
                raise UsageError(f"line {line_no}: expected 'feature-key action value'")
            try:
                key, action, value = bytes.fromhex(parts[0]), int(parts[1]), float(parts[2])
            except ValueError as exc:
                raise UsageError(f"line {line_no}: {exc}") from None
            if not 0 <= action < table.num_actions:
                raise UsageError(f"line {line_no}: action {action} out of range")
            table.row(key)[action] = value
        return table


def q_update(
    online: QFunction,
    target: QFunction,
    key: bytes,
    action: int,
    reward: float,
    next_key: bytes,
    terminal: bool,
    alpha: float,
    gamma: float,
) -> float:
    """One tabular update; returns the new value of (key, action)."""
    row = online.row(key)
    bootstrap = 0.0 if terminal else target.max_value(next_key)
    row[action] += alpha * (reward + gamma * bootstrap - row[action])
    value = float(row[action])
    if value != value or value in (float("inf"), float("-inf")):
        raise NumericError("q-value diverged to a non-finite number")
    return value


@dataclass(frozen=True)
class HyperParams:
    alpha: float = 0.1
    gamma: float = 0.99
    epsilon_start: float = 1.0
    epsilon_end: float = 0.1
    epsilon_fraction: float = 0.1   # share of the action budget spent annealing
    epsilon_test: float = 0.05
    target_sync_period: int = 1000
    grid: int = 8
    levels: int = 8


class EpsilonSchedule:
    """Linear anneal from start to end over the first fraction of the budget."""

    def __init__(self, hyper: HyperParams, total_actions: int) -> None:
        self.start = hyper.epsilon_start
        self.end = hyper.epsilon_end
        self.horizon = max(1, int(total_actions * hyper.epsilon_fraction))

    def value(self, actions_taken: int) -> float:
        if actions_taken >= self.horizon:
            return self.end
        frac = actions_taken / self.horizon
        return self.start + (self.end - self.start) * frac


class QLearningAgent:
    """Epsilon-greedy tabular learner; ties break toward the lowest index."""

    def __init__(
        self,
        num_actions: int,
        hyper: Optional[HyperParams] = None,
        seed: int = 0,
    ) -> None:
        self.hyper = hyper or HyperParams()
        self.num_actions = num_actions
        self.q = QFunction(num_actions)
        self.target = self.q.copy()
        self.extractor = FeatureExtractor(
            FeatureSpec(grid=self.hyper.grid, levels=self.hyper.levels)
        )
        self.rng = SplitMix64(seed ^ 0xA6E27)
        self._updates_since_sync = 0
        self.train_actions = 0

    def key_of(self, frame: Frame, mirror: bool = False) -> bytes:
        return self.extractor.key_of(frame, mirror)

    def select_action(self, key: bytes, epsilon: float) -> int:
        if epsilon > 0 and self.rng.chance(int(epsilon * 1_000_000), 1_000_000):
            return self.rng.randrange(self.num_actions)
        return self.q.best_action(key)

    def update(
        self, key: bytes, action: int, reward: float, next_key: bytes, terminal: bool
    ) -> None:
        q_update(
            self.q,
            self.target,
            key,
            action,
            reward,
            next_key,
            terminal,
            self.hyper.alpha,
            self.hyper.gamma,
        )
        self._updates_since_sync += 1
        if self._updates_since_sync >= self.hyper.target_sync_period:
            self.target = self.q.copy()
            self._updates_since_sync = 0

    def mean_max_q(self, keys: Iterable[bytes]) -> float:
        keys = list(keys)
        if not keys:
            return 0.0
        return float(sum(self.q.max_value(k) for k in keys) / len(keys))


class RandomAgent:
    """Uniform policy over the action set; ignores observations."""

    def __init__(self, num_actions: int, seed: int = 0) -> None:
        self.num_actions = num_actions
        self.rng = SplitMix64(seed ^ 0x7A11)

    def select_action(self, key: object = None, epsilon: float = 0.0) -> int:
        return self.rng.randrange(self.num_actions)
