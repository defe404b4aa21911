"""Training and evaluation methodology.

The protocol mirrors common practice for tabular/valued agents on emulated
games: training is cut into epochs of 50,000 agent actions, each followed by
an evaluation pass of 30 episodes played with a small fixed exploration rate
on freshly seeded environments, plus a mean-Q probe over a frozen set of
states collected once by a random rollout.  Training stops at the action
budget, at the epoch cap, or earlier when the evaluation score's relative
change stays below a threshold for a run of consecutive epochs.

Two-player utilities cover the fully-competitive setting: round-based
tournaments, retraining against a fixed rival (the catastrophic-forgetting
probe), and training schedules that alternate opponents between episodes.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

from .agents import EpsilonSchedule, QLearningAgent, RandomAgent
from .core import SplitMix64, StateVars
from .cores.pad import BTN_LEFT, BTN_RIGHT
from .env import Environment, StepResult
from .errors import NormalizationError, UsageError
from .wrappers import ShapedEnv

TrainEnv = Union[Environment, ShapedEnv]


@dataclass(frozen=True)
class EvalProtocol:
    epoch_actions: int = 50_000
    max_epochs: int = 100
    eval_episodes: int = 30
    eval_seed_base: int = 10_000
    probe_states: int = 256
    probe_seed: int = 777
    convergence_epochs: int = 3
    convergence_threshold: float = 0.02
    # optional per-run skilled-play reference; the shipped per-core anchors
    # apply when this is unset
    human_reference: Optional[float] = None


@dataclass
class EvalResult:
    episode_scores: List[int]

    @property
    def mean_score(self) -> float:
        return sum(self.episode_scores) / len(self.episode_scores)


@dataclass
class TrainResult:
    actions: int
    episodes: int
    milestone_action: Optional[int]
    epoch_scores: List[float] = field(default_factory=list)
    mean_q_curve: List[float] = field(default_factory=list)
    converged_epoch: Optional[int] = None
    episodes_per_opponent: Optional[List[int]] = None


def raw_template(env: TrainEnv) -> Environment:
    return env.env if isinstance(env, ShapedEnv) else env


def evaluate(
    template: Environment,
    agent: Union[QLearningAgent, RandomAgent],
    protocol: EvalProtocol = EvalProtocol(),
) -> EvalResult:
    """Mean game score over freshly seeded episodes with test-time exploration."""
    env = template.spawn()
    action_set = env.action_set()
    epsilon = agent.hyper.epsilon_test if isinstance(agent, QLearningAgent) else 1.0
    scores: List[int] = []
    for i in range(protocol.eval_episodes):
        result = env.reset(seed=protocol.eval_seed_base + i)
        while not result.terminal:
            if isinstance(agent, QLearningAgent):
                key = agent.key_of(result.frame)
                action = agent.select_action(key, epsilon)
            else:
                action = agent.select_action()
            result = env.step(action_set[action])
        scores.append(result.vars["score"])
    return EvalResult(scores)


def collect_probe_keys(
    template: Environment, agent: QLearningAgent, protocol: EvalProtocol
) -> List[bytes]:
    """Frozen feature keys from a random rollout, for the mean-Q curve."""
    env = template.spawn()
    action_set = env.action_set()
    rng = SplitMix64(protocol.probe_seed)
    keys: List[bytes] = []
    result = env.reset(seed=protocol.probe_seed)
    while len(keys) < protocol.probe_states:
        result = env.step(action_set[rng.randrange(len(action_set))])
        keys.append(agent.key_of(result.frame))
        if result.terminal:
            result = env.reset()
    return keys


def _converged(scores: Sequence[float], protocol: EvalProtocol) -> bool:
    need = protocol.convergence_epochs
    if len(scores) < need + 1:
        return False
    recent = scores[-(need + 1) :]
    for prev, cur in zip(recent, recent[1:]):
        denom = max(abs(prev), 1e-9)
        if abs(cur - prev) / denom >= protocol.convergence_threshold:
            return False
    return True


def train(
    env: TrainEnv,
    agent: QLearningAgent,
    total_actions: int,
    *,
    train_seed: int = 0,
    protocol: EvalProtocol = EvalProtocol(),
    epoch_evals: bool = False,
    milestone: Optional[Callable[[StateVars], bool]] = None,
) -> TrainResult:
    """Epsilon-greedy training for up to ``total_actions`` agent actions.

    ``milestone`` is checked against the state vars after every action; the
    index of the first action that satisfies it is reported.  With
    ``epoch_evals`` the full epoch protocol runs (evaluation episodes, mean-Q
    probe, convergence early stop); without it training is a single stretch.
    """
    action_set = raw_template(env).action_set()
    schedule = EpsilonSchedule(agent.hyper, total_actions)
    start_actions = agent.train_actions
    probes = collect_probe_keys(raw_template(env), agent, protocol) if epoch_evals else []

    out = TrainResult(actions=0, episodes=0, milestone_action=None)
    result = env.reset(seed=train_seed)
    key = agent.key_of(result.frame)
    out.episodes = 1

    for act_index in range(total_actions):
        epsilon = schedule.value(agent.train_actions - start_actions)
        action = agent.select_action(key, epsilon)
        result = env.step(action_set[action])
        next_key = agent.key_of(result.frame)
        agent.update(key, action, result.rewards[0], next_key, result.terminal)
        agent.train_actions += 1
        out.actions += 1

        if milestone is not None and out.milestone_action is None:
            if milestone(result.vars):
                out.milestone_action = out.actions
                milestone = None

        if result.terminal:
            result = env.reset()
            key = agent.key_of(result.frame)
            out.episodes += 1
        else:
            key = next_key

        if epoch_evals and out.actions % protocol.epoch_actions == 0:
            epoch = out.actions // protocol.epoch_actions
            out.epoch_scores.append(
                evaluate(raw_template(env), agent, protocol).mean_score
            )
            out.mean_q_curve.append(agent.mean_max_q(probes))
            if _converged(out.epoch_scores, protocol):
                out.converged_epoch = epoch
                break
            if epoch >= protocol.max_epochs:
                break
    return out


# -- score normalization ------------------------------------------------------

# (random, skilled) mean episode scores under the default EvalProtocol,
# regenerated by tools/make_anchors.py.  Random side: RandomAgent(seed=0) over
# the 30 protocol seeds, written as the exact integer score sum over 30 so
# recomputed means compare equal.  Skilled side: the scripted reference
# players (experts.py) at frame granularity, which score identically on every
# seed.  Duel anchors are against the default medium difficulty.
NORMALIZATION_ANCHORS: Dict[str, Tuple[float, float]] = {
    "scroller": (8_200 / 30, 10_200.0),
    "racer": (0.0, 4_000.0),
    "duel": (1_550 / 30, 100.0),
}


def normalize(raw_mean: float, random_mean: float, human_reference: float) -> float:
    """100 * (raw - random) / (human - random); 0 is random play, 100 skilled.

    Exact at both anchor points: the ratio is formed before scaling.
    """
    span = human_reference - random_mean
    if span == 0:
        raise NormalizationError(
            f"human reference equals random baseline ({random_mean}); cannot normalize"
        )
    return 100.0 * ((raw_mean - random_mean) / span)


def normalize_score(core_name: str, raw: float) -> float:
    """Normalize against the shipped anchors for a built-in core."""
    try:
        random_anchor, human_anchor = NORMALIZATION_ANCHORS[core_name]
    except KeyError:
        raise NormalizationError(f"no normalization anchors for core {core_name!r}") from None
    return normalize(raw, random_anchor, human_anchor)


# -- two-player play ---------------------------------------------------------


def mirror_mask(mask: int) -> int:
    """Swap the left/right movement bits of a button mask."""
    left = (mask >> 6) & 1
    right = (mask >> 7) & 1
    return (mask & ~(BTN_LEFT | BTN_RIGHT)) | (right << 6) | (left << 7)


class Player:
    """Per-episode stateless action source for one seat of a two-player env."""

    def action(self, result: StepResult) -> int:
        raise NotImplementedError


class AgentPlayer(Player):
    """Pixel agent on a seat.  Seat 2 sees the mirrored world: the observation
    is flipped and the chosen mask's movement bits are swapped back, so one
    Q-table drives either seat of a mirror-covariant core."""

    def __init__(
        self,
        agent: Union[QLearningAgent, RandomAgent],
        action_set: Sequence[int],
        epsilon: float,
        seat: int = 0,
    ) -> None:
        if seat not in (0, 1):
            raise UsageError("seat must be 0 or 1")
        self.agent = agent
        self.action_set = tuple(action_set)
        self.epsilon = epsilon
        self.seat = seat

    def action(self, result: StepResult) -> int:
        if isinstance(self.agent, QLearningAgent):
            key = self.agent.key_of(result.frame, mirror=self.seat == 1)
            index = self.agent.select_action(key, self.epsilon)
        else:
            index = self.agent.select_action()
        mask = self.action_set[index]
        return mirror_mask(mask) if self.seat == 1 else mask


class ScriptedPlayer(Player):
    """Wraps a state-vars policy (already written for its seat)."""

    def __init__(self, policy: Callable[[StateVars], int]) -> None:
        self.policy = policy

    def action(self, result: StepResult) -> int:
        return self.policy(result.vars)


@dataclass
class TournamentResult:
    wins: Tuple[int, int]
    draws: int
    rounds: int
    trace: List[Dict[str, int]] = field(default_factory=list)


def _round_winner(final_vars: StateVars) -> Optional[int]:
    h1, h2 = final_vars["health_p1"], final_vars["health_p2"]
    if h1 == h2:
        return None
    return 0 if h1 > h2 else 1


def _round_starts(template: Environment, seed: int) -> Tuple[int, int]:
    probe = template.spawn()
    vars_ = probe.reset(seed=seed).vars
    return vars_["x_p1"], vars_["x_p2"]


def tournament(
    template: Environment,
    agent_a: Union[QLearningAgent, RandomAgent],
    agent_b: Union[QLearningAgent, RandomAgent],
    rounds: int = 50,
    seed_base: int = 5_000,
    *,
    epsilon: float = 0.0,
    mirrored: bool = False,
    symmetric_starts: bool = False,
) -> TournamentResult:
    """Round-based head-to-head: knockout wins, else higher health at the cap.

    Play is greedy by default so results are a pure function of the tables.
    ``mirrored`` replays the same rounds reflected left-to-right with the
    seats exchanged: on a mirror-covariant core that swaps the win counts
    exactly.  ``symmetric_starts`` places the fighters at mirror-image
    positions, under which self-play is a draw every round.
    """
    if template.num_players != 2:
        raise UsageError("tournament needs a two-player environment")
    from .cores.duel import ARENA_CELLS

    wins = [0, 0]
    draws = 0
    trace: List[Dict[str, int]] = []
    arena_edge = ARENA_CELLS - 1
    for r in range(rounds):
        seed = seed_base + r
        x1, x2 = _round_starts(template, seed)
        if symmetric_starts:
            x2 = arena_edge - x1
        if mirrored:
            x1, x2 = arena_edge - x2, arena_edge - x1
        env = Environment(
            template.core_name,
            frame_skip=template.frame_skip,
            max_episode_frames=template._explicit_cap,
            reward_clip=template.reward_clip,
            core_config={**template.core_config, "p1_x": x1, "p2_x": x2},
        )
        seats = (agent_b, agent_a) if mirrored else (agent_a, agent_b)
        action_set = env.action_set()
        players = [
            AgentPlayer(seats[0], action_set, epsilon, seat=0),
            AgentPlayer(seats[1], action_set, epsilon, seat=1),
        ]
        result = env.reset(seed=seed)
        while not result.terminal:
            result = env.step((players[0].action(result), players[1].action(result)))
        winner = _round_winner(result.vars)
        health = (result.vars["health_p1"], result.vars["health_p2"])
        if mirrored:
            winner = None if winner is None else 1 - winner
            health = (health[1], health[0])
        if winner is None:
            draws += 1
        else:
            wins[winner] += 1
        trace.append(
            {
                "round": r,
                "seed": seed,
                "winner": -1 if winner is None else winner,
                "health_a": health[0],
                "health_b": health[1],
            }
        )
    return TournamentResult(wins=(wins[0], wins[1]), draws=draws, rounds=rounds, trace=trace)


def train_versus(
    template: Environment,
    agent: QLearningAgent,
    opponent: Player,
    total_actions: int,
    *,
    train_seed: int = 0,
) -> TrainResult:
    """Seat-1 training against a fixed seat-2 opponent, zero-sum rewards."""
    if template.num_players != 2:
        raise UsageError("train_versus needs a two-player environment")
    env = template.spawn()
    action_set = env.action_set()
    schedule = EpsilonSchedule(agent.hyper, total_actions)
    start_actions = agent.train_actions

    out = TrainResult(actions=0, episodes=0, milestone_action=None)
    result = env.reset(seed=train_seed)
    key = agent.key_of(result.frame)
    out.episodes = 1

    for _ in range(total_actions):
        epsilon = schedule.value(agent.train_actions - start_actions)
        action = agent.select_action(key, epsilon)
        opp_mask = opponent.action(result)
        result = env.step((action_set[action], opp_mask))
        next_key = agent.key_of(result.frame)
        agent.update(key, action, result.rewards[0], next_key, result.terminal)
        agent.train_actions += 1
        out.actions += 1
        if result.terminal:
            result = env.reset()
            key = agent.key_of(result.frame)
            out.episodes += 1
        else:
            key = next_key
    return out


@dataclass
class ForgettingResult:
    pre_score: float
    post_score: float

    @property
    def relative_drop(self) -> float:
        if self.pre_score == 0:
            return 0.0
        return (self.pre_score - self.post_score) / abs(self.pre_score)


def retrain_versus(
    agent: QLearningAgent,
    rival: Player,
    *,
    first_template: Environment,
    versus_template: Environment,
    retrain_actions: int,
    protocol: EvalProtocol = EvalProtocol(),
    train_seed: int = 0,
) -> ForgettingResult:
    """Evaluate, retrain against a rival, evaluate again on the original task.

    The agent is assumed already trained on ``first_template`` (the scripted
    opponent).  Retraining runs on ``versus_template`` (two-player) against
    ``rival``; both evaluations are against the original scripted opponent.
    """
    pre = evaluate(first_template, agent, protocol).mean_score
    train_versus(versus_template, agent, rival, retrain_actions, train_seed=train_seed)
    post = evaluate(first_template, agent, protocol).mean_score
    return ForgettingResult(pre_score=pre, post_score=post)


def alternating_training(
    agent: QLearningAgent,
    opponents: Sequence[Tuple[Environment, Optional[Player]]],
    total_actions: int,
    *,
    train_seed: int = 0,
    max_episodes: Optional[int] = None,
) -> TrainResult:
    """Round-robin training: a new opponent every episode, shared budget.

    Each opponent is (environment template, player).  A ``None`` player means
    the environment itself supplies the opposition (a single-player template
    with a built-in opponent); otherwise the template must be two-player and
    the player fills seat 2.  With a one-element list this is the same
    schedule as a plain retraining run.
    """
    if not opponents:
        raise UsageError("alternating_training needs at least one opponent")
    envs = []
    for template, player in opponents:
        if player is None and template.num_players != 1:
            raise UsageError("built-in opposition needs a single-player template")
        if player is not None and template.num_players != 2:
            raise UsageError("an explicit opponent needs a two-player template")
        envs.append((template.spawn(), player))

    schedule = EpsilonSchedule(agent.hyper, total_actions)
    start_actions = agent.train_actions
    out = TrainResult(actions=0, episodes=0, milestone_action=None)
    faced = [0] * len(envs)

    turn = 0
    while out.actions < total_actions and (max_episodes is None or out.episodes < max_episodes):
        env, player = envs[turn % len(envs)]
        faced[turn % len(envs)] += 1
        action_set = env.action_set()
        result = env.reset(seed=train_seed + out.episodes)
        key = agent.key_of(result.frame)
        out.episodes += 1
        turn += 1
        while not result.terminal and out.actions < total_actions:
            epsilon = schedule.value(agent.train_actions - start_actions)
            action = agent.select_action(key, epsilon)
            if player is None:
                result = env.step(action_set[action])
            else:
                result = env.step((action_set[action], player.action(result)))
            next_key = agent.key_of(result.frame)
            agent.update(key, action, result.rewards[0], next_key, result.terminal)
            agent.train_actions += 1
            out.actions += 1
            key = next_key
    out.episodes_per_opponent = faced
    return out
