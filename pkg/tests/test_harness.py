from __future__ import annotations

import random

import pytest

from arcadia.agents import HyperParams, QLearningAgent, RandomAgent
from arcadia.env import Environment
from arcadia.errors import NormalizationError, UsageError
from arcadia.experts import duel_turtle
from arcadia.harness import (
    NORMALIZATION_ANCHORS,
    EvalProtocol,
    ScriptedPlayer,
    alternating_training,
    evaluate,
    mirror_mask,
    normalize,
    normalize_score,
    retrain_versus,
    tournament,
    train,
    train_versus,
)

_FAST = EvalProtocol(eval_episodes=3, eval_seed_base=10_000)


def _duel_2p(**kwargs) -> Environment:
    return Environment("duel", core_config={"players": 2}, **kwargs)


def _small_agent(num_actions: int = 12, seed: int = 0) -> QLearningAgent:
    return QLearningAgent(
        num_actions=num_actions, hyper=HyperParams(grid=4, levels=8), seed=seed
    )


# -- normalization ---------------------------------------------------------------


@pytest.mark.parametrize("core_name", sorted(NORMALIZATION_ANCHORS))
def test_normalize_anchors_are_exact(core_name: str) -> None:
    random_mean, human_mean = NORMALIZATION_ANCHORS[core_name]
    assert normalize_score(core_name, human_mean) == 100.0
    assert normalize_score(core_name, random_mean) == 0.0


def test_normalize_is_affine_invariant() -> None:
    rng = random.Random(1)
    for _ in range(200):
        raw = rng.uniform(-1000, 1000)
        lo = rng.uniform(-500, 500)
        hi = lo + rng.uniform(1, 1000)
        base = normalize(raw, lo, hi)
        a = rng.uniform(0.1, 20)
        b = rng.uniform(-100, 100)
        mapped = normalize(a * raw + b, a * lo + b, a * hi + b)
        assert mapped == pytest.approx(base, rel=1e-9, abs=1e-9)


def test_normalize_linearity_between_anchors() -> None:
    assert normalize(50.0, 0.0, 100.0) == 50.0
    assert normalize(-10.0, 0.0, 100.0) == -10.0  # worse than random is negative
    assert normalize(200.0, 0.0, 100.0) == 200.0  # above reference is allowed


def test_normalize_degenerate_span_is_an_error() -> None:
    with pytest.raises(NormalizationError):
        normalize(5.0, 3.0, 3.0)


def test_normalize_score_unknown_core() -> None:
    with pytest.raises(NormalizationError):
        normalize_score("chess", 1.0)


# -- evaluation ------------------------------------------------------------------


def test_evaluate_is_deterministic() -> None:
    env = Environment("scroller")
    agent = RandomAgent(len(env.action_set()), seed=0)
    twin = RandomAgent(len(env.action_set()), seed=0)
    a = evaluate(env, agent, _FAST)
    b = evaluate(env, twin, _FAST)
    assert a.episode_scores == b.episode_scores
    assert a.mean_score == sum(a.episode_scores) / len(a.episode_scores)


def test_evaluate_does_not_disturb_the_template() -> None:
    env = Environment("scroller")
    agent = RandomAgent(len(env.action_set()), seed=0)
    evaluate(env, agent, _FAST)
    with pytest.raises(UsageError):
        env.step(0)  # template never got an episode of its own


# -- training accounting -----------------------------------------------------------


def test_train_runs_exactly_the_requested_actions() -> None:
    env = Environment("scroller")
    agent = _small_agent(len(env.action_set()))
    result = train(env, agent, 500, train_seed=3)
    assert result.actions == 500
    assert agent.train_actions == 500
    assert result.episodes >= 1
    assert result.milestone_action is None


def test_train_milestone_reports_first_hit() -> None:
    env = Environment("scroller")
    agent = _small_agent(len(env.action_set()))
    result = train(
        env, agent, 400, train_seed=3, milestone=lambda v: v["time"] >= 40
    )
    # 40 frames is 10 actions at frame-skip 4, on the very first episode
    assert result.milestone_action == 10


def test_train_is_seed_reproducible() -> None:
    def run() -> list:
        env = Environment("racer")
        agent = _small_agent(len(env.action_set()), seed=7)
        train(env, agent, 300, train_seed=11)
        return sorted((k, tuple(v)) for k, v in agent.q.table.items())

    assert run() == run()


def test_train_epoch_evals_record_scores_and_curve() -> None:
    protocol = EvalProtocol(
        epoch_actions=100, max_epochs=3, eval_episodes=2, probe_states=16
    )
    env = Environment("scroller", max_episode_frames=400)
    agent = _small_agent(len(env.action_set()))
    result = train(env, agent, 1_000, train_seed=0, protocol=protocol, epoch_evals=True)
    assert result.actions <= 300  # stopped by max_epochs
    assert len(result.epoch_scores) == len(result.mean_q_curve)
    assert len(result.epoch_scores) >= 1


def test_convergence_early_stop() -> None:
    protocol = EvalProtocol(
        epoch_actions=50,
        max_epochs=100,
        eval_episodes=1,
        probe_states=8,
        convergence_epochs=3,
        convergence_threshold=0.5,  # generous: plateaued scores stop quickly
    )
    env = Environment("scroller", max_episode_frames=200)
    agent = _small_agent(len(env.action_set()))
    result = train(env, agent, 50_000, train_seed=0, protocol=protocol, epoch_evals=True)
    assert result.converged_epoch is not None
    assert result.actions == result.converged_epoch * 50


# -- tournaments -------------------------------------------------------------------


def test_tournament_requires_two_players() -> None:
    with pytest.raises(UsageError):
        tournament(Environment("duel"), RandomAgent(12, 0), RandomAgent(12, 1), rounds=1)


def test_tournament_accounting_and_determinism() -> None:
    env = _duel_2p()
    a, b = RandomAgent(12, seed=1), RandomAgent(12, seed=2)
    first = tournament(env, a, b, rounds=20)
    again = tournament(env, RandomAgent(12, 1), RandomAgent(12, 2), rounds=20)
    assert first.wins == again.wins and first.draws == again.draws
    assert first.wins[0] + first.wins[1] + first.draws == first.rounds == 20
    assert [t["winner"] for t in first.trace] == [t["winner"] for t in again.trace]
    assert len(first.trace) == 20


def test_tournament_mirrored_swap_is_exact() -> None:
    env = _duel_2p()
    agent_a = _small_agent(seed=3)
    agent_b = _small_agent(seed=4)
    # give the tables some arbitrary, asymmetric content
    train_versus(env, agent_a, ScriptedPlayer(duel_turtle), 800, train_seed=5)
    train_versus(env, agent_b, ScriptedPlayer(duel_turtle), 800, train_seed=6)

    plain = tournament(env, agent_a, agent_b, rounds=12)
    swapped = tournament(env, agent_a, agent_b, rounds=12, mirrored=True)
    assert swapped.wins == plain.wins
    assert swapped.draws == plain.draws
    for t_plain, t_swap in zip(plain.trace, swapped.trace):
        assert t_swap["winner"] == t_plain["winner"]
        assert (t_swap["health_a"], t_swap["health_b"]) == (
            t_plain["health_a"],
            t_plain["health_b"],
        )


def test_tournament_self_play_with_symmetric_starts_draws() -> None:
    env = _duel_2p()
    agent = _small_agent(seed=9)
    train_versus(env, agent, ScriptedPlayer(duel_turtle), 600, train_seed=2)
    result = tournament(env, agent, agent, rounds=10, symmetric_starts=True)
    assert result.draws == 10
    assert result.wins == (0, 0)


def test_tournament_random_vs_random_is_balanced() -> None:
    # 99% binomial band around 25 of 50 for each side's win count
    env = _duel_2p()
    result = tournament(env, RandomAgent(12, 1), RandomAgent(12, 2), rounds=50)
    assert 16 <= result.wins[0] <= 34
    assert 16 <= result.wins[1] <= 34


def test_mirror_mask_swaps_directions_only() -> None:
    from arcadia.cores.pad import BTN_B, BTN_LEFT, BTN_RIGHT

    assert mirror_mask(BTN_LEFT) == BTN_RIGHT
    assert mirror_mask(BTN_RIGHT) == BTN_LEFT
    assert mirror_mask(BTN_LEFT | BTN_B) == BTN_RIGHT | BTN_B
    assert mirror_mask(mirror_mask(0b101010101010)) == 0b101010101010


# -- multi-agent schedules -----------------------------------------------------------


def test_versus_training_needs_two_player_template() -> None:
    with pytest.raises(UsageError):
        train_versus(Environment("duel"), _small_agent(), ScriptedPlayer(duel_turtle), 10)


def test_one_element_alternation_equals_plain_retraining() -> None:
    env = _duel_2p()
    opponent = ScriptedPlayer(duel_turtle)

    plain = _small_agent(seed=1)
    train_versus(env, plain, opponent, 600, train_seed=4)

    alternated = _small_agent(seed=1)
    alternating_training(alternated, [(env, opponent)], 600, train_seed=4)

    assert sorted(plain.q.table) == sorted(alternated.q.table)
    for key, row in plain.q.table.items():
        assert row.tolist() == alternated.q.table[key].tolist()


def test_alternation_cycles_opponents_evenly() -> None:
    env = _duel_2p(max_episode_frames=40)
    rotation = [
        (env, ScriptedPlayer(duel_turtle)),
        (env, ScriptedPlayer(lambda v: 0)),
        (env, ScriptedPlayer(duel_turtle)),
    ]
    agent = _small_agent(seed=0)
    result = alternating_training(
        agent, rotation, total_actions=10**9, train_seed=0, max_episodes=9
    )
    assert result.episodes == 9
    assert result.episodes_per_opponent == [3, 3, 3]


def test_alternation_validates_templates() -> None:
    agent = _small_agent()
    with pytest.raises(UsageError):
        alternating_training(agent, [], 100)
    with pytest.raises(UsageError):
        alternating_training(agent, [(Environment("duel"), ScriptedPlayer(duel_turtle))], 100)
    with pytest.raises(UsageError):
        alternating_training(agent, [(_duel_2p(), None)], 100)


def test_retrain_versus_reports_before_and_after() -> None:
    def twin_of(agent: QLearningAgent) -> QLearningAgent:
        twin = QLearningAgent(agent.num_actions, agent.hyper, seed=0)
        twin.q = agent.q.copy()
        twin.target = agent.q.copy()
        return twin

    first = Environment("duel", max_episode_frames=200)
    versus = _duel_2p(max_episode_frames=200)
    # greedy at test time so the scores are a pure function of the table
    agent = QLearningAgent(
        num_actions=12, hyper=HyperParams(grid=4, levels=8, epsilon_test=0.0), seed=2
    )
    protocol = EvalProtocol(eval_episodes=2)
    expected_pre = evaluate(first, twin_of(agent), protocol).mean_score
    outcome = retrain_versus(
        agent,
        ScriptedPlayer(duel_turtle),
        first_template=first,
        versus_template=versus,
        retrain_actions=300,
        protocol=protocol,
        train_seed=8,
    )
    expected_post = evaluate(first, twin_of(agent), protocol).mean_score
    assert outcome.pre_score == expected_pre
    assert outcome.post_score == expected_post


def test_relative_drop_arithmetic() -> None:
    from arcadia.harness import ForgettingResult

    assert ForgettingResult(80.0, 40.0).relative_drop == 0.5
    assert ForgettingResult(50.0, 60.0).relative_drop == pytest.approx(-0.2)
    assert ForgettingResult(0.0, 10.0).relative_drop == 0.0
