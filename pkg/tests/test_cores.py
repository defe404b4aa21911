from __future__ import annotations

import random

import numpy as np
import pytest

import arcadia.cores  # noqa: F401
from arcadia.core import create_core
from arcadia.cores.duel import ARENA_CELLS, HIT_DAMAGE, MAX_HEALTH, MIN_GAP
from arcadia.cores.pad import BTN_A, BTN_B, BTN_LEFT, BTN_RIGHT, BTN_Y
from arcadia.cores.racer import LAP_SCORE, TRACK_LENGTH, SPEED_CAP
from arcadia.cores.scroller import COIN_VALUE, TIME_LIMIT as SCROLLER_CLOCK
from arcadia.agents import FeatureExtractor
from arcadia.errors import ConfigurationError
from arcadia.experts import expert_policy, play_expert
from arcadia.harness import mirror_mask

# -- scroller ------------------------------------------------------------------


@pytest.mark.parametrize("seed", [0, 7, 10_000])
def test_scroller_walkthrough_score(seed: int) -> None:
    # full coin sweep plus flag bonus; the layout is seed-independent enough
    # that the walkthrough always banks the same total
    assert play_expert("scroller", seed) == 10_200


def test_scroller_idling_times_out_scoreless() -> None:
    core = create_core("scroller")
    core.reset(seed=0)
    frames = 0
    while not core.terminal:
        _, vars_, _ = core.step((0,))
        frames += 1
    assert frames == SCROLLER_CLOCK
    assert vars_["score"] == 0


def test_scroller_walking_into_enemy_ends_episode() -> None:
    core = create_core("scroller")
    core.reset(seed=0)
    frames = 0
    while not core.terminal:
        _, vars_, _ = core.step((BTN_RIGHT,))
        frames += 1
    # died on enemy contact, well before the clock and short of the flag
    assert frames < SCROLLER_CLOCK
    assert vars_["x_position"] < vars_["goal_x"]


def test_scroller_coin_pickup_pays_once() -> None:
    core = create_core("scroller")
    core.reset(seed=0)
    policy = expert_policy("scroller")
    before = core.state_vars()
    while not core.terminal:
        _, vars_, _ = core.step((policy(core.state_vars()),))
        if vars_["coins_remaining"] < before["coins_remaining"]:
            picked = before["coins_remaining"] - vars_["coins_remaining"]
            assert vars_["score"] - before["score"] == picked * COIN_VALUE
            return
        before = vars_
    pytest.fail("expert never collected a coin")


def test_scroller_sky_noise_never_reaches_features() -> None:
    import json

    from arcadia.core import CoreState

    core = create_core("scroller")
    core.reset(seed=4)
    for _ in range(10):
        core.step((0,))
    state = core.serialize()
    payload = json.loads(state.data.decode("ascii"))
    payload["noise_seed"] = (payload["noise_seed"] ^ 0xFFFF_FFFF) & ((1 << 64) - 1)
    twin = create_core("scroller")
    twin.deserialize(
        CoreState(state.core_name, state.version, json.dumps(payload).encode())
    )

    a, b = core.render(), twin.render()
    assert not a.same_pixels(b)  # the sky really is different
    extractor = FeatureExtractor()
    assert extractor.key_of(a) == extractor.key_of(b)


# -- racer ---------------------------------------------------------------------


@pytest.mark.parametrize("seed", [0, 3, 10_005])
def test_racer_walkthrough_score(seed: int) -> None:
    assert play_expert("racer", seed) == LAP_SCORE * 4


def test_racer_first_reward_cannot_beat_the_speed_cap() -> None:
    # 1800 units at 6 units/frame is a hard floor of 300 frames
    core = create_core("racer")
    core.reset(seed=0)
    policy = expert_policy("racer")
    frame = 0
    while not core.terminal:
        _, vars_, _ = core.step((policy(core.state_vars()),))
        frame += 1
        if vars_["score"] > 0:
            assert frame >= TRACK_LENGTH // SPEED_CAP
            assert vars_["score"] == LAP_SCORE
            return
    pytest.fail("expert never finished a lap")


def test_racer_off_track_halves_speed_and_bleeds_position() -> None:
    core = create_core("racer")
    core.reset(seed=0)
    # build speed down the straight opening segment
    for _ in range(8):
        core.step((BTN_B,))
    assert core.state_vars()["speed"] == SPEED_CAP
    # steer hard left until off the pavement
    vars_ = core.state_vars()
    while abs(vars_["lateral"]) <= 2:
        _, vars_, _ = core.step((BTN_B | BTN_LEFT,))
    speed = vars_["speed"]
    position = vars_["position"]
    _, after, _ = core.step((BTN_B,))
    assert after["speed"] == speed // 2
    assert after["position"] == max(position - 2, 0)


def test_racer_lap_scores_accumulate() -> None:
    core = create_core("racer")
    core.reset(seed=1)
    policy = expert_policy("racer")
    laps_seen = 0
    while not core.terminal:
        _, vars_, _ = core.step((policy(core.state_vars()),))
        if vars_["lap"] > laps_seen:
            laps_seen = vars_["lap"]
            assert vars_["score"] == laps_seen * LAP_SCORE
    assert laps_seen == 4


# -- duel ----------------------------------------------------------------------


def _duel_2p(p1_x: int, p2_x: int, seed: int = 0):
    core = create_core("duel")
    core.reset(seed, config={"players": 2, "p1_x": p1_x, "p2_x": p2_x})
    return core


def test_duel_simultaneous_low_hits_double_ko() -> None:
    core = _duel_2p(10, 12)
    vars_ = core.state_vars()
    while not core.terminal:
        _, vars_, _ = core.step((BTN_Y, BTN_Y))
    assert vars_["health_p1"] == 0
    assert vars_["health_p2"] == 0
    assert vars_["score"] == MAX_HEALTH
    assert vars_["score_p2"] == MAX_HEALTH


def test_duel_high_attack_is_blockable_low_is_not() -> None:
    core = _duel_2p(10, 13)  # gap 3: high range, outside low range
    _, vars_, _ = core.step((BTN_B, BTN_A))  # high into a block
    assert vars_["health_p2"] == MAX_HEALTH
    core2 = _duel_2p(10, 12)  # gap 2
    _, vars2, _ = core2.step((BTN_Y, BTN_A))  # low pierces the block
    assert vars2["health_p2"] == MAX_HEALTH - HIT_DAMAGE


def test_duel_min_gap_is_enforced() -> None:
    core = _duel_2p(10, 12)
    for _ in range(30):
        _, vars_, _ = core.step((BTN_RIGHT, BTN_LEFT))
        assert vars_["x_p2"] - vars_["x_p1"] >= MIN_GAP


def test_duel_overlapping_spawn_rejected() -> None:
    with pytest.raises(ConfigurationError):
        _duel_2p(10, 11)


def test_duel_damage_is_conserved() -> None:
    rng = random.Random(2)
    core = _duel_2p(8, 20, seed=5)
    while not core.terminal:
        masks = (rng.randrange(1 << 12), rng.randrange(1 << 12))
        _, vars_, _ = core.step(masks)
        assert vars_["score"] == MAX_HEALTH - vars_["health_p2"]
        assert vars_["score_p2"] == MAX_HEALTH - vars_["health_p1"]


def test_duel_idle_players_time_out_scoreless() -> None:
    core = _duel_2p(8, 24)
    vars_ = core.state_vars()
    while not core.terminal:
        _, vars_, _ = core.step((0, 0))
    assert vars_["score"] == 0 and vars_["score_p2"] == 0
    assert vars_["health_p1"] == MAX_HEALTH and vars_["health_p2"] == MAX_HEALTH


def test_duel_mirror_covariance() -> None:
    edge = ARENA_CELLS - 1
    rng = random.Random(11)
    world = _duel_2p(9, 21, seed=3)
    mirror = _duel_2p(edge - 21, edge - 9, seed=3)
    for _ in range(200):
        if world.terminal:
            break
        m1 = rng.randrange(1 << 12)
        m2 = rng.randrange(1 << 12)
        fw, vw, tw = world.step((m1, m2))
        fm, vm, tm = mirror.step((mirror_mask(m2), mirror_mask(m1)))
        assert tm == tw
        assert vm["x_p1"] == edge - vw["x_p2"]
        assert vm["x_p2"] == edge - vw["x_p1"]
        assert vm["health_p1"] == vw["health_p2"]
        assert vm["score"] == vw["score_p2"]
        assert np.array_equal(fm.rgba(), fw.rgba()[:, ::-1, :])


def test_duel_difficulty_orders_opponent_strength() -> None:
    # a fixed random seat-1 policy takes more damage from the very_hard AI
    def margin(difficulty: str) -> int:
        total = 0
        for seed in range(12):
            core = create_core("duel")
            core.reset(seed, config={"difficulty": difficulty})
            rng = random.Random(900 + seed)
            while not core.terminal:
                _, vars_, _ = core.step((rng.randrange(1 << 12),))
            total += vars_["health_p1"] - vars_["health_p2"]
        return total

    assert margin("very_hard") < margin("medium")
