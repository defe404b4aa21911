#!/usr/bin/env python3
"""Regenerate the per-core normalization anchors.

The random anchor is the mean episode score of ``RandomAgent(seed=0)`` over
the default evaluation protocol's 30 seeded episodes.  The skilled anchor is
the mean score of the committed scripted expert for the core over the same
episodes.  Run this after any core change that moves scoring and paste the
printed mapping into ``harness.NORMALIZATION_ANCHORS`` (keep the exact
integer-fraction forms so the anchors stay reproducible to the bit).

Usage: python3 tools/make_anchors.py
"""

from __future__ import annotations

import fractions
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from arcadia.agents import RandomAgent
from arcadia.env import Environment
from arcadia.experts import play_expert
from arcadia.harness import EvalProtocol, evaluate


def episode_scores_random(core_name: str, protocol: EvalProtocol) -> list:
    env = Environment(core_name)
    agent = RandomAgent(len(env.action_set(minimal=True)), seed=0)
    return evaluate(env, agent, protocol).episode_scores


def episode_scores_expert(core_name: str, protocol: EvalProtocol) -> list:
    # frame granularity: the skilled anchor is what the walkthrough scores,
    # not what a frame-skipping agent could match
    return [
        play_expert(core_name, protocol.eval_seed_base + i)
        for i in range(protocol.eval_episodes)
    ]


def main() -> int:
    protocol = EvalProtocol()
    print("NORMALIZATION_ANCHORS = {")
    for core_name in ("scroller", "racer", "duel"):
        random_scores = episode_scores_random(core_name, protocol)
        expert_scores = episode_scores_expert(core_name, protocol)
        n = len(random_scores)
        random_sum = int(round(sum(random_scores)))
        expert_mean = sum(expert_scores) / n
        random_frac = fractions.Fraction(random_sum, n)
        if random_frac.denominator == 1:
            random_repr = f"{random_frac.numerator:_}.0" if random_frac else "0.0"
        else:
            random_repr = f"{random_sum:_} / {n}"
        print(f'    "{core_name}": ({random_repr}, {expert_mean!r}),')
    print("}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
