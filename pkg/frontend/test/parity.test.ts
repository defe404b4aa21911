/**
 * Boundary transparency: a scripted rollout through the bindings must
 * byte-match a native rollout (observations, rewards, terminal flags,
 * and state vars) on every core.
 *
 * Both sides hash what they saw with the same record layout, so one
 * digest comparison covers every byte of a 1000-step episode stream,
 * including the unseeded resets taken when an episode ends mid-sequence.
 * Cumulative reward is compared as well, as a plain-number cross-check.
 */

import { afterAll, beforeAll, describe, expect, it } from 'vitest';

import {
  BoundEnvironment,
  Bridge,
  boundRollout,
  nativeRollout,
  SplitMix64,
} from '../src/index.js';

let bridge: Bridge;

beforeAll(async () => {
  bridge = await Bridge.open();
});

afterAll(async () => {
  await bridge.close();
});

/** Random masks drawn from the environment's own minimal action set. */
function randomActions(actionSet: number[], players: number, steps: number, seed: number) {
  const rng = new SplitMix64(seed);
  const actions: Array<number | number[]> = [];
  for (let i = 0; i < steps; i++) {
    if (players === 1) {
      actions.push(actionSet[rng.below(actionSet.length)]!);
    } else {
      actions.push([
        actionSet[rng.below(actionSet.length)]!,
        actionSet[rng.below(actionSet.length)]!,
      ]);
    }
  }
  return actions;
}

async function checkParity(
  core: string,
  config: Record<string, string>,
  seed: number,
  steps: number
) {
  const env = await BoundEnvironment.create(bridge, core, config);
  const actionSet = await env.actionSet();
  const actions = randomActions(actionSet, env.numPlayers, steps, seed * 7919);
  const bound = await boundRollout(env, seed, actions);
  await env.close();
  const native = await nativeRollout(bridge, core, seed, actions, config);

  expect(bound.digest).toBe(native.digest);
  expect(bound.cumulativeReward).toBe(native.cumulativeReward);
  expect(bound.episodes).toBe(native.episodes);
  expect(native.steps).toBe(steps);
  console.log(
    `PARITY ${core}${config['core.players'] === '2' ? ' (2P)' : ''}: ` +
      `${steps} steps, ${bound.episodes} episode(s), ` +
      `cumulative reward ${bound.cumulativeReward}, digest ${bound.digest.slice(0, 16)}`
  );
}

describe('1000-step rollouts byte-match native rollouts', () => {
  it('scroller', async () => {
    await checkParity('scroller', {}, 11, 1000);
  });

  it('racer', async () => {
    await checkParity('racer', {}, 12, 1000);
  });

  it('duel', async () => {
    await checkParity('duel', {}, 13, 1000);
  });

  it('duel, both seats driven', async () => {
    await checkParity('duel', { 'core.players': '2' }, 14, 400);
  });
});

describe('digest is sensitive', () => {
  it('differs across seeds for the same action sequence', async () => {
    const env = await BoundEnvironment.create(bridge, 'scroller');
    const actionSet = await env.actionSet();
    await env.close();
    const actions = randomActions(actionSet, 1, 50, 99);
    const a = await nativeRollout(bridge, 'scroller', 1, actions);
    const b = await nativeRollout(bridge, 'scroller', 2, actions);
    expect(a.digest).not.toBe(b.digest);
  });
});
