/**
 * Bound-side rollout driver and its digest.
 *
 * `boundRollout` steps a mask sequence through a `BoundEnvironment` and
 * hashes everything that crossed the bridge, record for record the same
 * way the server's native `rollout` op hashes what the environment
 * produced in-process:
 *
 *     reset:  "R" + rgba bytes
 *     step:   "S" + rgba bytes + rewards as little-endian float64 each
 *                 + terminal byte (0x01/0x00)
 *                 + state vars as JSON, sorted keys, no spaces
 *
 * Equal digests therefore prove the observations, rewards, terminal
 * flags, and state variables were transported byte-exactly.
 */

import { createHash } from 'node:crypto';

import type { BoundEnvironment, RolloutSummary, StateVars } from './env.js';

const RESET_TAG = Buffer.from('R');
const STEP_TAG = Buffer.from('S');

/** Canonical state-var encoding: sorted keys, compact separators, ASCII. */
export function canonicalVars(vars: StateVars): Buffer {
  const body = Object.keys(vars)
    .sort()
    .map((key) => `${JSON.stringify(key)}:${JSON.stringify(vars[key])}`)
    .join(',');
  return Buffer.from(`{${body}}`, 'ascii');
}

function packRewards(rewards: number[]): Buffer {
  const buf = Buffer.alloc(8 * rewards.length);
  rewards.forEach((r, i) => buf.writeDoubleLE(r, 8 * i));
  return buf;
}

/**
 * Drive `actions` through the bound environment, resetting (unseeded, so the
 * native reseed sequence applies) whenever an episode ends with actions left.
 */
export async function boundRollout(
  env: BoundEnvironment,
  seed: number,
  actions: Array<number | number[]>
): Promise<RolloutSummary> {
  const hash = createHash('sha256');
  const first = await env.reset(seed);
  hash.update(RESET_TAG);
  hash.update(first.obs.data);

  let cumulative = 0;
  let episodes = 1;
  let terminal = false;
  for (const action of actions) {
    if (terminal) {
      const next = await env.reset();
      episodes += 1;
      hash.update(RESET_TAG);
      hash.update(next.obs.data);
    }
    const out = await env.step(action);
    hash.update(STEP_TAG);
    hash.update(out.obs.data);
    hash.update(packRewards(out.rewards));
    hash.update(out.terminal ? Buffer.from([1]) : Buffer.from([0]));
    hash.update(canonicalVars(out.vars));
    cumulative += out.reward;
    terminal = out.terminal;
  }
  return {
    digest: hash.digest('hex'),
    cumulativeReward: cumulative,
    episodes,
    steps: actions.length,
  };
}

const MASK64 = (1n << 64n) - 1n;

/**
 * The native side's PRNG (SplitMix64), reimplemented so test drivers can
 * derive action sequences from small seeds. seed 0 yields
 * e220a8397b1dcdaf, 6e789e6aa1b965f4, 06c45d188009454f, ...
 */
export class SplitMix64 {
  private state: bigint;

  constructor(seed: number | bigint) {
    this.state = BigInt(seed) & MASK64;
  }

  next(): bigint {
    this.state = (this.state + 0x9e3779b97f4a7c15n) & MASK64;
    let z = this.state;
    z = ((z ^ (z >> 30n)) * 0xbf58476d1ce4e5b9n) & MASK64;
    z = ((z ^ (z >> 27n)) * 0x94d049bb133111ebn) & MASK64;
    return (z ^ (z >> 31n)) & MASK64;
  }

  /** Uniform-ish pick in [0, n); modulo bias is irrelevant for test driving. */
  below(n: number): number {
    return Number(this.next() % BigInt(n));
  }
}
