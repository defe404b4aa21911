/**
 * Typed wrapper for one bound environment.
 *
 * Mirrors the native environment loop: `reset`, `step`, `observeVars`,
 * `actionSet`, `close`. Actions are the integer button masks reported by
 * `actionSet`; a two-player environment takes one mask per player.
 * Observations arrive by copy as height x width x 4 RGBA bytes.
 *
 * Configuration uses the native flat string map: `frame_skip`,
 * `max_episode_frames`, `reward_clip`, and `core.*` options such as
 * `core.difficulty` or `core.players`.
 */

import type { Bridge } from './bridge.js';

/** One screen, row-major, 4 bytes per pixel in R, G, B, A order. */
export interface Observation {
  width: number;
  height: number;
  data: Uint8Array;
}

/** Integer-valued state variables exposed by the core (score, positions, ...). */
export type StateVars = Record<string, number>;

export interface ResetOutcome {
  obs: Observation;
  vars: StateVars;
}

export interface StepOutcome {
  obs: Observation;
  /** Player 1's reward; `rewards` has one entry per player and sums to zero in 2P. */
  reward: number;
  rewards: number[];
  terminal: boolean;
  vars: StateVars;
  /** Emulated frames since reset (steps x frame_skip, capped by the episode limit). */
  framesElapsed: number;
}

/** What a whole native-side replay of a mask sequence observed, reduced to a digest. */
export interface RolloutSummary {
  /** sha256 over every observation, reward, terminal flag, and state-var map. */
  digest: string;
  cumulativeReward: number;
  episodes: number;
  steps: number;
}

interface WireObservation {
  width: number;
  height: number;
  data: string;
}

interface EnvMeta {
  handle: number;
  core: string;
  width: number;
  height: number;
  frame_rate: number;
  num_players: number;
}

function decodeObs(wire: WireObservation): Observation {
  const buf = Buffer.from(wire.data, 'base64');
  return {
    width: wire.width,
    height: wire.height,
    data: new Uint8Array(buf.buffer, buf.byteOffset, buf.byteLength),
  };
}

export class BoundEnvironment {
  private readonly bridge: Bridge;
  private readonly handle: number;

  readonly coreName: string;
  readonly width: number;
  readonly height: number;
  readonly frameRate: number;
  readonly numPlayers: number;

  private constructor(bridge: Bridge, meta: EnvMeta) {
    this.bridge = bridge;
    this.handle = meta.handle;
    this.coreName = meta.core;
    this.width = meta.width;
    this.height = meta.height;
    this.frameRate = meta.frame_rate;
    this.numPlayers = meta.num_players;
  }

  /** Open an environment on the given core. Throws `UnknownCoreError` for bad names. */
  static async create(
    bridge: Bridge,
    coreName: string,
    config: Record<string, string> = {}
  ): Promise<BoundEnvironment> {
    const meta = await bridge.request('new', { core: coreName, config });
    return new BoundEnvironment(bridge, meta as EnvMeta);
  }

  /**
   * Start an episode. The first reset needs a seed; later resets may omit it
   * and walk the native reseed sequence (base seed + episode index).
   */
  async reset(seed?: number): Promise<ResetOutcome> {
    const fields: Record<string, unknown> = { handle: this.handle };
    if (seed !== undefined) {
      fields.seed = seed;
    }
    const payload = (await this.bridge.request('reset', fields)) as {
      obs: WireObservation;
      vars: StateVars;
    };
    return { obs: decodeObs(payload.obs), vars: payload.vars };
  }

  /** Advance one environment step (one action repeated frame_skip frames). */
  async step(action: number | number[]): Promise<StepOutcome> {
    const payload = (await this.bridge.request('step', { handle: this.handle, action })) as {
      obs: WireObservation;
      reward: number;
      rewards: number[];
      terminal: boolean;
      vars: StateVars;
      frames_elapsed: number;
    };
    return {
      obs: decodeObs(payload.obs),
      reward: payload.reward,
      rewards: payload.rewards,
      terminal: payload.terminal,
      vars: payload.vars,
      framesElapsed: payload.frames_elapsed,
    };
  }

  /** Current state variables, without advancing the environment. */
  async observeVars(): Promise<StateVars> {
    const payload = (await this.bridge.request('observe_vars', { handle: this.handle })) as {
      vars: StateVars;
    };
    return payload.vars;
  }

  /** Button masks: the minimal behavior-distinct set by default, or all 2^buttons. */
  async actionSet(minimal = true): Promise<number[]> {
    const payload = (await this.bridge.request('action_set', { handle: this.handle, minimal })) as {
      actions: number[];
    };
    return payload.actions;
  }

  /** Release the native environment. Further operations raise `UsageError`. */
  async close(): Promise<void> {
    await this.bridge.request('close', { handle: this.handle });
  }
}

/**
 * Replay a mask sequence natively, entirely inside the server process, and
 * return the digest of everything the episode loop observed. Stepping the
 * same sequence through a `BoundEnvironment` and hashing what arrived (see
 * `rollout.ts`) must produce the same digest; that equality is the
 * boundary-transparency check.
 */
export async function nativeRollout(
  bridge: Bridge,
  coreName: string,
  seed: number,
  actions: Array<number | number[]>,
  config: Record<string, string> = {}
): Promise<RolloutSummary> {
  const payload = (await bridge.request('rollout', { core: coreName, config, seed, actions })) as {
    digest: string;
    cumulative_reward: number;
    episodes: number;
    steps: number;
  };
  return {
    digest: payload.digest,
    cumulativeReward: payload.cumulative_reward,
    episodes: payload.episodes,
    steps: payload.steps,
  };
}
