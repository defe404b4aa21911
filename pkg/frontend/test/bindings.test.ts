/**
 * Binding semantics: the five operations are exact pass-throughs to the
 * native environment loop, and native errors re-surface as the matching
 * local class with the original message.
 */

import { readFileSync } from 'node:fs';
import { fileURLToPath } from 'node:url';
import { afterAll, beforeAll, describe, expect, it } from 'vitest';

import {
  BoundEnvironment,
  Bridge,
  canonicalVars,
  ConfigurationError,
  ProtocolError,
  SplitMix64,
  UnknownCoreError,
  UsageError,
} from '../src/index.js';

let bridge: Bridge;

beforeAll(async () => {
  bridge = await Bridge.open();
});

afterAll(async () => {
  await bridge.close();
});

describe('handshake', () => {
  it('reports the native package version, which this package pins', () => {
    const pkgPath = fileURLToPath(new URL('../package.json', import.meta.url));
    const pkg = JSON.parse(readFileSync(pkgPath, 'utf8')) as { version: string };
    expect(bridge.serverVersion).toBe(pkg.version);
  });
});

describe('environment metadata', () => {
  it('exposes screen geometry, frame rate, and seat count', async () => {
    const env = await BoundEnvironment.create(bridge, 'scroller');
    expect(env.coreName).toBe('scroller');
    expect(env.width).toBe(256);
    expect(env.height).toBe(224);
    expect(env.frameRate).toBe(60);
    expect(env.numPlayers).toBe(1);
    await env.close();
  });

  it('honours core options, including the seat count', async () => {
    const env = await BoundEnvironment.create(bridge, 'duel', { 'core.players': '2' });
    expect(env.numPlayers).toBe(2);
    await env.close();
  });
});

describe('action sets', () => {
  it('returns the minimal behavior-distinct masks, sorted', async () => {
    const env = await BoundEnvironment.create(bridge, 'scroller');
    const actions = await env.actionSet();
    expect(actions).toEqual([0, 1, 64, 65, 128, 129]);
    await env.close();
  });

  it('returns all 2^12 masks when asked for the full set', async () => {
    const env = await BoundEnvironment.create(bridge, 'scroller');
    const actions = await env.actionSet(false);
    expect(actions.length).toBe(4096);
    expect(actions[0]).toBe(0);
    expect(actions[4095]).toBe(4095);
    await env.close();
  });
});

describe('reset and step pass-through', () => {
  it('starts an episode with a fresh score and a full observation', async () => {
    const env = await BoundEnvironment.create(bridge, 'scroller');
    const start = await env.reset(7);
    expect(start.vars.score).toBe(0);
    expect(start.vars.time).toBe(0);
    expect(start.obs.data.length).toBe(256 * 224 * 4);
    await env.close();
  });

  it('advances frame_skip frames per step and reports the new state vars', async () => {
    const env = await BoundEnvironment.create(bridge, 'scroller');
    const start = await env.reset(7);
    const out = await env.step(128); // hold RIGHT
    expect(out.framesElapsed).toBe(4);
    expect(out.vars.time).toBe(4);
    expect(out.vars.x_position).toBeGreaterThan(start.vars.x_position!);
    expect(out.reward).toBe(0);
    expect(out.rewards).toEqual([0]);
    expect(await env.observeVars()).toEqual(out.vars);
    await env.close();
  });

  it('replays an episode bit-identically under the same seed', async () => {
    const env = await BoundEnvironment.create(bridge, 'scroller');
    const a = await env.reset(21);
    const stepA = await env.step(129);
    const b = await env.reset(21);
    const stepB = await env.step(129);
    expect(Buffer.compare(Buffer.from(a.obs.data), Buffer.from(b.obs.data))).toBe(0);
    expect(Buffer.compare(Buffer.from(stepA.obs.data), Buffer.from(stepB.obs.data))).toBe(0);
    expect(stepA.vars).toEqual(stepB.vars);
    await env.close();
  });

  it('walks the same unseeded reseed sequence as a twin environment', async () => {
    const twinEpisode = async () => {
      const env = await BoundEnvironment.create(bridge, 'scroller');
      await env.reset(100);
      const second = await env.reset(); // episode seed 101 by the native policy
      await env.close();
      return second;
    };
    const first = await twinEpisode();
    const again = await twinEpisode();
    expect(first.vars).toEqual(again.vars);
    expect(Buffer.compare(Buffer.from(first.obs.data), Buffer.from(again.obs.data))).toBe(0);
  });

  it('pays both seats zero-sum rewards in a two-player duel', async () => {
    const env = await BoundEnvironment.create(bridge, 'duel', { 'core.players': '2' });
    await env.reset(3);
    for (let i = 0; i < 20; i++) {
      const out = await env.step([2, 0]); // p1 jabs LOW, p2 idles
      expect(out.rewards.length).toBe(2);
      expect(out.rewards[0]! + out.rewards[1]!).toBe(0);
      expect(out.reward).toBe(out.rewards[0]);
      if (out.rewards[0] !== 0) {
        return; // a hit landed and both signs were checked by the sum
      }
      if (out.terminal) {
        break;
      }
    }
    await env.close();
  });

  it('refuses a single mask when the core seats two players', async () => {
    const env = await BoundEnvironment.create(bridge, 'duel', { 'core.players': '2' });
    await env.reset(3);
    await expect(env.step(0)).rejects.toThrow(UsageError);
    await expect(env.step(0)).rejects.toThrow(/pass a mask per player/);
    await env.close();
  });

  it('ends the episode at the configured frame cap and refuses further steps', async () => {
    const env = await BoundEnvironment.create(bridge, 'scroller', { max_episode_frames: '8' });
    await env.reset(0);
    await env.step(0);
    const out = await env.step(0);
    expect(out.terminal).toBe(true);
    expect(out.framesElapsed).toBe(8);
    await expect(env.step(0)).rejects.toThrow(/episode is over/);
    await env.close();
  });
});

describe('error mapping', () => {
  it('maps an unknown core name with the original message', async () => {
    const attempt = BoundEnvironment.create(bridge, 'nosuch');
    await expect(attempt).rejects.toThrow(UnknownCoreError);
    await expect(BoundEnvironment.create(bridge, 'nosuch')).rejects.toThrow(
      /no core named 'nosuch'/
    );
  });

  it('maps configuration errors', async () => {
    const attempt = BoundEnvironment.create(bridge, 'scroller', { frame_skip: '0' });
    await expect(attempt).rejects.toThrow(ConfigurationError);
    await expect(
      BoundEnvironment.create(bridge, 'scroller', { bogus: '1' })
    ).rejects.toThrow(/unknown environment setting 'bogus'/);
  });

  it('maps stepping before reset to a usage error', async () => {
    const env = await BoundEnvironment.create(bridge, 'racer');
    await expect(env.step(0)).rejects.toThrow(UsageError);
    await env.close();
  });

  it('raises a usage error for any operation after close', async () => {
    const env = await BoundEnvironment.create(bridge, 'racer');
    await env.reset(0);
    await env.close();
    await expect(env.step(0)).rejects.toThrow(UsageError);
    await expect(env.observeVars()).rejects.toThrow(/closed/);
    await expect(env.close()).rejects.toThrow(UsageError);
  });

  it('keeps independent environments alive across a close', async () => {
    const a = await BoundEnvironment.create(bridge, 'racer');
    const b = await BoundEnvironment.create(bridge, 'racer');
    await a.reset(0);
    await b.reset(0);
    await a.close();
    const out = await b.step(0);
    expect(out.framesElapsed).toBe(4);
    await b.close();
  });

  it('rejects malformed requests as protocol errors', async () => {
    await expect(bridge.request('step', { handle: true, action: 0 })).rejects.toThrow(
      ProtocolError
    );
    await expect(bridge.request('nosuch')).rejects.toThrow(/unknown op 'nosuch'/);
  });
});

describe('digest building blocks', () => {
  it('canonical vars match the native encoding: sorted keys, no spaces', () => {
    const buf = canonicalVars({ b: 2, a: 1, z_neg: -30 });
    expect(buf.toString('ascii')).toBe('{"a":1,"b":2,"z_neg":-30}');
  });

  it('SplitMix64 reproduces the native reference vector for seed 0', () => {
    const rng = new SplitMix64(0);
    expect(rng.next()).toBe(0xe220a8397b1dcdafn);
    expect(rng.next()).toBe(0x6e789e6aa1b965f4n);
    expect(rng.next()).toBe(0x06c45d188009454fn);
  });
});
