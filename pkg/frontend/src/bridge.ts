/**
 * Child-process transport for the arcadia bridge server.
 *
 * One `Bridge` owns one `python3 bridge_server.py` process and speaks
 * line-delimited JSON with it: each request gets an `id`, the matching
 * response echoes it back. Requests are settled strictly in order (the
 * server is single-threaded), but correlation is by id so a dropped or
 * reordered line fails loudly instead of mismatching.
 */

import { spawn, type ChildProcess } from 'node:child_process';
import { createInterface } from 'node:readline';
import { fileURLToPath } from 'node:url';

import { BridgeError, remoteError } from './errors.js';

/** Where to find the interpreter and the server script. */
export interface BridgeOptions {
  /** Python executable; must be able to `import arcadia`. Default `python3`. */
  pythonBin?: string;
  /** Path to bridge_server.py. Default: the copy shipped with this package. */
  serverPath?: string;
}

interface Pending {
  resolve: (payload: unknown) => void;
  reject: (error: Error) => void;
}

const DEFAULT_SERVER = fileURLToPath(new URL('../python/bridge_server.py', import.meta.url));

export class Bridge {
  private readonly child: ChildProcess;
  private readonly pending = new Map<number, Pending>();
  private nextId = 1;
  private stderrTail: string[] = [];
  private closed = false;
  private exitError: Error | null = null;

  /** Version of the native package, reported in the server's hello line. */
  readonly serverVersion: string;

  private constructor(child: ChildProcess, serverVersion: string) {
    this.child = child;
    this.serverVersion = serverVersion;
    const lines = createInterface({ input: child.stdout! });
    lines.on('line', (line) => this.onLine(line));
    child.stderr!.setEncoding('utf8');
    child.stderr!.on('data', (chunk: string) => {
      this.stderrTail = this.stderrTail.concat(chunk.split('\n')).slice(-20);
    });
    child.on('exit', (code, signal) => {
      if (!this.closed) {
        this.exitError = new BridgeError(
          `bridge server exited unexpectedly (code ${code}, signal ${signal})${this.stderrHint()}`
        );
      }
      this.failAllPending(this.exitError ?? new BridgeError('bridge is closed'));
    });
  }

  /** Spawn the server and wait for its hello line. */
  static async open(options: BridgeOptions = {}): Promise<Bridge> {
    const pythonBin = options.pythonBin ?? 'python3';
    const serverPath = options.serverPath ?? DEFAULT_SERVER;
    const child = spawn(pythonBin, [serverPath], { stdio: ['pipe', 'pipe', 'pipe'] });

    const hello = await new Promise<{ package: string; version: string }>((resolve, reject) => {
      const lines = createInterface({ input: child.stdout! });
      const stderr: string[] = [];
      child.stderr!.setEncoding('utf8');
      child.stderr!.on('data', (chunk: string) => stderr.push(chunk));
      const fail = (reason: string) => {
        lines.close();
        child.kill();
        reject(new BridgeError(`bridge handshake failed: ${reason}${stderr.length ? `\n${stderr.join('')}` : ''}`));
      };
      child.once('error', (err) => fail(err.message));
      child.once('exit', (code) => fail(`server exited with code ${code} before hello`));
      lines.once('line', (line) => {
        lines.close();
        child.removeAllListeners('exit');
        child.removeAllListeners('error');
        child.stderr!.removeAllListeners('data');
        try {
          const parsed = JSON.parse(line) as { hello?: { package: string; version: string } };
          if (!parsed.hello || parsed.hello.package !== 'arcadia') {
            fail(`unexpected hello line: ${line}`);
            return;
          }
          resolve(parsed.hello);
        } catch {
          fail(`hello line is not JSON: ${line}`);
        }
      });
    });

    return new Bridge(child, hello.version);
  }

  /** Send one operation and await its payload. Rejects with the mapped error species. */
  request(op: string, fields: Record<string, unknown> = {}): Promise<unknown> {
    if (this.closed || this.exitError) {
      return Promise.reject(this.exitError ?? new BridgeError('bridge is closed'));
    }
    const id = this.nextId++;
    const line = JSON.stringify({ id, op, ...fields });
    return new Promise((resolve, reject) => {
      this.pending.set(id, { resolve, reject });
      this.child.stdin!.write(line + '\n', (err) => {
        if (err && this.pending.delete(id)) {
          reject(new BridgeError(`bridge write failed: ${err.message}`));
        }
      });
    });
  }

  /** Close stdin and wait for the server to exit. Safe to call twice. */
  async close(): Promise<void> {
    if (this.closed) {
      return;
    }
    this.closed = true;
    this.failAllPending(new BridgeError('bridge closed while a request was in flight'));
    if (this.child.exitCode === null && this.child.signalCode === null) {
      await new Promise<void>((resolve) => {
        this.child.once('exit', () => resolve());
        this.child.stdin!.end();
      });
    }
  }

  private onLine(line: string): void {
    let parsed: { id?: unknown; ok?: unknown; err?: { type: string; message: string } };
    try {
      parsed = JSON.parse(line);
    } catch {
      this.failAllPending(new BridgeError(`bridge received a non-JSON line: ${line.slice(0, 200)}`));
      return;
    }
    const entry = typeof parsed.id === 'number' ? this.pending.get(parsed.id) : undefined;
    if (!entry) {
      this.failAllPending(new BridgeError(`bridge received a response for unknown id ${String(parsed.id)}`));
      return;
    }
    this.pending.delete(parsed.id as number);
    if (parsed.err) {
      entry.reject(remoteError(parsed.err.type, parsed.err.message));
    } else {
      entry.resolve(parsed.ok);
    }
  }

  private failAllPending(error: Error): void {
    const waiting = Array.from(this.pending.values());
    this.pending.clear();
    for (const entry of waiting) {
      entry.reject(error);
    }
  }

  private stderrHint(): string {
    const tail = this.stderrTail.filter((l) => l.trim().length > 0);
    return tail.length ? `\n${tail.join('\n')}` : '';
  }
}
