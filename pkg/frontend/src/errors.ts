/**
 * Error species thrown by the bindings.
 *
 * Errors raised on the native side cross the bridge as
 * `{type, message}` pairs and are re-thrown here as the matching
 * subclass, with the original message intact. Transport problems
 * (dead process, malformed line) are `BridgeError`s instead, so a
 * caller can always tell "the environment rejected this" apart from
 * "the bridge is broken".
 */

/** The bridge transport itself failed: process died, bad handshake, malformed line. */
export class BridgeError extends Error {
  constructor(message: string) {
    super(message);
    this.name = 'BridgeError';
  }
}

/** An error raised on the native side, re-thrown with the original message. */
export class RemoteError extends Error {
  /** Exception class name as reported by the native side. */
  readonly remoteType: string;

  constructor(remoteType: string, message: string) {
    super(message);
    this.name = remoteType;
    this.remoteType = remoteType;
  }
}

/** An operation was called in a state that does not permit it. */
export class UsageError extends RemoteError {}

/** A core or environment was configured with an unknown key or bad value. */
export class ConfigurationError extends RemoteError {}

/** Lookup of a core name that is not registered on the native side. */
export class UnknownCoreError extends RemoteError {}

/** A request this bridge sent that the server could not interpret. */
export class ProtocolError extends RemoteError {}

const SPECIES: Record<string, new (remoteType: string, message: string) => RemoteError> = {
  UsageError,
  ConfigurationError,
  UnknownCoreError,
  ProtocolError,
  // ShapingError is a ConfigurationError subclass on the native side; the
  // environment loop cannot raise the other species, but map it anyway so
  // a future server change degrades gracefully.
  ShapingError: ConfigurationError,
};

/** Rebuild the native error as the closest local class. */
export function remoteError(remoteType: string, message: string): RemoteError {
  const cls = SPECIES[remoteType] ?? RemoteError;
  return new cls(remoteType, message);
}
