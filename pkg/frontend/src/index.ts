export { Bridge, type BridgeOptions } from './bridge.js';
export {
  BoundEnvironment,
  nativeRollout,
  type Observation,
  type ResetOutcome,
  type RolloutSummary,
  type StateVars,
  type StepOutcome,
} from './env.js';
export { boundRollout, canonicalVars, SplitMix64 } from './rollout.js';
export {
  BridgeError,
  ConfigurationError,
  ProtocolError,
  RemoteError,
  UnknownCoreError,
  UsageError,
} from './errors.js';
