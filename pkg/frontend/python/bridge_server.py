"""Line-delimited JSON server exposing the environment loop over stdio.

This is the native half of the script bindings: a foreign driver spawns
``python3 bridge_server.py``, writes one JSON request per line on stdin,
and reads one JSON response per line on stdout.  Requests carry an ``id``
(echoed back), an ``op``, and op-specific fields.  Responses are either
``{"id": .., "ok": {...}}`` or ``{"id": .., "err": {"type": .., "message": ..}}``
where ``type`` is the arcadia exception class name, so the driver can
re-raise the same error species with the original message.

Operations: ``new``, ``reset``, ``step``, ``observe_vars``, ``action_set``,
``close``, plus ``rollout`` (below).  Actions are the integer button masks
reported by ``action_set``; two-player environments take one mask per
player.  Observations cross the boundary by copy, as base64 of the
height x width x 4 RGBA byte array.

The ``rollout`` op replays a whole mask sequence natively, inside this
process, and returns a digest of everything an episode loop would have
observed.  A driver that steps the same sequence through the per-step ops
and hashes what it received can therefore prove, with one string
comparison, that the bytes which crossed the boundary are exactly the
bytes the environment produced.  Digest record layout (sha256 over the
concatenation, one record per event):

    reset:  b"R" + rgba bytes
    step:   b"S" + rgba bytes + rewards as little-endian float64 each
                 + terminal byte (0x01/0x00)
                 + state vars as JSON, sorted keys, separators (",", ":")

The server exits on stdin EOF.  One environment per handle; a closed or
unknown handle is a usage error.  No internal locking: drive it from one
thread.
"""

from __future__ import annotations

import base64
import hashlib
import json
import struct
import sys
from typing import Mapping, Optional, Sequence, Union

from arcadia.env import Environment
from arcadia.errors import ArcadiaError, UsageError


class ProtocolError(Exception):
    """A request line this server cannot interpret."""


_environments: dict[int, Environment] = {}
_next_handle = 0


def _settings(core: object, config: object) -> dict[str, str]:
    if not isinstance(core, str):
        raise ProtocolError("'core' must be a string")
    if config is None:
        config = {}
    if not isinstance(config, dict):
        raise ProtocolError("'config' must be an object of string values")
    merged = {"core": core}
    for key, value in config.items():
        if not isinstance(key, str) or not isinstance(value, str):
            raise ProtocolError("'config' must be an object of string values")
        if key == "core":
            raise ProtocolError("'config' may not override 'core'")
        merged[key] = value
    return merged


def _lookup(handle: object) -> Environment:
    if not isinstance(handle, int) or isinstance(handle, bool):
        raise ProtocolError("'handle' must be an integer")
    env = _environments.get(handle)
    if env is None:
        raise UsageError(f"environment handle {handle} is closed or was never opened")
    return env


def _masks(env: Environment, action: object) -> Union[int, tuple[int, ...]]:
    # Shape errors (mask count vs player count) are left to env.step so the
    # boundary reports the same message as native code.
    if isinstance(action, int) and not isinstance(action, bool):
        return action
    if isinstance(action, list) and all(
        isinstance(m, int) and not isinstance(m, bool) for m in action
    ):
        return tuple(action)
    raise ProtocolError("'action' must be an integer mask or a list of masks")


def _encode_obs(frame) -> dict[str, object]:
    rgba = frame.rgba()
    return {
        "width": frame.width,
        "height": frame.height,
        "data": base64.b64encode(rgba.tobytes()).decode("ascii"),
    }


def _canonical_vars(vars_: Mapping[str, int]) -> bytes:
    return json.dumps(vars_, sort_keys=True, separators=(",", ":")).encode("ascii")


def _op_new(req: Mapping[str, object]) -> dict[str, object]:
    global _next_handle
    env = Environment.from_settings(_settings(req.get("core"), req.get("config")))
    info = env.core.info
    handle = _next_handle
    _next_handle += 1
    _environments[handle] = env
    return {
        "handle": handle,
        "core": env.core_name,
        "width": info.screen_width,
        "height": info.screen_height,
        "frame_rate": info.frame_rate,
        "num_players": env.num_players,
    }


def _op_reset(req: Mapping[str, object]) -> dict[str, object]:
    env = _lookup(req.get("handle"))
    seed = req.get("seed")
    if seed is not None and (not isinstance(seed, int) or isinstance(seed, bool)):
        raise ProtocolError("'seed' must be an integer")
    result = env.reset(seed)
    return {
        "obs": _encode_obs(result.frame),
        "vars": result.vars,
        "frames_elapsed": result.frames_elapsed,
    }


def _op_step(req: Mapping[str, object]) -> dict[str, object]:
    env = _lookup(req.get("handle"))
    result = env.step(_masks(env, req.get("action")))
    return {
        "obs": _encode_obs(result.frame),
        "reward": result.reward,
        "rewards": list(result.rewards),
        "terminal": result.terminal,
        "vars": result.vars,
        "frames_elapsed": result.frames_elapsed,
    }


def _op_observe_vars(req: Mapping[str, object]) -> dict[str, object]:
    env = _lookup(req.get("handle"))
    return {"vars": env.observe_vars()}


def _op_action_set(req: Mapping[str, object]) -> dict[str, object]:
    env = _lookup(req.get("handle"))
    minimal = req.get("minimal", True)
    if not isinstance(minimal, bool):
        raise ProtocolError("'minimal' must be a boolean")
    return {"actions": list(env.action_set(minimal=minimal))}


def _op_close(req: Mapping[str, object]) -> dict[str, object]:
    handle = req.get("handle")
    _lookup(handle)
    del _environments[handle]  # type: ignore[arg-type]
    return {"closed": True}


def _op_rollout(req: Mapping[str, object]) -> dict[str, object]:
    env = Environment.from_settings(_settings(req.get("core"), req.get("config")))
    seed = req.get("seed")
    if not isinstance(seed, int) or isinstance(seed, bool):
        raise ProtocolError("'seed' must be an integer")
    actions = req.get("actions")
    if not isinstance(actions, list):
        raise ProtocolError("'actions' must be a list of masks")

    digest = hashlib.sha256()
    result = env.reset(seed)
    digest.update(b"R")
    digest.update(result.frame.rgba().tobytes())
    cumulative = 0.0
    episodes = 1
    for action in actions:
        if env.terminal:
            result = env.reset()
            episodes += 1
            digest.update(b"R")
            digest.update(result.frame.rgba().tobytes())
        result = env.step(_masks(env, action))
        digest.update(b"S")
        digest.update(result.frame.rgba().tobytes())
        digest.update(struct.pack(f"<{len(result.rewards)}d", *result.rewards))
        digest.update(b"\x01" if result.terminal else b"\x00")
        digest.update(_canonical_vars(result.vars))
        cumulative += result.reward
    return {
        "digest": digest.hexdigest(),
        "cumulative_reward": cumulative,
        "episodes": episodes,
        "steps": len(actions),
    }


_OPS = {
    "new": _op_new,
    "reset": _op_reset,
    "step": _op_step,
    "observe_vars": _op_observe_vars,
    "action_set": _op_action_set,
    "close": _op_close,
    "rollout": _op_rollout,
}


def _handle_line(line: str) -> dict[str, object]:
    request_id: object = None
    try:
        try:
            request = json.loads(line)
        except ValueError as exc:
            raise ProtocolError(f"request is not valid JSON: {exc}") from None
        if not isinstance(request, dict):
            raise ProtocolError("request must be a JSON object")
        request_id = request.get("id")
        op = request.get("op")
        handler = _OPS.get(op) if isinstance(op, str) else None
        if handler is None:
            raise ProtocolError(f"unknown op {op!r} (supported: {', '.join(sorted(_OPS))})")
        return {"id": request_id, "ok": handler(request)}
    except (ArcadiaError, ProtocolError) as exc:
        return {
            "id": request_id,
            "err": {"type": type(exc).__name__, "message": str(exc)},
        }


def main() -> int:
    from importlib.metadata import version

    hello = {"hello": {"package": "arcadia", "version": version("arcadia")}}
    sys.stdout.write(json.dumps(hello) + "\n")
    sys.stdout.flush()
    for line in sys.stdin:
        if not line.strip():
            continue
        response = _handle_line(line)
        sys.stdout.write(json.dumps(response) + "\n")
        sys.stdout.flush()
    return 0


if __name__ == "__main__":
    sys.exit(main())
