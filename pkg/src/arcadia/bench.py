"""Core throughput measurement.

Measures simulation speed: random masks through ``GameCore.step`` with the
frame buffers left unmaterialized, the way a training loop that only reads
pooled features would drive them.  Runs once on a single instance and once
on N OS processes to show scaling headroom.

Numbers are wall-clock measurements, so benchmark reports are the one
artifact this package does not promise to reproduce byte-for-byte.
"""

from __future__ import annotations

import json
import multiprocessing
import time
from pathlib import Path
from typing import Dict, List, Optional, Union

from .core import SplitMix64, create_core
from .errors import ConfigurationError
from . import cores as _cores  # noqa: F401  (registers the built-in cores)

SCHEMA_VERSION = 1
BASELINE_FRACTION = 0.8
_CHECK_EVERY = 256


def bench_core(core_name: str, seconds: float, seed: int = 0) -> Dict[str, object]:
    """Step one core instance under random play for a wall-clock budget."""
    core = create_core(core_name)
    mask_bits = core.info.num_buttons
    players = core.info.num_players
    rng = SplitMix64(seed ^ 0xBE7C)
    episode = 0
    core.reset(seed=episode, config={})
    frames = 0
    start = time.perf_counter()
    elapsed = 0.0
    while elapsed < seconds:
        for _ in range(_CHECK_EVERY):
            mask = rng.randrange(1 << mask_bits)
            if players == 1:
                core.step((mask,))
            else:
                core.step((mask, rng.randrange(1 << mask_bits)))
            frames += 1
            if core.terminal:
                episode += 1
                core.reset(seed=episode, config={})
        elapsed = time.perf_counter() - start
    fps = frames / elapsed if elapsed > 0 else 0.0
    return {"frames": frames, "elapsed": elapsed, "fps": fps}


def _worker(core_name: str, seconds: float, seed: int, out: "multiprocessing.Queue") -> None:
    out.put(bench_core(core_name, seconds, seed=seed))


def bench_parallel(core_name: str, seconds: float, instances: int) -> Dict[str, object]:
    """Same measurement on several OS processes at once."""
    if instances < 1:
        raise ConfigurationError(f"instances must be >= 1, got {instances}")
    if instances == 1 or seconds == 0:
        single = [bench_core(core_name, seconds, seed=i) for i in range(instances)]
    else:
        queue: "multiprocessing.Queue" = multiprocessing.Queue()
        procs = [
            multiprocessing.Process(target=_worker, args=(core_name, seconds, i, queue))
            for i in range(instances)
        ]
        for p in procs:
            p.start()
        single = [queue.get() for _ in procs]
        for p in procs:
            p.join()
    return {
        "instances": instances,
        "per_instance_fps": [run["fps"] for run in single],
        "total_frames": sum(run["frames"] for run in single),
        "aggregate_fps": sum(run["fps"] for run in single),
    }


def bench_report(
    core_names: List[str], seconds: float, instances: int
) -> Dict[str, object]:
    if seconds < 0:
        raise ConfigurationError(f"seconds must be >= 0, got {seconds}")
    report: Dict[str, object] = {
        "schema_version": SCHEMA_VERSION,
        "seconds": seconds,
        "cores": {},
    }
    for name in core_names:
        runs = [bench_parallel(name, seconds, 1)]
        if instances > 1:
            runs.append(bench_parallel(name, seconds, instances))
        report["cores"][name] = {
            "single_fps": runs[0]["per_instance_fps"][0],
            "runs": runs,
        }
    return report


def load_baseline(path: Union[str, Path]) -> Dict[str, float]:
    p = Path(path)
    try:
        data = json.loads(p.read_text())
    except OSError as exc:
        raise ConfigurationError(f"cannot read baseline file {p}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"baseline file {p} is not valid JSON: {exc}") from None
    try:
        table = data["single_instance_fps"]
        return {str(k): float(v) for k, v in table.items()}
    except (KeyError, TypeError, ValueError):
        raise ConfigurationError(
            f"baseline file {p} needs a 'single_instance_fps' table of core -> fps"
        ) from None


def check_baseline(
    report: Dict[str, object], baseline: Dict[str, float]
) -> List[str]:
    """Regression messages for cores measuring under the committed floor."""
    failures = []
    cores: Dict[str, Dict[str, object]] = report["cores"]  # type: ignore[assignment]
    for name, floor in sorted(baseline.items()):
        if name not in cores:
            continue
        measured = float(cores[name]["single_fps"])  # type: ignore[index]
        needed = BASELINE_FRACTION * floor
        if measured < needed:
            failures.append(
                f"{name}: {measured:.0f} fps is below {needed:.0f}"
                f" ({BASELINE_FRACTION:.0%} of committed {floor:.0f})"
            )
    return failures
