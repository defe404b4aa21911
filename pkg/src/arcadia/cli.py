"""Command-line entry point.

Subcommands: ``train``, ``eval``, ``tournament``, ``experiment``, ``bench``.
Every run takes an explicit ``--seed`` (nothing is seeded from the clock)
and writes result artifacts into ``--out-dir``.  Rerunning a subcommand with
the same config and seed reproduces every result file byte for byte; the one
exception is ``bench``, whose numbers are wall-clock measurements.  Run
metadata that legitimately varies (timestamps, interpreter version) goes to
a separate ``metadata.json`` so it cannot break that contract.

Exit codes: 0 success, 1 configuration error (bad flags, config file, model
file), 2 runtime error (numeric failure, benchmark regression, bugs).
"""

from __future__ import annotations

import argparse
import csv
import datetime
import json
import sys
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Sequence

from . import cores as _cores  # noqa: F401  (registers the built-in cores)
from .agents import HyperParams, QFunction, QLearningAgent
from .bench import bench_report, check_baseline, load_baseline
from .config import Settings, get_bool, get_float, get_int, get_str, load_settings
from .env import Environment
from .errors import (
    ArcadiaError,
    ConfigurationError,
    IncompatibleStateError,
    NormalizationError,
    ShapingError,
    UnknownCoreError,
    UsageError,
)
from .experiments import DEFAULT_SEEDS, EXPERIMENTS
from .harness import (
    EvalProtocol,
    evaluate,
    normalize,
    normalize_score,
    tournament,
    train,
)
from .wrappers import ShapedEnv, ShapingSpec

SCHEMA_VERSION = 1

_CONFIG_ERRORS = (
    ConfigurationError,
    UsageError,
    UnknownCoreError,
    IncompatibleStateError,
    NormalizationError,
    ShapingError,
)

_ENV_KEYS = ("core", "frame_skip", "max_episode_frames", "reward_clip")


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on bad flags; route through the config-error path
    def error(self, message: str) -> None:  # type: ignore[override]
        raise ConfigurationError(message)


def _write_json(path: Path, payload: object) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _write_csv(path: Path, fieldnames: Sequence[str], rows: Sequence[Mapping[str, object]]) -> None:
    with open(path, "w", newline="") as stream:
        writer = csv.DictWriter(stream, fieldnames=list(fieldnames), lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow(row)


def _write_metadata(out_dir: Path, argv: Sequence[str]) -> None:
    try:
        from importlib.metadata import version

        pkg_version = version("arcadia")
    except Exception:
        pkg_version = "unknown"
    _write_json(
        out_dir / "metadata.json",
        {
            "created_at": datetime.datetime.now(datetime.timezone.utc).isoformat(),
            "argv": list(argv),
            "package_version": pkg_version,
            "python_version": sys.version,
        },
    )


def _out_dir(args: argparse.Namespace) -> Path:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _env_from(settings: Settings) -> Environment:
    env_settings = {
        k: v
        for k, v in settings.items()
        if k in _ENV_KEYS or k.startswith("core.")
    }
    return Environment.from_settings(env_settings)


def _known_keys_check(settings: Settings, allowed_prefixes: Sequence[str]) -> None:
    for key in settings:
        if key in _ENV_KEYS or key.startswith("core."):
            continue
        if not any(key.startswith(p) for p in allowed_prefixes):
            raise ConfigurationError(f"unknown setting {key!r} for this subcommand")


def _hyper_from(settings: Settings) -> HyperParams:
    return HyperParams(
        alpha=get_float(settings, "agent.alpha", 0.1),
        gamma=get_float(settings, "agent.gamma", 0.99),
        epsilon_start=get_float(settings, "agent.epsilon_start", 1.0),
        epsilon_end=get_float(settings, "agent.epsilon_end", 0.1),
        epsilon_fraction=get_float(settings, "agent.epsilon_fraction", 0.1),
        epsilon_test=get_float(settings, "agent.epsilon_test", 0.05),
        target_sync_period=get_int(settings, "agent.target_sync", 1_000),
        grid=get_int(settings, "agent.grid", 8),
        levels=get_int(settings, "agent.levels", 8),
    )


def _protocol_from(settings: Settings) -> EvalProtocol:
    reference = None
    if "protocol.human_reference" in settings:
        reference = get_float(settings, "protocol.human_reference")
    return EvalProtocol(
        epoch_actions=get_int(settings, "protocol.epoch_actions", 50_000),
        max_epochs=get_int(settings, "protocol.max_epochs", 100),
        eval_episodes=get_int(settings, "protocol.eval_episodes", 30),
        eval_seed_base=get_int(settings, "protocol.eval_seed_base", 10_000),
        probe_states=get_int(settings, "protocol.probe_states", 256),
        probe_seed=get_int(settings, "protocol.probe_seed", 777),
        convergence_epochs=get_int(settings, "protocol.convergence_epochs", 3),
        convergence_threshold=get_float(settings, "protocol.convergence_threshold", 0.02),
        human_reference=reference,
    )


def _shaping_from(settings: Settings) -> Optional[ShapingSpec]:
    mode = get_str(settings, "shaping.mode", "none")
    if mode == "none":
        return None
    return ShapingSpec(
        mode=mode,
        weight=get_float(settings, "shaping.weight", 1.0),
        var_name=get_str(settings, "shaping.var", ""),
        absolute=get_bool(settings, "shaping.absolute", False),
    )


def _action_set(env: Environment, settings: Settings) -> Sequence[int]:
    full = get_bool(settings, "agent.full_action_set", False)
    return env.action_set(minimal=not full)


def _load_model(path: str, expected_actions: int) -> QFunction:
    try:
        with open(path) as stream:
            q = QFunction.load(stream)
    except OSError as exc:
        raise ConfigurationError(f"cannot read model file {path}: {exc}") from None
    if q.num_actions != expected_actions:
        raise ConfigurationError(
            f"model {path} has {q.num_actions} actions but the configured"
            f" action set has {expected_actions}"
        )
    return q


# -- subcommands ---------------------------------------------------------------


def _cmd_train(args: argparse.Namespace) -> int:
    settings = load_settings(args.config)
    _known_keys_check(settings, ("agent.", "shaping.", "train.", "protocol."))
    env = _env_from(settings)
    hyper = _hyper_from(settings)
    protocol = _protocol_from(settings)
    shaping = _shaping_from(settings)
    actions = get_int(settings, "train.actions", 50_000)
    epoch_evals = get_bool(settings, "train.epoch_evals", False)

    action_set = _action_set(env, settings)
    agent = QLearningAgent(num_actions=len(action_set), hyper=hyper, seed=args.seed)
    trainable = ShapedEnv(env, shaping) if shaping is not None else env
    result = train(
        trainable,
        agent,
        actions,
        train_seed=args.seed,
        protocol=protocol,
        epoch_evals=epoch_evals,
    )

    out = _out_dir(args)
    with open(out / "model.q", "w") as stream:
        agent.q.save(stream)
    _write_json(
        out / "train_log.json",
        {
            "schema_version": SCHEMA_VERSION,
            "core": env.core_name,
            "seed": args.seed,
            "actions": result.actions,
            "episodes": result.episodes,
            "epoch_scores": result.epoch_scores,
            "mean_q_curve": result.mean_q_curve,
            "converged_epoch": result.converged_epoch,
            "q_states": len(agent.q),
        },
    )
    _write_csv(
        out / "train_log.csv",
        ("epoch", "mean_score", "mean_q"),
        [
            {"epoch": i + 1, "mean_score": s, "mean_q": q}
            for i, (s, q) in enumerate(zip(result.epoch_scores, result.mean_q_curve))
        ],
    )
    _write_metadata(out, sys.argv[1:])
    print(f"trained {result.actions} actions over {result.episodes} episodes"
          f" -> {out / 'model.q'}")
    return 0


def _cmd_eval(args: argparse.Namespace) -> int:
    settings = load_settings(args.config)
    _known_keys_check(settings, ("agent.", "eval.", "protocol."))
    env = _env_from(settings)
    hyper = _hyper_from(settings)
    protocol = _protocol_from(settings)
    action_set = _action_set(env, settings)

    agent = QLearningAgent(num_actions=len(action_set), hyper=hyper, seed=args.seed)
    agent.q = _load_model(args.model, len(action_set))
    agent.target = agent.q.copy()

    result = evaluate(env, agent, protocol)
    mean = result.mean_score

    normalized: Optional[float] = None
    if protocol.human_reference is not None:
        random_mean = get_float(settings, "eval.random_mean")
        normalized = normalize(mean, random_mean, protocol.human_reference)
    else:
        try:
            normalized = normalize_score(env.core_name, mean)
        except NormalizationError:
            normalized = None

    out = _out_dir(args)
    _write_json(
        out / "eval_report.json",
        {
            "schema_version": SCHEMA_VERSION,
            "core": env.core_name,
            "model": str(args.model),
            "seed": args.seed,
            "episode_scores": result.episode_scores,
            "mean_score": mean,
            "normalized_score": normalized,
        },
    )
    _write_csv(
        out / "eval_scores.csv",
        ("episode", "score"),
        [{"episode": i, "score": s} for i, s in enumerate(result.episode_scores)],
    )
    _write_metadata(out, sys.argv[1:])
    if normalized is None:
        print(f"mean score {mean}")
    else:
        print(f"mean score {mean} (normalized {normalized:.2f})")
    return 0


def _cmd_tournament(args: argparse.Namespace) -> int:
    settings = load_settings(args.config)
    _known_keys_check(settings, ("agent.", "tournament.", "protocol."))
    env = _env_from(settings)
    hyper = _hyper_from(settings)
    rounds = get_int(settings, "tournament.rounds", 50)
    epsilon = get_float(settings, "tournament.epsilon", 0.0)
    action_set = _action_set(env, settings)

    agent_a = QLearningAgent(num_actions=len(action_set), hyper=hyper, seed=args.seed)
    agent_a.q = _load_model(args.model_a, len(action_set))
    agent_b = QLearningAgent(num_actions=len(action_set), hyper=hyper, seed=args.seed + 1)
    agent_b.q = _load_model(args.model_b, len(action_set))

    result = tournament(
        env, agent_a, agent_b, rounds=rounds, seed_base=args.seed, epsilon=epsilon
    )

    out = _out_dir(args)
    _write_json(
        out / "tournament.json",
        {
            "schema_version": SCHEMA_VERSION,
            "core": env.core_name,
            "model_a": str(args.model_a),
            "model_b": str(args.model_b),
            "rounds": result.rounds,
            "wins_a": result.wins[0],
            "wins_b": result.wins[1],
            "draws": result.draws,
            "trace": result.trace,
        },
    )
    _write_csv(
        out / "tournament.csv",
        ("round", "seed", "winner", "health_a", "health_b"),
        result.trace,
    )
    _write_metadata(out, sys.argv[1:])
    print(f"wins_a {result.wins[0]}  wins_b {result.wins[1]}  draws {result.draws}")
    return 0


def _cmd_experiment(args: argparse.Namespace) -> int:
    if args.name not in EXPERIMENTS:
        raise ConfigurationError(
            f"unknown experiment {args.name!r};"
            f" available: {', '.join(sorted(EXPERIMENTS))}"
        )
    seeds: Sequence[int] = DEFAULT_SEEDS
    if args.config is not None:
        settings = load_settings(args.config)
        _known_keys_check(settings, ("experiment.",))
        if "experiment.seeds" in settings:
            try:
                seeds = tuple(
                    int(tok) for tok in settings["experiment.seeds"].split(",") if tok
                )
            except ValueError:
                raise ConfigurationError(
                    "experiment.seeds must be a comma-separated list of integers"
                ) from None
            if not seeds:
                raise ConfigurationError("experiment.seeds must not be empty")
    if args.seed != 0:
        seeds = tuple(s + args.seed for s in seeds)

    report = EXPERIMENTS[args.name](seeds)

    out = _out_dir(args)
    _write_json(out / f"{args.name}.json", report)
    per_seed: List[Mapping[str, object]] = report["per_seed"]  # type: ignore[assignment]
    if per_seed:
        _write_csv(out / f"{args.name}.csv", list(per_seed[0].keys()), per_seed)
    _write_metadata(out, sys.argv[1:])
    print(
        f"{args.name}: {report['passes']}/{len(per_seed)} seeds pass"
        f" -> {'PASS' if report['passed'] else 'FAIL'}"
    )
    return 0


def _cmd_bench(args: argparse.Namespace) -> int:
    from .core import registered_cores

    names = list(args.core) if args.core else list(registered_cores())
    for name in names:
        if name not in registered_cores():
            raise UnknownCoreError(
                f"no core named {name!r}; registered:"
                f" {', '.join(registered_cores()) or 'none'}"
            )
    report = bench_report(names, args.seconds, args.instances)

    out = _out_dir(args)
    _write_json(out / "bench.json", report)
    rows = [
        {"core": name, "single_fps": entry["single_fps"]}
        for name, entry in sorted(report["cores"].items())  # type: ignore[union-attr]
    ]
    _write_csv(out / "bench.csv", ("core", "single_fps"), rows)
    _write_metadata(out, sys.argv[1:])
    for row in rows:
        print(f"{row['core']}: {row['single_fps']:.0f} fps")

    if args.baseline is not None:
        failures = check_baseline(report, load_baseline(args.baseline))
        if failures:
            for line in failures:
                print(f"regression: {line}", file=sys.stderr)
            return 2
        print("baseline check passed")
    return 0


# -- entry ---------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="arcadia", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", help="train an agent, write model + log")
    p_train.add_argument("--config", required=True)
    p_train.add_argument("--seed", type=int, required=True)
    p_train.add_argument("--out-dir", required=True)
    p_train.set_defaults(fn=_cmd_train)

    p_eval = sub.add_parser("eval", help="evaluate a saved model")
    p_eval.add_argument("--config", required=True)
    p_eval.add_argument("--seed", type=int, required=True)
    p_eval.add_argument("--out-dir", required=True)
    p_eval.add_argument("--model", required=True)
    p_eval.set_defaults(fn=_cmd_eval)

    p_tour = sub.add_parser("tournament", help="head-to-head rounds between two models")
    p_tour.add_argument("--config", required=True)
    p_tour.add_argument("--seed", type=int, required=True)
    p_tour.add_argument("--out-dir", required=True)
    p_tour.add_argument("--model-a", required=True)
    p_tour.add_argument("--model-b", required=True)
    p_tour.set_defaults(fn=_cmd_tournament)

    p_exp = sub.add_parser("experiment", help="run a named study end to end")
    p_exp.add_argument("name", choices=sorted(EXPERIMENTS))
    p_exp.add_argument("--config", default=None)
    p_exp.add_argument("--seed", type=int, default=0,
                       help="offset added to the study's frozen seed set")
    p_exp.add_argument("--out-dir", required=True)
    p_exp.set_defaults(fn=_cmd_experiment)

    p_bench = sub.add_parser("bench", help="measure core step throughput")
    p_bench.add_argument("--core", action="append", default=None,
                         help="core to measure (repeatable; default: all)")
    p_bench.add_argument("--seconds", type=float, default=2.0)
    p_bench.add_argument("--instances", type=int, default=4)
    p_bench.add_argument("--seed", type=int, default=0)
    p_bench.add_argument("--out-dir", required=True)
    p_bench.add_argument("--baseline", default=None,
                         help="committed baseline file; regression exits 2")
    p_bench.set_defaults(fn=_cmd_bench)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.fn(args)
    except _CONFIG_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ArcadiaError as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return 2
    except KeyboardInterrupt:
        return 2


if __name__ == "__main__":
    sys.exit(main())
