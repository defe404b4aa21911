"""Deterministic game cores behind a unified RL environment interface.

Importing this package registers the built-in cores ("scroller", "racer",
"duel"), so ``Environment("scroller")`` works with no further setup.  The
names re-exported here are the supported library surface; the submodules
stay importable for anything narrower.
"""

from . import cores as _cores  # noqa: F401  (registers the built-in cores)
from .agents import EpsilonSchedule, HyperParams, QFunction, QLearningAgent, RandomAgent
from .core import CoreInfo, CoreState, Frame, GameCore, StateVars, create_core, register_core, registered_cores
from .env import Environment, StepResult, full_action_set, minimal_action_set
from .errors import (
    ArcadiaError,
    ConfigurationError,
    IncompatibleStateError,
    NormalizationError,
    NumericError,
    ShapingError,
    UnknownCoreError,
    UsageError,
)
from .harness import EvalProtocol, evaluate, normalize_score, tournament, train
from .wrappers import ShapedEnv, ShapingSpec

__version__ = "0.1.0"  # keep in sync with pyproject.toml

__all__ = [
    "ArcadiaError",
    "ConfigurationError",
    "CoreInfo",
    "CoreState",
    "Environment",
    "EpsilonSchedule",
    "EvalProtocol",
    "Frame",
    "GameCore",
    "HyperParams",
    "IncompatibleStateError",
    "NormalizationError",
    "NumericError",
    "QFunction",
    "QLearningAgent",
    "RandomAgent",
    "ShapedEnv",
    "ShapingError",
    "ShapingSpec",
    "StateVars",
    "StepResult",
    "UnknownCoreError",
    "UsageError",
    "create_core",
    "evaluate",
    "full_action_set",
    "minimal_action_set",
    "normalize_score",
    "register_core",
    "registered_cores",
    "tournament",
    "train",
    "__version__",
]
