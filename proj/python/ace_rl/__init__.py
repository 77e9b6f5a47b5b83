"""Actor-ensemble reinforcement learning: Python front end to the C++ core."""

from ._core import (
    ConfigError,
    ContractError,
    DimensionError,
    Env,
    NumericError,
    RunConfig,
    config_keys,
    diversity,
    env_names,
    evaluate_checkpoint,
    load_config,
    multimax_reward,
    parse_config,
    theorem_errors,
    train_seed,
    verify,
)

__all__ = [
    "ConfigError",
    "ContractError",
    "DimensionError",
    "Env",
    "NumericError",
    "RunConfig",
    "config_keys",
    "diversity",
    "env_names",
    "evaluate_checkpoint",
    "load_config",
    "multimax_reward",
    "parse_config",
    "theorem_errors",
    "train_seed",
    "verify",
]
