"""Python bindings for the V2V spectrum sharing simulator."""

from ._core import (
    Action,
    Environment,
    MetricsRecord,
    RunConfig,
    desk_profile,
    load_checkpoint,
    load_config,
    parse_config,
    pathloss_v2i,
    pathloss_v2v,
    run_eval,
    run_sweep,
    save_checkpoint,
    selftest,
    serialize_config,
    train,
)

__all__ = [
    "Action",
    "Environment",
    "MetricsRecord",
    "RunConfig",
    "desk_profile",
    "load_checkpoint",
    "load_config",
    "parse_config",
    "pathloss_v2i",
    "pathloss_v2v",
    "run_eval",
    "run_sweep",
    "save_checkpoint",
    "selftest",
    "serialize_config",
    "train",
]
