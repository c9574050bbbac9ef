"""Bandits with monotone jumps."""

import json as _json

from ._bwmj import (
    FitError,
    FormatError,
    Instance,
    InvalidInstance,
    UnknownAlgorithm,
    fit_regret_exponent,
    lower_bound_pair,
    random_instance,
    run,
    run_experiment,
)


def instance_from_dict(d):
    return Instance(_json.dumps(d))


def load_instance(path):
    with open(path) as f:
        return Instance(f.read())


def instance_to_dict(inst):
    return _json.loads(inst.to_json())


__all__ = [
    "FitError",
    "FormatError",
    "Instance",
    "InvalidInstance",
    "UnknownAlgorithm",
    "fit_regret_exponent",
    "instance_from_dict",
    "instance_to_dict",
    "load_instance",
    "lower_bound_pair",
    "random_instance",
    "run",
    "run_experiment",
]
