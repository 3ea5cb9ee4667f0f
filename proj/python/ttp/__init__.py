"""Lagrangian dual bounds for train timetabling by proximal bundle methods."""

import json

from ._core import (
    Instance,
    InputError,
    IoError,
    MasterFailure,
    generate,
    load_instance,
    load_instance_file,
)
from . import _core

__all__ = [
    "Instance",
    "InputError",
    "IoError",
    "MasterFailure",
    "compare",
    "generate",
    "load_instance",
    "load_instance_file",
    "solve",
]


def _params(**params):
    return {k: str(v).lower() if isinstance(v, bool) else repr(v) if isinstance(v, float) else str(v)
            for k, v in params.items()}


def solve(instance, method="disagg", **params):
    """Run one bundle method; returns the report as a dict.

    Keyword arguments are solver parameters (k_max=50, epsilon=1e-8, ...).
    """
    p = _params(**params)
    p["method"] = method
    return json.loads(_core.solve_json(instance, p))


def compare(instance, **params):
    """Run both methods with identical parameters; returns the comparison dict."""
    return json.loads(_core.compare_json(instance, _params(**params)))
