"""Coalescing random walks, the voter model and their diffusive limits."""

import json

from ._core import (
    GuardViolation,
    InvalidArgument,
    Law,
    Path,
    cli_main,
    coalesce,
    density,
    dual_check,
    enumerate_exact,
    etahat_reference,
    experiment_kinds,
    hausdorff,
    interface_trace,
    ladder_pmf,
    lazy_uniform_law,
    occupied_sites,
    overshoot_limit,
    parse_law,
    path_distance,
    rho,
    run_experiment_json,
    two_step_law,
)


def run_experiment(kind, seed, *flags):
    """Run one experiment and return its report as a dict.

    ``flags`` are command-line style, e.g. ``run_experiment("etahat", 1, "--trials", "50")``.
    """
    args = [kind, "--seed", str(seed), *[str(f) for f in flags]]
    return json.loads(run_experiment_json(args))


__all__ = [name for name in dir() if not name.startswith("_") and name != "json"]
