"""Mixed-state branching processes (one continuous, one integer coordinate)."""

import json

from . import _core
from ._core import (
    BranchingMechanism,
    ImmigrationMechanism,
    NumericError,
    PreconditionError,
    UnsupportedError,
    ensemble,
    ergodic_rate,
    mean_state,
    moment_matrix,
    phi,
    psi,
    run_config,
    solve_v,
    stationary_laplace,
    survival_tau,
    transition_laplace,
    validate,
    w1_bounds,
    wasserstein1,
)

__version__ = _core.__version__


def mechanism(doc):
    """Build (branching, immigration-or-None) from a dict, a JSON string or a path."""
    if isinstance(doc, dict):
        return _core.parse_mechanism(json.dumps(doc))
    text = str(doc)
    if not text.lstrip().startswith("{"):
        with open(text) as fh:
            text = fh.read()
    return _core.parse_mechanism(text)


__all__ = [
    "BranchingMechanism",
    "ImmigrationMechanism",
    "NumericError",
    "PreconditionError",
    "UnsupportedError",
    "ensemble",
    "ergodic_rate",
    "mean_state",
    "mechanism",
    "moment_matrix",
    "phi",
    "psi",
    "run_config",
    "solve_v",
    "stationary_laplace",
    "survival_tau",
    "transition_laplace",
    "validate",
    "w1_bounds",
    "wasserstein1",
]
