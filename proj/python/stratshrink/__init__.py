"""Python access to the stratshrink estimators, risk oracles and experiments."""

import json as _json

from ._stratshrink import (  # noqa: F401
    CapabilityError,
    ConfigError,
    DomainError,
    RiskEstimate,
    ShapeError,
    a_family,
    estimate_basic,
    exact_risk_basic,
    experiment_names,
    jeffreys_exponents,
    mc_risk_basic,
    node_rates,
)
from ._stratshrink import run_experiment as _run_experiment


def run_experiment(name, config, override_conditions=False):
    """Run an experiment from a config dict (or JSON string); returns claims, warnings and CSV text."""
    if not isinstance(config, str):
        config = _json.dumps(config)
    return _run_experiment(name, config, override_conditions)
