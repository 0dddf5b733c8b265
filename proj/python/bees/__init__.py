"""Python front end for the bees C++ library."""

import json as _json

from ._bees import (
    BeesError,
    ConfigError,
    DimensionError,
    Exp4R,
    ParameterError,
    SequencingError,
    canonical_config,
    check_assumption1,
    default_C,
    epoch_lengths,
    mix_advice,
    normalize_log_weights,
    pts,
    pts_fast,
    rho_default,
    run_config,
    summarize_csv,
)


def run(config, threads=1):
    """Run a config given as a dict or a JSON string; returns result rows as dicts."""
    if not isinstance(config, str):
        config = _json.dumps(config)
    return run_config(config, threads)


__all__ = [n for n in dir() if not n.startswith("_")]
