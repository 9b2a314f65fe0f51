"""Spin squeezing in 2D XXZ quenches: ED, rotor/spin-wave, DTWA and OAT solvers."""

import json

from . import _spinsqz
from ._spinsqz import (
    ConfigError,
    NumericalError,
    __version__,
    bare_chi,
    config_hash,
    couplings,
    fit_power_law,
    oat_optimum,
    tower,
)


def quench(**config):
    """Time series as a dict of numpy columns; keys as in the CLI config files."""
    out = _spinsqz.quench(**config)
    out["metadata"] = json.loads(out["metadata"])
    return out


__all__ = [
    "ConfigError",
    "NumericalError",
    "__version__",
    "bare_chi",
    "config_hash",
    "couplings",
    "fit_power_law",
    "oat_optimum",
    "quench",
    "tower",
]
