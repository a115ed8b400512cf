"""Python access to the avlab C++ core: field scenarios, beam distributions, connections and scans."""

import json as _json

from ._avlab import (
    SCHEMA_VERSION,
    __version__,
    beam_moments,
    beam_stats,
    comparison_columns,
    fit_scaling,
    fluid_columns,
    list_scenarios,
    lorentz_coeffs,
    lorentz_spray,
    parse_config,
    run_scan_json,
)


def run_scan(config: dict) -> dict:
    """Run a scan from a config dict. Returns the manifest plus both tables as CSV text."""
    return run_scan_json(_json.dumps(config))


__all__ = [
    "SCHEMA_VERSION",
    "__version__",
    "beam_moments",
    "beam_stats",
    "comparison_columns",
    "fit_scaling",
    "fluid_columns",
    "list_scenarios",
    "lorentz_coeffs",
    "lorentz_spray",
    "parse_config",
    "run_scan",
    "run_scan_json",
]
