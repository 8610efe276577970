"""Offline figure generation for swarmform run logs.

Consumes only the public schema=1 log files (states.csv, params.csv,
series.csv, groups.json, run_config.json); no access to the simulator
internals.
"""

__version__ = "0.1.0"

from swarmplots.render import KINDS, PlotSpec, SchemaError, render

__all__ = ["KINDS", "PlotSpec", "SchemaError", "render"]
