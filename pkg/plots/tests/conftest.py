import json
import subprocess
import sys

import pytest

FIXTURE_CONFIG = {
    "schema": 1,
    "n_sats": 8,
    "t_end_s": 3000.0,
    "model": "averaged_params",
    "controller": "main",
    "dt_s": 10.0,
    "log_every_s": 100.0,
    "rng_seed": 5,
    "init": "dense",
}


def _simulate(tmp_dir, out_name, overrides=None):
    doc = dict(FIXTURE_CONFIG)
    doc.update(overrides or {})
    cfg = tmp_dir / f"{out_name}.cfg"
    cfg.write_text(json.dumps(doc))
    out = tmp_dir / out_name
    cmd = [sys.executable, "-m", "swarmform.cli", "simulate",
           "--config", str(cfg), "--out", str(out)]
    subprocess.run(cmd, check=True, capture_output=True)
    return out


@pytest.fixture(scope="session")
def run_dir(tmp_path_factory):
    """A small run produced through the public simulator CLI."""
    return _simulate(tmp_path_factory.mktemp("fixture"), "run")


@pytest.fixture(scope="session")
def paired_dir(tmp_path_factory):
    """The opposing-controller twin of run_dir (same seed and conditions)."""
    return _simulate(tmp_path_factory.mktemp("fixture2"), "run_opp",
                     {"controller": "opp"})
