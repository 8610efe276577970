"""Command-line entry points and log emission.

Subcommands: simulate (run a scenario, emit CSV/JSON logs), analyze
(recompute metrics from emitted logs), gains (degree-based gain report for
an edge-list graph), group (recompute a grouping snapshot from a log).

Time series are CSV with a `schema=1` preamble line; floats carry 17
significant digits so parsing round-trips exactly. Angles are degrees in
all files, radians internally. Infinities serialize as the string 'inf'.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import os
import sys

import numpy as np

from swarmform import __version__, grouping, sim, stabilizer
from swarmform.frames import I_REF_DEFAULT, R_REF_DEFAULT, build_context
from swarmform.graphs import build_graph, degree_bounds, parse_edge_list
from swarmform.relorbit import connectable_time_relaxed_array
from swarmform.sim import RunLog, ScenarioConfig, SimulationBlowUp, metrics_plane_fit
from swarmform.targets import make_plane

log = logging.getLogger(__name__)

SCHEMA_LINE = "schema=1"

STATES_HEADER = ["t_s", "sat", "x_m", "y_m", "z_m", "vx_mps", "vy_mps", "vz_mps",
                 "ux_mps2", "uy_mps2", "uz_mps2"]
PARAMS_HEADER = ["t_s", "sat", "c1_m", "c2_m", "c3_m", "c4_m", "c5_m", "c6_m",
                 "r_xy_m", "theta_xy_deg", "r_z_m", "theta_z_deg", "tconn_s"]
SERIES_HEADER = ["t_s", "v_all", "barrier_violations"]


class ConfigError(ValueError):
    """Invalid or malformed run configuration."""


def _fmt(x: float) -> str:
    return "%.17g" % x


_GROUPING_KEYS = {"n_f_max", "n_lf_max", "n_fl_max", "schedule_s", "trim_hull_quantile"}
_CONFIG_KEYS = {
    "schema", "n_sats", "t_end_s", "model", "controller", "r_ref_m", "i_ref_deg",
    "theta_p_deg", "theta_zxy_deg", "r_avg_m", "r_s_m", "f_bar_N", "mass_kg",
    "sat_side_m", "dt_s", "rng_seed", "init", "k_a_per_s", "k_b_per_s", "k_z_per_s",
    "gamma_a", "r_xy_min_m", "gains_profile", "log_every_s", "grouping",
    "grouping_once", "s_clamp",
}


def config_to_dict(cfg: ScenarioConfig) -> dict:
    """External (unit-suffixed, degrees) form of a scenario configuration."""
    gcfg = cfg.grouping or grouping.GroupingConfig(r_s=cfg.r_s)
    return {
        "schema": 1,
        "n_sats": cfg.n_sats,
        "t_end_s": cfg.t_end,
        "model": cfg.model,
        "controller": cfg.controller,
        "r_ref_m": cfg.r_ref,
        "i_ref_deg": math.degrees(cfg.i_ref),
        "theta_p_deg": math.degrees(cfg.theta_p),
        "theta_zxy_deg": math.degrees(cfg.theta_zxy),
        "r_avg_m": cfg.r_avg,
        "r_s_m": cfg.r_s,
        "f_bar_N": cfg.f_bar,
        "mass_kg": cfg.mass,
        "sat_side_m": cfg.sat_side,
        "dt_s": cfg.dt,
        "rng_seed": cfg.rng_seed,
        "init": cfg.init,
        "k_a_per_s": cfg.k_a,
        "k_b_per_s": cfg.k_b,
        "k_z_per_s": cfg.k_z,
        "gamma_a": cfg.gamma_a,
        "r_xy_min_m": cfg.r_xy_min,
        "gains_profile": cfg.gains_profile,
        "log_every_s": cfg.log_every,
        "grouping": {
            "n_f_max": gcfg.n_f_max,
            "n_lf_max": gcfg.n_lf_max,
            "n_fl_max": gcfg.n_fl_max,
            "schedule_s": list(map(list, gcfg.schedule)) if gcfg.schedule else None,
            "trim_hull_quantile": gcfg.trim_hull_quantile,
        },
        "grouping_once": cfg.grouping_once,
        "s_clamp": cfg.s_clamp,
    }


def config_from_dict(doc: dict) -> ScenarioConfig:
    """Parse the external configuration form; unknown keys are rejected."""
    if not isinstance(doc, dict):
        raise ConfigError("configuration root must be an object")
    unknown = set(doc) - _CONFIG_KEYS
    if unknown:
        raise ConfigError(f"unknown configuration keys: {sorted(unknown)}")
    if doc.get("schema", 1) != 1:
        raise ConfigError(f"unsupported schema {doc.get('schema')!r}")
    for key in ("n_sats", "t_end_s"):
        if key not in doc:
            raise ConfigError(f"missing required key {key!r}")
    gdoc = doc.get("grouping") or {}
    unknown = set(gdoc) - _GROUPING_KEYS
    if unknown:
        raise ConfigError(f"unknown grouping keys: {sorted(unknown)}")
    r_s = float(doc.get("r_s_m", 1.0))
    schedule = gdoc.get("schedule_s")
    gcfg = grouping.GroupingConfig(
        r_s=r_s,
        n_f_max=int(gdoc.get("n_f_max", 5)),
        n_lf_max=int(gdoc.get("n_lf_max", 5)),
        n_fl_max=int(gdoc.get("n_fl_max", 5)),
        schedule=tuple(tuple(x) for x in schedule) if schedule else None,
        trim_hull_quantile=gdoc.get("trim_hull_quantile"),
    )
    try:
        cfg = ScenarioConfig(
            n_sats=int(doc["n_sats"]),
            t_end=float(doc["t_end_s"]),
            model=doc.get("model", "truth_j2"),
            controller=doc.get("controller", "main"),
            r_ref=float(doc.get("r_ref_m", R_REF_DEFAULT)),
            i_ref=math.radians(float(doc.get("i_ref_deg", math.degrees(I_REF_DEFAULT)))),
            theta_p=math.radians(float(doc.get("theta_p_deg", 30.0))),
            theta_zxy=math.radians(float(doc.get("theta_zxy_deg", 0.0))),
            r_avg=float(doc.get("r_avg_m", 0.5)),
            r_s=r_s,
            f_bar=None if doc.get("f_bar_N", 5.0e-7) is None else float(doc.get("f_bar_N", 5.0e-7)),
            mass=float(doc.get("mass_kg", 0.5)),
            sat_side=float(doc.get("sat_side_m", 0.1)),
            dt=None if doc.get("dt_s") is None else float(doc["dt_s"]),
            rng_seed=int(doc.get("rng_seed", 0)),
            init=doc.get("init", "dense"),
            k_a=float(doc.get("k_a_per_s", 1.5e-2)),
            k_b=None if doc.get("k_b_per_s") is None else float(doc["k_b_per_s"]),
            k_z=None if doc.get("k_z_per_s") is None else float(doc["k_z_per_s"]),
            gamma_a=float(doc.get("gamma_a", 1.0)),
            r_xy_min=None if doc.get("r_xy_min_m") is None else float(doc["r_xy_min_m"]),
            gains_profile=doc.get("gains_profile", "derived"),
            grouping=gcfg,
            grouping_once=bool(doc.get("grouping_once", False)),
            log_every=None if doc.get("log_every_s") is None else float(doc["log_every_s"]),
            s_clamp=float(doc.get("s_clamp", stabilizer.S_CLAMP_DEFAULT)),
        )
        cfg.validate()
    except (ValueError, TypeError) as exc:
        raise ConfigError(str(exc)) from exc
    return cfg


SCENARIOS = {
    # Desk-scale deployment into the 30 deg plane under the nonlinear model.
    "theta1_n20": {
        "n_sats": 20, "t_end_s": 120 * 3600.0, "model": "truth_j2",
        "controller": "main", "init": "dense", "rng_seed": 21,
        "theta_p_deg": 30.0, "theta_zxy_deg": 0.0,
        "k_b_per_s": 3.0e-3, "k_z_per_s": 2.5e-3, "gamma_a": 4.0,
        "grouping": {"trim_hull_quantile": 0.7},
        "log_every_s": 300.0,
    },
    # Same deployment into the tilted 40/50 deg plane.
    "theta2_n20": {
        "n_sats": 20, "t_end_s": 120 * 3600.0, "model": "truth_j2",
        "controller": "main", "init": "dense", "rng_seed": 21,
        "theta_p_deg": 40.0, "theta_zxy_deg": 50.0,
        "k_b_per_s": 3.0e-3, "k_z_per_s": 2.5e-3, "gamma_a": 4.0,
        "grouping": {"trim_hull_quantile": 0.7},
        "log_every_s": 300.0,
    },
    # Connectable-period comparison presets (drift-only gains, fixed grouping).
    "small_c1_main": {
        "n_sats": 20, "t_end_s": 12 * 5677.0, "model": "averaged_params",
        "controller": "main", "init": "small_c1", "rng_seed": 1,
        "gains_profile": "comparison", "grouping_once": True,
        "dt_s": 5677.0 / 600, "log_every_s": 5677.0 / 60,
    },
    "small_c1_opp": {
        "n_sats": 20, "t_end_s": 12 * 5677.0, "model": "averaged_params",
        "controller": "opp", "init": "small_c1", "rng_seed": 1,
        "gains_profile": "comparison", "grouping_once": True,
        "dt_s": 5677.0 / 600, "log_every_s": 5677.0 / 60,
    },
    "large_c1_main": {
        "n_sats": 20, "t_end_s": 12 * 5677.0, "model": "averaged_params",
        "controller": "main", "init": "large_c1", "rng_seed": 1,
        "gains_profile": "comparison", "grouping_once": True,
        "dt_s": 5677.0 / 600, "log_every_s": 5677.0 / 60,
    },
    # Full-scale configuration; hours of runtime, not part of the test suite.
    "theta1_n100": {
        "n_sats": 100, "t_end_s": 120 * 3600.0, "model": "truth_j2",
        "controller": "main", "init": "dense", "rng_seed": 21,
        "theta_p_deg": 30.0, "theta_zxy_deg": 0.0,
        "k_b_per_s": 3.0e-3, "k_z_per_s": 2.5e-3, "gamma_a": 4.0,
        "grouping": {"trim_hull_quantile": 0.7},
        "log_every_s": 300.0,
    },
}


def _write_csv(path: str, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(SCHEMA_LINE + "\n")
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def _read_csv(path: str, expected_header) -> np.ndarray:
    with open(path) as fh:
        first = fh.readline().strip()
        if first != SCHEMA_LINE:
            raise ConfigError(f"{path}: missing '{SCHEMA_LINE}' preamble")
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != expected_header:
            raise ConfigError(f"{path}: unexpected header {header}")
        rows = [[float(v) for v in row] for row in reader if row]
    if not rows:
        raise ConfigError(f"{path}: no data rows")
    arr = np.array(rows)
    if arr.shape[1] != len(expected_header):
        raise ConfigError(f"{path}: ragged rows")
    return arr


def _json_safe(obj):
    if isinstance(obj, dict):
        return {k: _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_safe(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        if math.isnan(x):
            return None
        return x
    if isinstance(obj, (np.integer,)):
        return int(obj)
    return obj


def _dump_json(path: str, doc) -> None:
    with open(path, "w") as fh:
        json.dump(_json_safe(doc), fh, indent=2, sort_keys=True)
        fh.write("\n")


def _tconn_stats(values: np.ndarray, ref_idx: int) -> dict:
    vals = np.delete(values, ref_idx)
    return {
        "min_s": float(np.min(vals)),
        "median_s": float(np.median(vals)),
        "max_s": float(np.max(vals)),
    }


def build_summary(times, states, params_rel, tconn, violations, final_edges,
                  ref_idx, cfg: ScenarioConfig) -> dict:
    """Final run metrics; computable from the emitted logs alone."""
    ctx = build_context(cfg.r_ref, cfg.i_ref)
    plane = make_plane(cfg.theta_p, cfg.theta_zxy, cfg.r_avg, ctx)
    sel = times >= times[-1] - ctx.period_xy
    pts = []
    for k in np.nonzero(sel)[0]:
        pos = states[k][:, :3]
        pts.append(pos - pos.mean(axis=0))
    plane_doc = {"theta_p_deg": math.nan, "theta_zxy_deg": math.nan,
                 "rms_m": math.nan, "confident": False}
    if cfg.n_sats >= 3:
        try:
            fit = metrics_plane_fit(np.concatenate(pts), ctx)
            plane_doc = {
                "theta_p_deg": math.degrees(fit.theta_p),
                "theta_zxy_deg": math.degrees(fit.theta_zxy),
                "rms_m": fit.rms_offplane,
                "confident": fit.confident,
            }
        except ValueError:
            pass

    def drift_norms(p) -> dict:
        if final_edges:
            diff1 = [p[0, a] - p[0, b] for a, b in final_edges]
            diff4 = [p[3, a] - p[3, b] for a, b in final_edges]
            return {"e_c1_m": float(np.linalg.norm(diff1)),
                    "e_c4_m": float(np.linalg.norm(diff4))}
        return {"e_c1_m": 0.0, "e_c4_m": 0.0}

    edge_doc = {"target_m": plane.r_xyd, "min_m": math.nan, "median_m": math.nan,
                "max_m": math.nan, "max_rel_dev": math.nan, "rms_rel_dev": math.nan}
    if final_edges:
        amps = np.array([math.hypot(params_rel[-1][1, a] - params_rel[-1][1, b],
                                    params_rel[-1][2, a] - params_rel[-1][2, b])
                         for a, b in final_edges])
        dev = (amps - plane.r_xyd) / plane.r_xyd
        edge_doc.update({
            "min_m": float(amps.min()),
            "median_m": float(np.median(amps)),
            "max_m": float(amps.max()),
            "max_rel_dev": float(np.max(np.abs(dev))),
            "rms_rel_dev": float(np.sqrt(np.mean(dev**2))),
        })

    vz_rel0 = ctx.omega_zref * params_rel[0][4]
    delta_i = np.abs(vz_rel0) / (ctx.omega_zref * ctx.r_ref)
    return {
        "schema": 1,
        "n_sats": cfg.n_sats,
        "ref_idx": int(ref_idx),
        "t_end_s": float(times[-1]),
        "plane_fit": plane_doc,
        "drift_norms": {"initial": drift_norms(params_rel[0]),
                        "final": drift_norms(params_rel[-1])},
        "edge_r_xy": edge_doc,
        "tconn": {"initial": _tconn_stats(tconn[0], ref_idx),
                  "final": _tconn_stats(tconn[-1], ref_idx)},
        "barrier_violations_total": int(np.sum(violations)),
        "delta_i_max": float(delta_i.max(initial=0.0)),
    }


def write_run_log(lg: RunLog, out_dir: str) -> None:
    """Emit the schema=1 log files for one run."""
    os.makedirs(out_dir, exist_ok=True)
    ctx = build_context(lg.config.r_ref, lg.config.i_ref)
    n = lg.config.n_sats
    rows_s, rows_p = [], []
    for k, t in enumerate(lg.times):
        for j in range(n):
            st = lg.states[k, j]
            u = lg.inputs[k, j]
            rows_s.append([_fmt(t), j] + [_fmt(v) for v in st] + [_fmt(v) for v in u])
            p = lg.params_rel[k][:, j]
            rows_p.append(
                [_fmt(t), j] + [_fmt(v) for v in p]
                + [_fmt(math.hypot(p[1], p[2])),
                   _fmt(math.degrees(math.atan2(p[2], p[1]))),
                   _fmt(math.hypot(p[4], p[5])),
                   _fmt(math.degrees(math.atan2(p[5], p[4]))),
                   _fmt(lg.tconn[k, j])]
            )
    _write_csv(os.path.join(out_dir, "states.csv"), STATES_HEADER, rows_s)
    _write_csv(os.path.join(out_dir, "params.csv"), PARAMS_HEADER, rows_p)
    _write_csv(
        os.path.join(out_dir, "series.csv"), SERIES_HEADER,
        [[_fmt(t), _fmt(v), int(b)] for t, v, b in
         zip(lg.times, lg.v_all, lg.barrier_violations)],
    )
    fits = {t: (tp, tz, rms) for t, tp, tz, rms in lg.plane_estimates}
    snapshots = []
    for t, dg in lg.groupings:
        snap = {
            "t_s": float(t),
            "leaders": list(dg.leaders),
            "groups": {str(l): list(m) for l, m in dg.groups.items()},
            "edges": [list(e) for e in dg.undirected_edges],
        }
        if t in fits:
            tp, tz, rms = fits[t]
            snap["plane_estimate"] = {
                "theta_p_deg": math.degrees(tp) if math.isfinite(tp) else math.nan,
                "theta_zxy_deg": math.degrees(tz) if math.isfinite(tz) else math.nan,
                "rms_m": rms,
            }
        snapshots.append(snap)
    _dump_json(os.path.join(out_dir, "groups.json"), {"schema": 1, "snapshots": snapshots})
    _dump_json(os.path.join(out_dir, "run_config.json"), config_to_dict(lg.config))
    final_edges = [tuple(e) for e in snapshots[-1]["edges"]] if snapshots else []
    summary = build_summary(lg.times, lg.states, lg.params_rel, lg.tconn,
                            lg.barrier_violations, final_edges, lg.ref_idx, lg.config)
    _dump_json(os.path.join(out_dir, "summary.json"), summary)


def read_run_log(out_dir: str):
    """Reload the emitted arrays of a run directory.

    Returns (cfg, times, states, params_rel, tconn, violations, final_edges,
    ref_idx). The reference satellite is recovered as the column whose
    parameters are exactly zero throughout.
    """
    with open(os.path.join(out_dir, "run_config.json")) as fh:
        cfg = config_from_dict(json.load(fh))
    arr_s = _read_csv(os.path.join(out_dir, "states.csv"), STATES_HEADER)
    arr_p = _read_csv(os.path.join(out_dir, "params.csv"), PARAMS_HEADER)
    arr_v = _read_csv(os.path.join(out_dir, "series.csv"), SERIES_HEADER)
    n = cfg.n_sats
    if arr_s.shape[0] % n or arr_p.shape[0] % n:
        raise ConfigError("row count is not a multiple of the satellite count")
    t_count = arr_s.shape[0] // n
    times = arr_s[::n, 0].copy()
    states = arr_s[:, 2:8].reshape(t_count, n, 6)
    inputs = arr_s[:, 8:11].reshape(t_count, n, 3)
    params_rel = arr_p[:, 2:8].reshape(t_count, n, 6).transpose(0, 2, 1)
    tconn = arr_p[:, 12].reshape(t_count, n)
    violations = arr_v[:, 2]
    with open(os.path.join(out_dir, "groups.json")) as fh:
        groups_doc = json.load(fh)
    snapshots = groups_doc.get("snapshots", [])
    final_edges = [tuple(e) for e in snapshots[-1]["edges"]] if snapshots else []
    zero_cols = np.nonzero(np.max(np.abs(params_rel), axis=(0, 1)) == 0.0)[0]
    ref_idx = int(zero_cols[0]) if zero_cols.size else 0
    return cfg, times, states, params_rel, tconn, violations, final_edges, ref_idx, inputs


def cmd_simulate(args) -> int:
    if args.config and args.scenario:
        log.error("--config and --scenario are mutually exclusive")
        return 1
    try:
        if args.scenario:
            if args.scenario not in SCENARIOS:
                raise ConfigError(
                    f"unknown scenario {args.scenario!r}; available: {sorted(SCENARIOS)}")
            doc = dict(SCENARIOS[args.scenario])
        elif args.config:
            try:
                with open(args.config) as fh:
                    doc = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ConfigError(
                    f"{args.config}: line {exc.lineno}, column {exc.colno}: {exc.msg}"
                ) from exc
            except OSError as exc:
                raise ConfigError(str(exc)) from exc
        else:
            raise ConfigError("one of --config or --scenario is required")
        if args.seed is not None:
            doc["rng_seed"] = args.seed
        cfg = config_from_dict(doc)
    except ConfigError as exc:
        log.error("configuration error: %s", exc)
        return 1
    try:
        lg = sim.run(cfg)
    except SimulationBlowUp as exc:
        log.error("numerical abort: %s", exc)
        return 2
    write_run_log(lg, args.out)
    log.info("run complete: %s", args.out)
    return 0


def cmd_analyze(args) -> int:
    try:
        (cfg, times, states, params_rel, tconn, violations,
         final_edges, ref_idx, _inputs) = read_run_log(args.out)
        with open(os.path.join(args.out, "groups.json")) as fh:
            snapshots = json.load(fh).get("snapshots", [])
    except (ConfigError, OSError, json.JSONDecodeError) as exc:
        log.error("schema error: %s", exc)
        return 1
    summary = build_summary(times, states, params_rel, tconn, violations,
                            final_edges, ref_idx, cfg)
    _dump_json(os.path.join(args.out, "summary.json"), summary)

    ctx = build_context(cfg.r_ref, cfg.i_ref)
    plane = make_plane(cfg.theta_p, cfg.theta_zxy, cfg.r_avg, ctx)
    # graphs and gains in force per grouping epoch, as during the run
    epochs = []
    for snap in snapshots:
        edges = [tuple(e) for e in snap["edges"]]
        graph = build_graph(cfg.n_sats, edges)
        gains = sim.scenario_gains(cfg, edges, cfg.n_sats, plane, ctx)
        epochs.append((float(snap["t_s"]), graph, gains))

    rows = []
    for k, t in enumerate(times):
        rel = params_rel[k]
        tc = connectable_time_relaxed_array(rel[0], rel[3], cfg.r_s, ctx)
        tc = np.delete(tc, ref_idx)
        v_all = math.nan
        if cfg.controller != "none" and epochs:
            _, graph, gains = [e for e in epochs if e[0] <= t + 1e-9][-1]
            try:
                v_all, _ = stabilizer.lyapunov_value(rel, graph, gains, ctx)
            except stabilizer.BarrierViolation:
                v_all = math.nan
        rows.append([_fmt(t), _fmt(np.min(tc)), _fmt(np.median(tc)), _fmt(np.max(tc)),
                     _fmt(v_all), _fmt(violations[k])])
    _write_csv(os.path.join(args.out, "derived.csv"),
               ["t_s", "tconn_min_s", "tconn_median_s", "tconn_max_s", "v_all",
                "barrier_violations"],
               rows)
    log.info("analysis written to %s", args.out)
    return 0


def cmd_gains(args) -> int:
    try:
        with open(args.edges) as fh:
            edges = parse_edge_list(fh.read())
    except (OSError, ValueError) as exc:
        log.error("edge list error: %s", exc)
        return 1
    if not edges:
        log.error("edge list is empty")
        return 1
    n = max(max(e) for e in edges) + 1
    g = build_graph(n, edges)
    if not g.connected:
        log.error("graph is not connected; gain derivation undefined")
        return 1
    ctx = build_context(args.r_ref_m, math.radians(args.i_ref_deg))
    d_min, d_max = degree_bounds(g)
    gains = stabilizer.derive_gains(d_min, d_max, n, args.k_a, ctx)
    report = stabilizer.check_gain_condition(g, gains, ctx)
    print(f"graph: n={n} edges={g.n_edges} degree bounds=({d_min},{d_max})")
    print(f"lambda_0={gains.lambda_0:.9g} gamma_b={gains.gamma_b:.9g} "
          f"psi={gains.psi:.9g} f_0={gains.f_0:.9g} g_0={gains.g_0:.9g}")
    print(f"eigenvalue window: [{report.lower:.9g}, {report.upper:.9g}]")
    print("nonzero Laplacian eigenvalues:")
    for ev in report.eigenvalues:
        mark = "ok"
        if ev in report.lower_violations:
            mark = "BELOW lower bound"
        elif ev in report.upper_violations:
            mark = "ABOVE upper bound"
        print(f"  {ev:.9g}  {mark}")
    print(f"condition: {'PASS' if report.passed else 'FAIL'}")
    return 0 if report.passed else 3


def cmd_group(args) -> int:
    try:
        (cfg, times, states, params_rel, _tconn, _viol,
         _edges, _ref, _inputs) = read_run_log(args.out)
    except (ConfigError, OSError, json.JSONDecodeError) as exc:
        log.error("schema error: %s", exc)
        return 1
    k = len(times) - 1 if args.time is None else int(np.argmin(np.abs(times - args.time)))
    ctx = build_context(cfg.r_ref, cfg.i_ref)
    plane = make_plane(cfg.theta_p, cfg.theta_zxy, cfg.r_avg, ctx)
    gcfg = cfg.grouping or grouping.GroupingConfig(r_s=cfg.r_s)
    dg = grouping.centralized_grouping(states[k][:, :3], params_rel[k], gcfg, plane, ctx)
    doc = {
        "t_s": float(times[k]),
        "leaders": list(dg.leaders),
        "groups": {str(l): list(m) for l, m in dg.groups.items()},
        "edges": [list(e) for e in dg.undirected_edges],
    }
    print(json.dumps(_json_safe(doc), indent=2, sort_keys=True))
    return 0


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="swarmform",
        description="Satellite-swarm formation deployment simulator",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="run a scenario and emit logs")
    p_sim.add_argument("--config", help="path to a JSON run configuration")
    p_sim.add_argument("--scenario", help=f"bundled scenario name ({', '.join(sorted(SCENARIOS))})")
    p_sim.add_argument("--out", required=True, help="output directory")
    p_sim.add_argument("--seed", type=int, default=None, help="override the RNG seed")
    p_sim.set_defaults(func=cmd_simulate)

    p_an = sub.add_parser("analyze", help="recompute metrics from emitted logs")
    p_an.add_argument("--out", required=True, help="run directory to analyze")
    p_an.set_defaults(func=cmd_analyze)

    p_g = sub.add_parser("gains", help="degree-based gain report for an edge list")
    p_g.add_argument("--edges", required=True, help="edge-list file: 'tail head' per line")
    p_g.add_argument("--k-a", dest="k_a", type=float, default=1.5e-2)
    p_g.add_argument("--r-ref-m", dest="r_ref_m", type=float, default=R_REF_DEFAULT)
    p_g.add_argument("--i-ref-deg", dest="i_ref_deg", type=float,
                     default=math.degrees(I_REF_DEFAULT))
    p_g.set_defaults(func=cmd_gains)

    p_gr = sub.add_parser("group", help="recompute a grouping snapshot from a run log")
    p_gr.add_argument("--out", required=True, help="run directory")
    p_gr.add_argument("--time", type=float, default=None, help="snapshot time (default: last)")
    p_gr.set_defaults(func=cmd_group)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(
        level=os.environ.get("SWARMFORM_LOG", "INFO").upper(),
        format="%(levelname)s %(name)s: %(message)s",
    )
    args = make_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
