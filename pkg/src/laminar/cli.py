"""Command-line entry point: ``laminar <command> [--config file.json] [flags]``.

Exit codes: 0 success, 1 configuration error, 2 numerical failure,
3 property-suite failure.
"""
import argparse
import json
import logging
import os
import sys
from pathlib import Path

import jsonschema
import numpy as np

from . import csvio, render
from .bilayer_graph import (PolarityWeights, analyze_structure, graph_from_spec, weighted_adjacency)
from .errors import ConfigError, GraphError, LaminarError, NumericalError
from .interwoven import interweave
from .kinetics import HillKinetics, HillParameters, classify_transfer_signs, linearize, solve_hss
from .quotient import (LaminarPartition, lift_eigenvector, lifting_matrix, minimality_crossover, reduce_adjacency,
                       spectral_position, spectrum_rows)
from .simulate import simulate_pattern, snapshot_rows
from .stability import (evaluate_point, large_scale_instability, log_axis, quotient_instability_example,
                        sweep_regions)

log = logging.getLogger("laminar")

COMMANDS = ("graph", "spectrum", "quotient", "hss", "stability", "simulate", "sweep", "verify")

_POS = {"type": "number", "exclusiveMinimum": 0}
_COUNT = {"type": "integer", "minimum": 1}
GRAPH_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "layer1_size": {"type": "integer", "minimum": 3},
        "layer2_size": {"type": "integer", "minimum": 3},
        "profile": {
            "type": "object",
            "additionalProperties": False,
            "required": ["n1_L1", "n2_L1", "n1_L2", "n2_L2"],
            "properties": {k: {"type": "integer", "minimum": 0} for k in ("n1_L1", "n2_L1", "n1_L2", "n2_L2")},
        },
        "preset": {"enum": ["contact", "diffusion", "bipartite2d"]},
        "cross_offsets": {"type": "array", "items": {"type": "integer"}},
    },
    "anyOf": [{"required": ["preset"]}, {"required": ["profile"]}],
}
WEIGHTS_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["w1", "w2"],
    "properties": {"w1": _POS, "w2": _POS},
}
AXIS_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["min", "max", "n"],
    "properties": {"min": _POS, "max": _POS, "n": _COUNT, "scale": {"enum": ["log", "linear"]}},
}
CONFIG_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "graph": GRAPH_SCHEMA,
        "graphs": {"type": "array", "items": GRAPH_SCHEMA, "minItems": 2, "maxItems": 2},
        "weights": {"oneOf": [WEIGHTS_SCHEMA, {"type": "array", "items": WEIGHTS_SCHEMA, "minItems": 1}]},
        "kinetics": {
            "type": "object",
            "additionalProperties": False,
            "properties": {k: {"type": "array", "items": _POS} for k in ("alpha", "beta", "k", "h")},
        },
        "spectrum": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"crossover": {"type": "boolean"}},
        },
        "simulation": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "mode": {"enum": ["large", "quotient"]},
                "magnitude": {"type": "number", "exclusiveMinimum": 0, "maximum": 0.1},
                "t_max": _POS,
                "rtol": _POS,
                "atol": _POS,
                "component": {"type": "integer", "minimum": 0},
                "guard": {"type": "boolean"},
            },
        },
        "sweep": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "axis1": AXIS_SCHEMA,
                "axis2": AXIS_SCHEMA,
                "w2": {"type": "array", "items": _POS, "minItems": 2, "maxItems": 2},
                "simulate": {"type": "boolean"},
            },
        },
        "verify": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"instances": _COUNT, "splitting_instances": _COUNT, "condition_instances": _COUNT},
        },
        "seed": {"type": "integer", "minimum": 0, "maximum": 2 ** 64 - 1},
        "threads": _COUNT,
        "out": {"type": "string"},
    },
}

DEFAULT_GRAPHS = [{"preset": "diffusion", "layer1_size": 30, "layer2_size": 30},
                  {"preset": "contact", "layer1_size": 30, "layer2_size": 30}]
DEFAULT_WEIGHTS = [{"w1": 0.6, "w2": 1.0}, {"w1": 0.02, "w2": 1.0}]


def load_config(path):
    if path is None:
        return {}
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    validate_config(cfg)
    return cfg


def validate_config(cfg):
    try:
        jsonschema.validate(cfg, CONFIG_SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"config invalid at {where}: {exc.message}") from exc
    kin = cfg.get("kinetics", {})
    for key, n in (("alpha", 2), ("beta", 3), ("k", 2), ("h", 3)):
        if key in kin and len(kin[key]) != n:
            raise ConfigError(f"kinetics.{key} needs {n} entries")
    sw = cfg.get("sweep", {})
    for ax in ("axis1", "axis2"):
        if ax in sw and sw[ax]["min"] > sw[ax]["max"]:
            raise ConfigError(f"sweep.{ax}: min exceeds max")


def _weights_list(cfg, default):
    w = cfg.get("weights", default)
    if isinstance(w, dict):
        w = [w]
    return [PolarityWeights(d["w1"], d["w2"]) for d in w]


def _spec(cfg):
    try:
        return HillKinetics(HillParameters.from_dict(cfg.get("kinetics", {})))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _graphs(cfg):
    specs = cfg.get("graphs", DEFAULT_GRAPHS)
    return [graph_from_spec(s) for s in specs]


def _write(out: Path, name: str, text: str):
    out.mkdir(parents=True, exist_ok=True)
    (out / name).write_text(text)
    log.info("wrote %s", out / name)


def _num(v) -> str:
    return f"{v:.12g}"


def _json(obj) -> str:
    def conv(o):
        if isinstance(o, (np.floating, float)):
            return float(f"{float(o):.12g}")
        if isinstance(o, (np.integer,)):
            return int(o)
        if isinstance(o, (np.bool_,)):
            return bool(o)
        if isinstance(o, np.ndarray):
            return [conv(v) for v in o.tolist()]
        if isinstance(o, (list, tuple)):
            return [conv(v) for v in o]
        if isinstance(o, dict):
            return {k: conv(v) for k, v in o.items()}
        if isinstance(o, complex):
            return [conv(o.real), conv(o.imag)]
        return o
    return json.dumps(conv(obj), indent=2, sort_keys=True) + "\n"


def _axis(spec, default_n):
    lo, hi, n = spec.get("min", 1e-2), spec.get("max", 2.0), spec.get("n", default_n)
    if spec.get("scale", "log") == "log":
        return log_axis(lo, hi, n)
    return np.linspace(lo, hi, n)


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_graph(cfg, args, out):
    g = graph_from_spec(cfg.get("graph", DEFAULT_GRAPHS[1]))
    rep = analyze_structure(g)
    _write(out, "edges.csv", csvio.edges_csv(g))
    _write(out, "structure.json", _json(rep.as_dict()))
    print(f"vertices {g.n_vertices}  edges {len(g.edges)}  profile {tuple(rep.degree_profile)}")
    print(f"connected {rep.connected}  bipartite {rep.bipartite}  semi_regular {rep.semi_regular}")
    return 0


def cmd_spectrum(cfg, args, out):
    g = graph_from_spec(cfg.get("graph", DEFAULT_GRAPHS[1]))
    w = _weights_list(cfg, {"w1": 0.1, "w2": 1.0})[0]
    wa = weighted_adjacency(g, w)
    q = reduce_adjacency(wa)
    rows = spectrum_rows(wa, q)
    pos = spectral_position(wa, q.lambda2)
    _write(out, "spectrum.csv", csvio.spectrum_csv(rows))
    _write(out, "spectrum.svg", render.spectrum_svg(rows, f"spectrum at w1={w.w1:.6g}, w2={w.w2:.6g}"))
    print(f"lambda2 {_num(q.lambda2)}  index {pos.index}/{pos.n}  is_min {pos.is_min}")
    if cfg.get("spectrum", {}).get("crossover"):
        c = minimality_crossover(g, w2=w.w2)
        print("crossover_w1 " + ("none" if c is None else _num(c)))
    return 0


def cmd_quotient(cfg, args, out):
    g = graph_from_spec(cfg.get("graph", DEFAULT_GRAPHS[1]))
    w = _weights_list(cfg, {"w1": 0.1, "w2": 1.0})[0]
    wa = weighted_adjacency(g, w)
    q = reduce_adjacency(wa)
    lv = lift_eigenvector(q, lifting_matrix(LaminarPartition.from_graph(g)))
    res = {"a": q.a, "b": q.b, "matrix": q.matrix, "lambda2": q.lambda2, "eigvector2": q.eigvector2,
           "lifted": lv}
    _write(out, "quotient.json", _json(res))
    print(f"a {_num(q.a)}  b {_num(q.b)}  lambda2 {_num(q.lambda2)}")
    print("Wbar " + " ".join(_num(v) for v in q.matrix.ravel()))
    return 0


def cmd_hss(cfg, args, out):
    spec = _spec(cfg)
    x0, u0 = solve_hss(spec)
    lin = linearize(spec, x0, u0)
    from .numerics import eig_general
    eig_a = eig_general(lin.A).values
    cls = classify_transfer_signs(lin)
    res = {"x0": x0, "u0": u0, "eig_A": [[z.real, z.imag] for z in eig_a], "DT": lin.DT, "sign_class": cls,
           "A": lin.A, "B": lin.B, "C": lin.C}
    _write(out, "hss.json", _json(res))
    print("x0 " + " ".join(_num(v) for v in x0))
    print("eig_A " + " ".join(f"{_num(z.real)}{'+' if z.imag >= 0 else '-'}{_num(abs(z.imag))}i" for z in eig_a))
    print("DT " + " ".join(_num(v) for v in lin.DT.ravel()))
    print(f"sign_class {cls}")
    return 0


def cmd_stability(cfg, args, out):
    spec = _spec(cfg)
    graphs = _graphs(cfg)
    ws = _weights_list(cfg, DEFAULT_WEIGHTS)
    if len(ws) != len(graphs):
        raise ConfigError("stability needs one weight pair per graph")
    x0, u0 = solve_hss(spec)
    lin = linearize(spec, x0, u0)
    v = evaluate_point(lin, graphs, ws)
    ls = large_scale_instability(lin, [weighted_adjacency(g, w) for g, w in zip(graphs, ws)])
    res = v.as_dict()
    res["large_scale"] = {"max_real": ls.max_real, "unstable": ls.unstable, "method": ls.method}
    if [g.degree_profile.layer(1) for g in graphs] == [(2, 4), (2, 2)]:
        ok, margin = quotient_instability_example(ws[0].w1, ws[1].w1, (ws[0].w2, ws[1].w2), lin)
        res["example_inequality"] = {"unstable": ok, "margin": margin}
    _write(out, "verdict.json", _json(res))
    print(f"margin {_num(v.instability_margin)}  unstable {v.unstable}  monotone {v.monotone_polarity_ok}")
    print(f"lambda2 {' '.join(_num(x) for x in v.lambda2)}  is_min {' '.join(str(b) for b in v.lambda2_is_min)}")
    print(f"typeK {v.typeK_ok} (worst {_num(v.typeK_worst)})  exists {v.exists}  converges {v.converges}")
    print(f"large_scale_max_real {_num(ls.max_real)} ({ls.method})")
    return 0


def cmd_simulate(cfg, args, out):
    spec = _spec(cfg)
    graphs = _graphs(cfg)
    ws = _weights_list(cfg, DEFAULT_WEIGHTS)
    sim = cfg.get("simulation", {})
    t_max = args.t_max if args.t_max is not None else sim.get("t_max", 1000.0)
    res = simulate_pattern(spec, graphs, ws, seed=args.seed, magnitude=sim.get("magnitude", 0.01),
                           mode=sim.get("mode", "large"), t_max=t_max, rtol=sim.get("rtol", 1e-6),
                           atol=sim.get("atol", 1e-9), guard=sim.get("guard", True))
    comp = sim.get("component", 0)
    traj = res.trajectory
    rows = snapshot_rows(traj.final, res.layer_split, spec.n, comp)
    _write(out, "trajectory.csv", traj.to_csv())
    _write(out, "snapshot.csv", csvio.snapshot_csv(rows))
    _write(out, "tissue.svg", render.tissue_svg(rows, float(res.x0[comp]),
                                                f"{res.pattern.label} at t={traj.times[-1]:.6g}"))
    summary = {"class": res.pattern.label, "layer_means": res.pattern.layer_means,
               "separation": res.pattern.separation if np.isfinite(res.pattern.separation) else None,
               "converged": traj.converged, "converged_at": traj.converged_at, "t_final": traj.times[-1],
               "growth_rate": res.growth_rate, "min_time": res.min_time, "seed": args.seed}
    _write(out, "result.json", _json(summary))
    print(f"class {res.pattern.label}  layer_means {' '.join(_num(m) for m in res.pattern.layer_means)}")
    print(f"converged {traj.converged} at {traj.converged_at}  growth_rate {_num(res.growth_rate)}")
    return 0


def cmd_sweep(cfg, args, out):
    spec = _spec(cfg)
    graphs = _graphs(cfg)
    sw = cfg.get("sweep", {})
    n1, n2 = (60, 60)
    if args.grid:
        n1, n2 = args.grid
    ax1 = _axis({**sw.get("axis1", {}), **({"n": n1} if args.grid or "axis1" not in sw else {})}, n1)
    ax2 = _axis({**sw.get("axis2", {}), **({"n": n2} if args.grid or "axis2" not in sw else {})}, n2)
    w2 = tuple(sw.get("w2", (1.0, 1.0)))
    x0, u0 = solve_hss(spec)
    lin = linearize(spec, x0, u0)
    simulate = None
    if sw.get("simulate"):
        sim = cfg.get("simulation", {})
        t_max = args.t_max if args.t_max is not None else sim.get("t_max", 1000.0)

        def simulate(a, b):
            return simulate_pattern(spec, graphs, [PolarityWeights(a, w2[0]), PolarityWeights(b, w2[1])],
                                    seed=args.seed, t_max=t_max, hss=(x0, u0)).pattern.label
    grid = sweep_regions(lin, graphs, ax1, ax2, w2=w2, threads=args.threads or cfg.get("threads", 1),
                         simulate=simulate)
    _write(out, "sweep.csv", csvio.sweep_csv(grid))
    _write(out, "regions.svg", render.region_map_svg(grid))
    flat = [c for row in grid.cells for c in row]
    n_ex = sum(1 for c in flat if c.verdict and c.verdict.exists)
    n_cv = sum(1 for c in flat if c.verdict and c.verdict.converges)
    n_fail = sum(1 for c in flat if c.failure)
    print(f"points {len(flat)}  existence {n_ex}  convergence {n_cv}  failed {n_fail}")
    return 0


def cmd_verify(cfg, args, out):
    from .verify import run_all
    v = cfg.get("verify", {})
    results = run_all(seed=args.seed, instances=v.get("instances", 200),
                      splitting_instances=v.get("splitting_instances", 100),
                      condition_instances=v.get("condition_instances", 500))
    for r in results:
        print(r.line())
    return 0 if all(r.passed for r in results) else 3


HANDLERS = {
    "graph": cmd_graph, "spectrum": cmd_spectrum, "quotient": cmd_quotient, "hss": cmd_hss,
    "stability": cmd_stability, "simulate": cmd_simulate, "sweep": cmd_sweep, "verify": cmd_verify,
}


def _grid(text):
    try:
        a, b = text.lower().split("x")
        a, b = int(a), int(b)
    except ValueError:
        raise argparse.ArgumentTypeError(f"--grid expects NxM, got {text!r}")
    if a < 1 or b < 1 or a * b > 10_000:
        raise argparse.ArgumentTypeError("--grid needs positive sizes with at most 10^4 points")
    return a, b


def _u64(text):
    v = int(text)
    if not 0 <= v < 2 ** 64:
        raise argparse.ArgumentTypeError("--seed must fit in 64 bits")
    return v


def build_parser():
    ap = argparse.ArgumentParser(prog="laminar", description="Laminar pattern analysis on bilayer tissues.")
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--config", help="JSON configuration file")
    ap.add_argument("--seed", type=_u64, default=None)
    ap.add_argument("--out", default=None, help="output directory")
    ap.add_argument("--threads", type=int, default=None)
    ap.add_argument("--t-max", dest="t_max", type=float, default=None)
    ap.add_argument("--grid", type=_grid, default=None, help="sweep grid size NxM")
    return ap


class _ArgError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _ArgError(message)


def run(argv=None) -> int:
    logging.basicConfig(level=os.environ.get("LAMINAR_LOG", "WARNING").upper(),
                        format="%(levelname)s %(name)s: %(message)s")
    ap = build_parser()
    ap.__class__ = _Parser
    try:
        args = ap.parse_args(argv)
        cfg = load_config(args.config)
        if args.seed is None:
            args.seed = cfg.get("seed", 0)
        if args.threads is not None and args.threads < 1:
            raise ConfigError("--threads must be positive")
        if args.t_max is not None and args.t_max <= 0:
            raise ConfigError("--t-max must be positive")
        out = Path(args.out or cfg.get("out", "out"))
        return HANDLERS[args.command](cfg, args, out)
    except _ArgError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ConfigError, GraphError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except (NumericalError, LaminarError) as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
