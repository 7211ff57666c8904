"""Command-line experiment runner. Every table is CSV with a ``#`` JSON header line."""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from datetime import datetime, timezone

import numpy as np

from . import circuit, clifford_sim, optimize, parity_map, problem, rqaoa
from . import rng as rng_mod

QAOA_COLUMNS = ["instance_id", "n", "p", "method", "objective_kind", "energy", "r", "lb_r", "c_min", "c_max",
                "cnot_depth_measured", "cnot_count_measured", "cnot_depth_analytic", "cnot_count_analytic",
                "seed", "wall_ms"]

# flag defaults; a JSON config file may set any of these keys, explicit flags win
DEFAULTS = {
    "seed": 0, "out": None, "mode": "exact", "shots": 10000, "m_bases": None, "objective": None,
    "p": [1], "n": [5], "instances": 10, "workers": None, "topology": "complete", "n_init": 10,
    "n_mc": 400, "temperature": 0.2, "method": "both", "variant": "both", "stop_size": 8,
    "kind": "vanilla_complete", "instance_file": None, "no_timing": False, "trace_dir": None,
}


class UsageError(Exception):
    pass


# -- plumbing ---------------------------------------------------------------------

def _emit(rows: list[dict], columns: list[str], meta: dict, out: str | None) -> None:
    buf = io.StringIO()
    stamp = dict(meta, timestamp=datetime.now(timezone.utc).isoformat(timespec="seconds"))
    buf.write("# " + json.dumps(stamp, sort_keys=True) + "\n")
    writer = csv.DictWriter(buf, fieldnames=columns, lineterminator="\n")
    writer.writeheader()
    for r in rows:
        writer.writerow({k: _fmt(r.get(k, "")) for k in columns})
    if out:
        with open(out, "w") as fh:
            fh.write(buf.getvalue())
    else:
        sys.stdout.write(buf.getvalue())


def _fmt(v):
    if isinstance(v, float):
        return repr(round(v, 12))
    return v


def _pmap(fn, items, workers: int):
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, items))


def _instances(cfg: dict, n: int) -> list[problem.Instance]:
    if cfg["instance_file"]:
        return [i for i in _read_instances(cfg["instance_file"]) if i.n == n]
    topo = cfg["topology"]
    return [problem.random_instance(topo, rng_mod.child_seed(cfg["seed"], rng_mod.STREAM_INSTANCE, n, i),
                                    n=n if topo == "complete" else None) for i in range(cfg["instances"])]


def _read_instances(path: str) -> list[problem.Instance]:
    with open(path) as fh:
        text = fh.read().strip()
    if text.startswith("["):
        return [problem.Instance.from_dict(d) for d in json.loads(text)]
    return [problem.Instance.from_dict(json.loads(line)) for line in text.splitlines() if line.strip()]


def _mapping_for(cfg: dict, n: int):
    topo = cfg["topology"]
    if topo == "complete":
        mp = parity_map.encode_complete(n)
        bases = list(parity_map.logical_lines(mp))
        if cfg["m_bases"]:
            bases = bases[:cfg["m_bases"]]
        return mp, bases, None
    if topo == "regular4_fig3":
        mp = parity_map.regular4_mapping(cfg["m_bases"])
        return mp, list(mp.readout_bases), "fig3"
    if topo == "hypergraph_fig9":
        mp = parity_map.hypergraph_mapping()
        return mp, list(mp.readout_bases), "fig9"
    raise UsageError(f"no parity mapping for topology {topo!r}")


def _optimizer(cfg: dict, seed: int) -> optimize.OptimizerConfig:
    shots = cfg["shots"] if cfg["mode"] == "shots" else None
    return optimize.OptimizerConfig(cfg["n_init"], cfg["n_mc"], cfg["temperature"], 0.25, shots, seed)


def _two_se(x) -> float:
    x = np.asarray(x, dtype=float)
    return float(2 * x.std(ddof=1) / math.sqrt(x.size)) if x.size > 1 else 0.0


# -- commands ---------------------------------------------------------------------

def cmd_gen(cfg: dict) -> None:
    lines = []
    for n in cfg["n"]:
        lines += [json.dumps(i.to_dict()) for i in _instances(cfg, n)]
    text = "\n".join(lines) + "\n"
    if cfg["out"]:
        with open(cfg["out"], "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_encode(cfg: dict) -> None:
    mp, _, _ = _mapping_for(cfg, cfg["n"][0])
    text = json.dumps(mp.to_dict(), indent=1) + "\n"
    if cfg["out"]:
        with open(cfg["out"], "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_lower_bound(cfg: dict) -> None:
    rows = []
    for n in cfg["n"]:
        mp, bases, _ = _mapping_for(cfg, n)
        insts = _instances(cfg, n)
        ext = [problem.brute_force_extrema(i) for i in insts]
        for p in cfg["p"]:
            for kind in cfg["objective"]:
                res = clifford_sim.lower_bound_batch(insts, mp, bases, p, kind, ext)
                r0 = [x.r0 for x in res]
                rows.append({"n": n, "parity_of_n": "even" if n % 2 == 0 else "odd", "p": p,
                             "objective_kind": kind, "m_bases": len(bases), "mean_r0": float(np.mean(r0)),
                             "solved_fraction": float(np.mean([x.solved for x in res])),
                             "samples": len(res), "two_se": _two_se(r0)})
    cols = ["n", "parity_of_n", "p", "objective_kind", "m_bases", "mean_r0", "solved_fraction", "samples", "two_se"]
    _emit(rows, cols, {"command": "lower-bound", "config": cfg}, cfg["out"])


def cmd_census(cfg: dict) -> None:
    rows = []
    topo = cfg["topology"]
    if topo in ("complete", "complete7"):
        mp = parity_map.encode_complete(7)
        runs = [(mp, list(mp.readout_bases), 7)]
    elif topo in ("regular4", "regular4_fig3"):
        m_list = [cfg["m_bases"]] if cfg["m_bases"] else [5, 8]
        runs = [(parity_map.regular4_mapping(m), None, m) for m in m_list]
    else:
        raise UsageError("census topology must be complete7 or regular4")
    for mp, bases, m in runs:
        bases = bases or list(mp.readout_bases)
        for row in clifford_sim.census(mp, bases, cfg["p"]):
            rows.append({"topology": topo, "m_bases": len(bases), "p": row.p, "total_classes": row.total_classes,
                         "non_trivial": row.non_trivial, "percent": f"{row.percent:.2f}",
                         "provenance": mp.provenance})
    cols = ["topology", "m_bases", "p", "total_classes", "non_trivial", "percent", "provenance"]
    _emit(rows, cols, {"command": "census", "config": cfg}, cfg["out"])


def _qaoa_job(job) -> list[dict]:
    cfg, n, p, idx, inst = job
    mp, bases, fixed = _mapping_for(cfg, inst.n) if cfg["method"] != "vanilla" else (None, None, None)
    ext = problem.brute_force_extrema(inst)
    seed = rng_mod.child_seed(cfg["seed"], rng_mod.STREAM_OPTIMIZER, n, p, idx)
    ocfg = _optimizer(cfg, seed)
    out = []
    base = {"instance_id": inst.label or idx, "n": inst.n, "p": p, "c_min": ext.c_min, "c_max": ext.c_max, "seed": seed}
    if cfg["method"] in ("vanilla", "both") and inst.pairwise:
        t = time.perf_counter()
        res = optimize.run_vanilla_qaoa(inst, p, ocfg, ext, mp,
                                        analytic_kind=f"vanilla_{fixed}" if fixed else None)
        out.append(_qaoa_row(base, "vanilla", "energy", res, None, t, cfg))
    if cfg["method"] in ("parity", "both"):
        for kind in cfg["objective"]:
            t = time.perf_counter()
            res = optimize.run_parity_qaoa(inst, mp, bases, p, kind, ocfg, ext,
                                           analytic_kind=f"parity_{fixed}" if fixed else None)
            lb = None
            if inst.pairwise and kind in ("best", "mean"):
                lb = clifford_sim.lower_bound_batch([inst], mp, bases, p, kind, [ext])[0].r0
            out.append(_qaoa_row(base, "parity", kind, res, lb, t, cfg))
    return out


def _qaoa_row(base, method, kind, res, lb, t0, cfg) -> dict:
    measured, analytic = res.resources
    return dict(base, method=method, objective_kind=kind, energy=res.best_objective, r=res.ratio,
                lb_r="" if lb is None else lb, cnot_depth_measured=measured.cnot_depth,
                cnot_count_measured=measured.cnot_count,
                cnot_depth_analytic=analytic.cnot_depth if analytic else "",
                cnot_count_analytic=analytic.cnot_count if analytic else "",
                wall_ms="" if cfg["no_timing"] else round((time.perf_counter() - t0) * 1000),
                _meta=res.metadata)


def _workers(cfg) -> int:
    return cfg["workers"] or os.cpu_count() or 1


def cmd_qaoa(cfg: dict) -> None:
    jobs = [(cfg, n, p, i, inst) for n in cfg["n"] for p in cfg["p"] for i, inst in enumerate(_instances(cfg, n))]
    rows = [r for chunk in _pmap(_qaoa_job, jobs, _workers(cfg)) for r in chunk]
    meta = {"command": "qaoa", "config": cfg, "mode": cfg["mode"],
            "copies_rule": "ceil(K/N) in shots mode, 1 in exact mode",
            "copies": sorted({r["_meta"].get("copies", 1) for r in rows if r["method"] == "vanilla"})}
    _emit(rows, QAOA_COLUMNS, meta, cfg["out"])


def _rqaoa_job(job) -> list[dict]:
    cfg, n, p, idx, inst = job
    seed = rng_mod.child_seed(cfg["seed"], rng_mod.STREAM_RQAOA, n, p, idx)
    ocfg = _optimizer(cfg, seed)
    ext = problem.brute_force_extrema(inst)
    variants = ["vanilla", "parity"] if cfg["variant"] == "both" else [cfg["variant"]]
    kind = cfg["objective"][0]
    out = []
    for v in variants:
        t = time.perf_counter()
        res = rqaoa.run_rqaoa(inst, v, p, cfg["stop_size"], ocfg, kind)
        if cfg["trace_dir"]:
            res.trace.dump(os.path.join(cfg["trace_dir"], f"rqaoa_{v}_n{n}_p{p}_{idx}.json"))
        out.append({"instance_id": inst.label or idx, "n": n, "p": p, "method": f"rqaoa_{v}",
                    "objective_kind": kind if v == "parity" else "energy", "energy": res.energy, "r": res.ratio,
                    "c_min": ext.c_min, "c_max": ext.c_max, "seed": seed,
                    "wall_ms": "" if cfg["no_timing"] else round((time.perf_counter() - t) * 1000)})
    return out


def cmd_rqaoa(cfg: dict) -> None:
    if cfg["topology"] != "complete" and not cfg["instance_file"]:
        raise UsageError("rqaoa runs on complete graphs")
    jobs = [(cfg, n, p, i, inst) for n in cfg["n"] for p in cfg["p"] for i, inst in enumerate(_instances(cfg, n))]
    rows = [r for chunk in _pmap(_rqaoa_job, jobs, _workers(cfg)) for r in chunk]
    _emit(rows, QAOA_COLUMNS, {"command": "rqaoa", "config": cfg}, cfg["out"])


def cmd_resources(cfg: dict) -> None:
    rows = []
    kind = cfg["kind"]
    for n in cfg["n"]:
        for p in cfg["p"]:
            rep = circuit.analytic_resources(kind, p, n)
            row = {"kind": kind, "n": n if kind.endswith("complete") else "", "p": p,
                   "cnot_depth_analytic": rep.cnot_depth, "cnot_count_analytic": rep.cnot_count,
                   "cnot_depth_measured": "", "cnot_count_measured": ""}
            measured = _measured_resources(kind, n, p, cfg["seed"])
            if measured is not None:
                row["cnot_depth_measured"], row["cnot_count_measured"] = measured.cnot_depth, measured.cnot_count
            rows.append(row)
        if not kind.endswith("complete"):
            break
    cols = ["kind", "n", "p", "cnot_depth_analytic", "cnot_count_analytic", "cnot_depth_measured",
            "cnot_count_measured"]
    _emit(rows, cols, {"command": "resources", "config": cfg}, cfg["out"])


def _measured_resources(kind: str, n: int, p: int, seed: int):
    """Gate-level counts for the circuit matching ``kind``, at generic angles."""
    arch, topo = kind.split("_", 1)
    if topo == "complete":
        inst = problem.random_instance("complete", seed, n=n)
        mp = parity_map.encode_complete(n) if arch == "parity" else None
    elif topo == "fig3":
        inst = problem.random_instance("regular4_fig3", seed)
        mp = parity_map.regular4_mapping() if arch == "parity" else None
    else:
        inst = problem.random_instance("hypergraph_fig9", seed)
        mp = parity_map.hypergraph_mapping() if arch == "parity" else None
    if arch == "vanilla":
        if not inst.pairwise:
            return None
        params = circuit.ParamVector((0.1,) * p, (0.2,) * p)
        return circuit.cnot_metrics(circuit.build_vanilla_circuit(inst, params))
    params = circuit.ParamVector((0.1,) * p, (0.2,) * p, (0.3,) * p)
    fields = parity_map.physical_fields(inst, mp, allow_missing=True)
    return circuit.cnot_metrics(circuit.build_parity_circuit(mp, fields, params))


COMMANDS = {
    "gen": cmd_gen, "encode": cmd_encode, "lower-bound": cmd_lower_bound, "census": cmd_census,
    "qaoa": cmd_qaoa, "rqaoa": cmd_rqaoa, "resources": cmd_resources,
}


# -- argument handling -----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="parityqaoa", description="Vanilla and parity QAOA experiments.")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", help="JSON file with default values for any flag")
        sp.add_argument("--seed", type=int)
        sp.add_argument("--out")
        sp.add_argument("--mode", choices=["exact", "shots"])
        sp.add_argument("--shots", type=int)
        sp.add_argument("--m-bases", dest="m_bases", type=int)
        sp.add_argument("--objective", nargs="+", choices=["mean", "best", "shot_min"])
        sp.add_argument("--p", nargs="+", type=int)
        sp.add_argument("--n", nargs="+", type=int)
        sp.add_argument("--instances", type=int)
        sp.add_argument("--workers", type=int)
        sp.add_argument("--topology", choices=["complete", "complete7", "regular4", "regular4_fig3",
                                               "hypergraph_fig9"])
        sp.add_argument("--instance-file", dest="instance_file")
        sp.add_argument("--n-init", dest="n_init", type=int)
        sp.add_argument("--n-mc", dest="n_mc", type=int)
        sp.add_argument("--temperature", type=float)
        sp.add_argument("--method", choices=["vanilla", "parity", "both"])
        sp.add_argument("--variant", choices=["vanilla", "parity", "both"])
        sp.add_argument("--stop-size", dest="stop_size", type=int)
        sp.add_argument("--kind", choices=["vanilla_complete", "parity_complete", "vanilla_fig3", "parity_fig3",
                                           "vanilla_fig9", "parity_fig9"])
        sp.add_argument("--trace-dir", dest="trace_dir")
        sp.add_argument("--no-timing", dest="no_timing", action="store_const", const=True,
                        help="leave wall_ms empty so repeated runs give identical bodies")
    return ap


def resolve_config(args: argparse.Namespace) -> dict:
    cfg = dict(DEFAULTS)
    if args.config:
        try:
            with open(args.config) as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config: {exc}") from exc
        unknown = set(data) - set(DEFAULTS)
        if unknown:
            raise UsageError(f"unknown config keys: {sorted(unknown)}")
        cfg.update(data)
    for k in DEFAULTS:
        v = getattr(args, k, None)
        if v is not None:
            cfg[k] = v
    if cfg["objective"] is None:
        # parity RQAOA uses the basis-averaged objective, everything else the best basis
        cfg["objective"] = ["mean"] if args.command == "rqaoa" else ["best"]
    for k in ("p", "n", "objective"):
        if not isinstance(cfg[k], list):
            cfg[k] = [cfg[k]]
    _validate(cfg)
    cfg["command"] = args.command
    return cfg


def _validate(cfg: dict) -> None:
    if any(p < 1 for p in cfg["p"]):
        raise UsageError("--p values must be >= 1")
    if any(n < 2 for n in cfg["n"]):
        raise UsageError("--n values must be >= 2")
    if cfg["instances"] < 1:
        raise UsageError("--instances must be >= 1")
    if cfg["mode"] not in ("exact", "shots"):
        raise UsageError("--mode must be exact or shots")
    if cfg["mode"] == "shots" and cfg["shots"] < 1:
        raise UsageError("--shots must be >= 1")
    if cfg["n_init"] < 1 or cfg["n_mc"] < 1 or cfg["temperature"] <= 0:
        raise UsageError("optimizer budgets must be positive")
    if cfg["stop_size"] < 2:
        raise UsageError("--stop-size must be >= 2")
    if cfg["workers"] is not None and cfg["workers"] < 1:
        raise UsageError("--workers must be >= 1")


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = resolve_config(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    try:
        COMMANDS[args.command](cfg)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - any runtime failure maps to exit 1
        print(f"runtime error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
