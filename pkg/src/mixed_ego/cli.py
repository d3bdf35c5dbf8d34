"""Batch benchmark harness: run campaigns, persist traces, summarize results.

Subcommands::

    mixed-ego run --config campaign.json --out results/ [--seed-base 0] [--jobs 1]
    mixed-ego summarize --out results/
    mixed-ego list-problems

A campaign config is JSON: problem names, algorithm variants, repetition
count (or explicit seeds), budgets, and optimizer settings.  Each
(problem, algorithm, seed) cell writes one history CSV plus a JSON
manifest; the campaign writes a summary CSV of per-iteration medians and
quartiles.  Reruns are byte-identical except for timestamps and wall-time
columns.

Exit codes: 0 ok, 1 runtime failure in some cell, 2 config error.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .acquisition import AcquisitionConfig
from .metrics import data_profile, igd_plus, pareto_filter
from .optimize import (OptimizerConfig, ParetoArchive, run_ego, run_embedded,
                       run_segomoe, run_sego)
from .pls import make_embedding
from .problems import available_problems, get_problem

ALGORITHMS = ("ego", "sego", "segomoe", "embedded")
PROFILE_TAUS = (0.02, 0.005)


class ConfigError(ValueError):
    pass


def _build_optimizer_config(spec: dict, seed: int, problem) -> OptimizerConfig:
    acq_kind = spec.get("acquisition")
    if acq_kind is None:
        acq_kind = "ehvi" if problem.n_obj > 1 else (
            "wb2s" if problem.n_ineq + problem.n_eq else "ei")
    acq = AcquisitionConfig(kind=acq_kind, gamma=spec.get("gamma", 1.0),
                            psi=spec.get("psi", "max"))
    emb = None
    if spec.get("embedding"):
        e = spec["embedding"]
        emb = make_embedding(e.get("kind", "random-gaussian"),
                             problem.space.n_vars, e["d_e"], e.get("seed", 0))
    return OptimizerConfig(
        doe_size=spec.get("doe_size"),
        budget=spec.get("budget"),
        seed=seed,
        tolerance=spec.get("tolerance", 1e-4),
        acquisition=acq,
        kernel=spec.get("kernel", "cr"),
        hier_mode=spec.get("hier_mode"),
        n_components=spec.get("n_components"),
        embedding=emb,
        multistart=spec.get("multistart", 5),
        fit_maxiter=spec.get("fit_maxiter", 120),
        n_random=spec.get("n_random", 256),
        n_local=spec.get("n_local", 2),
        local_maxiter=spec.get("local_maxiter", 40),
    )


def _run_cell(args: dict) -> dict:
    """One (problem, algorithm, seed) run; separate function so jobs can fork."""
    problem = get_problem(args["problem"])
    config = _build_optimizer_config(args["spec"], args["seed"], problem)
    algo = args["algorithm"]
    out = Path(args["out"])
    stem = f"{args['problem']}__{algo}__s{args['seed']}"
    archive = None
    if algo == "ego":
        history = run_ego(problem, config)
    elif algo == "sego":
        history = run_sego(problem, config)
    elif algo == "embedded":
        history = run_embedded(problem, config)
    else:
        history, archive = run_segomoe(problem, config)
    history.to_csv(out / f"{stem}.csv")
    manifest = history.manifest(algo)
    (out / f"{stem}.manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True))
    if archive is not None and archive.F.size:
        _write_archive(out / f"{stem}.archive.csv", archive)
    return {"stem": stem, "problem": args["problem"], "algorithm": algo,
            "seed": args["seed"]}


def _write_archive(path: Path, archive: ParetoArchive):
    q = archive.F.shape[1]
    with open(path, "w") as fh:
        fh.write(",".join(["set"] + [f"f{j}" for j in range(q)]) + "\n")
        for row in archive.F:
            fh.write(",".join(["database"] + [f"{v:.17g}" for v in row]) + "\n")
        if archive.predicted_pf is not None:
            for row in archive.predicted_pf:
                fh.write(",".join(["predicted"] + [f"{v:.17g}" for v in row]) + "\n")


def _read_history(path: Path) -> dict:
    with open(path) as fh:
        rows = list(csv.DictReader(fh))
    if not rows:
        return {"best": np.zeros(0), "F": np.zeros((0, 0)), "feasible": np.zeros(0, bool)}
    q = sum(1 for k in rows[0] if k.startswith("y"))
    best = np.array([float(r["best_feasible"]) for r in rows])
    F = np.array([[float(r[f"y{j}"]) for j in range(q)] for r in rows])
    feas = np.array([r["feasible"] == "1" for r in rows])
    return {"best": best, "F": F, "feasible": feas}


def _summary_rows(cells: list, out: Path) -> list:
    """Per (problem, algorithm, iteration): quartiles of best-so-far, IGD+."""
    groups: dict = {}
    for cell in cells:
        data = _read_history(out / f"{cell['stem']}.csv")
        groups.setdefault((cell["problem"], cell["algorithm"]), []).append(data)
    rows = []
    for (prob_name, algo), runs in sorted(groups.items()):
        problem = get_problem(prob_name)
        front = None
        if problem.front_sampler is not None:
            front = problem.front_sampler(500)
        n_it = max(len(r["best"]) for r in runs)
        igd_traces = []
        if front is not None:
            for r in runs:
                trace = []
                for t in range(len(r["F"])):
                    feas = r["feasible"][: t + 1]
                    if feas.any():
                        pf = pareto_filter(r["F"][: t + 1][feas])
                        trace.append(igd_plus(pf, front))
                    else:
                        trace.append(np.nan)
                igd_traces.append(np.array(trace))
        import warnings as _warnings
        for t in range(n_it):
            vals = np.array([r["best"][min(t, len(r["best"]) - 1)] for r in runs])
            with _warnings.catch_warnings():
                _warnings.simplefilter("ignore", RuntimeWarning)
                med, q1, q3 = (np.nanmedian(vals), np.nanpercentile(vals, 25),
                               np.nanpercentile(vals, 75))
            row = {"problem": prob_name, "algorithm": algo, "iteration": t + 1,
                   "best_median": med, "best_q1": q1, "best_q3": q3}
            if igd_traces:
                iv = np.array([tr[min(t, len(tr) - 1)] for tr in igd_traces])
                with _warnings.catch_warnings():
                    _warnings.simplefilter("ignore", RuntimeWarning)
                    row["igd_plus_median"] = np.nanmedian(iv)
            rows.append(row)
    return rows


def _write_summary(rows: list, path: Path):
    cols = ["problem", "algorithm", "iteration", "best_median", "best_q1",
            "best_q3", "igd_plus_median"]
    with open(path, "w") as fh:
        fh.write(",".join(cols) + "\n")
        for r in rows:
            out = []
            for c in cols:
                v = r.get(c, "")
                out.append(f"{v:.17g}" if isinstance(v, float) and np.isfinite(v)
                           else ("" if v == "" or (isinstance(v, float) and np.isnan(v))
                                 else str(v)))
            fh.write(",".join(out) + "\n")


def cmd_run(args) -> int:
    try:
        spec = json.loads(Path(args.config).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    problems = spec.get("problems", [])
    algorithms = spec.get("algorithms", [])
    for p in problems:
        if p not in available_problems():
            print(f"config error: unknown problem {p!r}", file=sys.stderr)
            return 2
        if get_problem(p).evaluator is None:
            print(f"config error: problem {p!r} is a schema without an evaluator",
                  file=sys.stderr)
            return 2
    for a in algorithms:
        if a not in ALGORITHMS:
            print(f"config error: unknown algorithm {a!r}", file=sys.stderr)
            return 2
    reps = int(spec.get("repetitions", 1))
    if reps < 1:
        print("config error: repetitions must be >= 1", file=sys.stderr)
        return 2
    seeds = spec.get("seeds") or [args.seed_base + i for i in range(reps)]
    if len(set(seeds)) != len(seeds):
        print("config error: seeds must be distinct", file=sys.stderr)
        return 2
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    cells = [{"problem": p, "algorithm": a, "seed": s, "spec": spec, "out": str(out)}
             for p in problems for a in algorithms for s in seeds]
    done, failures = [], []
    if args.jobs > 1 and len(cells) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            futures = {pool.submit(_run_cell, c): c for c in cells}
            for fut, cell in futures.items():
                try:
                    done.append(fut.result())
                except Exception as exc:
                    failures.append({"cell": {k: cell[k] for k in ("problem", "algorithm", "seed")},
                                     "error": str(exc)})
    else:
        for cell in cells:
            try:
                done.append(_run_cell(cell))
            except Exception as exc:
                failures.append({"cell": {k: cell[k] for k in ("problem", "algorithm", "seed")},
                                 "error": str(exc)})
    rows = _summary_rows(done, out)
    _write_summary(rows, out / "summary.csv")
    campaign = {"config": spec, "seeds": seeds, "cells_ok": len(done),
                "failures": failures}
    (out / "campaign.json").write_text(json.dumps(campaign, indent=2, sort_keys=True))
    for f in failures:
        print(f"cell failed: {f['cell']} -> {f['error']}", file=sys.stderr)
    return 1 if failures else 0


def cmd_summarize(args) -> int:
    out = Path(args.out)
    manifests = sorted(out.glob("*.manifest.json"))
    cells, warnings = [], 0
    optima = {}
    for mf in manifests:
        try:
            meta = json.loads(mf.read_text())
            stem = mf.name[: -len(".manifest.json")]
            if not (out / f"{stem}.csv").exists():
                raise FileNotFoundError(f"{stem}.csv missing")
            _read_history(out / f"{stem}.csv")
            cells.append({"stem": stem, "problem": meta["problem"],
                          "algorithm": meta["algorithm"], "seed": meta["seed"]})
        except Exception as exc:
            warnings += 1
            print(f"warning: skipping {mf.name}: {exc}", file=sys.stderr)
    rows = _summary_rows(cells, out)
    _write_summary(rows, out / "summary.csv")
    histories = {}
    for cell in cells:
        problem = get_problem(cell["problem"])
        if problem.n_obj == 1 and problem.optimum is not None:
            optima[cell["problem"]] = problem.optimum
            data = _read_history(out / f"{cell['stem']}.csv")
            histories[(cell["problem"], cell["seed"], cell["algorithm"])] = data["best"]
    for tau in PROFILE_TAUS:
        curve = data_profile(histories, tau, optima) if histories else np.zeros((0, 2))
        with open(out / f"data_profile_tau{tau:g}.csv", "w") as fh:
            fh.write("evaluations,solved_fraction\n")
            for b, frac in curve:
                fh.write(f"{int(b)},{frac:.17g}\n")
    (out / "summarize_meta.json").write_text(
        json.dumps({"cells": len(cells), "warnings": warnings}, indent=2, sort_keys=True))
    return 0


def cmd_list_problems(_args) -> int:
    for name in available_problems():
        p = get_problem(name)
        kind = "schema" if p.evaluator is None else f"{p.n_obj} obj, {p.n_ineq} ineq"
        print(f"{name:18s} d'={p.space.relaxed_dim:<4d} {kind}")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="mixed-ego",
                                     description="surrogate-based optimization benchmark harness")
    sub = parser.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", help="run a campaign from a JSON config")
    p_run.add_argument("--config", required=True)
    p_run.add_argument("--out", required=True)
    p_run.add_argument("--seed-base", type=int, default=0, dest="seed_base")
    p_run.add_argument("--jobs", type=int, default=1)
    p_run.set_defaults(func=cmd_run)
    p_sum = sub.add_parser("summarize", help="recompute summaries and data profiles")
    p_sum.add_argument("--out", required=True)
    p_sum.set_defaults(func=cmd_summarize)
    p_list = sub.add_parser("list-problems", help="list registered problems")
    p_list.set_defaults(func=cmd_list_problems)
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:
        print(f"runtime failure: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
