"""Command line front end: generate, solve, scaling, sweep, verify.

Tabular output is CSV preceded by one ``#``-prefixed JSON metadata line that
echoes the resolved configuration.  Exit codes: 0 success, 1 usage error,
2 guard or validity error, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__, analytics
from .analytics import NumericalFailure
from .classical import run_classical_nested
from .csp import CspInstance, InvalidInstanceError, TooLargeError, graph_coloring_instance, random_instance
from .nested import ANALYTIC, EXACT, run_nested, run_unstructured

EXIT_OK, EXIT_USAGE, EXIT_INVALID, EXIT_NUMERICAL = 0, 1, 2, 3
ENGINES = ("quantum-nested", "quantum-unstructured", "classical")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _config(args: argparse.Namespace) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "force")}


def _config_sha(config: dict) -> str:
    return hashlib.sha256(json.dumps(config, sort_keys=True).encode()).hexdigest()[:12]


def render_csv(config: dict, header: list[str], rows: list[list], extra: dict | None = None) -> str:
    meta = {"tool": "nested-qsearch", "version": __version__, "config": config}
    if extra:
        meta.update(extra)
    sha = _config_sha(config)
    buf = io.StringIO()
    buf.write("# " + json.dumps(meta, sort_keys=True) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header + ["config_sha"])
    for row in rows:
        w.writerow([_fmt(v) for v in row] + [sha])
    return buf.getvalue()


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, (tuple, list)):
        return " ".join(str(x) for x in v)
    if v is None:
        return ""
    return v


def _emit(text: str, out: str | None, force: bool = True):
    if out is None:
        sys.stdout.write(text)
        return
    path = Path(out)
    if path.exists() and not force:
        raise UsageError(f"{path} exists; pass --force to overwrite")
    path.write_text(text)


# --- generate -----------------------------------------------------------------

def _parse_edge(text: str) -> tuple[int, int]:
    try:
        u, v = text.split(",")
        return int(u), int(v)
    except ValueError:
        raise argparse.ArgumentTypeError(f"edge {text!r} is not of the form u,v")


def cmd_generate(args) -> int:
    if args.kind == "graph":
        inst = graph_coloring_instance(args.edges or [], args.nodes, args.colors)
    else:
        inst = random_instance(args.mu, args.b, args.k, args.xi, args.seed)
    _emit(json.dumps(inst.to_dict(), sort_keys=True) + "\n", args.output, args.force)
    return EXIT_OK


# --- solve --------------------------------------------------------------------

def derived_seed(seed: int, rep: int) -> int:
    return int(np.random.SeedSequence([seed, rep]).generate_state(1)[0])


def solve_records(inst: CspInstance, engine: str, cut: int | None, mode: str, seed: int,
                  reps: int, max_repetitions: int) -> list[dict]:
    if engine == "quantum-nested" or engine == "classical":
        if cut is None:
            cut = max(1, min(inst.mu - 1, round(analytics.optimal_cut(1.0, inst.k) * inst.mu)))
    records = []
    for rep in range(reps):
        s = derived_seed(seed, rep)
        if engine == "quantum-nested":
            res = run_nested(inst, cut, mode, seed=s, max_repetitions=max_repetitions).to_dict()
        elif engine == "quantum-unstructured":
            res = run_unstructured(inst, seed=s, max_repetitions=max_repetitions).to_dict()
        else:
            res = run_classical_nested(inst, cut, seed=s).to_dict()
        res["rep"] = rep
        res["cut"] = cut
        records.append(res)
    return records


def _summary(records: list[dict], engine: str) -> dict:
    if engine == "classical":
        wins = [r["solution"] is not None for r in records]
        cost = [r["total_iterations"] for r in records]
        p = None
    else:
        wins = [r["is_solution"] for r in records]
        cost = [r["total_calls"] for r in records]
        p = records[0]["exact_success_probability"] if records else None
    n = len(records)
    rate = sum(wins) / n if n else 0.0
    out = {"engine": engine, "runs": n, "successes": int(sum(wins)), "success_rate": rate,
           "mean_cost": float(np.mean(cost)) if n else None, "exact_success_probability": p,
           "status": "solved" if any(wins) else "no solution found"}
    if p is not None and n and 0 < p < 1:
        out["z_score"] = (rate - p) / math.sqrt(p * (1 - p) / n)
    return out


def cmd_solve(args) -> int:
    inst = CspInstance.from_json(Path(args.instance).read_text())
    mode = EXACT if args.mode == "exact" else ANALYTIC
    records = solve_records(inst, args.engine, args.cut, mode, args.seed, args.reps, args.max_repetitions)
    config = _config(args)
    summary = _summary(records, args.engine)
    if args.format == "json":
        text = json.dumps({"config": config, "summary": summary, "runs": records}, sort_keys=True, indent=1) + "\n"
    elif args.engine == "classical":
        header = ["rep", "seed", "success", "solution", "partial_samples_drawn", "descendants_checked",
                  "total_iterations", "cycles", "status"]
        rows = [[r["rep"], r["seed"], int(r["solution"] is not None), r["solution"], r["partial_samples_drawn"],
                 r["descendants_checked"], r["total_iterations"], r["cycles"], r["status"]] for r in records]
        text = render_csv(config, header, rows, {"summary": summary})
    else:
        header = ["rep", "seed", "success", "assignment", "calls_I_c", "calls_I_t", "total_calls",
                  "repetitions", "exact_success_probability", "status"]
        rows = [[r["rep"], r["seed"], int(r["is_solution"]), r["assignment"], r["oracle_calls"].get("I_c", 0),
                 r["oracle_calls"].get("I_t", 0), r["total_calls"], r["repetitions"],
                 r["exact_success_probability"], r["status"]] for r in records]
        text = render_csv(config, header, rows, {"summary": summary})
    _emit(text, args.output)
    if summary["successes"] == 0:
        print("no solution found", file=sys.stderr)
    return EXIT_OK


# --- scaling and sweep --------------------------------------------------------

def cmd_scaling(args) -> int:
    sols = [analytics.nesting_recurrences(args.k, args.ratio, N) for N in args.depth]
    header, rows = analytics.scaling_table(sols)
    _emit(render_csv(_config(args), header, rows), args.output)
    return EXIT_OK


def sweep_rows(mu: int, b: int, k: int, ratios: list[float], depth: int = 1) -> list[list]:
    rows = []
    for ratio in ratios:
        x_star = analytics.optimal_cut(ratio, k)
        alpha0 = analytics.nesting_recurrences(k, ratio, depth).alpha_0
        t_c = [analytics.t_c_analytic(mu, b, k, ratio, i) for i in range(mu + 1)]
        t_q = [analytics.t_q_analytic(mu, b, k, ratio, i) for i in range(mu + 1)]
        best_c, best_q = int(np.argmin(t_c)), int(np.argmin(t_q))
        for i in range(mu + 1):
            rows.append([ratio, i, t_c[i], t_q[i], x_star, alpha0, int(i == best_c), int(i == best_q)])
    return rows


def cmd_sweep(args) -> int:
    header = ["beta_ratio", "i", "T_c", "T_q", "x_star", "alpha_0", "min_T_c", "min_T_q"]
    rows = sweep_rows(args.mu, args.b, args.k, args.ratio, args.depth)
    _emit(render_csv(_config(args), header, rows), args.output)
    return EXIT_OK


# --- verify -------------------------------------------------------------------

def cmd_verify(args) -> int:
    from .checks import ALL_CHECKS, run_all

    names = args.only or list(ALL_CHECKS)
    unknown = [n for n in names if n not in ALL_CHECKS]
    if unknown:
        raise UsageError(f"unknown checks {unknown}; choose from {list(ALL_CHECKS)}")
    results = run_all(names)
    for r in results:
        print(r.line())
    failed = sum(not r.passed for r in results)
    print(f"{len(results) - failed}/{len(results)} checks passed")
    return EXIT_OK if not failed else EXIT_NUMERICAL


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="nested-qsearch", description="Nested quantum search simulator and cost analytics.")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("generate", help="write an instance JSON file")
    gsub = g.add_subparsers(dest="kind", required=True, parser_class=_Parser)
    gg = gsub.add_parser("graph", help="graph coloring instance")
    gg.add_argument("--nodes", type=int, required=True)
    gg.add_argument("--edges", type=_parse_edge, nargs="*", metavar="U,V")
    gg.add_argument("--colors", type=int, required=True)
    gr = gsub.add_parser("random", help="uniform random nogoods")
    gr.add_argument("--mu", type=int, required=True)
    gr.add_argument("--b", type=int, required=True)
    gr.add_argument("--k", type=int, required=True)
    gr.add_argument("--xi", type=int, required=True)
    gr.add_argument("--seed", type=int, default=0)
    for q in (gg, gr):
        q.add_argument("-o", "--output")
        q.add_argument("--force", action="store_true", help="overwrite an existing output file")
        q.set_defaults(func=cmd_generate)

    s = sub.add_parser("solve", help="run a search engine on an instance")
    s.add_argument("instance")
    s.add_argument("--engine", choices=ENGINES, default="quantum-nested")
    s.add_argument("--cut", type=int, help="cut level i (default round(x* mu))")
    s.add_argument("--mode", choices=("exact", "analytic"), default="exact")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--reps", type=int, default=1, help="independent runs")
    s.add_argument("--max-repetitions", type=int, default=1, help="retries within one run")
    s.add_argument("--format", choices=("csv", "json"), default="csv")
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_solve)

    sc = sub.add_parser("scaling", help="nesting recurrence table")
    sc.add_argument("--k", type=int, default=2)
    sc.add_argument("--ratio", type=float, default=1.0)
    sc.add_argument("--depth", type=int, nargs="+", default=[1, 2, 3])
    sc.add_argument("-o", "--output")
    sc.set_defaults(func=cmd_scaling)

    sw = sub.add_parser("sweep", help="analytic costs over cut levels and beta/beta_c")
    sw.add_argument("--mu", type=int, default=10)
    sw.add_argument("--b", type=int, default=2)
    sw.add_argument("--k", type=int, default=2)
    sw.add_argument("--ratio", type=float, nargs="+", default=[1.0])
    sw.add_argument("--depth", type=int, default=1)
    sw.add_argument("-o", "--output")
    sw.set_defaults(func=cmd_sweep)

    v = sub.add_parser("verify", help="run the acceptance checks")
    v.add_argument("--only", nargs="+")
    v.set_defaults(func=cmd_verify)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (InvalidInstanceError, TooLargeError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except NumericalFailure as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
