"""Command line entry point: gen, run, verify, plot, oracle.

Exit codes: 0 ok, 1 infeasible or invalid input, 2 usage, 3 IO.
"""
from __future__ import annotations

import argparse
import csv
import io
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from .evaluation import check_feasible, evaluate
from .instance import Family, GeneratorParams, generate, read_coordinates, read_instance, serialize
from .model import read_solution, serialize_solution
from .search import SearchConfig, hgvns
from .tsp_seed import seed_tour

OK, INFEASIBLE, USAGE, IO_ERROR = 0, 1, 2, 3
CSV_COLUMNS = ("instance", "n", "seed", "run", "s_tsp", "s_fstsp", "gap_pct", "time_s")


class _Infeasible(Exception):
    pass


def _env(name: str, cast):
    raw = os.environ.get(name)
    if raw in (None, ""):
        return None
    try:
        return cast(raw)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{name}={raw!r} is not a valid {cast.__name__}") from None


def _write_text(path, text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")
    return path


# --------------------------------------------------------------------------
# gen

def cmd_gen(family: str, n: int, seed: int, out_path, coords=None, alpha: float = 1.0,
            name: str | None = None) -> Path:
    params = GeneratorParams(family=family, n=n, rng_seed=seed, alpha=alpha, name=name,
                             coords=None if coords is None else read_coordinates(coords))
    inst = generate(params)
    out = Path(out_path)
    if out.is_dir() or str(out_path).endswith(("/", os.sep)):
        out = out / f"{inst.name}.txt"
    return _write_text(out, serialize(inst))


# --------------------------------------------------------------------------
# run

def _one_run(args):
    inst, tour, seed, budget = args
    return hgvns(inst, config=SearchConfig(rng_seed=seed, time_budget=budget), tour=tour)


def cmd_run(instance_path, runs: int = 10, seed: int = 0, budget: float | None = None,
            seed_strategy: str = "auto", tour_file=None, jobs: int = 1,
            csv_path=None, best_path=None) -> tuple[str, list]:
    """Run the pipeline ``runs`` times with seeds seed, seed+1, ...

    Returns the CSV text and the run reports; writes the CSV and the best
    solution when paths are given.
    """
    inst = read_instance(instance_path)
    tour = seed_tour(inst, seed_strategy, rng_seed=seed, tour_file=tour_file)
    tasks = [(inst, tour, seed + r, budget) for r in range(runs)]
    if jobs > 1 and runs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            reports = list(pool.map(_one_run, tasks))      # map keeps run order
    else:
        reports = [_one_run(t) for t in tasks]

    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r, rep in enumerate(reports):
        w.writerow([inst.name, inst.n, rep.seed, r, f"{rep.s_tsp_cost:.2f}", f"{rep.final_cost:.2f}",
                    f"{rep.gap_pct:.2f}", f"{rep.wall_time_s:.2f}"])
    if reports:
        k = len(reports)
        mean = lambda f: sum(map(f, reports)) / k
        w.writerow(["Average", inst.n, "", "", f"{mean(lambda x: x.s_tsp_cost):.2f}",
                    f"{mean(lambda x: x.final_cost):.2f}", f"{mean(lambda x: x.gap_pct):.2f}",
                    f"{mean(lambda x: x.wall_time_s):.2f}"])
    text = buf.getvalue()
    if csv_path is not None:
        _write_text(csv_path, text)
    if best_path is not None and reports:
        best = min(reports, key=lambda x: (x.final_cost, x.seed))
        _write_text(best_path, serialize_solution(best.solution))
    return text, reports


# --------------------------------------------------------------------------
# verify / plot / oracle

def cmd_verify(instance_path, solution_path, out=None, err=None) -> int:
    out, err = out or sys.stdout, err or sys.stderr
    inst = read_instance(instance_path)
    sol = read_solution(solution_path)
    problems = check_feasible(sol, inst)
    if problems:
        for v in problems:
            print(str(v), file=err)
        return INFEASIBLE
    tl = evaluate(sol, inst)
    out.write("position,node,truck_arrive,truck_depart\n")
    for p, v in enumerate(sol.tour):
        out.write(f"{p},{v},{tl.truck_arrive[p]:.6f},{tl.truck_depart[p]:.6f}\n")
    out.write(f"makespan,{tl.makespan:.6f}\n")
    return OK


def cmd_plot(instance_path, solution_path, out_svg) -> Path:
    from .plot import render_svg
    inst = read_instance(instance_path)
    sol = read_solution(solution_path)
    problems = check_feasible(sol, inst)
    if problems:
        raise _Infeasible("; ".join(map(str, problems)))
    return _write_text(out_svg, render_svg(inst, sol))


def cmd_oracle(instance_path, out_path=None) -> str:
    from .oracle import certificate, solve_exact
    inst = read_instance(instance_path)
    text = certificate(inst, solve_exact(inst))
    if out_path is not None:
        _write_text(out_path, text)
    return text


# --------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fstsp", description="Truck-and-drone routing solver.")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate a benchmark instance")
    g.add_argument("family", choices=[f.value for f in Family])
    g.add_argument("n", type=int)
    g.add_argument("seed", type=int)
    g.add_argument("out", help="output file, or directory ending in /")
    g.add_argument("--coords", help="TSPLIB .tsp or 'x y' coordinate file (tsplib family)")
    g.add_argument("--alpha", type=float, default=1.0, help="drone/truck speed ratio (TSP-D families)")
    g.add_argument("--name")

    r = sub.add_parser("run", help="repeated seeded runs, CSV report")
    r.add_argument("instance")
    r.add_argument("--runs", type=int, default=10)
    r.add_argument("--seed", type=int, help="base seed (env FSTSP_SEED, default 0)")
    r.add_argument("--budget", type=float, help="seconds per run (env FSTSP_BUDGET_S)")
    r.add_argument("--seed-strategy", default="auto", choices=("auto", "exact", "heuristic", "import"))
    r.add_argument("--tour", help="tour file for --seed-strategy import")
    r.add_argument("--jobs", type=int, default=1)
    r.add_argument("--csv", help="write the report here instead of stdout")
    r.add_argument("--best", help="best solution file (default <instance>.best.sol)")

    v = sub.add_parser("verify", help="check a solution and print its timeline")
    v.add_argument("instance")
    v.add_argument("solution")

    pl = sub.add_parser("plot", help="render a feasible solution as SVG")
    pl.add_argument("instance")
    pl.add_argument("solution")
    pl.add_argument("out")

    o = sub.add_parser("oracle", help="exhaustive optimum certificate (n <= 9)")
    o.add_argument("instance")
    o.add_argument("--out")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "gen":
            print(cmd_gen(args.family, args.n, args.seed, args.out, args.coords, args.alpha, args.name))
        elif args.command == "run":
            try:
                seed = args.seed if args.seed is not None else _env("FSTSP_SEED", int)
                budget = args.budget if args.budget is not None else _env("FSTSP_BUDGET_S", float)
            except argparse.ArgumentTypeError as exc:
                parser.error(str(exc))
            if args.seed_strategy == "import" and not args.tour:
                parser.error("--seed-strategy import needs --tour")
            best = args.best or f"{Path(args.instance).stem}.best.sol"
            text, _ = cmd_run(args.instance, args.runs, seed or 0, budget, args.seed_strategy,
                              args.tour, args.jobs, args.csv, best)
            if args.csv is None:
                sys.stdout.write(text)
        elif args.command == "verify":
            return cmd_verify(args.instance, args.solution)
        elif args.command == "plot":
            print(cmd_plot(args.instance, args.solution, args.out))
        elif args.command == "oracle":
            text = cmd_oracle(args.instance, args.out)
            if args.out is None:
                sys.stdout.write(text)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return IO_ERROR
    except (_Infeasible, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return INFEASIBLE
    return OK


if __name__ == "__main__":
    sys.exit(main())
