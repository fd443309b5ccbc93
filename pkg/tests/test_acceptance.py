"""End-to-end acceptance checks, one test per criterion.

Each test prints a single PASS/FAIL line with the measured figure.
"""
import time
from pathlib import Path

import numpy as np
import pytest

from fstsp.cli import cmd_run
from fstsp.evaluation import check_feasible, evaluate
from fstsp.instance import GeneratorParams, berlin52, generate, write_instance
from fstsp.model import Solution, Sortie, truck_only_solution
from fstsp.moves import SolutionIndex, apply_move
from fstsp.neighborhoods import NEIGHBORHOODS
from fstsp.oracle import solve_exact
from fstsp.search import SearchConfig, hgvns, run_many
from fstsp.tsp_seed import import_tour, seed_tour

DATA = Path(__file__).parent / "data"


@pytest.fixture
def report(capsys):
    def emit(number, ok, detail):
        with capsys.disabled():
            print(f"\n[acceptance {number}] {'PASS' if ok else 'FAIL'}: {detail}")
        assert ok, detail
    return emit


def _walk(inst, sol, steps, rng, visit):
    """Random move sequence; ``visit(old, move, new)`` sees every applied move."""
    applied = 0
    for _ in range(steps):
        mv = NEIGHBORHOODS[rng.integers(len(NEIGHBORHOODS))].random(SolutionIndex(sol, inst), rng)
        if mv is None:
            continue
        new = apply_move(sol, mv)
        visit(sol, mv, new)
        sol = new
        applied += 1
    return applied


def test_1_delta_matches_full_evaluation(report):
    t0 = time.perf_counter()
    rng = np.random.default_rng(1)
    worst, moves = 0.0, 0
    families = ["ponza", "uniform", "single-center", "double-center"]
    for k in range(20):
        n = (10, 25, 50)[k % 3]
        inst = generate(GeneratorParams(families[k % 4], n, k, alpha=1.0 + k % 3))

        def visit(old, mv, new):
            nonlocal worst
            err = abs(evaluate(new, inst).makespan - evaluate(old, inst).makespan - mv.delta)
            worst = max(worst, err)

        moves += _walk(inst, truck_only_solution(range(n)), 520, rng, visit)
    dt = time.perf_counter() - t0
    report(1, moves >= 10_000 and worst <= 1e-6 and dt < 30,
           f"{moves} moves, max |delta error| {worst:.2e} min, {dt:.1f}s")


def test_2_exact_optimum_recovery(report):
    t0 = time.perf_counter()
    hits, beaten = 0, 0
    for s in range(50):
        inst = generate(GeneratorParams("ponza", (6, 7, 8)[s % 3], 1000 + s))
        opt = solve_exact(inst).cost
        best = min(r.final_cost for r in run_many(inst, runs=10))
        hits += abs(best - opt) <= 1e-6
        beaten += best < opt - 1e-6
    dt = time.perf_counter() - t0
    report(2, hits >= 45 and beaten == 0 and dt < 300,
           f"optimum matched on {hits}/50, beaten {beaten} times, {dt:.1f}s")


def _inject(sol, inst, rng):
    """Corrupt a feasible solution in one of five ways; returns (solution, expected kind)."""
    tour = list(sol.tour)
    body = tour[1:-1]
    if len(body) < 6:
        return None
    choice = int(rng.integers(5))
    if choice in (0, 1):
        # two fresh sorties on positions 1..4 of a tour with two customers lifted off
        v1, v2 = body[-1], body[-2]
        t = [0] + body[:-2] + [0]
        if not (inst.eligible[v1] and inst.eligible[v2]):
            return None
        if choice == 0:
            pair = (Sortie(t[1], v1, t[3]), Sortie(t[2], v2, t[4]))
            kind = "Prohibition1"
        else:
            pair = (Sortie(t[1], v1, t[4]), Sortie(t[2], v2, t[3]))
            kind = "Prohibition2"
        return Solution(tuple(t), pair), kind
    if choice == 2:
        return Solution(tuple([0] + body[:-1] + [0])), "Coverage"
    if choice == 3:
        bad = [v for v in body if not inst.eligible[v]]
        if not bad:
            return None
        v = bad[0]
        t = [0] + [x for x in body if x != v] + [0]
        return Solution(tuple(t), (Sortie(t[1], v, t[2]),)), "Eligibility"
    v = body[-1]
    if not inst.eligible[v]:
        return None
    t = [0] + body[:-1] + [0]
    return Solution(tuple(t), (Sortie(0, v, 0),)), "Endurance"


def test_3_feasibility_suite(report):
    t0 = time.perf_counter()
    rng = np.random.default_rng(3)
    moves, bad = 0, []
    k = 0
    while moves < 100_000:
        n = (8, 10, 12, 15, 20)[k % 5]
        fam = ("ponza", "uniform", "ponza", "double-center")[k % 4]
        inst = generate(GeneratorParams(fam, n, 500 + k, alpha=2.0,
                                        endurance=float(rng.uniform(6, 30))))
        k += 1

        def visit(old, mv, new):
            problems = check_feasible(new, inst)
            if problems:
                bad.append((mv.record(), [str(p) for p in problems]))

        moves += _walk(inst, truck_only_solution(range(n)), 500, rng, visit)

    detected, injected = 0, 0
    for s in range(300):
        inst = generate(GeneratorParams("ponza", 12, 2000 + s, endurance=1.0))
        case = _inject(truck_only_solution(range(12)), inst, rng)
        if case is None:
            continue
        sol, kind = case
        injected += 1
        detected += kind in [v.kind for v in check_feasible(sol, inst)]
    dt = time.perf_counter() - t0
    report(3, not bad and detected == injected and injected >= 200,
           f"{moves} applied moves over {k} sequences, {len(bad)} infeasible; "
           f"{detected}/{injected} injected violations tagged correctly, {dt:.1f}s")


def test_4_ponza_improvement_band(report):
    t0 = time.perf_counter()
    means, lines = {}, []
    for n in (50, 100):
        best, avg = [], []
        for s in range(5):
            inst = generate(GeneratorParams("ponza", n, s))
            gaps = [r.gap_pct for r in run_many(inst, runs=10, seed_strategy="heuristic")]
            best.append(min(gaps))
            avg.append(float(np.mean(gaps)))
        means[n] = float(np.mean(best))
        lines.append(f"n={n}: mean best-of-10 gap {means[n]:.2f}% (mean over all runs {np.mean(avg):.2f}%)")
    dt = time.perf_counter() - t0
    ok = all(-35.0 <= g <= -10.0 for g in means.values()) and dt < 600
    report(4, ok, "; ".join(lines) + f", {dt:.1f}s")


def test_5_tspd_alpha_ordering(report):
    t0 = time.perf_counter()
    ok, lines = True, []
    for fam in ("uniform", "single-center", "double-center"):
        g = {}
        for alpha in (1.0, 2.0, 3.0):
            gaps = []
            for s in range(10):
                inst = generate(GeneratorParams(fam, 50, s, alpha=alpha))
                gaps.append(hgvns(inst, "heuristic").gap_pct)
            g[alpha] = float(np.mean(gaps))
        ok &= g[2.0] < g[1.0] and g[3.0] < g[1.0] and abs(g[2.0] - g[3.0]) < 10.0
        lines.append(f"{fam} " + "/".join(f"{g[a]:.2f}" for a in (1.0, 2.0, 3.0)))
    dt = time.perf_counter() - t0
    report(5, ok and dt < 600, "mean gap % at alpha 1/2/3: " + "; ".join(lines) + f", {dt:.1f}s")


def test_6_pipeline_dominance(report):
    violations, count = [], 0
    for k in range(40):
        fam = ("ponza", "uniform", "single-center", "double-center", "tsplib")[k % 5]
        n = (10, 25, 50)[k % 3]
        params = GeneratorParams(fam, n, k, alpha=1.0 + k % 3,
                                 coords=berlin52() if fam == "tsplib" else None)
        rep = hgvns(generate(params), config=SearchConfig(rng_seed=k))
        count += 1
        if not (rep.initial_cost <= rep.s_tsp_cost + 1e-9 and rep.final_cost <= rep.initial_cost + 1e-9):
            violations.append((fam, n, k))
    report(6, not violations,
           f"seed >= construction >= search on {count - len(violations)}/{count} instances")


def test_7_run_determinism(report, tmp_path):
    path = tmp_path / "inst.txt"
    write_instance(generate(GeneratorParams("ponza", 30, 77)), path)
    outs = []
    for rep in range(2):
        best = tmp_path / f"best{rep}.sol"
        text, _ = cmd_run(path, runs=4, seed=11, best_path=best)
        costs = [line.split(",")[:7] for line in text.splitlines()]
        outs.append((costs, best.read_bytes()))
    report(7, outs[0] == outs[1], "identical cost columns and best-solution files across two runs")


def test_8_berlin52(report):
    t0 = time.perf_counter()
    inst = generate(GeneratorParams("tsplib", 52, 3, coords=berlin52()))
    tour = import_tour(inst, DATA / "berlin52_manhattan.tour")
    reps = run_many(inst, runs=10, tour=tour)
    best = min(reps, key=lambda r: r.final_cost)
    dt = time.perf_counter() - t0
    report(8, best.gap_pct <= -10.0 and dt < 120,
           f"TSP {best.s_tsp_cost:.2f}, best-of-10 {best.final_cost:.2f}, gap {best.gap_pct:.2f}% "
           f"({len(best.solution.sorties)} sorties, {int(inst.eligible.sum())} eligible), {dt:.1f}s")
