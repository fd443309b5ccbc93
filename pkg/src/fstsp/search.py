"""Randomized VND, general VNS and the full seed -> construct -> improve pipeline."""
from __future__ import annotations

import os
import time
from dataclasses import dataclass, field

import numpy as np

from .construction import create_initial_solution
from .evaluation import check_feasible, evaluate
from .instance import Instance
from .model import Solution, truck_only_solution
from .moves import SolutionIndex, apply_move
from .neighborhoods import IMPROVE_EPS, NEIGHBORHOODS
from .tsp_seed import seed_tour, tour_cost


@dataclass
class SearchConfig:
    rng_seed: int = 0
    k_max: int = len(NEIGHBORHOODS)
    outer_restarts: int = 1
    time_budget: float | None = None        # seconds
    improvement_eps: float = IMPROVE_EPS
    debug: bool = field(default_factory=lambda: bool(os.environ.get("FSTSP_DEBUG")))
    trace: list | None = None               # receives one text record per applied move

    def __post_init__(self):
        if not 0 <= self.k_max <= len(NEIGHBORHOODS):
            raise ValueError(f"k_max must be in [0, {len(NEIGHBORHOODS)}]")


@dataclass
class RunReport:
    instance: str
    seed: int
    s_tsp_cost: float
    initial_cost: float
    final_cost: float
    gap_vs_tsp: float
    wall_time_s: float
    seed_time_s: float = 0.0
    move_counts: dict = field(default_factory=dict)
    solution: Solution | None = None

    @property
    def gap_pct(self) -> float:
        return 100.0 * self.gap_vs_tsp


class _Run:
    """Mutable state shared by rvnd/gvns within one search run."""

    def __init__(self, instance: Instance, config: SearchConfig, deadline: float | None = None):
        self.inst = instance
        self.cfg = config
        self.rng = np.random.default_rng(config.rng_seed)
        self.deadline = deadline
        self.counts = {nb.name: 0 for nb in NEIGHBORHOODS}

    def expired(self) -> bool:
        return self.deadline is not None and time.perf_counter() > self.deadline

    def apply(self, sol: Solution, mv, count: bool = True) -> Solution:
        new = apply_move(sol, mv)
        if count:
            self.counts[mv.kind] += 1
        if self.cfg.trace is not None:
            self.cfg.trace.append(mv.record())
        if self.cfg.debug:
            bad = check_feasible(new, self.inst)
            if bad:
                raise AssertionError(f"{mv.record()} produced {', '.join(map(str, bad))}")
        return new

    def rvnd(self, sol: Solution) -> Solution:
        eps = self.cfg.improvement_eps
        order = list(range(len(NEIGHBORHOODS)))
        self.rng.shuffle(order)
        idx = SolutionIndex(sol, self.inst)
        k = 0
        while k < len(order):
            mv = NEIGHBORHOODS[order[k]].best(idx, eps)
            if mv is None:
                k += 1
                continue
            sol = self.apply(sol, mv)
            idx = SolutionIndex(sol, self.inst)
            self.rng.shuffle(order)
            k = 0
        return sol

    def gvns(self, sol: Solution) -> Solution:
        eps = self.cfg.improvement_eps
        best, best_cost = sol, SolutionIndex(sol, self.inst).makespan
        for _ in range(self.cfg.outer_restarts):
            k = 1
            while k <= self.cfg.k_max and not self.expired():
                mv = NEIGHBORHOODS[k - 1].random(SolutionIndex(best, self.inst), self.rng)
                if mv is None:
                    k += 1
                    continue
                cand = self.rvnd(self.apply(best, mv, count=False))
                cost = SolutionIndex(cand, self.inst).makespan
                if cost < best_cost - eps:
                    best, best_cost = cand, cost
                    k = 1
                else:
                    k += 1
        return best


def rvnd(solution: Solution, instance: Instance, rng: np.random.Generator | int = 0,
         config: SearchConfig | None = None) -> Solution:
    """Best-improvement descent over all neighborhoods in shuffled order."""
    run = _Run(instance, config or SearchConfig())
    if isinstance(rng, np.random.Generator):
        run.rng = rng
    else:
        run.rng = np.random.default_rng(rng)
    return run.rvnd(solution)


def gvns(solution: Solution, instance: Instance, config: SearchConfig | None = None) -> Solution:
    config = config or SearchConfig()
    deadline = None if config.time_budget is None else time.perf_counter() + config.time_budget
    if config.k_max == 0:
        return solution
    return _Run(instance, config, deadline).gvns(solution)


def hgvns(instance: Instance, seed_strategy: str = "auto", config: SearchConfig | None = None,
          tour=None, tour_file=None) -> RunReport:
    """Seed tour -> constructive heuristic -> GVNS.

    ``tour`` short-circuits seeding with a precomputed truck tour (used to
    share one seed across repeated runs).
    """
    config = config or SearchConfig()
    t0 = time.perf_counter()
    if tour is None:
        tour = seed_tour(instance, seed_strategy, rng_seed=config.rng_seed, tour_file=tour_file)
    t1 = time.perf_counter()
    s_tsp = tour_cost(tour, instance)
    init = create_initial_solution(tour, instance)
    init_cost = evaluate(init, instance).makespan
    deadline = None if config.time_budget is None else t1 + config.time_budget
    if config.k_max == 0:
        final, counts = init, {nb.name: 0 for nb in NEIGHBORHOODS}
    else:
        run = _Run(instance, config, deadline)
        final = run.gvns(init)
        counts = run.counts
    final_cost = evaluate(final, instance).makespan
    gap = (final_cost - s_tsp) / s_tsp if s_tsp > 0 else 0.0
    return RunReport(instance.name, config.rng_seed, s_tsp, init_cost, final_cost, gap,
                     time.perf_counter() - t1, t1 - t0, counts, final)


def run_many(instance: Instance, runs: int = 10, base_seed: int = 0, seed_strategy: str = "auto",
             tour=None, tour_file=None, **config) -> list[RunReport]:
    """Independent runs with seeds base_seed, base_seed+1, ...; the seed tour is shared."""
    t0 = time.perf_counter()
    if tour is None:
        tour = seed_tour(instance, seed_strategy, rng_seed=base_seed, tour_file=tour_file)
    seed_time = time.perf_counter() - t0
    reports = []
    for r in range(runs):
        rep = hgvns(instance, config=SearchConfig(rng_seed=base_seed + r, **config), tour=tour)
        rep.seed_time_s = seed_time
        reports.append(rep)
    return reports


def truck_only_report(instance: Instance, tour) -> RunReport:
    sol = truck_only_solution(tour, instance.n)
    c = tour_cost(tour, instance)
    return RunReport(instance.name, 0, c, c, c, 0.0, 0.0, solution=sol)
