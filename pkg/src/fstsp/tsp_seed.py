"""Truck-only seed tours: exact Held-Karp for small n, local search otherwise."""
from __future__ import annotations

from pathlib import Path

import numpy as np

from .instance import Instance
from .model import truck_only_solution
from .moves import SolutionIndex, apply_move

EXACT_LIMIT = 18


def tour_cost(tour, instance: Instance) -> float:
    t = np.asarray(tour, dtype=np.intp)
    if t[-1] != 0 or len(t) == 1:
        t = np.append(t, 0)
    return float(instance.truck_time[t[:-1], t[1:]].sum())


def solve_exact_dp(instance: Instance) -> list[int]:
    """Optimal closed tour under the truck matrix (Held-Karp)."""
    n = instance.n
    if n > EXACT_LIMIT:
        raise ValueError(f"exact seed limited to n ≤ {EXACT_LIMIT}")
    if n <= 2:
        return list(range(n)) + [0]
    d = instance.truck_time
    k = n - 1                       # customers 1..n-1 mapped to bits 0..k-1
    full = 1 << k
    dp = np.full((full, k), np.inf)
    parent = np.full((full, k), -1, dtype=np.int8)
    for j in range(k):
        dp[1 << j, j] = d[0, j + 1]
    masks = np.arange(full)
    popcount = np.array([bin(x).count("1") for x in range(full)])
    C = d[1:, 1:]
    for size in range(2, k + 1):
        group = masks[popcount == size]
        for j in range(k):
            sel = group[(group >> j) & 1 == 1]
            prev = sel ^ (1 << j)
            cand = dp[prev] + C[:, j]
            best = np.argmin(cand, axis=1)
            dp[sel, j] = cand[np.arange(len(sel)), best]
            parent[sel, j] = best
    closing = dp[full - 1] + d[1:, 0]
    j = int(np.argmin(closing))
    mask = full - 1
    rev = []
    while j >= 0:
        rev.append(j + 1)
        pj = int(parent[mask, j])
        mask ^= 1 << j
        j = pj
    return [0] + rev[::-1] + [0]


def nearest_neighbor(instance: Instance) -> list[int]:
    d = instance.truck_time
    n = instance.n
    left = np.ones(n, dtype=bool)
    left[0] = False
    tour = [0]
    for _ in range(n - 1):
        row = np.where(left, d[tour[-1]], np.inf)
        nxt = int(np.argmin(row))
        tour.append(nxt)
        left[nxt] = False
    return tour + [0]


def local_search(tour, instance: Instance, or_opt: bool = True) -> list[int]:
    """Best-improvement 2-opt (plus optional Or-opt) until no move improves."""
    from .neighborhoods import OrOpt2, Reinsertion, TwoOpt
    nbs = [TwoOpt()] + ([Reinsertion(), OrOpt2()] if or_opt else [])
    sol = truck_only_solution(tour, instance.n)
    k = 0
    while k < len(nbs):
        idx = SolutionIndex(sol, instance)
        mv = nbs[k].best(idx, eps=1e-9)
        if mv is None:
            k += 1
            continue
        sol = apply_move(sol, mv)
        k = 0
    return list(sol.tour)


def _double_bridge(tour: list[int], rng: np.random.Generator) -> list[int]:
    body = tour[1:-1]
    if len(body) < 8:
        return tour
    a, b, c = sorted(rng.choice(np.arange(1, len(body)), size=3, replace=False).tolist())
    body = body[:a] + body[c:] + body[b:c] + body[a:b]
    return [0] + body + [0]


def solve_heuristic(instance: Instance, rng_seed: int = 0, kicks: int = 0,
                    or_opt: bool = True) -> list[int]:
    """Nearest neighbour, then 2-opt/Or-opt descent.

    ``kicks`` > 0 adds iterated local search with random double-bridge
    perturbations, keeping the best tour seen.
    """
    if instance.n <= 2:
        return list(range(instance.n)) + [0]
    rng = np.random.default_rng(rng_seed)
    best = local_search(nearest_neighbor(instance), instance, or_opt)
    best_cost = tour_cost(best, instance)
    for _ in range(kicks):
        cand = local_search(_double_bridge(best, rng), instance, or_opt)
        c = tour_cost(cand, instance)
        if c < best_cost - 1e-9:
            best, best_cost = cand, c
    return best


def import_tour(instance: Instance, source) -> list[int]:
    """Read a tour (ids separated by whitespace) and rotate it to start at the depot."""
    if isinstance(source, (list, tuple, np.ndarray)):
        ids = [int(v) for v in source]
    else:
        path = Path(source)
        text = path.read_text(encoding="utf-8") if path.is_file() else str(source)
        ids = [int(v) for v in text.split()]
    if len(ids) > 1 and ids[0] == ids[-1] == 0:
        ids = ids[:-1]
    n = instance.n
    seen = set()
    for v in ids:
        if not 0 <= v < n:
            raise ValueError(f"unknown node id {v}")
        if v in seen:
            raise ValueError(f"duplicate node id {v}")
        seen.add(v)
    missing = sorted(set(range(n)) - seen)
    if missing:
        raise ValueError(f"missing node ids {missing}")
    r = ids.index(0)
    return ids[r:] + ids[:r] + [0]


def seed_tour(instance: Instance, strategy: str = "auto", rng_seed: int = 0,
              tour_file=None, kicks: int | None = None) -> list[int]:
    """Dispatch on ``strategy``: exact | heuristic | import | auto."""
    if strategy == "auto":
        strategy = "exact" if instance.n <= 12 else "heuristic"
    if strategy == "exact":
        return solve_exact_dp(instance)
    if strategy == "heuristic":
        return solve_heuristic(instance, rng_seed, kicks=instance.n if kicks is None else kicks)
    if strategy == "import":
        if tour_file is None:
            raise ValueError("import strategy needs a tour file")
        return import_tour(instance, tour_file)
    raise ValueError(f"unknown seed strategy {strategy!r}")
