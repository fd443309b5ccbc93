"""Exhaustive solver for micro-instances, used as ground truth in tests.

Enumerates every set of drone customers, every order of the remaining truck
customers, and every set of pairwise compatible sortie intervals.  Each
candidate is scored with the additive makespan (truck time plus, per sortie,
service times and the truck's wait for the drone), which equals the
simulated makespan for feasible solutions; the winner is re-checked with
:func:`fstsp.evaluation.evaluate`.  Partial costs only grow, so a branch is
cut as soon as it reaches the incumbent.
"""
from __future__ import annotations

import hashlib
import itertools
import math
from dataclasses import dataclass

from .evaluation import EQ_TOL, check_feasible, evaluate
from .instance import TSPD, Instance, serialize
from .model import Solution, Sortie, serialize_solution

ORACLE_LIMIT = 9


@dataclass
class OracleResult:
    cost: float
    solution: Solution
    evaluated: int = 0


def solve_exact(instance: Instance, prune: bool = True, full_evaluate: bool = False) -> OracleResult:
    """Global optimum by enumeration (n ≤ 9).

    ``full_evaluate`` scores every complete candidate with the event
    simulation instead of the additive formula (slow; for cross-checks).
    """
    n = instance.n
    if n > ORACLE_LIMIT:
        raise ValueError(f"oracle limited to n ≤ {ORACLE_LIMIT}")
    tt, dt = instance.tt, instance.dt
    cap = instance.endurance + EQ_TOL
    services = instance.service_launch + instance.service_return
    tspd = instance.variant == TSPD
    customers = list(range(1, n))
    eligible = [c for c in customers if instance.eligible[c]]

    best_cost = math.inf
    best_sol = Solution((0, 0) if n == 1 else tuple([0] + customers + [0]))
    evaluated = 0

    for size in range(len(eligible) + 1):
        for drones in itertools.combinations(eligible, size):
            truck = [c for c in customers if c not in drones]
            for perm in itertools.permutations(truck):
                # a tour and its reverse (with sorties inverted) cost the same
                if len(perm) > 1 and perm[0] > perm[-1]:
                    continue
                tour = (0,) + perm + (0,)
                m = len(tour) - 1
                D = [0.0]
                for p in range(m):
                    D.append(D[-1] + tt[tour[p]][tour[p + 1]])
                base = D[m] + size * services
                if prune and base >= best_cost - EQ_TOL:
                    continue
                spans = [(a, b) for a in range(m) for b in range(a + 1, m + 1)]
                if tspd:
                    spans += [(a, a) for a in range(1, m)]
                options = {}
                for d in drones:
                    opts = []
                    for a, b in spans:
                        T = D[b] - D[a]
                        F = dt[tour[a]][d] + dt[d][tour[b]]
                        if T <= cap and F <= cap:
                            opts.append((max(0.0, F - T), a, b))
                    opts.sort()
                    options[d] = opts
                chosen: list[tuple[int, int, int]] = []

                def dfs(i, cost):
                    nonlocal best_cost, best_sol, evaluated
                    if prune and cost >= best_cost - EQ_TOL:
                        return
                    if i == size:
                        sol = Solution(tour, tuple(Sortie(tour[a], d, tour[b]) for a, d, b in chosen))
                        evaluated += 1
                        c = evaluate(sol, instance).makespan if full_evaluate else cost
                        if c < best_cost - EQ_TOL:
                            best_cost, best_sol = c, sol
                        return
                    d = drones[i]
                    for w, a, b in options[d]:
                        if all(b <= a2 or b2 <= a for a2, _, b2 in chosen):
                            chosen.append((a, d, b))
                            dfs(i + 1, cost + w)
                            chosen.pop()

                dfs(0, base)

    if best_cost < math.inf:
        check = evaluate(best_sol, instance).makespan
        if abs(check - best_cost) > 1e-6 or check_feasible(best_sol, instance):
            raise AssertionError("oracle optimum failed re-evaluation")
    return OracleResult(best_cost, best_sol, evaluated)


def instance_hash(instance: Instance) -> str:
    return hashlib.sha256(serialize(instance).encode("utf-8")).hexdigest()[:16]


def certificate(instance: Instance, result: OracleResult) -> str:
    """Text record of a certified optimum: hash, cost and solution."""
    return (f"INSTANCE {instance.name}\nHASH {instance_hash(instance)}\n"
            f"COST {result.cost!r}\n" + serialize_solution(result.solution))


def parse_certificate(text: str) -> tuple[str, float, Solution]:
    from .model import parse_solution
    head, rest = {}, []
    for line in text.splitlines():
        key, _, val = line.partition(" ")
        if key in ("INSTANCE", "HASH", "COST"):
            head[key] = val.strip()
        else:
            rest.append(line)
    return head["HASH"], float(head["COST"]), parse_solution("\n".join(rest))
