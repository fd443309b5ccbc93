"""Completion-time objective, feasibility rules and move scoring.

Timing semantics used throughout the package:

* the truck drives its tour on the truck matrix; at a launch node it spends
  ``service_launch`` before either vehicle departs;
* the drone flies launch -> visit -> return on the drone matrix;
* at the return node the first vehicle to arrive waits for the other, then
  ``service_return`` is spent before the truck leaves;
* the endurance clock runs from the end of launch service until both vehicles
  are at the return node (flight plus airborne waiting), closed bound.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .instance import TSPD, Instance
from .model import Solution

EQ_TOL = 1e-9


@dataclass
class Timeline:
    truck_arrive: list[float]
    truck_depart: list[float]
    drone_launch_t: list[float] = field(default_factory=list)
    drone_return_t: list[float] = field(default_factory=list)
    wait_truck: list[float] = field(default_factory=list)
    wait_drone: list[float] = field(default_factory=list)
    endurance_used: list[float] = field(default_factory=list)
    makespan: float = 0.0


@dataclass(frozen=True)
class Violation:
    kind: str                      # Endurance | Prohibition1 | Prohibition2 | Eligibility
    sorties: tuple[int, ...] = ()  # | Coverage | DepotRelaunch | Structure
    node: int | None = None
    used: float | None = None
    limit: float | None = None
    detail: str = ""

    def __str__(self) -> str:
        parts = [self.kind]
        if self.sorties:
            parts.append("sorties " + ",".join(map(str, self.sorties)))
        if self.node is not None:
            parts.append(f"node {self.node}")
        if self.used is not None:
            parts.append(f"used {self.used:.4f} min > limit {self.limit:.4f} min")
        if self.detail:
            parts.append(self.detail)
        return ": ".join([parts[0], ", ".join(parts[1:])]) if len(parts) > 1 else parts[0]


def evaluate(solution: Solution, instance: Instance,
             endurance_includes_recovery: bool = False) -> Timeline:
    """Simulate both vehicles along the tour and return the timeline.

    The solution must be structurally valid (see :func:`check_feasible`).
    """
    tour = solution.tour
    tt, dt = instance.tt, instance.dt
    sl, sr = instance.service_launch, instance.service_return
    m = len(tour) - 1
    k = len(solution.sorties)

    launches: dict[int, list[int]] = {}
    returns: dict[int, list[int]] = {}
    loops: dict[int, list[int]] = {}
    try:
        for i, s in enumerate(solution.sorties):
            a, b = solution.span(s)
            if a == b:
                loops.setdefault(a, []).append(i)
            elif a < b:
                launches.setdefault(a, []).append(i)
                returns.setdefault(b, []).append(i)
            else:
                raise ValueError(f"sortie {s} returns before it launches")
    except KeyError as exc:
        raise ValueError(f"sortie endpoint {exc} is not on the tour") from None

    tl = Timeline([0.0] * (m + 1), [0.0] * (m + 1), [0.0] * k, [0.0] * k,
                  [0.0] * k, [0.0] * k, [0.0] * k)
    flight = [dt[s.launch][s.visit] + dt[s.visit][s.return_] for s in solution.sorties]

    def recover(i, t):
        drone_at = tl.drone_launch_t[i] + flight[i]
        tl.drone_return_t[i] = drone_at
        tl.wait_truck[i] = max(0.0, drone_at - t)
        tl.wait_drone[i] = max(0.0, t - drone_at)
        ready = max(t, drone_at)
        tl.endurance_used[i] = ready - tl.drone_launch_t[i]
        if endurance_includes_recovery:
            tl.endurance_used[i] += sr
        return ready + sr

    t = 0.0
    for p in range(m + 1):
        if p:
            t += tt[tour[p - 1]][tour[p]]
        tl.truck_arrive[p] = t
        for i in returns.get(p, ()):
            t = recover(i, t)
        for i in loops.get(p, ()):
            t += sl
            tl.drone_launch_t[i] = t
            t = recover(i, t)
        for i in launches.get(p, ()):
            t += sl
            tl.drone_launch_t[i] = t
        tl.truck_depart[p] = t
    tl.makespan = t
    return tl


def makespan(solution: Solution, instance: Instance) -> float:
    return evaluate(solution, instance).makespan


def _classify(x, y):
    """Prohibition kind for two sortie intervals, or None when compatible."""
    (a, b), (c, d) = sorted([x, y])
    if b <= c:
        return None
    if a == b:  # a loop sharing the launch node of the other sortie
        return None
    if c == d:
        return "Prohibition2" if a < c < b else None
    if d <= b or a == c:
        return "Prohibition2"
    return "Prohibition1"


def check_feasible(solution: Solution, instance: Instance,
                   endurance_includes_recovery: bool = False) -> list[Violation]:
    out: list[Violation] = []
    n = instance.n
    tour = solution.tour
    fstsp = instance.variant != TSPD

    if len(tour) < 2 or tour[0] != 0 or tour[-1] != 0:
        out.append(Violation("Coverage", node=0, detail="tour must start and end at the depot"))
    seen: dict[int, int] = {}
    for v in list(tour[1:-1]) + [s.visit for s in solution.sorties]:
        if not 0 <= v < n:
            out.append(Violation("Coverage", node=v, detail="unknown node"))
            continue
        seen[v] = seen.get(v, 0) + 1
    for v in range(1, n):
        if seen.get(v, 0) != 1:
            out.append(Violation("Coverage", node=v,
                                 detail=f"served {seen.get(v, 0)} times"))
    if seen.get(0):
        out.append(Violation("Coverage", node=0, detail="depot visited mid-route"))

    spans = []
    structural = not out
    on_tour = set(tour)
    for i, s in enumerate(solution.sorties):
        if 0 <= s.visit < n and (s.visit == 0 or not instance.eligible[s.visit]):
            out.append(Violation("Eligibility", (i,), node=s.visit))
        bad = None
        if s.launch not in on_tour or s.return_ not in on_tour:
            bad = "launch/return not on the truck tour"
        elif s.visit in (s.launch, s.return_) or s.visit in on_tour:
            bad = "visit node is also a truck node"
        if bad:
            out.append(Violation("Structure", (i,), detail=bad))
            structural = False
            continue
        a, b = solution.span(s)
        if a > b:
            out.append(Violation("Structure", (i,), detail="returns before launching"))
            structural = False
        elif a == b and (fstsp or s.launch == 0):
            out.append(Violation("Structure", (i,), detail="launch equals return"))
            structural = False
        spans.append((i, (a, b)))

    depot_launches = [i for i, s in enumerate(solution.sorties) if s.launch == 0]
    for i in depot_launches[1:]:
        out.append(Violation("DepotRelaunch", (i,), node=0))
        structural = False

    for x in range(len(spans)):
        for y in range(x + 1, len(spans)):
            kind = _classify(spans[x][1], spans[y][1])
            if kind:
                out.append(Violation(kind, (spans[x][0], spans[y][0])))
                structural = False

    if structural:
        tl = evaluate(solution, instance, endurance_includes_recovery)
        for i, used in enumerate(tl.endurance_used):
            if used > instance.endurance + EQ_TOL:
                out.append(Violation("Endurance", (i,), used=used, limit=instance.endurance))
    return out


def delta_cost(solution: Solution, move, instance: Instance) -> float:
    """Makespan change of applying ``move`` to ``solution``.

    Truck-only rearrangements reduce to the removed/added edge balance; moves
    touching sorties re-time only the sorties whose spans they cut.
    """
    from .moves import SolutionIndex, rescore
    return rescore(SolutionIndex(solution, instance), move)
