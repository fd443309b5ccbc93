"""Truck + drone solution representation."""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from pathlib import Path
from typing import NamedTuple


class Sortie(NamedTuple):
    launch: int
    visit: int
    return_: int


class NodeRole(Enum):
    DEPOT = "depot"
    TRUCK_ONLY = "truck-only"
    DRONE_ONLY = "drone-only"
    MIXED = "mixed"


@dataclass(frozen=True)
class Solution:
    """A depot-anchored truck tour plus drone sorties.

    ``tour`` starts and ends with the depot.  A sortie launching from node 0
    launches at the start of the tour; one returning to node 0 returns at the
    end.  Sorties are kept sorted by (launch position, return position).
    """

    tour: tuple[int, ...]
    sorties: tuple[Sortie, ...] = ()

    def __post_init__(self):
        tour = tuple(int(v) for v in self.tour)
        object.__setattr__(self, "tour", tour)
        sorties = [Sortie(*(int(v) for v in s)) for s in self.sorties]
        object.__setattr__(self, "sorties", tuple(sorted(sorties, key=self._sort_key)))

    @cached_property
    def position(self) -> dict[int, int]:
        pos = {}
        for p, v in enumerate(self.tour[:-1]):
            pos.setdefault(v, p)
        return pos

    @property
    def last(self) -> int:
        return len(self.tour) - 1

    def launch_pos(self, s: Sortie) -> int:
        return 0 if s.launch == 0 else self.position[s.launch]

    def return_pos(self, s: Sortie) -> int:
        return self.last if s.return_ == 0 else self.position[s.return_]

    def span(self, s: Sortie) -> tuple[int, int]:
        return self.launch_pos(s), self.return_pos(s)

    def _sort_key(self, s: Sortie):
        big = len(self.tour) + 1
        lp = 0 if s.launch == 0 else self.position.get(s.launch, big)
        rp = len(self.tour) - 1 if s.return_ == 0 else self.position.get(s.return_, big)
        return (lp, rp, s.visit)

    @property
    def truck_customers(self) -> tuple[int, ...]:
        return self.tour[1:-1]

    @property
    def drone_customers(self) -> tuple[int, ...]:
        return tuple(s.visit for s in self.sorties)

    def __str__(self) -> str:
        return serialize_solution(self).strip().replace("\n", "; ")


def truck_only_solution(tour, n: int | None = None) -> Solution:
    tour = [int(v) for v in tour]
    if len(tour) > 1 and tour[-1] == 0 and tour[0] == 0:
        tour = tour[:-1]
    if not tour or tour[0] != 0:
        raise ValueError("tour must start at the depot 0")
    n = len(tour) if n is None else n
    if sorted(tour) != list(range(n)):
        raise ValueError(f"tour is not a permutation of 0..{n - 1}")
    return Solution(tuple(tour) + (0,))


def role_of(solution: Solution, node: int) -> NodeRole:
    if node == 0:
        return NodeRole.DEPOT
    if any(s.visit == node for s in solution.sorties):
        return NodeRole.DRONE_ONLY
    if node not in solution.position:
        raise ValueError(f"node {node} is not part of the solution")
    if any(node in (s.launch, s.return_) for s in solution.sorties):
        return NodeRole.MIXED
    return NodeRole.TRUCK_ONLY


@dataclass(frozen=True)
class Segment:
    start: int                 # tour positions, inclusive
    end: int
    nodes: tuple[int, ...]
    paired: bool
    sortie: Sortie | None = None


def subroutes(solution: Solution) -> list[Segment]:
    """Split the tour at every sortie launch/return.

    Paired segments run from a sortie's launch to its return; the rest are
    unpaired.  A new sortie placed wholly inside one unpaired segment cannot
    interleave with or nest inside an existing one.
    """
    tour = solution.tour
    segs = []
    cur = 0
    for s in solution.sorties:
        a, b = solution.span(s)
        if a > cur:
            segs.append(Segment(cur, a, tour[cur:a + 1], False))
        if b > a:
            segs.append(Segment(a, b, tour[a:b + 1], True, s))
        cur = max(cur, b)
    if cur < solution.last or not segs:
        segs.append(Segment(cur, solution.last, tour[cur:], False))
    return segs


def serialize_solution(solution: Solution) -> str:
    lines = ["TOUR: " + " ".join(map(str, solution.tour))]
    lines += [f"SORTIE: {s.launch} {s.visit} {s.return_}" for s in solution.sorties]
    return "\n".join(lines) + "\n"


def parse_solution(text: str) -> Solution:
    tour, sorties = None, []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, _, rest = line.partition(":")
        try:
            vals = [int(v) for v in rest.split()]
        except ValueError:
            raise ValueError(f"line {lineno}: non-integer node id") from None
        if key.strip().upper() == "TOUR":
            if vals and vals[-1] != 0 or len(vals) == 1:
                vals = vals + [0]
            tour = vals
        elif key.strip().upper() == "SORTIE":
            if len(vals) != 3:
                raise ValueError(f"line {lineno}: SORTIE needs launch visit return")
            sorties.append(Sortie(*vals))
        else:
            raise ValueError(f"line {lineno}: expected TOUR: or SORTIE:")
    if tour is None:
        raise ValueError("solution has no TOUR line")
    return Solution(tuple(tour), tuple(sorties))


def read_solution(path) -> Solution:
    return parse_solution(Path(path).read_text(encoding="utf-8"))


def write_solution(solution: Solution, path) -> None:
    Path(path).write_text(serialize_solution(solution), encoding="utf-8")
