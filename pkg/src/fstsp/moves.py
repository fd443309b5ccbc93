"""Incremental move scoring shared by every neighborhood.

For a feasible solution the makespan decomposes additively::

    makespan = truck tour time + sum over sorties of
               (service_launch + service_return + max(0, flight - truck_span))

because sorties never overlap, so every sortie synchronises both vehicles at
its return node.  A move rearranges the tour as a concatenation of *pieces*
(contiguous, possibly reversed, ranges of old positions); only the sorties
whose span contains a cut edge change their truck span.  Those are re-timed,
inverted when their endpoints swap order, and retargeted when they would
otherwise collide with another sortie or break endurance.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .evaluation import EQ_TOL
from .instance import TSPD, Instance
from .model import Solution, Sortie

RETARGET_WINDOW = 2


@dataclass(frozen=True)
class Move:
    kind: str
    params: tuple[int, ...]
    pieces: tuple[tuple[int, int], ...]
    theta_minus: tuple[tuple[int, int], ...]
    theta_plus: tuple[tuple[int, int], ...]
    repairs: tuple[tuple[int, Sortie, Sortie], ...]   # (sortie index, old, new)
    added: Sortie | None
    removed: int | None                             # tour position turned into a drone visit
    delta: float
    source: Solution = field(repr=False, compare=False)
    dropped: Sortie | None = None                   # sortie deleted by the move

    def record(self) -> str:
        return f"{self.kind} " + " ".join(map(str, self.params))


class SolutionIndex:
    """Position-indexed view of a solution used for O(1)-ish move scoring."""

    def __init__(self, solution: Solution, instance: Instance,
                 endurance_includes_recovery: bool = False):
        self.sol = solution
        self.inst = instance
        self.tour = list(solution.tour)
        self.t = np.asarray(self.tour, dtype=np.intp)
        m = self.m = len(self.tour) - 1
        tt, dt = instance.tt, instance.dt
        self.tsp = instance.variant == TSPD
        self.cap = instance.endurance - (instance.service_return if endurance_includes_recovery else 0.0)
        self.services = instance.service_launch + instance.service_return

        E = instance.truck_time[self.t[:-1], self.t[1:]] if m else np.zeros(0)
        self.E = E
        self.D = np.concatenate([[0.0], np.cumsum(E)])
        self.Dl = self.D.tolist()

        sorties = self.sorties = list(solution.sorties)
        k = len(sorties)
        self.lp = [solution.launch_pos(s) for s in sorties]
        self.rp = [solution.return_pos(s) for s in sorties]
        self.F = [dt[s.launch][s.visit] + dt[s.visit][s.return_] for s in sorties]
        self.T = [self.Dl[b] - self.Dl[a] for a, b in zip(self.lp, self.rp)]
        self.W = [max(0.0, f - t) for f, t in zip(self.F, self.T)]

        cover = np.full(m, -1, dtype=np.intp)
        interior = [-1] * (m + 1)
        launch_at = [-1] * (m + 1)
        return_at = [-1] * (m + 1)
        ends = np.zeros(m + 1, dtype=np.intp)
        wait_cover = np.zeros(m)
        for i in range(k):
            a, b = self.lp[i], self.rp[i]
            cover[a:b] = i
            wait_cover[a:b] = self.W[i]
            for p in range(a + 1, b):
                interior[p] = i
            if a < b:
                launch_at[a] = i
                return_at[b] = i
            ends[a] += 1
            ends[b] += 1
        self.cover = cover
        self.coverl = cover.tolist()
        self.interior = interior
        self.launch_at = launch_at
        self.return_at = return_at
        self.ends = ends
        self.PE = np.concatenate([[0], np.cumsum(ends)]).tolist()
        self.wait_cover = wait_cover
        self.makespan = self.Dl[m] + k * self.services + sum(self.W)
        self.cache: dict = {}

    @cached_property
    def is_truck_only(self) -> np.ndarray:
        """Boolean per tour position: customer that is neither launch nor return."""
        flag = np.zeros(self.m + 1, dtype=bool)
        flag[1:self.m] = True
        for a, b in zip(self.lp, self.rp):
            flag[a] = flag[b] = False
        return flag

    @cached_property
    def free_runs(self) -> list[tuple[int, int]]:
        """Maximal position ranges where a new sortie fits without conflicts."""
        runs = []
        start = 0
        ends = self.ends
        for p in range(self.m):
            if self.coverl[p] >= 0:
                if start is not None and start < p:
                    runs.append((start, p))
                start = None
            else:
                if start is None:
                    start = p
                elif ends[p] and p > start:
                    runs.append((start, p))
                    start = p
        if start is not None and start < self.m:
            runs.append((start, self.m))
        return runs


class _Pieces:
    """Old-position <-> new-position mapping for a concatenation of pieces.

    A piece ``(a, b)`` with ``a <= b`` copies old positions a..b, ``a > b``
    copies them reversed, and a negative ``a`` inserts the off-tour node
    ``-a - 1``.
    """

    __slots__ = ("table", "length", "last")

    def __init__(self, idx: SolutionIndex, pieces):
        tour, D, tt = idx.tour, idx.Dl, idx.inst.tt
        table = []
        newpos = 0
        cum = 0.0
        prev = None
        for a, b in pieces:
            ext = -a - 1 if a < 0 else -1
            head = ext if a < 0 else tour[a]
            if prev is not None:
                cum += tt[prev][head]
            if a < 0:
                table.append((-1, -1, True, newpos, cum, 0.0, ext))
                newpos += 1
                prev = ext
                continue
            lo, hi = (a, b) if a <= b else (b, a)
            table.append((lo, hi, a <= b, newpos, cum, D[a], -1))
            cum += abs(D[b] - D[a])
            newpos += hi - lo + 1
            prev = tour[b]
        self.table = table
        self.length = cum
        self.last = newpos - 1

    def new_of(self, p):
        for lo, hi, fwd, ns, cs, da, ext in self.table:
            if lo <= p <= hi and ext < 0:
                return ns + (p - lo if fwd else hi - p)
        raise KeyError(p)

    def _entry(self, q):
        for e in self.table:
            if e[3] <= q <= e[3] + e[1] - e[0]:
                return e
        raise KeyError(q)

    def old_of(self, q):
        """Old position shown at new position q, or -1 for an inserted node."""
        lo, hi, fwd, ns, cs, da, ext = self._entry(q)
        if ext >= 0:
            return -1
        return lo + (q - ns) if fwd else hi - (q - ns)

    def node_of(self, q, tour):
        lo, hi, fwd, ns, cs, da, ext = self._entry(q)
        if ext >= 0:
            return ext
        return tour[lo + (q - ns) if fwd else hi - (q - ns)]

    def fwd_of(self, q):
        return self._entry(q)[2]

    def cum_at(self, q, D):
        lo, hi, fwd, ns, cs, da, ext = self._entry(q)
        if ext >= 0:
            return cs
        p = lo + (q - ns) if fwd else hi - (q - ns)
        return cs + abs(D[p] - da)

    def old_ranges(self, q0, q1):
        """Old position ranges covering new positions q0..q1 inclusive."""
        out = []
        for lo, hi, fwd, ns, cs, da, ext in self.table:
            if ext >= 0:
                continue
            ne = ns + hi - lo
            a, b = max(q0, ns), min(q1, ne)
            if a > b:
                continue
            if fwd:
                out.append((lo + a - ns, lo + b - ns))
            else:
                out.append((hi - (b - ns), hi - (a - ns)))
        return out


def _compatible(x, y) -> bool:
    return x[1] <= y[0] or y[1] <= x[0]


def assemble(idx: SolutionIndex, kind: str, params, pieces, removed: int | None = None,
             new_sortie: tuple[int, int, int] | None = None, repair: bool = True,
             drop: int | None = None) -> Move | None:
    """Score the rearrangement described by ``pieces``.

    ``removed`` is an old tour position dropped from the tour (it must hold a
    truck-only customer); ``new_sortie`` is ``(old launch pos, visit node,
    old return pos)``; ``drop`` is the index of a sortie deleted by the move.
    Returns ``None`` when no feasible repair exists.
    """
    tour, D = idx.tour, idx.Dl
    dt = idx.inst.dt
    pm = _Pieces(idx, pieces)
    last = pm.last
    m = idx.m

    removed_edges = set()
    for lo, hi, fwd, ns, cs, da, ext in pm.table:
        if ext >= 0:
            continue
        if lo > 0:
            removed_edges.add(lo - 1)
        if hi < m:
            removed_edges.add(hi)
    cover = idx.coverl
    affected = sorted({cover[e] for e in removed_edges if cover[e] >= 0} - {drop})
    skip = set(affected)
    if drop is not None:
        skip.add(drop)

    # new positions of endpoints that no longer belong to intact sorties
    loose_ends = []
    for i in skip:
        for p in (idx.lp[i], idx.rp[i]):
            if p != removed:
                loose_ends.append(pm.new_of(p))

    PE, interior, launch_at, return_at = idx.PE, idx.interior, idx.launch_at, idx.return_at
    cap = idx.cap + EQ_TOL

    def node_at(q):
        return pm.node_of(q, tour)

    cum_memo: dict[int, float] = {}

    def cum(q):
        if q not in cum_memo:
            cum_memo[q] = pm.cum_at(q, D)
        return cum_memo[q]

    def intact(arr, p):
        u = arr[p] if p >= 0 else -1
        return u >= 0 and u not in skip

    def conflicts(a, b, chosen):
        if b - a > 1:
            count = 0
            for u, v in pm.old_ranges(a + 1, b - 1):
                count += PE[v + 1] - PE[u]
            count -= sum(1 for q in loose_ends if a < q < b)
            if count:
                return True
        for q in (a, b):
            if intact(interior, pm.old_of(q)):
                return True
        if a < b:
            # inside a reversed piece an intact sortie's launch becomes its return
            if intact(launch_at if pm.fwd_of(a) else return_at, pm.old_of(a)):
                return True
            if intact(return_at if pm.fwd_of(b) else launch_at, pm.old_of(b)):
                return True
        return any(not _compatible((a, b), c) for c in chosen)

    def valid_span(a, b):
        if a < 0 or b > last or a > b or a == last or b == 0:
            return False
        return a < b or (idx.tsp and 0 < a < last)

    chosen = []
    repairs = []
    dwait = 0.0
    for i in affected:
        s = idx.sorties[i]
        a, b = pm.new_of(idx.lp[i]), pm.new_of(idx.rp[i])
        if a > b:
            a, b = b, a
        options = [(a, b)]
        if repair:
            for d in range(1, RETARGET_WINDOW + 1):
                options += [(a, b - d), (a, b + d)]
            for d in range(1, RETARGET_WINDOW + 1):
                options += [(a + d, b), (a - d, b)]
        for qa, qb in options:
            if not valid_span(qa, qb):
                continue
            t = cum(qb) - cum(qa)
            if t > cap:
                continue
            L, R = node_at(qa), node_at(qb)
            f = dt[L][s.visit] + dt[s.visit][R]
            if f > cap:
                continue
            if conflicts(qa, qb, chosen):
                continue
            chosen.append((qa, qb))
            dwait += max(0.0, f - t) - idx.W[i]
            new = Sortie(L, s.visit, R)
            if new != s:
                repairs.append((i, s, new))
            break
        else:
            return None

    for lo, hi, fwd, *_ in pm.table:
        if fwd or lo == hi:
            continue
        for i, s in enumerate(idx.sorties):
            if i not in skip and lo <= idx.lp[i] < idx.rp[i] <= hi:
                repairs.append((i, s, Sortie(s.return_, s.visit, s.launch)))

    if drop is not None:
        dwait -= idx.services + idx.W[drop]

    added = None
    if new_sortie is not None:
        pa, v, pb = new_sortie
        qa, qb = pm.new_of(pa), pm.new_of(pb)
        if not valid_span(qa, qb):
            return None
        L, R = tour[pa], tour[pb]
        f = dt[L][v] + dt[v][R]
        t = cum(qb) - cum(qa)
        if f > cap or t > cap or conflicts(qa, qb, chosen):
            return None
        dwait += idx.services + max(0.0, f - t)
        added = Sortie(L, v, R)

    theta_minus = tuple((tour[e], tour[e + 1]) for e in sorted(removed_edges))
    theta_plus = []
    prev = None
    for a, b in pieces:
        head = -a - 1 if a < 0 else tour[a]
        if prev is not None:
            theta_plus.append((prev, head))
        prev = head if a < 0 else tour[b]
    delta = pm.length - D[m] + dwait
    return Move(kind, tuple(int(x) for x in params), tuple((int(a), int(b)) for a, b in pieces),
                theta_minus, tuple(theta_plus), tuple(repairs), added, removed, delta, idx.sol,
                None if drop is None else idx.sorties[drop])


def apply_move(solution: Solution, move: Move) -> Solution:
    """New solution with ``move`` applied; ``solution`` itself is untouched."""
    if move.source != solution:
        raise ValueError("move was generated for a different solution")
    tour = solution.tour
    new_tour = []
    for a, b in move.pieces:
        if a < 0:
            new_tour.append(-a - 1)
        elif a <= b:
            new_tour.extend(tour[a:b + 1])
        else:
            new_tour.extend(tour[b:a + 1][::-1])
    sorties = list(solution.sorties)
    for i, _old, new in move.repairs:
        sorties[i] = new
    if move.dropped is not None:
        sorties.remove(move.dropped)
    if move.added is not None:
        sorties.append(move.added)
    return Solution(tuple(new_tour), tuple(sorties))


def revert(move: Move) -> Solution:
    """The solution the move was generated from."""
    return move.source


def rescore(idx: SolutionIndex, move: Move) -> float:
    """Recompute a move's delta against ``idx`` from its pieces and sortie changes."""
    if move.source != idx.sol:
        raise ValueError("move not applicable to this solution")
    new_sortie = None
    if move.added is not None:
        pos = idx.sol.position
        pa = 0 if move.added.launch == 0 else pos[move.added.launch]
        pb = idx.m if move.added.return_ == 0 else pos[move.added.return_]
        new_sortie = (pa, move.added.visit, pb)
    drop = None if move.dropped is None else idx.sorties.index(move.dropped)
    again = assemble(idx, move.kind, move.params, move.pieces, move.removed, new_sortie, drop=drop)
    if again is None:
        raise ValueError("move is not feasible for this solution")
    return again.delta
