"""Savings-driven conversion of a truck-only tour into a truck + drone solution.

Every round scores, for each eligible truck-only customer j, two kinds of
candidate: reinserting j inside a segment already spanned by a sortie, and
serving j by a new sortie whose launch and return lie in a sortie-free
segment.  The candidate with the largest makespan saving is applied; the
loop stops when no candidate saves more than ``IMPROVE_EPS``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .evaluation import EQ_TOL
from .instance import Instance
from .model import Segment, Solution, truck_only_solution
from .moves import Move, SolutionIndex, apply_move, assemble
from .neighborhoods import IMPROVE_EPS, Reinsertion, RelocateCustomer, tight_argmin

_REINSERT = Reinsertion()
_RELOCATE = RelocateCustomer()


@dataclass(frozen=True)
class Candidate:
    j: int
    position: int          # insertion slot (after this tour position) or launch position
    delta: float
    move: Move
    as_drone: bool


def compute_savings(solution: Solution, j: int, instance: Instance) -> float:
    """Tour-time reduction from splicing ``j`` out of the truck tour."""
    if j == 0 or j not in solution.position:
        raise ValueError(f"node {j} is not a truck customer")
    p = solution.position[j]
    prev, nxt = solution.tour[p - 1], solution.tour[p + 1]
    tt = instance.tt
    return tt[prev][j] + tt[j][nxt] - tt[prev][nxt]


def _insert_move(idx: SolutionIndex, pj: int, q: int) -> Move | None:
    return assemble(idx, "Reinsertion", (pj, q), _REINSERT.piece_list((pj, q), idx.m), repair=False)


def best_insertion_as_truck(solution: Solution, j: int, segment: Segment,
                            instance: Instance) -> Candidate | None:
    """Cheapest slot for ``j`` strictly inside a paired segment, sortie unchanged."""
    if not segment.paired:
        raise ValueError("segment carries no sortie")
    idx = SolutionIndex(solution, instance)
    pj = solution.position[j]
    best = None
    for q in range(segment.start, segment.end):
        if q in (pj - 1, pj):
            continue
        mv = _insert_move(idx, pj, q)
        if mv is not None and (best is None or mv.delta < best.delta - EQ_TOL):
            best = Candidate(j, q, mv.delta, mv, False)
    return best


def best_assignment_as_drone(solution: Solution, j: int, segment: Segment,
                             instance: Instance) -> Candidate | None:
    """Best new sortie (launch, j, return) with both endpoints in an unpaired segment."""
    if segment.paired:
        raise ValueError("segment already carries a sortie")
    idx = SolutionIndex(solution, instance)
    pj = solution.position[j]
    if not instance.eligible[j] or not idx.is_truck_only[pj]:
        return None
    a, b = np.triu_indices(segment.end - segment.start + 1, k=1)
    pairs = np.stack([a + segment.start, b + segment.start], axis=1)
    if idx.tsp:
        loops = [p for p in range(max(segment.start, 1), min(segment.end, idx.m - 1) + 1)]
        pairs = np.concatenate([pairs, np.array([[p, p] for p in loops], dtype=np.intp).reshape(-1, 2)])
        pairs = pairs[np.lexsort((pairs[:, 1], pairs[:, 0]))]
    _, pairs, delta = _RELOCATE.table(idx, np.array([pj]), pairs)
    if not delta.size or not np.isfinite(delta).any():
        return None
    k = tight_argmin(delta[0], idx.D[pairs[:, 1]] - idx.D[pairs[:, 0]])
    mv = _RELOCATE.build(idx, j, int(pairs[k, 0]), int(pairs[k, 1]))
    if mv is None:
        return None
    return Candidate(j, int(pairs[k, 0]), mv.delta, mv, True)


def _best_round(idx: SolutionIndex) -> Candidate | None:
    movers = _RELOCATE.movers(idx)
    if not len(movers):
        return None
    cands: list[Candidate] = []

    # drone conversions: one vectorized table over all movers and free pairs
    pj, pairs, delta = _RELOCATE.table(idx, movers)
    if delta.size:
        best_d = delta.min(axis=1)
        span = idx.D[pairs[:, 1]] - idx.D[pairs[:, 0]]
        for r in np.flatnonzero(best_d < -IMPROVE_EPS).tolist():
            k = tight_argmin(delta[r], span)
            cands.append((float(delta[r, k]), int(idx.tour[pj[r]]), int(pairs[k, 0]), True, (int(pj[r]), k)))

    # truck reinsertions inside sortie spans, lower-bound pruned
    P, _dlen, lb = _REINSERT.scan(idx)
    if len(P):
        mover_mask = np.zeros(idx.m + 1, dtype=bool)
        mover_mask[movers] = True
        rows = np.flatnonzero(mover_mask[P[:, 0]] & (idx.cover[np.minimum(P[:, 1], idx.m - 1)] >= 0)
                              & (lb < -IMPROVE_EPS))
        rows = rows[np.argsort(lb[rows], kind="stable")]
        incumbent = min((c[0] for c in cands), default=np.inf)
        for r in rows.tolist():
            if lb[r] > incumbent + EQ_TOL:
                break
            i, q = int(P[r, 0]), int(P[r, 1])
            mv = _insert_move(idx, i, q)
            if mv is None or mv.delta >= -IMPROVE_EPS:
                continue
            cands.append((mv.delta, int(idx.tour[i]), q, False, mv))
            incumbent = min(incumbent, mv.delta)

    if not cands:
        return None
    top = min(c[0] for c in cands)
    delta_, j, pos, as_drone, payload = min((c for c in cands if c[0] <= top + EQ_TOL),
                                            key=lambda c: (c[1], c[2], c[3]))
    if as_drone:
        k = payload[1]
        mv = _RELOCATE.build(idx, j, int(pairs[k, 0]), int(pairs[k, 1]))
    else:
        mv = payload
    return Candidate(j, pos, mv.delta, mv, as_drone)


def create_initial_solution(tsp_tour, instance: Instance) -> Solution:
    sol = truck_only_solution(tsp_tour, instance.n)
    while True:
        idx = SolutionIndex(sol, instance)
        cand = _best_round(idx)
        if cand is None or cand.delta >= -IMPROVE_EPS:
            return sol
        sol = apply_move(sol, cand.move)
