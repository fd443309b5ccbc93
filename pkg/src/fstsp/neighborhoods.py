"""The seven local-search neighborhoods.

Tour neighborhoods describe each candidate as a list of pieces of the old
tour (see :mod:`fstsp.moves`).  Tour-length deltas and a lower bound on the
makespan delta are computed for all candidates at once with numpy; only
candidates whose bound can still beat the incumbent are scored exactly.  The
bound subtracts the drone waits of every sortie spanning a cut edge, since
re-timing a sortie can at best remove its wait.
"""
from __future__ import annotations

import numpy as np

from .evaluation import EQ_TOL
from .moves import Move, SolutionIndex, assemble

IMPROVE_EPS = 1e-6
SAMPLE_FACTOR = 50


def _grid(a: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    A, B = np.meshgrid(a, b, indexing="ij")
    return A.ravel(), B.ravel()


def _stack(*cols) -> np.ndarray:
    """(N, pieces, 2) array from (start, end) column pairs."""
    return np.stack([np.stack(np.broadcast_arrays(a, b), axis=-1) for a, b in cols], axis=1)


def tight_argmin(values: np.ndarray, span: np.ndarray) -> int:
    """Index of the smallest value; near-ties go to the shortest truck span.

    Among sorties that cost the same, the one occupying less of the tour
    leaves more room for later sorties.
    """
    v = values.ravel()
    best = v.min()
    near = np.flatnonzero(v <= best + EQ_TOL)
    return int(near[np.argmin(np.broadcast_to(span, values.shape).ravel()[near])])


class TourNeighborhood:
    name = ""

    def params(self, m: int) -> np.ndarray:
        """All structural candidates as an (N, 2) int array in canonical order."""
        raise NotImplementedError

    def pieces(self, P: np.ndarray, m: int) -> list[tuple[np.ndarray, np.ndarray]]:
        """Group candidates by piece count: list of (row indices, pieces array)."""
        raise NotImplementedError

    def piece_list(self, p, m: int) -> list[tuple[int, int]]:
        """Scalar twin of :meth:`pieces` for one candidate."""
        raise NotImplementedError

    def scan(self, idx: SolutionIndex):
        """(params, tour-length delta, makespan lower bound) for every candidate."""
        key = ("scan", self.name)
        if key in idx.cache:
            return idx.cache[key]
        m = idx.m
        P = self.params(m)
        dlen = np.zeros(len(P))
        lb = np.zeros(len(P))
        t, TT, D, WC = idx.t, idx.inst.truck_time, idx.D, idx.wait_cover
        for rows, pcs in self.pieces(P, m):
            if not len(rows):
                continue
            a, b = pcs[..., 0], pcs[..., 1]
            inner = np.abs(D[b] - D[a]).sum(axis=1)
            junction = TT[t[b[:, :-1]], t[a[:, 1:]]].sum(axis=1)
            d = inner + junction - D[m]
            lo, hi = np.minimum(a, b), np.maximum(a, b)
            cut = np.where(lo > 0, WC[np.maximum(lo - 1, 0)], 0.0).sum(axis=1)
            cut += np.where(hi < m, WC[np.minimum(hi, m - 1)], 0.0).sum(axis=1)
            dlen[rows] = d
            lb[rows] = d - 0.5 * cut
        out = (P, dlen, lb)
        idx.cache[key] = out
        return out

    def build(self, idx: SolutionIndex, p) -> Move | None:
        i, j = int(p[0]), int(p[1])
        return assemble(idx, self.name, (i, j), self.piece_list((i, j), idx.m))

    def best(self, idx: SolutionIndex, eps: float = IMPROVE_EPS) -> Move | None:
        """Minimal-delta feasible move with delta < -eps, ties to the earliest candidate."""
        P, _dlen, lb = self.scan(idx)
        cand = np.flatnonzero(lb < -eps)
        if not cand.size:
            return None
        order = cand[np.argsort(lb[cand], kind="stable")]
        best, best_c = None, -1
        for c in order.tolist():
            if best is not None and lb[c] > best.delta + EQ_TOL:
                break
            mv = self.build(idx, P[c])
            if mv is None or mv.delta >= -eps:
                continue
            if best is None or mv.delta < best.delta - EQ_TOL or (
                    mv.delta <= best.delta + EQ_TOL and c < best_c):
                best, best_c = mv, c
        return best

    def all_moves(self, idx: SolutionIndex):
        P = self.params(idx.m)
        for p in P:
            mv = self.build(idx, p)
            if mv is not None:
                yield mv

    def random(self, idx: SolutionIndex, rng: np.random.Generator) -> Move | None:
        """One uniformly drawn feasible move (rejection sampling)."""
        P = self.params(idx.m)
        if not len(P):
            return None
        for _ in range(SAMPLE_FACTOR * max(idx.inst.n, 1)):
            mv = self.build(idx, P[rng.integers(len(P))])
            if mv is not None:
                return mv
        return None


class Reinsertion(TourNeighborhood):
    """Move one tour customer to another slot."""

    name = "Reinsertion"

    def params(self, m):
        if m < 3:
            return np.zeros((0, 2), dtype=np.intp)
        i, q = _grid(np.arange(1, m), np.arange(0, m))
        keep = (q != i - 1) & (q != i)
        return np.stack([i[keep], q[keep]], axis=1)

    def pieces(self, P, m):
        i, q = P[:, 0], P[:, 1]
        out = []
        r = np.flatnonzero(q < i - 1)
        ii, qq = i[r], q[r]
        out.append((r, _stack((0, qq), (ii, ii), (qq + 1, ii - 1), (ii + 1, m))))
        r = np.flatnonzero(q > i)
        ii, qq = i[r], q[r]
        out.append((r, _stack((0, ii - 1), (ii + 1, qq), (ii, ii), (qq + 1, m))))
        return out

    def piece_list(self, p, m):
        i, q = p
        if q < i - 1:
            return [(0, q), (i, i), (q + 1, i - 1), (i + 1, m)]
        return [(0, i - 1), (i + 1, q), (i, i), (q + 1, m)]


class OrOpt2(TourNeighborhood):
    """Move two adjacent tour customers to another slot."""

    name = "OrOpt2"

    def params(self, m):
        if m < 4:
            return np.zeros((0, 2), dtype=np.intp)
        i, q = _grid(np.arange(1, m - 1), np.arange(0, m))
        keep = (q < i - 1) | (q > i + 1)
        return np.stack([i[keep], q[keep]], axis=1)

    def pieces(self, P, m):
        i, q = P[:, 0], P[:, 1]
        out = []
        r = np.flatnonzero(q < i - 1)
        ii, qq = i[r], q[r]
        out.append((r, _stack((0, qq), (ii, ii + 1), (qq + 1, ii - 1), (ii + 2, m))))
        r = np.flatnonzero(q > i + 1)
        ii, qq = i[r], q[r]
        out.append((r, _stack((0, ii - 1), (ii + 2, qq), (ii, ii + 1), (qq + 1, m))))
        return out

    def piece_list(self, p, m):
        i, q = p
        if q < i - 1:
            return [(0, q), (i, i + 1), (q + 1, i - 1), (i + 2, m)]
        return [(0, i - 1), (i + 2, q), (i, i + 1), (q + 1, m)]


class Exchange(TourNeighborhood):
    """Swap two tour customers."""

    name = "Exchange"

    def params(self, m):
        i, j = np.triu_indices(m - 1, k=1) if m > 2 else (np.zeros(0, np.intp),) * 2
        return np.stack([i + 1, j + 1], axis=1).astype(np.intp)

    def pieces(self, P, m):
        i, j = P[:, 0], P[:, 1]
        out = []
        r = np.flatnonzero(j == i + 1)
        ii, jj = i[r], j[r]
        out.append((r, _stack((0, ii - 1), (jj, jj), (ii, ii), (jj + 1, m))))
        r = np.flatnonzero(j > i + 1)
        ii, jj = i[r], j[r]
        out.append((r, _stack((0, ii - 1), (jj, jj), (ii + 1, jj - 1), (ii, ii), (jj + 1, m))))
        return out

    def piece_list(self, p, m):
        i, j = p
        if j == i + 1:
            return [(0, i - 1), (j, j), (i, i), (j + 1, m)]
        return [(0, i - 1), (j, j), (i + 1, j - 1), (i, i), (j + 1, m)]


class Exchange21(TourNeighborhood):
    """Swap a block of two adjacent customers with a single customer."""

    name = "Exchange21"

    def params(self, m):
        if m < 4:
            return np.zeros((0, 2), dtype=np.intp)
        i, j = _grid(np.arange(1, m - 1), np.arange(1, m))
        keep = (j < i) | (j > i + 1)
        return np.stack([i[keep], j[keep]], axis=1)

    def pieces(self, P, m):
        i, j = P[:, 0], P[:, 1]
        out = []
        r = np.flatnonzero(j == i - 1)
        ii, jj = i[r], j[r]
        out.append((r, _stack((0, jj - 1), (ii, ii + 1), (jj, jj), (ii + 2, m))))
        r = np.flatnonzero(j < i - 1)
        ii, jj = i[r], j[r]
        out.append((r, _stack((0, jj - 1), (ii, ii + 1), (jj + 1, ii - 1), (jj, jj), (ii + 2, m))))
        r = np.flatnonzero(j == i + 2)
        ii, jj = i[r], j[r]
        out.append((r, _stack((0, ii - 1), (jj, jj), (ii, ii + 1), (jj + 1, m))))
        r = np.flatnonzero(j > i + 2)
        ii, jj = i[r], j[r]
        out.append((r, _stack((0, ii - 1), (jj, jj), (ii + 2, jj - 1), (ii, ii + 1), (jj + 1, m))))
        return out

    def piece_list(self, p, m):
        i, j = p
        if j == i - 1:
            return [(0, j - 1), (i, i + 1), (j, j), (i + 2, m)]
        if j < i - 1:
            return [(0, j - 1), (i, i + 1), (j + 1, i - 1), (j, j), (i + 2, m)]
        if j == i + 2:
            return [(0, i - 1), (j, j), (i, i + 1), (j + 1, m)]
        return [(0, i - 1), (j, j), (i + 2, j - 1), (i, i + 1), (j + 1, m)]


class Exchange22(TourNeighborhood):
    """Swap two disjoint blocks of two adjacent customers."""

    name = "Exchange22"

    def params(self, m):
        if m < 5:
            return np.zeros((0, 2), dtype=np.intp)
        i, j = _grid(np.arange(1, m - 1), np.arange(1, m - 1))
        keep = j >= i + 2
        return np.stack([i[keep], j[keep]], axis=1)

    def pieces(self, P, m):
        i, j = P[:, 0], P[:, 1]
        out = []
        r = np.flatnonzero(j == i + 2)
        ii, jj = i[r], j[r]
        out.append((r, _stack((0, ii - 1), (jj, jj + 1), (ii, ii + 1), (jj + 2, m))))
        r = np.flatnonzero(j > i + 2)
        ii, jj = i[r], j[r]
        out.append((r, _stack((0, ii - 1), (jj, jj + 1), (ii + 2, jj - 1), (ii, ii + 1), (jj + 2, m))))
        return out

    def piece_list(self, p, m):
        i, j = p
        if j == i + 2:
            return [(0, i - 1), (j, j + 1), (i, i + 1), (j + 2, m)]
        return [(0, i - 1), (j, j + 1), (i + 2, j - 1), (i, i + 1), (j + 2, m)]


class TwoOpt(TourNeighborhood):
    """Reverse the tour between positions i and j."""

    name = "TwoOpt"

    def params(self, m):
        i, j = np.triu_indices(m - 1, k=1) if m > 2 else (np.zeros(0, np.intp),) * 2
        return np.stack([i + 1, j + 1], axis=1).astype(np.intp)

    def pieces(self, P, m):
        i, j = P[:, 0], P[:, 1]
        return [(np.arange(len(P)), _stack((0, i - 1), (j, i), (j + 1, m)))]

    def piece_list(self, p, m):
        i, j = p
        return [(0, i - 1), (j, i), (j + 1, m)]


class RelocateCustomer:
    """Move one customer between the truck and the drone.

    Three directions share this neighborhood:

    * truck -> drone: an eligible truck-only customer leaves the tour and is
      served by a new sortie ``(customer, launch pos, return pos)``;
    * drone -> drone: a drone customer's sortie is re-anchored elsewhere;
    * drone -> truck: a drone customer's sortie is deleted and the customer
      is inserted after tour position ``q``, record ``(customer, q)``.

    New sorties keep both endpoints inside one sortie-free run of the tour,
    so they cannot interleave with or nest inside an existing sortie.
    """

    name = "RelocateCustomer"

    def pairs(self, idx: SolutionIndex) -> np.ndarray:
        key = ("pairs",)
        if key in idx.cache:
            return idx.cache[key]
        rows = []
        for u, v in idx.free_runs:
            a, b = np.triu_indices(v - u + 1, k=1)
            rows.append(np.stack([a + u, b + u], axis=1))
        if idx.tsp:
            loops = np.array([p for p in range(1, idx.m) if idx.interior[p] < 0], dtype=np.intp)
            rows.append(np.stack([loops, loops], axis=1))
        pairs = np.unique(np.concatenate(rows), axis=0) if rows else np.zeros((0, 2), dtype=np.intp)
        idx.cache[key] = pairs
        return pairs

    def movers(self, idx: SolutionIndex) -> np.ndarray:
        """Tour positions of eligible truck-only customers."""
        elig = idx.inst.eligible[idx.t]
        return np.flatnonzero(idx.is_truck_only & elig)

    def _removal(self, idx: SolutionIndex, pj: np.ndarray):
        """Tour saving from splicing out each position and the covering sortie's wait change."""
        t, TT, E = idx.t, idx.inst.truck_time, idx.E
        rem = E[pj - 1] + E[pj] - TT[t[pj - 1], t[pj + 1]]
        dU = np.zeros(len(pj))
        for r, p in enumerate(pj.tolist()):
            u = idx.interior[p]
            if u >= 0:
                dU[r] = max(0.0, idx.F[u] - (idx.T[u] - rem[r])) - idx.W[u]
        return rem, dU

    def table(self, idx: SolutionIndex, pj: np.ndarray | None = None, pairs: np.ndarray | None = None):
        """Truck -> drone deltas for every (mover, pair); infeasible entries are +inf."""
        pj = self.movers(idx) if pj is None else pj
        pairs = self.pairs(idx) if pairs is None else pairs
        if not len(pj) or not len(pairs):
            return pj, pairs, np.full((len(pj), len(pairs)), np.inf)
        t, DT, D = idx.t, idx.inst.drone_time, idx.D
        a, b = pairs[:, 0], pairs[:, 1]
        rem, dU = self._removal(idx, pj)
        j = t[pj]
        P = pj[:, None]
        inside = (a[None, :] < P) & (P < b[None, :])
        T = (D[b] - D[a])[None, :] - inside * rem[:, None]
        F = DT[t[a][None, :], j[:, None]] + DT[j[:, None], t[b][None, :]]
        ok = (np.maximum(T, F) <= idx.cap + EQ_TOL) & (a[None, :] != P) & (b[None, :] != P)
        delta = -rem[:, None] + dU[:, None] + idx.services + np.maximum(0.0, F - T)
        return pj, pairs, np.where(ok, delta, np.inf)

    def _freed_region(self, idx: SolutionIndex, i: int) -> tuple[int, int]:
        """Run of positions that becomes sortie-free when sortie i is deleted."""
        lp, rp = idx.lp[i], idx.rp[i]

        def other_end(p):
            return idx.ends[p] - (lp == p) - (rp == p) > 0

        lo = lp
        while lo > 0 and idx.coverl[lo - 1] < 0 and not other_end(lo):
            lo -= 1
        hi = rp
        while hi < idx.m and idx.coverl[hi] < 0 and not other_end(hi):
            hi += 1
        return lo, hi

    def redock(self, idx: SolutionIndex):
        """Drone -> drone candidates: (sortie index, launch pos, return pos, delta)."""
        key = ("redock",)
        if key in idx.cache:
            return idx.cache[key]
        base = self.pairs(idx)
        t, DT, D = idx.t, idx.inst.drone_time, idx.D
        rows = []
        for i, s in enumerate(idx.sorties):
            lo, hi = self._freed_region(idx, i)
            keep = ~((base[:, 0] >= lo) & (base[:, 1] <= hi))
            a, b = np.triu_indices(hi - lo + 1, k=1)
            extra = [np.stack([a + lo, b + lo], axis=1)]
            if idx.tsp:
                loops = [p for p in range(max(lo, 1), min(hi, idx.m - 1) + 1)
                         if idx.interior[p] in (-1, i)]
                extra.append(np.array([[p, p] for p in loops], dtype=np.intp).reshape(-1, 2))
            pr = np.concatenate([base[keep]] + extra)
            pr = pr[(pr[:, 0] != idx.lp[i]) | (pr[:, 1] != idx.rp[i])]
            if not len(pr):
                continue
            pr = np.unique(pr, axis=0)
            T = D[pr[:, 1]] - D[pr[:, 0]]
            F = DT[t[pr[:, 0]], s.visit] + DT[s.visit, t[pr[:, 1]]]
            delta = np.maximum(0.0, F - T) - idx.W[i]
            delta[np.maximum(T, F) > idx.cap + EQ_TOL] = np.inf
            rows.append(np.column_stack([np.full(len(pr), i), pr, delta]))
        out = np.concatenate(rows) if rows else np.zeros((0, 4))
        idx.cache[key] = out
        return out

    def unload(self, idx: SolutionIndex):
        """Drone -> truck candidates: (sortie index, slot q, tour-length delta, lower bound)."""
        k, m = len(idx.sorties), idx.m
        if not k:
            return np.zeros((0, 4))
        I, Q = _grid(np.arange(k), np.arange(m))
        v = np.array([s.visit for s in idx.sorties])[I]
        TT, t = idx.inst.truck_time, idx.t
        dlen = TT[t[Q], v] + TT[v, t[Q + 1]] - idx.E[Q]
        W = np.asarray(idx.W)[I]
        lb = dlen - idx.wait_cover[Q] - idx.services - W
        return np.column_stack([I, Q, dlen, lb])

    def build(self, idx: SolutionIndex, v: int, a: int, b: int | None = None) -> Move | None:
        m = idx.m
        pj = idx.sol.position.get(v)
        if pj is not None:
            if b is None or not (v and idx.is_truck_only[pj] and idx.inst.eligible[v]) or pj in (a, b):
                return None
            return assemble(idx, self.name, (v, a, b), [(0, pj - 1), (pj + 1, m)],
                            removed=pj, new_sortie=(a, v, b))
        i = next((r for r, s in enumerate(idx.sorties) if s.visit == v), None)
        if i is None:
            return None
        if b is None:
            if not 0 <= a < m:
                return None
            return assemble(idx, self.name, (v, a), [(0, a), (-v - 1, -v - 1), (a + 1, m)], drop=i)
        if (a, b) == (idx.lp[i], idx.rp[i]):
            return None
        return assemble(idx, self.name, (v, a, b), [(0, m)], new_sortie=(a, v, b), drop=i)

    def best(self, idx: SolutionIndex, eps: float = IMPROVE_EPS) -> Move | None:
        best = None
        pj, pairs, delta = self.table(idx)
        if delta.size:
            c = tight_argmin(delta, (idx.D[pairs[:, 1]] - idx.D[pairs[:, 0]])[None, :])
            if delta.flat[c] < -eps:
                r, k = divmod(c, delta.shape[1])
                best = self.build(idx, int(idx.t[pj[r]]), int(pairs[k, 0]), int(pairs[k, 1]))
                if best is None or abs(best.delta - delta.flat[c]) > 1e-6:
                    raise AssertionError("relocation table disagrees with exact scoring")
        red = self.redock(idx)
        if len(red):
            c = tight_argmin(red[:, 3], idx.D[red[:, 2].astype(np.intp)] - idx.D[red[:, 1].astype(np.intp)])
            if red[c, 3] < -eps and (best is None or red[c, 3] < best.delta - EQ_TOL):
                i, a, b = (int(x) for x in red[c, :3])
                best = self.build(idx, idx.sorties[i].visit, a, b)
        unl = self.unload(idx)
        if len(unl):
            cand = np.flatnonzero(unl[:, 3] < -eps)
            for c in cand[np.argsort(unl[cand, 3], kind="stable")].tolist():
                if best is not None and unl[c, 3] > best.delta - EQ_TOL:
                    break
                mv = self.build(idx, idx.sorties[int(unl[c, 0])].visit, int(unl[c, 1]))
                if mv is not None and mv.delta < -eps and (best is None or mv.delta < best.delta - EQ_TOL):
                    best = mv
        return best

    def all_moves(self, idx: SolutionIndex):
        for p in self.movers(idx).tolist():
            for a, b in self.pairs(idx).tolist():
                mv = self.build(idx, idx.tour[p], a, b)
                if mv is not None:
                    yield mv
        for i, a, b, _d in self.redock(idx).tolist():
            mv = self.build(idx, idx.sorties[int(i)].visit, int(a), int(b))
            if mv is not None:
                yield mv
        for s in idx.sorties:
            for q in range(idx.m):
                mv = self.build(idx, s.visit, q)
                if mv is not None:
                    yield mv

    def random(self, idx: SolutionIndex, rng: np.random.Generator) -> Move | None:
        pj, pairs = self.movers(idx), self.pairs(idx)
        red = self.redock(idx)
        n_a, n_b, n_c = len(pj) * len(pairs), len(red), len(idx.sorties) * idx.m
        total = n_a + n_b + n_c
        if not total:
            return None
        for _ in range(SAMPLE_FACTOR * max(idx.inst.n, 1)):
            r = int(rng.integers(total))
            if r < n_a:
                p, k = divmod(r, len(pairs))
                mv = self.build(idx, idx.tour[pj[p]], int(pairs[k, 0]), int(pairs[k, 1]))
            elif r < n_a + n_b:
                i, a, b, _d = red[r - n_a]
                mv = self.build(idx, idx.sorties[int(i)].visit, int(a), int(b))
            else:
                i, q = divmod(r - n_a - n_b, idx.m)
                mv = self.build(idx, idx.sorties[i].visit, q)
            if mv is not None:
                return mv
        return None


NEIGHBORHOODS = (Reinsertion(), OrOpt2(), Exchange(), Exchange21(), Exchange22(),
                 TwoOpt(), RelocateCustomer())
BY_NAME = {nb.name: nb for nb in NEIGHBORHOODS}


def replay(idx: SolutionIndex, record: str) -> Move | None:
    """Rebuild a move from its text record (see :meth:`Move.record`)."""
    kind, *rest = record.split()
    vals = [int(v) for v in rest]
    nb = BY_NAME[kind]
    if isinstance(nb, RelocateCustomer):
        return nb.build(idx, *vals)
    return nb.build(idx, vals)
