import itertools

import numpy as np
import pytest

from fstsp.construction import (best_assignment_as_drone, best_insertion_as_truck,
                                compute_savings, create_initial_solution)
from fstsp.evaluation import check_feasible, evaluate
from fstsp.instance import GeneratorParams, generate
from fstsp.model import Solution, Sortie, subroutes, truck_only_solution
from fstsp.moves import apply_move
from fstsp.tsp_seed import seed_tour, tour_cost

from helpers import FIG7_COORDS, FIG7_TOUR, make_instance, matrix_instance


def test_no_eligible_customers_keeps_tour():
    inst = generate(GeneratorParams("ponza", 10, 1, eligible_fraction=0.0))
    tour = seed_tour(inst)
    assert create_initial_solution(tour, inst) == truck_only_solution(tour)


def test_zero_endurance_keeps_tour():
    inst = generate(GeneratorParams("ponza", 10, 4, endurance=0.0))
    tour = seed_tour(inst)
    assert create_initial_solution(tour, inst) == truck_only_solution(tour)


def test_detour_customer_becomes_drone():
    # customer 1 is a long truck detour but an easy drone hop
    truck = [[0, 10, 2], [10, 0, 10], [2, 10, 0]]
    drone = [[0, 3, 3], [3, 0, 3], [3, 3, 0]]
    inst = matrix_instance(truck, drone, endurance=24.0, sl=0.6, sr=0.5)
    sol = create_initial_solution([0, 1, 2, 0], inst)
    assert len(sol.sorties) == 1 and sol.sorties[0].visit == 1
    assert evaluate(sol, inst).makespan < tour_cost([0, 1, 2, 0], inst)


@pytest.mark.parametrize("seed", range(3))
def test_dominates_seed_and_is_feasible(seed):
    inst = generate(GeneratorParams("ponza", 50, seed))
    tour = seed_tour(inst, "heuristic")
    sol = create_initial_solution(tour, inst)
    assert check_feasible(sol, inst) == []
    assert evaluate(sol, inst).makespan <= tour_cost(tour, inst) + 1e-9
    assert sol.sorties


def test_savings():
    inst = make_instance([(0, 0), (1, 0), (2, 0)])
    assert compute_savings(truck_only_solution([0, 1, 2]), 1, inst) == pytest.approx(0.0)
    m = np.array([[0, 5, 6], [5, 0, 5], [6, 5, 0]], dtype=float)
    assert compute_savings(truck_only_solution([0, 1, 2]), 1, matrix_instance(m, m)) == 4.0
    inst = generate(GeneratorParams("ponza", 15, 2))
    sol = truck_only_solution(seed_tour(inst))
    assert all(compute_savings(sol, j, inst) >= -1e-9 for j in range(1, 15))


def test_drone_assignment_example_triple():
    inst = make_instance(FIG7_COORDS)
    sol = Solution(FIG7_TOUR, (Sortie(5, 7, 1), Sortie(8, 3, 0)))
    free = [s for s in subroutes(sol) if not s.paired]
    assert best_assignment_as_drone(sol, 5, free[0], inst) is None
    cand = best_assignment_as_drone(sol, 4, free[1], inst)
    assert cand.move.added == Sortie(1, 4, 6)


@pytest.mark.parametrize("seed", range(6))
def test_drone_assignment_matches_pair_scan(seed):
    inst = generate(GeneratorParams("ponza", 9, seed))
    sol = truck_only_solution(seed_tour(inst))
    seg = subroutes(sol)[0]
    base = evaluate(sol, inst).makespan
    for j in inst.drone_eligible:
        cand = best_assignment_as_drone(sol, j, seg, inst)
        reduced = tuple(v for v in sol.tour if v != j)
        best = np.inf
        for a, b in itertools.combinations(range(len(reduced)), 2):
            s = Solution(reduced, (Sortie(reduced[a], j, reduced[b]),))
            if not check_feasible(s, inst):
                best = min(best, evaluate(s, inst).makespan - base)
        if best == np.inf:
            assert cand is None
        else:
            assert cand.delta == pytest.approx(best, abs=1e-9)


def _paired_cases():
    rng = np.random.default_rng(0)
    while True:
        seed = int(rng.integers(10_000))
        inst = generate(GeneratorParams("ponza", 10, seed, endurance=float(rng.uniform(8, 30))))
        sol = create_initial_solution(seed_tour(inst), inst)
        for seg in subroutes(sol):
            if seg.paired:
                yield inst, sol, seg, int(rng.choice(sol.truck_customers))


def test_truck_insertion_deltas_match_evaluate():
    checked = 0
    for inst, sol, seg, j in _paired_cases():
        if checked == 200:
            break
        cand = best_insertion_as_truck(sol, j, seg, inst)
        if cand is None:
            continue
        new = apply_move(sol, cand.move)
        assert check_feasible(new, inst) == []        # endurance-breaking slots are never offered
        assert evaluate(new, inst).makespan - evaluate(sol, inst).makespan == pytest.approx(
            cand.delta, abs=1e-6)
        assert seg.start <= cand.position < seg.end
        checked += 1


def test_truck_insertion_single_slot_and_errors():
    truck = np.ones((5, 5)) - np.eye(5)
    inst = matrix_instance(truck, truck)
    sol = Solution((0, 1, 2, 3, 0), (Sortie(1, 4, 2),))
    seg = next(s for s in subroutes(sol) if s.paired)
    cand = best_insertion_as_truck(sol, 3, seg, inst)
    assert cand.position == seg.start
    with pytest.raises(ValueError):
        best_insertion_as_truck(sol, 3, subroutes(sol)[0], inst)


def test_endurance_tight_insertion_excluded():
    # inserting customer 3 between the depot and 1 stretches the truck leg past e
    truck = np.array([[0, 1, 2, 9], [1, 0, 1, 8], [2, 1, 0, 7], [9, 8, 7, 0]], dtype=float)
    drone = np.array([[0, 1, 1, 9], [1, 0, 0.5, 8], [1, 0.5, 0, 7], [9, 8, 7, 0]], dtype=float)
    inst = matrix_instance(truck, drone, eligible=[0, 0, 1, 0], endurance=5.0)
    sol = Solution((0, 1, 3, 0), (Sortie(0, 2, 1),))
    assert check_feasible(sol, inst) == []
    seg = next(s for s in subroutes(sol) if s.paired)
    assert best_insertion_as_truck(sol, 3, seg, inst) is None
