import pytest

from fstsp.model import (NodeRole, Solution, Sortie, parse_solution, role_of, serialize_solution,
                         subroutes, truck_only_solution)

from helpers import FIG7_TOUR

# Truck 0-1-2-3-5-6-7-9-0, sorties 3->4->5 and 6->8->9
FIG1 = Solution((0, 1, 2, 3, 5, 6, 7, 9, 0), (Sortie(3, 4, 5), Sortie(6, 8, 9)))


def test_truck_only_solution():
    a = truck_only_solution([0, 1, 2, 0])
    b = truck_only_solution([0, 2, 1, 0])
    assert a.tour == (0, 1, 2, 0) and a.sorties == ()
    assert a != b and set(a.tour) == set(b.tour)
    with pytest.raises(ValueError):
        truck_only_solution([0, 1, 1, 0])


def test_roles():
    assert role_of(FIG1, 4) is NodeRole.DRONE_ONLY
    assert role_of(FIG1, 8) is NodeRole.DRONE_ONLY
    for v in (3, 5, 6, 9):
        assert role_of(FIG1, v) is NodeRole.MIXED
    for v in (1, 2, 7):
        assert role_of(FIG1, v) is NodeRole.TRUCK_ONLY
    assert role_of(FIG1, 0) is NodeRole.DEPOT


def test_subroutes():
    segs = subroutes(FIG1)
    paired = [(s.nodes[0], s.nodes[-1]) for s in segs if s.paired]
    assert paired == [(3, 5), (6, 9)]
    whole = subroutes(truck_only_solution([0, 3, 1, 2]))
    assert len(whole) == 1 and not whole[0].paired and whole[0].nodes == (0, 3, 1, 2, 0)


def test_subroutes_split_example():
    sol = Solution(FIG7_TOUR, (Sortie(5, 7, 1), Sortie(8, 3, 0)))
    free = [s.nodes for s in subroutes(sol) if not s.paired]
    assert free == [(0, 5), (1, 6, 4, 2, 8)]


def test_sorties_sorted_by_launch_position():
    sol = Solution(FIG1.tour, tuple(reversed(FIG1.sorties)))
    assert sol == FIG1


def test_solution_text_round_trip():
    assert parse_solution(serialize_solution(FIG1)) == FIG1
    assert parse_solution("TOUR: 0 2 1\n") == Solution((0, 2, 1, 0))
    with pytest.raises(ValueError):
        parse_solution("SORTIE: 1 2\n")
