import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fstsp.instance import (Family, GeneratorParams, Instance, InstanceError, ParseError, TSPD,
                            berlin52, build_matrices, generate, parse_instance, read_coordinates,
                            serialize, validate)

FAMILIES = [f.value for f in Family if f is not Family.TSPLIB]


def test_depot_only_document():
    inst = parse_instance("N 1\nNODES\n0 0 0 0\nEOF\n")
    assert inst.n == 1 and list(inst.customers) == []
    assert validate(inst) == []


def test_tspd_with_service_time_rejected():
    doc = "VARIANT TSPD\nN 2\nENDURANCE INF\nSL 0.6 SR 0\nNODES\n0 0 0 0\n1 1 1 1\nEOF\n"
    with pytest.raises(InstanceError, match="TSPD forbids service times"):
        parse_instance(doc)


@pytest.mark.parametrize("doc, line", [
    ("N 2\nNODES\n0 0 0 0\n1 1 x 1\n", 4),
    ("N 2\nNODES\n0 0 0 0\n1 1 1 2\n", 4),
    ("N 2\nFOO 3\n", 2),
    ("N 2\nNODES\n0 0 0\n1 1 1 1\n", 3),
])
def test_parse_errors_carry_line(doc, line):
    with pytest.raises(ParseError) as exc:
        parse_instance(doc)
    assert exc.value.line == line


@settings(max_examples=40, deadline=None)
@given(family=st.sampled_from(FAMILIES), n=st.integers(1, 12), seed=st.integers(0, 10_000),
       alpha=st.sampled_from([1.0, 2.0, 3.0]))
def test_round_trip(family, n, seed, alpha):
    inst = generate(GeneratorParams(family, n, seed, alpha=alpha))
    assert parse_instance(serialize(inst)) == inst
    assert validate(inst) == []


def test_round_trip_without_matrices_rebuilds_them():
    inst = generate(GeneratorParams("ponza", 9, 4))
    again = parse_instance(serialize(inst, include_matrices=False))
    assert np.allclose(again.truck_time, inst.truck_time)
    assert np.allclose(again.drone_time, inst.drone_time)


def test_build_matrices_hand_values():
    truck, drone = build_matrices([(0, 0), (3, 4)], 40.0, 40.0, "MANHATTAN", "EUCLIDEAN")
    assert truck[0, 1] == pytest.approx(10.5)
    assert drone[0, 1] == pytest.approx(7.5)
    truck, drone = build_matrices([(2, 2), (2, 2)], 40.0, 40.0)
    assert truck[0, 1] == 0 and drone[0, 1] == 0


def test_ponza_parameters():
    inst = generate(GeneratorParams("ponza", 50, 7))
    assert (inst.endurance, inst.service_launch, inst.service_return) == (24.0, 0.6, 0.5)
    assert int(inst.eligible.sum()) == round(0.8 * 49)


def test_agatz_alpha_scales_drone():
    inst = generate(GeneratorParams("uniform", 20, 3, alpha=2.0))
    assert np.array_equal(inst.drone_time, inst.truck_time / 2.0)
    assert inst.variant == TSPD and inst.endurance == math.inf
    assert inst.eligible[1:].all() and not inst.eligible[0]


@pytest.mark.parametrize("family", FAMILIES)
def test_generation_deterministic(family):
    a = serialize(generate(GeneratorParams(family, 15, 11)))
    b = serialize(generate(GeneratorParams(family, 15, 11)))
    assert a == b


def test_tsplib_recipe():
    inst = generate(GeneratorParams("tsplib", 52, 3, coords=berlin52()))
    assert round(0.85 * 51) <= int(inst.eligible.sum()) <= round(0.90 * 51)
    assert inst.truck_metric == "MANHATTAN"
    # Euclidean drone at equal speed never slower than the Manhattan truck
    assert np.all(inst.drone_time <= inst.truck_time + 1e-12)


def test_validate_messages():
    inst = generate(GeneratorParams("ponza", 5, 1))
    elig = inst.eligible.copy()
    elig[0] = True
    bad = Instance("x", inst.coords, elig, inst.truck_time, inst.drone_time)
    assert validate(bad) == ["depot marked drone-eligible"]
    t = inst.truck_time.copy()
    t[1, 2] += 1.0
    bad = Instance("x", inst.coords, inst.eligible, t, inst.drone_time)
    assert validate(bad) == ["asymmetric truck matrix at (1,2)"]


def test_read_coordinates_plain(tmp_path):
    p = tmp_path / "c.xy"
    p.write_text("1 0 0\n2 3 4\n# comment\n3 1.5 2\n")
    assert read_coordinates(p).tolist() == [[0, 0], [3, 4], [1.5, 2]]
    assert berlin52().shape == (52, 2)
