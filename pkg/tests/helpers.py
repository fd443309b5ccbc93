"""Small hand-built instances shared by the tests."""
import numpy as np

from fstsp.instance import FSTSP, Instance, build_matrices


def make_instance(coords, eligible=None, truck_speed=40.0, drone_speed=80.0, endurance=100.0,
                  sl=0.0, sr=0.0, variant=FSTSP, name="t"):
    c = np.asarray(coords, dtype=float)
    if eligible is None:
        eligible = [0] + [1] * (len(c) - 1)
    truck, drone = build_matrices(c, truck_speed, drone_speed)
    return Instance(name, c, np.asarray(eligible, dtype=bool), truck, drone, endurance=endurance,
                    service_launch=sl, service_return=sr, variant=variant,
                    truck_speed=truck_speed, drone_speed=drone_speed)


def matrix_instance(truck, drone, eligible=None, endurance=100.0, sl=0.0, sr=0.0, variant=FSTSP):
    truck = np.asarray(truck, dtype=float)
    n = len(truck)
    if eligible is None:
        eligible = [0] + [1] * (n - 1)
    return Instance("m", np.zeros((n, 2)), np.asarray(eligible, dtype=bool), truck,
                    np.asarray(drone, dtype=float), endurance=endurance,
                    service_launch=sl, service_return=sr, variant=variant)


# Relocation example: unpaired segments {0,5} and {1,6,4,2,8}
FIG7_COORDS = [(0, 0), (8, 0), (12, 0), (7, -4), (9, 1), (4, 0), (10, 0), (6, 2), (14, 0)]
FIG7_TOUR = (0, 5, 1, 6, 4, 2, 8, 0)

# Exchange example with a retargeted return node
FIG5_COORDS = [(0, 0), (2, 0), (3, 0), (6, 0), (3, 1), (1, 0), (4, 0), (1.5, 1), (7, 0)]
FIG5_TOUR = (0, 5, 1, 2, 6, 3, 8, 0)
