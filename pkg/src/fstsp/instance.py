"""Problem instances: the canonical text format, travel-time matrices and the
benchmark generators (Ponza-style maps, Agatz TSP-D families, TSPLIB-derived).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from pathlib import Path

import numpy as np

FSTSP = "FSTSP"
TSPD = "TSPD"
VARIANTS = (FSTSP, TSPD)
METRICS = ("EUCLIDEAN", "MANHATTAN")


class ParseError(ValueError):
    """Malformed instance document; carries the 1-based line number."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


class InstanceError(ValueError):
    """The document parsed but describes an invalid instance."""


class Family(str, Enum):
    PONZA = "ponza"
    AGATZ_UNIFORM = "uniform"
    AGATZ_SINGLE_CENTER = "single-center"
    AGATZ_DOUBLE_CENTER = "double-center"
    TSPLIB = "tsplib"


@dataclass(frozen=True, eq=False)
class Instance:
    name: str
    coords: np.ndarray
    eligible: np.ndarray
    truck_time: np.ndarray
    drone_time: np.ndarray
    endurance: float = math.inf
    service_launch: float = 0.0
    service_return: float = 0.0
    variant: str = FSTSP
    truck_speed: float = 1.0
    drone_speed: float = 1.0
    truck_metric: str = "EUCLIDEAN"
    drone_metric: str = "EUCLIDEAN"

    def __post_init__(self):
        for attr, dtype in (("coords", float), ("eligible", bool),
                            ("truck_time", float), ("drone_time", float)):
            arr = np.array(getattr(self, attr), dtype=dtype)
            arr.setflags(write=False)
            object.__setattr__(self, attr, arr)

    @property
    def n(self) -> int:
        return len(self.eligible)

    @property
    def customers(self) -> range:
        return range(1, self.n)

    @property
    def drone_eligible(self) -> list[int]:
        return [int(i) for i in np.flatnonzero(self.eligible)]

    # Nested lists are much faster than ndarray item access in scalar loops.
    @cached_property
    def tt(self) -> list[list[float]]:
        return self.truck_time.tolist()

    @cached_property
    def dt(self) -> list[list[float]]:
        return self.drone_time.tolist()

    def __eq__(self, other):
        if not isinstance(other, Instance):
            return NotImplemented
        scalars = ("name", "endurance", "service_launch", "service_return", "variant",
                   "truck_speed", "drone_speed", "truck_metric", "drone_metric")
        return (all(getattr(self, s) == getattr(other, s) for s in scalars)
                and all(np.array_equal(getattr(self, a), getattr(other, a))
                        for a in ("coords", "eligible", "truck_time", "drone_time")))

    __hash__ = None


def _distances(coords: np.ndarray, metric: str) -> np.ndarray:
    diff = coords[:, None, :] - coords[None, :, :]
    if metric == "MANHATTAN":
        return np.abs(diff).sum(axis=2)
    if metric == "EUCLIDEAN":
        return np.hypot(diff[..., 0], diff[..., 1])
    raise ValueError(f"unknown metric {metric!r}")


def build_matrices(coords, truck_speed: float, drone_speed: float,
                   truck_metric: str = "EUCLIDEAN", drone_metric: str = "EUCLIDEAN"):
    """Travel times in minutes for coordinates in km and speeds in km/h."""
    coords = np.asarray(coords, dtype=float).reshape(-1, 2)
    if not np.all(np.isfinite(coords)):
        raise ValueError("non-finite coordinate")
    if truck_speed <= 0 or drone_speed <= 0:
        raise ValueError("speeds must be positive")
    truck = _distances(coords, truck_metric.upper()) / truck_speed * 60.0
    drone = _distances(coords, drone_metric.upper()) / drone_speed * 60.0
    return truck, drone


def validate(instance: Instance) -> list[str]:
    """All invariant violations of ``instance``; empty when it is well formed."""
    out = []
    n = instance.n
    if instance.coords.shape != (n, 2):
        out.append(f"coords shape {instance.coords.shape} does not match n={n}")
    if n and instance.eligible[0]:
        out.append("depot marked drone-eligible")
    for label, mat in (("truck", instance.truck_time), ("drone", instance.drone_time)):
        if mat.shape != (n, n):
            out.append(f"{label} matrix shape {mat.shape} does not match n={n}")
            continue
        if not np.all(np.isfinite(mat)):
            i, j = np.argwhere(~np.isfinite(mat))[0]
            out.append(f"non-finite {label} matrix entry at ({i},{j})")
            continue
        if np.any(mat < 0):
            i, j = np.argwhere(mat < 0)[0]
            out.append(f"negative {label} matrix entry at ({i},{j})")
        diag = np.flatnonzero(np.diag(mat) != 0)
        if diag.size:
            out.append(f"non-zero diagonal in {label} matrix at ({diag[0]},{diag[0]})")
        asym = np.argwhere(np.triu(np.abs(mat - mat.T) > 1e-9))
        if asym.size:
            i, j = asym[0]
            out.append(f"asymmetric {label} matrix at ({i},{j})")
    if instance.variant not in VARIANTS:
        out.append(f"unknown variant {instance.variant!r}")
    if instance.variant == TSPD:
        if instance.endurance != math.inf:
            out.append("TSPD requires infinite endurance")
        if instance.service_launch != 0 or instance.service_return != 0:
            out.append("TSPD forbids service times")
    if instance.endurance < 0 or instance.service_launch < 0 or instance.service_return < 0:
        out.append("negative endurance or service time")
    return out


# --------------------------------------------------------------------------
# canonical text format

def _fmt(x: float) -> str:
    if x == math.inf:
        return "INF"
    return repr(float(x))


def serialize(instance: Instance, include_matrices: bool = True) -> str:
    lines = [
        f"NAME {instance.name}",
        f"VARIANT {instance.variant}",
        f"N {instance.n}",
        f"TRUCK_SPEED {_fmt(instance.truck_speed)} DRONE_SPEED {_fmt(instance.drone_speed)}",
        f"TRUCK_METRIC {instance.truck_metric} DRONE_METRIC {instance.drone_metric}",
        f"ENDURANCE {_fmt(instance.endurance)}",
        f"SL {_fmt(instance.service_launch)} SR {_fmt(instance.service_return)}",
        "NODES",
    ]
    for i, ((x, y), e) in enumerate(zip(instance.coords, instance.eligible)):
        lines.append(f"{i} {_fmt(x)} {_fmt(y)} {int(bool(e))}")
    if include_matrices:
        for key, mat in (("TRUCK_MATRIX", instance.truck_time), ("DRONE_MATRIX", instance.drone_time)):
            lines.append(key)
            lines.extend(" ".join(_fmt(v) for v in row) for row in mat)
    lines.append("EOF")
    return "\n".join(lines) + "\n"


def _number(tok: str, lineno: int) -> float:
    if tok.upper() == "INF":
        return math.inf
    try:
        return float(tok)
    except ValueError:
        raise ParseError(f"expected a number, got {tok!r}", lineno) from None


def parse_instance(text: str) -> Instance:
    rows = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            rows.append((lineno, line.split()))

    header = {}
    coords, eligible, matrices = None, None, {}
    n = None
    k = 0
    while k < len(rows):
        lineno, toks = rows[k]
        key = toks[0].upper()
        if key == "EOF":
            break
        if key == "NODES":
            if n is None:
                raise ParseError("NODES before N", lineno)
            block = rows[k + 1:k + 1 + n]
            if len(block) < n:
                raise ParseError(f"expected {n} node lines", lineno)
            coords = np.zeros((n, 2))
            eligible = np.zeros(n, dtype=bool)
            seen = set()
            for ln, t in block:
                if len(t) != 4:
                    raise ParseError("node line needs: id x y eligible", ln)
                try:
                    i = int(t[0])
                except ValueError:
                    raise ParseError(f"bad node id {t[0]!r}", ln) from None
                if not 0 <= i < n or i in seen:
                    raise ParseError(f"node id {i} out of range or repeated", ln)
                if t[3] not in ("0", "1"):
                    raise ParseError("eligible flag must be 0 or 1", ln)
                seen.add(i)
                coords[i] = (_number(t[1], ln), _number(t[2], ln))
                eligible[i] = t[3] == "1"
            k += 1 + n
            continue
        if key in ("TRUCK_MATRIX", "DRONE_MATRIX"):
            if n is None:
                raise ParseError(f"{key} before N", lineno)
            block = rows[k + 1:k + 1 + n]
            if len(block) < n:
                raise ParseError(f"expected {n} rows in {key}", lineno)
            mat = np.zeros((n, n))
            for r, (ln, t) in enumerate(block):
                if len(t) != n:
                    raise ParseError(f"{key} row has {len(t)} entries, expected {n}", ln)
                mat[r] = [_number(v, ln) for v in t]
            matrices[key] = mat
            k += 1 + n
            continue
        if key == "NAME":
            header["NAME"] = " ".join(toks[1:])
            k += 1
            continue
        if len(toks) % 2:
            raise ParseError(f"expected KEY VALUE pairs, got {' '.join(toks)!r}", lineno)
        for j in range(0, len(toks), 2):
            kw, val = toks[j].upper(), toks[j + 1]
            if kw == "N":
                try:
                    n = int(val)
                except ValueError:
                    raise ParseError(f"bad N {val!r}", lineno) from None
                if n < 1:
                    raise ParseError("N must be at least 1", lineno)
            elif kw in ("NAME", "VARIANT", "TRUCK_METRIC", "DRONE_METRIC"):
                header[kw] = val
            elif kw in ("TRUCK_SPEED", "DRONE_SPEED", "ENDURANCE", "SL", "SR"):
                header[kw] = _number(val, lineno)
            else:
                raise ParseError(f"unknown keyword {toks[j]!r}", lineno)
        k += 1

    if n is None or coords is None:
        raise ParseError("missing N or NODES section")
    variant = header.get("VARIANT", FSTSP).upper()
    if variant not in VARIANTS:
        raise ParseError(f"unknown variant {variant!r}")
    sl, sr = header.get("SL", 0.0), header.get("SR", 0.0)
    if variant == TSPD and (sl != 0 or sr != 0):
        raise InstanceError("TSPD forbids service times")
    truck_speed = header.get("TRUCK_SPEED", 1.0)
    drone_speed = header.get("DRONE_SPEED", 1.0)
    tm = header.get("TRUCK_METRIC", "EUCLIDEAN").upper()
    dm = header.get("DRONE_METRIC", "EUCLIDEAN").upper()
    if tm not in METRICS or dm not in METRICS:
        raise ParseError(f"unknown metric in {tm!r}/{dm!r}")
    if "TRUCK_MATRIX" in matrices and "DRONE_MATRIX" in matrices:
        truck, drone = matrices["TRUCK_MATRIX"], matrices["DRONE_MATRIX"]
    else:
        truck, drone = build_matrices(coords, truck_speed, drone_speed, tm, dm)
        truck = matrices.get("TRUCK_MATRIX", truck)
        drone = matrices.get("DRONE_MATRIX", drone)
    inst = Instance(
        name=header.get("NAME", "unnamed"), coords=coords, eligible=eligible,
        truck_time=truck, drone_time=drone,
        endurance=header.get("ENDURANCE", math.inf),
        service_launch=sl, service_return=sr, variant=variant,
        truck_speed=truck_speed, drone_speed=drone_speed, truck_metric=tm, drone_metric=dm,
    )
    problems = validate(inst)
    if problems:
        raise InstanceError("; ".join(problems))
    return inst


def read_instance(path) -> Instance:
    return parse_instance(Path(path).read_text(encoding="utf-8"))


def write_instance(instance: Instance, path, include_matrices: bool = True) -> None:
    Path(path).write_text(serialize(instance, include_matrices), encoding="utf-8")


def read_coordinates(path) -> np.ndarray:
    """Coordinates from a TSPLIB ``.tsp`` file or plain ``[id] x y`` lines."""
    text = Path(path).read_text(encoding="utf-8")
    lines = text.splitlines()
    if any(ln.strip().upper().startswith("NODE_COORD_SECTION") for ln in lines):
        start = next(i for i, ln in enumerate(lines)
                     if ln.strip().upper().startswith("NODE_COORD_SECTION")) + 1
        body = []
        for ln in lines[start:]:
            ln = ln.strip()
            if not ln or ln.upper() == "EOF":
                break
            body.append(ln.split()[1:3])
    else:
        body = []
        for ln in lines:
            toks = ln.split("#", 1)[0].split()
            if toks:
                body.append(toks[-2:])
    return np.array(body, dtype=float)


def berlin52() -> np.ndarray:
    return read_coordinates(Path(__file__).with_name("data") / "berlin52.tsp")


# --------------------------------------------------------------------------
# generators

@dataclass
class GeneratorParams:
    family: Family | str
    n: int
    rng_seed: int = 0
    alpha: float = 1.0
    eligible_fraction_range: tuple[float, float] = (0.85, 0.90)
    truck_speed: float | None = None
    drone_speed: float | None = None
    coords: np.ndarray | None = None
    name: str | None = None
    # Ponza-style map
    map_size: float = 32.0
    eligible_fraction: float = 0.8
    # Agatz single/double-center shape; not published, see README
    sigma: float = 50.0
    shift: float = 200.0
    shift_probability: float = 0.5
    # TSPLIB-derived
    coord_scale: float = 1.0 / 60.0
    endurance: float | None = None
    service_launch: float | None = None
    service_return: float | None = None
    extra: dict = field(default_factory=dict)


def _sample_eligible(rng, n: int, count: int) -> np.ndarray:
    eligible = np.zeros(n, dtype=bool)
    count = max(0, min(count, n - 1))
    if count:
        eligible[1 + rng.choice(n - 1, size=count, replace=False)] = True
    return eligible


def generate(params: GeneratorParams) -> Instance:
    try:
        family = Family(params.family)
    except ValueError:
        raise ValueError(f"unknown family {params.family!r}") from None
    n = params.n
    if n < 1:
        raise ValueError("n must be at least 1")
    lo, hi = params.eligible_fraction_range
    if not 0 <= lo <= hi <= 1:
        raise ValueError("eligible_fraction_range must satisfy 0 <= lo <= hi <= 1")
    rng = np.random.default_rng(params.rng_seed)
    name = params.name or f"{family.value}-{n}-{params.rng_seed}"

    if family is Family.PONZA:
        coords = np.vstack([[0.0, 0.0], rng.uniform(0.0, params.map_size, size=(n - 1, 2))])
        eligible = _sample_eligible(rng, n, round(params.eligible_fraction * (n - 1)))
        ts = params.truck_speed or 56.32
        ds = params.drone_speed or 80.47
        truck, drone = build_matrices(coords, ts, ds, "EUCLIDEAN", "EUCLIDEAN")
        return Instance(name, coords, eligible, truck, drone,
                        endurance=_pick(params.endurance, 24.0),
                        service_launch=_pick(params.service_launch, 0.6),
                        service_return=_pick(params.service_return, 0.5),
                        variant=FSTSP, truck_speed=ts, drone_speed=ds)

    if family is Family.TSPLIB:
        if params.coords is None:
            raise ValueError("TSPLIB family needs coordinates")
        raw = np.asarray(params.coords, dtype=float)[:n]
        if len(raw) < n:
            raise ValueError(f"only {len(raw)} coordinates supplied for n={n}")
        coords = raw * params.coord_scale
        fraction = rng.uniform(lo, hi)
        eligible = _sample_eligible(rng, n, round(fraction * (n - 1)))
        ts = params.truck_speed or 40.0
        ds = params.drone_speed or 40.0
        truck, drone = build_matrices(coords, ts, ds, "MANHATTAN", "EUCLIDEAN")
        return Instance(name, coords, eligible, truck, drone,
                        endurance=_pick(params.endurance, 40.0),
                        service_launch=_pick(params.service_launch, 1.0),
                        service_return=_pick(params.service_return, 1.0),
                        variant=FSTSP, truck_speed=ts, drone_speed=ds,
                        truck_metric="MANHATTAN", drone_metric="EUCLIDEAN")

    if params.alpha <= 0:
        raise ValueError("alpha must be positive")
    if family is Family.AGATZ_UNIFORM:
        coords = rng.uniform(0.0, 100.0, size=(n, 2))
    else:
        angle = rng.uniform(0.0, 2 * math.pi, size=n)
        radius = np.abs(rng.normal(0.0, params.sigma, size=n))
        coords = np.column_stack([radius * np.cos(angle), radius * np.sin(angle)])
        if family is Family.AGATZ_DOUBLE_CENTER:
            coords[:, 0] += params.shift * (rng.uniform(size=n) < params.shift_probability)
    eligible = np.ones(n, dtype=bool)
    eligible[0] = False
    # Unit-less distance with truck speed 60 units/h, i.e. one minute per unit.
    truck, _ = build_matrices(coords, 60.0, 60.0)
    drone = truck / params.alpha
    return Instance(name, coords, eligible, truck, drone, endurance=math.inf,
                    service_launch=0.0, service_return=0.0, variant=TSPD,
                    truck_speed=60.0, drone_speed=60.0 * params.alpha)


def _pick(value, default):
    return default if value is None else value
