"""Sensor-network model: local generators, parameter partition, resources.

A network is an ordered list of sensors. Sensor ``k`` carries the Hermitian
generators of the parameters written into it and one Hermitian resource
operator. Parameters are numbered globally in sensor order, which induces
the partition used everywhere for block-structured Fisher analysis.

The parameter encoding is the product unitary
``U(phi) = prod_k exp(-i * sum_{j in P_k} phi_j H_j)`` acting on the full
space; Fisher-information quantities are evaluated at the fiducial point
``phi = 0``, where the exponent coefficients coincide with the generators
even when a sensor's generators do not commute.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from math import prod
import numpy as np

from . import config
from .exceptions import FormatError, LayoutError
from .hilbert import (
    DensityOperator,
    PureState,
    State,
    embed_local,
    commutator,
    expm_i,
    identity,
    kron_all,
    matrix_from_json,
    matrix_to_json,
    require_hermitian,
)

__all__ = [
    "SensorSpec",
    "SensorNetwork",
    "NetworkDiagnostics",
    "validate",
    "global_generator",
    "global_generators",
    "encode",
    "total_resource_operator",
    "resource_count",
    "doubled",
    "with_collective_ancilla",
    "network_to_json",
    "network_from_json",
    "load_network",
]


@dataclass(frozen=True)
class SensorSpec:
    """One sensor: local dimension, parameter generators, resource operator.

    An empty generator tuple marks a pure ancilla; it contributes no
    parameters but still takes part in resource counting.
    """

    dim: int
    generators: tuple[np.ndarray, ...]
    resource_op: np.ndarray

    def __post_init__(self):
        dim = int(self.dim)
        if dim < 1:
            raise ValueError(f"sensor dimension must be positive, got {dim}")
        gens = []
        for i, g in enumerate(self.generators):
            mat = require_hermitian(g, name=f"generator {i}")
            if mat.shape != (dim, dim):
                raise LayoutError(f"generator {i} has shape {mat.shape}, sensor dim {dim}")
            mat = mat.copy()
            mat.setflags(write=False)
            gens.append(mat)
        res = require_hermitian(self.resource_op, name="resource operator")
        if res.shape != (dim, dim):
            raise LayoutError(f"resource operator has shape {res.shape}, sensor dim {dim}")
        res = res.copy()
        res.setflags(write=False)
        object.__setattr__(self, "dim", dim)
        object.__setattr__(self, "generators", tuple(gens))
        object.__setattr__(self, "resource_op", res)

    @property
    def n_params(self) -> int:
        return len(self.generators)

    def is_ancilla(self) -> bool:
        return not self.generators


@dataclass(frozen=True)
class SensorNetwork:
    sensors: tuple[SensorSpec, ...]

    def __post_init__(self):
        sensors = tuple(self.sensors)
        if not sensors:
            raise ValueError("a network needs at least one sensor")
        if sum(s.n_params for s in sensors) < 1:
            raise ValueError("a network needs at least one parameter")
        total = prod(s.dim for s in sensors)
        if total > config.max_dim():
            raise LayoutError(f"total dimension {total} exceeds cap {config.max_dim()}")
        object.__setattr__(self, "sensors", sensors)

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(s.dim for s in self.sensors)

    @property
    def total_dim(self) -> int:
        return prod(self.dims)

    @property
    def n_params(self) -> int:
        return sum(s.n_params for s in self.sensors)

    @property
    def partition(self) -> tuple[tuple[int, ...], ...]:
        """Global parameter indices per sensor, ancilla sensors skipped."""
        blocks = []
        start = 0
        for s in self.sensors:
            if s.n_params:
                blocks.append(tuple(range(start, start + s.n_params)))
                start += s.n_params
        return tuple(blocks)

    def sensor_of_param(self, k: int) -> tuple[int, int]:
        """Map a global parameter index to (sensor index, local index)."""
        if not 0 <= k < self.n_params:
            raise IndexError(f"parameter index {k} outside 0..{self.n_params - 1}")
        offset = 0
        for site, s in enumerate(self.sensors):
            if k < offset + s.n_params:
                return site, k - offset
            offset += s.n_params
        raise AssertionError("unreachable")


@dataclass(frozen=True)
class NetworkDiagnostics:
    """Per-sensor commutation structure and resource-conservation report."""

    commutator_tables: tuple[np.ndarray, ...]
    resource_residuals: tuple[np.ndarray, ...]
    all_commuting: bool
    resource_conserved: bool
    tol: float


def validate(net: SensorNetwork, commute_tol: float = config.COMMUTE_TOL) -> NetworkDiagnostics:
    """Report which sensors have mutually commuting generators.

    ``all_commuting`` selects between the two analysis regimes: when true,
    separable-surrogate constructions apply directly; otherwise the
    local-ancilla purification route is needed. Resource operators that fail
    to commute with their sensor's generators are reported, not rejected,
    since resource conservation then depends on the probe.
    """
    tables = []
    res_tables = []
    commuting = True
    conserved = True
    for s in net.sensors:
        g = s.n_params
        table = np.zeros((g, g))
        for i in range(g):
            for j in range(i + 1, g):
                r = float(np.max(np.abs(commutator(s.generators[i], s.generators[j]))))
                table[i, j] = table[j, i] = r
                if r > commute_tol:
                    commuting = False
        tables.append(table)
        res = np.array(
            [float(np.max(np.abs(commutator(s.resource_op, gj)))) for gj in s.generators]
        )
        if res.size and float(res.max()) > commute_tol:
            conserved = False
        res_tables.append(res)
    return NetworkDiagnostics(
        commutator_tables=tuple(tables),
        resource_residuals=tuple(res_tables),
        all_commuting=commuting,
        resource_conserved=conserved,
        tol=commute_tol,
    )


def global_generator(net: SensorNetwork, k: int) -> np.ndarray:
    """Generator of parameter ``k`` embedded into the full network space."""
    site, local = net.sensor_of_param(k)
    return embed_local(net.sensors[site].generators[local], site, net.dims)


def global_generators(net: SensorNetwork) -> list[np.ndarray]:
    return [global_generator(net, k) for k in range(net.n_params)]


def _check_phi(net: SensorNetwork, phi) -> np.ndarray:
    values = np.asarray(phi, dtype=float).reshape(-1)
    if values.size != net.n_params:
        raise LayoutError(f"expected {net.n_params} parameters, got {values.size}")
    if not np.all(np.isfinite(values)):
        raise ValueError("parameter point contains non-finite values")
    return values


def encode(net: SensorNetwork, state: State, phi) -> State:
    """Apply the product encoding unitary for the parameter point ``phi``."""
    values = _check_phi(net, phi)
    if state.layout != net.dims:
        raise LayoutError(f"state layout {state.layout} does not match network {net.dims}")
    factors = []
    offset = 0
    for s in net.sensors:
        if s.n_params == 0:
            factors.append(identity(s.dim))
            continue
        exponent = np.zeros((s.dim, s.dim), dtype=complex)
        for j, g in enumerate(s.generators):
            exponent += values[offset + j] * g
        offset += s.n_params
        factors.append(expm_i(exponent))
    unitary = kron_all(factors)
    if isinstance(state, PureState):
        return PureState(unitary @ state.amplitudes, state.layout)
    evolved = unitary @ state.matrix @ unitary.conj().T
    return DensityOperator(evolved, state.layout)


def total_resource_operator(net: SensorNetwork) -> np.ndarray:
    """Sum of every sensor's resource operator embedded in the full space."""
    total = np.zeros((net.total_dim, net.total_dim), dtype=complex)
    for site, s in enumerate(net.sensors):
        total += embed_local(s.resource_op, site, net.dims)
    return total

def resource_count(net: SensorNetwork, state: State) -> float:
    """Expectation of the total resource operator in the given state."""
    if state.layout != net.dims:
        raise LayoutError(f"state layout {state.layout} does not match network {net.dims}")
    total = total_resource_operator(net)
    if isinstance(state, PureState):
        return float(np.real(np.vdot(state.amplitudes, total @ state.amplitudes)))
    return float(np.real(np.trace(total @ state.matrix)))


def doubled(net: SensorNetwork) -> SensorNetwork:
    """Sensor-plus-local-ancilla network.

    Every sensor is followed by an ancilla of the same dimension carrying no
    parameters and a mirrored resource operator, so ancilla resources count
    on an equal footing with sensor resources.
    """
    out = []
    for s in net.sensors:
        out.append(s)
        out.append(SensorSpec(s.dim, (), s.resource_op))
    return SensorNetwork(tuple(out))


def with_collective_ancilla(net: SensorNetwork) -> SensorNetwork:
    """Original sensors plus a single parameter-free ancilla of the full
    network dimension (the target space for one global purification).
    Ancilla resources are not counted here (zero resource operator)."""
    ancilla = SensorSpec(net.total_dim, (), np.zeros((net.total_dim, net.total_dim)))
    return SensorNetwork(net.sensors + (ancilla,))


# --- strict JSON ingestion ---------------------------------------------------


def network_to_json(net: SensorNetwork) -> dict:
    return {
        "sensors": [
            {
                "dim": s.dim,
                "generators": [matrix_to_json(g) for g in s.generators],
                "resource": matrix_to_json(s.resource_op),
            }
            for s in net.sensors
        ]
    }


def _require_keys(obj: dict, keys: set[str], where: str) -> None:
    got = set(obj)
    if got != keys:
        unknown = sorted(got - keys)
        missing = sorted(keys - got)
        parts = []
        if unknown:
            parts.append(f"unknown fields {unknown}")
        if missing:
            parts.append(f"missing fields {missing}")
        raise FormatError(f"{where}: " + "; ".join(parts))


def network_from_json(obj) -> SensorNetwork:
    """Build a network from the wire format, rejecting unknown fields."""
    if not isinstance(obj, dict):
        raise FormatError("network document must be a JSON object")
    _require_keys(obj, {"sensors"}, "network")
    raw_sensors = obj["sensors"]
    if not isinstance(raw_sensors, list) or not raw_sensors:
        raise FormatError("network.sensors must be a non-empty list")
    sensors = []
    for i, raw in enumerate(raw_sensors):
        where = f"sensors[{i}]"
        if not isinstance(raw, dict):
            raise FormatError(f"{where}: expected an object")
        _require_keys(raw, {"dim", "generators", "resource"}, where)
        dim = raw["dim"]
        if isinstance(dim, bool) or not isinstance(dim, int) or dim < 1:
            raise FormatError(f"{where}.dim: expected a positive integer, got {dim!r}")
        raw_gens = raw["generators"]
        if not isinstance(raw_gens, list):
            raise FormatError(f"{where}.generators: expected a list of matrices")
        gens = [
            matrix_from_json(g, where=f"{where}.generators[{j}]")
            for j, g in enumerate(raw_gens)
        ]
        resource = matrix_from_json(raw["resource"], where=f"{where}.resource")
        try:
            sensors.append(SensorSpec(dim, tuple(gens), resource))
        except ValueError as exc:
            raise FormatError(f"{where}: {exc}") from exc
    try:
        return SensorNetwork(tuple(sensors))
    except ValueError as exc:
        raise FormatError(f"network: {exc}") from exc


def load_network(path) -> SensorNetwork:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise FormatError(f"{path}: invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    return network_from_json(obj)
