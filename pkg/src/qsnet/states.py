"""Probe-state constructors.

Covers the states the toolkit reasons about: per-sensor joint eigenbases of
commuting generators, separable surrogates that reproduce a probe's
diagonal Fisher blocks, canonical purifications and sensor-local
purification probes on the doubled space, extremal-superposition
single-sensor probes, sensor-entangled GHZ-like probes for one linear
functional, and the integer-allocation optimal separable probe.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from math import comb, prod
from typing import Callable

import numpy as np

from . import config
from .exceptions import LayoutError, NoncommutingGeneratorsError
from .hilbert import (
    DensityOperator,
    PureState,
    commutator,
    kron_vectors,
    sensor_marginal,
)
from .network import SensorNetwork, SensorSpec

__all__ = [
    "JointEigenbasis",
    "SensorFamily",
    "joint_eigenbasis",
    "separable_surrogate",
    "purify",
    "local_purification_probe",
    "extremal_superposition",
    "ghz_probe",
    "optimal_separable_probe",
    "product_defect",
]

# Fixed seed for the random mixing coefficients used by the simultaneous
# diagonalization; audits must reproduce bit-identically.
_MIX_SEED = 0x51B0


@dataclass(frozen=True)
class JointEigenbasis:
    """Simultaneous eigenbasis of one sensor's commuting generators.

    ``vectors`` holds orthonormal columns; ``labels[i, j]`` is the eigenvalue
    of generator ``j`` on column ``i``.
    """

    vectors: np.ndarray
    labels: np.ndarray

    @property
    def dim(self) -> int:
        return self.vectors.shape[0]


def _cluster(values: np.ndarray, tol: float) -> list[np.ndarray]:
    """Group indices of ascending ``values`` whose gaps stay within ``tol``."""
    if values.size == 0:
        return []
    breaks = np.nonzero(np.diff(values) > tol)[0]
    return [np.asarray(g) for g in np.split(np.arange(values.size), breaks + 1)]


def _simultaneous_eigenbasis(mats: list[np.ndarray], tol: float) -> tuple[np.ndarray, np.ndarray]:
    dim = mats[0].shape[0]
    rng = np.random.default_rng(_MIX_SEED)
    coeffs = rng.standard_normal(len(mats))
    combo = sum(c * m for c, m in zip(coeffs, mats))
    combo = (combo + combo.conj().T) / 2
    w, vectors = np.linalg.eigh(combo)
    # Clustering must be generous: eigenvectors attached to eigenvalues a
    # gap g apart mix by ~eps/g, so splitting anything closer than 1e-6
    # would freeze vectors too dirty for the 1e-9 residual contract.
    # Merged clusters are harmless, the refinement below cleans them.
    scale = max(1.0, float(np.max(np.abs(w))) if w.size else 1.0)
    blocks = _cluster(w, 1e-6 * scale)
    # Refine each degenerate block against every generator in turn; blocks
    # stay invariant under the remaining generators because they are unions
    # of joint eigenspaces.
    for mat in mats:
        refined = []
        for idx in blocks:
            if idx.size == 1:
                refined.append(idx)
                continue
            sub = vectors[:, idx]
            compressed = sub.conj().T @ mat @ sub
            compressed = (compressed + compressed.conj().T) / 2
            mu, u = np.linalg.eigh(compressed)
            vectors[:, idx] = sub @ u
            mscale = max(1.0, float(np.max(np.abs(mu))))
            refined.extend(idx[g] for g in _cluster(mu, 1e-6 * mscale))
        blocks = refined
    labels = np.empty((dim, len(mats)))
    for j, mat in enumerate(mats):
        transformed = vectors.conj().T @ mat @ vectors
        labels[:, j] = np.real(np.diag(transformed))
        off = transformed - np.diag(np.diag(transformed))
        defect = float(np.max(np.abs(off)))
        gen_scale = max(1.0, float(np.max(np.abs(mat))))
        if defect > tol * gen_scale:
            raise NoncommutingGeneratorsError(
                f"generator {j} is not diagonal in the joint basis (defect {defect:.3e})"
            )
    return vectors, labels


def joint_eigenbasis(sensor: SensorSpec, tol: float = config.COMMUTE_TOL) -> JointEigenbasis:
    """Joint eigenbasis of all of a sensor's generators.

    Requires them to commute mutually within ``tol``; otherwise raises
    :class:`NoncommutingGeneratorsError`, which signals the caller to switch
    to the local-ancilla purification route.
    """
    mats = list(sensor.generators)
    if not mats:
        return JointEigenbasis(np.eye(sensor.dim, dtype=complex), np.empty((sensor.dim, 0)))
    for i in range(len(mats)):
        for j in range(i + 1, len(mats)):
            defect = float(np.max(np.abs(commutator(mats[i], mats[j]))))
            if defect > tol:
                raise NoncommutingGeneratorsError(
                    f"generators {i} and {j} do not commute (defect {defect:.3e}); "
                    "this sensor needs the local-ancilla purification route"
                )
    vectors, labels = _simultaneous_eigenbasis(mats, tol)
    return JointEigenbasis(vectors, labels)


def separable_surrogate(psi: PureState, net: SensorNetwork) -> PureState:
    """Product state matching the probe's per-sensor eigenbasis statistics.

    Sensor ``k`` of the output carries amplitude ``sqrt(p_i)`` on joint
    eigenvector ``i``, where ``p_i`` is that eigenvector's probability in the
    probe's reduced state on sensor ``k``. Amplitudes are real nonnegative;
    for commuting generators the relative phases cannot affect the Fisher
    matrix.
    """
    if psi.layout != net.dims:
        raise LayoutError(f"state layout {psi.layout} does not match network {net.dims}")
    factors = []
    for site, sensor in enumerate(net.sensors):
        basis = joint_eigenbasis(sensor)
        rho = sensor_marginal(psi, site).matrix
        probs = np.real(np.einsum("ij,jk,ki->i", basis.vectors.conj().T, rho, basis.vectors))
        probs = np.clip(probs, 0.0, None)
        factors.append(basis.vectors @ np.sqrt(probs))
    return PureState(kron_vectors(factors), net.dims)


def purify(rho: DensityOperator) -> PureState:
    """Canonical purification ``sum_i sqrt(p_i) |v_i> x |v_i>``.

    The ancilla copy is appended as one extra subsystem of the full input
    dimension; tracing it out returns the input.
    """
    p, v = np.linalg.eigh(rho.matrix)
    p = np.clip(p, 0.0, None)
    dim = rho.dim
    vec = np.zeros(dim * dim, dtype=complex)
    for i in range(dim):
        if p[i] <= 0.0:
            continue
        vec += np.sqrt(p[i]) * np.kron(v[:, i], v[:, i])
    vec /= np.linalg.norm(vec)
    return PureState(vec, rho.layout + (dim,))


def local_purification_probe(rho: DensityOperator, net: SensorNetwork) -> PureState:
    """Product of per-sensor purifications on the doubled network layout.

    Sensor ``k``'s factor purifies the probe's reduced state on that sensor
    into a same-dimension local ancilla, so the output lives on the
    interleaved layout ``(q_1, q_1, q_2, q_2, ...)`` produced by
    :func:`qsnet.network.doubled`. Its Fisher matrix is block-diagonal with
    the same diagonal blocks as any global purification of the probe.
    """
    if rho.layout != net.dims:
        raise LayoutError(f"state layout {rho.layout} does not match network {net.dims}")
    factors = []
    layout = []
    for site, sensor in enumerate(net.sensors):
        local = sensor_marginal(rho, site)
        factors.append(purify(local).amplitudes)
        layout.extend([sensor.dim, sensor.dim])
    return PureState(kron_vectors(factors), tuple(layout))


@dataclass(frozen=True)
class SensorFamily:
    """Particle-count-indexed sensor constructor with linear spectral width.

    ``sensor_for(n)`` returns the sensor housing ``n`` particles; its single
    generator must have spectral width ``kappa * n``. ``sensor_for(0)`` is
    the trivial one-dimensional sensor.
    """

    kappa: float
    sensor_for: Callable[[int], SensorSpec]


def _extremal_pair(sensor: SensorSpec) -> tuple[np.ndarray, np.ndarray]:
    if len(sensor.generators) != 1:
        raise ValueError("extremal construction needs a single-generator sensor")
    w, v = np.linalg.eigh(np.asarray(sensor.generators[0]))
    # Ties inside an extremal eigenspace break to the lowest eigh index.
    tie = 1e-9 * max(1.0, float(np.max(np.abs(w))))
    lo = v[:, 0]
    hi_index = int(np.nonzero(w >= w[-1] - tie)[0][0])
    hi = v[:, hi_index]
    return lo, hi


def extremal_superposition(family: SensorFamily, n: int) -> PureState:
    """Equal superposition of the extremal generator eigenvectors for ``n``
    particles, the optimal single-sensor probe at that particle count."""
    if n < 0:
        raise ValueError("particle count must be nonnegative")
    sensor = family.sensor_for(n)
    lo, hi = _extremal_pair(sensor)
    vec = lo + hi
    vec = vec / np.linalg.norm(vec)
    return PureState(vec, (sensor.dim,))


def _check_direction(v) -> np.ndarray:
    vec = np.asarray(v, dtype=float).reshape(-1)
    if vec.size == 0:
        raise ValueError("empty coefficient vector")
    if np.any(vec < -1e-12):
        raise ValueError("coefficient vector must be nonnegative")
    vec = np.clip(vec, 0.0, None)
    norm = float(np.linalg.norm(vec))
    if abs(norm - 1.0) > 1e-9:
        raise ValueError(f"coefficient vector must have unit 2-norm, got {norm!r}")
    return vec


def ghz_probe(v, n_particles: int, family: SensorFamily) -> tuple[PureState, SensorNetwork]:
    """Sensor-entangled GHZ-like probe for the linear functional ``v . phi``.

    Distributes ``tilde_v_k = N v_k / ||v||_1`` particles to sensor ``k``
    (every ``tilde_v_k`` must be an integer) and superposes the all-maximal
    and all-minimal extremal branches. Returns the probe together with the
    network it lives on, since sensor dimensions depend on the allocation.
    """
    vec = _check_direction(v)
    if n_particles < 1:
        raise ValueError("particle budget must be positive")
    tilde = n_particles * vec / np.sum(vec)
    counts = np.rint(tilde).astype(int)
    for k, (target, got) in enumerate(zip(tilde, counts)):
        if abs(target - got) > 1e-9:
            raise ValueError(
                f"allocation N*v/||v||_1 is not integral at sensor {k}: {target!r}"
            )
    sensors = [family.sensor_for(int(c)) for c in counts]
    net = SensorNetwork(tuple(sensors))
    los, his = [], []
    for sensor in sensors:
        lo, hi = _extremal_pair(sensor)
        los.append(lo)
        his.append(hi)
    branch = kron_vectors(his) + kron_vectors(los)
    branch = branch / np.linalg.norm(branch)
    return PureState(branch, net.dims), net


def _allocation_cost(v: np.ndarray, w: np.ndarray) -> float:
    """Variance objective sum_k (v_k / w_k)^2 over weighted sensors."""
    cost = 0.0
    for vk, wk in zip(v, w):
        if vk <= 0.0:
            continue
        if wk == 0:
            return np.inf
        cost += (vk / wk) ** 2
    return cost


def _compositions(total: int, parts: int):
    for cuts in combinations(range(total + parts - 1), parts - 1):
        prev = -1
        w = []
        for c in cuts:
            w.append(c - prev - 1)
            prev = c
        w.append(total + parts - 2 - prev)
        yield np.array(w, dtype=int)


def _greedy_allocation(v: np.ndarray, total: int) -> np.ndarray:
    frac = v ** (2.0 / 3.0)
    frac = frac / np.sum(frac)
    w = np.floor(total * frac).astype(int)
    while int(w.sum()) < total:
        best_k, best_gain = 0, -np.inf
        for k in range(v.size):
            if v[k] <= 0.0:
                continue
            trial = w.copy()
            trial[k] += 1
            gain = _allocation_cost(v, w) - _allocation_cost(v, trial)
            if gain > best_gain:
                best_k, best_gain = k, gain
        w[best_k] += 1
    # Pairwise transfers until no single-particle move improves the cost.
    improved = True
    while improved:
        improved = False
        base = _allocation_cost(v, w)
        for src in range(v.size):
            if w[src] == 0:
                continue
            for dst in range(v.size):
                if dst == src:
                    continue
                trial = w.copy()
                trial[src] -= 1
                trial[dst] += 1
                if _allocation_cost(v, trial) < base - 1e-15:
                    w = trial
                    base = _allocation_cost(v, w)
                    improved = True
    return w


def optimal_separable_probe(
    v,
    n_particles: int,
    family: SensorFamily,
    exhaustive_limit: int = 10**6,
) -> tuple[PureState, SensorNetwork, np.ndarray]:
    """Best product of extremal superpositions for estimating ``v . phi``.

    Minimizes ``sum_k v_k^2 / w_k^2`` over integer allocations with
    ``sum w_k = N``: exhaustively when the composition count stays within
    ``exhaustive_limit``, otherwise greedy rounding of the continuous
    optimum followed by single-particle transfers. Sensors with ``w_k = 0``
    contribute trivial factors.
    """
    vec = _check_direction(v)
    if n_particles < 1:
        raise ValueError("particle budget must be positive")
    d = vec.size
    if n_particles < int(np.count_nonzero(vec > 0.0)):
        raise ValueError("budget too small: some weighted sensor would get no particles")
    if comb(n_particles + d - 1, d - 1) <= exhaustive_limit:
        best_w, best_cost = None, np.inf
        for w in _compositions(n_particles, d):
            cost = _allocation_cost(vec, w)
            if cost < best_cost - 1e-15:
                best_w, best_cost = w, cost
    else:
        best_w = _greedy_allocation(vec, n_particles)
    sensors = [family.sensor_for(int(c)) for c in best_w]
    net = SensorNetwork(tuple(sensors))
    factors = [extremal_superposition(family, int(c)).amplitudes for c in best_w]
    return PureState(kron_vectors(factors), net.dims), net, best_w


def product_defect(psi: PureState, groups=None) -> float:
    """Largest second Schmidt coefficient over all (group | rest) splits.

    ``groups`` lists the subsystem indices forming each separability unit;
    by default every subsystem is its own unit. Zero (within roundoff)
    exactly when the state is a product across every group boundary.
    """
    dims = psi.layout
    n = len(dims)
    if groups is None:
        groups = [(i,) for i in range(n)]
    groups = [tuple(int(i) for i in g) for g in groups]
    if sorted(i for g in groups for i in g) != list(range(n)):
        raise LayoutError(f"groups {groups} do not partition {n} subsystems")
    if len(groups) == 1:
        return 0.0
    worst = 0.0
    tensor = psi.amplitudes.reshape(dims)
    for group in groups:
        rest = [i for i in range(n) if i not in group]
        gdim = prod(dims[i] for i in group)
        mat = tensor.transpose(list(group) + rest).reshape(gdim, psi.dim // gdim)
        sv = np.linalg.svd(mat, compute_uv=False)
        if sv.size > 1:
            worst = max(worst, float(sv[1]))
    return worst
