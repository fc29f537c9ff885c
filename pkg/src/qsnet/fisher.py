"""Quantum and classical Fisher-information machinery.

Quantum Fisher information matrices (QFIM) for pure probes come from the
covariance form ``F_mn = 2<{H_m, H_n}> - 4<H_m><H_n>`` evaluated at the
fiducial parameter point; mixed probes go through the symmetric logarithmic
derivatives (SLD) solved in the probe's eigenbasis. The scalar
Cramer-Rao bound for a diagonal weighting is
``sum_k W_kk [F^-1]_kk / mu``; singular matrices are never silently
pseudo-inverted, the report flags them and restricts to the support.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import config
from .exceptions import LayoutError
from .hilbert import DensityOperator, PureState, State, require_hermitian
from .network import SensorNetwork, encode

__all__ = [
    "QFIM",
    "BoundReport",
    "qfim_pure",
    "qfim_mixed",
    "qcrb",
    "rotate_qfim",
    "orthogonal_completion",
    "inverse_block",
    "block_inverse_residuals",
    "cfim",
]


def _full_partition(d: int) -> tuple[tuple[int, ...], ...]:
    return (tuple(range(d)),)


@dataclass(frozen=True)
class QFIM:
    """Real symmetric PSD information matrix with a parameter partition.

    The partition records which parameters live on which sensor; it drives
    the block accessors. A matrix without block structure carries the single
    full block.
    """

    matrix: np.ndarray
    partition: tuple[tuple[int, ...], ...] = ()

    def __post_init__(self):
        mat = np.asarray(self.matrix, dtype=float)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise ValueError(f"information matrix must be square, got {mat.shape}")
        scale = max(1.0, float(np.max(np.abs(mat))) if mat.size else 1.0)
        if float(np.max(np.abs(mat - mat.T))) > 1e-10 * scale:
            raise ValueError("information matrix is not symmetric")
        mat = (mat + mat.T) / 2
        lo = float(np.linalg.eigvalsh(mat)[0])
        if lo < -1e-9 * scale:
            raise ValueError(f"information matrix has eigenvalue {lo:.3e} < 0")
        partition = tuple(tuple(int(i) for i in blk) for blk in self.partition)
        if not partition:
            partition = _full_partition(mat.shape[0])
        flat = [i for blk in partition for i in blk]
        if flat != list(range(mat.shape[0])):
            raise ValueError(f"partition {partition} does not tile 0..{mat.shape[0] - 1}")
        mat = mat.copy()
        mat.setflags(write=False)
        object.__setattr__(self, "matrix", mat)
        object.__setattr__(self, "partition", partition)

    @property
    def d(self) -> int:
        return self.matrix.shape[0]

    @property
    def n_blocks(self) -> int:
        return len(self.partition)

    def block(self, k: int) -> np.ndarray:
        idx = np.asarray(self.partition[k])
        return self.matrix[np.ix_(idx, idx)]

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.matrix)

    def is_singular(self, rank_tol: float | None = None) -> bool:
        w = self.eigenvalues()
        return bool(w[0] < _rank_cutoff(w, rank_tol))


def _rank_cutoff(eigenvalues: np.ndarray, rank_tol: float | None = None) -> float:
    if rank_tol is not None:
        return rank_tol
    top = float(eigenvalues[-1]) if eigenvalues.size else 0.0
    return max(config.RANK_TOL_FACTOR * top, config.RANK_TOL_FLOOR)


def qfim_pure(psi: PureState, generators: Sequence[np.ndarray], partition=()) -> QFIM:
    """QFIM of a pure probe, ``4 Re(<H_m H_n> - <H_m><H_n>)``.

    The generators must act on the probe's full space. Valid for arbitrary
    (also mutually non-commuting) generators.
    """
    d = len(generators)
    if d == 0:
        raise ValueError("need at least one generator")
    amps = psi.amplitudes
    applied = np.empty((d, amps.size), dtype=complex)
    for k, g in enumerate(generators):
        gen = np.asarray(g, dtype=complex)
        if gen.shape != (amps.size, amps.size):
            raise LayoutError(f"generator {k} has shape {gen.shape}, state dim {amps.size}")
        applied[k] = gen @ amps
    means = np.real(applied @ amps.conj())
    gram = applied.conj() @ applied.T
    mat = 4.0 * (np.real(gram) - np.outer(means, means))
    return QFIM((mat + mat.T) / 2, partition)


def qfim_mixed(
    rho: DensityOperator, generators: Sequence[np.ndarray], partition=()
) -> tuple[QFIM, tuple[np.ndarray, ...]]:
    """QFIM of a mixed probe via symmetric logarithmic derivatives.

    The parameter derivative at the fiducial point is the analytic
    commutator ``d rho / d phi_k = -i [H_k, rho]``. SLDs solve
    ``d rho = (rho L + L rho) / 2`` in the probe's eigenbasis:
    ``L_ij = 2 (d rho)_ij / (p_i + p_j)`` wherever ``p_i + p_j`` clears the
    rank cutoff, zero elsewhere. Returns the matrix
    ``F_kl = Re Tr[rho L_k L_l]`` and the SLD operators.
    """
    d = len(generators)
    if d == 0:
        raise ValueError("need at least one generator")
    p, v = np.linalg.eigh(rho.matrix)
    cutoff = _rank_cutoff(p)
    denom = p[:, None] + p[None, :]
    live = denom > cutoff
    shaky = live & (denom < 100.0 * cutoff)
    if np.any(shaky):
        warnings.warn(
            "SLD denominators within 100x of the rank cutoff; "
            "the information matrix may be ill-determined",
            RuntimeWarning,
            stacklevel=2,
        )
    slds_eig = []
    slds = []
    for k, g in enumerate(generators):
        gen = np.asarray(g, dtype=complex)
        if gen.shape != rho.matrix.shape:
            raise LayoutError(f"generator {k} has shape {gen.shape}, probe dim {rho.dim}")
        h_eig = v.conj().T @ gen @ v
        drho_eig = -1j * h_eig * (p[None, :] - p[:, None])
        l_eig = np.zeros_like(drho_eig)
        np.divide(2.0 * drho_eig, denom, out=l_eig, where=live)
        slds_eig.append(l_eig)
        slds.append(v @ l_eig @ v.conj().T)
    mat = np.empty((d, d))
    weighted = [p[:, None] * l for l in slds_eig]
    for k in range(d):
        for l in range(k, d):
            val = float(np.real(np.sum(weighted[k] * slds_eig[l].T)))
            mat[k, l] = mat[l, k] = val
    return QFIM((mat + mat.T) / 2, partition), tuple(slds)


def _check_weights(weights, d: int) -> np.ndarray:
    w = np.asarray(weights, dtype=float)
    if w.ndim == 2:
        if w.shape != (d, d):
            raise LayoutError(f"weight matrix shape {w.shape}, expected ({d}, {d})")
        off = w - np.diag(np.diag(w))
        if float(np.max(np.abs(off))) > 0.0:
            raise ValueError("only diagonal weighting matrices are supported")
        w = np.diag(w)
    if w.shape != (d,):
        raise LayoutError(f"expected {d} weights, got shape {w.shape}")
    if np.any(w < 0.0):
        raise ValueError("weights must be nonnegative")
    if not np.any(w > 0.0):
        raise ValueError("weights must not all be zero")
    return w


@dataclass(frozen=True)
class BoundReport:
    """Scalar Cramer-Rao bound for one (information matrix, weights, mu).

    For a singular matrix the bound covers only the parameters inside the
    support; ``undetermined`` lists the parameter indices left out, whose
    ``diag_inverse`` entries are ``inf``.
    """

    bound: float
    diag_inverse: tuple[float, ...]
    singular: bool
    support_dim: int
    undetermined: tuple[int, ...]

    def to_jsonable(self) -> dict:
        return {
            "bound": self.bound,
            "diag_inverse": list(self.diag_inverse),
            "singular": self.singular,
            "support_dim": self.support_dim,
            "undetermined": list(self.undetermined),
        }


def qcrb(fim: QFIM, weights, mu: int = 1, rank_tol: float | None = None) -> BoundReport:
    """Weighted scalar Cramer-Rao bound ``sum_k W_kk [F^-1]_kk / mu``."""
    if mu < 1:
        raise ValueError("repeat count mu must be a positive integer")
    w_diag = _check_weights(weights, fim.d)
    eigvals, eigvecs = np.linalg.eigh(fim.matrix)
    cutoff = _rank_cutoff(eigvals, rank_tol)
    support = eigvals > cutoff
    singular = not bool(np.all(support))
    support_dim = int(np.count_nonzero(support))
    if support_dim == 0:
        diag = tuple(np.inf for _ in range(fim.d))
        return BoundReport(np.inf, diag, True, 0, tuple(range(fim.d)))
    vs = eigvecs[:, support]
    inv_supp = (vs / eigvals[support]) @ vs.conj().T
    # A parameter direction is determined only if e_k lies in the support.
    proj_defect = np.sqrt(np.clip(1.0 - np.sum(np.abs(vs) ** 2, axis=1), 0.0, None))
    inside = proj_defect <= 1e-9 if singular else np.ones(fim.d, dtype=bool)
    diag = np.where(inside, np.real(np.diag(inv_supp)), np.inf)
    bound = float(np.sum(w_diag[inside] * diag[inside]) / mu)
    undetermined = tuple(int(k) for k in np.nonzero(~inside)[0])
    return BoundReport(bound, tuple(float(x) for x in diag), singular, support_dim, undetermined)


def rotate_qfim(fim: QFIM, m) -> QFIM:
    """Congruence transform ``M F M^T`` onto derived parameters.

    ``M`` must be orthogonal; the partition is dropped because derived
    parameters are global.
    """
    mat = np.asarray(m, dtype=float)
    if mat.shape != (fim.d, fim.d):
        raise LayoutError(f"rotation shape {mat.shape}, expected ({fim.d}, {fim.d})")
    defect = float(np.max(np.abs(mat @ mat.T - np.eye(fim.d))))
    if defect > config.UNITARITY_TOL:
        raise ValueError(f"rotation is not orthogonal (defect {defect:.3e})")
    return QFIM(mat @ fim.matrix @ mat.T, ())


def orthogonal_completion(v) -> np.ndarray:
    """Orthogonal matrix whose first row is the given unit vector.

    The remaining rows come from Gram-Schmidt over the standard basis in
    index order, skipping nearly dependent candidates; the result is
    deterministic.
    """
    vec = np.asarray(v, dtype=float).reshape(-1)
    d = vec.size
    norm = float(np.linalg.norm(vec))
    if norm < 1e-12:
        raise ValueError("cannot complete the zero vector")
    if abs(norm - 1.0) > 1e-9:
        raise ValueError(f"first row must be a unit vector, norm {norm!r}")
    rows = [vec / norm]
    for i in range(d):
        if len(rows) == d:
            break
        cand = np.zeros(d)
        cand[i] = 1.0
        for _ in range(2):
            for r in rows:
                cand = cand - np.dot(r, cand) * r
        length = float(np.linalg.norm(cand))
        if length > 1e-8:
            rows.append(cand / length)
    if len(rows) != d:
        raise ValueError("failed to complete an orthonormal basis")
    return np.vstack(rows)


def _inv_spd(mat: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh((mat + mat.T) / 2)
    if float(w[0]) <= 0.0:
        raise np.linalg.LinAlgError("block is not positive definite")
    return (v / w) @ v.T


def inverse_block(fim: QFIM, k: int, rank_tol: float | None = None) -> np.ndarray:
    """The block ``[F^-1]_[kk]`` of the inverse information matrix.

    For a singular matrix the support-restricted pseudo-inverse is used and
    a warning is emitted; check :meth:`QFIM.is_singular` to branch
    explicitly.
    """
    idx = np.asarray(fim.partition[k])
    eigvals, eigvecs = np.linalg.eigh(fim.matrix)
    cutoff = _rank_cutoff(eigvals, rank_tol)
    support = eigvals > cutoff
    if not np.all(support):
        warnings.warn(
            "singular information matrix: inverse block restricted to the support",
            RuntimeWarning,
            stacklevel=2,
        )
    vs = eigvecs[:, support]
    inv = (vs / eigvals[support]) @ vs.T
    return inv[np.ix_(idx, idx)]


def block_inverse_residuals(fim: QFIM, rank_tol: float | None = None) -> np.ndarray:
    """Per-block smallest eigenvalue of ``[F^-1]_[kk] - [F_[kk]]^-1``.

    Nonnegative (up to roundoff) for every positive-definite matrix, with
    zero exactly when block ``k`` decouples from the rest (its off-diagonal
    blocks vanish). Raises on singular input.
    """
    eigvals = fim.eigenvalues()
    if eigvals[0] <= _rank_cutoff(eigvals, rank_tol):
        raise np.linalg.LinAlgError("information matrix is singular")
    full_inv = _inv_spd(fim.matrix)
    residuals = np.empty(fim.n_blocks)
    for k in range(fim.n_blocks):
        idx = np.asarray(fim.partition[k])
        outer = full_inv[np.ix_(idx, idx)]
        inner = _inv_spd(fim.block(k))
        diff = outer - inner
        residuals[k] = float(np.linalg.eigvalsh((diff + diff.T) / 2)[0])
    return residuals


def cfim(
    effects: Sequence[np.ndarray],
    net: SensorNetwork,
    probe: State,
    phi0=None,
    step: float = config.CFIM_STEP,
) -> np.ndarray:
    """Classical Fisher information matrix of a POVM's outcome statistics.

    Outcome probabilities are ``p(m | phi) = Tr[E_m rho_phi]`` under the
    network encoding; derivatives use central differences of size ``step``
    around ``phi0`` (default: the fiducial point). Outcomes with
    probability below the configured floor are skipped.
    """
    d = net.n_params
    dim = net.total_dim
    ops = []
    total = np.zeros((dim, dim), dtype=complex)
    for m, e in enumerate(effects):
        eff = require_hermitian(e, tol=1e-9, name=f"effect {m}")
        if eff.shape != (dim, dim):
            raise LayoutError(f"effect {m} has shape {eff.shape}, network dim {dim}")
        lo = float(np.linalg.eigvalsh((eff + eff.conj().T) / 2)[0])
        if lo < -1e-9:
            raise ValueError(f"effect {m} has eigenvalue {lo:.3e} < 0")
        ops.append(eff)
        total += eff
    if float(np.max(np.abs(total - np.eye(dim)))) > 1e-9:
        raise ValueError("POVM effects do not sum to the identity")
    base = np.zeros(d) if phi0 is None else np.asarray(phi0, dtype=float).reshape(-1)
    if base.size != d:
        raise LayoutError(f"expected {d} parameters, got {base.size}")

    def probabilities(phi: np.ndarray) -> np.ndarray:
        evolved = encode(net, probe, phi)
        if isinstance(evolved, PureState):
            amps = evolved.amplitudes
            return np.array([float(np.real(np.vdot(amps, e @ amps))) for e in ops])
        return np.array([float(np.real(np.trace(e @ evolved.matrix))) for e in ops])

    p0 = probabilities(base)
    dp = np.empty((d, len(ops)))
    for k in range(d):
        shift = np.zeros(d)
        shift[k] = step
        dp[k] = (probabilities(base + shift) - probabilities(base - shift)) / (2.0 * step)
    mat = np.zeros((d, d))
    for m in range(len(ops)):
        if p0[m] < config.CFIM_PROB_FLOOR:
            continue
        mat += np.outer(dp[:, m], dp[:, m]) / p0[m]
    return (mat + mat.T) / 2
