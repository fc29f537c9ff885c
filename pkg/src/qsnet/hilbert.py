"""Dense complex linear algebra on small tensor-product Hilbert spaces.

Plain complex ndarrays carry every operator. :class:`PureState` and
:class:`DensityOperator` add subsystem-layout bookkeeping and invariant
checks on top; both freeze their arrays, so instances are safe to share.

Matrices exchanged with the outside world use a JSON encoding where every
entry is a ``[re, im]`` pair: a vector is a list of pairs, a matrix a list
of rows of pairs.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from math import prod
from typing import Iterable, Sequence

import numpy as np

from . import config
from .exceptions import DimensionLimitError, FormatError, LayoutError

__all__ = [
    "SIGMA_X",
    "SIGMA_Y",
    "SIGMA_Z",
    "PureState",
    "DensityOperator",
    "identity",
    "require_hermitian",
    "commutator",
    "tensor_product",
    "kron_all",
    "kron_vectors",
    "embed_local",
    "eigh",
    "expm_i",
    "partial_trace",
    "sensor_marginal",
    "vector_to_json",
    "vector_from_json",
    "matrix_to_json",
    "matrix_from_json",
]


def _frozen(a: np.ndarray) -> np.ndarray:
    out = np.array(a, dtype=complex)
    out.setflags(write=False)
    return out


def _as_complex(a, name: str = "array") -> np.ndarray:
    arr = np.asarray(a, dtype=complex)
    if not np.all(np.isfinite(arr.real)) or not np.all(np.isfinite(arr.imag)):
        raise ValueError(f"{name} contains non-finite entries")
    return arr


def _check_dim(dim: int) -> None:
    cap = config.max_dim()
    if dim > cap:
        raise DimensionLimitError(f"dimension {dim} exceeds the cap {cap} (QSN_MAX_DIM)")


SIGMA_X = _frozen([[0.0, 1.0], [1.0, 0.0]])
SIGMA_Y = _frozen([[0.0, -1.0j], [1.0j, 0.0]])
SIGMA_Z = _frozen([[1.0, 0.0], [0.0, -1.0]])


def identity(dim: int) -> np.ndarray:
    return np.eye(dim, dtype=complex)


def require_hermitian(op, tol: float | None = None, name: str = "operator") -> np.ndarray:
    """Validate hermiticity (relative to the largest entry) and return the array."""
    a = _as_complex(op, name)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"{name} must be a square matrix, got shape {a.shape}")
    tol = config.HERMITICITY_TOL if tol is None else tol
    scale = float(np.max(np.abs(a))) if a.size else 0.0
    defect = float(np.max(np.abs(a - a.conj().T))) if a.size else 0.0
    if defect > tol * max(scale, 1.0):
        raise ValueError(f"{name} is not Hermitian (defect {defect:.3e})")
    return a


def commutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b - b @ a


def tensor_product(a, b) -> np.ndarray:
    """Kronecker product with the configured dimension cap enforced."""
    am = _as_complex(a, "left factor")
    bm = _as_complex(b, "right factor")
    if am.ndim != 2 or bm.ndim != 2:
        raise ValueError("tensor_product expects matrices")
    _check_dim(am.shape[0] * bm.shape[0])
    _check_dim(am.shape[1] * bm.shape[1])
    return np.kron(am, bm)


def kron_all(ops: Sequence[np.ndarray]) -> np.ndarray:
    if not ops:
        raise ValueError("empty operator list")
    return reduce(tensor_product, ops)


def kron_vectors(vectors: Sequence[np.ndarray]) -> np.ndarray:
    if not vectors:
        raise ValueError("empty vector list")
    out = _as_complex(vectors[0], "vector")
    for v in vectors[1:]:
        nxt = _as_complex(v, "vector")
        _check_dim(out.size * nxt.size)
        out = np.kron(out, nxt)
    return out


def embed_local(op, site: int, layout: Sequence[int]) -> np.ndarray:
    """Extend a local operator to ``I x ... x op x ... x I`` in layout order."""
    dims = tuple(int(d) for d in layout)
    if not 0 <= site < len(dims):
        raise LayoutError(f"site {site} outside layout of length {len(dims)}")
    a = _as_complex(op, "local operator")
    if a.shape != (dims[site], dims[site]):
        raise LayoutError(
            f"operator of shape {a.shape} does not fit site {site} with dim {dims[site]}"
        )
    factors = [identity(d) for d in dims]
    factors[site] = a
    return kron_all(factors)


def eigh(op) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a Hermitian operator.

    Returns eigenvalues in ascending order and orthonormal eigenvector
    columns. Degenerate eigenspaces come back in an arbitrary (but
    deterministic for fixed input) orthonormal basis.
    """
    a = require_hermitian(op)
    w, v = np.linalg.eigh(a)
    return w, v


def expm_i(op, angle: float = 1.0) -> np.ndarray:
    """Unitary ``exp(-i * angle * op)`` for Hermitian ``op``, via eigh."""
    w, v = eigh(op)
    phases = np.exp(-1j * angle * w)
    return (v * phases) @ v.conj().T


@dataclass(frozen=True)
class PureState:
    """Normalized state vector together with its subsystem layout."""

    amplitudes: np.ndarray
    layout: tuple[int, ...]

    def __post_init__(self):
        amps = _as_complex(self.amplitudes, "amplitudes").reshape(-1)
        layout = tuple(int(d) for d in self.layout)
        if any(d < 1 for d in layout):
            raise LayoutError(f"layout entries must be positive, got {layout}")
        if prod(layout) != amps.size:
            raise LayoutError(
                f"layout {layout} implies dim {prod(layout)}, vector has {amps.size}"
            )
        _check_dim(amps.size)
        norm = float(np.linalg.norm(amps))
        if abs(norm - 1.0) > config.NORM_TOL:
            raise ValueError(f"state vector norm {norm!r} is not 1")
        object.__setattr__(self, "amplitudes", _frozen(amps))
        object.__setattr__(self, "layout", layout)

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    def density(self) -> "DensityOperator":
        outer = np.outer(self.amplitudes, self.amplitudes.conj())
        return DensityOperator(outer, self.layout)


@dataclass(frozen=True)
class DensityOperator:
    """Trace-one positive-semidefinite operator with a subsystem layout."""

    matrix: np.ndarray
    layout: tuple[int, ...]

    def __post_init__(self):
        mat = require_hermitian(self.matrix, name="density operator")
        layout = tuple(int(d) for d in self.layout)
        if any(d < 1 for d in layout):
            raise LayoutError(f"layout entries must be positive, got {layout}")
        if prod(layout) != mat.shape[0]:
            raise LayoutError(
                f"layout {layout} implies dim {prod(layout)}, matrix is {mat.shape[0]}"
            )
        _check_dim(mat.shape[0])
        tr = complex(np.trace(mat))
        if abs(tr - 1.0) > config.TRACE_TOL:
            raise ValueError(f"density operator trace {tr!r} is not 1")
        lo = float(np.linalg.eigvalsh(mat)[0])
        if lo < -config.PSD_SLACK:
            raise ValueError(f"density operator has eigenvalue {lo:.3e} < -{config.PSD_SLACK}")
        object.__setattr__(self, "matrix", _frozen(mat))
        object.__setattr__(self, "layout", layout)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def purity(self) -> float:
        return float(np.real(np.trace(self.matrix @ self.matrix)))

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.matrix)


State = PureState | DensityOperator


def _resolve_subsets(layout: tuple[int, ...], discard: Iterable[int]):
    n = len(layout)
    dropped = sorted({int(i) for i in discard})
    for i in dropped:
        if not 0 <= i < n:
            raise LayoutError(f"subsystem index {i} outside layout of length {n}")
    kept = [i for i in range(n) if i not in dropped]
    if not kept:
        raise LayoutError("tracing out every subsystem leaves a scalar, not a state")
    return kept, dropped


def partial_trace(state: State, discard: Iterable[int]) -> DensityOperator:
    """Reduced density operator after discarding the listed subsystems."""
    kept, dropped = _resolve_subsets(state.layout, discard)
    dims = state.layout
    keep_dim = prod(dims[i] for i in kept)
    drop_dim = prod(dims[i] for i in dropped) if dropped else 1
    if isinstance(state, PureState):
        tensor = state.amplitudes.reshape(dims)
        mat = tensor.transpose(kept + dropped).reshape(keep_dim, drop_dim)
        reduced = mat @ mat.conj().T
    else:
        n = len(dims)
        perm = kept + dropped
        tensor = state.matrix.reshape(dims + dims)
        tensor = tensor.transpose(perm + [n + p for p in perm])
        tensor = tensor.reshape(keep_dim, drop_dim, keep_dim, drop_dim)
        reduced = np.einsum("ijkj->ik", tensor)
    return DensityOperator(reduced, tuple(dims[i] for i in kept))


def sensor_marginal(state: State, site: int) -> DensityOperator:
    """Reduced state of a single subsystem."""
    others = [i for i in range(len(state.layout)) if i != site]
    return partial_trace(state, others)


# --- JSON wire format -------------------------------------------------------


def _entry_to_pair(z: complex) -> list[float]:
    return [float(z.real), float(z.imag)]


def _pair_to_entry(item, where: str) -> complex:
    if (
        not isinstance(item, (list, tuple))
        or len(item) != 2
        or any(isinstance(x, bool) or not isinstance(x, (int, float)) for x in item)
    ):
        raise FormatError(f"{where}: expected a [re, im] pair, got {item!r}")
    re, im = float(item[0]), float(item[1])
    if not (np.isfinite(re) and np.isfinite(im)):
        raise FormatError(f"{where}: non-finite entry")
    return complex(re, im)


def vector_to_json(v: np.ndarray) -> list:
    return [_entry_to_pair(complex(z)) for z in np.asarray(v, dtype=complex).reshape(-1)]


def vector_from_json(items, where: str = "vector") -> np.ndarray:
    if not isinstance(items, list) or not items:
        raise FormatError(f"{where}: expected a non-empty list of [re, im] pairs")
    return np.array([_pair_to_entry(item, f"{where}[{i}]") for i, item in enumerate(items)])


def matrix_to_json(a: np.ndarray) -> list:
    mat = np.asarray(a, dtype=complex)
    return [[_entry_to_pair(complex(z)) for z in row] for row in mat]


def matrix_from_json(rows, where: str = "matrix") -> np.ndarray:
    if not isinstance(rows, list) or not rows:
        raise FormatError(f"{where}: expected a non-empty list of rows")
    width = None
    out = []
    for i, row in enumerate(rows):
        if not isinstance(row, list) or not row:
            raise FormatError(f"{where}[{i}]: expected a non-empty row")
        if width is None:
            width = len(row)
        elif len(row) != width:
            raise FormatError(f"{where}[{i}]: ragged row (expected {width} entries)")
        out.append([_pair_to_entry(item, f"{where}[{i}][{j}]") for j, item in enumerate(row)])
    return np.array(out)
