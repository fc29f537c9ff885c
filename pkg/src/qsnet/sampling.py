"""Seeded random ensembles used by the audits.

Haar-measure unitaries come from the phase-fixed QR decomposition of a
complex Ginibre matrix. Haar pure states are normalized complex Gaussian
vectors (the first column of such a unitary has exactly this
distribution). Random mixed states are partial traces of larger Haar pure
states, and random positive-definite matrices are shifted Wishart draws.
"""

from __future__ import annotations

import numpy as np

from .hilbert import DensityOperator, PureState, partial_trace

__all__ = [
    "trial_rng",
    "haar_unitary",
    "haar_state",
    "random_density",
    "random_spd",
]


def trial_rng(seed: int, index: int) -> np.random.Generator:
    """Independent, reproducible stream for one trial of a seeded audit."""
    return np.random.default_rng([seed, index])


def _ginibre(dim: int, rng: np.random.Generator) -> np.ndarray:
    return rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))


def haar_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    q, r = np.linalg.qr(_ginibre(dim, rng))
    diag = np.diag(r)
    return q * (diag / np.abs(diag))


def haar_state(dim: int, layout, rng: np.random.Generator) -> PureState:
    vec = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return PureState(vec / np.linalg.norm(vec), layout)


def random_density(dim: int, layout, rng: np.random.Generator, ancilla_dim: int | None = None) -> DensityOperator:
    """Mixed state from tracing an ancilla out of a larger Haar pure state.

    With the default ``ancilla_dim == dim`` the result is full rank almost
    surely.
    """
    anc = dim if ancilla_dim is None else int(ancilla_dim)
    joint = haar_state(dim * anc, (dim, anc), rng)
    reduced = partial_trace(joint, {1})
    return DensityOperator(reduced.matrix, tuple(layout))


def random_spd(d: int, rng: np.random.Generator, shift: float = 0.1) -> np.ndarray:
    """Well-conditioned symmetric positive-definite matrix (Wishart plus a
    multiple of the identity)."""
    g = rng.standard_normal((d, d))
    mat = g.T @ g / d + shift * np.eye(d)
    return (mat + mat.T) / 2
