"""Shared helpers for the test suite."""

import numpy as np

from qsnet import SensorNetwork, SensorSpec
from qsnet.hilbert import SIGMA_Z


def random_hermitian(dim: int, rng: np.random.Generator) -> np.ndarray:
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return (g + g.conj().T) / (2.0 * np.sqrt(dim))


def two_qubit_z_network() -> SensorNetwork:
    """Two single-qubit sensors, generator sigma_z/2, excitation counting."""
    sensor = SensorSpec(2, (SIGMA_Z / 2,), np.diag([0.0, 1.0]))
    return SensorNetwork((sensor, sensor))


def bell_state() -> np.ndarray:
    return np.array([1.0, 0.0, 0.0, 1.0]) / np.sqrt(2.0)
