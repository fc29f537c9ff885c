"""Closed-form variance bounds for estimating one linear functional.

For a unit-norm nonnegative coefficient vector ``v``, generators of equal
per-particle spectral width ``kappa``, a budget of ``N`` particles and
``mu`` repeats:

* best sensor-separable probes obey
  ``Var >= ||v||_{2/3}^2 / (mu kappa^2 N^2)``, which itself dominates the
  weaker ``||v||_1^3 / (mu kappa^2 N^2)`` form;
* the GHZ-like sensor-entangled probe reaches
  ``Var >= ||v||_1^2 / (mu kappa^2 N^2)``.

The ratio of the two is the entanglement advantage; it peaks at ``d`` for
the uniform functional over ``d`` sensors.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "LinearFunctional",
    "BoundComparison",
    "pnorm",
    "separable_bound",
    "separable_bound_weak",
    "ghz_bound",
    "enhancement_ratio",
    "compare",
]

# Magnitudes below this underflow fractional powers; they cannot move any
# bound and are dropped.
_TINY = 1e-300


def pnorm(v, p: float) -> float:
    """``(sum_k |v_k|^p)^(1/p)`` for ``p > 0`` (quasi-norm below 1 allowed)."""
    vec = np.abs(np.asarray(v, dtype=float).reshape(-1))
    if vec.size == 0:
        raise ValueError("empty vector")
    if p <= 0.0:
        raise ValueError(f"p must be positive, got {p}")
    keep = vec[vec > _TINY]
    if keep.size == 0:
        return 0.0
    top = float(keep.max())
    return top * float(np.sum((keep / top) ** p)) ** (1.0 / p)


@dataclass(frozen=True)
class LinearFunctional:
    """Estimation target ``theta = v . phi`` with its resource accounting.

    ``v`` is nonnegative with unit 2-norm; ``kappa`` is the per-particle
    spectral width of the (identical) sensor generators; ``n_particles`` is
    the particle budget and ``repeats`` the number of experiment repeats.
    """

    v: np.ndarray
    kappa: float
    n_particles: int
    repeats: int = 1

    def __post_init__(self):
        vec = np.asarray(self.v, dtype=float).reshape(-1)
        if vec.size == 0:
            raise ValueError("empty coefficient vector")
        if np.any(vec < -1e-12):
            raise ValueError("coefficient vector must be nonnegative")
        vec = np.clip(vec, 0.0, None)
        norm = float(np.linalg.norm(vec))
        if abs(norm - 1.0) > 1e-9:
            raise ValueError(f"coefficient vector must have unit 2-norm, got {norm!r}")
        if self.kappa <= 0.0:
            raise ValueError("kappa must be positive")
        if int(self.n_particles) < 1:
            raise ValueError("particle budget must be positive")
        if int(self.repeats) < 1:
            raise ValueError("repeat count must be positive")
        vec = vec.copy()
        vec.setflags(write=False)
        object.__setattr__(self, "v", vec)
        object.__setattr__(self, "kappa", float(self.kappa))
        object.__setattr__(self, "n_particles", int(self.n_particles))
        object.__setattr__(self, "repeats", int(self.repeats))

    @property
    def d(self) -> int:
        return self.v.size

    def ghz_allocation(self) -> np.ndarray | None:
        """Integer per-sensor particle counts ``N v / ||v||_1``, or ``None``
        when the split is not integral (no GHZ probe of this toolkit then
        certifies the closed-form bound)."""
        tilde = self.n_particles * self.v / pnorm(self.v, 1.0)
        counts = np.rint(tilde)
        if np.max(np.abs(tilde - counts)) > 1e-9:
            return None
        return counts.astype(int)

    def _denominator(self) -> float:
        return self.repeats * self.kappa**2 * self.n_particles**2


def separable_bound(f: LinearFunctional) -> float:
    """``||v||_{2/3}^2 / (mu kappa^2 N^2)``, the separable-probe floor."""
    return pnorm(f.v, 2.0 / 3.0) ** 2 / f._denominator()


def separable_bound_weak(f: LinearFunctional) -> float:
    """``||v||_1^3 / (mu kappa^2 N^2)``, the weaker end of the chain."""
    return pnorm(f.v, 1.0) ** 3 / f._denominator()


def ghz_bound(f: LinearFunctional) -> float:
    """``||v||_1^2 / (mu kappa^2 N^2)``, reached by the GHZ-like probe."""
    return pnorm(f.v, 1.0) ** 2 / f._denominator()


def enhancement_ratio(f: LinearFunctional) -> float:
    """Separable-over-entangled variance ratio ``(||v||_{2/3} / ||v||_1)^2``.

    Lies in ``[1, d]``; equals 1 only for single-sensor functionals and
    peaks at ``d`` for the uniform one.
    """
    return (pnorm(f.v, 2.0 / 3.0) / pnorm(f.v, 1.0)) ** 2


@dataclass(frozen=True)
class BoundComparison:
    """Closed-form bound pair for one functional, ready for report rows."""

    d: int
    n_particles: int
    kappa: float
    repeats: int
    separable: float
    ghz: float
    ratio: float
    ghz_constructible: bool

    def to_jsonable(self) -> dict:
        return {
            "d": self.d,
            "N": self.n_particles,
            "kappa": self.kappa,
            "mu": self.repeats,
            "sep_bound": self.separable,
            "ghz_bound": self.ghz,
            "ratio": self.ratio,
            "ghz_constructible": self.ghz_constructible,
        }

    def csv_row(self) -> list:
        return [
            self.d,
            self.n_particles,
            self.kappa,
            self.repeats,
            self.separable,
            self.ghz,
            self.ratio,
        ]


def compare(f: LinearFunctional) -> BoundComparison:
    sep = separable_bound(f)
    ghz = ghz_bound(f)
    return BoundComparison(
        d=f.d,
        n_particles=f.n_particles,
        kappa=f.kappa,
        repeats=f.repeats,
        separable=sep,
        ghz=ghz,
        ratio=sep / ghz,
        ghz_constructible=f.ghz_allocation() is not None,
    )
