"""Numerical tolerances and size limits shared across the package."""

import os

# Invariant tolerances for the core carriers.
HERMITICITY_TOL = 1e-12   # relative to the largest entry magnitude
NORM_TOL = 1e-12          # pure-state normalization slack
TRACE_TOL = 1e-12         # density-operator trace slack
PSD_SLACK = 1e-10         # admissible negative eigenvalue from roundoff

# Operation post-condition tolerances.
UNITARITY_TOL = 1e-10
EIGH_RECONSTRUCTION_TOL = 1e-10
COMMUTE_TOL = 1e-9        # mutual-commutation precondition for joint eigenbases

# Fisher-information support handling.
RANK_TOL_FACTOR = 1e-10   # times the largest eigenvalue: support cutoff
RANK_TOL_FLOOR = 1e-14    # absolute floor so all-roundoff matrices read as rank 0

# Classical Fisher information from outcome probabilities.
CFIM_STEP = 1e-5          # central-difference step in parameter space
CFIM_PROB_FLOOR = 1e-12   # outcomes below this probability are skipped

DEFAULT_MAX_DIM = 4096


def max_dim() -> int:
    """Hard cap on any Hilbert-space dimension built by this package.

    The environment variable ``QSN_MAX_DIM`` overrides the default.
    """
    value = os.environ.get("QSN_MAX_DIM")
    return DEFAULT_MAX_DIM if value is None else int(value)
