"""Quantum Fisher information toolkit for locally phase-encoded sensor networks."""

__version__ = "0.1.0"

from .errors import ConfigError, InvariantError, QFILabError, ZeroQFIError
from .states import (
    ParamVector,
    ProbeState,
    encode,
    fidelity,
    is_equatorial,
    load_state,
    make_bell_family,
    make_ghz,
    make_plus_product,
    make_random_equatorial2,
    make_random_haar,
    make_zero,
    save_state,
    z_expectations,
    zz_correlations,
)
from .qfim import (
    Direction,
    QFIMatrix,
    SpectralDecomposition,
    compute_qfim,
    orthonormal_complement,
    privacy_direction,
    qfi_along,
    qfi_oracle,
    spectral,
)

__all__ = [
    "ConfigError", "InvariantError", "QFILabError", "ZeroQFIError",
    "ParamVector", "ProbeState", "encode", "fidelity", "is_equatorial", "load_state",
    "make_bell_family", "make_ghz", "make_plus_product", "make_random_equatorial2",
    "make_random_haar", "make_zero", "save_state", "z_expectations", "zz_correlations",
    "Direction", "QFIMatrix", "SpectralDecomposition", "compute_qfim",
    "orthonormal_complement", "privacy_direction", "qfi_along", "qfi_oracle", "spectral",
]
