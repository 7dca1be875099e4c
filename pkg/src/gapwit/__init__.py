"""Spectral-gap witnesses, joint numerical ranges and free-fermion tools.

Submodules are imported on first attribute access so that the command line
can validate its arguments before loading numpy and scipy.
"""
import importlib

from .errors import (
    CapacityError,
    ConvergenceError,
    GapwitError,
    InconclusiveError,
    InvalidSizeError,
    MappingError,
    NonHermitianError,
    NotACuspError,
    NumericalError,
    ParticleHoleError,
    PreconditionError,
    ResolutionError,
)

__version__ = "0.1.0"

_LAZY = {
    "HermitianOperator": "hermitian",
    "PauliSum": "pauli",
    "PauliTerm": "pauli",
    "build_xy": "pauli",
    "build_witness": "pauli",
    "build_tapered": "pauli",
    "to_matrix": "pauli",
    "eig_dense": "spectra",
    "eig_lowest": "spectra",
    "gap_report": "spectra",
    "sample_boundary": "numrange",
    "detect_cusps": "numrange",
    "sweep": "gapwitness",
    "gap_upper_bound": "gapwitness",
    "jw_map": "freefermion",
    "bdg_diagonalize": "freefermion",
}


def __getattr__(name):
    if name in _LAZY:
        return getattr(importlib.import_module(f".{_LAZY[name]}", __name__), name)
    raise AttributeError(f"module {__name__!r} has no attribute {name!r}")
