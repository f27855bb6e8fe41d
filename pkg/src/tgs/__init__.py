"""Finite ternary Gamma-semirings: census, spectra, localization, modules and homology."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    BudgetExceeded,
    CheckpointError,
    GuardExceeded,
    LocalizationError,
    PreconditionError,
    StructuralError,
    TGSError,
    UnsupportedMode,
)
from .model import AxiomMode, GammaSemiring, check_axioms, is_isomorphic, load_model  # noqa: E402

__all__ = [
    "AxiomMode",
    "BudgetExceeded",
    "CheckpointError",
    "GammaSemiring",
    "GuardExceeded",
    "LocalizationError",
    "PreconditionError",
    "StructuralError",
    "TGSError",
    "UnsupportedMode",
    "check_axioms",
    "is_isomorphic",
    "load_model",
]
