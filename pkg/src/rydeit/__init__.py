"""EIT spectra of two van der Waals interacting Rydberg atoms.

The probed atom sees a weak two-photon probe and a strong two-photon
coupling field; the control atom sees only the coupling field. After
eliminating the far-detuned intermediate level, each atom is an effective
three-level Raman system and the pair lives in a 9-dimensional space.
"""
from .errors import (
    DegenerateSteadyState,
    DimensionMismatch,
    EmptyData,
    EmptySpectrum,
    NotHermitian,
    NumericalError,
    PhysicalityLost,
    PhysicsError,
    RydEITError,
    SchemaError,
    Singular,
    StepUnderflow,
)
from .model import EffectiveParams, RawParams, derive_effective_params, paper_params

__version__ = "0.1.0"

__all__ = [
    "RawParams",
    "EffectiveParams",
    "derive_effective_params",
    "paper_params",
    "RydEITError",
    "NumericalError",
    "NotHermitian",
    "Singular",
    "StepUnderflow",
    "DimensionMismatch",
    "DegenerateSteadyState",
    "PhysicalityLost",
    "EmptySpectrum",
    "EmptyData",
    "SchemaError",
    "PhysicsError",
    "__version__",
]
