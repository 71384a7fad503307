"""Ro-translational dynamics and homodyne detection of optically levitated rigid particles."""

from .constants import SI, PhysicalConstants
from .errors import (
    ConfigInvalid,
    DegeneratePolarization,
    DimensionMismatch,
    FitDiverged,
    GimbalLock,
    InvalidUnraveling,
    IoFailure,
    LevitodynError,
    NotUnitVector,
    NumericalBlowup,
    SegmentTooLong,
    UnphysicalDielectric,
)
from .kinematics import InertiaTensor
from .optics import GaussianMode, Polarization, Susceptibility, TrapParams

__version__ = "0.1.0"

__all__ = [
    "SI",
    "PhysicalConstants",
    "InertiaTensor",
    "GaussianMode",
    "Polarization",
    "Susceptibility",
    "TrapParams",
    "ConfigInvalid",
    "DegeneratePolarization",
    "DimensionMismatch",
    "FitDiverged",
    "GimbalLock",
    "InvalidUnraveling",
    "IoFailure",
    "LevitodynError",
    "NotUnitVector",
    "NumericalBlowup",
    "SegmentTooLong",
    "UnphysicalDielectric",
]
