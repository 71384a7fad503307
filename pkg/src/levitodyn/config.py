"""TOML run configuration with a strict, unit-suffixed schema.

Every dimensional key carries its unit in the name (``power_w``,
``waist_m``). With ``[units] system = "natural"`` the constants
``c = hbar = k_B = 1`` and gravity is off; suffixes then denote the matching
natural units.
"""

from __future__ import annotations

import sys
from pathlib import Path
from typing import Literal, Optional

import numpy as np
from pydantic import (
    BaseModel,
    ConfigDict,
    Field,
    PositiveFloat,
    ValidationError,
    field_validator,
    model_validator,
)

from .constants import SI, PhysicalConstants
from .dynamics import GasParams, Particle, ParticleState, System
from .errors import ConfigInvalid
from .kinematics import InertiaTensor
from .optics import GaussianMode, Polarization, Susceptibility, TrapParams
from .scattering import DetectorGeometry

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

NATURAL = PhysicalConstants(hbar=1.0, k_b=1.0, c=1.0, epsilon_0=1.0, g=0.0)

Triple = tuple[float, float, float]


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class UnitsSection(_Section):
    system: Literal["si", "natural"] = "si"
    gravity: bool = True


class ParticleSection(_Section):
    mass_kg: PositiveFloat
    inertia_kg_m2: Triple
    volume_m3: PositiveFloat
    chi0: PositiveFloat
    delta_chi: Triple = (0.0, 0.0, 0.0)

    @field_validator("inertia_kg_m2")
    @classmethod
    def _positive_inertia(cls, v):
        if min(v) <= 0:
            raise ValueError("principal moments must be positive")
        return v


class TrapSection(_Section):
    power_w: PositiveFloat
    sigma_l_m2: PositiveFloat
    wavelength_m: PositiveFloat
    waist_m: PositiveFloat
    rayleigh_range_m: PositiveFloat
    a1: PositiveFloat
    a2: PositiveFloat
    b_x: float = 1.0
    b_y: float = 0.0
    laser_angular_frequency_rad_s: Optional[float] = Field(default=None, gt=0)


class GasSection(_Section):
    damping_rate_per_s: float = Field(ge=0)
    temperature_k: PositiveFloat
    constituent_mass_kg: PositiveFloat


class DetectorSection(_Section):
    axis: Triple = (0.0, 0.0, 1.0)
    half_angle_rad: float = Field(default=float(np.pi / 2), gt=0, le=float(np.pi))
    efficiency: float = Field(default=1.0, ge=0, le=1)
    lo_phase_rad: float = 0.0
    quadrature_order: int = Field(default=16, ge=2)


class IntegratorSection(_Section):
    dt_s: PositiveFloat
    duration_s: PositiveFloat
    seed: int = Field(default=0, ge=0)
    stride: int = Field(default=1, ge=1)
    recoil_on: bool = False
    n_trajectories: int = Field(default=1, ge=1)
    initial: Literal["rest", "thermal"] = "rest"
    initial_position_m: Triple = (0.0, 0.0, 0.0)
    initial_euler_rad: Triple = (float(np.pi / 2), float(np.pi / 2), float(np.pi / 2))


class QuantumSection(_Section):
    model: Literal["translational_1d", "planar_rotor"] = "translational_1d"
    fock_dim: Optional[int] = Field(default=None, ge=10)
    l_max: Optional[int] = Field(default=None, ge=5)
    axis: int = Field(default=0, ge=0, le=2)
    dt_s: PositiveFloat
    duration_s: PositiveFloat
    n_trajectories: int = Field(default=1, ge=1)
    initial_coherent_amplitude: float = 0.0
    seed: int = Field(default=0, ge=0)
    record_every: int = Field(default=1, ge=1)

    @model_validator(mode="after")
    def _truncation(self):
        if self.model == "translational_1d" and self.fock_dim is None:
            raise ValueError("translational_1d needs fock_dim")
        if self.model == "planar_rotor" and self.l_max is None:
            raise ValueError("planar_rotor needs l_max")
        return self


class CurrentsSection(_Section):
    variable: Literal["x", "y", "z", "alpha", "beta", "gamma"] = "x"
    start: float
    stop: float
    points: int = Field(default=51, ge=2)
    z2_convention: Literal["exact", "as_printed"] = "exact"


class PsdSection(_Section):
    input: str
    column: str = "x"
    segment_length: Optional[int] = Field(default=None, ge=2)
    overlap: float = Field(default=0.5, ge=0, lt=1)
    window_hz: Optional[tuple[float, float]] = None


class SimConfig(_Section):
    units: UnitsSection = UnitsSection()
    particle: ParticleSection
    trap: TrapSection
    gas: GasSection
    detector: DetectorSection = DetectorSection()
    integrator: Optional[IntegratorSection] = None
    quantum: Optional[QuantumSection] = None
    currents: Optional[CurrentsSection] = None
    psd: Optional[PsdSection] = None

    # -- conversions to library objects --------------------------------------------

    @property
    def constants(self) -> PhysicalConstants:
        base = SI if self.units.system == "si" else NATURAL
        if not self.units.gravity and base.g != 0:
            return PhysicalConstants(base.hbar, base.k_b, base.c, base.epsilon_0, 0.0)
        return base

    def trap_params(self) -> TrapParams:
        t, p = self.trap, self.particle
        return TrapParams(
            power=t.power_w,
            sigma_L=t.sigma_l_m2,
            volume=p.volume_m3,
            mode=GaussianMode(t.waist_m, t.rayleigh_range_m, t.wavelength_m, t.a1, t.a2),
            pol=Polarization(t.b_x, t.b_y),
            chi=Susceptibility(p.chi0, p.delta_chi),
            omega_L=t.laser_angular_frequency_rad_s,
        )

    def system(self) -> System:
        p, g = self.particle, self.gas
        return System(
            particle=Particle(p.mass_kg, InertiaTensor(*p.inertia_kg_m2)),
            trap=self.trap_params(),
            gas=GasParams(g.damping_rate_per_s, g.temperature_k, g.constituent_mass_kg),
            constants=self.constants,
            recoil_on=self.integrator.recoil_on if self.integrator else False,
        )

    def detector_geometry(self) -> DetectorGeometry:
        d = self.detector
        axis = np.asarray(d.axis, dtype=float)
        return DetectorGeometry(tuple(axis / np.linalg.norm(axis)), d.half_angle_rad, d.efficiency, d.quadrature_order)

    def initial_state(self) -> ParticleState:
        i = self.integrator
        return ParticleState.at_rest(phi=i.initial_euler_rad, r=i.initial_position_m)

    def require(self, section: str):
        value = getattr(self, section)
        if value is None:
            raise ConfigInvalid(f"{section}: section required for this command")
        return value


def _format_errors(exc: ValidationError) -> str:
    lines = []
    for err in exc.errors():
        path = ".".join(str(part) for part in err["loc"]) or "<root>"
        lines.append(f"{path}: {err['msg']}")
    return "; ".join(lines)


def parse_config(data: dict) -> SimConfig:
    """Validate a mapping; errors name the offending field path."""
    try:
        cfg = SimConfig.model_validate(data)
    except ValidationError as exc:
        raise ConfigInvalid(_format_errors(exc)) from None
    try:
        cfg.detector_geometry()
        cfg.trap_params()
    except ValueError as exc:
        raise ConfigInvalid(f"derived parameters: {exc}") from None
    return cfg


def load_config(path) -> SimConfig:
    path = Path(path)
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except OSError as exc:
        raise ConfigInvalid(f"cannot read config {path}: {exc}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigInvalid(f"{path}: malformed TOML: {exc}") from None
    return parse_config(data)
