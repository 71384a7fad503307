"""Well-conditioned nondimensional parameter sets for tests and example configs.

Units: ``c = hbar = k_B = 1``, gravity off, trap energy scale ``V P / (c sigma_L) = 1``.
With a linear x polarization and ``chi = (1.15, 1.0, 0.85)`` the stable
orientation puts body axis 1 along x. Angular frequencies are of order one:
``omega_x = omega_y = sqrt(4.6)``, ``omega_z = sqrt(0.575)``, librations
``sqrt(0.3 / I3) = 1`` and ``sqrt(0.6 / I2) ~ 1.55``.
"""

from __future__ import annotations

import numpy as np

from .constants import PhysicalConstants
from .dynamics import GasParams, Particle, System
from .kinematics import InertiaTensor
from .optics import GaussianMode, Polarization, Susceptibility, TrapParams

UNIT_CONSTANTS = PhysicalConstants(hbar=1.0, k_b=1.0, c=1.0, epsilon_0=1.0, g=0.0)
TRAPPED_ORIENTATION = np.array([np.pi / 2, np.pi / 2, np.pi / 2])


def unit_trap(
    delta_chi=(0.15, 0.0, -0.15),
    b_x: float = 1.0,
    b_y: float = 0.0,
    power: float = 1.0,
    wavelength: float = 0.5,
) -> TrapParams:
    mode = GaussianMode(w0=1.0, zR=2.0, wavelength=wavelength)
    return TrapParams(
        power=power,
        sigma_L=1.0,
        volume=1.0,
        mode=mode,
        pol=Polarization(b_x, b_y),
        chi=Susceptibility(1.0, delta_chi),
    )


def unit_system(
    gamma_c: float = 0.1,
    temperature: float = 1.5e-4,
    recoil_on: bool = False,
    trap: TrapParams | None = None,
    inertia=(0.2, 0.25, 0.3),
    mass: float = 1.0,
) -> System:
    """Default ``temperature`` is 1e-3 of the shallowest librational well depth."""
    return System(
        particle=Particle(mass, InertiaTensor(*inertia)),
        trap=unit_trap() if trap is None else trap,
        gas=GasParams(gamma_c=gamma_c, temperature=temperature, constituent_mass=1e-3),
        constants=UNIT_CONSTANTS,
        recoil_on=recoil_on,
    )
