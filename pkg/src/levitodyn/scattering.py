"""Rayleigh scattering: rates, amplitudes and quadrature over a detector cap."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .constants import SI, PhysicalConstants
from .errors import UnphysicalDielectric
from .kinematics import rotation_from_euler
from .optics import TrapParams, _check_unit, basis_vectors, mode_value


@dataclass(frozen=True)
class ScatterParams:
    gamma_s: float
    sigma_R_tilde: float
    omega_L: float


@dataclass(frozen=True)
class DetectorGeometry:
    """Spherical-cap collection surface.

    ``order`` is the Gauss-Legendre node count in ``cos(theta)``; the
    azimuth uses ``2 * order`` trapezoid nodes.
    """

    axis: tuple[float, float, float] = (0.0, 0.0, 1.0)
    half_angle: float = np.pi / 2
    eta: float = 1.0
    order: int = 32

    def __post_init__(self):
        axis = tuple(float(a) for a in self.axis)
        _check_unit(axis)
        object.__setattr__(self, "axis", axis)
        if not 0 < self.half_angle <= np.pi:
            raise ValueError("half_angle must lie in (0, pi]")
        if not 0.0 <= self.eta <= 1.0:
            raise ValueError("eta must lie in [0, 1]")
        if self.order < 2:
            raise ValueError("quadrature order must be at least 2")

    @property
    def solid_angle(self) -> float:
        return 2 * np.pi * (1.0 - np.cos(self.half_angle))


@dataclass(frozen=True)
class CapQuadrature:
    """Nodes, weights and per-node polarization basis for a detector cap."""

    directions: np.ndarray  # (Q, 3)
    weights: np.ndarray  # (Q,)
    polarizations: np.ndarray = field(repr=False)  # (Q, 2, 3), real

    @property
    def size(self) -> int:
        return len(self.weights)


def _frame_to_axis(axis: np.ndarray) -> np.ndarray:
    """A rotation taking e_z onto ``axis``."""
    ez = np.array([0.0, 0.0, 1.0])
    v = np.cross(ez, axis)
    s, c = np.linalg.norm(v), float(axis @ ez)
    if s < 1e-15:
        return np.eye(3) if c > 0 else np.diag([1.0, -1.0, -1.0])
    K = np.array([[0, -v[2], v[1]], [v[2], 0, -v[0]], [-v[1], v[0], 0]]) / s
    return np.eye(3) + s * K + (1 - c) * (K @ K)


@lru_cache(maxsize=64)
def _cap_quadrature(axis: tuple, half_angle: float, n_theta: int, n_phi: int) -> CapQuadrature:
    x, w = np.polynomial.legendre.leggauss(n_theta)
    cmin = np.cos(half_angle)
    cos_t = 0.5 * (1 - cmin) * x + 0.5 * (1 + cmin)
    w_t = 0.5 * (1 - cmin) * w
    phi = 2 * np.pi * (np.arange(n_phi) + 0.5) / n_phi
    sin_t = np.sqrt(np.clip(1 - cos_t**2, 0.0, None))
    local = np.stack(
        [
            np.outer(sin_t, np.cos(phi)),
            np.outer(sin_t, np.sin(phi)),
            np.outer(cos_t, np.ones_like(phi)),
        ],
        -1,
    ).reshape(-1, 3)
    weights = np.outer(w_t, np.full(n_phi, 2 * np.pi / n_phi)).ravel()
    dirs = local @ _frame_to_axis(np.asarray(axis)).T
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    e1, e2 = basis_vectors(dirs)
    for arr in (dirs, weights):
        arr.setflags(write=False)
    pols = np.stack([e1, e2], 1)
    pols.setflags(write=False)
    return CapQuadrature(dirs, weights, pols)


def detector_quadrature(det: DetectorGeometry) -> CapQuadrature:
    return _cap_quadrature(det.axis, float(det.half_angle), int(det.order), 2 * int(det.order))


def full_sphere(order: int = 32, eta: float = 1.0) -> DetectorGeometry:
    return DetectorGeometry((0.0, 0.0, 1.0), np.pi, eta, order)


def integrate_over_detector(f, det: DetectorGeometry):
    """``sum_nu int_S f(n, eps_nu) dn``.

    ``f`` receives arrays ``n`` of shape (Q, 3) and ``eps`` of shape (Q, 3)
    (one polarization at a time) and returns Q values.
    """
    quad = detector_quadrature(det)
    total = 0.0
    for nu in range(2):
        total = total + np.sum(quad.weights * f(quad.directions, quad.polarizations[:, nu]))
    return total


def effective_cross_section(trap: TrapParams) -> float:
    return np.pi**2 * trap.volume**2 / trap.mode.wavelength**4


def scattering_params(trap: TrapParams, constants: PhysicalConstants = SI) -> ScatterParams:
    sigma = effective_cross_section(trap)
    omega = trap.laser_frequency(constants.c)
    gamma = sigma / trap.sigma_L * trap.power / (constants.hbar * omega)
    return ScatterParams(gamma, sigma, omega)


def scattering_rate(trap: TrapParams, constants: PhysicalConstants = SI) -> float:
    return scattering_params(trap, constants).gamma_s


def clausius_mossotti(epsilon_R: float) -> float:
    """Isotropic susceptibility ``3 (eps - 1) / (eps + 2)`` of a dielectric sphere."""
    return 3.0 * (epsilon_R - 1.0) / (epsilon_R + 2.0)


def rayleigh_cross_section(volume: float, epsilon_R: float, wavelength: float) -> float:
    if not epsilon_R > 1.0:
        raise UnphysicalDielectric(f"epsilon_R must exceed 1, got {epsilon_R}")
    ratio = (epsilon_R - 1.0) / (epsilon_R + 2.0)
    return 24 * np.pi**3 * volume**2 / wavelength**4 * ratio**2


def induced_dipole_direction(phi, trap: TrapParams) -> np.ndarray:
    """``F chi F^T eps_d`` (complex 3-vector) for orientation(s) ``phi``."""
    F = rotation_from_euler(phi)
    chi_lab = F @ trap.chi.matrix() @ np.swapaxes(F, -1, -2)
    return chi_lab @ trap.pol.vector


def classical_amplitude(r, phi, trap: TrapParams, n, nu: int) -> complex:
    """Classical scattering amplitude into direction ``n``, polarization ``nu`` (1 or 2)."""
    n = _check_unit(n)
    if nu not in (1, 2):
        raise ValueError("nu must be 1 or 2")
    e1, e2 = basis_vectors(n)
    eps = e1 if nu == 1 else e2
    r = np.asarray(r, dtype=float)
    coupling = np.einsum("...i,...i->...", eps, induced_dipole_direction(phi, trap))
    phase = np.exp(1j * trap.mode.k * np.einsum("...i,...i->...", n, r))
    return coupling * mode_value(trap.mode, r) * phase


def total_scattering_weight(phi, trap: TrapParams, order: int = 32) -> float:
    """``sum_nu int dn |eps* . chi_lab eps_d|^2`` over the full sphere."""
    v = induced_dipole_direction(phi, trap)
    return float(integrate_over_detector(lambda n, e: np.abs(e @ v) ** 2, full_sphere(order)))


def dipole_pattern_moments(v) -> np.ndarray:
    """Closed form of ``sum_nu int dn |eps* . v|^2 n n^T`` for a complex vector ``v``."""
    v = np.asarray(v, dtype=complex)
    vv = np.real(np.einsum("...i,...j->...ij", v, v.conj()))
    norm2 = np.einsum("...ii->...", vv)
    eye = np.eye(3)
    return 4 * np.pi / 15 * (4 * norm2[..., None, None] * eye - (vv + np.swapaxes(vv, -1, -2)))
