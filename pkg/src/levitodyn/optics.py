"""Trapping-beam mode, polarization vectors and susceptibility contractions."""

from __future__ import annotations

from dataclasses import dataclass, field
from math import factorial

import numpy as np

from .errors import DegeneratePolarization, NotUnitVector
from .kinematics import rotation_from_euler

UNIT_TOLERANCE = 1e-10


@dataclass(frozen=True)
class Polarization:
    """Trapping-field polarization ``(b_x, i b_y, 0) / sqrt(b_x^2 + b_y^2)``."""

    b_x: float
    b_y: float
    vector: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        norm = np.hypot(self.b_x, self.b_y)
        if norm == 0:
            raise DegeneratePolarization("b_x and b_y cannot both vanish")
        vec = np.array([self.b_x, 1j * self.b_y, 0.0], dtype=complex) / norm
        vec.setflags(write=False)
        object.__setattr__(self, "vector", vec)

    @property
    def is_linear(self) -> bool:
        return self.b_x == 0 or self.b_y == 0


def elliptical_polarization(b_x: float, b_y: float) -> Polarization:
    return Polarization(float(b_x), float(b_y))


@dataclass(frozen=True)
class GaussianMode:
    """Gaussian mode with transverse asymmetry parameters ``a1``, ``a2``.

    Lengths in metres; the wavenumber is derived from ``wavelength``.
    """

    w0: float
    zR: float
    wavelength: float
    a1: float = 1.0
    a2: float = 1.0

    def __post_init__(self):
        for name in ("w0", "zR", "wavelength"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")

    @property
    def k(self) -> float:
        return 2 * np.pi / self.wavelength


@dataclass(frozen=True)
class Susceptibility:
    """Body-frame susceptibility ``chi0 * (1 + diag(delta_chi))``."""

    chi0: float
    delta_chi: tuple[float, float, float] = (0.0, 0.0, 0.0)

    def __post_init__(self):
        object.__setattr__(self, "delta_chi", tuple(float(d) for d in self.delta_chi))
        if len(self.delta_chi) != 3:
            raise ValueError("delta_chi needs three diagonal entries")
        if np.any(self.diagonal() <= 0):
            raise ValueError(f"susceptibility eigenvalues must be positive, got {self.diagonal()}")

    @classmethod
    def from_principal(cls, chi1: float, chi2: float, chi3: float, chi0: float | None = None):
        chi = np.array([chi1, chi2, chi3], dtype=float)
        chi0 = float(chi.mean()) if chi0 is None else float(chi0)
        return cls(chi0, tuple(chi / chi0 - 1.0))

    def diagonal(self) -> np.ndarray:
        return self.chi0 * (1.0 + np.asarray(self.delta_chi))

    def matrix(self) -> np.ndarray:
        return np.diag(self.diagonal())

    def anisotropy_matrix(self) -> np.ndarray:
        return np.diag(self.delta_chi)


def beam_width(mode: GaussianMode, z):
    return mode.w0 * np.sqrt(1.0 + (np.asarray(z) / mode.zR) ** 2)


def mode_value(mode: GaussianMode, r) -> complex | np.ndarray:
    """Complex mode function at position(s) ``r`` (last axis = x, y, z)."""
    r = np.asarray(r, dtype=float)
    x, y, z = r[..., 0], r[..., 1], r[..., 2]
    w = beam_width(mode, z)
    return (mode.w0 / w) * np.exp(-(mode.a1 * x**2 + mode.a2 * y**2) / w**2) * np.exp(1j * mode.k * z)


def intensity(mode: GaussianMode, r):
    """``|u(r)|^2``, evaluated without complex arithmetic."""
    r = np.asarray(r, dtype=float)
    x, y, z = r[..., 0], r[..., 1], r[..., 2]
    s = 1.0 + (z / mode.zR) ** 2
    return np.exp(-2.0 * (mode.a1 * x**2 + mode.a2 * y**2) / (mode.w0**2 * s)) / s


def intensity_gradient(mode: GaussianMode, r):
    """Gradient of ``|u|^2`` with respect to position."""
    r = np.asarray(r, dtype=float)
    x, y, z = r[..., 0], r[..., 1], r[..., 2]
    s = 1.0 + (z / mode.zR) ** 2
    q = mode.a1 * x**2 + mode.a2 * y**2
    I = np.exp(-2.0 * q / (mode.w0**2 * s)) / s
    gx = -4.0 * mode.a1 * x / (mode.w0**2 * s)
    gy = -4.0 * mode.a2 * y / (mode.w0**2 * s)
    gz = (-1.0 / s + 2.0 * q / (mode.w0**2 * s**2)) * (2.0 * z / mode.zR**2)
    return I[..., None] * np.stack([gx, gy, gz], -1)


# truncated polynomials in (x, y, z): dict {(k, l, m): coefficient}


def _poly_mul(a: dict, b: dict, order: int) -> dict:
    out: dict = {}
    for ea, ca in a.items():
        for eb, cb in b.items():
            e = (ea[0] + eb[0], ea[1] + eb[1], ea[2] + eb[2])
            if sum(e) <= order:
                out[e] = out.get(e, 0.0) + ca * cb
    return out


def _poly_add(a: dict, b: dict, scale: float = 1.0) -> dict:
    out = dict(a)
    for e, c in b.items():
        out[e] = out.get(e, 0.0) + scale * c
    return out


def _poly_series(base: dict, coefficients, order: int) -> dict:
    """``sum_j coefficients[j] * base**j`` truncated at total degree ``order``."""
    result: dict = {}
    power = {(0, 0, 0): 1.0}
    for cj in coefficients:
        result = _poly_add(result, power, cj)
        power = _poly_mul(power, base, order)
        if not power:
            break
    return result


def intensity_expansion(mode: GaussianMode, prefactor: float = 1.0, order: int = 4) -> dict:
    """Taylor coefficients ``c[(k, l, m)]`` of ``prefactor * |u|^2`` about the focus.

    All monomials ``x^k y^l z^m`` with ``k + l + m <= order`` are returned,
    including the vanishing ones.
    """
    n_terms = order // 2 + 1
    zz = {(0, 0, 2): 1.0 / mode.zR**2}
    inv_s = _poly_series(zz, [(-1.0) ** j for j in range(n_terms)], order)
    transverse = {(2, 0, 0): -2.0 * mode.a1 / mode.w0**2, (0, 2, 0): -2.0 * mode.a2 / mode.w0**2}
    exponent = _poly_mul(transverse, inv_s, order)
    gauss = _poly_series(exponent, [1.0 / factorial(j) for j in range(n_terms)], order)
    full = _poly_mul(inv_s, gauss, order)
    return {
        (k, l, m): prefactor * full.get((k, l, m), 0.0)
        for k in range(order + 1)
        for l in range(order + 1 - k)
        for m in range(order + 1 - k - l)
    }


@dataclass(frozen=True)
class PolarizationBasis:
    n: np.ndarray
    e1: np.ndarray
    e2: np.ndarray

    def vectors(self) -> np.ndarray:
        return np.stack([self.e1, self.e2])


def _check_unit(n) -> np.ndarray:
    n = np.asarray(n, dtype=float)
    norms = np.linalg.norm(n, axis=-1)
    if np.any(np.abs(norms - 1.0) > UNIT_TOLERANCE):
        raise NotUnitVector(f"direction must be a unit vector, |n| = {norms}")
    return n


def basis_vectors(n) -> tuple[np.ndarray, np.ndarray]:
    """Batched real transverse basis ``(e1, e2)`` with ``e1 x e2 = n``.

    Away from the z axis ``e1 ~ e_z x n``; within ``|n_z| >= 0.999`` the
    reference switches to x so that ``n = e_z`` yields ``(e_x, e_y)``.
    """
    n = _check_unit(n)
    ez = np.array([0.0, 0.0, 1.0])
    ex = np.array([1.0, 0.0, 0.0])
    polar = np.abs(n[..., 2]) >= 0.999
    e1_main = np.cross(ez, n)
    e2_polar = np.cross(n, ex)
    e1_main = e1_main / np.maximum(np.linalg.norm(e1_main, axis=-1, keepdims=True), 1e-300)
    e2_polar = e2_polar / np.maximum(np.linalg.norm(e2_polar, axis=-1, keepdims=True), 1e-300)
    e1_polar = np.cross(e2_polar, n)
    e2_main = np.cross(n, e1_main)
    pick = polar[..., None]
    return np.where(pick, e1_polar, e1_main), np.where(pick, e2_polar, e2_main)


def scattering_basis(n) -> PolarizationBasis:
    n = _check_unit(n)
    if n.shape != (3,):
        raise ValueError("scattering_basis takes a single direction; use basis_vectors for batches")
    e1, e2 = basis_vectors(n)
    return PolarizationBasis(n, e1, e2)


def circular_from_linear(amp_x: complex, amp_y: complex) -> tuple[complex, complex]:
    """Amplitudes in the circular basis from linear ones."""
    s = np.sqrt(0.5)
    return s * (amp_x + 1j * amp_y), s * (amp_x - 1j * amp_y)


def linear_from_circular(amp_l: complex, amp_r: complex) -> tuple[complex, complex]:
    s = np.sqrt(0.5)
    return s * (amp_l + amp_r), -1j * s * (amp_l - amp_r)


def lab_susceptibility(phi, chi: Susceptibility) -> np.ndarray:
    F = rotation_from_euler(phi)
    return F @ chi.matrix() @ np.swapaxes(F, -1, -2)


def gradient_coupling(phi, chi: Susceptibility, pol: Polarization) -> float:
    """``conj(eps_d) . F chi F^T . eps_d`` by direct contraction."""
    eps = pol.vector
    value = np.einsum("i,...ij,j->...", eps.conj(), lab_susceptibility(phi, chi), eps)
    return np.real(value)


def gradient_coupling_trig(phi, chi: Susceptibility, pol: Polarization) -> float:
    """Same quantity from the explicit trigonometric expansion.

    Kept as an independent evaluation path; normalised by ``b_x^2 + b_y^2``.
    """
    phi = np.asarray(phi, dtype=float)
    a, b, g = phi[..., 0], phi[..., 1], phi[..., 2]
    ca, sa, cb, sb, cg, sg = np.cos(a), np.sin(a), np.cos(b), np.sin(b), np.cos(g), np.sin(g)
    chi1, chi2, chi3 = chi.diagonal()
    x_part = (
        chi1 * (ca * cb * cg - sa * sg) ** 2
        + chi2 * (ca * cb * sg + sa * cg) ** 2
        + chi3 * ca**2 * sb**2
    )
    y_part = (
        chi1 * (sa * cb * cg + ca * sg) ** 2
        + chi2 * (ca * cg - sa * cb * sg) ** 2
        + chi3 * sa**2 * sb**2
    )
    bx2, by2 = pol.b_x**2, pol.b_y**2
    return (bx2 * x_part + by2 * y_part) / (bx2 + by2)


@dataclass(frozen=True)
class TrapParams:
    """Optical configuration: beam, polarization, particle volume and susceptibility.

    ``omega_L`` overrides the laser angular frequency otherwise derived from
    the wavelength.
    """

    power: float
    sigma_L: float
    volume: float
    mode: GaussianMode
    pol: Polarization
    chi: Susceptibility
    omega_L: float | None = None

    def __post_init__(self):
        for name in ("power", "sigma_L"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if not self.volume >= 0:
            raise ValueError("volume must be non-negative")

    def potential_prefactor(self, c: float) -> float:
        """``V P / (c sigma_L)``: the energy scale of the gradient potential."""
        return self.volume * self.power / (c * self.sigma_L)

    def laser_frequency(self, c: float) -> float:
        return self.omega_L if self.omega_L is not None else 2 * np.pi * c / self.mode.wavelength
