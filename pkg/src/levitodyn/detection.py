"""Classical homodyne photocurrent and its ro-translational decomposition.

The mean current is ``G sum_nu int_S Re(A e^{i dphi}) dn`` with gain
``G = 2 eta sqrt(gamma_s)`` and amplitude ``A = (eps_nu . chi_lab eps_d) u(r) e^{i k n.r}``.
Writing ``chi = chi0 (1 + dchi)`` and expanding ``u e^{i k n.r}`` to second
order in ``r`` as ``1 + T1 + T2`` splits it into

* ``J0``: isotropic particle at the focus,
* ``JT``: isotropic particle, position terms ``T1 + T2``,
* ``JR``: anisotropic part at the focus,
* ``JRT``: anisotropic part times the position terms.

The split is exact in ``dchi``; the residual is third order in ``k r``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .constants import SI, PhysicalConstants
from .kinematics import rotation_from_euler
from .optics import GaussianMode, TrapParams, mode_value
from .scattering import DetectorGeometry, detector_quadrature, scattering_rate

Z2_CONVENTIONS = ("exact", "as_printed")


@dataclass(frozen=True)
class HomodyneConfig:
    """Local-oscillator phase, detector cap and sampling interval.

    ``z2_convention`` selects the ``z^2`` coefficient of the position
    expansion: ``"exact"`` uses the Taylor coefficient ``-(zR^2 k^2 + 1)/(2 zR^2)``;
    ``"as_printed"`` uses ``-(zR^2 k^2 + 2)/(2 zR^2)``.
    """

    delta_phi: float = 0.0
    det: DetectorGeometry = field(default_factory=DetectorGeometry)
    dt: float = 1e-6
    gain: float = 1.0
    z2_convention: str = "exact"

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if self.z2_convention not in Z2_CONVENTIONS:
            raise ValueError(f"z2_convention must be one of {Z2_CONVENTIONS}")

    @property
    def eta(self) -> float:
        return self.det.eta

    @property
    def noise_variance(self) -> float:
        """Variance ``2 Omega eta dt`` of the Wiener increment ``dW``."""
        return 2.0 * self.det.solid_angle * self.eta * self.dt


@dataclass(frozen=True)
class CurrentDecomposition:
    J0: float
    JT: float
    JR: float
    JRT: float

    @property
    def total(self) -> float:
        return self.J0 + self.JT + self.JR + self.JRT


def current_gain(trap: TrapParams, cfg: HomodyneConfig, constants: PhysicalConstants = SI) -> float:
    """``2 eta sqrt(gamma_s)`` times the detector gain."""
    return 2.0 * cfg.eta * np.sqrt(scattering_rate(trap, constants)) * cfg.gain


def signal_unit(trap: TrapParams, cfg: HomodyneConfig, constants: PhysicalConstants = SI) -> float:
    """Natural current scale ``2 eta sqrt(gamma_s) chi0``."""
    return current_gain(trap, cfg, constants) * trap.chi.chi0


def position_expansion(mode: GaussianMode, n, r, z2_convention: str = "exact"):
    """First- and second-order terms ``(T1, T2)`` of ``u(r) e^{i k n.r}`` about the focus.

    ``n`` has shape (Q, 3); ``r`` has shape (..., 3). Outputs broadcast to (..., Q).
    """
    if z2_convention not in Z2_CONVENTIONS:
        raise ValueError(f"z2_convention must be one of {Z2_CONVENTIONS}")
    r = np.asarray(r, dtype=float)
    k, w0, zR = mode.k, mode.w0, mode.zR
    x, y, z = (r[..., i, None] for i in range(3))
    nr = r @ np.asarray(n).T
    t1 = 1j * k * (nr + z)
    z2 = (zR**2 * k**2 + (1.0 if z2_convention == "exact" else 2.0)) / (2 * zR**2)
    t2 = -k**2 * nr * z - 0.5 * k**2 * nr**2 - mode.a1 * x**2 / w0**2 - mode.a2 * y**2 / w0**2 - z2 * z**2
    return t1, t2 + 0j


def _projections(M, trap: TrapParams, quad):
    """``s_nu(M) = eps_nu . M eps_d`` at every node, shape (..., Q, 2)."""
    v = M @ trap.pol.vector
    return np.einsum("qnj,...j->...qn", quad.polarizations, v)


def _integrate(values, weights, delta_phi):
    """``sum_nu int Re(values e^{i dphi})`` with values (..., Q, 2)."""
    return np.einsum("...qn,q->...", np.real(values * np.exp(1j * delta_phi)), weights)


def _lab_anisotropy(R, trap: TrapParams):
    dchi = np.asarray(trap.chi.delta_chi)
    return (R * dchi[..., None, :]) @ np.swapaxes(R, -1, -2)


def mean_current(
    r, R, trap: TrapParams, cfg: HomodyneConfig, constants: PhysicalConstants = SI
):
    """Deterministic current for positions ``r`` (..., 3) and rotations ``R`` (..., 3, 3)."""
    quad = detector_quadrature(cfg.det)
    r = np.asarray(r, dtype=float)
    chi_lab = (R * trap.chi.diagonal()[..., None, :]) @ np.swapaxes(R, -1, -2)
    s = _projections(chi_lab, trap, quad)
    phase = mode_value(trap.mode, r)[..., None] * np.exp(1j * trap.mode.k * (r @ quad.directions.T))
    return current_gain(trap, cfg, constants) * _integrate(s * phase[..., None], quad.weights, cfg.delta_phi)


def homodyne_current(
    state,
    trap: TrapParams,
    cfg: HomodyneConfig,
    rng: np.random.Generator,
    constants: PhysicalConstants = SI,
) -> float:
    """One current sample ``J = mean + dW / dt`` with ``Var(dW) = 2 Omega eta dt``."""
    mean = float(mean_current(state.r, rotation_from_euler(state.phi), trap, cfg, constants))
    dW = rng.normal(0.0, np.sqrt(cfg.noise_variance)) if cfg.eta > 0 else 0.0
    return mean + dW / cfg.dt


def current_trace(r, R, trap, cfg, rng, constants: PhysicalConstants = SI) -> np.ndarray:
    """Current samples along a trajectory (``r`` (T, 3), ``R`` (T, 3, 3))."""
    mean = mean_current(r, R, trap, cfg, constants)
    if cfg.eta == 0:
        return np.zeros_like(mean)
    return mean + rng.normal(0.0, np.sqrt(cfg.noise_variance), size=mean.shape) / cfg.dt


def _parts(r, R, trap, cfg, constants):
    quad = detector_quadrature(cfg.det)
    G = current_gain(trap, cfg, constants) * trap.chi.chi0
    s_iso = _projections(np.eye(3), trap, quad)
    s_rot = _projections(_lab_anisotropy(R, trap), trap, quad)
    t1, t2 = position_expansion(trap.mode, quad.directions, r, cfg.z2_convention)
    pos = (t1 + t2)[..., None]
    w, dphi = quad.weights, cfg.delta_phi
    return (
        G * _integrate(s_iso, w, dphi),
        G * _integrate(s_iso * pos, w, dphi),
        G * _integrate(s_rot, w, dphi),
        G * _integrate(s_rot * pos, w, dphi),
    )


def current_translational(r, trap: TrapParams, cfg: HomodyneConfig, constants: PhysicalConstants = SI):
    """``JT``: position-dependent current of the isotropic part."""
    return _parts(r, np.eye(3), trap, cfg, constants)[1]


def current_rotational(phi, trap: TrapParams, cfg: HomodyneConfig, constants: PhysicalConstants = SI):
    """``JR``: orientation-dependent current at the focus."""
    return _parts(np.zeros(3), rotation_from_euler(phi), trap, cfg, constants)[2]


def current_decomposition(
    state, trap: TrapParams, cfg: HomodyneConfig, constants: PhysicalConstants = SI
) -> CurrentDecomposition:
    parts = _parts(state.r, rotation_from_euler(state.phi), trap, cfg, constants)
    return CurrentDecomposition(*(float(p) for p in parts))
