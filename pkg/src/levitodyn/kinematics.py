"""Rigid-rotor kinematics in the z-y'-z'' Euler convention.

A rotation is ``F(alpha, beta, gamma) = Fz(alpha) @ Fy(beta) @ Fz(gamma)``.
``Fz(alpha)`` turns x towards y and ``Fy(beta)`` turns z towards x, so that
``expm(theta * rotation_generator(k))`` reproduces the elementary rotation
about axis ``k``.

The columns of ``n_matrix`` are the lab-frame directions of the three
rotation axes, giving ``omega_lab = N(phi) @ phi_dot``. The conjugate
momenta are ``pi = N.T @ L_lab``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import GimbalLock

SINGULARITY_THRESHOLD = 1e-8


class EulerAngles(NamedTuple):
    alpha: float
    beta: float
    gamma: float


class AngularMomenta(NamedTuple):
    pi_alpha: float
    pi_beta: float
    pi_gamma: float


@dataclass(frozen=True)
class InertiaTensor:
    """Principal moments of inertia (kg m^2) in the body frame."""

    I1: float
    I2: float
    I3: float

    def __post_init__(self):
        moments = self.as_array()
        if np.any(moments <= 0):
            raise ValueError(f"moments of inertia must be positive, got {moments}")
        total = moments.sum()
        # triangle inequality I_i + I_j >= I_k, with a relative slack for rounding
        if np.any(total - 2 * moments < -1e-12 * total):
            raise ValueError(f"moments violate the triangle inequality: {moments}")

    def as_array(self) -> np.ndarray:
        return np.array([self.I1, self.I2, self.I3], dtype=float)

    def matrix(self) -> np.ndarray:
        return np.diag(self.as_array())

    def diffusion_weights(self) -> np.ndarray:
        """Rotational gas-diffusion weights ``tr(I)/2 - I_zeta``."""
        moments = self.as_array()
        return 0.5 * moments.sum() - moments


def rot_z(angle):
    c, s = np.cos(angle), np.sin(angle)
    z, o = np.zeros_like(c), np.ones_like(c)
    return np.stack([np.stack([c, -s, z], -1), np.stack([s, c, z], -1), np.stack([z, z, o], -1)], -2)


def rot_y(angle):
    c, s = np.cos(angle), np.sin(angle)
    z, o = np.zeros_like(c), np.ones_like(c)
    return np.stack([np.stack([c, z, s], -1), np.stack([z, o, z], -1), np.stack([-s, z, c], -1)], -2)


def rotation_from_euler(phi) -> np.ndarray:
    """Rotation matrix ``Fz(alpha) Fy(beta) Fz(gamma)``.

    ``phi`` may be an :class:`EulerAngles` or any array whose last axis holds
    ``(alpha, beta, gamma)``; batched input returns a stack of matrices.
    """
    phi = np.asarray(phi, dtype=float)
    return rot_z(phi[..., 0]) @ rot_y(phi[..., 1]) @ rot_z(phi[..., 2])


def n_matrix(phi) -> np.ndarray:
    """Map from Euler-angle rates to the lab-frame angular velocity (batched)."""
    phi = np.asarray(phi, dtype=float)
    alpha, beta = phi[..., 0], phi[..., 1]
    ca, sa, cb, sb = np.cos(alpha), np.sin(alpha), np.cos(beta), np.sin(beta)
    zero, one = np.zeros_like(alpha), np.ones_like(alpha)
    return np.stack(
        [
            np.stack([zero, -sa, ca * sb], -1),
            np.stack([zero, ca, sa * sb], -1),
            np.stack([one, zero, cb], -1),
        ],
        -2,
    )


def n_matrix_inverse(phi, threshold: float = SINGULARITY_THRESHOLD) -> np.ndarray:
    alpha, beta, _ = np.asarray(phi, dtype=float)
    sb = np.sin(beta)
    if abs(sb) < threshold:
        raise GimbalLock(f"|sin(beta)| = {abs(sb):.3e} below threshold {threshold:.1e}")
    ca, sa, cb = np.cos(alpha), np.sin(alpha), np.cos(beta)
    # closed-form inverse of n_matrix (det N = -sin beta)
    return np.array(
        [
            [-cb * ca / sb, -cb * sa / sb, 1.0],
            [-sa, ca, 0.0],
            [ca / sb, sa / sb, 0.0],
        ]
    )


def lab_angular_momentum(phi, pi, threshold: float = SINGULARITY_THRESHOLD) -> np.ndarray:
    """``L_lab = (N^T)^-1 pi``."""
    return n_matrix_inverse(phi, threshold).T @ np.asarray(pi, dtype=float)


def conjugate_momenta(phi, angular_momentum_lab) -> np.ndarray:
    """``pi = N^T L_lab``; defined everywhere, including at gimbal lock."""
    return n_matrix(phi).T @ np.asarray(angular_momentum_lab, dtype=float)


def rotational_kinetic_energy(phi, pi, inertia: InertiaTensor, threshold: float = SINGULARITY_THRESHOLD) -> float:
    F = rotation_from_euler(phi)
    L = lab_angular_momentum(phi, pi, threshold)
    L_body = F.T @ L
    return 0.5 * float(np.sum(L_body**2 / inertia.as_array()))


_GENERATORS = np.zeros((3, 3, 3))
for _k in range(3):
    for _i in range(3):
        for _j in range(3):
            # (L_k)_ij = -eps_kij, i.e. L_k v = e_k x v
            _GENERATORS[_k, _i, _j] = -((_k - _i) * (_i - _j) * (_j - _k)) / 2
_GENERATORS.setflags(write=False)


def rotation_generator(axis: int) -> np.ndarray:
    """Antisymmetric generator of rotations about axis 1, 2 or 3."""
    if axis not in (1, 2, 3):
        raise ValueError(f"axis must be 1, 2 or 3, got {axis!r}")
    return _GENERATORS[axis - 1].copy()


def hat(v) -> np.ndarray:
    """Cross-product matrix: ``hat(v) @ w == cross(v, w)``; batched over leading axes."""
    v = np.asarray(v, dtype=float)
    z = np.zeros_like(v[..., 0])
    return np.stack(
        [
            np.stack([z, -v[..., 2], v[..., 1]], -1),
            np.stack([v[..., 2], z, -v[..., 0]], -1),
            np.stack([-v[..., 1], v[..., 0], z], -1),
        ],
        -2,
    )


def axis_angle_rotation(axis, angle) -> np.ndarray:
    """Rodrigues rotation about unit ``axis`` by ``angle`` (batched)."""
    K = hat(axis)
    a = np.asarray(angle, dtype=float)[..., None, None]
    return np.eye(3) + np.sin(a) * K + (1.0 - np.cos(a)) * (K @ K)


def euler_from_rotation(R, previous=None) -> np.ndarray:
    """Recover ``(alpha, beta, gamma)`` from rotation matrices.

    ``beta`` lies in ``[0, pi]``. When ``previous`` angles are given, alpha and
    gamma are shifted by multiples of 2 pi to stay continuous with them, and
    at gimbal lock the undetermined split between alpha and gamma keeps the
    previous alpha.
    """
    R = np.asarray(R, dtype=float)
    sb = np.hypot(R[..., 0, 2], R[..., 1, 2])
    beta = np.arctan2(sb, R[..., 2, 2])
    alpha = np.arctan2(R[..., 1, 2], R[..., 0, 2])
    gamma = np.arctan2(R[..., 2, 1], -R[..., 2, 0])
    locked = sb < 1e-9
    if np.any(locked):
        a_prev = np.zeros_like(alpha) if previous is None else np.asarray(previous, dtype=float)[..., 0]
        # beta=0: R = Fz(alpha + gamma); beta=pi: upper block of R is -Fz(alpha - gamma) reflected
        up = R[..., 2, 2] > 0
        total = np.where(
            up, np.arctan2(R[..., 1, 0], R[..., 0, 0]), np.arctan2(-R[..., 1, 0], -R[..., 0, 0])
        )
        alpha = np.where(locked, a_prev, alpha)
        gamma = np.where(locked, np.where(up, total - a_prev, a_prev - total), gamma)
    if previous is not None:
        prev = np.asarray(previous, dtype=float)
        alpha = alpha + 2 * np.pi * np.round((prev[..., 0] - alpha) / (2 * np.pi))
        gamma = gamma + 2 * np.pi * np.round((prev[..., 2] - gamma) / (2 * np.pi))
    return np.stack([alpha, beta, gamma], -1)
