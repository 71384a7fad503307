"""Classical ro-translational Langevin dynamics of the trapped particle.

The public state is the canonical point ``(r, p, phi, pi)`` with Euler
angles ``phi`` and conjugate momenta ``pi``. Internally the integrator carries
the rotation matrix ``R`` and the lab-frame angular momentum ``L = N^-T pi``:
the Euler parametrization is singular at ``sin(beta) = 0``, while ``(R, L)``
is not, so trajectories may pass through gimbal lock freely. Angles are
recovered (unwrapped) when states are emitted.

One step is a symmetric splitting: half kick, half drift, exact
Ornstein-Uhlenbeck update of both momenta, half drift, half kick. The free
rotor drift composes exact rotations about the three body axes
(1, 2, 3, 2, 1). Without gas or recoil the scheme is symplectic.

Gas damping uses the classical limit of the Caldeira-Leggett dissipators.
The momentum damping rate is ``gamma_c`` for translations; for rotations the
weights ``tr(I)/2 - I_zeta`` summed over ``zeta`` give
``sum_zeta D_zeta (1 - e_zeta e_zeta^T) = I``, so the friction torque is
``-gamma_c L`` with angular-momentum diffusion ``2 gamma_c k_B T I_lab``,
whose stationary law is the Boltzmann distribution of the rigid rotor.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import kinematics as kin
from .constants import SI, PhysicalConstants
from .errors import NumericalBlowup
from .kinematics import InertiaTensor
from .optics import TrapParams, gradient_coupling, intensity, intensity_gradient
from .scattering import (
    detector_quadrature,
    dipole_pattern_moments,
    full_sphere,
    scattering_rate,
)

__all__ = [
    "Particle",
    "GasParams",
    "System",
    "ParticleState",
    "Trajectory",
    "potential",
    "forces_and_torques",
    "langevin_step",
    "recoil_diffusion_coefficients",
    "simulate_trajectory",
    "simulate_ensemble",
    "trap_stiffness",
    "total_energy",
]

DEFAULT_MAX_STEPS = 50_000_000


@dataclass(frozen=True)
class Particle:
    mass: float
    inertia: InertiaTensor

    def __post_init__(self):
        if not self.mass > 0:
            raise ValueError("mass must be positive")


@dataclass(frozen=True)
class GasParams:
    """Background gas. ``gamma_c`` is the momentum damping rate (1/s)."""

    gamma_c: float = 0.0
    temperature: float = 300.0
    constituent_mass: float = 4.65e-26

    def __post_init__(self):
        if self.gamma_c < 0:
            raise ValueError("gamma_c must be non-negative")
        if not self.temperature > 0 or not self.constituent_mass > 0:
            raise ValueError("temperature and constituent mass must be positive")


@dataclass(frozen=True)
class System:
    particle: Particle
    trap: TrapParams
    gas: GasParams = field(default_factory=GasParams)
    constants: PhysicalConstants = SI
    recoil_on: bool = False

    @property
    def kT(self) -> float:
        return self.constants.k_b * self.gas.temperature

    @property
    def depth_scale(self) -> float:
        return self.trap.potential_prefactor(self.constants.c)


@dataclass(frozen=True)
class ParticleState:
    r: np.ndarray
    p: np.ndarray
    phi: np.ndarray
    pi: np.ndarray

    def __post_init__(self):
        for name in ("r", "p", "phi", "pi"):
            arr = np.array(getattr(self, name), dtype=float)
            if arr.shape != (3,):
                raise ValueError(f"{name} must be a 3-vector")
            object.__setattr__(self, name, arr)

    @classmethod
    def at_rest(cls, phi=(np.pi / 2, np.pi / 2, np.pi / 2), r=(0.0, 0.0, 0.0)):
        return cls(np.asarray(r, float), np.zeros(3), np.asarray(phi, float), np.zeros(3))

    @classmethod
    def from_angular_momentum(cls, r, p, phi, L_lab):
        return cls(r, p, phi, kin.conjugate_momenta(phi, L_lab))

    def rotation(self) -> np.ndarray:
        return kin.rotation_from_euler(self.phi)

    def angular_momentum(self) -> np.ndarray:
        return kin.lab_angular_momentum(self.phi, self.pi)

    def as_row(self) -> np.ndarray:
        return np.concatenate([self.r, self.p, self.phi, self.pi])


# -- potential and its gradients ------------------------------------------------


def _coupling_from_rotation(R, trap: TrapParams):
    eps = trap.pol.vector
    w = (R * trap.chi.diagonal()[..., None, :]) @ np.swapaxes(R, -1, -2) @ eps
    return np.real(w @ eps.conj()), w


def _potential_batch(r, R, system: System):
    K = system.depth_scale
    coupling, _ = _coupling_from_rotation(R, system.trap)
    U = -K * intensity(system.trap.mode, r) * coupling
    return U + system.particle.mass * system.constants.g * r[..., 0]


def potential(state: ParticleState, system: System) -> float:
    """Gradient-force potential plus the gravitational term ``M g x``."""
    K = system.depth_scale
    coupling = gradient_coupling(state.phi, system.trap.chi, system.trap.pol)
    U = -K * intensity(system.trap.mode, state.r) * coupling
    return float(U + system.particle.mass * system.constants.g * state.r[0])


def _potential_euler(r, phi, system):
    return potential(ParticleState(r, np.zeros(3), phi, np.zeros(3)), system)


def forces_and_torques(
    state: ParticleState,
    system: System,
    rel_step: float = 1e-6,
    richardson: bool = False,
) -> tuple[np.ndarray, np.ndarray]:
    """``(-dU/dr, -dU/dphi)`` by central finite differences.

    Position steps are ``rel_step * w0``, angle steps ``rel_step`` rad.
    With ``richardson`` the h and h/2 estimates are extrapolated.
    """
    length = system.trap.mode.w0

    def central(fun, x, h):
        grad = np.empty(3)
        for i in range(3):
            dx = np.zeros(3)
            dx[i] = h
            grad[i] = (fun(x + dx) - fun(x - dx)) / (2 * h)
        return grad

    def both(h_len, h_ang):
        gr = central(lambda r: _potential_euler(r, state.phi, system), state.r, h_len)
        gp = central(lambda ph: _potential_euler(state.r, ph, system), state.phi, h_ang)
        return gr, gp

    gr, gp = both(rel_step * length, rel_step)
    if richardson:
        gr2, gp2 = both(0.5 * rel_step * length, 0.5 * rel_step)
        gr, gp = (4 * gr2 - gr) / 3, (4 * gp2 - gp) / 3
    return -gr, -gp


def _cross(a, b):
    # np.cross carries heavy axis bookkeeping; this sits in the inner loop
    a0, a1, a2 = a[..., 0], a[..., 1], a[..., 2]
    b0, b1, b2 = b[..., 0], b[..., 1], b[..., 2]
    return np.stack([a1 * b2 - a2 * b1, a2 * b0 - a0 * b2, a0 * b1 - a1 * b0], -1)


def _force_torque_batch(r, R, system: System):
    """Analytic force and lab-frame torque for batched ``r`` (B,3), ``R`` (B,3,3)."""
    K = system.depth_scale
    trap = system.trap
    coupling, w = _coupling_from_rotation(R, trap)
    I = intensity(trap.mode, r)
    force = K * coupling[..., None] * intensity_gradient(trap.mode, r)
    force[..., 0] -= system.particle.mass * system.constants.g
    # dU/dtheta_k under R -> exp(theta L_k) R equals -K |u|^2 2 Re(eps* . (e_k x w))
    torque = 2 * K * I[..., None] * np.real(_cross(w, trap.pol.vector.conj()))
    return force, torque


def lab_torque(state: ParticleState, system: System) -> np.ndarray:
    _, tau = _force_torque_batch(state.r[None], state.rotation()[None], system)
    return tau[0]


def trap_stiffness(system: System, phi=(np.pi / 2, np.pi / 2, np.pi / 2)) -> np.ndarray:
    """Harmonic spring constants ``(k_x, k_y, k_z)`` at the focus for orientation ``phi``."""
    mode = system.trap.mode
    depth = system.depth_scale * gradient_coupling(phi, system.trap.chi, system.trap.pol)
    return depth * np.array([4 * mode.a1 / mode.w0**2, 4 * mode.a2 / mode.w0**2, 2 / mode.zR**2])


def second_difference_stiffness(
    system: System, axis: int = 0, phi=(np.pi / 2, np.pi / 2, np.pi / 2), rel_step: float = 1e-4
) -> float:
    """``d^2 U / d r_axis^2`` at the focus by a central second difference."""
    h = rel_step * system.trap.mode.w0
    dr = np.zeros(3)
    dr[axis] = h
    U = [_potential_euler(s * dr, phi, system) for s in (-1.0, 0.0, 1.0)]
    return (U[0] - 2 * U[1] + U[2]) / h**2


# -- photon recoil ----------------------------------------------------------------


def recoil_diffusion_coefficients(
    trap: TrapParams,
    constants: PhysicalConstants = SI,
    phi=(np.pi / 2, np.pi / 2, np.pi / 2),
    r=(0.0, 0.0, 0.0),
    order: int = 32,
) -> np.ndarray:
    """Momentum diffusion matrix ``d<p_i p_j>/dt`` from scattered-photon recoil.

    ``hbar^2 k^2 gamma_s |u|^2 sum_nu int dn |eps* . chi_lab eps_d|^2 n_i n_j``,
    integrated with the full-sphere product quadrature.
    """
    gamma_s = scattering_rate(trap, constants)
    k = trap.mode.k
    F = kin.rotation_from_euler(phi)
    v = F @ trap.chi.matrix() @ F.T @ trap.pol.vector
    quad = detector_quadrature(full_sphere(order))
    pattern = np.zeros((3, 3))
    for nu in range(2):
        amp2 = np.abs(quad.polarizations[:, nu] @ v) ** 2
        pattern += np.einsum("q,qi,qj->ij", quad.weights * amp2, quad.directions, quad.directions)
    return (constants.hbar * k) ** 2 * gamma_s * float(intensity(trap.mode, r)) * pattern


def _recoil_terms(r, R, system: System):
    """Mean radiation-pressure force and diffusion matrices for a batch."""
    trap, const = system.trap, system.constants
    gamma_s = scattering_rate(trap, const)
    hk = const.hbar * trap.mode.k
    I = intensity(trap.mode, r)
    _, v = _coupling_from_rotation(R, trap)
    moments = dipole_pattern_moments(v)
    # sum_nu int |eps.v|^2 dn = 8 pi/3 |v|^2; the n-odd part of the kick averages out
    weight = 8 * np.pi / 3 * np.sum(np.abs(v) ** 2, -1)
    mean_force = np.zeros_like(r)
    mean_force[..., 2] = gamma_s * hk * I * weight
    diffusion = (hk**2 * gamma_s * I)[..., None, None] * moments
    return mean_force, diffusion


# -- integrator -------------------------------------------------------------------


def _body_axis_rotation(axis: int, theta):
    c, s = np.cos(theta), np.sin(theta)
    out = np.zeros(theta.shape + (3, 3))
    i, j = [(1, 2), (2, 0), (0, 1)][axis]
    out[..., axis, axis] = 1.0
    out[..., i, i] = c
    out[..., j, j] = c
    out[..., i, j] = -s
    out[..., j, i] = s
    return out


_FREE_ROTOR_SEQUENCE = ((0, 0.5), (1, 0.5), (2, 1.0), (1, 0.5), (0, 0.5))


def _free_rotor(R, L, inv_I, h):
    for axis, frac in _FREE_ROTOR_SEQUENCE:
        Lb = np.einsum("bi,bi->b", R[..., :, axis], L)
        R = R @ _body_axis_rotation(axis, Lb * inv_I[axis] * frac * h)
    return R


def _reorthonormalize(R):
    u, _, vt = np.linalg.svd(R)
    return u @ vt


@dataclass
class _Batch:
    r: np.ndarray
    p: np.ndarray
    R: np.ndarray
    L: np.ndarray


def _to_batch(states) -> _Batch:
    r = np.array([s.r for s in states])
    p = np.array([s.p for s in states])
    R = np.array([s.rotation() for s in states])
    L = np.array([s.angular_momentum() for s in states])
    return _Batch(r, p, R, L)


def _batch_states(batch: _Batch, previous_phi) -> tuple[np.ndarray, np.ndarray]:
    phi = kin.euler_from_rotation(batch.R, previous_phi)
    N = np.array([kin.n_matrix(ph) for ph in phi])
    pi = np.einsum("bji,bj->bi", N, batch.L)
    return phi, pi


def _batch_energy(batch: _Batch, system: System):
    inv_I = 1.0 / system.particle.inertia.as_array()
    Lb = np.einsum("bji,bj->bi", batch.R, batch.L)
    kinetic = 0.5 * np.sum(batch.p**2, -1) / system.particle.mass + 0.5 * np.sum(Lb**2 * inv_I, -1)
    return kinetic + _potential_batch(batch.r, batch.R, system)


class _Stepper:
    """Batched splitting integrator; noise is drawn per trajectory in chunks."""

    def __init__(self, system: System, dt: float, rngs, chunk: int = 512):
        if not dt > 0:
            raise ValueError("dt must be positive")
        self.system, self.dt, self.rngs, self.chunk = system, dt, rngs, chunk
        self.M = system.particle.mass
        self.I = system.particle.inertia.as_array()
        self.inv_I = 1.0 / self.I
        g = system.gas.gamma_c
        self.noisy = g > 0 or system.recoil_on
        self.c1 = np.exp(-g * dt)
        self.sig_p = np.sqrt(self.M * system.kT * (1 - self.c1**2))
        self.sig_L = np.sqrt(system.kT * (1 - self.c1**2) * self.I)
        self._noise = None
        self._cursor = chunk
        self._force = None

    def _draw(self):
        if self._cursor >= self.chunk:
            self._noise = np.stack([rng.standard_normal((self.chunk, 9)) for rng in self.rngs], 1)
            self._cursor = 0
        xi = self._noise[self._cursor]
        self._cursor += 1
        return xi

    def _kick(self, b: _Batch, h):
        if self._force is None:
            self._force = _force_torque_batch(b.r, b.R, self.system)
            if self.system.recoil_on:
                mean, _ = _recoil_terms(b.r, b.R, self.system)
                self._force = (self._force[0] + mean, self._force[1])
        f, tau = self._force
        b.p = b.p + h * f
        b.L = b.L + h * tau

    def _drift(self, b: _Batch, h):
        b.r = b.r + h * b.p / self.M
        b.R = _free_rotor(b.R, b.L, self.inv_I, h)

    def step(self, b: _Batch):
        dt = self.dt
        self._kick(b, 0.5 * dt)
        if not self.noisy:
            # deterministic limit: plain Strang splitting (velocity Verlet)
            self._drift(b, dt)
            self._force = None
            self._kick(b, 0.5 * dt)
            return
        self._drift(b, 0.5 * dt)
        xi = self._draw()
        if self.system.gas.gamma_c > 0:
            b.p = self.c1 * b.p + self.sig_p * xi[:, 0:3]
            b.L = self.c1 * b.L + np.einsum("bij,bj->bi", b.R, self.sig_L * xi[:, 3:6])
        if self.system.recoil_on:
            _, D = _recoil_terms(b.r, b.R, self.system)
            b.p = b.p + np.einsum("bij,bj->bi", np.linalg.cholesky(D * dt), xi[:, 6:9])
        self._drift(b, 0.5 * dt)
        self._force = None
        self._kick(b, 0.5 * dt)

    def renormalize(self, b: _Batch):
        b.R = _reorthonormalize(b.R)


def langevin_step(state: ParticleState, system: System, dt: float, rng) -> ParticleState:
    """Advance one state by a single integrator step."""
    batch = _to_batch([state])
    stepper = _Stepper(system, dt, [rng], chunk=1)
    stepper.step(batch)
    _check_finite(batch, 0.0)
    phi, pi = _batch_states(batch, state.phi[None])
    return ParticleState(batch.r[0], batch.p[0], phi[0], pi[0])


@dataclass(frozen=True)
class Trajectory:
    """Decimated samples; ``phi`` and ``pi`` are unwrapped Euler coordinates."""

    t: np.ndarray
    r: np.ndarray
    p: np.ndarray
    phi: np.ndarray
    pi: np.ndarray
    energy: np.ndarray
    L: np.ndarray = field(repr=False)
    R: np.ndarray = field(repr=False)

    def __len__(self):
        return len(self.t)

    def state(self, i: int) -> ParticleState:
        return ParticleState(self.r[i], self.p[i], self.phi[i], self.pi[i])


def _check_finite(b: _Batch, t: float):
    for name in ("r", "p", "R", "L"):
        arr = getattr(b, name)
        if not np.all(np.isfinite(arr)):
            bad = np.unique(np.nonzero(~np.isfinite(arr))[0])
            raise NumericalBlowup(f"non-finite {name} at t={t:.6g} in trajectories {bad.tolist()}")


def _run(states, system, duration, dt, rngs, stride, max_steps, renorm_every=1000):
    n_steps = int(round(duration / dt))
    if n_steps > max_steps:
        raise ValueError(f"{n_steps} steps exceed the limit of {max_steps}")
    stride = max(1, int(stride))
    batch = _to_batch(states)
    stepper = _Stepper(system, dt, rngs)
    n_out = n_steps // stride + 1
    B = len(states)
    out = {k: np.empty((n_out, B, 3)) for k in ("r", "p", "phi", "pi", "L")}
    out_R = np.empty((n_out, B, 3, 3))
    energy = np.empty((n_out, B))
    prev_phi = np.array([s.phi for s in states])

    def record(j):
        nonlocal prev_phi
        phi, pi = _batch_states(batch, prev_phi)
        prev_phi = phi
        out["r"][j], out["p"][j], out["phi"][j], out["pi"][j] = batch.r, batch.p, phi, pi
        out["L"][j], out_R[j] = batch.L, batch.R
        energy[j] = _batch_energy(batch, system)

    record(0)
    for i in range(1, n_steps + 1):
        stepper.step(batch)
        if i % renorm_every == 0:
            stepper.renormalize(batch)
        if i % stride == 0:
            _check_finite(batch, i * dt)
            record(i // stride)
    t = dt * stride * np.arange(n_out)
    return t, out, out_R, energy


def simulate_trajectory(
    initial: ParticleState,
    system: System,
    duration: float,
    dt: float,
    seed: int | np.random.SeedSequence = 0,
    stride: int = 1,
    max_steps: int = DEFAULT_MAX_STEPS,
) -> Trajectory:
    """Integrate one trajectory; bit-reproducible for a given seed.

    ``stride`` must resolve the rotation well enough that angles change by
    less than pi between emitted samples, otherwise unwrapping is ambiguous.
    """
    rng = np.random.default_rng(seed)
    t, out, out_R, energy = _run([initial], system, duration, dt, [rng], stride, max_steps)
    return Trajectory(
        t, out["r"][:, 0], out["p"][:, 0], out["phi"][:, 0], out["pi"][:, 0], energy[:, 0],
        out["L"][:, 0], out_R[:, 0],
    )


@dataclass(frozen=True)
class Ensemble:
    """Samples shaped (time, trajectory, ...)."""

    t: np.ndarray
    r: np.ndarray
    p: np.ndarray
    phi: np.ndarray
    pi: np.ndarray
    energy: np.ndarray
    L: np.ndarray = field(repr=False)
    R: np.ndarray = field(repr=False)

    def trajectory(self, j: int) -> Trajectory:
        return Trajectory(
            self.t, self.r[:, j], self.p[:, j], self.phi[:, j], self.pi[:, j],
            self.energy[:, j], self.L[:, j], self.R[:, j],
        )


def simulate_ensemble(
    initial,
    system: System,
    duration: float,
    dt: float,
    n_trajectories: int | None = None,
    seed: int = 0,
    stride: int = 1,
    threads: int = 1,
    max_steps: int = DEFAULT_MAX_STEPS,
) -> Ensemble:
    """Integrate independent trajectories, vectorized and optionally threaded.

    Trajectory ``j`` draws from the ``j``-th child of ``SeedSequence(seed)``,
    so results do not depend on ``threads``.
    """
    states = [initial] * n_trajectories if isinstance(initial, ParticleState) else list(initial)
    children = np.random.SeedSequence(seed).spawn(len(states))
    rngs = [np.random.default_rng(c) for c in children]
    groups = np.array_split(np.arange(len(states)), max(1, min(threads, len(states))))

    def work(idx):
        return _run([states[i] for i in idx], system, duration, dt, [rngs[i] for i in idx], stride, max_steps)

    if len(groups) == 1:
        results = [work(groups[0])]
    else:
        with ThreadPoolExecutor(len(groups)) as pool:
            results = list(pool.map(work, groups))
    t = results[0][0]
    cat = {k: np.concatenate([res[1][k] for res in results], 1) for k in results[0][1]}
    R = np.concatenate([res[2] for res in results], 1)
    energy = np.concatenate([res[3] for res in results], 1)
    return Ensemble(t, cat["r"], cat["p"], cat["phi"], cat["pi"], energy, cat["L"], R)


def total_energy(state: ParticleState, system: System) -> float:
    kinetic = state.p @ state.p / (2 * system.particle.mass)
    rot = kin.rotational_kinetic_energy(state.phi, state.pi, system.particle.inertia)
    return float(kinetic + rot + potential(state, system))


def thermal_states(
    system: System,
    n: int,
    seed: int = 0,
    phi=(np.pi / 2, np.pi / 2, np.pi / 2),
) -> list[ParticleState]:
    """Momenta from the Boltzmann law; positions from the harmonic approximation."""
    rng = np.random.default_rng(seed)
    kT, M = system.kT, system.particle.mass
    k = trap_stiffness(system, phi)
    R = kin.rotation_from_euler(phi)
    I_lab_sqrt = R @ np.diag(np.sqrt(system.particle.inertia.as_array()))
    out = []
    for _ in range(n):
        r = rng.standard_normal(3) * np.sqrt(kT / k)
        p = rng.standard_normal(3) * np.sqrt(M * kT)
        L = I_lab_sqrt @ rng.standard_normal(3) * np.sqrt(kT)
        out.append(ParticleState.from_angular_momentum(r, p, phi, L))
    return out


def with_gas(system: System, **changes) -> System:
    return replace(system, gas=replace(system.gas, **changes))
