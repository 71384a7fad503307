"""Fast invariant suite shared by the ``check`` command and the tests."""

from __future__ import annotations

import tempfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import detection, dynamics, io, kinematics, optics, scattering, sme
from .dynamics import System
from .presets import TRAPPED_ORIENTATION, unit_system


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'}  {self.name}: {self.detail}"


def _random_euler(rng, n):
    return np.column_stack(
        [rng.uniform(0, 2 * np.pi, n), rng.uniform(0.1, np.pi - 0.1, n), rng.uniform(0, 2 * np.pi, n)]
    )


def check_rotation_algebra(rng, n: int = 1000, dt: float = 1e-6) -> CheckResult:
    phi = _random_euler(rng, n)
    rate = rng.normal(size=(n, 3))
    F = kinematics.rotation_from_euler(phi)
    ortho = np.abs(np.swapaxes(F, -1, -2) @ F - np.eye(3)).max()
    det = np.abs(np.linalg.det(F) - 1).max()
    Fdot = (kinematics.rotation_from_euler(phi + rate * dt) - kinematics.rotation_from_euler(phi - rate * dt)) / (2 * dt)
    omega = np.einsum("nij,nj->ni", kinematics.n_matrix(phi), rate)
    fd = np.abs(Fdot @ np.swapaxes(F, -1, -2) - kinematics.hat(omega)).max()
    ok = ortho < 1e-12 and det < 1e-12 and fd < 1e-6
    return CheckResult("rotation algebra", ok, f"orthogonality {ortho:.1e}, det {det:.1e}, rate map {fd:.1e}")


def check_gradient_coupling(rng, n: int = 10_000) -> CheckResult:
    worst = 0.0
    for phi in _random_euler(rng, n).reshape(100, -1, 3):
        chi = optics.Susceptibility.from_principal(*rng.uniform(0.5, 2.0, 3))
        bx, by = rng.normal(size=2)
        pol = optics.Polarization(bx, by)
        a = optics.gradient_coupling(phi, chi, pol)
        b = optics.gradient_coupling_trig(phi, chi, pol)
        worst = max(worst, float(np.abs(a - b).max()))
    return CheckResult("gradient coupling", worst < 1e-12, f"max |trig - contraction| {worst:.1e}")


def check_polarization_quadrature(rng, n: int = 1000) -> CheckResult:
    n_vec = rng.normal(size=(n, 3))
    n_vec /= np.linalg.norm(n_vec, axis=1, keepdims=True)
    e1, e2 = optics.basis_vectors(n_vec)
    proj = np.einsum("ni,nj->nij", e1, e1) + np.einsum("ni,nj->nij", e2, e2)
    complete = np.abs(proj + np.einsum("ni,nj->nij", n_vec, n_vec) - np.eye(3)).max()
    v = rng.normal(size=3) + 1j * rng.normal(size=3)
    v /= np.linalg.norm(v)
    total = scattering.integrate_over_detector(lambda d, e: np.abs(e @ v) ** 2, scattering.full_sphere(32))
    dipole = abs(total - 8 * np.pi / 3)
    ok = complete < 1e-12 and dipole < 1e-10
    return CheckResult("polarization completeness", ok, f"completeness {complete:.1e}, dipole integral {dipole:.1e}")


def check_stiffness(system: System) -> CheckResult:
    analytic = dynamics.trap_stiffness(system)
    numeric = np.array([dynamics.second_difference_stiffness(system, i) for i in range(3)])
    rel = float(np.abs(numeric / analytic - 1).max())
    return CheckResult("trap stiffness", rel < 1e-5, f"second difference vs analytic {rel:.1e}")


def _shortest_period(system: System) -> float:
    k = dynamics.trap_stiffness(system)
    omega = np.sqrt(k.max() / system.particle.mass)
    depth = system.depth_scale * system.trap.chi.chi0 * np.abs(np.diff(system.trap.chi.delta_chi)).max()
    if depth > 0:
        omega = max(omega, np.sqrt(2 * depth / system.particle.inertia.as_array().min()))
    return 2 * np.pi / omega


def check_energy_conservation(system: System, steps: int = 20_000) -> CheckResult:
    conservative = dynamics.with_gas(system, gamma_c=0.0)
    conservative = System(conservative.particle, conservative.trap, conservative.gas, conservative.constants, False)
    dt = 1e-3 * _shortest_period(conservative)
    r0 = 0.05 * conservative.trap.mode.w0 * np.array([1.0, 0.6, 0.3])
    pi0 = 0.05 * np.sqrt(conservative.particle.inertia.as_array() * conservative.depth_scale * conservative.trap.chi.chi0)
    state = dynamics.ParticleState(r0, np.zeros(3), (np.pi / 2, np.pi / 2 + 0.05, np.pi / 2), pi0)
    traj = dynamics.simulate_trajectory(state, conservative, steps * dt, dt, stride=steps // 100)
    drift = float(np.abs(traj.energy - traj.energy[0]).max() / abs(traj.energy[0]))
    return CheckResult("energy conservation", drift < 1e-6, f"relative drift {drift:.1e} over {steps} steps")


def check_current_limits(system: System, rng) -> CheckResult:
    iso = optics.TrapParams(
        system.trap.power, system.trap.sigma_L, system.trap.volume, system.trap.mode,
        system.trap.pol, optics.Susceptibility(system.trap.chi.chi0), system.trap.omega_L,
    )
    cfg = detection.HomodyneConfig(det=scattering.DetectorGeometry((0.0, 0.0, 1.0), 1.0, 1.0, 16))
    r = 0.01 * system.trap.mode.wavelength * rng.normal(size=3)
    state = dynamics.ParticleState(r, np.zeros(3), _random_euler(rng, 1)[0], np.zeros(3))
    parts = detection.current_decomposition(state, iso, cfg, system.constants)
    scale = abs(detection.signal_unit(iso, cfg, system.constants))
    rot = max(abs(parts.JR), abs(parts.JRT)) / scale
    return CheckResult("isotropic current limit", rot < 1e-12, f"|JR|, |JRT| relative {rot:.1e}")


def check_noise_contract(system: System, rng, n: int = 10_000) -> CheckResult:
    det = scattering.DetectorGeometry((0.0, 0.0, 1.0), 1.0, 0.6, 8)
    cfg = detection.HomodyneConfig(det=det, dt=1e-3)
    r = np.zeros((n, 3))
    R = np.broadcast_to(kinematics.rotation_from_euler(TRAPPED_ORIENTATION), (n, 3, 3))
    J = detection.current_trace(r, R, system.trap, cfg, rng, system.constants)
    var = float(np.var(J * cfg.dt)) / cfg.noise_variance - 1
    silent = detection.HomodyneConfig(det=scattering.DetectorGeometry((0.0, 0.0, 1.0), 1.0, 0.0, 8), dt=1e-3)
    zero = np.abs(detection.current_trace(r[:10], R[:10], system.trap, silent, rng, system.constants)).max()
    ok = abs(var) < 0.05 and zero == 0
    return CheckResult("homodyne noise", ok, f"variance ratio - 1 = {var:+.3f}, eta=0 max |J| = {zero}")


def check_quantum_superoperators(rng, d: int = 6, trials: int = 200) -> CheckResult:
    worst_trace = worst_herm = 0.0
    min_eig = 1.0
    for _ in range(trials):
        K = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        H = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        H = H + H.conj().T
        psi = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        rho = psi @ psi.conj().T
        rho /= np.trace(rho).real
        worst_trace = max(worst_trace, abs(np.trace(sme.dissipator_D(K, rho))), abs(np.trace(sme.superoperator_H(K, rho))))
        out = sme.lindblad_step(rho, H, [sme.LindbladChannel(K, 0.3)], 1e-3)
        worst_herm = max(worst_herm, float(np.abs(out - out.conj().T).max()), abs(np.trace(out) - 1))
        min_eig = min(min_eig, float(np.linalg.eigvalsh(out).min()))
    ok = worst_trace < 1e-10 and worst_herm < 1e-10 and min_eig > -1e-8
    return CheckResult("lindblad invariants", ok, f"trace {worst_trace:.1e}, hermiticity {worst_herm:.1e}, min eigenvalue {min_eig:.1e}")


def check_unraveling_validator() -> CheckResult:
    eye = np.eye(2)
    cases = [
        (sme.UnravelingSpec(eye, np.zeros((2, 2))), True),
        (sme.UnravelingSpec(eye, eye), True),
        (sme.UnravelingSpec(0.5 * eye, eye), False),
    ]
    got = [bool(sme.validate_unraveling(spec)) for spec, _ in cases]
    ok = got == [want for _, want in cases]
    return CheckResult("unraveling validator", ok, f"accepts {got}")


def check_csv_roundtrip(rng) -> CheckResult:
    data = rng.normal(size=(50, 3)) * 10.0 ** rng.integers(-30, 30, size=(50, 3))
    with tempfile.TemporaryDirectory() as tmp:
        path = io.write_table(Path(tmp) / "roundtrip.csv", ("a", "b", "c"), data)
        cols, back = io.read_table(path)
    ok = cols == ("a", "b", "c") and np.array_equal(back, data)
    return CheckResult("csv round trip", ok, "bit-exact" if ok else "mismatch")


def run_checks(system: System | None = None, seed: int = 0) -> list[CheckResult]:
    """Run every invariant; ``system`` defaults to the nondimensional preset."""
    system = unit_system() if system is None else system
    rng = np.random.default_rng(seed)
    return [
        check_rotation_algebra(rng),
        check_gradient_coupling(rng),
        check_polarization_quadrature(rng),
        check_stiffness(system),
        check_energy_conservation(system),
        check_current_limits(system, rng),
        check_noise_contract(system, rng),
        check_quantum_superoperators(rng),
        check_unraveling_validator(),
        check_csv_roundtrip(rng),
    ]
