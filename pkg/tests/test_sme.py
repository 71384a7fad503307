import dataclasses

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from levitodyn import dynamics, presets, sme
from levitodyn.errors import DimensionMismatch, InvalidUnraveling
from levitodyn.kinematics import rotation_from_euler
from levitodyn.presets import TRAPPED_ORIENTATION

from conftest import quantum_system, random_density_matrix

SIGMA_MINUS = np.array([[0, 1], [0, 0]], dtype=complex)
GROUND = np.diag([1, 0]).astype(complex)
EXCITED = np.diag([0, 1]).astype(complex)


def random_matrix(rng, d):
    return rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))


def random_hermitian(rng, d):
    A = random_matrix(rng, d)
    return A + A.conj().T


class TestSuperoperators:
    def test_dissipator_of_identity(self, rng):
        assert np.abs(sme.dissipator_D(np.eye(3), random_density_matrix(rng, 3))).max() < 1e-15

    def test_dissipator_two_level_decay(self):
        assert np.allclose(sme.dissipator_D(SIGMA_MINUS, EXCITED), GROUND - EXCITED)

    def test_measurement_of_scalar(self, rng):
        assert np.abs(sme.superoperator_H((0.3 - 1.2j) * np.eye(3), random_density_matrix(rng, 3))).max() < 1e-15

    def test_measurement_maximally_mixed(self, rng):
        K = random_hermitian(rng, 2)
        rho = np.eye(2) / 2
        expected = K @ rho + rho @ K - 2 * np.trace(K @ rho) * rho
        assert np.allclose(sme.superoperator_H(K, rho), expected)

    @settings(max_examples=50)
    @given(st.integers(0, 2**32 - 1), st.integers(2, 6))
    def test_traceless(self, seed, d):
        rng = np.random.default_rng(seed)
        K, rho = random_matrix(rng, d), random_density_matrix(rng, d)
        assert abs(np.trace(sme.dissipator_D(K, rho))) < 1e-10
        assert abs(np.trace(sme.superoperator_H(K, rho))) < 1e-10

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            sme.dissipator_D(np.eye(3), np.eye(2))


class TestLindbladStep:
    def test_closed_diagonal_keeps_populations(self, rng):
        rho = random_density_matrix(rng, 4)
        H = np.diag([0.0, 1.0, 2.5, 4.0])
        out = rho
        for _ in range(100):
            out = sme.lindblad_step(out, H, [], 0.05)
        assert np.allclose(np.diag(out), np.diag(rho), atol=1e-12)

    def test_damped_two_level(self):
        gamma, dt = 1.0, 1e-3
        rho = EXCITED.copy()
        channel = [sme.LindbladChannel(SIGMA_MINUS, gamma)]
        for step in range(1, 3001):
            rho = sme.lindblad_step(rho, np.zeros((2, 2)), channel, dt)
            if step % 500 == 0:
                assert abs(rho[1, 1].real / np.exp(-gamma * step * dt) - 1) < 0.01

    def test_linearity(self, rng):
        d = 4
        H, K = random_hermitian(rng, d), random_matrix(rng, d)
        ch = [sme.LindbladChannel(K, 0.4)]
        r1, r2 = random_density_matrix(rng, d), random_density_matrix(rng, d)
        mixed = sme.lindblad_step(0.5 * (r1 + r2), H, ch, 1e-3)
        assert np.allclose(mixed, 0.5 * (sme.lindblad_step(r1, H, ch, 1e-3) + sme.lindblad_step(r2, H, ch, 1e-3)), atol=1e-13)

    def test_invariants_over_random_steps(self, rng):
        d = 4
        worst_trace = worst_herm = 0.0
        min_eig = 1.0
        for _ in range(100):
            H, K = random_hermitian(rng, d), random_matrix(rng, d)
            ch = [sme.LindbladChannel(K, rng.uniform(0.05, 0.5))]
            rho = random_density_matrix(rng, d)
            for _ in range(100):
                rho = sme.lindblad_step(rho, H, ch, 1e-3)
            worst_trace = max(worst_trace, abs(np.trace(rho) - 1))
            worst_herm = max(worst_herm, np.abs(rho - rho.conj().T).max())
            min_eig = min(min_eig, np.linalg.eigvalsh(rho).min())
        assert worst_trace < 1e-12 and worst_herm < 1e-12 and min_eig > -1e-8

    def test_batched_matches_single(self, rng):
        d = 3
        H, K = random_hermitian(rng, d), random_matrix(rng, d)
        ch = [sme.LindbladChannel(K, 0.3)]
        stack = np.stack([random_density_matrix(rng, d) for _ in range(4)])
        batched = sme.lindblad_step(stack, H, ch, 1e-2)
        for i in range(4):
            assert np.allclose(batched[i], sme.lindblad_step(stack[i], H, ch, 1e-2), atol=1e-15)

    def test_negative_rate_rejected(self):
        with pytest.raises(ValueError):
            sme.LindbladChannel(SIGMA_MINUS, -1.0)


def steady_occupation(model, dt=0.01, duration=60.0):
    rho = sme.fock_state(model.dim, 0)
    for _ in range(int(duration / dt)):
        rho = model.lindblad_step(rho, dt)
    return sme.expectation(model.observables["n"], rho).real


class TestCaldeiraLeggett:
    """Mean energy in units of the level spacing, n + 1/2, relaxes to kT / (hbar omega)."""

    def test_twenty_levels(self):
        ratio = 3.0
        system = quantum_system(temperature=ratio * np.sqrt(4.6))
        model = sme.build_1d_translational_model(system, 20, include_scattering=False)
        assert abs((steady_occupation(model) + 0.5) / ratio - 1) < 0.05

    @pytest.mark.parametrize("ratio", [2.0, 3.5, 5.0])
    def test_thirty_levels(self, ratio):
        system = quantum_system(temperature=ratio * np.sqrt(4.6))
        model = sme.build_1d_translational_model(system, 30, include_scattering=False)
        assert abs((steady_occupation(model) + 0.5) / ratio - 1) < 0.10

    def test_momentum_damping_rate(self):
        # a displaced state returns with amplitude envelope exp(-gamma_c t / 2)
        system = quantum_system()
        model = sme.build_1d_translational_model(system, 20, include_scattering=False)
        rho, dt = sme.coherent_state(20, 2.0), 0.01
        x = model.observables["x"]
        period = 2 * np.pi / model.frequency
        steps = int(round(4 * period / dt))
        amps = []
        for _ in range(2):
            samples = []
            for _ in range(steps):
                rho = model.lindblad_step(rho, dt)
                samples.append(sme.expectation(x, rho).real)
            amps.append(np.abs(samples).max())
        decay = np.log(amps[0] / amps[1]) / (steps * dt)
        assert abs(decay / (system.gas.gamma_c / 2) - 1) < 0.05


class TestUnravelingSpec:
    def test_documented_cases(self):
        eye = np.eye(2)
        assert sme.validate_unraveling(sme.UnravelingSpec(eye, np.zeros((2, 2))))
        report = sme.validate_unraveling(sme.UnravelingSpec(eye, eye))
        assert report and abs(report.min_eigenvalue) < 1e-12
        assert not sme.validate_unraveling(sme.UnravelingSpec(0.5 * eye, eye))

    def test_constructors_valid(self):
        assert sme.validate_unraveling(sme.UnravelingSpec.homodyne(3, 0.7, 0.4))
        assert sme.validate_unraveling(sme.UnravelingSpec.heterodyne(3, 0.7))

    def test_efficiency_above_one_rejected(self):
        assert not sme.validate_unraveling(sme.UnravelingSpec(np.array([1.5]), np.zeros((1, 1))))

    def test_asymmetric_xi_rejected(self):
        xi = np.array([[0.0, 0.2], [0.0, 0.0]])
        assert not sme.validate_unraveling(sme.UnravelingSpec(np.ones(2), xi))

    def test_shape_mismatch(self):
        with pytest.raises(DimensionMismatch):
            sme.UnravelingSpec(np.ones(2), np.zeros((3, 3)))

    def test_off_diagonal_efficiency(self):
        with pytest.raises(InvalidUnraveling):
            sme.UnravelingSpec(np.ones((2, 2)), np.zeros((2, 2)))

    def test_wiener_correlations(self, rng):
        spec = sme.UnravelingSpec(np.array([0.8, 0.5]), np.array([[0.3 + 0.4j, 0.1], [0.1, -0.2j]]))
        dt = 0.01
        dW = sme.wiener_increments(spec, dt, rng, size=200_000)
        assert np.allclose(np.mean(np.abs(dW) ** 2, 0) / dt, spec.eta, atol=0.01)
        assert np.allclose(np.einsum("ni,nj->ij", dW, dW) / len(dW) / dt, spec.xi, atol=0.01)
        assert abs(np.mean(dW[:, 0] * dW[:, 1].conj())) / dt < 0.01


def two_level_problem(rng):
    H = 0.5 * np.array([[1, 0], [0, -1]], dtype=complex) + 0.3 * np.array([[0, 1], [1, 0]])
    channels = [sme.LindbladChannel(SIGMA_MINUS, 0.5)]
    psi = np.array([0.6, 0.8j])
    return H, channels, np.outer(psi, psi.conj())


class TestBelavkinStep:
    def test_no_information_is_lindblad_euler(self, rng):
        H, ch, rho = two_level_problem(rng)
        spec = sme.UnravelingSpec.homodyne(1, eta=0.0)
        out, J = sme.belavkin_step(rho, H, ch, spec, 1e-3, rng, method="euler")
        expected = rho + sme.lindblad_rhs(rho, H, ch) * 1e-3
        assert np.allclose(out, expected / np.trace(expected), atol=1e-14)

    def test_no_information_is_lindblad_kraus(self, rng):
        H, ch, rho = two_level_problem(rng)
        spec = sme.UnravelingSpec.homodyne(1, eta=0.0)
        a = b = rho
        for _ in range(1000):
            a, J = sme.belavkin_step(a, H, ch, spec, 1e-3, rng)
            b = sme.lindblad_step(b, H, ch, 1e-3)
        assert sme.trace_distance(a, b) < 1e-6

    def test_no_information_currents_are_noise(self, rng):
        H, ch, rho = two_level_problem(rng)
        spec = sme.UnravelingSpec.homodyne(1, eta=0.0)
        _, J = sme.belavkin_step(np.broadcast_to(rho, (5000, 2, 2)), H, ch, spec, 1e-3, rng)
        assert np.all(J == 0)

    def test_pure_state_stays_pure(self, rng):
        H, ch, rho = two_level_problem(rng)
        spec = sme.UnravelingSpec.homodyne(1, eta=1.0)
        for _ in range(2000):
            rho, _ = sme.belavkin_step(rho, H, ch, spec, 1e-3, rng)
            assert abs(sme.purity(rho) - 1) < 1e-6

    def test_given_increments_are_deterministic(self, rng):
        H, ch, rho = two_level_problem(rng)
        spec = sme.UnravelingSpec.homodyne(1, eta=0.6)
        dW = np.array([0.02])
        a = sme.belavkin_step(rho, H, ch, spec, 1e-3, dW=dW)
        b = sme.belavkin_step(rho, H, ch, spec, 1e-3, dW=dW)
        assert np.array_equal(a[0], b[0]) and np.array_equal(a[1], b[1])

    def test_currents_invert_to_noise(self, rng):
        H, ch, rho = two_level_problem(rng)
        spec = sme.UnravelingSpec.homodyne(1, eta=0.7, phase=0.3)
        dW = sme.wiener_increments(spec, 1e-3, rng)
        _, J = sme.belavkin_step(rho, H, ch, spec, 1e-3, dW=dW, method="euler")
        assert np.allclose(sme.noise_from_currents(J, rho, ch, spec, 1e-3), dW, atol=1e-15)

    def test_invalid_spec_rejected(self, rng):
        H, ch, rho = two_level_problem(rng)
        with pytest.raises(InvalidUnraveling):
            sme.belavkin_step(rho, H, ch, sme.UnravelingSpec(np.array([0.5]), np.array([[1.0]])), 1e-3, rng)


class TestBelavkinEvolve:
    def test_records_and_reproducibility(self, quantum_model):
        channels = quantum_model.scattering.dissipation_channels()
        spec = sme.UnravelingSpec.homodyne(len(channels), 0.8)
        rho0 = np.broadcast_to(sme.coherent_state(20, 1.0), (3, 20, 20))
        args = (rho0, quantum_model.H, channels, spec, 0.02, 50)
        kw = dict(unmonitored=quantum_model.gas_channels, observables=quantum_model.observables, record_every=10)
        a = sme.belavkin_evolve(*args, np.random.default_rng(1), **kw)
        b = sme.belavkin_evolve(*args, np.random.default_rng(1), **kw)
        assert np.array_equal(a.rho, b.rho) and np.array_equal(a.currents, b.currents)
        assert a.expectations["x"].shape == (5, 3) and a.purity.shape == (5, 3)
        assert np.allclose(a.record_times, [0.2, 0.4, 0.6, 0.8, 1.0])
        assert a.currents.shape == (50, 3, len(channels))
        assert np.allclose(np.trace(a.rho, axis1=-2, axis2=-1), 1, atol=1e-12)

    def test_efficient_unraveling_keeps_purity(self):
        system = quantum_system(omega_L=2000.0)
        model = sme.build_1d_translational_model(system, 20, include_gas=False)
        channels = model.scattering.dissipation_channels()
        spec = sme.UnravelingSpec.homodyne(len(channels), 1.0)
        rec = sme.belavkin_evolve(
            np.broadcast_to(sme.coherent_state(20, 1.0), (4, 20, 20)), model.H, channels, spec, 0.01, 200,
            np.random.default_rng(2), record_every=1,
        )
        assert np.abs(np.diff(rec.purity, axis=0)).max() < 1e-6
        assert np.abs(rec.purity - 1).max() < 1e-6


class TestHomodyneSummedCurrent:
    def test_zero_efficiency(self, quantum_model, rng):
        det = presets_detector(eta=0.0)
        rho = sme.coherent_state(20, 1.0)
        out, J = sme.homodyne_sme_step(rho, quantum_model.H, quantum_model.gas_channels, quantum_model.scattering, det, 0.01, rng)
        assert J == 0
        euler = rho + 0.01 * sme.lindblad_rhs(rho, quantum_model.H, quantum_model.channels())
        assert np.allclose(out, euler / np.trace(euler), atol=1e-14)


def presets_detector(eta):
    from levitodyn.scattering import DetectorGeometry

    return DetectorGeometry((0.0, 1.0, 0.0), 1.0, eta, 16)


class TestTranslationalModel:
    def test_scattering_heats_ground_state_linearly_in_rate(self):
        slopes, rates = [], []
        for omega_L in (2000.0, 4000.0):
            model = sme.build_1d_translational_model(quantum_system(omega_L=omega_L), 20, include_gas=False)
            drift = sme.lindblad_rhs(sme.fock_state(20, 0), model.H, model.channels())
            slopes.append(sme.expectation(model.observables["n"], drift).real)
            rates.append(model.scattering.gamma_s)
        assert slopes[0] > 0 and slopes[1] > 0
        assert np.isclose(slopes[0] / slopes[1], rates[0] / rates[1], rtol=1e-12)

    def test_constant_channel_term_is_inert(self, rng):
        rho = random_density_matrix(rng, 5)
        assert np.abs(sme.dissipator_D((0.7 + 0.2j) * np.eye(5), rho)).max() < 1e-15

    def test_frequency_from_stiffness(self, quantum_model):
        system = quantum_system()
        assert np.isclose(quantum_model.frequency, np.sqrt(dynamics.trap_stiffness(system)[0] / system.particle.mass))

    def test_scattering_channels_reproduce_quadrature(self, quantum_model, rng):
        # folded channels equal the direct node sum of dissipators
        from levitodyn.scattering import full_sphere

        rho = random_density_matrix(rng, 20)
        quad, ops = quantum_model.scattering.node_operators(full_sphere(16))
        direct = quantum_model.scattering.gamma_s * sum(
            quad.weights[q] * sme.dissipator_D(ops[q, nu], rho) for q in range(quad.size) for nu in range(2)
        )
        folded = sum(c.rate * sme.dissipator_D(c.operator, rho) for c in quantum_model.scattering.dissipation_channels())
        assert np.allclose(folded, direct, atol=1e-12 * np.abs(direct).max())


def librational_frequency(system, inertia, axis=2):
    theta = np.array([-1e-3, 0.0, 1e-3])
    R = rotation_from_euler(TRAPPED_ORIENTATION) @ dynamics._body_axis_rotation(axis, theta)
    U = dynamics._potential_batch(np.zeros((3, 3)), R, system)
    return np.sqrt((U[0] - 2 * U[1] + U[2]) / 1e-6 / inertia)


class TestPlanarRotor:
    def test_free_spectrum(self):
        system = presets.unit_system(trap=presets.unit_trap(delta_chi=(0, 0, 0)))
        model = sme.build_planar_rotor_model(system, 6)
        E = np.linalg.eigvalsh(model.H)
        m = np.arange(-6, 7)
        assert np.allclose(E - E[0], np.sort(m**2 / (2 * 0.3)), atol=1e-12)

    def test_parity_sectors_uncoupled(self, unit_system):
        model = sme.build_planar_rotor_model(unit_system, 8)
        m = np.arange(-8, 9)
        odd = (m[:, None] - m[None, :]) % 2 == 1
        assert np.abs(model.H[odd]).max() < 1e-12 * np.abs(model.H).max()

    def test_deep_trap_libration(self):
        system = presets.unit_system(trap=presets.unit_trap(power=16000.0))
        model = sme.build_planar_rotor_model(system, 40)
        E = np.linalg.eigvalsh(model.H)
        # deep wells pair the levels into tunnelling doublets
        assert abs(E[1] - E[0]) < 1e-6 * (E[2] - E[0])
        assert abs((E[2] - E[0]) / librational_frequency(system, 0.3) - 1) < 0.02

    def test_free_rotor_thermalizes(self):
        kT = 4.0
        system = presets.unit_system(
            gamma_c=0.5, temperature=kT, inertia=(2.5, 2.5, 3.0), trap=presets.unit_trap(delta_chi=(0, 0, 0))
        )
        model = sme.build_planar_rotor_model(system, 16)
        rho = sme.fock_state(model.dim, 16)
        for _ in range(4000):
            rho = model.lindblad_step(rho, 0.005)
        m = np.arange(-16, 17)
        E = m**2 / (2 * 3.0)
        boltzmann = np.sum(E * np.exp(-E / kT)) / np.sum(np.exp(-E / kT))
        energy = sme.expectation(model.observables["L"] @ model.observables["L"], rho).real / (2 * 3.0)
        assert abs(energy / boltzmann - 1) < 0.1
