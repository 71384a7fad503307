import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from levitodyn import optics
from levitodyn.errors import DegeneratePolarization, NotUnitVector

angle = st.floats(-7.0, 7.0, allow_nan=False)
positive = st.floats(0.2, 3.0)

MODE = optics.GaussianMode(w0=1.3, zR=4.1, wavelength=0.9, a1=0.8, a2=1.25)
EX, EY, EZ = np.eye(3)


class TestPolarization:
    def test_linear(self):
        assert np.allclose(optics.elliptical_polarization(1, 0).vector, [1, 0, 0])

    def test_circular(self):
        assert np.allclose(optics.elliptical_polarization(1, 1).vector, np.array([1, 1j, 0]) / np.sqrt(2))

    def test_elliptical_normalization(self):
        assert np.allclose(optics.elliptical_polarization(2, 1).vector, np.array([2, 1j, 0]) / np.sqrt(5))

    def test_degenerate(self):
        with pytest.raises(DegeneratePolarization):
            optics.elliptical_polarization(0, 0)

    @given(st.floats(-5, 5), st.floats(-5, 5))
    def test_unit_norm(self, bx, by):
        if np.hypot(bx, by) < 1e-6:
            return
        assert abs(np.linalg.norm(optics.Polarization(bx, by).vector) - 1) < 1e-12


class TestMode:
    def test_focus_value(self):
        assert optics.mode_value(MODE, (0, 0, 0)) == 1

    def test_rayleigh_plane(self):
        u = optics.mode_value(MODE, (0, 0, MODE.zR))
        assert np.isclose(abs(u) ** 2, 0.5)
        assert np.isclose(u, np.exp(1j * MODE.k * MODE.zR) / np.sqrt(2))

    def test_symmetric_swap(self):
        mode = optics.GaussianMode(1.0, 3.0, 1.0, 1.0, 1.0)
        assert np.isclose(optics.intensity(mode, (0.3, -0.7, 0.4)), optics.intensity(mode, (-0.7, 0.3, 0.4)))

    def test_intensity_matches_mode(self, rng):
        r = rng.normal(size=(50, 3))
        assert np.allclose(optics.intensity(MODE, r), np.abs(optics.mode_value(MODE, r)) ** 2, rtol=1e-13)

    def test_gradient_finite_difference(self, rng):
        r, h = rng.normal(size=3), 1e-6
        fd = [(optics.intensity(MODE, r + h * e) - optics.intensity(MODE, r - h * e)) / (2 * h) for e in np.eye(3)]
        assert np.allclose(optics.intensity_gradient(MODE, r), fd, rtol=1e-7, atol=1e-10)

    def test_rejects_nonpositive_waist(self):
        with pytest.raises(ValueError):
            optics.GaussianMode(0.0, 1.0, 1.0)


class TestIntensityExpansion:
    c = optics.intensity_expansion(MODE, prefactor=2.7)

    def test_quadratic_ratio(self):
        assert np.isclose(self.c[2, 0, 0] / self.c[0, 0, 0], -2 * MODE.a1 / MODE.w0**2, rtol=1e-14)

    def test_quartic_cross_ratio(self):
        assert np.isclose(self.c[2, 2, 0] / self.c[0, 0, 0], 4 * MODE.a1 * MODE.a2 / MODE.w0**4, rtol=1e-14)

    def test_prefactor(self):
        assert self.c[0, 0, 0] == 2.7

    def test_covers_order_four(self):
        assert len(self.c) == 35

    def test_odd_transverse_powers_vanish(self):
        assert all(v == 0 for (k, l, m), v in self.c.items() if k % 2 or l % 2)

    def test_against_finite_differences(self):
        h = 1e-3

        def I(x, y, z):
            return 2.7 * optics.intensity(MODE, (x, y, z))

        # second derivatives and one mixed fourth derivative
        d2 = {
            (2, 0, 0): (I(h, 0, 0) - 2 * I(0, 0, 0) + I(-h, 0, 0)) / h**2 / 2,
            (0, 2, 0): (I(0, h, 0) - 2 * I(0, 0, 0) + I(0, -h, 0)) / h**2 / 2,
            (0, 0, 2): (I(0, 0, h) - 2 * I(0, 0, 0) + I(0, 0, -h)) / h**2 / 2,
        }
        for key, value in d2.items():
            assert np.isclose(self.c[key], value, rtol=1e-5)
        H = 0.05
        mixed = sum(
            sx * sy * I(ax * H, ay * H, 0)
            for ax, sx in ((1, 1), (0, -2), (-1, 1))
            for ay, sy in ((1, 1), (0, -2), (-1, 1))
        ) / H**4 / 4
        assert np.isclose(self.c[2, 2, 0], mixed, rtol=5e-3)


class TestBasis:
    def test_polar_axis(self):
        b = optics.scattering_basis(EZ)
        assert np.allclose(b.e1, EX) and np.allclose(b.e2, EY)

    def test_x_axis_spans_yz(self):
        b = optics.scattering_basis(EX)
        assert abs(b.e1[0]) < 1e-15 and abs(b.e2[0]) < 1e-15

    def test_rejects_non_unit(self):
        with pytest.raises(NotUnitVector):
            optics.scattering_basis((1.0, 1.0, 0.0))

    @given(st.floats(-1, 1), st.floats(0, 2 * np.pi))
    def test_right_handed_orthonormal(self, cz, ph):
        s = np.sqrt(1 - cz**2)
        n = np.array([s * np.cos(ph), s * np.sin(ph), cz])
        n /= np.linalg.norm(n)
        e1, e2 = optics.basis_vectors(n)
        assert np.allclose([e1 @ e1, e2 @ e2, e1 @ e2, e1 @ n, e2 @ n], [1, 1, 0, 0, 0], atol=1e-12)
        assert np.allclose(np.cross(e1, e2), n, atol=1e-12)


class TestCircular:
    def test_linear_x(self):
        assert np.allclose(optics.circular_from_linear(1, 0), (np.sqrt(0.5), np.sqrt(0.5)))

    def test_pure_circular(self):
        assert np.allclose(optics.circular_from_linear(1, 1j), (0, np.sqrt(2)))

    @given(st.complex_numbers(max_magnitude=10), st.complex_numbers(max_magnitude=10))
    def test_unitary_round_trip(self, ax, ay):
        l, r = optics.circular_from_linear(ax, ay)
        assert np.isclose(abs(l) ** 2 + abs(r) ** 2, abs(ax) ** 2 + abs(ay) ** 2, atol=1e-9)
        assert np.allclose(optics.linear_from_circular(l, r), (ax, ay), atol=1e-9)


class TestSusceptibility:
    chi = optics.Susceptibility.from_principal(1.1, 1.3, 1.9)

    def test_identity_orientation(self):
        assert np.allclose(optics.lab_susceptibility((0, 0, 0), self.chi), np.diag([1.1, 1.3, 1.9]))

    def test_isotropic(self, rng):
        iso = optics.Susceptibility(1.7)
        assert np.allclose(optics.lab_susceptibility(rng.normal(size=3), iso), 1.7 * np.eye(3))

    @given(angle, angle, angle)
    def test_symmetric_with_invariant_spectrum(self, a, b, g):
        chi_lab = optics.lab_susceptibility((a, b, g), self.chi)
        assert np.allclose(chi_lab, chi_lab.T, atol=1e-14)
        assert np.allclose(np.linalg.eigvalsh(chi_lab), [1.1, 1.3, 1.9])

    def test_rejects_non_positive(self):
        with pytest.raises(ValueError):
            optics.Susceptibility(1.0, (-1.5, 0.0, 0.0))


class TestGradientCoupling:
    chi = optics.Susceptibility.from_principal(1.1, 1.3, 1.9)

    def test_identity_orientation_linear_x(self):
        assert np.isclose(optics.gradient_coupling((0, 0, 0), self.chi, optics.Polarization(1, 0)), 1.1)
        assert np.isclose(optics.gradient_coupling_trig((0, 0, 0), self.chi, optics.Polarization(1, 0)), 1.1)

    @given(angle, angle, angle, st.floats(-3, 3), st.floats(0.1, 3))
    def test_isotropic_limit(self, a, b, g, bx, by):
        iso = optics.Susceptibility(0.9)
        assert np.isclose(optics.gradient_coupling((a, b, g), iso, optics.Polarization(bx, by)), 0.9)

    @given(angle, angle, angle, st.floats(-3, 3), st.floats(0.1, 3), positive, positive, positive)
    def test_two_evaluation_paths_agree(self, a, b, g, bx, by, c1, c2, c3):
        chi = optics.Susceptibility.from_principal(c1, c2, c3)
        pol = optics.Polarization(bx, by)
        assert abs(optics.gradient_coupling((a, b, g), chi, pol) - optics.gradient_coupling_trig((a, b, g), chi, pol)) < 1e-12
