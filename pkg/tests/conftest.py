import dataclasses

import numpy as np
import pytest

from levitodyn import presets, sme

# kT / hbar omega = 2 with omega = sqrt(4.6); a large laser frequency keeps scattering weak
QUANTUM_TEMPERATURE = 2 * np.sqrt(4.6)
QUANTUM_GAMMA_C = 0.2


def quantum_system(omega_L=6.0e5, gamma_c=QUANTUM_GAMMA_C, temperature=QUANTUM_TEMPERATURE):
    trap = dataclasses.replace(presets.unit_trap(), omega_L=omega_L)
    return presets.unit_system(gamma_c=gamma_c, temperature=temperature, trap=trap)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def unit_system():
    return presets.unit_system()


@pytest.fixture(scope="session")
def quantum_model():
    return sme.build_1d_translational_model(quantum_system(), 20)


def random_density_matrix(rng, d, rank=None):
    rank = d if rank is None else rank
    psi = rng.normal(size=(d, rank)) + 1j * rng.normal(size=(d, rank))
    rho = psi @ psi.conj().T
    return rho / np.trace(rho).real


ACCEPTANCE_LINES: dict[int, str] = {}


@pytest.fixture
def report():
    """Record one summary line per acceptance criterion."""

    def record(number: int, name: str, passed: bool, detail: str) -> None:
        line = f"{'PASS' if passed else 'FAIL'}  [{number:2d}] {name}: {detail}"
        ACCEPTANCE_LINES[number] = line
        print(line)

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for number in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[number])
