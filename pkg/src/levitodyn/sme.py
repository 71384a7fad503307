"""Truncated-Hilbert-space master equations and diffusive unravelings.

All step functions accept a single density matrix ``(d, d)`` or a stack
``(..., d, d)`` of independent trajectories. Hamiltonians are divided by
``hbar`` (default 1, i.e. ``H`` in angular-frequency units); toy-model
builders record the ``hbar`` they used on the returned :class:`QuantumModel`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import DimensionMismatch, InvalidUnraveling
from .kinematics import rotation_from_euler
from .scattering import CapQuadrature, DetectorGeometry, detector_quadrature, full_sphere, scattering_rate

__all__ = [
    "LindbladChannel",
    "UnravelingSpec",
    "UnravelingReport",
    "ScatteringOperators",
    "QuantumModel",
    "dissipator_D",
    "superoperator_H",
    "lindblad_rhs",
    "lindblad_step",
    "validate_unraveling",
    "wiener_increments",
    "expected_currents",
    "noise_from_currents",
    "belavkin_step",
    "homodyne_sme_step",
    "build_1d_translational_model",
    "build_planar_rotor_model",
    "trace_distance",
    "purity",
    "expectation",
    "fock_state",
    "coherent_state",
    "thermal_state",
]


# -- basic superoperators -------------------------------------------------------------


def _dag(A):
    return np.conj(np.swapaxes(A, -1, -2))


def _trace(A):
    return np.trace(A, axis1=-2, axis2=-1)


def _check_pair(K, rho):
    K = np.asarray(K)
    rho = np.asarray(rho)
    if K.ndim != 2 or K.shape[0] != K.shape[1] or rho.shape[-2:] != K.shape:
        raise DimensionMismatch(f"operator {K.shape} incompatible with state {rho.shape}")
    return K, rho


def dissipator_D(K, rho) -> np.ndarray:
    """``K rho K^dag - {K^dag K, rho} / 2``."""
    K, rho = _check_pair(K, rho)
    KdK = _dag(K) @ K
    return K @ rho @ _dag(K) - 0.5 * (KdK @ rho + rho @ KdK)


def superoperator_H(K, rho) -> np.ndarray:
    """``K rho + rho K^dag - tr(K rho + rho K^dag) rho``."""
    K, rho = _check_pair(K, rho)
    X = K @ rho + rho @ _dag(K)
    return X - _trace(X)[..., None, None] * rho


@dataclass(frozen=True)
class LindbladChannel:
    """Jump operator with a non-negative rate; the dissipator is ``rate * D[operator]``."""

    operator: np.ndarray
    rate: float = 1.0

    def __post_init__(self):
        op = np.asarray(self.operator, dtype=complex)
        if op.ndim != 2 or op.shape[0] != op.shape[1]:
            raise DimensionMismatch(f"channel operator must be square, got {op.shape}")
        if self.rate < 0:
            raise ValueError("channel rate must be non-negative")
        object.__setattr__(self, "operator", op)

    @property
    def scaled(self) -> np.ndarray:
        """``sqrt(rate) * operator``."""
        return np.sqrt(self.rate) * self.operator


def _stack(channels: Sequence[LindbladChannel], d: int) -> np.ndarray:
    if not channels:
        return np.zeros((0, d, d), dtype=complex)
    ops = np.stack([ch.scaled for ch in channels])
    if ops.shape[1:] != (d, d):
        raise DimensionMismatch(f"channel dimension {ops.shape[1:]} does not match state dimension {d}")
    return ops


def _check_state(rho, H):
    rho = np.asarray(rho, dtype=complex)
    H = np.asarray(H, dtype=complex)
    if rho.shape[-1] != rho.shape[-2] or H.shape != rho.shape[-2:]:
        raise DimensionMismatch(f"Hamiltonian {H.shape} incompatible with state {rho.shape}")
    return rho, H


def _sandwich(ops, rho, weights=None):
    """``sum_k w_k K_k rho K_k^dag`` for stacked operators (k, d, d)."""
    terms = ops @ rho[..., None, :, :] @ _dag(ops)
    if weights is not None:
        terms = terms * np.asarray(weights)[:, None, None]
    return terms.sum(-3)


def _lindblad_rhs_ops(rho, H, ops, hbar):
    if not len(ops):
        return -1j / hbar * (H @ rho - rho @ H)
    # non-Hermitian generator -i H/hbar - K^dag K / 2
    A = -1j / hbar * H - 0.5 * np.einsum("kji,kjl->il", np.conj(ops), ops)
    return A @ rho + rho @ _dag(A) + _sandwich(ops, rho)


def lindblad_rhs(rho, H, channels: Sequence[LindbladChannel], hbar: float = 1.0) -> np.ndarray:
    rho, H = _check_state(rho, H)
    return _lindblad_rhs_ops(rho, H, _stack(channels, H.shape[0]), hbar)


def _finalize(rho):
    rho = 0.5 * (rho + _dag(rho))
    return rho / np.real(_trace(rho))[..., None, None]


def lindblad_step(rho, H, channels: Sequence[LindbladChannel], dt: float, hbar: float = 1.0) -> np.ndarray:
    """One Heun (explicit trapezoid) step, Hermitized and trace-normalized."""
    rho, H = _check_state(rho, H)
    ops = _stack(channels, H.shape[0])
    k1 = _lindblad_rhs_ops(rho, H, ops, hbar)
    k2 = _lindblad_rhs_ops(rho + dt * k1, H, ops, hbar)
    return _finalize(rho + 0.5 * dt * (k1 + k2))


# -- unravelings ----------------------------------------------------------------------


@dataclass(frozen=True)
class UnravelingSpec:
    """Efficiencies ``eta`` (diagonal) and complex symmetric correlations ``xi``.

    ``E[dW dW^*] = eta dt`` and ``E[dW dW^T] = xi dt``.
    """

    eta: np.ndarray
    xi: np.ndarray

    def __post_init__(self):
        eta = np.asarray(self.eta, dtype=float)
        if eta.ndim == 2:
            if np.any(np.abs(eta - np.diag(np.diag(eta))) > 0):
                raise InvalidUnraveling("eta must be diagonal")
            eta = np.diag(eta).copy()
        xi = np.atleast_2d(np.asarray(self.xi, dtype=complex))
        if xi.shape != (eta.size, eta.size):
            raise DimensionMismatch(f"xi shape {xi.shape} does not match {eta.size} channels")
        object.__setattr__(self, "eta", eta)
        object.__setattr__(self, "xi", xi)

    @classmethod
    def homodyne(cls, n: int, eta: float = 1.0, phase: float = 0.0):
        """Independent real-quadrature detection of ``n`` channels."""
        return cls(np.full(n, eta), eta * np.exp(2j * phase) * np.eye(n))

    @classmethod
    def heterodyne(cls, n: int, eta: float = 1.0):
        return cls(np.full(n, eta), np.zeros((n, n)))

    @property
    def n_channels(self) -> int:
        return self.eta.size

    def block_matrix(self) -> np.ndarray:
        eta = np.diag(self.eta)
        re, im = self.xi.real, self.xi.imag
        return 0.5 * np.block([[eta + re, im], [im, eta - re]])


@dataclass(frozen=True)
class UnravelingReport:
    ok: bool
    min_eigenvalue: float
    message: str = ""

    def __bool__(self):
        return self.ok


def validate_unraveling(spec: UnravelingSpec, tol: float = 1e-10) -> UnravelingReport:
    """Check ``0 <= eta <= 1``, ``xi = xi^T`` and positivity of the block matrix."""
    lam = float(np.linalg.eigvalsh(spec.block_matrix()).min())
    problems = []
    if np.any(spec.eta < -tol) or np.any(spec.eta > 1 + tol):
        problems.append("efficiencies outside [0, 1]")
    if np.max(np.abs(spec.xi - spec.xi.T), initial=0.0) > tol:
        problems.append("xi is not symmetric")
    if lam < -tol:
        problems.append(f"block matrix has negative eigenvalue {lam:.3e}")
    return UnravelingReport(not problems, lam, "; ".join(problems))


def _noise_factor(spec: UnravelingSpec) -> np.ndarray:
    w, v = np.linalg.eigh(spec.block_matrix())
    return v * np.sqrt(np.clip(w, 0.0, None))


def wiener_increments(spec: UnravelingSpec, dt: float, rng: np.random.Generator, size=()) -> np.ndarray:
    """Complex increments with ``E[dW dW^*] = eta dt`` and ``E[dW dW] = xi dt``."""
    n = spec.n_channels
    size = (size,) if np.isscalar(size) else tuple(size)
    z = rng.standard_normal(size + (2 * n,)) @ _noise_factor(spec).T
    return (z[..., :n] + 1j * z[..., n:]) * np.sqrt(dt)


def expected_currents(rho, ops, spec: UnravelingSpec) -> np.ndarray:
    """``tr[(eta_j K_j + sum_k xi_jk K_k^dag) rho]`` for each monitored channel."""
    ev = np.einsum("kij,...ji->...k", ops, rho)
    return spec.eta * ev + np.conj(ev) @ spec.xi.T


def noise_from_currents(J, rho, channels, spec: UnravelingSpec, dt: float) -> np.ndarray:
    """Invert the current relation: ``dW = J dt - <mean> dt``."""
    ops = _stack(channels, np.shape(rho)[-1])
    return np.asarray(J) * dt - expected_currents(rho, ops, spec) * dt


def belavkin_step(
    rho,
    H,
    channels: Sequence[LindbladChannel],
    spec: UnravelingSpec,
    dt: float,
    rng: np.random.Generator | None = None,
    *,
    dW=None,
    unmonitored: Sequence[LindbladChannel] = (),
    hbar: float = 1.0,
    method: str = "kraus",
) -> tuple[np.ndarray, np.ndarray]:
    """One step of the general diffusive (Belavkin) equation.

    ``channels`` are monitored with correlations ``spec``; ``unmonitored``
    channels only dissipate. Returns ``(rho_next, J)`` with complex
    currents ``J`` (shape (..., n)). Supplying ``dW`` instead of ``rng``
    runs the filter on a given noise record (e.g. from
    :func:`noise_from_currents`).

    ``method="kraus"`` sandwiches a completely positive measurement map
    between two half steps of the unobserved dynamics (Hamiltonian,
    ``unmonitored`` and the undetected share of ``channels``). It agrees
    with the Ito equation to first order and keeps pure states pure at unit
    efficiency without unmonitored channels. ``method="euler"`` is the
    literal Euler-Maruyama update.
    """
    report = validate_unraveling(spec)
    if not report:
        raise InvalidUnraveling(report.message)
    rho, H = _check_state(rho, H)
    d = H.shape[0]
    K = _stack(channels, d)
    U = _stack(unmonitored, d)
    if len(K) != spec.n_channels:
        raise DimensionMismatch(f"{len(K)} channels but unraveling describes {spec.n_channels}")
    if dW is None:
        if rng is None:
            raise ValueError("either rng or dW is required")
        dW = wiener_increments(spec, dt, rng, rho.shape[:-2])
    dW = np.asarray(dW, dtype=complex)

    if method == "euler":
        J = expected_currents(rho, K, spec) + dW / dt
        drift = _lindblad_rhs_ops(rho, H, np.concatenate([K, U]), hbar)
        X = np.einsum("...k,kij->...ij", np.conj(dW), K) @ rho
        noise = X + _dag(X)
        noise = noise - _trace(noise)[..., None, None] * rho
        return _finalize(rho + drift * dt + noise), J
    if method != "kraus":
        raise ValueError(f"unknown method {method!r}")

    free = _unobserved_ops(K, U, spec)
    rho = _free_step(rho, H, free, 0.5 * dt, hbar)
    rho, J = _observe(rho, K, spec, dW, dt)
    return _free_step(rho, H, free, 0.5 * dt, hbar), J


@dataclass
class BelavkinRecord:
    """Final conditional states and per-step records.

    ``currents`` has shape (steps, ..., n) and belongs to :attr:`times`;
    ``expectations`` maps each requested observable to real values of shape
    (records, ...) at :attr:`record_times`, as does ``purity``.
    """

    rho: np.ndarray
    currents: np.ndarray
    dt: float
    expectations: dict = field(default_factory=dict)
    purity: np.ndarray | None = None
    record_every: int = 1

    @property
    def times(self) -> np.ndarray:
        return self.dt * np.arange(1, len(self.currents) + 1)

    @property
    def record_times(self) -> np.ndarray:
        n = len(self.currents) // self.record_every
        return self.dt * self.record_every * np.arange(1, n + 1)


def belavkin_evolve(
    rho,
    H,
    channels: Sequence[LindbladChannel],
    spec: UnravelingSpec,
    dt: float,
    n_steps: int,
    rng: np.random.Generator,
    *,
    unmonitored: Sequence[LindbladChannel] = (),
    hbar: float = 1.0,
    observables: dict | None = None,
    record_every: int = 1,
) -> BelavkinRecord:
    """``n_steps`` Kraus steps of :func:`belavkin_step` with the adjacent
    half steps of the unobserved dynamics fused into full steps.

    Expectations of ``observables`` (name to operator) and the purity are
    recorded every ``record_every`` steps at full step boundaries.
    """
    if record_every < 1:
        raise ValueError("record_every must be at least 1")
    report = validate_unraveling(spec)
    if not report:
        raise InvalidUnraveling(report.message)
    rho, H = _check_state(rho, H)
    K = _stack(channels, H.shape[0])
    if len(K) != spec.n_channels:
        raise DimensionMismatch(f"{len(K)} channels but unraveling describes {spec.n_channels}")
    free = _unobserved_ops(K, _stack(unmonitored, H.shape[0]), spec)
    batch = rho.shape[:-2]
    currents = np.empty((n_steps,) + batch + (len(K),), dtype=complex)
    observables = {k: np.asarray(v, dtype=complex) for k, v in (observables or {}).items()}
    n_rec = n_steps // record_every
    values = {k: np.empty((n_rec,) + batch) for k in observables}
    purity_trace = np.empty((n_rec,) + batch)
    half = 0.5 * dt
    rho = _free_step(rho, H, free, half, hbar)
    for i in range(n_steps):
        dW = wiener_increments(spec, dt, rng, batch)
        rho, currents[i] = _observe(rho, K, spec, dW, dt)
        last = i == n_steps - 1
        if (i + 1) % record_every == 0 or last:
            # split the fused step at a recording boundary
            rho = _free_step(rho, H, free, half, hbar)
            j = (i + 1) // record_every - 1
            if (i + 1) % record_every == 0:
                for name, op in observables.items():
                    values[name][j] = np.real(np.einsum("ij,...ji->...", op, rho))
                purity_trace[j] = purity(rho)
            if not last:
                rho = _free_step(rho, H, free, half, hbar)
        else:
            rho = _free_step(rho, H, free, dt, hbar)
    return BelavkinRecord(rho, currents, dt, values, purity_trace, record_every)


def _unobserved_ops(K, U, spec: UnravelingSpec):
    """Unmonitored channels plus the undetected share of monitored ones."""
    weak = np.sqrt(1.0 - spec.eta)[:, None, None] * K
    return np.concatenate([U, weak[spec.eta < 1]])


def _observe(rho, K, spec: UnravelingSpec, dW, dt):
    """Completely positive measurement update with the detected share of ``K``."""
    J = expected_currents(rho, K, spec) + dW / dt
    A0 = -0.5 * np.einsum("k,kji,kjl->il", spec.eta, np.conj(K), K)
    xi_KK = np.einsum("jk,jab,kbc->ac", np.conj(spec.xi), K, K)
    G = np.einsum("...k,kij->...ij", np.conj(J * dt), K)
    M = np.eye(K.shape[-1]) + A0 * dt + G + 0.5 * (G @ G - xi_KK * dt)
    return _finalize(M @ rho @ _dag(M)), J


def _free_step(rho, H, ops, tau, hbar):
    """Heun step of the unobserved dynamics; exactly unitary without dissipation."""
    if len(ops):
        k1 = _lindblad_rhs_ops(rho, H, ops, hbar)
        k2 = _lindblad_rhs_ops(rho + tau * k1, H, ops, hbar)
        return _finalize(rho + 0.5 * tau * (k1 + k2))
    w, v = np.linalg.eigh(H)
    u = (v * np.exp(-1j * tau / hbar * w)) @ _dag(v)
    return _finalize(u @ rho @ _dag(u))



# -- scattering channels ---------------------------------------------------------------


@dataclass(frozen=True)
class ScatteringOperators:
    """Direction-resolved scattering operators ``A_{n,nu} = sum_a c_a(n, nu) B_a``.

    ``coefficients`` maps a :class:`CapQuadrature` to an array (Q, 2, m)
    of expansion coefficients on the operator basis ``basis`` (m, d, d).
    """

    gamma_s: float
    basis: np.ndarray
    coefficients: Callable[[CapQuadrature], np.ndarray] = field(repr=False)
    order: int = 16

    def node_operators(self, det: DetectorGeometry) -> tuple[CapQuadrature, np.ndarray]:
        quad = detector_quadrature(det)
        return quad, np.einsum("qna,aij->qnij", self.coefficients(quad), self.basis)

    def dissipation_channels(self, det: DetectorGeometry | None = None) -> list[LindbladChannel]:
        """``gamma_s sum_nu int dn D[A]`` folded onto the minimal set of channels.

        The integral is a quadratic form in the coefficients; diagonalizing
        its Gram matrix gives at most ``m`` equivalent channels.
        """
        quad = detector_quadrature(det if det is not None else full_sphere(self.order))
        c = self.coefficients(quad)
        gram = np.einsum("q,qna,qnb->ab", quad.weights, c, np.conj(c))
        lam, vec = np.linalg.eigh(gram)
        out = []
        for i in range(len(lam)):
            if lam[i] > 1e-14 * max(lam.max(), 1e-300):
                op = np.einsum("a,aij->ij", vec[:, i], self.basis)
                out.append(LindbladChannel(op, self.gamma_s * lam[i]))
        return out

    def collective(self, det: DetectorGeometry) -> np.ndarray:
        """``sum_nu int_S A dn`` over the detector cap."""
        quad = detector_quadrature(det)
        c = self.coefficients(quad)
        return np.einsum("q,qna,aij->ij", quad.weights, c, self.basis)


def homodyne_sme_step(
    rho,
    H,
    gas_channels: Sequence[LindbladChannel],
    scattering: ScatteringOperators,
    det: DetectorGeometry,
    dt: float,
    rng: np.random.Generator | None = None,
    *,
    dW=None,
    hbar: float = 1.0,
) -> tuple[np.ndarray, np.ndarray]:
    """Euler-Maruyama step of the summed-current homodyne equation.

    ``drho = L rho dt + sqrt(gamma_s) H[A_S] rho dW`` with real ``dW`` of
    variance ``2 Omega eta dt`` and ``A_S = sum_nu int_S A dn``. Returns the
    new state and ``J = eta sqrt(gamma_s) tr[(A_S + A_S^dag) rho] + dW / dt``.
    """
    rho, H = _check_state(rho, H)
    d = H.shape[0]
    ops = _stack(list(gas_channels) + scattering.dissipation_channels(), d)
    A_S = scattering.collective(det)
    sg = np.sqrt(scattering.gamma_s)
    if dW is None:
        if rng is None:
            raise ValueError("either rng or dW is required")
        dW = rng.normal(0.0, 1.0, rho.shape[:-2]) * np.sqrt(2 * det.solid_angle * det.eta * dt)
    dW = np.asarray(dW, dtype=float)
    J = det.eta * sg * np.real(_trace((A_S + _dag(A_S)) @ rho)) + dW / dt
    drift = _lindblad_rhs_ops(rho, H, ops, hbar)
    X = A_S @ rho + rho @ _dag(A_S)
    noise = (X - _trace(X)[..., None, None] * rho) * (sg * dW)[..., None, None]
    return _finalize(rho + drift * dt + noise), J


# -- states and diagnostics ------------------------------------------------------------


def fock_state(d: int, n: int = 0) -> np.ndarray:
    rho = np.zeros((d, d), dtype=complex)
    rho[n, n] = 1.0
    return rho


def coherent_state(d: int, alpha: complex) -> np.ndarray:
    n = np.arange(d)
    from scipy.special import gammaln

    amp = np.exp(-0.5 * abs(alpha) ** 2 + n * np.log(abs(alpha) + 1e-300) - 0.5 * gammaln(n + 1))
    amp = amp * np.exp(1j * n * np.angle(alpha))
    amp /= np.linalg.norm(amp)
    return np.outer(amp, amp.conj())


def thermal_state(d: int, n_mean: float) -> np.ndarray:
    """Truncated geometric distribution with (untruncated) mean ``n_mean``."""
    q = n_mean / (1.0 + n_mean)
    p = q ** np.arange(d)
    return np.diag(p / p.sum()).astype(complex)


def trace_distance(a, b) -> float | np.ndarray:
    return 0.5 * np.sum(np.abs(np.linalg.eigvalsh(np.asarray(a) - np.asarray(b))), -1)


def purity(rho):
    return np.real(np.einsum("...ij,...ji->...", rho, rho))


def expectation(op, rho):
    return np.einsum("ij,...ji->...", op, rho)


# -- toy models ------------------------------------------------------------------------


@dataclass(frozen=True)
class QuantumModel:
    """Hamiltonian, gas channels, optional scattering operators and named observables."""

    H: np.ndarray
    gas_channels: list
    scattering: ScatteringOperators | None
    observables: dict
    frequency: float
    hbar: float

    @property
    def dim(self) -> int:
        return self.H.shape[0]

    def channels(self, include_scattering: bool = True) -> list[LindbladChannel]:
        out = list(self.gas_channels)
        if include_scattering and self.scattering is not None:
            out += self.scattering.dissipation_channels()
        return out

    def lindblad_step(self, rho, dt: float, include_scattering: bool = True):
        return lindblad_step(rho, self.H, self.channels(include_scattering), dt, self.hbar)


def _ladder(d: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, d)), 1).astype(complex)


def build_1d_translational_model(
    system,
    fock_dim: int,
    k: float | None = None,
    axis: int = 0,
    phi=(np.pi / 2, np.pi / 2, np.pi / 2),
    scatter_order: int = 16,
    include_scattering: bool = True,
    include_gas: bool = True,
) -> QuantumModel:
    """Harmonic motion along one lab axis in a Fock basis.

    The frequency follows from the harmonic trap stiffness. Gas collisions
    use the Caldeira-Leggett channel ``sqrt(4 M kT)/hbar (x + i hbar p/(4 M kT))``
    with rate ``gamma_c / 2`` plus ``H_c = (gamma_c / 4) {x, p}``; the pair
    damps momentum at ``gamma_c``. Scattering operators are linearized:
    ``A = (eps_nu . chi_lab eps_d)(1 + i k n_axis x)``.
    """
    from .dynamics import trap_stiffness

    if fock_dim < 2:
        raise ValueError("fock_dim must be at least 2")
    const = system.constants
    hbar, M = const.hbar, system.particle.mass
    stiffness = trap_stiffness(system, phi)[axis]
    omega = np.sqrt(stiffness / M)
    a = _ladder(fock_dim)
    x = np.sqrt(hbar / (2 * M * omega)) * (a + _dag(a))
    p = 1j * np.sqrt(hbar * M * omega / 2) * (_dag(a) - a)
    H = hbar * omega * (_dag(a) @ a)
    gas = []
    if include_gas and system.gas.gamma_c > 0:
        kT = system.kT
        g = 0.5 * system.gas.gamma_c
        L = 1j * np.sqrt(4 * M * kT) / hbar * (x + 1j * hbar / (4 * M * kT) * p)
        gas.append(LindbladChannel(L, g))
        H = H + 0.5 * g * (x @ p + p @ x)
    scattering = None
    if include_scattering:
        trap = system.trap
        kk = trap.mode.k if k is None else k
        F = rotation_from_euler(phi)
        v = F @ trap.chi.matrix() @ F.T @ trap.pol.vector

        def coefficients(quad: CapQuadrature, v=v, kk=kk):
            c = np.einsum("qnj,j->qn", quad.polarizations, v)
            nx = quad.directions[:, axis]
            return np.stack([c, 1j * kk * nx[:, None] * c], -1)

        basis = np.stack([np.eye(fock_dim, dtype=complex), x])
        scattering = ScatteringOperators(scattering_rate(trap, const), basis, coefficients, scatter_order)
    observables = {"x": x, "p": p, "n": _dag(a) @ a, "a": a}
    return QuantumModel(H, gas, scattering, observables, omega, hbar)


def _fourier_matrix(values: np.ndarray, l_max: int) -> np.ndarray:
    """Matrix ``<m|f(theta)|m'> = f_{m - m'}`` from samples on a uniform grid."""
    N = len(values)
    coeff = np.fft.fft(values) / N
    m = np.arange(-l_max, l_max + 1)
    return coeff[(m[:, None] - m[None, :]) % N]


def build_planar_rotor_model(
    system,
    l_max: int,
    axis: int = 2,
    phi=(np.pi / 2, np.pi / 2, np.pi / 2),
    n_grid: int | None = None,
) -> QuantumModel:
    """Rotation by ``theta`` about one body axis, in the basis ``|m>``, ``m = -l..l``.

    ``H = L^2 / (2 I) + U(theta)`` with ``U`` the gradient potential at the
    focus for orientation ``F(phi) exp(theta L_axis)``. Gas channels act on
    the two body axes that move: for each such axis ``a`` and lab component
    ``j``, ``C = a_j + i hbar/(4 kT I) a_j' L`` with rate
    ``4 kT (tr(I)/2 - I_zeta) gamma / hbar^2``. These damp ``L`` at ``2 gamma``
    and relax to the gas temperature, so ``gamma = gamma_c / 2`` is used to
    match the classical damping rate.
    """
    if l_max < 1:
        raise ValueError("l_max must be positive")
    from .dynamics import _body_axis_rotation, _potential_batch

    const = system.constants
    hbar = const.hbar
    inertia = system.particle.inertia.as_array()
    I_axis = inertia[axis]
    N = n_grid or max(64, 8 * (2 * l_max + 1))
    theta = 2 * np.pi * np.arange(N) / N
    R = rotation_from_euler(phi) @ _body_axis_rotation(axis, theta)
    U = _potential_batch(np.zeros((N, 3)), R, system)
    m = np.arange(-l_max, l_max + 1)
    Lz = hbar * np.diag(m).astype(complex)
    V = _fourier_matrix(U, l_max)
    V = 0.5 * (V + _dag(V))
    H = Lz @ Lz / (2 * I_axis) + V

    gas = []
    if system.gas.gamma_c > 0:
        kT = system.kT
        kappa = hbar / (4 * kT * I_axis)
        weights = 0.5 * inertia.sum() - inertia
        c, s = np.cos(theta), np.sin(theta)
        # in-plane lab components of the two moving body axes and their theta derivatives
        moving = {(axis + 1) % 3: ((c, s), (-s, c)), (axis + 2) % 3: ((-s, c), (-c, -s))}
        for zeta, (comps, derivs) in moving.items():
            rate = 4 * kT * weights[zeta] * (0.5 * system.gas.gamma_c) / hbar**2
            for f, fp in zip(comps, derivs):
                op = _fourier_matrix(f, l_max) + 1j * kappa * _fourier_matrix(fp, l_max) @ Lz
                gas.append(LindbladChannel(1j * op, rate))
    obs = {"L": Lz, "cos2": _fourier_matrix(np.cos(2 * theta), l_max), "U": V}
    delta = np.ptp(U)
    freq = np.sqrt(2 * delta / I_axis) if delta > 0 else 0.0
    return QuantumModel(H, gas, None, obs, freq, hbar)
