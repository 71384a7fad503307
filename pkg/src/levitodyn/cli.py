"""Command-line front end: ``levitodyn <command> --config <path> --out <dir>``."""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

import numpy as np

from . import analysis, checks, detection, dynamics, io, plotting, sme
from .config import SimConfig, load_config
from .errors import ConfigInvalid, FitDiverged, IoFailure, NumericalBlowup, SegmentTooLong

COMMANDS = ("simulate", "currents", "sme", "psd", "check")
EXIT_OK, EXIT_CHECK_FAILED, EXIT_CONFIG, EXIT_BLOWUP, EXIT_IO = 0, 1, 2, 3, 4
THREADS_ENV = "LEVITODYN_THREADS"


def resolve_threads(cli_value: int | None) -> int:
    """``--threads`` wins, then ``LEVITODYN_THREADS``, then 1."""
    if cli_value is not None:
        value, source = cli_value, "--threads"
    else:
        raw = os.environ.get(THREADS_ENV)
        if raw is None or raw.strip() == "":
            return 1
        source = THREADS_ENV
        try:
            value = int(raw)
        except ValueError:
            raise ConfigInvalid(f"{source}: expected an integer, got {raw!r}") from None
    if value < 1:
        raise ConfigInvalid(f"{source}: must be at least 1, got {value}")
    return value


def _seed_sequence(seed: int, stream: int) -> np.random.SeedSequence:
    return np.random.SeedSequence([seed, stream])


# -- commands --------------------------------------------------------------------------


def cmd_simulate(cfg: SimConfig, out: Path, seed: int | None, threads: int) -> int:
    integ = cfg.require("integrator")
    system = cfg.system()
    seed = integ.seed if seed is None else seed
    n = integ.n_trajectories
    if integ.initial == "thermal":
        states = dynamics.thermal_states(system, n, _seed_sequence(seed, 1), integ.initial_euler_rad)
    else:
        states = [cfg.initial_state()] * n
    ens = dynamics.simulate_ensemble(
        states, system, integ.duration_s, integ.dt_s, seed=seed, stride=integ.stride, threads=threads
    )
    hcfg = detection.HomodyneConfig(
        delta_phi=cfg.detector.lo_phase_rad, det=cfg.detector_geometry(), dt=integ.dt_s * integ.stride
    )
    noise = [np.random.default_rng(c) for c in _seed_sequence(seed, 2).spawn(n)]
    columns = io.TRACE_COLUMNS + (io.ENERGY_COLUMN,)
    for j in range(n):
        traj = ens.trajectory(j)
        J = detection.current_trace(traj.r, traj.R, system.trap, hcfg, noise[j], system.constants)
        stem = "trace" if n == 1 else f"trace_{j:04d}"
        formats = ("csv", "svg") if j == 0 else ("csv",)
        plotting.emit_plotdata(columns, io.trace_table(traj, J), out, stem, "trace", formats)
    drift = np.abs(ens.energy - ens.energy[0]).max() / np.abs(ens.energy[0]).max()
    print(f"simulate: {n} trajectories, {len(ens.t)} samples each, max relative energy change {drift:.3e}")
    return EXIT_OK


def _sweep_states(cfg: SimConfig):
    sweep = cfg.require("currents")
    values = np.linspace(sweep.start, sweep.stop, sweep.points)
    if cfg.integrator is not None:
        r0 = np.array(cfg.integrator.initial_position_m)
        phi0 = np.array(cfg.integrator.initial_euler_rad)
    else:
        r0, phi0 = np.zeros(3), np.array([np.pi / 2, np.pi / 2, np.pi / 2])
    names = ("x", "y", "z", "alpha", "beta", "gamma")
    k = names.index(sweep.variable)
    for v in values:
        r, phi = r0.copy(), phi0.copy()
        if k < 3:
            r[k] = v
        else:
            phi[k - 3] = v
        yield v, dynamics.ParticleState(r, np.zeros(3), phi, np.zeros(3))


def cmd_currents(cfg: SimConfig, out: Path, seed: int | None, threads: int) -> int:
    sweep = cfg.require("currents")
    system = cfg.system()
    hcfg = detection.HomodyneConfig(
        delta_phi=cfg.detector.lo_phase_rad, det=cfg.detector_geometry(), z2_convention=sweep.z2_convention
    )
    rows = []
    for v, state in _sweep_states(cfg):
        parts = detection.current_decomposition(state, system.trap, hcfg, system.constants)
        exact = float(detection.mean_current(state.r, state.rotation(), system.trap, hcfg, system.constants))
        rows.append([v, parts.J0, parts.JT, parts.JR, parts.JRT, parts.total, exact, exact - parts.total])
    columns = (sweep.variable, "J0", "JT", "JR", "JRT", "decomposed", "exact", "residual")
    plotting.emit_plotdata(
        columns, rows, out, "currents", "sweep", x=sweep.variable, series=("J0", "JT", "JR", "JRT", "exact")
    )
    worst = max(abs(r[-1]) for r in rows)
    print(f"currents: {len(rows)} points over {sweep.variable}, max |exact - decomposed| {worst:.3e}")
    return EXIT_OK


def _quantum_model(cfg: SimConfig):
    q = cfg.require("quantum")
    system = cfg.system()
    if q.model == "translational_1d":
        model = sme.build_1d_translational_model(system, q.fock_dim, axis=q.axis)
        rho0 = sme.coherent_state(q.fock_dim, q.initial_coherent_amplitude)
    else:
        model = sme.build_planar_rotor_model(system, q.l_max, axis=q.axis)
        w, v = np.linalg.eigh(model.H)
        rho0 = np.outer(v[:, 0], v[:, 0].conj())
    return q, model, rho0


def cmd_sme(cfg: SimConfig, out: Path, seed: int | None, threads: int) -> int:
    q, model, rho0 = _quantum_model(cfg)
    seed = q.seed if seed is None else seed
    n_steps = int(round(q.duration_s / q.dt_s))
    record_every = min(q.record_every, n_steps)
    names = sorted(model.observables)
    monitored = model.scattering.dissipation_channels() if model.scattering is not None else []
    B = q.n_trajectories

    # unconditional reference on the same time grid
    ref = rho0.copy()
    reference = {k: [] for k in names}
    channels = model.channels()
    for i in range(1, n_steps + 1):
        ref = sme.lindblad_step(ref, model.H, channels, q.dt_s, model.hbar)
        if i % record_every == 0:
            for k in names:
                reference[k].append(sme.expectation(model.observables[k], ref).real)

    columns = ["t"] + [f"{k}_lindblad" for k in names]
    data = [np.arange(1, n_steps // record_every + 1) * q.dt_s * record_every]
    data += [np.array(reference[k]) for k in names]
    if monitored:
        spec = sme.UnravelingSpec.homodyne(len(monitored), eta=cfg.detector.efficiency)
        rec = sme.belavkin_evolve(
            np.broadcast_to(rho0, (B,) + rho0.shape),
            model.H,
            monitored,
            spec,
            q.dt_s,
            n_steps,
            np.random.default_rng(_seed_sequence(seed, 3)),
            unmonitored=model.gas_channels,
            hbar=model.hbar,
            observables=model.observables,
            record_every=record_every,
        )
        columns += [f"{k}_mean" for k in names] + ["purity_0"]
        data += [rec.expectations[k].mean(1) for k in names] + [rec.purity[:, 0]]
        # currents of trajectory 0 averaged over each recording interval
        J = rec.currents[: len(data[0]) * record_every, 0].real
        J = J.reshape(len(data[0]), record_every, -1).mean(1)
        columns += [f"J_{c}" for c in range(J.shape[1])]
        data += list(J.T)
        td = sme.trace_distance(rec.rho.mean(0), ref)
        print(f"sme: {B} trajectories, {len(monitored)} monitored channels, trace distance to Lindblad {td:.3e}")
    else:
        print("sme: model has no monitored channels; wrote the unconditional evolution only")
    quantities = tuple(c for c in columns if c.endswith("_lindblad"))[:3]
    plotting.emit_plotdata(tuple(columns), np.column_stack(data), out, "sme", "trace", quantities=quantities)
    return EXIT_OK


def cmd_psd(cfg: SimConfig, out: Path, seed: int | None, threads: int, config_dir: Path) -> int:
    p = cfg.require("psd")
    source = Path(p.input)
    if not source.is_absolute():
        source = config_dir / source
    columns, data = io.read_table(source)
    ts = analysis.TimeSeries.from_samples(io.column(columns, data, "t"), io.column(columns, data, p.column))
    try:
        f, S = analysis.welch_psd(ts, p.segment_length, p.overlap)
    except SegmentTooLong as exc:
        raise ConfigInvalid(f"psd.segment_length: {exc}") from None
    try:
        fit = analysis.lorentzian_fit(f, S, p.window_hz)
    except FitDiverged as exc:
        fit = None
        print(f"psd: fit diverged: {exc}")
    plotting.emit_plotdata(io.PSD_COLUMNS, np.column_stack([f, S]), out, "psd", "psd", fit=fit)
    if fit is not None:
        io.write_table(
            out / "fit.csv",
            ("center_frequency_hz", "linewidth_hz", "plateau", "amplitude"),
            [[fit.center_frequency, fit.linewidth, fit.plateau, fit.amplitude]],
        )
        print(f"psd: f0 = {fit.center_frequency:.6g} Hz, linewidth = {fit.linewidth:.3g} Hz")
    return EXIT_OK


def cmd_check(cfg: SimConfig, out: Path, seed: int | None, threads: int) -> int:
    results = checks.run_checks(cfg.system(), seed=0 if seed is None else seed)
    for r in results:
        print(r.line())
    return EXIT_OK if all(r.passed for r in results) else EXIT_CHECK_FAILED


# -- entry point -----------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="levitodyn", description=__doc__)
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", required=True, type=Path, help="TOML configuration file")
    parser.add_argument("--out", required=True, type=Path, help="output directory")
    parser.add_argument("--seed", type=int, default=None, help="override the configured seed")
    parser.add_argument("--threads", type=int, default=None, help=f"worker threads (fallback ${THREADS_ENV})")
    return parser


def run(command: str, config_path, out_dir, seed: int | None = None, threads: int | None = None) -> int:
    """Execute one command; returns the process exit status."""
    try:
        threads = resolve_threads(threads)
        if seed is not None and seed < 0:
            raise ConfigInvalid(f"--seed: must be non-negative, got {seed}")
        cfg = load_config(config_path)
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        if command == "psd":
            return cmd_psd(cfg, out, seed, threads, Path(config_path).parent)
        handler = {"simulate": cmd_simulate, "currents": cmd_currents, "sme": cmd_sme, "check": cmd_check}[command]
        return handler(cfg, out, seed, threads)
    except ConfigInvalid as exc:
        print(f"levitodyn: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalBlowup as exc:
        print(f"levitodyn: numerical blow-up: {exc}", file=sys.stderr)
        return EXIT_BLOWUP
    except (IoFailure, OSError) as exc:
        print(f"levitodyn: I/O failure: {exc}", file=sys.stderr)
        return EXIT_IO


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return run(args.command, args.config, args.out, args.seed, args.threads)


if __name__ == "__main__":
    sys.exit(main())
