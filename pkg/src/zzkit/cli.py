"""Command-line interface.

Subcommands: zz-sweep, blockade, flux-spectroscopy, optimize, foster-fit,
ramsey.  Every command reads a JSON config (--config), writes CSV/JSON data
for external plotting (--out) and is deterministic given its config and seed;
sweep points are evaluated in parallel when --threads > 1 but results are
always written in grid order, so reruns are byte identical.

Exit codes: 0 success, 2 config error, 3 no feasible optimizer result,
4 numeric failure.
"""

import argparse
import json
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import io as zio
from .circuit import Coupling, transmon_spectrum
from .dynamics import (
    DissipationSpec,
    TwoQubitSystem,
    make_blockade_protocol,
    pi_pulse,
    pulse_spectral_power,
    run_blockade_protocol,
    run_conditional_ramsey,
)
from .errors import (
    AmbiguousLabelError,
    ConfigError,
    DomainError,
    NoFeasibleCandidateError,
    PoleError,
    ZZKitError,
)
from .fixtures import load_fixture
from .optimize import (
    Candidate,
    ConstraintSet,
    DEParams,
    OptimizationProblem,
    evaluate_candidate,
    optimize,
)
from .spectrum import (
    avoided_crossing_j,
    build_hamiltonian,
    diagonalize_and_label,
    kerr_at_flux,
    pauli_decomposition,
    zeta_exact,
    zeta_perturbative,
    zeta_resonant,
    zeta_series_high_detuning,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NO_FEASIBLE = 3
EXIT_NUMERIC = 4


def _load_config(path):
    if path is None:
        raise ConfigError("--config is required for this command")
    try:
        with open(path) as fh:
            return json.load(fh)
    except FileNotFoundError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from exc


def _grid(cfg, key, context):
    spec = cfg.get(key)
    if spec is None:
        raise ConfigError(f"{context}: missing grid {key!r}")
    if isinstance(spec, list):
        grid = np.asarray(spec, dtype=float)
    else:
        zio._check_keys(spec, ["start", "stop", "num"], f"{context}:{key}")
        grid = np.linspace(spec["start"], spec["stop"], int(spec["num"]))
    if grid.size < 2 or np.any(np.diff(grid) <= 0):
        raise ConfigError(f"{context}: {key} must be monotone with >= 2 points")
    return grid


def _parallel_map(fn, items, threads):
    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(fn, items))
    return [fn(x) for x in items]


# ---------------------------------------------------------------- zz-sweep

def _sweep_system(cfg, context):
    """Resolve (omega1, alpha1, alpha2, coupling) from fixture, circuit file or inline keys."""
    if "fixture" in cfg:
        fx = load_fixture(cfg["fixture"])
        q1f, q2f = fx.qubits
        s1 = transmon_spectrum(q1f.transmon())
        return s1.omega01_hz, s1.anharmonicity_hz, q2f.alpha_hz, fx.coupling()
    if "circuit" in cfg:
        desc = zio.load_circuit_file(cfg["circuit"])
        s1 = transmon_spectrum(desc.qubits[0])
        s2 = transmon_spectrum(desc.qubits[1])
        return s1.omega01_hz, s1.anharmonicity_hz, s2.anharmonicity_hz, desc.coupling
    inline = cfg.get("inline")
    if inline is None:
        raise ConfigError(f"{context}: need one of 'fixture', 'circuit' or 'inline'")
    zio._check_keys(inline, ["omega1_hz", "alpha1_hz", "alpha2_hz", "g_hz"], context)
    for k in ("omega1_hz", "alpha1_hz", "alpha2_hz", "g_hz"):
        if k not in inline:
            raise ConfigError(f"{context}: inline parameters need {k!r}")
    return (inline["omega1_hz"], inline["alpha1_hz"], inline["alpha2_hz"],
            Coupling.fixed(inline["g_hz"]))


def cmd_zz_sweep(cfg, out, threads=1):
    zio._check_keys(cfg, ["fixture", "circuit", "inline", "delta_hz",
                          "levels_per_mode", "max_total_excitation",
                          "series_order", "spectrum_json"],
                    "zz-sweep")
    omega1, alpha1, alpha2, coupling = _sweep_system(cfg, "zz-sweep")
    deltas = _grid(cfg, "delta_hz", "zz-sweep")
    levels = tuple(cfg.get("levels_per_mode", (4, 4)))
    max_exc = cfg.get("max_total_excitation", 4)
    order = int(cfg.get("series_order", 4))

    def point(delta):
        omega2 = omega1 - delta
        g = coupling.g_at(omega1, omega2)
        from .circuit import KerrParams
        params = KerrParams(np.array([omega1, omega2]),
                            np.array([alpha1, alpha2]),
                            np.zeros((2, 2)), exchange_g_hz=g)
        row = {"delta_hz": delta, "zeta_exact_hz": None,
               "zeta_perturbative_hz": None, "zeta_series_hz": None,
               "ambiguous_flag": "0"}
        try:
            spec = diagonalize_and_label(build_hamiltonian(params, levels, max_exc))
            try:
                row["zeta_exact_hz"] = zeta_exact(spec)
            except AmbiguousLabelError:
                row["zeta_exact_hz"] = zeta_resonant(spec)
                row["ambiguous_flag"] = "1"
        except ZZKitError as exc:
            row["ambiguous_flag"] = f"error:{type(exc).__name__}"
        try:
            row["zeta_perturbative_hz"] = zeta_perturbative(g, delta, alpha1, alpha2)
        except (PoleError, ZeroDivisionError):
            pass
        try:
            row["zeta_series_hz"] = zeta_series_high_detuning(
                g, delta, alpha1, alpha2, order=order)
        except DomainError:
            pass
        return row

    rows = _parallel_map(point, list(deltas), threads)
    zio.write_zz_sweep_csv(out, rows)
    zio.read_zz_sweep_csv(out)   # schema self-test

    if cfg.get("spectrum_json"):
        delta0 = deltas[0]
        omega2 = omega1 - delta0
        from .circuit import KerrParams
        params = KerrParams(np.array([omega1, omega2]), np.array([alpha1, alpha2]),
                            np.zeros((2, 2)),
                            exchange_g_hz=coupling.g_at(omega1, omega2))
        spec = diagonalize_and_label(build_hamiltonian(params, levels, max_exc))
        try:
            decomp = pauli_decomposition(spec, params.exchange_g_hz)
        except AmbiguousLabelError:
            decomp = None
        zio.write_json(cfg["spectrum_json"], zio.spectrum_dump(spec, decomp))
    return EXIT_OK


# ---------------------------------------------------------------- blockade

def _blockade_system(cfg, context):
    if "fixture" in cfg:
        fx = load_fixture(cfg["fixture"])
        bp = fx.blockade_point
        return TwoQubitSystem(bp["omega1_hz"], bp["omega2_hz"], bp["zeta_hz"]), fx
    for k in ("omega1_hz", "omega2_hz", "zeta_hz"):
        if k not in cfg:
            raise ConfigError(f"{context}: need fixture or explicit {k!r}")
    return TwoQubitSystem(cfg["omega1_hz"], cfg["omega2_hz"], cfg["zeta_hz"]), None


def cmd_blockade(cfg, out, threads=1):
    zio._check_keys(cfg, ["fixture", "omega1_hz", "omega2_hz", "zeta_hz",
                          "pulse_lengths_s", "delays_s", "shape", "frame",
                          "carrier_convention", "dissipation", "readout_matrix",
                          "spectral", "gaussian_sigma_s", "readout_pad_s",
                          "protocol"],
                    "blockade")
    system, _ = _blockade_system(cfg, "blockade")

    if "protocol" in cfg:
        # explicit protocol file: run the single sequence as written
        protocol, dissipation, matrix = zio.load_protocol_file(cfg["protocol"])
        result = run_blockade_protocol(system, protocol, dissipation)
        p1 = float(result.p_excited(1)[-1])
        p2 = float(result.p_excited(2)[-1])
        row = {"delay_s": protocol.delay_s,
               "pulse_len_s": max(p.duration_s for p in protocol.pulses),
               "p1_e": p1, "p2_e": p2}
        if matrix is not None:
            row["p1_e_measured"] = float((np.array([1 - p1, p1]) @ matrix)[1])
            row["p2_e_measured"] = float((np.array([1 - p2, p2]) @ matrix)[1])
        zio.write_blockade_csv(out, [row], with_measured=matrix is not None)
        zio.read_blockade_csv(out)
        return EXIT_OK
    lengths = [float(x) for x in cfg.get("pulse_lengths_s", [200e-9])]
    delays = [float(x) for x in cfg["delays_s"]] if "delays_s" in cfg else [100e-9]
    shape = cfg.get("shape", "truncated_cosine")
    frame = cfg.get("frame", "rotating")
    convention = cfg.get("carrier_convention", "dressed")
    sigma = cfg.get("gaussian_sigma_s")
    readout_pad = float(cfg.get("readout_pad_s", 0.0))

    dissipation = None
    if "dissipation" in cfg:
        d = cfg["dissipation"]
        zio._check_keys(d, ["t1_s", "t2_s"], "blockade:dissipation")
        dissipation = DissipationSpec(tuple(d["t1_s"]),
                                      tuple(d["t2_s"]) if "t2_s" in d else None)
    matrix = np.asarray(cfg["readout_matrix"], dtype=float) if "readout_matrix" in cfg else None

    def point(item):
        delay, length = item
        protocol = make_blockade_protocol(system, length, delay, shape=shape,
                                          frame=frame, carrier_convention=convention,
                                          gaussian_sigma_s=sigma,
                                          readout_pad_s=readout_pad)
        result = run_blockade_protocol(system, protocol, dissipation)
        p1 = float(result.p_excited(1)[-1])
        p2 = float(result.p_excited(2)[-1])
        row = {"delay_s": delay, "pulse_len_s": length, "p1_e": p1, "p2_e": p2}
        if matrix is not None:
            if matrix.shape == (2, 2):
                m1 = m2 = matrix
            elif matrix.shape == (2, 2, 2):
                m1, m2 = matrix
            else:
                raise ConfigError("readout_matrix must be 2x2 or a pair of 2x2")
            row["p1_e_measured"] = float((np.array([1 - p1, p1]) @ m1)[1])
            row["p2_e_measured"] = float((np.array([1 - p2, p2]) @ m2)[1])
        return row

    items = [(d, ln) for d in delays for ln in lengths]
    rows = _parallel_map(point, items, threads)
    zio.write_blockade_csv(out, rows, with_measured=matrix is not None)
    zio.read_blockade_csv(out)

    if "spectral" in cfg:
        sp = cfg["spectral"]
        zio._check_keys(sp, ["offset_hz", "window_hz", "out"], "blockade:spectral")
        offset = float(sp.get("offset_hz", abs(system.zeta_hz)))
        window = float(sp["window_hz"])
        srows = []
        for ln in lengths:
            pulse = pi_pulse(shape, ln, system.omega1_hz, target_qubit=1,
                             gaussian_sigma_s=sigma)
            srows.append({"pulse_len_s": ln,
                          "spectral_fraction": pulse_spectral_power(pulse, offset, window)})
        spath = sp.get("out", str(out) + ".spectral.csv")
        zio.write_spectral_csv(spath, srows)
        zio.read_spectral_csv(spath)
    return EXIT_OK


# ------------------------------------------------------- flux spectroscopy

def cmd_flux_spectroscopy(cfg, out, threads=1):
    zio._check_keys(cfg, ["fixture", "flux_phi0", "q1_flux_phi0", "summary_json"],
                    "flux-spectroscopy")
    if "fixture" not in cfg:
        raise ConfigError("flux-spectroscopy: needs a fixture with flux-tunable qubits")
    fx = load_fixture(cfg["fixture"])
    q1f, q2f = fx.qubits
    q1_flux = float(cfg.get("q1_flux_phi0", q1f.default_flux_phi0))
    fluxes = _grid(cfg, "flux_phi0", "flux-spectroscopy")
    q1 = q1f.transmon(q1_flux)
    q2 = q2f.transmon()
    coupling = fx.coupling()
    omega1 = transmon_spectrum(q1).omega01_hz

    def point(flux):
        params = kerr_at_flux(q1, q2, coupling, flux2_phi0=flux)
        spec = diagonalize_and_label(build_hamiltonian(params, (3, 3), None))
        lo, hi = spec.single_excitation_energies()
        return {"flux_phi0": flux, "omega1_bare_hz": params.mode_freqs_hz[0],
                "omega2_bare_hz": params.mode_freqs_hz[1],
                "dressed_lower_hz": lo, "dressed_upper_hz": hi}

    rows = _parallel_map(point, list(fluxes), threads)
    zio.write_flux_csv(out, rows)
    zio.read_flux_csv(out)

    summary = {"q1_flux_phi0": q1_flux, "omega1_bare_hz": float(omega1)}
    try:
        j, flux_min = avoided_crossing_j(q1, q2, coupling, fluxes)
        summary.update({"two_j_hz": 2.0 * float(j), "flux_at_min_phi0": float(flux_min)})
    except ZZKitError as exc:
        summary.update({"two_j_hz": None, "flux_at_min_phi0": None,
                        "error": f"{type(exc).__name__}: {exc}"})
    print(json.dumps(summary, sort_keys=True))
    if cfg.get("summary_json"):
        zio.write_json(cfg["summary_json"], summary)
    return EXIT_OK


# ---------------------------------------------------------------- optimize

def _rosenbrock_evaluator(x, problem):
    a, b = x
    value = -((a - 1.0) ** 2) - 100.0 * (b - a * a) ** 2
    return Candidate(x, value, True, ())


def _problem_from_config(cfg, seed_override=None):
    zio._check_keys(cfg, ["kind", "variables", "fixed", "constraints", "de",
                          "n_exc", "objective", "strict_mode"], "optimize")
    variables = []
    for v in cfg.get("variables", []):
        zio._check_keys(v, ["name", "low", "high"], "optimize:variables")
        variables.append((v["name"], float(v["low"]), float(v["high"])))
    cons_cfg = cfg.get("constraints", {})
    zio._check_keys(cons_cfg, ["freq_band_hz", "min_abs_anharmonicity_hz",
                               "min_ej_ec_ratio", "max_j_over_delta"],
                    "optimize:constraints")
    cons_kwargs = {}
    if "freq_band_hz" in cons_cfg:
        cons_kwargs["freq_band_hz"] = tuple(tuple(b) for b in cons_cfg["freq_band_hz"])
    for k in ("min_abs_anharmonicity_hz", "min_ej_ec_ratio", "max_j_over_delta"):
        if k in cons_cfg:
            cons_kwargs[k] = cons_cfg[k]
    de_cfg = cfg.get("de", {})
    zio._check_keys(de_cfg, ["population", "generations", "mutation", "crossover",
                             "seed"], "optimize:de")
    if seed_override is not None:
        de_cfg = dict(de_cfg, seed=seed_override)
    problem = OptimizationProblem(
        variables=tuple(variables),
        constraints=ConstraintSet(**cons_kwargs),
        de_params=DEParams(**de_cfg),
        n_exc=int(cfg.get("n_exc", 4)),
        fixed=tuple(cfg.get("fixed", {}).items()),
        objective=cfg.get("objective", "abs"),
        strict_mode=bool(cfg.get("strict_mode", False)),
    )
    kind = cfg.get("kind", "circuit")
    if kind == "circuit":
        return problem, evaluate_candidate
    if kind == "rosenbrock":
        if problem.dimension != 2:
            raise ConfigError("optimize: rosenbrock smoke test needs 2 variables")
        return problem, _rosenbrock_evaluator
    raise ConfigError(f"optimize: unknown kind {kind!r}")


def cmd_optimize(cfg, out, threads=1, seed_override=None):
    problem, evaluator = _problem_from_config(cfg, seed_override)
    best, history = optimize(problem, evaluator)
    payload = {
        "best_x": dict(zip(problem.names, [float(v) for v in best.x])),
        "zeta_hz": best.zeta_hz,
        "feasible": bool(best.feasible),
        "violations": {name: float(s) for name, s in best.violations},
        "history": [{"generation": h.generation,
                     "best_zeta_hz": None if np.isnan(h.best_zeta_hz) else h.best_zeta_hz,
                     "n_feasible": h.n_feasible} for h in history],
        "seed": problem.de_params.seed,
    }
    zio.write_json(out, payload)
    zio.write_history_csv(str(out) + ".history.csv", history)
    zio.read_history_csv(str(out) + ".history.csv")
    print(json.dumps({"zeta_hz": best.zeta_hz, "feasible": bool(best.feasible)},
                     sort_keys=True))
    return EXIT_OK


# --------------------------------------------------------------- foster-fit

def cmd_foster_fit(samples_csv, n_poles, out):
    from .vectorfit import foster_from_fit, vector_fit
    omegas, values = zio.load_admittance_csv(samples_csv)
    fit = vector_fit((omegas, values), n_poles)
    modes = foster_from_fit(fit)
    payload = {
        "fit_error": fit.fit_error,
        "direct_term": fit.direct_term,
        "poles": [[p.real, p.imag] for p in fit.poles],
        "residues": [[r.real, r.imag] for r in fit.residues],
        "modes": [{"l_henries": m.inductance_l, "c_farads": m.capacitance_c,
                   "r_ohms": None if np.isinf(m.resistance_r) else m.resistance_r,
                   "freq_hz": m.freq_hz, "kappa_rad_s": m.kappa_rad_s}
                  for m in modes],
    }
    zio.write_json(out, payload)
    print(json.dumps({"n_modes": len(modes), "fit_error": fit.fit_error}, sort_keys=True))
    return EXIT_OK


# ------------------------------------------------------------------ ramsey

def cmd_ramsey(cfg, out, threads=1):
    zio._check_keys(cfg, ["fixture", "omega1_hz", "omega2_hz", "zeta_hz",
                          "free_time_s", "drive_offset_hz"], "ramsey")
    system, _ = _blockade_system(cfg, "ramsey")
    grid = _grid(cfg, "free_time_s", "ramsey")
    offset = cfg.get("drive_offset_hz")
    rows = []
    for state in (0, 1):
        fringe = run_conditional_ramsey(system, state, grid, drive_offset_hz=offset)
        rows.append({"spectator_state": state, "fringe_hz": fringe})
    zio.write_ramsey_csv(out, rows)
    zio.read_ramsey_csv(out)
    inferred = abs(rows[1]["fringe_hz"] - rows[0]["fringe_hz"])
    print(json.dumps({"zeta_inferred_hz": inferred,
                      "zeta_model_hz": system.zeta_hz}, sort_keys=True))
    return EXIT_OK


# -------------------------------------------------------------------- main

def build_parser():
    parser = argparse.ArgumentParser(
        prog="zzkit",
        description="ZZ-interaction design toolkit for coupled transmons")
    parser.add_argument("--config", help="JSON configuration file")
    parser.add_argument("--out", help="output path", default="zzkit_out")
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--threads", type=int, default=1)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("zz-sweep", "blockade", "flux-spectroscopy", "optimize", "ramsey"):
        sub.add_parser(name)
    foster = sub.add_parser("foster-fit")
    foster.add_argument("samples_csv")
    foster.add_argument("--n-poles", type=int, required=True)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "foster-fit":
            return cmd_foster_fit(args.samples_csv, args.n_poles, args.out)
        cfg = _load_config(args.config)
        if args.command == "zz-sweep":
            return cmd_zz_sweep(cfg, args.out, args.threads)
        if args.command == "blockade":
            return cmd_blockade(cfg, args.out, args.threads)
        if args.command == "flux-spectroscopy":
            return cmd_flux_spectroscopy(cfg, args.out, args.threads)
        if args.command == "optimize":
            return cmd_optimize(cfg, args.out, args.threads, args.seed)
        if args.command == "ramsey":
            return cmd_ramsey(cfg, args.out, args.threads)
        raise ConfigError(f"unknown command {args.command!r}")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NoFeasibleCandidateError as exc:
        print(f"no feasible result: {exc}", file=sys.stderr)
        return EXIT_NO_FEASIBLE
    except ZZKitError as exc:
        print(f"numeric failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
