import json

import numpy as np
import pytest

from zzkit import FosterMode
from zzkit.circuit import foster_impedance
from zzkit.cli import main
from zzkit.errors import ConfigError
from zzkit.io import (
    load_admittance_csv,
    load_circuit_file,
    read_blockade_csv,
    read_history_csv,
    read_ramsey_csv,
    read_zz_sweep_csv,
    write_admittance_csv,
)


def write_json(path, payload):
    path.write_text(json.dumps(payload))
    return str(path)


class TestCircuitFile:
    def good(self):
        return {
            "qubits": [
                {"ej_sum_hz": 36.65e9, "ec_hz": 0.309e9, "asymmetry_d": 0.48,
                 "flux_phi0": 0.5},
                {"ej_sum_hz": 20.93e9, "ec_hz": 0.262e9, "asymmetry_d": 0.458,
                 "flux_phi0": 0.0},
            ],
            "coupling": {"g_hz": 245.5e6},
        }

    def test_round_trip(self, tmp_path):
        desc = load_circuit_file(write_json(tmp_path / "c.json", self.good()))
        assert len(desc.qubits) == 2
        assert desc.coupling.g_at(6e9, 6e9) == 245.5e6

    def test_unknown_top_level_key_rejected(self, tmp_path):
        bad = self.good()
        bad["qubit"] = []
        with pytest.raises(ConfigError, match="unknown keys"):
            load_circuit_file(write_json(tmp_path / "c.json", bad))

    def test_unknown_qubit_key_rejected(self, tmp_path):
        bad = self.good()
        bad["qubits"][0]["ej_hz"] = 1e9
        with pytest.raises(ConfigError, match="unknown keys"):
            load_circuit_file(write_json(tmp_path / "c.json", bad))

    def test_coupling_exactly_one_of(self, tmp_path):
        bad = self.good()
        bad["coupling"] = {"g_hz": 1e6, "c12_farads": 5e-15}
        with pytest.raises(ConfigError, match="exactly one"):
            load_circuit_file(write_json(tmp_path / "c.json", bad))

    def test_foster_block_parsed(self, tmp_path):
        cfg = self.good()
        cfg["foster"] = [{"l_henries": 1e-9, "c_farads": 1e-13, "r_ohms": None}]
        desc = load_circuit_file(write_json(tmp_path / "c.json", cfg))
        assert np.isinf(desc.foster_modes[0].resistance_r)


class TestAdmittanceCsv:
    def test_round_trip(self, tmp_path):
        omegas = 2 * np.pi * np.linspace(1e9, 5e9, 40)
        values = 1.0 / (1j * omegas * 1e-9) + 1j * omegas * 1e-13
        path = tmp_path / "y.csv"
        write_admittance_csv(path, omegas, values)
        om2, v2 = load_admittance_csv(path)
        np.testing.assert_allclose(om2, omegas, rtol=0)
        np.testing.assert_allclose(v2, values, rtol=0)

    def test_header_enforced(self, tmp_path):
        p = tmp_path / "y.csv"
        p.write_text("freq,re,im\n1,2,3\n")
        with pytest.raises(ConfigError, match="header"):
            load_admittance_csv(p)


class TestZZSweepCommand:
    def config(self, tmp_path, **extra):
        cfg = {"fixture": "chip1",
               "delta_hz": {"start": 0.6e9, "stop": 2.4e9, "num": 7}}
        cfg.update(extra)
        return write_json(tmp_path / "cfg.json", cfg)

    def test_runs_and_is_monotone(self, tmp_path):
        out = str(tmp_path / "zz.csv")
        assert main(["--config", self.config(tmp_path), "--out", out,
                     "zz-sweep"]) == 0
        rows = read_zz_sweep_csv(out)
        mags = [abs(r["zeta_exact_hz"]) for r in rows]
        assert all(b < a for a, b in zip(mags, mags[1:]))

    def test_reruns_byte_identical(self, tmp_path):
        out1, out2 = str(tmp_path / "a.csv"), str(tmp_path / "b.csv")
        cfg = self.config(tmp_path)
        main(["--config", cfg, "--out", out1, "zz-sweep"])
        main(["--config", cfg, "--out", out2, "--threads", "4", "zz-sweep"])
        assert open(out1, "rb").read() == open(out2, "rb").read()

    def test_zero_coupling_inline(self, tmp_path):
        cfg = write_json(tmp_path / "cfg.json", {
            "inline": {"omega1_hz": 6.27e9, "alpha1_hz": -351e6,
                       "alpha2_hz": -312e6, "g_hz": 0.0},
            "delta_hz": {"start": 0.8e9, "stop": 2.0e9, "num": 5}})
        out = str(tmp_path / "zz.csv")
        assert main(["--config", cfg, "--out", out, "zz-sweep"]) == 0
        for r in read_zz_sweep_csv(out):
            assert r["zeta_exact_hz"] == 0.0
            assert r["zeta_perturbative_hz"] == 0.0

    def test_config_error_exit_code(self, tmp_path):
        bad = write_json(tmp_path / "cfg.json", {"fixture": "chip1"})
        assert main(["--config", bad, "--out", str(tmp_path / "x.csv"),
                     "zz-sweep"]) == 2

    def test_unknown_config_key_exit_code(self, tmp_path):
        bad = write_json(tmp_path / "cfg.json", {
            "fixture": "chip1", "delta": {"start": 1, "stop": 2, "num": 3}})
        assert main(["--config", bad, "--out", str(tmp_path / "x.csv"),
                     "zz-sweep"]) == 2

    def test_spectrum_dump(self, tmp_path):
        dump = tmp_path / "spec.json"
        cfg = self.config(tmp_path, spectrum_json=str(dump))
        assert main(["--config", cfg, "--out", str(tmp_path / "zz.csv"),
                     "zz-sweep"]) == 0
        payload = json.loads(dump.read_text())
        assert "energies_hz" in payload and "beta_hz" in payload
        assert payload["zeta_hz"] == pytest.approx(4 * payload["beta_hz"][5])


class TestBlockadeCommand:
    def test_delay_grid_with_readout_matrix(self, tmp_path):
        cfg = write_json(tmp_path / "cfg.json", {
            "fixture": "chip1",
            "pulse_lengths_s": [100e-9],
            "delays_s": [-80e-9, 80e-9],
            "readout_matrix": [[0.95, 0.05], [0.10, 0.90]],
        })
        out = str(tmp_path / "b.csv")
        assert main(["--config", cfg, "--out", out, "blockade"]) == 0
        rows = read_blockade_csv(out)
        assert len(rows) == 2
        # confusion matrix maps p=1 to 0.9 and p=0 to 0.05
        hi = max(r["p1_e_measured"] for r in rows)
        lo = min(r["p1_e_measured"] for r in rows)
        assert hi == pytest.approx(0.90, abs=0.02)
        assert lo == pytest.approx(0.05, abs=0.02)

    def test_protocol_file_single_run(self, tmp_path):
        # hand-written protocol: pi pulse on qubit 2 then a blocked pulse on 1
        protocol = {
            "frame": "rotating",
            "delay_s": 120e-9,
            "pulses": [
                {"shape": "truncated_cosine", "amplitude_hz": 1.0 / 100e-9,
                 "duration_s": 100e-9, "carrier_hz": 4.498e9,
                 "target_qubit": 2},
                {"shape": "truncated_cosine", "amplitude_hz": 1.0 / 100e-9,
                 "duration_s": 100e-9, "carrier_hz": 6.307e9,
                 "start_time_s": 120e-9, "target_qubit": 1},
            ],
            "dissipation": {"t1_s": [7.8e-6, 8.8e-6]},
            "readout_matrix": [[0.95, 0.05], [0.10, 0.90]],
        }
        ppath = tmp_path / "protocol.json"
        ppath.write_text(json.dumps(protocol))
        cfg = write_json(tmp_path / "cfg.json", {
            "zeta_hz": 19e6, "omega1_hz": 6.307e9, "omega2_hz": 4.498e9,
            "protocol": str(ppath)})
        out = str(tmp_path / "b.csv")
        assert main(["--config", cfg, "--out", out, "blockade"]) == 0
        row, = read_blockade_csv(out)
        assert row["p1_e"] < 0.1          # blocked
        assert row["p2_e"] > 0.9
        assert row["p1_e_measured"] == pytest.approx(
            (1 - row["p1_e"]) * 0.05 + row["p1_e"] * 0.90, abs=1e-9)

    def test_protocol_file_unknown_key_rejected(self, tmp_path):
        ppath = tmp_path / "protocol.json"
        ppath.write_text(json.dumps({"pulses": [], "frames": "lab"}))
        cfg = write_json(tmp_path / "cfg.json", {
            "zeta_hz": 19e6, "omega1_hz": 6.307e9, "omega2_hz": 4.498e9,
            "protocol": str(ppath)})
        assert main(["--config", cfg, "--out", str(tmp_path / "b.csv"),
                     "blockade"]) == 2

    def test_circuit_file_drives_zz_sweep(self, tmp_path):
        circuit = {
            "qubits": [
                {"ej_sum_hz": 36.652330937e9, "ec_hz": 308.885729e6,
                 "asymmetry_d": 0.48029436, "flux_phi0": 0.5},
                {"ej_sum_hz": 20.928219016e9, "ec_hz": 261.872188e6,
                 "asymmetry_d": 0.45779685, "flux_phi0": 0.0},
            ],
            "coupling": {"g_hz": 245.5e6},
        }
        cpath = write_json(tmp_path / "circuit.json", circuit)
        cfg = write_json(tmp_path / "cfg.json", {
            "circuit": cpath,
            "delta_hz": {"start": 1.5e9, "stop": 2.1e9, "num": 3}})
        out = str(tmp_path / "zz.csv")
        assert main(["--config", cfg, "--out", out, "zz-sweep"]) == 0
        rows = read_zz_sweep_csv(out)
        assert all(r["zeta_exact_hz"] < 0 for r in rows)

    def test_spectral_sidecar(self, tmp_path):
        spath = str(tmp_path / "sp.csv")
        cfg = write_json(tmp_path / "cfg.json", {
            "zeta_hz": 19e6, "omega1_hz": 6.307e9, "omega2_hz": 4.498e9,
            "pulse_lengths_s": [16e-9, 200e-9],
            "delays_s": [100e-9],
            "spectral": {"offset_hz": 19e6, "window_hz": 1.0 / 9.1e-6,
                         "out": spath},
        })
        out = str(tmp_path / "b.csv")
        assert main(["--config", cfg, "--out", out, "blockade"]) == 0
        from zzkit.io import read_spectral_csv
        rows = read_spectral_csv(spath)
        by_len = {r["pulse_len_s"]: r["spectral_fraction"] for r in rows}
        assert by_len[16e-9] > by_len[200e-9]


class TestFluxSpectroscopyCommand:
    def test_chip1_summary(self, tmp_path):
        cfg = write_json(tmp_path / "cfg.json", {
            "fixture": "chip1",
            "flux_phi0": {"start": -0.2, "stop": -0.01, "num": 21},
            "summary_json": str(tmp_path / "summary.json"),
        })
        out = str(tmp_path / "flux.csv")
        assert main(["--config", cfg, "--out", out, "flux-spectroscopy"]) == 0
        summary = json.loads((tmp_path / "summary.json").read_text())
        assert summary["two_j_hz"] == pytest.approx(491e6, rel=0.05)
        assert summary["flux_at_min_phi0"] == pytest.approx(-0.1, abs=0.02)

    def test_far_detuned_spectator_nearly_bare(self, tmp_path, chip1):
        # parking Q1 at its upper sweet-spot (9.2 GHz) leaves Q2 dressed only
        # by the residual dispersive pull g^2/(w2 - w1); with the device's own
        # coupling that is ~30 MHz, and the second-order prediction holds to
        # better than 1 MHz
        cfg = write_json(tmp_path / "cfg.json", {
            "fixture": "chip1", "q1_flux_phi0": 0.0,
            "flux_phi0": {"start": -0.05, "stop": 0.05, "num": 11},
        })
        out = str(tmp_path / "flux.csv")
        assert main(["--config", cfg, "--out", out, "flux-spectroscopy"]) == 0
        from zzkit.io import read_flux_csv
        for r in read_flux_csv(out):
            w1, w2 = r["omega1_bare_hz"], r["omega2_bare_hz"]
            g = chip1.g_at(w1, w2)
            lamb = g**2 / (w2 - w1)
            assert abs(r["dressed_lower_hz"] - (w2 + lamb)) < 1e6


class TestOptimizeCommand:
    def test_rosenbrock_smoke(self, tmp_path):
        cfg = write_json(tmp_path / "p.json", {
            "kind": "rosenbrock",
            "variables": [{"name": "a", "low": -2.0, "high": 2.0},
                          {"name": "b", "low": -1.0, "high": 3.0}],
            "de": {"seed": 11},
            "objective": "signed",
        })
        out = str(tmp_path / "r.json")
        assert main(["--config", cfg, "--out", out, "optimize"]) == 0
        payload = json.loads(open(out).read())
        assert payload["best_x"]["a"] == pytest.approx(1.0, abs=1e-3)
        assert payload["best_x"]["b"] == pytest.approx(1.0, abs=1e-3)
        hist = read_history_csv(out + ".history.csv")
        assert len(hist) == 200

    def test_infeasible_exit_code(self, tmp_path):
        cfg = write_json(tmp_path / "p.json", {
            "variables": [{"name": "ej1_hz", "low": 10e9, "high": 30e9},
                          {"name": "ej2_hz", "low": 10e9, "high": 30e9},
                          {"name": "c1_farads", "low": 40e-15, "high": 90e-15},
                          {"name": "c2_farads", "low": 40e-15, "high": 90e-15},
                          {"name": "c12_farads", "low": 1e-15, "high": 8e-15}],
            "constraints": {"freq_band_hz": [[40e9, 41e9], [40e9, 41e9]]},
            "de": {"population": 8, "generations": 2, "seed": 1},
            "n_exc": 3,
        })
        assert main(["--config", cfg, "--out", str(tmp_path / "r.json"),
                     "optimize"]) == 3

    def test_seed_reproducibility(self, tmp_path):
        cfg = write_json(tmp_path / "p.json", {
            "kind": "rosenbrock",
            "variables": [{"name": "a", "low": -2.0, "high": 2.0},
                          {"name": "b", "low": -1.0, "high": 3.0}],
            "de": {"generations": 40, "seed": 5},
            "objective": "signed",
        })
        o1, o2 = str(tmp_path / "r1.json"), str(tmp_path / "r2.json")
        main(["--config", cfg, "--out", o1, "optimize"])
        main(["--config", cfg, "--out", o2, "optimize"])
        a = json.loads(open(o1).read())
        b = json.loads(open(o2).read())
        assert a["best_x"] == b["best_x"]
        assert a["history"] == b["history"]


class TestFosterFitCommand:
    def test_round_trip(self, tmp_path):
        omega0 = 2 * np.pi * 5e9
        mode = FosterMode(100.0 / omega0, 1.0 / (100.0 * omega0))
        omegas = 2 * np.pi * np.linspace(1e9, 9e9, 400)
        z = foster_impedance([mode], omegas)
        csv_path = tmp_path / "z.csv"
        write_admittance_csv(csv_path, omegas, z)
        out = str(tmp_path / "fit.json")
        assert main(["--out", out, "foster-fit", str(csv_path),
                     "--n-poles", "2"]) == 0
        payload = json.loads(open(out).read())
        assert len(payload["modes"]) == 1
        assert payload["modes"][0]["freq_hz"] == pytest.approx(5e9, rel=1e-6)
        assert payload["fit_error"] < 1e-9

    def test_bad_header_is_config_error(self, tmp_path):
        p = tmp_path / "z.csv"
        p.write_text("a,b,c\n1,2,3\n")
        assert main(["--out", str(tmp_path / "f.json"), "foster-fit", str(p),
                     "--n-poles", "2"]) == 2


class TestRamseyCommand:
    def test_inferred_zeta(self, tmp_path):
        cfg = write_json(tmp_path / "cfg.json", {
            "zeta_hz": 15.25e6, "omega1_hz": 6.307e9, "omega2_hz": 4.498e9,
            "free_time_s": {"start": 0.0, "stop": 2e-6, "num": 4001}})
        out = str(tmp_path / "ramsey.csv")
        assert main(["--config", cfg, "--out", out, "ramsey"]) == 0
        rows = read_ramsey_csv(out)
        diff = abs(rows[1]["fringe_hz"] - rows[0]["fringe_hz"])
        assert diff == pytest.approx(15.25e6, rel=1e-3)
