"""End-to-end tests of the command-line interface.

Each subcommand is driven through ``main`` with a JSON config written to a
temp directory; assertions cover exit codes, stdout/stderr payloads, the
CSV outputs, and the resolved-config sidecars.
"""

import json
import math

import numpy as np
import pytest

from kerrlattice.cli import CHAIN_COORDINATION, main
from kerrlattice.errors import ConfigError


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def write_config(tmp_path, payload, name="config.json"):
    path = tmp_path / name
    path.write_text(json.dumps(payload))
    return path


FAST_INTEGRATOR = {"backend": "numpy", "dt": 0.002}


def crystal_run_config(output="traj.csv"):
    """Hard-core crystal point; converges well within t = 150."""
    return {
        "mode": "run",
        "params": {
            "delta": 0.0,
            "omega": 0.75,
            "zJ": 0.0,
            "zV": 8.0,
            "hard_core": True,
        },
        "seed": {"kind": "AsymmetricCoherent", "alpha_A": 0.1, "alpha_B": 0},
        "t_final": 150,
        "integrator": FAST_INTEGRATOR,
        "classifier": {"t_transient": 100, "t_window": 40},
        "output": output,
    }


class TestConfigValidation:
    def test_missing_file_exits_2(self, capsys, tmp_path):
        code, out, err = run_cli(capsys, "run", str(tmp_path / "nope.json"))
        assert code == 2
        payload = json.loads(err)
        assert payload["error"] == "ConfigError"
        assert "nope.json" in payload["message"]

    def test_invalid_json_exits_2(self, capsys, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{not json")
        code, _, err = run_cli(capsys, "run", str(path))
        assert code == 2
        assert json.loads(err)["error"] == "ConfigError"

    def test_mode_mismatch_exits_2(self, capsys, tmp_path):
        path = write_config(tmp_path, crystal_run_config())
        code, _, err = run_cli(capsys, "sweep", str(path))
        assert code == 2
        assert "mode" in json.loads(err)["message"]

    def test_unknown_key_rejected(self, capsys, tmp_path):
        cfg = crystal_run_config()
        cfg["typo_key"] = 1
        path = write_config(tmp_path, cfg)
        code, _, err = run_cli(capsys, "run", str(path))
        assert code == 2
        assert "typo_key" in json.loads(err)["message"]

    def test_unknown_param_rejected(self, capsys, tmp_path):
        cfg = crystal_run_config()
        cfg["params"]["detuning"] = 0.5
        path = write_config(tmp_path, cfg)
        code, _, err = run_cli(capsys, "run", str(path))
        assert code == 2

    def test_bad_dataclass_value_exits_2(self, capsys, tmp_path):
        cfg = crystal_run_config()
        # schema-valid numbers, rejected by IntegratorControls
        cfg["integrator"] = {"dt": 0.1, "sample_dt": 0.01}
        path = write_config(tmp_path, cfg)
        code, _, err = run_cli(capsys, "run", str(path))
        assert code == 2
        assert json.loads(err)["error"] == "ConfigError"

    def test_missing_output_dir_exits_2(self, capsys, tmp_path):
        path = write_config(tmp_path, crystal_run_config())
        code, _, err = run_cli(
            capsys, "run", str(path), "-o", str(tmp_path / "absent")
        )
        assert code == 2


class TestRun:
    def test_crystal_point(self, capsys, tmp_path):
        path = write_config(tmp_path, crystal_run_config())
        code, out, _ = run_cli(capsys, "run", str(path), "-o", str(tmp_path))
        assert code == 0
        payload = json.loads(out)
        assert payload["phase"] == "crystal"
        assert payload["delta_n"] > 0.1
        assert payload["n_max_used"] == 1

        rows = (tmp_path / "traj.csv").read_text().splitlines()
        header = rows[0].split(",")
        assert header == [
            "t",
            "re_a_A",
            "im_a_A",
            "re_a_B",
            "im_a_B",
            "n_A",
            "n_B",
            "residual_A",
            "residual_B",
        ]
        last = [float(v) for v in rows[-1].split(",")]
        assert math.isclose(last[0], 150.0, rel_tol=1e-9)
        assert abs(last[5] - last[6]) == pytest.approx(
            payload["delta_n"], rel=1e-6
        )

        sidecar = json.loads((tmp_path / "traj.config.json").read_text())
        resolved = sidecar["resolved"]
        assert resolved["params"]["zV"] == 8.0
        assert resolved["params"]["kappa"] == 1.0  # default filled in
        assert resolved["integrator"]["backend"] == "numpy"
        assert resolved["classifier"]["eps_crystal"] == 1e-3
        assert resolved["seed"]["alpha_A"] == {"real": 0.1, "imag": 0.0}

    def test_unconverged_run_exits_4_with_diagnostics(self, capsys, tmp_path):
        cfg = crystal_run_config()
        cfg["t_final"] = 60
        cfg["classifier"] = {"t_transient": 30, "t_window": 25}
        path = write_config(tmp_path, cfg)
        code, _, err = run_cli(capsys, "run", str(path), "-o", str(tmp_path))
        assert code == 4
        payload = json.loads(err)
        assert payload["error"] == "InconclusiveError"
        assert payload["diagnostics"]["residual"] > 0
        # the trajectory file is still written for post-mortem analysis
        assert (tmp_path / "traj.csv").exists()


class TestSweep:
    def test_one_axis_hard_core_cut(self, capsys, tmp_path):
        cfg = {
            "mode": "sweep",
            "base": {"delta": 0.0, "omega": 0.75, "zJ": 0.0, "hard_core": True},
            "axis1": {"name": "zV", "start": 4.0, "stop": 7.0, "n_points": 2},
            "seed": {"kind": "AsymmetricCoherent", "alpha_A": 0.1, "alpha_B": 0},
            "t_final": 300,
            "integrator": FAST_INTEGRATOR,
            "classifier": {"t_transient": 200, "t_window": 80},
            "output": "phase.csv",
        }
        path = write_config(tmp_path, cfg)
        code, out, _ = run_cli(
            capsys, "sweep", str(path), "-o", str(tmp_path), "-w", "1"
        )
        assert code == 0
        payload = json.loads(out)
        assert payload["rows"] == 2
        assert payload["phases"] == {"uniform": 1, "crystal": 1}

        lines = (tmp_path / "phase.csv").read_text().splitlines()
        assert lines[0] == (
            "axis1,axis2,phase,delta_n,period,residual,n_max_used"
        )
        assert [ln.split(",")[2] for ln in lines[1:]] == ["uniform", "crystal"]
        sidecar = json.loads((tmp_path / "phase.json").read_text())
        assert sidecar["axis1"]["name"] == "zV"


class TestOracle:
    def test_two_site_occupations_and_g2(self, capsys, tmp_path):
        cfg = {
            "mode": "oracle",
            "lattice": {"n_sites": 2, "n_max": 2, "geometry": "open_chain"},
            "params": {
                "delta": 0.3,
                "omega": 0.4,
                "zJ": 0.6,
                "U": 0.5,
                "zV": 1.0,
            },
            "method": "null_space",
            "output": "oracle.csv",
        }
        path = write_config(tmp_path, cfg)
        code, out, _ = run_cli(capsys, "oracle", str(path), "-o", str(tmp_path))
        assert code == 0
        payload = json.loads(out)
        assert payload["dim"] == 9

        occ = (tmp_path / "oracle_occupations.csv").read_text().splitlines()
        assert occ[0] == "site,n"
        n0 = float(occ[1].split(",")[1])
        n1 = float(occ[2].split(",")[1])
        assert n0 == pytest.approx(n1, rel=1e-8)  # mirror symmetry
        assert 0 < n0 < 2

        g2_rows = (tmp_path / "oracle_g2.csv").read_text().splitlines()
        assert g2_rows[0] == "i,j,r,g2"
        assert len(g2_rows) == 1 + 3  # (0,0), (0,1), (1,1)

        sidecar = json.loads(
            (tmp_path / "oracle_occupations.config.json").read_text()
        )
        resolved = sidecar["resolved"]
        assert resolved["coordination_z"] == CHAIN_COORDINATION
        z = resolved["coordination_z"]
        assert resolved["params_bare"]["zJ"] * z == pytest.approx(
            resolved["params_z_scaled"]["zJ"]
        )
        assert resolved["params_bare"]["zV"] * z == pytest.approx(
            resolved["params_z_scaled"]["zV"]
        )

    def test_bare_coupling_conversion_matches_direct_call(
        self, capsys, tmp_path
    ):
        # CLI at zJ = 0.6 must reproduce a direct steady_state at J = 0.3
        from dataclasses import replace

        from kerrlattice.lattice import (
            LatticeSpec,
            SteadyStateMethod,
            occupation,
            steady_state,
        )
        from kerrlattice.model import ModelParams

        scaled = ModelParams(delta=0.3, omega=0.4, zJ=0.6, U=0.5, zV=1.0)
        bare = replace(scaled, zJ=0.3, zV=0.5, t_ch=0.0)
        spec = LatticeSpec(n_sites=2, n_max=2)
        state = steady_state(spec, bare, SteadyStateMethod.NULL_SPACE)

        cfg = {
            "mode": "oracle",
            "lattice": {"n_sites": 2, "n_max": 2},
            "params": {
                "delta": 0.3,
                "omega": 0.4,
                "zJ": 0.6,
                "U": 0.5,
                "zV": 1.0,
            },
            "method": "null_space",
            "output": "oracle.csv",
        }
        path = write_config(tmp_path, cfg)
        code, _, _ = run_cli(capsys, "oracle", str(path), "-o", str(tmp_path))
        assert code == 0
        occ = (tmp_path / "oracle_occupations.csv").read_text().splitlines()
        assert float(occ[1].split(",")[1]) == pytest.approx(
            occupation(state, 0), rel=1e-10
        )


class TestWigner:
    def test_stationary_point_single_snapshot(self, capsys, tmp_path):
        cfg = {
            "mode": "wigner",
            "params": {
                "delta": 0.0,
                "omega": 0.75,
                "zJ": 0.0,
                "zV": 8.0,
                "hard_core": True,
            },
            "seed": {"kind": "AsymmetricCoherent", "alpha_A": 0.1, "alpha_B": 0},
            "t_final": 150,
            "integrator": FAST_INTEGRATOR,
            "classifier": {"t_transient": 100, "t_window": 40},
            "grid": {
                "x_min": -2,
                "x_max": 2,
                "p_min": -2,
                "p_max": 2,
                "n_points": 15,
            },
            "output": "wig.csv",
        }
        path = write_config(tmp_path, cfg)
        code, out, _ = run_cli(capsys, "wigner", str(path), "-o", str(tmp_path))
        assert code == 0
        payload = json.loads(out)
        assert payload["phase"] == "crystal"
        assert payload["files"] == [
            str(tmp_path / "wig_A_phase0.csv"),
            str(tmp_path / "wig_B_phase0.csv"),
        ]
        rows = (tmp_path / "wig_A_phase0.csv").read_text().splitlines()
        assert rows[0] == "x,p,W"
        assert len(rows) == 1 + 15 * 15
        w_values = np.array([float(r.split(",")[2]) for r in rows[1:]])
        # hard-core states live in a 2-level space: positivity can fail, but
        # the distribution must still be real and normalizable on the patch
        assert np.all(np.isfinite(w_values))
        cell = (4.0 / 14) ** 2
        assert w_values.sum() * cell == pytest.approx(1.0, abs=0.1)


class TestWignerOscillating:
    def test_limit_cycle_gets_phase_resolved_snapshots(self, capsys, tmp_path):
        cfg = {
            "mode": "wigner",
            "params": {
                "delta": 1.5,
                "omega": 0.75,
                "zJ": 0.2,
                "zV": 8.0,
                "hard_core": True,
            },
            "seed": {"kind": "AsymmetricCoherent", "alpha_A": 0.1, "alpha_B": 0},
            "t_final": 400,
            "integrator": FAST_INTEGRATOR,
            "classifier": {"t_transient": 250, "t_window": 120},
            "grid": {"n_points": 11},
            "n_phases": 3,
            "output": "osc.csv",
        }
        path = write_config(tmp_path, cfg)
        code, out, _ = run_cli(capsys, "wigner", str(path), "-o", str(tmp_path))
        assert code == 0
        payload = json.loads(out)
        assert payload["phase"] == "oscillating"
        assert payload["period"] == pytest.approx(3.23, abs=0.1)
        assert len(payload["files"]) == 6  # 3 phases x 2 sublattices

        grids = []
        for k in range(3):
            rows = (tmp_path / f"osc_A_phase{k}.csv").read_text().splitlines()
            grids.append(np.array([float(r.split(",")[2]) for r in rows[1:]]))
        # the state moves along the cycle: snapshots differ pairwise
        assert np.max(np.abs(grids[0] - grids[1])) > 1e-3
        assert np.max(np.abs(grids[1] - grids[2])) > 1e-3


class TestCircuit:
    def base_config(self):
        return {
            "mode": "circuit",
            "circuit": {"C": 4e-14, "L": 2e-9, "C_J": 2e-15, "z": 2},
            "solve": {"target": "E_J"},
        }

    def test_solve_and_derive(self, capsys, tmp_path):
        path = write_config(tmp_path, self.base_config())
        code, out, _ = run_cli(capsys, "circuit", str(path))
        assert code == 0
        payload = json.loads(out)
        assert payload["derived"]["X_minus"] == 0.0
        assert payload["derived"]["U"] < 0
        assert payload["derived"]["V"] < 0
        assert payload["circuit"]["E_J"] > 0
        assert "model_params" not in payload  # no kappa given

    def test_model_params_require_acknowledgment(self, capsys, tmp_path):
        cfg = self.base_config()
        cfg["kappa_hz"] = 1e7
        path = write_config(tmp_path, cfg)
        code, out, _ = run_cli(capsys, "circuit", str(path))
        assert code == 0
        payload = json.loads(out)
        assert payload["model_params"] is None
        assert "acknowledge_sign_convention" in payload["note"]

    def test_acknowledged_model_params_are_signed(self, capsys, tmp_path):
        cfg = self.base_config()
        cfg["kappa_hz"] = 1e7
        cfg["acknowledge_sign_convention"] = True
        path = write_config(tmp_path, cfg)
        code, out, _ = run_cli(capsys, "circuit", str(path))
        assert code == 0
        mp = json.loads(out)["model_params"]
        assert mp["U"] < 0 and mp["zV"] < 0 and mp["t_ch"] > 0
        assert mp["zV"] / mp["U"] == pytest.approx(4.0)

    def test_both_junction_values_with_solve_is_an_error(
        self, capsys, tmp_path
    ):
        cfg = self.base_config()
        cfg["circuit"]["E_J"] = 1e-24
        path = write_config(tmp_path, cfg)
        code, _, err = run_cli(capsys, "circuit", str(path))
        assert code == 2
        assert "E_J" in json.loads(err)["message"]

    def test_missing_junction_values_without_solve(self, capsys, tmp_path):
        cfg = self.base_config()
        del cfg["solve"]
        del cfg["circuit"]["C_J"]
        path = write_config(tmp_path, cfg)
        code, _, err = run_cli(capsys, "circuit", str(path))
        assert code == 2

    def test_infeasible_cancellation_exits_2(self, capsys, tmp_path):
        cfg = {
            "mode": "circuit",
            "circuit": {"C": 4e-14, "L": 2e-9, "E_J": 1e-19},
            "solve": {"target": "C_J"},
        }
        path = write_config(tmp_path, cfg)
        code, _, err = run_cli(capsys, "circuit", str(path))
        assert code == 2
        assert json.loads(err)["error"] == "ConfigError"


class TestParserBasics:
    def test_version_flag(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["--version"])
        assert exc.value.code == 0
        from kerrlattice import __version__

        assert __version__ in capsys.readouterr().out

    def test_subcommand_required(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main([])
        assert exc.value.code == 2
