import json
import subprocess
import sys

import numpy as np
import pytest

from deepvqe import (
    FermionTerm,
    OptimizerConfig,
    RunConfig,
    RunReport,
    ValidationError,
    emit_report,
    run_pipeline,
    save_fermion_terms,
)
from deepvqe.cli import CSV_HEADER, main


def tiny_config(**overrides):
    base = dict(
        model="heisenberg",
        n_sites=4,
        n_subsystems=2,
        basis="w1",
        step1="exact",
        step3="exact",
        seed=3,
    )
    base.update(overrides)
    return RunConfig(**base)


def fermion_fixture(path, n_modes=4):
    rng = np.random.default_rng(0)
    terms = []
    for i in range(1, n_modes + 1):
        terms.append(FermionTerm(float(rng.standard_normal()), ((i, True), (i, False))))
    for i in range(1, n_modes):
        t = float(rng.standard_normal())
        terms.append(FermionTerm(t, ((i, True), (i + 1, False))))
        terms.append(FermionTerm(t, ((i + 1, True), (i, False))))
    terms.append(FermionTerm(0.25, ((1, True), (2, True), (2, False), (1, False))))
    save_fermion_terms(terms, path)
    return terms


class TestRunConfig:
    def test_validation_errors(self):
        with pytest.raises(ValidationError):
            RunConfig(model="ising")
        with pytest.raises(ValidationError):
            RunConfig(n_sites=9, n_subsystems=2)
        with pytest.raises(ValidationError):
            RunConfig(model="fermion", basis="w1")
        with pytest.raises(ValidationError):
            RunConfig(model="fermion", basis="ws", terms_file=None)
        with pytest.raises(ValidationError):
            RunConfig(penalty_mode="huge")

    def test_json_round_trip(self):
        cfg = tiny_config(optimizer=OptimizerConfig(restarts=2, seed=5))
        restored = RunConfig.from_json_dict(json.loads(json.dumps(cfg.to_json_dict())))
        assert restored == cfg

    def test_default_weights(self):
        assert tiny_config().weights() == (2.0, 1.0)
        assert tiny_config(n_levels=3).weights() == (3.0, 2.0, 1.0)


class TestRunPipeline:
    def test_deterministic_reports(self):
        a = run_pipeline(tiny_config())
        b = run_pipeline(tiny_config())
        assert a == b  # timing excluded from equality
        assert a.to_json_dict()["energies"] == b.to_json_dict()["energies"]

    def test_report_fields(self):
        r = run_pipeline(tiny_config())
        assert r.split == "2x2"
        assert r.basis == "w1"
        assert r.backends == "effective-ed"
        assert len(r.energies) == 2
        assert r.ed_energies is not None and r.relative_errors is not None
        assert r.penalty_verified is True
        assert r.e0_local >= r.energies[0] - 1e-9

    def test_ed_skip_leaves_error_fields_empty(self):
        r = run_pipeline(tiny_config(ed="skip"))
        assert r.ed_energies is None and r.relative_errors is None
        row = r.csv_row()
        fields = row.split(",")
        assert fields[4] == "" and fields[6] == ""

    def test_zero_penalty_mode_requires_verification(self):
        r = run_pipeline(tiny_config(penalty_mode="zero"))
        assert r.penalty_verified is True
        assert r.lambdas == [0.0, 0.0]

    def test_sandwich_inequalities(self):
        r = run_pipeline(tiny_config(basis="w2", n_sites=8, n_subsystems=2))
        assert r.ed_energies[0] - 1e-9 <= r.energies[0] <= r.e0_local + 1e-9

    def test_fermion_model_pipeline(self, tmp_path):
        path = tmp_path / "terms.jsonl"
        fermion_fixture(path)
        cfg = RunConfig(
            model="fermion",
            terms_file=str(path),
            n_k=1,
            orbitals_per_k=4,
            n_qubit_per_subsystem=2,
            basis="ws",
            step1="exact",
            step3="exact",
        )
        r = run_pipeline(cfg)
        assert r.model == "fermion-4"
        assert r.split == "2x2"
        assert r.ed_energies[0] <= r.energies[0] + 1e-9


class TestEmitReport:
    def test_json_round_trip(self, tmp_path):
        r = run_pipeline(tiny_config())
        path = tmp_path / "report.json"
        emit_report(r, path, "json")
        restored = RunReport.from_json_dict(json.loads(path.read_text()))
        assert restored == r

    def test_csv_header_and_row(self, tmp_path):
        r = run_pipeline(tiny_config())
        path = tmp_path / "report.csv"
        emit_report(r, path, "csv")
        lines = path.read_text().strip().split("\n")
        assert lines[0] == CSV_HEADER
        assert lines[0] == "model,split,basis,E0,E0_err,E1,E1_err,TR,N_req,seed"
        fields = lines[1].split(",")
        assert fields[0] == "heisenberg-4"
        assert float(fields[3]) == pytest.approx(r.energies[0])


class TestCommandLine:
    def test_run_subcommand(self, tmp_path, capsys):
        out = tmp_path / "r.json"
        code = main(
            [
                "run", "--model", "heisenberg", "--sites", "4", "--subsystems", "2",
                "--basis", "w1", "--step1", "exact", "--step3", "exact",
                "--seed", "7", "--output", str(out),
            ]
        )
        assert code == 0
        data = json.loads(out.read_text())
        assert data["seed"] == 7
        assert len(data["energies"]) == 2

    def test_config_file_with_flag_override(self, tmp_path):
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text(json.dumps(tiny_config().to_json_dict()))
        out = tmp_path / "r.json"
        code = main(["run", "--config", str(cfg_path), "--seed", "11", "--output", str(out)])
        assert code == 0
        assert json.loads(out.read_text())["seed"] == 11

    def test_ed_subcommand(self, capsys):
        code = main(["ed", "--model", "heisenberg", "--sites", "4", "--subsystems", "2"])
        assert code == 0
        captured = capsys.readouterr().out
        assert "E0" in captured and "-6.46" in captured

    def test_verify_penalty_subcommand(self, capsys):
        code = main(
            [
                "verify-penalty", "--model", "heisenberg", "--sites", "8",
                "--subsystems", "2", "--basis", "w1", "--penalty-mode", "zero",
            ]
        )
        assert code == 0
        assert "preserved" in capsys.readouterr().out

    def test_table1_single_row(self, tmp_path, capsys):
        out = tmp_path / "grid.csv"
        code = main(["table1", "--rows", "2x4", "--output", str(out)])
        assert code == 0
        lines = out.read_text().strip().split("\n")
        assert lines[0] == CSV_HEADER
        assert len(lines) == 3  # header + w1 + w2
        printed = capsys.readouterr().out
        assert "-13.445" in printed and "-13.497" in printed

    def test_invalid_config_exit_code(self, capsys):
        code = main(["run", "--model", "heisenberg", "--sites", "9", "--subsystems", "2"])
        assert code == 2

    def test_missing_terms_file_is_stage_error(self, tmp_path, capsys):
        code = main(
            [
                "run", "--model", "fermion", "--basis", "ws",
                "--terms-file", str(tmp_path / "absent.jsonl"),
                "--n-k", "1", "--orbitals-per-k", "4", "--qubits-per-subsystem", "2",
            ]
        )
        assert code == 3
        assert "model-build" in capsys.readouterr().err

    def test_module_entry_point(self):
        proc = subprocess.run(
            [sys.executable, "-m", "deepvqe", "ed", "--model", "heisenberg",
             "--sites", "4", "--subsystems", "2"],
            capture_output=True,
            text=True,
        )
        assert proc.returncode == 0
        assert "-6.46" in proc.stdout
