"""End-to-end command-line tests: exit codes, printed output, report files."""

from __future__ import annotations

import shutil
import subprocess
from datetime import date

import pytest

from awardsurv.cli import main
from awardsurv.domain import Nomination, Performer
from awardsurv.io import DEFAULT_CENSOR_DATE, serialize
from awardsurv.simulation import SimConfig, simulate_cohort


def _simulated_dataset_text(seed: int = 5) -> str:
    """Serialize a simulated cohort, censoring deaths past the cutoff date."""
    cohort = simulate_cohort(SimConfig(seed=seed, scenario="table3"))
    nominated = sorted({i for award in cohort.awards for i in award.nominees})
    performers = []
    for i in nominated:
        death = date(int(cohort.birth_year[i] + cohort.death_age[i]), 1, 1)
        performers.append(
            Performer(
                id=f"p{i}",
                birth=date(int(cohort.birth_year[i]), 1, 1),
                death=death if death <= DEFAULT_CENSOR_DATE else None,
                censor_date=DEFAULT_CENSOR_DATE,
            )
        )
    nominations = [
        Nomination(
            performer_id=f"p{i}",
            award_index=award.year,
            award_date=date(award.year, 1, 1),
            category="lead-actor",
            won=bool(i == award.winner),
        )
        for award in cohort.awards
        for i in award.nominees
    ]
    return serialize(performers, nominations)


@pytest.fixture(scope="module")
def dataset(tmp_path_factory) -> str:
    path = tmp_path_factory.mktemp("data") / "nominees.csv"
    path.write_text(_simulated_dataset_text(), encoding="utf-8")
    return str(path)


def test_gestimate_prints_estimate_and_writes_report(dataset, tmp_path, capsys):
    out = tmp_path / "rep"
    rc = main(["--out", str(out), "gestimate", "--data", dataset, "--step", "0.02"])
    assert rc == 0
    stdout = capsys.readouterr().out
    assert "p-value for no effect (psi=0):" in stdout
    assert "psi_hat = " in stdout
    assert "survival advantage" in stdout
    assert f"report written to {out}" in stdout
    for name in ("manifest.txt", "theta_curve.tsv", "diagnostics.tsv", "log.txt"):
        assert (out / name).exists()
    manifest = (out / "manifest.txt").read_text(encoding="utf-8").splitlines()
    assert manifest[0] == "awardsurv-report"
    assert any(line.startswith("meta\tdataset.sha256\t") for line in manifest)
    assert any(line.startswith("meta\tresult.psi_hat\t") for line in manifest)


def test_sensitivity_reports_each_odds_ratio(dataset, tmp_path, capsys):
    out = tmp_path / "rep"
    rc = main(
        [
            "--out", str(out), "sensitivity", "--data", dataset,
            "--theta-star-or", "1.0", "--step", "0.02",
        ]
    )
    assert rc == 0
    assert "OR=1: psi [" in capsys.readouterr().out
    assert (out / "sensitivity.tsv").exists()


def test_compare_prints_every_method(dataset, tmp_path, capsys):
    out = tmp_path / "rep"
    rc = main(["--out", str(out), "compare", "--data", dataset])
    assert rc == 0
    stdout = capsys.readouterr().out
    for name in (
        "cox-static-birthday",
        "cox-dynamic-birthday",
        "cox-dynamic-nomination",
        "cox-dynamic-nomination-history",
        "person-years",
    ):
        assert f"{name}: mortality reduction" in stdout
    table = (out / "comparison.tsv").read_text(encoding="utf-8").splitlines()
    assert len(table) == 6


def test_diagnose_reports_group_rows(dataset, tmp_path, capsys):
    out = tmp_path / "rep"
    rc = main(
        [
            "--out", str(out), "diagnose", "--data", dataset,
            "--groups", "4", "--step", "0.02",
        ]
    )
    assert rc == 0
    assert "8 diagnostic rows" in capsys.readouterr().out
    table = (out / "diagnostics.tsv").read_text(encoding="utf-8").splitlines()
    assert len(table) == 9


def test_simulate_writes_samples_and_means(tmp_path, capsys):
    out = tmp_path / "rep"
    rc = main(
        [
            "--out", str(out), "simulate", "--reps", "3", "--seed", "7",
            "--methods", "rpsaftm-gtest,person-years",
        ]
    )
    assert rc == 0
    stdout = capsys.readouterr().out
    assert "rpsaftm-gtest: mean p = " in stdout
    assert "person-years: mean p = " in stdout
    samples = (out / "p_values.tsv").read_text(encoding="utf-8").splitlines()
    assert len(samples) == 7
    means = (out / "comparison.tsv").read_text(encoding="utf-8").splitlines()
    assert len(means) == 3
    manifest = (out / "manifest.txt").read_text(encoding="utf-8")
    assert "meta\tconfig.caps\tnone" in manifest
    assert "meta\tconfig.seed\t7" in manifest


def test_simulate_accepts_caps(tmp_path, capsys):
    out = tmp_path / "rep"
    rc = main(
        [
            "--out", str(out), "simulate", "--reps", "2", "--seed", "3",
            "--caps", "2,2", "--methods", "discrete-hazard-lrt",
        ]
    )
    assert rc == 0
    manifest = (out / "manifest.txt").read_text(encoding="utf-8")
    assert "meta\tconfig.caps\t2,2" in manifest
    capsys.readouterr()


def test_simtables_writes_mortality_cells(tmp_path, capsys):
    out = tmp_path / "rep"
    rc = main(["--out", str(out), "simtables", "--reps", "3", "--seed", "2", "--caps", "2,2"])
    assert rc == 0
    assert "mortality cells over 3 replications" in capsys.readouterr().out
    assert (out / "mortality.tsv").exists()


def test_report_directory_from_environment(tmp_path, monkeypatch, capsys):
    env_dir = tmp_path / "from-env"
    monkeypatch.setenv("AWARDSURV_REPORT_DIR", str(env_dir))
    rc = main(["simulate", "--reps", "1", "--seed", "1", "--methods", "person-years"])
    assert rc == 0
    assert (env_dir / "manifest.txt").exists()
    capsys.readouterr()


def test_out_flag_overrides_environment(tmp_path, monkeypatch, capsys):
    env_dir = tmp_path / "from-env"
    out = tmp_path / "from-flag"
    monkeypatch.setenv("AWARDSURV_REPORT_DIR", str(env_dir))
    rc = main(
        [
            "--out", str(out), "simulate", "--reps", "1", "--seed", "1",
            "--methods", "person-years",
        ]
    )
    assert rc == 0
    assert (out / "manifest.txt").exists()
    assert not env_dir.exists()
    capsys.readouterr()


def test_missing_dataset_file_exits_1(tmp_path, capsys):
    rc = main(
        ["--out", str(tmp_path / "rep"), "gestimate", "--data", str(tmp_path / "absent.csv")]
    )
    assert rc == 1
    assert capsys.readouterr().err.startswith("error:")


def test_malformed_dataset_exits_1(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("definitely not a dataset\n", encoding="utf-8")
    rc = main(["--out", str(tmp_path / "rep"), "gestimate", "--data", str(bad)])
    assert rc == 1
    assert capsys.readouterr().err.startswith("error: line 1:")


def test_unknown_basis_is_usage_error(dataset, tmp_path, capsys):
    rc = main(
        [
            "--out", str(tmp_path / "rep"), "gestimate", "--data", dataset,
            "--basis", "poly9", "--step", "0.02",
        ]
    )
    assert rc == 2
    assert capsys.readouterr().err.startswith("usage error:")


def test_too_few_groups_is_usage_error(dataset, tmp_path, capsys):
    rc = main(
        [
            "--out", str(tmp_path / "rep"), "diagnose", "--data", dataset,
            "--groups", "1", "--step", "0.02",
        ]
    )
    assert rc == 2
    assert "usage error:" in capsys.readouterr().err


@pytest.mark.parametrize(
    "argv",
    [
        [],
        ["frobnicate"],
        ["gestimate"],
        ["gestimate", "--data", "x", "--range", "0.5"],
        ["gestimate", "--data", "x", "--censor-date", "07/25/2007"],
        ["sensitivity", "--data", "x"],
        ["simulate", "--methods", "no-such-method"],
        ["simulate", "--caps", "2"],
        ["simulate", "--scenario", "table9"],
    ],
    ids=[
        "no-subcommand",
        "unknown-subcommand",
        "missing-data",
        "bad-range",
        "bad-censor-date",
        "missing-odds-ratios",
        "unknown-method",
        "bad-caps",
        "unknown-scenario",
    ],
)
def test_argument_errors_exit_2(argv, capsys):
    with pytest.raises(SystemExit) as exc:
        main(argv)
    assert exc.value.code == 2
    capsys.readouterr()


def test_console_script_prints_usage():
    exe = shutil.which("awardsurv")
    if exe is None:
        pytest.skip("console script not installed")
    proc = subprocess.run([exe, "--help"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout.startswith("usage: awardsurv")
