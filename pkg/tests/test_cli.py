"""
Tests for the command-line frontend: payloads, written files and exit codes
"""

import json

import pytest
from loguru import logger

from src import cli
from src.config import load_config
from src.errors import ContractViolation

LAPLACE = "laplace:0.7071067811865476"


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr().out
    return code, (json.loads(out) if code == 0 else None)


def test_divergence(capsys):
    code, payload = run(capsys, "divergence", "--family", LAPLACE, "--n", "16")
    assert code == 0
    assert {"d", "kl_pq", "kl_qp", "l1"} <= set(payload)
    assert payload["d"] > 0


def test_sweep_writes_reports(capsys, tmp_path):
    out = tmp_path / "sweep"
    code, payload = run(capsys, "sweep", "--ns", "8:64", "--output-dir", str(out))
    assert code == 0
    assert payload["rows"] == 4
    assert payload["failed"] == []
    assert all(payload["invariants"].values())
    assert payload["chosen"] in ("log_over_sqrt", "inv_sqrt", "inv", "power")
    assert payload["expected_regime"] == "inv"
    for name in ("sweep.csv", "sweep.json", "sweep.svg"):
        assert (out / name).exists()


def test_report_refits_a_bundle(capsys, tmp_path):
    run(capsys, "sweep", "--ns", "8:64", "--format", "json", "--output-dir", str(tmp_path))
    code, payload = run(
        capsys, "report", str(tmp_path / "sweep.json"), "--output-dir", str(tmp_path / "re"),
        "--format", "csv",
    )
    assert code == 0
    assert payload["metric"] == "d"
    assert (tmp_path / "re" / "report.csv").exists()


def test_dump_config(capsys, tmp_path):
    path = tmp_path / "effective.yaml"
    code, _ = run(
        capsys, "divergence", "--family", LAPLACE, "--n", "8", "--dump-config", str(path)
    )
    assert code == 0
    config = load_config(path)
    assert config.families == [LAPLACE]
    assert config.n == 8


def test_config_file_and_flag_precedence(capsys, tmp_path):
    path = tmp_path / "run.json"
    path.write_text(json.dumps({"schema": 1, "families": [LAPLACE], "n": 4}))
    dumped = tmp_path / "effective.json"
    code, _ = run(
        capsys, "divergence", "--config", str(path), "--n", "8", "--dump-config", str(dumped)
    )
    assert code == 0
    config = load_config(dumped)
    assert config.families == [LAPLACE]
    assert config.n == 8


def test_bad_config_file_exits_with_validation_code(capsys, tmp_path):
    path = tmp_path / "run.json"
    path.write_text(json.dumps({"schema": 1, "unknown": True}))
    code, _ = run(capsys, "divergence", "--config", str(path))
    assert code == 2


def test_compact_support_minorant_is_a_validation_error(capsys):
    code, _ = run(capsys, "verify", "minorant", "--family", "uniform:-1.732,1.732", "--n", "4")
    assert code == 2


def test_gaussian_minorant_propagates(capsys):
    code, payload = run(capsys, "verify", "minorant", "--family", "gaussian:0,1", "--n", "4")
    assert code == 0
    assert payload["holds"] is True


def test_tail_params_attach_rescale(capsys):
    code, payload = run(capsys, "verify", "tail-params", "--family", "gaussian:0,1", "--n", "8")
    assert code == 0
    assert payload["k2"] == pytest.approx(2.0)
    assert payload["rescale"]["a"] == pytest.approx(8.0)
    assert payload["delta1_exceeds_quarter"]


def test_truncation_needs_large_n(capsys):
    code, _ = run(capsys, "verify", "truncation", "--family", LAPLACE, "--n", "4")
    assert code == 2


def test_contract_violation_exit_code(capsys, monkeypatch):
    def violated(config, args):
        raise ContractViolation("d <= I1 + I2 + I3 + I4", -0.5)

    monkeypatch.setitem(cli.COMMANDS, "divergence", violated)
    code = cli.main(["divergence"])
    captured = capsys.readouterr()
    assert code == 3
    assert "contract violated" in captured.err


def test_single_laplace_summand_divergence(capsys):
    code, payload = run(capsys, "divergence", "--family", "laplace:1", "--n", "1")
    assert code == 0
    assert payload["d"] > 0


@pytest.mark.parametrize(
    "alias, name", [("propA1", "minorant"), ("propA2", "tail-params"), ("property24", "tail-bound")]
)
def test_verify_check_aliases(capsys, alias, name):
    flags = ("--family", "gaussian:0,1", "--n", "8")
    assert run(capsys, "verify", alias, *flags) == run(capsys, "verify", name, *flags)


def test_h1_alias_runs_the_truncation_check(capsys):
    code, _ = run(capsys, "verify", "h1", "--family", LAPLACE, "--n", "4")
    assert code == 2


def test_decompose_default_family(capsys, tmp_path):
    code, payload = run(capsys, "decompose", "--n", "16", "--output-dir", str(tmp_path))
    assert code == 0
    assert payload["slack"] >= -1e-8


def test_parser_setup_logs_nothing():
    messages = []
    logger.add(messages.append, level="DEBUG")
    cli.build_parser()
    assert messages == []


def test_zero_bias_and_stein(capsys, tmp_path):
    code, payload = run(capsys, "zero-bias", "--family", LAPLACE, "--output-dir", str(tmp_path))
    assert code == 0
    assert payload["second_moment"] == pytest.approx(2.0)
    assert max(payload["identity_residuals"].values()) < 1e-6
    assert (tmp_path / "zero_bias.csv").exists()

    code, payload = run(
        capsys, "stein", "--function", "tanh", "--check", "--output-dir", str(tmp_path)
    )
    assert code == 0
    assert payload["bounds"] is not None
    assert (tmp_path / "stein_tanh.csv").exists()


def test_edgeworth_table(capsys, tmp_path):
    code, payload = run(
        capsys, "edgeworth", "--ns", "8,16", "--k", "1", "--output-dir", str(tmp_path)
    )
    assert code == 0
    assert [(r["n"], r["k"]) for r in payload] == [(8, 0), (8, 1), (16, 0), (16, 1)]


def test_decompose_gaussian(capsys, tmp_path):
    code, payload = run(
        capsys, "decompose", "--family", "gaussian:0,1", "--n", "64", "--output-dir", str(tmp_path)
    )
    assert code == 0
    assert payload["slack"] >= -1e-12
    assert (tmp_path / "decomposition.csv").exists()


def test_unknown_subcommand():
    with pytest.raises(SystemExit):
        cli.main(["integrate"])
