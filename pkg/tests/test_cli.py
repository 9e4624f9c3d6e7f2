import json
import math
import subprocess
import sys

import jsonschema
import pytest

from harmonic_schwarz.cli import main

ENVELOPE_SCHEMA = {
    "type": "object",
    "required": ["meta"],
    "properties": {
        "meta": {
            "type": "object",
            "required": ["tool", "version", "p", "q", "n"],
        },
        "rows": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["r", "a_star", "g_p"],
                "additionalProperties": False,
                "properties": {
                    "r": {"type": "number"},
                    "a_star": {"type": "number"},
                    "g_p": {"type": "number"},
                },
            },
        },
        "report": {"type": "object"},
    },
}


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def parse_csv(out):
    lines = out.strip().splitlines()
    meta = [l for l in lines if l.startswith("#")]
    body = [l for l in lines if not l.startswith("#")]
    header = body[0].split(",")
    rows = [dict(zip(header, line.split(","))) for line in body[1:]]
    return meta, header, rows


def test_gp_closed_form_row(capsys):
    code, out, _ = run_cli(capsys, "gp", "--p", "2", "--n", "3", "--r-grid", "0.5")
    assert code == 0
    meta, header, rows = parse_csv(out)
    assert header == ["r", "a_star", "g_p"]
    assert len(rows) == 1
    assert abs(float(rows[0]["a_star"]) - 1.0) < 1e-11
    want = math.sqrt(1.25 / 0.5625 - 1.0)
    assert abs(float(rows[0]["g_p"]) - want) < 1e-9
    assert any("tool" in line for line in meta)


def test_gp_pinf_value(capsys):
    code, out, _ = run_cli(
        capsys, "gp", "--p", "inf", "--n", "2", "--r-grid", "0.5", "--format", "json"
    )
    assert code == 0
    payload = json.loads(out)
    jsonschema.validate(payload, ENVELOPE_SCHEMA)
    got = payload["rows"][0]["g_p"]
    assert abs(got - (4.0 / math.pi) * math.atan(0.5)) < 1e-9


def test_gp_rejects_small_p(capsys):
    code, out, err = run_cli(capsys, "gp", "--p", "0.5", "--n", "3", "--r-grid", "0.5")
    assert code == 2
    assert "p must be >= 1" in err


def test_gp_grid_range_row_count(capsys):
    code, out, _ = run_cli(
        capsys, "gp", "--p", "2", "--n", "2", "--r-grid", "0.1:0.9:0.1"
    )
    assert code == 0
    _, _, rows = parse_csv(out)
    assert len(rows) == 9
    assert [float(r["r"]) for r in rows] == pytest.approx(
        [0.1 * k for k in range(1, 10)]
    )


def test_gp_grid_validation(capsys):
    code, _, err = run_cli(capsys, "gp", "--p", "2", "--n", "2", "--r-grid", "0.5,0.4")
    assert code == 2 and "increasing" in err
    code, _, err = run_cli(capsys, "gp", "--p", "2", "--n", "2", "--r-grid", "0.9995")
    assert code == 2 and "0.999" in err


def test_gp_missing_flag_is_usage_error(capsys):
    code, _, _ = run_cli(capsys, "gp", "--p", "2", "--n", "3")
    assert code == 2


def test_sharp_constant_values(capsys):
    code, out, _ = run_cli(
        capsys, "sharp-constant", "--p", "2", "--n", "3", "--format", "json"
    )
    assert code == 0
    payload = json.loads(out)
    assert abs(payload["report"]["sharp_gradient_constant"] - math.sqrt(3)) < 1e-9

    code, out, _ = run_cli(
        capsys, "sharp-constant", "--p", "inf", "--n", "2", "--format", "json"
    )
    assert abs(json.loads(out)["report"]["sharp_gradient_constant"] - 4 / math.pi) < 1e-9


def test_sharp_constant_limit_case(capsys):
    code, out, _ = run_cli(
        capsys, "sharp-constant", "--p", "1", "--n", "4", "--format", "json"
    )
    assert code == 0
    payload = json.loads(out)
    assert payload["report"]["sharp_gradient_constant"] == 4
    assert "limit" in payload["meta"]["limit_case"]


def test_verify_sharpness_passes(capsys):
    code, out, _ = run_cli(
        capsys,
        *"verify sharpness --p 2 --n 3 --R 0.5 --format json".split(),
    )
    assert code == 0
    payload = json.loads(out)
    jsonschema.validate(payload, ENVELOPE_SCHEMA)
    ratio = payload["report"]["checks"][0]["value"]
    assert abs(ratio - 1.0) < 1e-8
    assert payload["report"]["pass"] is True


def test_verify_sharpness_out_of_range_radius(capsys):
    code, _, err = run_cli(
        capsys, *"verify sharpness --p 2 --n 3 --R 1.5".split()
    )
    assert code == 2
    assert "R must lie in (0, 1)" in err


def test_verify_sharpness_degraded_nodes_fails(capsys):
    # starving the quadrature is a computational failure, not a usage error
    code, out, _ = run_cli(
        capsys,
        *"verify sharpness --p 2 --n 3 --R 0.6 --nodes 8 --format json".split(),
    )
    assert code == 1
    payload = json.loads(out)
    assert payload["report"]["pass"] is False
    assert "extremal_ratio" in payload["report"]["failures"]


def test_verify_bound_small_batch(capsys):
    code, out, _ = run_cli(
        capsys,
        *(
            "verify bound --p 2 --n 2 --samples 5 --degree 6 --seed 42 "
            "--trials 10 --format json"
        ).split(),
    )
    assert code == 0
    payload = json.loads(out)
    checks = {c["name"]: c for c in payload["report"]["checks"]}
    assert checks["pointwise_bound_violations"]["value"] == 0


def test_verify_gradient(capsys):
    code, out, _ = run_cli(
        capsys, *"verify gradient --p 3 --n 4 --format json".split()
    )
    assert code == 0
    payload = json.loads(out)
    assert payload["report"]["pass"] is True


def test_verify_corollary(capsys):
    code, out, _ = run_cli(
        capsys,
        *"verify corollary --n 3 --samples 10 --seed 7 --format json".split(),
    )
    assert code == 0
    assert json.loads(out)["report"]["pass"] is True


def test_in_process_determinism(capsys):
    args = ["gp", "--p", "1.7", "--n", "3", "--r-grid", "0.2,0.4,0.6"]
    _, first, _ = run_cli(capsys, *args)
    _, second, _ = run_cli(capsys, *args)
    assert first == second


def test_subprocess_determinism_bytes():
    cmd = [
        sys.executable,
        "-m",
        "harmonic_schwarz.cli",
        "verify",
        "bound",
        "--p", "2", "--n", "2", "--samples", "2", "--degree", "4",
        "--seed", "11", "--trials", "5", "--format", "json",
    ]
    a = subprocess.run(cmd, capture_output=True)
    b = subprocess.run(cmd, capture_output=True)
    assert a.returncode == 0
    assert a.stdout == b.stdout


def test_output_file(tmp_path, capsys):
    target = tmp_path / "rows.csv"
    code, out, _ = run_cli(
        capsys, "gp", "--p", "2", "--n", "2", "--r-grid", "0.3", "--out", str(target)
    )
    assert code == 0
    assert out == ""
    meta, header, rows = parse_csv(target.read_text())
    assert len(rows) == 1


def test_n_validation(capsys):
    code, _, err = run_cli(capsys, "gp", "--p", "2", "--n", "1", "--r-grid", "0.5")
    assert code == 2
    assert "n must be >= 2" in err
