"""Command line behavior: output formats, determinism, exit codes."""

from __future__ import annotations

import math
import subprocess

import numpy as np
import pytest

import sublap.cli
from sublap.cli import main
from sublap.spectral import CertifyEntry, CertifyResult

VALID_SPEC = """\
name demo
dim_h 2
dim_v 1
bracket 1 2 = -1 3
bracket 1 3 = 1 2
bracket 2 3 = -1 1
"""

BROKEN_SPEC = """\
name broken
dim_h 2
dim_v 1
bracket 1 2 = 1 3
bracket 2 3 = 1 2
"""


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_validate_builtin(capsys):
    code, out, _ = run(capsys, "validate", "so4_twisted", "--param", "b=0.3")
    assert code == 0
    assert out == "so4_twisted: ok (dim_h=5, dim_v=1)\n"


def test_validate_spec_file(capsys, tmp_path):
    path = tmp_path / "demo.txt"
    path.write_text(VALID_SPEC, encoding="utf-8")
    code, out, _ = run(capsys, "validate", str(path))
    assert code == 0
    assert out == "demo: ok (dim_h=2, dim_v=1)\n"


def test_validate_reports_violations(capsys, tmp_path):
    path = tmp_path / "broken.txt"
    path.write_text(BROKEN_SPEC, encoding="utf-8")
    code, out, err = run(capsys, "validate", str(path))
    assert code == 3
    assert "invalid: Jacobi identity violated" in out + err


def test_unknown_spec_name(capsys):
    code, out, err = run(capsys, "bound", "nosuch")
    assert code == 2
    assert "neither a builtin name nor a file" in out + err


def test_bad_parameter_values(capsys):
    code, out, err = run(capsys, "bound", "so3_twisted", "--param", "c=abc")
    assert code == 2
    assert "not a number" in out + err
    code, out, err = run(capsys, "bound", "so3_twisted", "--param", "q=1")
    assert code == 2
    assert "unknown parameter override" in out + err


def test_commands_refuse_invalid_spaces(capsys, tmp_path):
    path = tmp_path / "broken.txt"
    path.write_text(BROKEN_SPEC, encoding="utf-8")
    code, out, err = run(capsys, "bound", str(path))
    assert code == 3
    assert "invalid:" in err


def test_classify_output(capsys):
    code, out, _ = run(capsys, "classify", "so3_twisted", "--param", "c=0.2")
    assert code == 0
    assert out == (
        "example = so3_twisted\n"
        "h_rigid = yes\n"
        "v_rigid = yes\n"
        "totally_rigid = yes\n"
        "h_normal = no\n"
        "v_normal = yes\n"
        "strictly_normal = no\n"
        "vm_integrable = yes\n"
        "almost_strictly_normal = yes\n"
    )


def test_analyze_text_output(capsys):
    code, out, _ = run(capsys, "analyze", "so3_twisted")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "example = so3_twisted"
    assert "kappa = 1" in lines
    assert "sigma = 0" in lines
    assert "sup_t2 = 0" in lines
    assert "sub_ricci[1][1] = 1" in lines
    assert "gram_tau_h[3][3] = 2" in lines


def test_analyze_csv_output(capsys):
    code, out, _ = run(capsys, "analyze", "so4_alt", "--format", "csv")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "key,value"
    assert lines[1] == "example,so4_alt"
    assert "kappa,2" in lines


def test_bound_csv_output(capsys):
    code, out, _ = run(
        capsys, "bound", "so3_twisted", "--format", "csv", "--x-grid", "200"
    )
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "example,theorem,bound,x,rho1,rho2,omega,chi,psi,m"
    assert len(lines) == 5
    theorems = [line.split(",")[1] for line in lines[1:]]
    assert theorems == ["asn", "main", "sntf", "t1zero"]
    assert all(abs(float(line.split(",")[2]) - 0.5) < 1e-8 for line in lines[1:])


def test_bound_text_output(capsys):
    code, out, _ = run(capsys, "bound", "so4_alt", "--x-grid", "100")
    assert code == 0
    assert out.startswith("example = so4_alt\n")
    assert "theorem = sntf" in out
    assert "best = " in out


def test_bound_output_is_deterministic(capsys):
    args = ("bound", "twisted_spheres", "--format", "csv", "--x-grid", "80")
    _, first, _ = run(capsys, *args)
    _, second, _ = run(capsys, *args)
    assert first == second


def test_certify_builtin(capsys):
    code, out, _ = run(capsys, "certify", "so3_twisted", "--x-grid", "100")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "example = so3_twisted"
    assert lines[1] == "lambda1 = 1 at irrep (1)"
    assert lines[2] == "tail = rigorous tail (commuting vertical images)"
    assert all(line.endswith("-> PASS") for line in lines[3:])


def test_certify_requires_a_spectral_model(capsys, tmp_path):
    path = tmp_path / "plain.txt"
    path.write_text(VALID_SPEC, encoding="utf-8")
    code, out, err = run(capsys, "certify", str(path))
    assert code == 2
    assert "needs a spectral model" in out + err


def test_certify_rejects_a_low_cutoff(capsys):
    code, out, err = run(
        capsys, "certify", "so4_alt", "--x-grid", "100", "--cutoff", "1.8"
    )
    assert code == 3
    assert "four times" in out + err


def test_certify_failure_exit_code(monkeypatch, capsys):
    fake = CertifyResult(
        example="so3_twisted",
        lambda1=1.0,
        witness="(1)",
        rigorous=True,
        tail_note="rigorous tail (commuting vertical images)",
        entries=[CertifyEntry("main", 2.0, False)],
    )
    monkeypatch.setattr(
        sublap.cli, "certify", lambda space, report, cutoff=None: fake
    )
    code, out, _ = run(capsys, "certify", "so3_twisted", "--x-grid", "60")
    assert code == 4
    assert "main: bound 2 -> FAIL" in out


def test_report_sweep_with_frontier_column(capsys):
    code, out, _ = run(
        capsys, "report", "so4_twisted", "--sweep", "b=0:0.2:3",
        "--x-grid", "60", "--rho2-grid", "60",
    )
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == (
        "b,example,theorem,bound,x,rho1,rho2,omega,chi,psi,m,x_frontier"
    )
    # four theorems at b=0, three once the parallel-torsion trace is lost
    assert len(lines) == 1 + 4 + 3 + 3
    for line in lines[1:]:
        cells = line.split(",")
        b = float(cells[0])
        q = 0.25 * b * b / (1.0 + b * b)
        want = ((1.0 - q) + 2.0 * math.sqrt(1.0 - q)) / (3.0 + q)
        assert abs(float(cells[-1]) - want) < 1e-10
    values: dict[float, list[float]] = {}
    for line in lines[1:]:
        cells = line.split(",")
        values.setdefault(float(cells[0]), []).append(float(cells[3]))
    for b, bounds in values.items():
        # every theorem refines to the same optimum on this family
        assert max(bounds) - min(bounds) < 1e-6, b


def test_report_sweep_without_frontier(capsys):
    code, out, _ = run(
        capsys, "report", "so3_twisted", "--sweep", "c=0:0.2:2",
        "--x-grid", "60", "--rho2-grid", "60",
    )
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "c,example,theorem,bound,x,rho1,rho2,omega,chi,psi,m"
    assert len(lines) == 1 + 4 + 1


def test_report_rejects_malformed_sweeps(capsys):
    for sweep in ("b=0:0.2", "=0:1:3", "b=0:1:0"):
        code, out, err = run(capsys, "report", "so4_twisted", "--sweep", sweep)
        assert code == 2, sweep


def test_console_script_is_installed():
    proc = subprocess.run(
        ["sublap", "validate", "so4_alt"], capture_output=True, text=True
    )
    assert proc.returncode == 0
    assert proc.stdout == "so4_alt: ok (dim_h=3, dim_v=3)\n"
