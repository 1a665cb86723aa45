import json

import pytest

from symplab import cli


def run(capsys, argv):
    code = cli.main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


OSCILLATOR = {
    "n": 2,
    "components": [
        [["1", 0, 0, 1, 0]],
        [["1", 0, 0, 0, 1]],
        [["1", 1, 0, 0, 0], ["-1", 0, 1, 0, 0]],
        [["-1/2", 1, 0, 0, 0], ["1/2", 0, 1, 0, 0]],
    ],
    "x0": [1.0, 0.5, 0.25, -0.3],
}

SQUARE_CHAIN = {
    "n": 2,
    "l": 1,
    "orders": [4, 4],
    "maps": [[["1", 0, 1]], [], [["1", 1, 0]], []],
}


@pytest.fixture
def oscillator_file(tmp_path):
    path = tmp_path / "osc.field"
    path.write_text(json.dumps(OSCILLATOR))
    return str(path)


@pytest.fixture
def chain_file(tmp_path):
    path = tmp_path / "square.chain"
    path.write_text(json.dumps(SQUARE_CHAIN))
    return str(path)


def test_sl2_check(capsys):
    code, out, _ = run(capsys, ["sl2-check", "--n", "2"])
    assert code == 0
    assert "all identities hold on 16 blades" in out
    assert "f-hat(omega) = 2: ok" in out


def test_cohomology_torus_betti(capsys):
    code, out, _ = run(capsys, ["cohomology", "torus6.alg", "--betti"])
    assert code == 0
    assert out == "betti: 1 6 15 20 15 6 1\n"


def test_cohomology_nilm_el(capsys):
    code, out, _ = run(capsys, ["cohomology", "nilm6.alg", "--el"])
    assert code == 0
    assert "k=1:3" in out and "k=2:2" in out


def test_cohomology_machine_format(capsys):
    code, out, _ = run(
        capsys, ["cohomology", "nilm6", "--betti", "--el", "--format", "machine"]
    )
    assert code == 0
    lines = out.splitlines()
    assert "betti.1=3" in lines
    assert "betti.2=4" in lines
    assert "el_dim.1=3" in lines
    assert "el_dim.2=2" in lines


def test_reports_are_byte_identical(capsys):
    argv = ["cohomology", "nilm6", "--betti", "--el", "--harmonic"]
    _, out1, _ = run(capsys, argv)
    _, out2, _ = run(capsys, argv)
    assert out1 == out2


def test_cohomology_missing_file(capsys):
    code, _, err = run(capsys, ["cohomology", "/nonexistent/x.alg"])
    assert code == 2
    assert "input error" in err


def test_cohomology_parse_error_diagnostics(capsys, tmp_path):
    bad = tmp_path / "bad.alg"
    bad.write_text('{"dim": 6,,}')
    code, _, err = run(capsys, ["cohomology", str(bad)])
    assert code == 2
    assert "line 1" in err and "column" in err


def test_classify(capsys, oscillator_file):
    code, out, _ = run(capsys, ["classify", oscillator_file, "--k", "1"])
    assert code == 0
    assert "symplectic_like: false" in out
    code, out, _ = run(capsys, ["classify", oscillator_file, "--k", "2"])
    assert code == 0
    assert "symplectic_like: true" in out
    assert "potential:" in out


def test_classify_bad_k(capsys, oscillator_file):
    code, _, err = run(capsys, ["classify", oscillator_file, "--k", "5"])
    assert code == 2


def test_from_two_form(capsys, tmp_path):
    h_mono = [
        ["1/2", 2, 0, 0, 0],
        ["1/2", 0, 2, 0, 0],
        ["1/2", 0, 0, 2, 0],
        ["1/2", 0, 0, 0, 2],
    ]
    path = tmp_path / "ham.twoform"
    path.write_text(json.dumps({"n": 2, "A": [[1, 1, h_mono], [2, 2, h_mono]]}))
    code, out, _ = run(capsys, ["from-two-form", str(path)])
    assert code == 0
    assert "dq1/dt = p1" in out
    assert "dp1/dt = -q1" in out
    assert "contraction_identity: verified" in out
    assert "divergence: 0" in out


def test_from_two_form_antisymmetry_violation(capsys, tmp_path):
    path = tmp_path / "bad.twoform"
    path.write_text(json.dumps({"n": 2, "Q": [[1, 1, [["1", 0, 0, 0, 0]]]]}))
    code, _, err = run(capsys, ["from-two-form", str(path)])
    assert code == 2


def test_chain_command(capsys, chain_file):
    code, out, _ = run(capsys, ["chain", chain_file])
    assert code == 0
    assert "value: 0.999" in out or "value: 1.0" in out
    assert "degenerate: false" in out


def test_flow_tangent_only(capsys, oscillator_file):
    code, out, _ = run(
        capsys, ["flow", oscillator_file, "--t", "2", "--dt", "0.001"]
    )
    assert code == 0
    assert "divergence_zero: true" in out
    assert "max_det_drift:" in out


def test_flow_tolerance_failure_exit(capsys, oscillator_file):
    code, _, _ = run(
        capsys,
        ["flow", oscillator_file, "--t", "2", "--dt", "0.001", "--tol", "1e-20"],
    )
    assert code == 1


def test_flow_missing_x0(capsys, tmp_path):
    data = dict(OSCILLATOR)
    data.pop("x0")
    path = tmp_path / "osc.field"
    path.write_text(json.dumps(data))
    code, _, err = run(capsys, ["flow", str(path), "--t", "1", "--dt", "0.01"])
    assert code == 2
    assert "x0" in err


def test_flow_chain_hypothesis_exit(capsys, oscillator_file, chain_file):
    code, out, _ = run(
        capsys,
        ["flow", oscillator_file, "--t", "1", "--dt", "0.001", "--chain", chain_file],
    )
    assert code == 3
    assert "hypothesis_ok: false" in out
    assert "not applicable" in out


def test_flow_x0_override(capsys, tmp_path):
    data = dict(OSCILLATOR)
    data.pop("x0")
    path = tmp_path / "osc.field"
    path.write_text(json.dumps(data))
    code, out, _ = run(
        capsys,
        ["flow", str(path), "--t", "1", "--dt", "0.01", "--x0", "1,0.5,0.25,-0.3"],
    )
    assert code == 0
    assert "max_det_drift:" in out


def test_flow_embedded_chain(capsys, tmp_path):
    data = dict(OSCILLATOR)
    data["chain"] = SQUARE_CHAIN
    path = tmp_path / "osc.field"
    path.write_text(json.dumps(data))
    code, out, _ = run(capsys, ["flow", str(path), "--t", "1", "--dt", "0.01"])
    assert code == 3  # the embedded 2-chain hits the symplectic hypothesis
    assert "hypothesis_ok: false" in out


def test_chain_degenerate_flag(capsys, tmp_path):
    degenerate = {
        "n": 2,
        "l": 1,
        "orders": [2, 2],
        "maps": [[["1", 0, 0]], [], [], []],
    }
    path = tmp_path / "flat.chain"
    path.write_text(json.dumps(degenerate))
    code, out, _ = run(capsys, ["chain", str(path)])
    assert code == 0
    assert "degenerate: true" in out
    assert "value: 0.0" in out


def test_flow_chain_machine_format(capsys, oscillator_file, chain_file):
    code, out, _ = run(
        capsys,
        [
            "flow", oscillator_file, "--t", "1", "--dt", "0.001",
            "--chain", chain_file, "--format", "machine",
        ],
    )
    assert code == 3
    keys = {line.split("=")[0] for line in out.splitlines()}
    assert {"initial", "final", "abs_drift", "rel_drift", "hypothesis_ok"} <= keys


def test_cohomology_custom_file(capsys, tmp_path):
    path = tmp_path / "kt4.alg"
    path.write_text(
        json.dumps(
            {
                "dim": 4,
                "d": [[1, 2, 4, "1"]],
                "omega": [[1, 3, "1"], [2, 4, "1"]],
            }
        )
    )
    code, out, _ = run(capsys, ["cohomology", str(path), "--betti", "--el"])
    assert code == 0
    assert "betti: 1 3 4 3 1" in out
    assert "k=1:3 k=2:3" in out


def test_cohomology_rejects_bad_structure(capsys, tmp_path):
    # d(th3^th4) = -th3^th1^th2 != 0: omega not closed for this structure
    path = tmp_path / "bad.alg"
    path.write_text(
        json.dumps(
            {"dim": 4, "d": [[1, 2, 4, "1"]], "omega": [[1, 2, "1"], [3, 4, "1"]]}
        )
    )
    code, _, err = run(capsys, ["cohomology", str(path)])
    assert code == 2
    assert "not closed" in err


def test_paper_verify(capsys):
    code, out, _ = run(capsys, ["paper-verify", "--format", "machine"])
    assert code == 0
    lines = out.splitlines()
    assert "suite.status=pass" in lines
    assert "nilmanifold-m6.status=pass" in lines
    assert "nilmanifold-m6.el_dim_2=2" in lines
    assert "torus-t6.harmonic_3=20" in lines
    assert "area-laws.status=pass" in lines
