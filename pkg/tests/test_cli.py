import json
import subprocess
import sys
from fractions import Fraction

import pytest

from extremal import cli
from extremal.certnum import Interval
from extremal.reports import Certificate, interval, rational


def run_cli(*args, tmp_path=None):
    argv = list(args)
    report = None
    if tmp_path is not None:
        report = tmp_path / "report.json"
        argv += ["--report", str(report)]
    code = cli.main(argv)
    data = json.loads(report.read_text()) if report is not None and report.exists() else None
    return code, data


CASES = [
    # (argv, expected exit code)
    (["slice", "ratio", "--n", "4", "--a", "1,1,0,0"], 0),
    (["slice", "ratio", "--n", "5", "--a", "1,1,0,0,0"], 1),
    (["slice", "poincare", "--n", "6", "--a", "3,1,-2,0,0,-2"], 0),
    (["slice", "poincare", "--n", "6"], 1),
    (["slice", "spectrum", "--n", "6"], 0),
    (["slice", "spectrum", "--n", "12"], 1),
    (["slice", "search", "--n", "4", "--restarts", "4"], 0),
    (["slice", "search", "--n", "13"], 1),
    (["moment-ratio", "--m", "2", "--N", "50"], 0),
    (["moment-ratio", "--m", "3", "--N", "8", "--walsh-check"], 0),
    (["moment-ratio", "--m", "0"], 1),
    (["autoconv", "sup", "--values", "1,1,1"], 0),
    (["autoconv", "sup", "--values", "0,0"], 1),
    (["autoconv", "search", "--cells", "6", "--m", "3"], 0),
    (["autoconv", "search", "--cells", "10", "--m", "6", "--budget", "100"], 2),
    (["autoconv", "search", "--cells", "0", "--m", "3"], 1),
    (["autoconv", "young-check", "--values", "1/3,1/3,0"], 0),
    (["autoconv", "young-check", "--values", "1,-1"], 1),
    (["autoconv", "chain", "--b", "1.3204", "--m", "50", "--target", "1.2802"], 0),
    (["autoconv", "chain", "--b", "1.3", "--m", "50", "--target", "1.2802"], 2),
    (["autoconv", "chain", "--b", "x", "--m", "50"], 1),
    (["sidon", "check", "--set", "1,2,5,11"], 0),
    (["sidon", "check", "--set", "1,2,3"], 2),
    (["sidon", "check", "--set", "0,1"], 1),
    (["sidon", "beta", "--n", "7"], 0),
    (["sidon", "beta", "--n", "0"], 1),
    (["gauss-perimeter", "p", "--n", "20", "--r", "4", "--rho", "2"], 0),
    (["gauss-perimeter", "p", "--n", "1", "--r", "4"], 1),
    (["gauss-perimeter", "asymptote", "--n", "10000"], 0),
    (["gauss-perimeter", "asymptote", "--n", "2"], 1),
    (["gauss-perimeter", "certify", "--h", "1/100", "--target", "0.35"], 2),
    (["gauss-perimeter", "certify", "--h", "5/7"], 1),
    (["manifest"], 0),
    (["no-such-command"], 1),
    (["slice", "ratio", "--n", "4", "--a", "1,1,0,0", "--bogus"], 1),
]


@pytest.mark.parametrize("argv,expected", CASES, ids=[" ".join(c[0]) for c in CASES])
def test_exit_codes(argv, expected, capsys):
    assert cli.main(argv) == expected


def test_gauss_certify_report(tmp_path):
    code, data = run_cli("gauss-perimeter", "certify", tmp_path=tmp_path)
    assert code == 0
    assert data["status"] == "certified"
    assert data["claim_id"] == "thm1-gaussian-perimeter"
    for key in ("params", "T_lo", "J_lo", "M_hi", "prefactor_lo", "constant_lower"):
        assert key in data
    assert Fraction(data["constant_lower"]) >= Fraction(312584, 10**6)
    assert Fraction(data["J_lo"]) >= Fraction("0.33310555154594")
    assert Fraction(data["M_hi"]) < Fraction("6.476")
    assert data["params"] == {"a": "6131/5000", "b": "2387/1000", "W": "6", "h": "1/2000"}


def test_slice_ratio_report(tmp_path):
    code, data = run_cli("slice", "ratio", "--n", "4", "--a", "1,1,0,0", tmp_path=tmp_path)
    assert code == 0
    assert data["outputs"]["ratio_sq"] == {"kind": "rational", "value": "1/3"}


def test_autoconv_sup_report(tmp_path):
    code, data = run_cli("autoconv", "sup", "--values", "2,2,2,2", tmp_path=tmp_path)
    assert data["outputs"]["ratio"]["value"] == "2"


def test_sidon_reports_counting_convention(tmp_path):
    _, data = run_cli("sidon", "check", "--set", "1,2,3", "--g", "2", tmp_path=tmp_path)
    assert "unordered" in data["outputs"]["convention"]["value"]
    assert data["outputs"]["max_ordered_representations"]["value"] == 3


def test_chain_report_is_labelled_external(tmp_path):
    _, data = run_cli("autoconv", "chain", "--b", "1.3204", "--m", "50", tmp_path=tmp_path)
    assert data["status"] == "diagnostic"
    assert data["outputs"]["refined_bound"]["value"] == "6401/5000"
    assert "external input" in data["outputs"]["b_source"]["value"]


def test_every_output_carries_a_kind(tmp_path):
    for argv, code in CASES:
        if code == 1 or argv == ["manifest"]:
            continue
        _, data = run_cli(*argv, tmp_path=tmp_path)
        for value in data["outputs"].values():
            assert value["kind"] in ("rational", "interval", "float-diagnostic", "data")


def test_reports_are_byte_identical(tmp_path):
    argv = ["slice", "search", "--n", "6", "--restarts", "6", "--seed", "9"]
    first, second = tmp_path / "a.json", tmp_path / "b.json"
    cli.main(argv + ["--report", str(first)])
    cli.main(argv + ["--report", str(second)])
    assert first.read_bytes() == second.read_bytes()
    data = json.loads(first.read_text())
    assert data["seed"] == 9
    assert "wall_time_ms" not in data


def test_timing_flag_adds_wall_time(tmp_path):
    _, data = run_cli("sidon", "beta", "--n", "6", "--timing", tmp_path=tmp_path)
    assert isinstance(data["wall_time_ms"], int)


def test_global_flags_before_subcommand(tmp_path):
    report = tmp_path / "r.json"
    assert cli.main(["--report", str(report), "sidon", "beta", "--n", "7"]) == 0
    assert json.loads(report.read_text())["outputs"]["beta"]["value"] == 4


def test_args_file(tmp_path):
    args = tmp_path / "args.txt"
    args.write_text("slice\nratio\n# comment\n--n 6\n--a 1,1,0,0,0,0\n")
    report = tmp_path / "r.json"
    assert cli.main(["--args-file", str(args), "--report", str(report)]) == 0
    assert json.loads(report.read_text())["outputs"]["ratio_sq"]["value"] == "2/5"


def test_missing_args_file_is_an_error(tmp_path):
    assert cli.main(["--args-file", str(tmp_path / "missing.txt")]) == 1


def test_manifest_entries(capsys):
    assert cli.main(["manifest"]) == 0
    out = capsys.readouterr().out
    assert "thm1 → gauss-perimeter certify" in out
    assert "thm2 → moment-ratio" in out
    assert "thm3 → slice {ratio, poincare, spectrum, search}" in out
    assert "thm4 → autoconv {young-check, chain}" in out
    assert "sidon {check, beta}" in out


def test_run_config_rejects_unknown_subcommand():
    with pytest.raises(cli.UsageError):
        cli.run(cli.RunConfig("frobnicate"))


def test_run_returns_certificate():
    cert, code = cli.run(cli.RunConfig.from_argv(["sidon", "beta", "--n", "7"]))
    assert code == 0 and cert.outputs["witness"]["value"] == [1, 2, 5, 7]


def test_certificate_schema_checks():
    with pytest.raises(ValueError):
        Certificate("x", {}, {}, "maybe", "0")
    with pytest.raises(ValueError):
        Certificate("x", {}, {"bad": 1.0}, "certified", "0")


def test_interval_serialisation_rounds_outward():
    iv = Interval(0.1, 0.1)
    out = interval(iv)
    assert Fraction(out["lo"]) <= Fraction(0.1) <= Fraction(out["hi"])
    assert rational(Fraction(6, 4)) == {"kind": "rational", "value": "3/2"}


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "extremal", "sidon", "beta", "--n", "5"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert "beta = 3" in proc.stdout
