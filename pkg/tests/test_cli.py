import csv
import io
import subprocess
import sys

import pytest

from catqkd.cli import KEYS, RunConfig, main


def run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_every_key_has_a_flag():
    from catqkd.cli import build_parser

    text = build_parser()._subparsers._group_actions[0].choices["state"].format_help()
    for key in KEYS:
        assert "--" + key.replace("_", "-") in text


def test_state_tmsv(capsys):
    code, out, _ = run(["state", "--V", "5"], capsys)
    assert code == 0
    (r,) = rows(out)
    assert float(r["P"]) == 1.0 and float(r["V_A_q"]) == 5.0
    assert float(r["V_C_q"]) == pytest.approx(24**0.5, rel=1e-8)


def test_state_zero_pc(capsys):
    _, out, _ = run(["state", "--lambda", "0.6", "--T-C", "0.64"], capsys)
    (r,) = rows(out)
    assert float(r["P"]) == pytest.approx(0.8316, abs=1e-4)
    assert out.splitlines()[1].endswith(",0.831600832")


def test_state_displacement_changes_m1(capsys):
    _, a, _ = run(["state", "--lambda", "0.6", "--T-C", "0.8", "--m", "1"], capsys)
    _, b, _ = run(["state", "--lambda", "0.6", "--T-C", "0.8", "--m", "1", "--d", "1"], capsys)
    ra, rb = rows(a)[0], rows(b)[0]
    assert ra["V_A_q"] != rb["V_A_q"] and ra["V_B_p"] != rb["V_B_p"]


def test_keyrate_format_and_monotone(capsys):
    code, out, _ = run(["keyrate", "--V", "15", "--start", "0", "--stop", "100", "--step", "5"], capsys)
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "L_km,I_AB,chi_BE,P,K"
    data = rows(out)
    assert len(data) == 21
    for line in lines[1:]:
        for field in line.split(","):
            mantissa = field.lstrip("-").split("e")[0].replace(".", "").lstrip("0")
            assert len(mantissa) <= 9
    K = [float(r["K"]) for r in data]
    assert all(b < a for a, b in zip(K, K[1:]))
    assert K[0] > 1e-5 and K[-1] < 1e-5


def test_keyrate_respects_bob_distance(capsys):
    code, _, err = run(["keyrate", "--V", "5", "--L-BC", "10", "--start", "0", "--stop", "20", "--step", "5"], capsys)
    assert code == 1 and "sweep.start" in err


def test_output_is_deterministic(tmp_path, capsys):
    args = ["optimize", "--V", "15", "--start", "60", "--stop", "70", "--step", "10",
            "--n-d", "6", "--n-T", "16"]
    outs = []
    for jobs in ("1", "1", "2"):
        path = tmp_path / f"out{len(outs)}.csv"
        assert main(args + ["--jobs", jobs, "--output", str(path)]) == 0
        outs.append(path.read_bytes())
    assert outs[0] == outs[1] == outs[2]


def test_optimize_fixed_variance_families(capsys):
    code, out, _ = run(["optimize", "--V", "5", "--start", "70", "--stop", "70", "--step", "1"], capsys)
    assert code == 0
    data = rows(out)
    assert [r["family"] for r in data] == ["TMSV", "0-PC", "1-PC"]
    K = [float(r["K"]) for r in data]
    assert max(K) - min(K) <= 1e-3 * max(K)


def test_optimize_all_reports_variance_trace(capsys):
    code, out, _ = run(["optimize", "--mode", "all", "--families", "tmsv", "--start", "20",
                        "--stop", "60", "--step", "40"], capsys)
    assert code == 0
    V = [float(r["V"]) for r in rows(out)]
    assert len(V) == 2 and V[0] > V[1] > 1


def _maxdist(capsys, *extra):
    # displacement penalties at small d are second order, so bisect finely
    code, out, _ = run(["maxdist", "--mode", "none", "--V", "15", "--bisect-tol", "1e-5", *extra], capsys)
    assert code == 0
    return [float(r["L_max_km"]) for r in rows(out)]


def test_maxdist_transmissivity_claims(capsys):
    tmsv = _maxdist(capsys)[0]
    for T in ("0.98", "0.94"):
        no_disp = _maxdist(capsys, "--m", "1", "--T-C", T)[0]
        best_disp = max(_maxdist(capsys, "--m", "1", "--T-C", T, "--variable", "d",
                                 "--start", "0.25", "--stop", "5", "--step", "0.25"))
        if T == "0.98":
            assert no_disp > tmsv and no_disp > best_disp
        else:
            assert best_disp > tmsv and no_disp < tmsv


def test_config_file_and_override(tmp_path, capsys):
    cfg = tmp_path / "run.ini"
    cfg.write_text("[state]\nV = 5\nm = 1\nT_C = 0.9\n[protocol]\nbeta = 0.95\n")
    _, a, _ = run(["state", "--config", str(cfg)], capsys)
    _, b, _ = run(["state", "--config", str(cfg), "--T-C", "1"], capsys)
    assert rows(a)[0]["T_C"] == "0.9" and rows(b)[0]["T_C"] == "1"
    assert rows(b)[0]["P"] == "1"
    c = RunConfig.from_sources("state", {"V": 5.0}, {})
    assert c.beta == 0.96 and c.V == 5.0


@pytest.mark.parametrize(
    "argv, field",
    [
        (["state", "--V", "0.5"], "state.V"),
        (["state", "--V", "5", "--lambda", "0.5"], "state.lambda"),
        (["state", "--V", "5", "--m", "4"], "state.m"),
        (["state", "--V", "5", "--m-max", "1", "--m", "2"], "state.m"),
        (["state", "--V", "5", "--T-C", "0"], "state.T_C"),
        (["state", "--V", "abc"], "state.V"),
        (["keyrate", "--V", "5"], "sweep.start"),
        (["keyrate", "--V", "5", "--start", "0", "--stop", "10", "--step", "0"], "sweep.step"),
        (["optimize", "--mode", "none", "--start", "0", "--stop", "1", "--step", "1"], "optimize.mode"),
        (["optimize", "--mode", "sideways", "--start", "0", "--stop", "1", "--step", "1"], "optimize.mode"),
        (["optimize", "--start", "0", "--stop", "1", "--step", "1"], "state.V"),
        (["optimize", "--V", "5", "--families", "tmsv,x", "--start", "0", "--stop", "1", "--step", "1"],
         "optimize.families"),
        (["maxdist", "--V", "5", "--target-K", "-1"], "maxdist.target_K"),
        (["maxdist", "--mode", "all", "--variable", "d", "--start", "0", "--stop", "1", "--step", "1"],
         "sweep.variable"),
        (["verify", "--N-cut", "5"], "oracle.N_cut"),
        (["state", "--V", "5", "--beta", "2"], "protocol.beta"),
    ],
)
def test_validation_errors(argv, field, capsys):
    code, out, err = run(argv, capsys)
    assert code == 1 and field in err and out == ""


def test_config_errors(tmp_path, capsys):
    bad = tmp_path / "bad.ini"
    bad.write_text("[state]\nfoo = 1\n")
    code, _, err = run(["state", "--config", str(bad)], capsys)
    assert code == 1 and "foo" in err
    misplaced = tmp_path / "misplaced.ini"
    misplaced.write_text("[protocol]\nV = 5\n")
    code, _, err = run(["state", "--config", str(misplaced)], capsys)
    assert code == 1 and "state.V" in err
    code, _, err = run(["state", "--config", str(tmp_path / "missing.ini")], capsys)
    assert code == 1


def test_unknown_flag_is_validation_error(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["state", "--bogus", "1"])
    assert exc.value.code == 1


def test_maxdist_unreachable_reports_nan(capsys):
    code, out, _ = run(["maxdist", "--mode", "none", "--V", "1.01", "--target-K", "0.5"], capsys)
    assert code == 0 and rows(out)[0]["L_max_km"] == "nan"


def test_verify_passes(capsys):
    code, out, _ = run(["verify"], capsys)
    assert code == 0
    assert out.count("PASS") == 6 and "FAIL" not in out


def test_verify_mismatch_exit_code(capsys):
    code, out, _ = run(["verify", "--tol", "1e-12"], capsys)
    assert code == 2 and "FAIL" in out


def test_cutoff_is_integrity_failure(capsys):
    code, _, err = run(["verify", "--N-cut", "20"], capsys)
    assert code == 2 and "N_cut" in err


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "catqkd.cli", "state", "--V", "5"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0 and proc.stdout.startswith("m,lambda,V")
