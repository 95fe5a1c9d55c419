import pytest

from hyperqss.cli import CSV_COLUMNS, main, parse_sweep, read_config, UsageError


def run_cli(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_sweep_header_and_rows(capsys):
    code, out, _ = run_cli(capsys, "sweep", "--sweep", "0:20:10")
    assert code == 0
    lines = out.splitlines()
    assert lines[0].startswith("# alpha_convention=quarter gain_variant=printed")
    assert lines[1] == ",".join(CSV_COLUMNS)
    assert len(lines) == 5
    assert lines[2].split(",")[0] == "0.00000e+00"


def test_sweep_switches_reach_output(capsys):
    code, out, _ = run_cli(
        capsys, "sweep", "--sweep", "5:5:1", "--alpha-convention", "full",
        "--variant", "recomputed",
    )
    assert code == 0
    row = dict(zip(CSV_COLUMNS, out.splitlines()[2].split(",")))
    assert float(row["Rt"]) == pytest.approx(1.998475e-03, rel=1e-5)


def test_sweep_files_deterministic(tmp_path):
    outs = []
    for i in range(2):
        csv, svg = tmp_path / f"r{i}.csv", tmp_path / f"r{i}.svg"
        assert main(["sweep", "--sweep", "0:300:10", "--out", str(csv), "--chart", str(svg)]) == 0
        outs.append((csv.read_bytes(), svg.read_bytes()))
    assert outs[0] == outs[1]
    assert outs[0][1].lstrip().startswith(b"<?xml")


@pytest.mark.parametrize("spec", ["0:10:0", "10:0:1", "a:b:c", "0:10"])
def test_bad_sweep(spec):
    with pytest.raises(UsageError):
        parse_sweep(spec)


def test_usage_errors_exit_one(capsys):
    assert run_cli(capsys, "sweep", "--sweep", "0:10:0")[0] == 1
    assert run_cli(capsys, "point", "--p", "2")[0] == 1
    assert run_cli(capsys, "point", "--distance", "-3")[0] == 1
    with pytest.raises(SystemExit) as exc:
        main(["point", "--bogus"])
    assert exc.value.code == 1
    with pytest.raises(SystemExit) as exc:
        main([])
    assert exc.value.code == 1


def test_config_file_and_override(tmp_path, capsys, monkeypatch):
    cfg = tmp_path / "params.cfg"
    cfg.write_text("# test\np = 2e-3\npd=1e-6\nvariant = recomputed\n")
    assert read_config(str(cfg))["p"] == 2e-3
    _, from_file, _ = run_cli(capsys, "point", "--config", str(cfg))
    assert "gain_variant=recomputed" in from_file
    monkeypatch.setenv("HYPERQSS_CONFIG", str(cfg))
    _, from_env, _ = run_cli(capsys, "point")
    assert from_env == from_file
    _, overridden, _ = run_cli(capsys, "point", "--p", "1e-3")
    assert overridden != from_file


def test_bad_config(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("colour = blue\n")
    code, _, err = run_cli(capsys, "point", "--config", str(cfg))
    assert code == 1 and "unknown key" in err
    assert run_cli(capsys, "point", "--config", str(tmp_path / "nope"))[0] == 1


def test_unwritable_output(capsys, tmp_path):
    code, _, err = run_cli(capsys, "timing", "--out", str(tmp_path / "no" / "x.txt"))
    assert code == 1 and "x.txt" in err


def test_point_report(capsys):
    code, out, _ = run_cli(capsys, "point", "--distance", "50")
    assert code == 0
    assert "Q1" in out and "Rt" in out and "L=50 km" in out


def test_degenerate_point_exit(capsys):
    code, _, err = run_cli(capsys, "point", "--etac", "0", "--pd", "0")
    assert code == 2 and "degenerate" in err


def test_timing(capsys):
    code, out, _ = run_cli(capsys, "timing")
    assert code == 0 and "69.4%" in out


def test_verify_table(capsys):
    code, out, _ = run_cli(capsys, "verify-table")
    assert code == 0 and "PASS" in out and "checksum" in out


def test_simulate_accept_and_abort(capsys, tmp_path):
    common = ["--p", "0.5", "--multipair", "off", "--pd", "0", "--fp", "1", "--fm", "1",
              "--alpha-convention", "full", "--pulses", "20000", "--seed", "3"]
    code, out, _ = run_cli(capsys, "simulate", *common)
    assert code == 0 and "accepted" in out
    hist = tmp_path / "h.csv"
    code, out, _ = run_cli(capsys, "simulate", *common, "--attack", "intercept-resend",
                           "--histogram", str(hist))
    assert code == 2 and "aborted" in out
    assert hist.read_text().startswith("triple,count\n")


def test_simulate_deterministic(capsys):
    argv = ["simulate", "--p", "1e-2", "--pd", "1e-3", "--distance", "10",
            "--pulses", "100000", "--seed", "42"]
    assert run_cli(capsys, *argv)[1] == run_cli(capsys, *argv)[1]
