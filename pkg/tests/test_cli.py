import csv
import io
import json
import math
import subprocess
import sys

import pytest

from freefit import __version__
from freefit.analysis import CSV_COLUMNS
from freefit.cli import (
    EXIT_DOMAIN,
    EXIT_IO,
    EXIT_OK,
    SweepConfig,
    UsageError,
    expand_grid,
    main,
    plot_script,
    render_csv,
    run_sweep,
)


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def report(out):
    rows = {}
    for line in out.splitlines():
        key, _, value = line.partition("  ")
        rows[key.strip()] = value.strip()
    return rows


def read_csv(text):
    lines = [ln for ln in text.splitlines() if not ln.startswith("#")]
    reader = csv.DictReader(io.StringIO("\n".join(lines)))
    return list(reader)


# dimer


def test_dimer_free_point(capsys):
    code, out, _ = run(capsys, "dimer", "--J", "1", "--U", "0", "--dv", "0")
    assert code == EXIT_OK
    r = report(out)
    assert float(r["E"]) == pytest.approx(-2.0, abs=1e-14)
    assert float(r["entropy"]) == pytest.approx(math.log(4), abs=1e-12)
    assert float(r["DF_four_level"]) == pytest.approx(0.0, abs=1e-15)


def test_dimer_large_u(capsys):
    code, out, _ = run(capsys, "dimer", "--J", "1", "--U", "100", "--dv", "0.5", "--json")
    assert code == EXIT_OK
    r = json.loads(out)
    assert r["DF_closed"] == pytest.approx(2e-6, rel=0.05)
    assert r["DF_four_level"] == pytest.approx(r["DF_closed"], abs=1e-10)
    for key in ("E", "spectrum", "entropy", "mu", "dv_ks"):
        assert key in r


def test_dimer_j_zero(capsys):
    code, _, err = run(capsys, "dimer", "--J", "0", "--U", "1", "--dv", "0.5")
    assert code == EXIT_DOMAIN
    assert "J must be nonzero" in err


# df


def test_df_appendix_file(tmp_path, capsys):
    path = tmp_path / "third.txt"
    path.write_text("# three equal levels\n1/3\n1/3\n1/3\n0\n")
    code, out, _ = run(capsys, "df", str(path))
    assert code == EXIT_OK
    r = report(out)
    assert float(r["df"]) == pytest.approx(1 / 6, abs=1e-12)
    assert r["branch"] == "matched-low-levels"
    assert [float(x) for x in r["b"].split()] == pytest.approx([0.0, 1 / 6], abs=1e-12)


def test_df_product_spectrum_file(tmp_path, capsys):
    path = tmp_path / "prod.txt"
    path.write_text("\n".join(repr(x) for x in (0.42, 0.28, 0.18, 0.12)) + "\n")  # (0.7,0.3) x (0.6,0.4)
    code, out, _ = run(capsys, "df", str(path))
    assert code == EXIT_OK
    assert float(report(out)["df"]) < 1e-8


def test_df_eight_levels_with_restart_log(tmp_path, capsys):
    path = tmp_path / "eight.txt"
    path.write_text("0.3\n0.2\n0.15\n0.12\n0.1\n0.08\n0.03\n0.02\n")
    code, out, err = run(capsys, "df", str(path), "--modes", "3")
    assert code == EXIT_OK
    r = report(out)
    assert r["branch"] == "numeric"
    assert float(r["df"]) == pytest.approx(1 / 30, abs=1e-8)
    assert err.count("# start") == 32


def test_df_model_flags(capsys):
    code, out, _ = run(capsys, "df", "--U", "100", "--dv", "0.5")
    assert code == EXIT_OK
    assert float(report(out)["df"]) == pytest.approx(2e-6, rel=0.05)


def test_df_malformed_file(tmp_path, capsys):
    path = tmp_path / "bad.txt"
    path.write_text("0.5\nabc\n")
    code, _, err = run(capsys, "df", str(path))
    assert code == EXIT_DOMAIN
    assert "line 2" in err


def test_df_missing_file_is_io_error(tmp_path, capsys):
    code, _, _ = run(capsys, "df", str(tmp_path / "absent.txt"))
    assert code == EXIT_IO


def test_df_needs_input(capsys):
    code, _, _ = run(capsys, "df")
    assert code == EXIT_DOMAIN


# ks and aux


def test_ks_command(capsys):
    code, out, _ = run(capsys, "ks", "--J", "1", "--U", "5", "--dv", "0.5", "--json")
    assert code == EXIT_OK
    r = json.loads(out)
    assert r["dv_ks"] == pytest.approx(0.038846942190672314, abs=1e-10)
    assert r["residual"] < 1e-10


def test_aux_command(capsys):
    code, out, _ = run(capsys, "aux", "--J", "1", "--mu", "3", "--json")
    assert code == EXIT_OK
    assert json.loads(out)["spectrum"] == pytest.approx([0.4, 0.4, 0.1, 0.1], abs=1e-12)
    code, out, _ = run(capsys, "aux", "--J", "1", "--U", "50", "--dv", "0.5", "--json")
    assert code == EXIT_OK
    assert json.loads(out)["mu"] / 50 == pytest.approx(1.0, abs=0.1)
    code, _, _ = run(capsys, "aux")
    assert code == EXIT_DOMAIN


# sweep


def test_sweep_writes_csv(tmp_path, capsys):
    out = tmp_path / "fig3.csv"
    gp = tmp_path / "fig3.gp"
    code, _, _ = run(capsys, "sweep", "--U-min", "0", "--U-max", "50", "--U-count", "11", "--out", str(out), "--plot-script", str(gp))
    assert code == EXIT_OK
    text = out.read_text()
    lines = text.splitlines()
    assert lines[0] == f"# freefit {__version__} sweep"
    assert lines[1].startswith("# config: ")
    assert lines[2] == ",".join(CSV_COLUMNS)
    rows = read_csv(text)
    assert len(rows) == 11
    assert [float(r["U"]) for r in rows] == pytest.approx([5.0 * k for k in range(11)])
    for r in rows:
        assert float(r["DF"]) <= float(r["Dtr_int_ks"]) + 1e-10
        assert float(r["Dn_int_ks"]) < 1e-8
    last = rows[-1]
    assert float(last["S_ks"]) == pytest.approx(math.log(4), abs=0.05)
    for c in ("S_int", "S_opt", "S_aux"):
        assert float(last[c]) == pytest.approx(math.log(2), abs=0.02)
    assert "using 1:3" in gp.read_text()


def test_sweep_single_point_u0_symmetric(capsys):
    code, out, _ = run(capsys, "sweep", "--U-values", "0", "--dv", "0")
    assert code == EXIT_OK
    (row,) = read_csv(out)
    for c in ("DF", "Dtr_int_ks", "Dtr_int_opt", "Dtr_ks_opt", "Dn_int_ks", "Dn_int_opt", "Dn_int_aux"):
        assert abs(float(row[c])) < 1e-10


def test_sweep_config_file_and_override(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"J": 1.0, "dv": 0.5, "U": [1.0, 2.0, 3.0], "columns": ["U", "DF"]}))
    code, out, _ = run(capsys, "sweep", "--config", str(cfg), "--dv", "0.25")
    assert code == EXIT_OK
    rows = read_csv(out)
    assert list(rows[0]) == ["U", "DF"]
    assert '"dv": 0.25' in out


def test_sweep_jobs_keeps_order(tmp_path, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert run(capsys, "sweep", "--U-count", "6", "--out", str(a))[0] == EXIT_OK
    assert run(capsys, "sweep", "--U-count", "6", "--out", str(b), "--jobs", "3")[0] == EXIT_OK
    assert a.read_bytes() == b.read_bytes()


def test_sweep_unwritable_path(tmp_path, capsys):
    code, _, err = run(capsys, "sweep", "--U-count", "2", "--out", str(tmp_path / "no" / "dir.csv"))
    assert code == EXIT_IO
    assert "I/O error" in err


@pytest.mark.parametrize(
    "argv",
    [
        ["--U-values", "3,2"],
        ["--U-count", "0"],
        ["--U-scale", "log", "--U-min", "0"],
        ["--columns", "U,bogus"],
        ["--columns", "DF"],
        ["--L", "2", "--n-up", "3"],
    ],
)
def test_sweep_config_errors(capsys, argv):
    code, _, _ = run(capsys, "sweep", *argv)
    assert code == EXIT_DOMAIN


def test_sweep_bad_config_json(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text("{not json")
    assert run(capsys, "sweep", "--config", str(cfg))[0] == EXIT_DOMAIN
    assert run(capsys, "sweep", "--config", str(tmp_path / "missing.json"))[0] == EXIT_IO


def test_seed_from_environment(monkeypatch, capsys):
    monkeypatch.setenv("FREEFIT_SEED", "17")
    code, out, _ = run(capsys, "sweep", "--U-values", "1")
    assert code == EXIT_OK and '"seed": 17' in out
    monkeypatch.setenv("FREEFIT_SEED", "x")
    assert run(capsys, "sweep", "--U-values", "1")[0] == EXIT_DOMAIN


def test_grid_helpers():
    assert expand_grid(1.0, 100.0, 3, "log") == pytest.approx((1.0, 10.0, 100.0))
    assert expand_grid(2.0, 9.0, 1) == (2.0,)
    with pytest.raises(UsageError):
        SweepConfig(U_grid=())
    with pytest.raises(UsageError):
        SweepConfig(U_grid=(1.0, 1.0))


def test_render_csv_is_17_digit():
    cfg = SweepConfig(U_grid=(0.1,), columns=("U", "E"))
    text = render_csv(cfg, run_sweep(cfg))
    value = text.splitlines()[-1].split(",")[0]
    assert value == "0.10000000000000001"
    assert "time" not in text.lower()


def test_plot_script_skips_missing_columns():
    script = plot_script("x.csv", ("U", "DF"))
    assert "DF" in script and "S_int" not in script


# verify


def test_verify_u0_slacks_vanish(capsys):
    code, out, _ = run(capsys, "verify", "--U-values", "0", "--observables", "50")
    assert code == EXIT_OK
    data = [ln for ln in out.splitlines() if not ln.startswith("#")]
    fields = data[0].split()
    # density and triangle slacks at U = 0
    for value in (fields[4], fields[5], fields[6]):
        assert abs(float(value)) < 1e-10


def test_verify_large_u_is_flagged_but_passes(capsys):
    code, out, _ = run(capsys, "verify", "--U-values", "20,50", "--observables", "100")
    assert code == EXIT_OK
    assert out.count("diverging") == 2


def test_verify_default_grid(capsys):
    code, out, _ = run(capsys, "verify", "--observables", "20")
    assert code == EXIT_OK
    assert "all hard bounds hold at 101 points" in out


def test_verify_reports_violation(monkeypatch, capsys):
    import freefit.cli as cli

    monkeypatch.setattr(cli, "density_bound_constant", lambda n: 1e-6)
    code, _, err = run(capsys, "verify", "--U-values", "5", "--observables", "5")
    assert code == 1
    assert "bound violation" in err and "U=5" in err


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "freefit", "--version"], capture_output=True, text=True)
    assert res.returncode == 0 and __version__ in res.stdout
