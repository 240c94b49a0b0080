import json
import subprocess
import sys

import pytest

from localfield import cli


def run_cli(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_order2_single_channel(capsys):
    code, out, _ = run_cli(capsys, "order2", "--channel", "1,1")
    assert code == 0
    meta, rows = cli.read_csv(out)
    assert meta["command"] == "order2" and meta["parameters"]["channel"] == "1,1"
    assert rows[0]["channel"] == "1,1"
    assert rows[0]["principal_value"] == pytest.approx(15 / 112, abs=1e-3)


def test_cavity_virtual(capsys):
    code, out, _ = run_cli(capsys, "cavity", "--model", "virtual", "--order", "2")
    assert code == 0
    _, rows = cli.read_csv(out)
    assert [r["coefficient"] for r in rows] == pytest.approx([1, 7 / 6, 17 / 24], abs=1e-6)


def test_order2_total(capsys):
    code, out, _ = run_cli(capsys, "order2", "--all", "--contacts", "--total")
    assert code == 0
    _, rows = cli.read_csv(out)
    assert len(rows) == 10
    total = rows[-1]
    assert total["channel"] == "total"
    assert total["total"] == pytest.approx(17 / 24, abs=1e-3)
    assert total["principal_value"] == pytest.approx(71 / 72, abs=1e-3)


def test_report_default(capsys):
    code, out, _ = run_cli(capsys, "report")
    assert code == 0
    _, rows = cli.read_csv(out)
    values = [r["coefficient"] for r in rows]
    for want in (7 / 6, 71 / 72, 17 / 24, 19 / 72):
        assert min(abs(v - want) for v in values) < 1e-3


def test_report_grid(capsys):
    code, out, _ = run_cli(capsys, "report", "--n-alpha-grid", "0:0.3:0.05")
    assert code == 0
    _, rows = cli.read_csv(out)
    assert len(rows) == 7
    assert rows[0]["virtual"] == 1.0 and rows[0]["real"] == 1.0
    assert rows[-1]["n_alpha"] == pytest.approx(0.3)


def test_report_empty_grid(capsys):
    code, out, _ = run_cli(capsys, "report", "--n-alpha-grid", "")
    assert code == 0
    body = [ln for ln in out.splitlines() if not ln.startswith("#")]
    assert body == ["n_alpha,virtual,real,micro_principal,micro_contacts"]


def test_propagator_with_kernel(capsys):
    code, out, _ = run_cli(capsys, "propagator", "--rho", "2.5", "--theta", "0.7",
                           "--radial", "j", "--kernel", "--format", "json")
    assert code == 0
    meta, rows = cli.read_json(out)
    assert len(rows) == 9
    for r in rows:
        assert r["re"] == pytest.approx(r["kernel_re"], abs=1e-8)
        assert r["im"] == pytest.approx(r["kernel_im"], abs=1e-8)


@pytest.mark.parametrize("fmt", ["csv", "json"])
def test_round_trip_bit_exact(capsys, tmp_path, fmt):
    path = tmp_path / f"out.{fmt}"
    code, _, _ = run_cli(capsys, "contacts", "--format", fmt, "--output", str(path))
    assert code == 0
    text = path.read_text()
    meta, rows = cli.read_csv(text) if fmt == "csv" else cli.read_json(text)
    assert meta["significant_digits"] == 12
    assert meta["version"] and meta["python"]
    for r in rows:
        v = r["contact_value"]
        assert cli.format_number(v) in text
        assert float(cli.format_number(v)) == v


def test_provenance_reproduces(capsys, tmp_path):
    # the stored parameters are enough to rerun and get identical output
    first = tmp_path / "a.csv"
    code, _, _ = run_cli(capsys, "ensemble", "--n-atoms", "30", "--sample-radius", "6",
                         "--n-samples", "8", "--seed", "5", "--output", str(first))
    assert code == 0
    meta, _ = cli.read_csv(first.read_text())
    assert meta["seed"] == 5
    argv = ["ensemble", "--output", str(tmp_path / "b.csv")]
    for k, v in meta["parameters"].items():
        if v is None or v is False:
            continue
        argv += ["--" + k.replace("_", "-"), str(v)]
    assert cli.main(argv) == 0
    assert (tmp_path / "b.csv").read_text() == first.read_text()


def test_config_file_and_override(capsys, tmp_path):
    ini = tmp_path / "run.ini"
    ini.write_text("[cavity]\nmodel = real\norder = 1\nformat = json\n")
    code, out, _ = run_cli(capsys, "cavity", "--config", str(ini))
    assert code == 0
    meta, rows = cli.read_json(out)
    assert [r["coefficient"] for r in rows] == pytest.approx([1, 7 / 6], abs=1e-9)
    code, out, _ = run_cli(capsys, "cavity", "--config", str(ini), "--order", "2")
    _, rows = cli.read_json(out)
    assert rows[-1]["coefficient"] == pytest.approx(19 / 72, abs=1e-9)


def test_config_errors(capsys, tmp_path):
    code, _, err = run_cli(capsys, "order2", "--channel", "2,0")
    assert code == cli.EXIT_CONFIG
    assert json.loads(err)["error"] == "config"
    code, _, _ = run_cli(capsys, "order2")
    assert code == cli.EXIT_CONFIG
    code, _, _ = run_cli(capsys, "cavity", "--order", "two")
    assert code == cli.EXIT_CONFIG
    code, _, _ = run_cli(capsys, "order1", "--epsilons", "0.1,0.2")
    assert code == cli.EXIT_CONFIG
    bad = tmp_path / "bad.ini"
    bad.write_text("[cavity\nmodel=real\n")
    code, _, _ = run_cli(capsys, "cavity", "--config", str(bad))
    assert code == cli.EXIT_CONFIG
    ini = tmp_path / "extra.ini"
    ini.write_text("[cavity]\nwidth = 3\n")
    code, _, _ = run_cli(capsys, "cavity", "--config", str(ini))
    assert code == cli.EXIT_CONFIG


def test_convergence_exit(capsys):
    code, _, err = run_cli(capsys, "order1", "--epsilons", "2.0,1.0,0.5,0.25",
                           "--extrapolation-order", "1", "--tolerance", "1e-12")
    assert code == cli.EXIT_CONVERGENCE
    assert json.loads(err)["error"] == "convergence"


def test_io_exit(capsys, tmp_path):
    code, _, err = run_cli(capsys, "cavity", "--output", str(tmp_path / "missing" / "x.csv"))
    assert code == cli.EXIT_IO
    assert json.loads(err)["exit"] == cli.EXIT_IO
    code, _, _ = run_cli(capsys, "cavity", "--config", str(tmp_path / "nope.ini"))
    assert code == cli.EXIT_IO


def test_format_number():
    assert cli.format_number(1 / 3) == "0.333333333333"
    assert cli.format_number(7) == "7"
    assert cli.format_number(True) == "true"
    assert cli.format_number(None) == ""


def test_module_entry_point_help():
    res = subprocess.run([sys.executable, "-m", "localfield", "order2", "--help"],
                         capture_output=True, text=True, timeout=60)
    assert res.returncode == 0
    assert "--channel" in res.stdout
