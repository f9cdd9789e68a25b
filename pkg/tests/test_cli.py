import json
from pathlib import Path

import numpy as np
import pytest

from germsolver import cli
from germsolver.errors import ParseError, ValidationError

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


def run_cli(*argv):
    return cli.main([str(a) for a in argv])


def test_parse_error_has_position(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text('{"fluxes": {"both": "burgers"},\n "germ": }')
    with pytest.raises(ParseError) as exc:
        cli.parse_config(p)
    assert "line 2" in str(exc.value)


def test_unknown_keys_rejected():
    with pytest.raises(ValidationError):
        cli.config_from_dict({"fluxes": {"both": "burgers"}, "colour": 1})
    with pytest.raises(ValidationError):
        cli.config_from_dict({"fluxes": {"both": "burgers"}, "mesh": {"dx": 0.1, "nx": 3}})


def test_config_round_trip():
    cfg = cli.parse_config(FIXTURES / "bell_connection.json")
    again = cli.config_from_dict(cli.serialize(cfg), FIXTURES)
    assert cli.serialize(again) == cli.serialize(cfg)


def test_simulate_writes_outputs_deterministically(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    cfg = FIXTURES / "burgers_vv_riemann.json"
    assert run_cli("simulate", cfg, "--out", a, "--dx", 0.05) == 0
    assert run_cli("simulate", cfg, "--out", b, "--dx", 0.05) == 0
    for name in ("field.csv", "traces.csv", "report.json"):
        assert (a / name).read_bytes() == (b / name).read_bytes()
    assert (a / "field.csv").read_text().startswith("# germ-solver-v1")
    sol = cli.read_solution(a / "field.csv")
    assert np.allclose(sol.field[0][sol.x < 0], 1.0)


def test_riemann_command(tmp_path, capsys):
    assert run_cli("riemann", FIXTURES / "burgers_vv_riemann.json", "--out", tmp_path) == 0
    payload = json.loads((tmp_path / "riemann.json").read_text())
    assert payload["interface_flux"] == pytest.approx(0.0)
    assert (tmp_path / "profile.csv").exists()


def test_riemann_ambiguous_exit_code(tmp_path):
    code = run_cli("riemann", FIXTURES / "krt_tent.json", "--u-minus", -0.25, "--u-plus", 1.25,
                   "--out", tmp_path)
    assert code == 4


def test_germ_analyze(tmp_path, capsys):
    assert run_cli("germ", FIXTURES / "krt_tent.json", "--analyze", "--out", tmp_path) == 0
    payload = json.loads((tmp_path / "germ.json").read_text())
    assert payload["definiteness"]["verdict"] == "not-definite"
    assert not payload["l1d"]["ok"]
    assert (tmp_path / "germ.csv").read_text().startswith("# germ-solver-v1")


def test_viscous_profile(tmp_path, capsys):
    assert run_cli("viscous", FIXTURES / "burgers_vv_riemann.json", "--out", tmp_path) == 0
    prof = json.loads((tmp_path / "profile.json").read_text())
    assert prof["verdict"] == "connects"


def test_verify_pass_and_fail(tmp_path, capsys):
    cfg = FIXTURES / "burgers_vv_riemann.json"
    run_cli("simulate", cfg, "--out", tmp_path / "run", "--dx", 0.02)
    field = tmp_path / "run" / "field.csv"
    assert run_cli("verify", cfg, "--field", field) == 0
    # corrupt the field: flip the sign everywhere after t = 0
    lines = field.read_text().splitlines()
    out = [lines[0], lines[1]]
    for line in lines[2:]:
        t, x, u = line.split(",")
        if float(t) > 0:
            u = repr(-float(u))
        out.append(",".join((t, x, u)))
    bad = tmp_path / "bad.csv"
    bad.write_text("\n".join(out) + "\n")
    assert run_cli("verify", cfg, "--field", bad) == 5
    assert run_cli("verify", cfg, "--field", bad, "--informational") == 0


def test_sweep(tmp_path, capsys):
    src = json.loads((FIXTURES / "burgers_vv_riemann.json").read_text())
    src["mesh"] = {"dx": 0.05, "x_extent": 1.0, "t_end": 0.2}
    p = tmp_path / "cfg.json"
    p.write_text(json.dumps(src))
    assert run_cli("sweep", p, "--eps", "0.1,0.05", "--out", tmp_path / "sw") == 0
    rows = (tmp_path / "sw" / "summary.csv").read_text().splitlines()
    assert len(rows) == 4
    assert (tmp_path / "sw" / "reference" / "field.csv").exists()


def test_missing_file_exit_code(tmp_path):
    assert run_cli("simulate", tmp_path / "nope.json") != 0
