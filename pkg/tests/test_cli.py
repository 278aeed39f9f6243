import io
import json

import pytest

from lca.cli import (
    ConfigError,
    bundled_config,
    load,
    main,
    module_from_presentation,
    module_presentation,
)
from lca.poly import parse_poly


@pytest.fixture
def cfg():
    return bundled_config()


def run_cli(args):
    out = io.StringIO()
    code = main(args, out=out)
    return code, out.getvalue()


def test_bundled_config_loads(cfg):
    ws = load(cfg)
    assert set(ws.algebras) == {"Vir"}
    assert set(ws.modules) == {"M", "Mp", "T"}
    assert set(ws.iops) == {"F"}
    assert ws.vt.params == ("Delta", "alpha", "Deltap", "alphap")


def test_empty_file_gives_empty_workspace(tmp_path):
    path = tmp_path / "empty.lca"
    path.write_text("")
    ws = load(str(path))
    assert not ws.algebras and not ws.modules and not ws.iops


def test_undeclared_parameter_is_named(tmp_path):
    path = tmp_path / "bad.lca"
    path.write_text(
        "[algebra A]\ngenerators a\na a : a = beta*lam\n"
    )
    with pytest.raises(ConfigError, match="beta"):
        load(str(path))


def test_duplicate_name_rejected_per_kind(tmp_path):
    path = tmp_path / "dup.lca"
    path.write_text(
        "[algebra A]\ngenerators a\n"
        "[module X over A]\ngenerators x\n"
        "[module X over A]\ngenerators y\n"
    )
    with pytest.raises(ConfigError, match="duplicate"):
        load(str(path))
    # the same name for different kinds is fine
    path2 = tmp_path / "ok.lca"
    path2.write_text("[algebra A]\ngenerators a\n[module A over A]\ngenerators x\n")
    ws = load(str(path2))
    assert "A" in ws.algebras and "A" in ws.modules


def test_dangling_reference_rejected(tmp_path):
    path = tmp_path / "dangling.lca"
    path.write_text("[module M over Nowhere]\ngenerators m\n")
    with pytest.raises(ConfigError, match="Nowhere"):
        load(str(path))


def test_parse_error_carries_line_number(tmp_path):
    path = tmp_path / "syntax.lca"
    path.write_text("[params]\nDelta\n[algebra A]\ngenerators a\na a : a = lam + +\n")
    with pytest.raises(ConfigError, match="syntax.lca:5"):
        load(str(path))


def test_check_commands_exit_zero(cfg):
    for args in (
        [cfg, "check-algebra", "Vir"],
        [cfg, "check-module", "M"],
        [cfg, "check-iop", "F"],
    ):
        code, text = run_cli(args)
        assert code == 0
        assert "PASS" in text


def test_unknown_name_is_usage_error(cfg):
    code, _ = run_cli([cfg, "check-algebra", "Nope"])
    assert code == 2


def test_failing_check_exits_one(tmp_path):
    path = tmp_path / "bad.lca"
    path.write_text("[algebra A]\ngenerators a\na a : a = 3*lam + del\n")
    code, text = run_cli([str(path), "check-algebra", "A"])
    assert code == 1
    assert "FAIL" in text


def test_dual_command_prints_table(cfg):
    code, text = run_cli([cfg, "dual", "M"])
    assert code == 0
    assert "(-Delta*lam + lam + del - alpha)*m_d" in text


def test_chom_act_command(cfg):
    code, text = run_cli([cfg, "chom-act", "L", "M"])
    assert code == 0
    assert "(L_lam m_d)_mu(m) = -Delta*lam + lam - mu - alpha" in text


def test_tensor_both_methods(cfg, tmp_path):
    json_path = tmp_path / "tensor.json"
    code, text = run_cli([cfg, "tensor", "M", "Mp", "--method", "both", "--json", str(json_path)])
    assert code == 0
    assert "cross-check" in text
    payload = json.loads(json_path.read_text())
    assert payload["first"]["ok"] and payload["second"]["ok"]
    assert payload["cross_check"]["passed"]
    assert payload["second"]["candidate"]["side_conditions"] == []


def test_tensor_json_round_trip(cfg, tmp_path):
    json_path = tmp_path / "tensor.json"
    run_cli([cfg, "tensor", "M", "Mp", "--method", "first", "--json", str(json_path)])
    payload = json.loads(json_path.read_text())
    ws = load(cfg)
    rebuilt = module_from_presentation(payload["first"]["module"], ws.algebras["Vir"])
    expected = parse_poly("(Delta + Deltap - 1)*lam + del + alpha + alphap", ws.vt)
    assert rebuilt.table[0][0][0] == expected
    # and re-emitting the presentation reproduces identical tables
    assert module_presentation(rebuilt) == payload["first"]["module"]


def test_tensor_trunc_option(cfg, tmp_path):
    code, _ = run_cli([cfg, "tensor", "M", "Mp", "--method", "first", "--trunc", "uniform:2"])
    assert code == 1  # closure failure at level 2
    table = tmp_path / "trunc.json"
    table.write_text(json.dumps({"default": 1, "m,mp": 1}))
    code, _ = run_cli([cfg, "tensor", "M", "Mp", "--method", "first", "--trunc", str(table)])
    assert code == 0


def test_report_command_deterministic(cfg, tmp_path):
    j1, j2 = tmp_path / "r1.json", tmp_path / "r2.json"
    code1, text1 = run_cli([cfg, "report", "--json", str(j1)])
    code2, text2 = run_cli([cfg, "report", "--json", str(j2)])
    assert code1 == code2 == 0
    assert text1 == text2
    assert j1.read_bytes() == j2.read_bytes()


def test_usage_error_exit_code(cfg):
    assert run_cli(["/nonexistent/config.lca", "report"])[0] == 2
    assert run_cli([cfg, "no-such-command"])[0] == 2
