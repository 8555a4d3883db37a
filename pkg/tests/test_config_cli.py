import math
import os
import re

import pytest
from hypothesis import given
from hypothesis import strategies as st

from cuspforge.cli import main
from cuspforge.config import (
    SUBCOMMANDS,
    ConfigErrors,
    ParseError,
    ValidationError,
    format_result,
    parse_config,
    parse_result,
)


def test_defaults():
    cfg = parse_config("", "cusp")
    assert cfg.subcommand == "cusp"
    assert cfg.tol == 1e-10 and cfg.seed == 0 and cfg.threads == 1 and cfg.out == "."
    assert cfg.params["profile"] == "exp" and cfg.params["n"] == 3


def test_sections_and_values():
    text = """
    # comment
    [run]
    subcommand = invisibility
    tol = 1e-9   # trailing comment
    [invisibility]
    horizons = 5, 10
    cells = 1e4
    """
    cfg = parse_config(text)
    assert cfg.subcommand == "invisibility"
    assert cfg.tol == 1e-9
    assert cfg.params["horizons"] == (5.0, 10.0)
    assert cfg.params["cells"] == 1e4
    assert cfg.params["separation"] == pytest.approx(math.pi / 100)


def test_command_line_overrides_run_section():
    cfg = parse_config("[run]\ntol = 1e-9\n", "cusp", {"tol": 1e-11, "out": "x", "seed": None})
    assert cfg.tol == 1e-11 and cfg.out == "x" and cfg.seed == 0


def test_all_errors_are_collected():
    text = "[run]\ntol = 1\nbogus = 3\n[cusp]\nn = one\nprofile = sphere\nnot a pair\n"
    with pytest.raises(ConfigErrors) as err:
        parse_config(text, "cusp")
    errors = err.value.errors
    assert len(errors) == 5
    assert any(isinstance(e, ParseError) and e.line == 7 for e in errors)
    paths = {e.path for e in errors if isinstance(e, ValidationError)}
    assert paths == {"run.tol", "run.bogus", "cusp.n", "cusp.profile"}
    tol_err = next(e for e in errors if getattr(e, "path", "") == "run.tol")
    assert "1e-12" in tol_err.message and "0.0001" in tol_err.message


def test_parse_error_positions():
    with pytest.raises(ConfigErrors) as err:
        parse_config("[run]\n  tol =\n", "cusp")
    (e,) = err.value.errors
    assert isinstance(e, ParseError)
    assert (e.line, e.column) == (2, 8)


def test_duplicate_keys_and_foreign_sections():
    with pytest.raises(ConfigErrors) as err:
        parse_config("[cusp]\nn = 3\nn = 4\n[smooth]\nA = 3\n[nowhere]\n", "cusp")
    msgs = " ".join(str(e) for e in err.value.errors)
    assert "duplicate key" in msgs and "does not apply" in msgs and "unknown section" in msgs


def test_subcommand_mismatch():
    with pytest.raises(ConfigErrors):
        parse_config("[run]\nsubcommand = smooth\n", "cusp")
    with pytest.raises(ConfigErrors):
        parse_config("")


def test_result_round_trip():
    line = format_result("cgvd", True, {"final_product": 3.5e-7, "reason": "a b", "n": 3})
    assert line == "RESULT cgvd pass final_product=3.5e-07 reason=a_b n=3"
    sub, ok, metrics = parse_result(line)
    assert (sub, ok) == ("cgvd", True)
    assert float(metrics["final_product"]) == 3.5e-7
    with pytest.raises(ValueError):
        parse_result("RESULT cgvd maybe")


@given(st.dictionaries(st.from_regex(r"[a-z_][a-z0-9_]{0,8}", fullmatch=True),
                       st.floats(allow_nan=False, allow_infinity=False), max_size=5))
def test_result_floats_survive_round_trip(metrics):
    _, _, back = parse_result(format_result("cusp", False, metrics))
    assert {k: float(v) for k, v in back.items()} == metrics


def run_cli(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, out.strip().splitlines()[-1]


@pytest.mark.parametrize("sub", SUBCOMMANDS)
def test_every_subcommand_passes_with_defaults(sub, tmp_path, capsys):
    code, last = run_cli(capsys, sub, "--out", str(tmp_path))
    assert code == 0
    assert last.startswith(f"RESULT {sub} pass")
    files = sorted(os.listdir(tmp_path))
    assert files
    for name in files:
        data = (tmp_path / name).read_bytes()
        assert b"\r" not in data
        assert data.endswith(b"\n")
        if name.endswith(".svg"):
            assert b'viewBox="0 0 800 600"' in data


def test_artifacts_are_byte_identical(tmp_path, capsys):
    for sub in ("curvature", "invisibility"):
        a, b = tmp_path / f"{sub}a", tmp_path / f"{sub}b"
        run_cli(capsys, sub, "--out", str(a), "--seed", "5")
        run_cli(capsys, sub, "--out", str(b), "--seed", "5", "--threads", "3")
        for name in os.listdir(a):
            assert (a / name).read_bytes() == (b / name).read_bytes()


def test_verification_failure_exits_two(tmp_path, capsys):
    cfg = tmp_path / "c.conf"
    cfg.write_text("[plan-growth]\nbudget = const\ncoef = 0.5\n")
    code, last = run_cli(capsys, "plan-growth", "--config", str(cfg), "--out", str(tmp_path))
    assert code == 2
    assert last.startswith("RESULT plan-growth fail")
    assert "reason=budget-infeasible" in last


def test_divergent_assembly_exits_two(tmp_path, capsys):
    cfg = tmp_path / "c.conf"
    cfg.write_text("[assemble]\ngraph = trivalent-tree\nschedule = constant\n")
    code, last = run_cli(capsys, "assemble", "--config", str(cfg), "--out", str(tmp_path))
    assert code == 2
    assert "reason=divergent-volume" in last


def test_config_errors_exit_one(tmp_path, capsys):
    cfg = tmp_path / "c.conf"
    cfg.write_text("[cusp]\nn = 1\nprofile = nope\n")
    code = main(["cusp", "--config", str(cfg), "--out", str(tmp_path)])
    captured = capsys.readouterr()
    assert code == 1
    assert re.search(r"errors=2$", captured.out.strip())
    assert captured.err.count("config error") == 2


def test_tol_out_of_range_exits_one(tmp_path, capsys):
    code, last = run_cli(capsys, "geodesic", "--tol", "1", "--out", str(tmp_path))
    assert code == 1
    assert last == "RESULT geodesic fail reason=config-error errors=1"


def test_missing_config_file(tmp_path, capsys):
    code, last = run_cli(capsys, "cusp", "--config", str(tmp_path / "missing.conf"))
    assert code == 1
    assert "config-unreadable" in last
