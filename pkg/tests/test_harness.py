import csv
import io
import json

import pytest

from fracsim.harness import (
    EXIT_ERROR,
    EXIT_OK,
    EXIT_VACUOUS,
    ConfigError,
    ExperimentSpec,
    expand_cells,
    parse_sweep,
    run,
    run_suite,
    sweep,
)
from fracsim.harness.cli import main
from fracsim.harness.config import cell_key, cell_seed, eval_size, expand_sizes
from fracsim.harness.runner import SWEEP_COLUMNS

SWEEP_TEXT = """
# two protocols, two sizes
mode = mc
trials = 20000
seed = 7
grid.protocol = rac-sr, qrac-sr
grid.n = 8
grid.n = 16
grid.m = n/4
grid.f = xor2
"""


def _rows(text):
    return list(csv.DictReader(io.StringIO(text)))


@pytest.mark.parametrize("expr,n,value", [("n/4", 16, 4), ("2*n", 5, 10), ("n-1", 8, 7), ("n", 3, 3),
                                          ("12", 99, 12), ("n*2", 4, 8), ("n+3", 1, 4)])
def test_eval_size(expr, n, value):
    assert eval_size(expr, n) == value


def test_size_errors_and_ranges():
    with pytest.raises(ConfigError):
        eval_size("n/3", 8)
    with pytest.raises(ConfigError):
        eval_size("log(n)", 8)
    assert expand_sizes("1..n/2", 8) == [1, 2, 3, 4]


def test_spec_validation():
    assert ExperimentSpec(protocol="QRAC-SR").protocol == "qrac_sr"
    with pytest.raises(ConfigError):
        ExperimentSpec(mode="fast")
    with pytest.raises(ConfigError):
        ExperimentSpec(seed=-1)


def test_parse_sweep_and_cells():
    cfg = parse_sweep(SWEEP_TEXT)
    cells = expand_cells(cfg)
    assert len(cells) == 4
    keys = [cell_key(c) for c in cells]
    assert keys == sorted(keys)
    assert {c.m for c in cells} == {2, 4}


def test_parse_sweep_errors():
    with pytest.raises(ConfigError, match="unknown key"):
        parse_sweep("colour = red\ngrid.protocol = rac-sr\ngrid.n = 8\ngrid.f = xor2")
    with pytest.raises(ConfigError, match="grid.f"):
        parse_sweep("grid.protocol = rac-sr\ngrid.n = 8")
    with pytest.raises(ConfigError, match="line 1"):
        parse_sweep("trials = many")


def test_cell_seeds_do_not_depend_on_other_cells():
    small = expand_cells(parse_sweep(SWEEP_TEXT))
    bigger = expand_cells(parse_sweep(SWEEP_TEXT + "grid.protocol = earac\n"))
    seeds = {cell_key(c): c.seed for c in bigger}
    assert all(seeds[cell_key(c)] == c.seed for c in small)
    assert cell_seed(7, "a") != cell_seed(7, "b")


def test_run_exact_block_example():
    result = run(ExperimentSpec(protocol="rac-sr", n=8, m=4, k=2, f="xor", mode="exact"))
    assert result.exit_code == EXIT_OK
    assert result.report.bias_avg == pytest.approx(3 / 14, abs=1e-12)
    payload = json.loads(result.to_json())
    assert payload["bounds"]["upper"]["thm44"] == pytest.approx(0.7)


def test_run_auto_picks_mc_for_earac():
    result = run(ExperimentSpec(protocol="earac", n=8, m=2, f="xor2", trials=5000))
    assert result.report.mode == "mc"


def test_simulate_cli_json(capsys):
    code = main(["simulate", "--protocol", "rac-sr", "--n", "8", "--m", "4", "--k", "2", "--f", "xor",
                 "--mode", "exact"])
    out = json.loads(capsys.readouterr().out)
    assert code == EXIT_OK
    assert out["report"]["bias_avg"] == pytest.approx(3 / 14, abs=1e-12)


def test_simulate_cli_prrac(capsys):
    code = main(["simulate", "--protocol", "prrac", "--n", "3", "--k", "2", "--f", "xor", "--mode", "exact"])
    out = json.loads(capsys.readouterr().out)
    assert code == EXIT_OK
    assert out["report"]["bias_worst"] == 1.0
    assert out["audit"]["bits_sent"] == 1 and out["audit"]["cases"] == 48


def test_simulate_cli_csv_to_file(tmp_path):
    path = tmp_path / "out.csv"
    main(["simulate", "--protocol", "qrac-sr", "--n", "8", "--m", "2", "--f", "xor2", "--mode", "mc",
          "--trials", "5000", "--seed", "3", "--format", "csv", "--output", str(path)])
    rows = _rows(path.read_text(encoding="utf-8"))
    assert len(rows) == 1 and rows[0]["protocol"] == "qrac_sr" and rows[0]["trials"] == "5000"


def test_simulate_is_byte_deterministic(capsys):
    argv = ["simulate", "--protocol", "qrac-sr", "--n", "12", "--m", "3", "--f", "maj3", "--mode", "mc",
            "--trials", "20000", "--seed", "11"]
    main(argv)
    first = capsys.readouterr().out
    main(argv + ["--jobs", "3"])
    assert capsys.readouterr().out == first


def test_vacuous_exit_code(capsys):
    code = main(["simulate", "--protocol", "rac-pr", "--n", "8", "--ell", "2", "--f", "dict0_1",
                 "--delta", "0.125"])
    capsys.readouterr()
    assert code == EXIT_VACUOUS


def test_error_exit_names_module(capsys):
    code = main(["simulate", "--protocol", "rac-sr", "--n", "8", "--m", "2", "--f", "maj2"])
    err = capsys.readouterr().err
    assert code == EXIT_ERROR and "boolfn" in err and "maj2" in err
    code = main(["simulate", "--protocol", "rac-sr", "--n", "4", "--m", "9", "--f", "xor2"])
    err = capsys.readouterr().err
    assert code == EXIT_ERROR and err.startswith("fracsim: frac:") and "m=9" in err


def test_bounds_cli(capsys):
    code = main(["bounds", "--f", "maj3", "--n", "48", "--m", "3", "--eta", "1.40"])
    out = json.loads(capsys.readouterr().out)
    assert code == EXIT_OK
    assert out["thm44_upper"] == pytest.approx(0.4567, abs=1e-4)
    assert out["C_eta"] == 1.0


def test_spectrum_cli(capsys):
    main(["spectrum", "--f", "and2", "--coefficients"])
    out = json.loads(capsys.readouterr().out)
    assert out["deg"] == 2 and out["coefficients"]["3"] == -0.5


def test_verify_deterministic_and_green(capsys):
    assert main(["verify", "frac", "--seed", "7"]) == EXIT_OK
    first = capsys.readouterr().out
    main(["verify", "frac", "--seed", "7"])
    assert capsys.readouterr().out == first
    assert first.rstrip().endswith("0 failed, 0 soft warnings")


def test_verify_codes_and_prbox_contents():
    codes = {c.name: c for c in run_suite("codes")}
    assert codes["K signed recurrence, n<=25"].status == "PASS"
    assert codes["K difference recurrence (unsigned)"].status == "SOFT"
    prbox = {c.name: c for c in run_suite("prbox")}
    assert prbox["PRRAC exhaustive n=3 k=2"].value == "48/48"
    with pytest.raises(ValueError):
        run_suite("nope")


def test_sweep_rows_and_ordering(tmp_path, capsys):
    path = tmp_path / "grid.cfg"
    path.write_text(SWEEP_TEXT + "grid.m = n\ngrid.protocol = earac\n", encoding="utf-8")
    assert main(["sweep", str(path), "--jobs", "2"]) == EXIT_OK
    text = capsys.readouterr().out
    assert text.splitlines()[0] == ",".join(SWEEP_COLUMNS)
    rows = _rows(text)
    assert len(rows) == 12
    by = {(r["protocol"], r["n"], r["m"]): r for r in rows}
    for n, m in (("8", "2"), ("16", "4")):
        rac, qrac = by[("rac_sr", n, m)], by[("qrac_sr", n, m)]
        assert float(qrac["bias_avg"]) >= float(rac["bias_avg"]) - 4 * float(qrac["ci"])
    for n in ("8", "16"):
        assert by[("earac", n, n)]["bias_avg"] == "1"


def test_sweep_records_errors_and_continues():
    cells = expand_cells(parse_sweep("grid.protocol = rac-sr\ngrid.n = 4\ngrid.m = 2\ngrid.m = 9\n"
                                     "grid.f = xor2\nmode = exact"))
    rows = _rows(sweep(cells, jobs=1))
    assert len(rows) == 2
    ok = [r for r in rows if not r["error"]]
    bad = [r for r in rows if r["error"]]
    assert len(ok) == 1 and len(bad) == 1 and "frac" in bad[0]["error"]


def test_sweep_is_jobs_independent():
    cells = expand_cells(parse_sweep(SWEEP_TEXT))
    assert sweep(cells, jobs=1) == sweep(cells, jobs=4)
