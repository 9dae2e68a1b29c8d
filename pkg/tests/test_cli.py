import csv
import json

import pytest

from polylab import cli
from polylab.errors import ConfigInvalid, DiscretizationUnstable, ModuleError, StoreCorrupt
from polylab.records import ExperimentRecord, Status
from polylab.store import COLUMNS, ResultStore, decimal, report, summarize

KARP = {"module": "karp", "family": "binomial", "n": 5, "r": 2}


def write_config(tmp_path, cfg, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(cfg))
    return str(path)


def make_record(module, tag, status, seed=0):
    rec = ExperimentRecord(module, {"seed": seed})
    rec.add_verdict(tag, status, {})
    return rec.finish()


# -- store -----------------------------------------------------------------
def test_empty_store_reports_header_only(tmp_path):
    ResultStore(tmp_path / "s").create()
    rows, csv_text, text = report(tmp_path / "s")
    assert rows == []
    assert csv_text.strip() == ",".join(COLUMNS)
    assert text.splitlines()[0].split() == list(COLUMNS)


def test_missing_store_is_corrupt(tmp_path):
    with pytest.raises(StoreCorrupt):
        report(tmp_path / "absent")


def test_mixed_store_one_row_per_tag(tmp_path):
    store = ResultStore(tmp_path / "s")
    store.append(make_record("karp", "karp.C1", Status.SUPPORTED, 0))
    store.append(make_record("karp", "karp.C1", Status.COUNTEREXAMPLE, 1))
    store.append(make_record("snake", "snake.ds_equals_snake", Status.NOT_APPLICABLE, 2))
    store.append(make_record("twop", "twop.question2_commuting_operator", Status.HEURISTIC, 3))
    rows, _, _ = report(tmp_path / "s")
    by_tag = {r["conjecture_tag"]: r for r in rows}
    assert set(by_tag) == {"karp.C1", "snake.ds_equals_snake", "twop.question2_commuting_operator"}
    assert by_tag["karp.C1"]["runs"] == 2
    assert by_tag["karp.C1"]["supported"] == 1
    assert by_tag["karp.C1"]["counterexamples"] == 1
    assert by_tag["snake.ds_equals_snake"]["not_applicable"] == 1
    assert by_tag["twop.question2_commuting_operator"]["heuristic"] == 1


def test_module_filter(tmp_path):
    store = ResultStore(tmp_path / "s")
    store.append(make_record("karp", "karp.C1", Status.SUPPORTED))
    store.append(make_record("snake", "snake.ds_equals_snake", Status.SUPPORTED))
    rows, _, _ = report(tmp_path / "s", "snake")
    assert [r["conjecture_tag"] for r in rows] == ["snake.ds_equals_snake"]


def test_append_deduplicates_by_id(tmp_path):
    store = ResultStore(tmp_path / "s")
    first = make_record("karp", "karp.C1", Status.SUPPORTED)
    store.append(first)
    again = make_record("karp", "karp.C1", Status.COUNTEREXAMPLE)
    assert again.id == first.id
    kept = store.append(again)
    assert len(store.records()) == 1
    assert kept.verdicts[0].status is Status.SUPPORTED


def test_corrupt_line_raises(tmp_path):
    store = ResultStore(tmp_path / "s").create()
    store.records_path.write_text("{not json\n")
    with pytest.raises(StoreCorrupt):
        store.records()


def test_summarize_counts_every_status():
    recs = [make_record("m", "t", s, i) for i, s in enumerate(Status)]
    (row,) = summarize(recs)
    assert row["runs"] == len(Status)
    assert row["supported"] == row["counterexamples"] == row["not_applicable"] == row["heuristic"] == 1


@pytest.mark.parametrize("value, text", [(0.1, "0.1"), (1e-300, "1e-300"), (3, "3"), (True, "true"),
                                         (complex(1.5, -2), "1.5-2.0j")])
def test_decimal_strings(value, text):
    assert decimal(value) == text
    if isinstance(value, float):
        assert float(decimal(value)) == value


def test_csv_cells_round_trip(tmp_path):
    store = ResultStore(tmp_path / "s")
    values = [0.1 + 0.2, 1 / 3, 2.0**-1074]
    path = store.write_csv("abc", "t.csv", ["v"], ([v] for v in values))
    with open(path) as fh:
        got = [row[0] for row in csv.reader(fh)][1:]
    assert [float(g) for g in got] == values
    assert all("e" in g or "." in g for g in got)


# -- config parsing --------------------------------------------------------
def test_grid_parsing():
    assert cli.parse_grid("-6:2:0.1")[:3] == [-6.0, -5.9, -5.8]
    assert len(cli.parse_grid("-6:2:0.1")) == 81
    assert cli.parse_grid("-6:2:0.1")[-1] == 2.0
    assert cli.parse_grid(0) == [0.0]
    with pytest.raises(ValueError):
        cli.parse_grid("2:-6:0.1")


def test_degree_range_parsing():
    assert cli.parse_degrees("8..24") == [8, 12, 16, 20, 24]
    assert cli.parse_degrees("8..12:2") == [8, 10, 12]
    assert cli.parse_degrees(5) == [5]


def test_complex_parsing():
    assert cli.parse_complex("1+0i") == 1
    assert cli.parse_complex("0.5-2i") == complex(0.5, -2)
    assert cli.parse_complex([1, 2]) == complex(1, 2)


def test_negative_values_are_joined():
    assert cli._join_negative_values(["twop", "--s", "-6:2:0.1"]) == ["twop", "--s=-6:2:0.1"]
    assert cli._join_negative_values(["riesz", "--s", "-1"]) == ["riesz", "--s=-1"]


@pytest.mark.parametrize("cfg", [
    [],
    {"module": "nope"},
    {"module": "karp", "n": "five"},
    {"module": "karp", "bogus": 1},
    {"module": "snake", "n": True},
])
def test_validation_rejects(cfg):
    with pytest.raises(ConfigInvalid):
        cli.validate(cfg)


# -- run and exit codes ----------------------------------------------------
def test_run_stores_and_caches(tmp_path):
    store = tmp_path / "s"
    first = cli.run(write_config(tmp_path, KARP), store)
    assert not first.cached
    assert len(first.record.results["module_config"]["f"]) == 6
    assert (store / "artifacts" / first.record.id / "verdicts.csv").exists()
    again = cli.run(write_config(tmp_path, KARP), store)
    assert again.cached
    assert again.record.id == first.record.id
    assert len(ResultStore(store).records()) == 1


def test_exit_ok(tmp_path):
    assert cli.main(["run", write_config(tmp_path, KARP), "--store", str(tmp_path / "s")]) == cli.EXIT_OK


def test_exit_config_invalid(tmp_path, capsys):
    path = write_config(tmp_path, {"module": "karp", "bogus": 1})
    assert cli.main(["run", path, "--store", str(tmp_path / "s")]) == cli.EXIT_CONFIG
    assert "bogus" in capsys.readouterr().err


def test_exit_config_invalid_for_bad_parameter_value(tmp_path):
    path = write_config(tmp_path, {"module": "snake", "mu": "no_such_majorant"})
    assert cli.main(["run", path, "--store", str(tmp_path / "s")]) == cli.EXIT_CONFIG


def test_exit_config_for_unreadable_file(tmp_path):
    assert cli.main(["run", str(tmp_path / "missing.json")]) == cli.EXIT_CONFIG


def test_exit_usage_error():
    assert cli.main(["no-such-verb"]) == cli.EXIT_CONFIG


def test_exit_numerical_failure(tmp_path):
    path = write_config(tmp_path, {"module": "riesz", "d": 3, "s": 3.5})
    assert cli.main(["run", path, "--store", str(tmp_path / "s")]) == cli.EXIT_NUMERICAL


def test_numerical_failure_is_wrapped_with_module(tmp_path, monkeypatch):
    def failing(cfg):
        def execute():
            raise DiscretizationUnstable("drift")
        return execute
    monkeypatch.setitem(cli.PREPARE, "twop", failing)
    with pytest.raises(ModuleError) as info:
        cli.run_config({"module": "twop", "op": "f2"}, tmp_path / "s")
    assert info.value.module == "twop"
    assert isinstance(info.value.cause, DiscretizationUnstable)


def test_exit_counterexample(tmp_path):
    store = str(tmp_path / "s")
    assert cli.main(["replicate-figure", "fig1b", "--store", store]) == cli.EXIT_COUNTEREXAMPLE
    # the cached record keeps the exit code
    assert cli.main(["replicate-figure", "fig1b", "--store", store]) == cli.EXIT_COUNTEREXAMPLE


def test_report_command(tmp_path, capsys):
    store = str(tmp_path / "s")
    cli.main(["run", write_config(tmp_path, KARP), "--store", store])
    capsys.readouterr()
    out_csv = tmp_path / "r.csv"
    assert cli.main(["report", store, "--module", "karp", "--csv", str(out_csv)]) == cli.EXIT_OK
    assert "karp.C1" in capsys.readouterr().out
    rows = list(csv.DictReader(out_csv.open()))
    assert rows[0]["conjecture_tag"] == "karp.C1"
    assert rows[0]["runs"] == "1"


def test_report_missing_store_exit_code(tmp_path):
    assert cli.main(["report", str(tmp_path / "absent")]) == cli.EXIT_CONFIG


# -- module subcommands ----------------------------------------------------
def test_snake_writes_curve_and_plot(tmp_path):
    store = tmp_path / "s"
    assert cli.main(["snake", "--mu", "semicircle", "--n", "6", "--store", str(store)]) == cli.EXIT_OK
    (rec,) = ResultStore(store).records()
    art = store / "artifacts" / rec.id
    rows = list(csv.DictReader((art / "snake.csv").open()))
    assert len(rows) == cli.CURVE_POINTS
    for row in rows:
        assert abs(float(row["omega"])) <= float(row["mu"]) + 1e-9
        assert float(row["minus_mu"]) == -float(row["mu"])
    plot = json.loads((art / "snake.plot.json").read_text())
    assert {layer["csv"] for layer in plot["layers"]} == {"snake.csv", "alternation.csv"}


def test_twop_f2_csv_to_stdout(tmp_path, capsys):
    code = cli.main(["twop", "--f2", "--s", "-2:0:1", "--nodes", "60", "--store", str(tmp_path / "s")])
    assert code == cli.EXIT_OK
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0].split(",") == cli.f2_header()
    body = [[float(v) for v in line.split(",")] for line in lines[1:]]
    assert [row[0] for row in body] == [-2.0, -1.0, 0.0]
    for row in body:
        assert abs(row[1] - row[2]) < 1e-12
        assert all(0 <= lam < 1 for lam in row[3:])
    assert body[0][1] < body[1][1] < body[2][1]


def test_shadow_writes_layers(tmp_path):
    poly = tmp_path / "p.json"
    poly.write_text(json.dumps({"roots": [[1, 0], [0, 1], [-1, 0.3]]}))
    store = tmp_path / "s"
    assert cli.main(["shadow", "--poly", str(poly), "--nmax", "6", "--raster", "60", "--store", str(store)]) == 0
    (rec,) = ResultStore(store).records()
    art = store / "artifacts" / rec.id
    cloud = list(csv.DictReader((art / "cloud.csv").open()))
    assert cloud and set(cloud[0]) == {"n", "m", "re", "im"}
    assert (art / "raster.pgm").read_bytes().startswith(b"P")
    crit = list(csv.DictReader((art / "critical_points.csv").open()))
    assert len(crit) == 2


def test_shadow_rejects_bad_polynomial_file(tmp_path):
    poly = tmp_path / "p.json"
    poly.write_text(json.dumps({"zeros": [1, 2]}))
    assert cli.main(["shadow", "--poly", str(poly), "--store", str(tmp_path / "s")]) == cli.EXIT_CONFIG


def test_charges_config_file(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"positions": [[1, 0, 0], [-1, 0, 0]], "charges": [1, 1]}))
    store = tmp_path / "s"
    assert cli.main(["charges", "--config", str(cfg), "--store", str(store)]) == cli.EXIT_OK
    (rec,) = ResultStore(store).records()
    # two equal charges: the midpoint is the only equilibrium
    assert rec.results["report"]["count"] == 1
    rows = list(csv.DictReader((store / "artifacts" / rec.id / "equilibria.csv").open()))
    assert [float(rows[0][k]) for k in ("x0", "x1", "x2")] == pytest.approx([0, 0, 0], abs=1e-10)


def test_charges_needs_input(tmp_path):
    assert cli.main(["charges", "--store", str(tmp_path / "s")]) == cli.EXIT_CONFIG


def test_planarortho_range_argument(tmp_path):
    args = cli.build_parser().parse_args(["planarortho", "--n", "8..16", "--a", "0.5+0.5i"])
    cfg = cli.config_from_args(args)
    assert cfg["n"] == "8..16"
    cli.validate(cfg)


def test_riesz_subcommand_config():
    args = cli.build_parser().parse_args(cli._join_negative_values(
        ["riesz", "--d", "3", "--s", "-1", "--annulus", "0.5", "1", "--method", "particles", "--N", "50"]))
    cfg = cli.config_from_args(args)
    assert cfg == {"module": "riesz", "d": 3, "s": -1.0, "annulus": [0.5, 1.0], "method": "particles",
                   "N": 50, "restarts": 8}


def test_figure_configs():
    assert cli.figure_config("fig1b")["n"] == 4
    assert cli.figure_config("fig1a", 10)["n"] == 10
    assert cli.figure_config("fig2", 12)["nmax"] == 12
