import csv
import io
import json

import numpy as np

from harmonic_chain import streams
from harmonic_chain.report import ScenarioReport, Table


def test_streams_reproducible_and_distinct():
    a = streams.stream(5, 3).standard_normal(4)
    np.testing.assert_array_equal(a, streams.stream(5, 3).standard_normal(4))
    assert not np.array_equal(a, streams.stream(5, 4).standard_normal(4))
    assert not np.array_equal(a, streams.stream(6, 3).standard_normal(4))
    assert not np.array_equal(a, streams.stream(5, 3, streams.STATIONARY_DRAW).standard_normal(4))


def test_normals_rows_match_streams():
    x = streams.normals(1, [7, 2], 3)
    np.testing.assert_array_equal(x[1], streams.stream(1, 2).standard_normal(3))


def test_negative_seed_is_accepted():
    assert streams.stream(-1, 0).standard_normal() == streams.stream(-1, 0).standard_normal()


def _report():
    rep = ScenarioReport("demo", {"n": 3, "nu": 0.0})
    tab = Table(["m", "n", "value"])
    tab.add(1, 1, 0.25)
    tab.add(1, 2, 0.5)
    rep.tables["cov"] = tab
    rep.check("ok", 0.1, 0.0, 0.2)
    rep.check("bad", 1.0, 0.0, 0.5)
    rep.wall_clock = 1.23
    return rep


def test_checks_and_lines():
    rep = _report()
    assert not rep.passed
    assert rep.checks[0].line().startswith("[PASS]")
    assert rep.checks[1].line().startswith("[FAIL]")


def test_json_round_trip():
    d = json.loads(_report().to_json())
    assert d["scenario"] == "demo"
    assert d["config"]["n"] == 3
    assert d["tables"]["cov"]["rows"][1] == [1, 2, 0.5]
    assert [c["passed"] for c in d["checks"]] == [True, False]


def test_csv_long_form_excludes_wall_clock():
    text = _report().to_csv()
    rows = list(csv.reader(io.StringIO(text)))
    assert rows[0] == ["scenario", "table", "key1", "key2", "value"]
    assert "1.23" not in text
    assert ["demo", "cov", "1", "2/value", "0.5"] in rows


def test_table_csv():
    rows = list(csv.reader(io.StringIO(_report().table_csv("cov"))))
    assert rows[0] == ["m", "n", "value"] and len(rows) == 3
