import json
import math

import numpy as np
import pytest

from ecoclone.report import Report, to_plain


def sample_report():
    rep = Report("demo", 3, parameters={"kind": "universal"}, seed=0)
    rep.tolerances["tol"] = 1e-9
    rep.results.update(
        {
            "value": np.float64(0.75),
            "count": np.int64(4),
            "vec": np.array([1 + 2j, 3j]),
            "missing": math.nan,
            "rows": [{"d": 2, "f": 0.5}, {"d": 3, "f": 1 / 3}],
        }
    )
    rep.check("value is three quarters", True, "tol")
    return rep


def test_to_plain():
    assert to_plain(np.array([1.0, 2.0])) == [1.0, 2.0]
    assert to_plain(1 + 2j) == {"re": 1.0, "im": 2.0}
    assert to_plain({"a": (np.bool_(True), math.inf)}) == {"a": [True, None]}


def test_json_round_trip():
    rep = sample_report()
    text = rep.to_json()
    back = Report.from_json(text)
    assert back.to_json() == text
    assert back.all_passed
    raw = json.loads(text)
    assert raw["results"]["vec"] == {"re": [1.0, 0.0], "im": [2.0, 3.0]}
    assert raw["results"]["missing"] is None
    assert set(raw) == {"command", "dimension", "seed", "parameters", "results", "tolerances", "verdicts"}


def test_unknown_tolerance_rejected():
    rep = Report("demo", 2)
    with pytest.raises(KeyError):
        rep.check("claim", True, "nope")


def test_text_and_csv():
    rep = sample_report()
    rep.check("a failing claim", False, "tol")
    text = rep.to_text()
    assert "PASS  value is three quarters" in text
    assert "FAIL  a failing claim" in text
    assert not rep.all_passed
    lines = rep.to_csv().splitlines()
    assert lines[0] == "d,f"
    assert float(lines[2].split(",")[1]) == 1 / 3
    with pytest.raises(ValueError):
        rep.to_csv("absent")
