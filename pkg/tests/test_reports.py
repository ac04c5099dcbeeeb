import json
import math

from flowshift.reports import merge, summarize


def test_pass_iff_max_within_tolerance():
    assert summarize("s", ["a", "b"], [[0], [1]], [1e-7, 1e-6], 1e-6).passed
    assert not summarize("s", ["a", "b"], [[0], [1]], [1e-7, 2e-6], 1e-6).passed
    assert not summarize("s", [], [], [], 1e-6).passed


def test_worst_cases_and_quantile():
    rep = summarize("s", list("abcd"), [[i] for i in range(4)], [0.1, 0.4, 0.2, 0.3], 1.0, n_worst=2)
    assert [w["input"] for w in rep.worst_cases] == ["b", "d"]
    assert rep.mean_residual == 0.25 and rep.quantile_95 <= 0.4


def test_json_and_csv():
    rep = summarize("s", ["a"], [[0.1, 0.2]], [1 / 3], 1.0, identity="x = x",
                    extra={"inf": math.inf, "nan": math.nan})
    d = json.loads(rep.to_json())
    assert d["pass"] is True and "passed" not in d and d["identity"] == "x = x"
    assert d["extra"] == {"inf": "inf", "nan": "nan"}
    assert rep.residual_csv() == "label,point,residual\na,0.1 0.2,0.3333333333333333\n"


def test_merge_requires_every_part():
    good = summarize("g", ["a"], [[0]], [0.0], 1.0)
    bad = summarize("b", ["a"], [[0]], [2.0], 1.0)
    m = merge("m", [good, bad])
    assert not m.passed and m.extra["parts"] == {"g": True, "b": False}
    assert [r[0] for r in m.rows] == ["g:a", "b:a"]
    assert not merge("empty", []).passed
