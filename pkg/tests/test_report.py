import csv
import io as _io
import json
from fractions import Fraction

import pytest

from repairforge.errors import BadHelperCount
from repairforge.report import (
    HelperUsage, RepairReport, format_rows, gamma_star, render_csv, render_json, render_text,
)


def _report(accessed, downloaded, rows=(0, 1)):
    helpers = [HelperUsage(y, a, d, tuple(rows)) for y, (a, d) in enumerate(zip(accessed, downloaded), 1)]
    return RepairReport(0, 5, 3, 4, "target", helpers)


def test_gamma_star_naive_at_d_equal_k():
    assert gamma_star(5, 3, 3, 16) == 3 * 16


def test_gamma_star_nine_six():
    for alpha in (3, 27, 108):
        total = gamma_star(9, 6, 8, alpha)
        assert total == Fraction(8 * alpha, 3)
        assert total / 8 == Fraction(alpha, 3)


def test_gamma_star_decreasing():
    for n, k in [(5, 3), (9, 6), (14, 10)]:
        values = [gamma_star(n, k, d, 12) for d in range(k, n)]
        assert all(a > b for a, b in zip(values, values[1:]))


def test_gamma_star_rejects_bad_d():
    with pytest.raises(BadHelperCount):
        gamma_star(5, 3, 2, 4)
    with pytest.raises(BadHelperCount):
        gamma_star(5, 3, 5, 4)


def test_report_totals_and_flags():
    rep = _report([2, 2, 2, 2], [2, 2, 2, 2])
    assert rep.total_accessed == 8 and rep.total_downloaded == 8
    assert rep.optimal_access and rep.optimal_bandwidth
    assert rep.total_downloaded == gamma_star(5, 3, 4, 4)
    assert rep.rows_accessed() == {0, 1}


def test_report_not_optimal():
    rep = _report([4, 2, 2, 2], [2, 2, 2, 2])
    assert rep.optimal_bandwidth and not rep.optimal_access
    short = RepairReport(0, 5, 3, 4, "naive", [HelperUsage(1, 4, 4)] * 3)
    assert not short.optimal_bandwidth
    assert short.total_downloaded == 3 * 4


def test_rows_accessed_varies():
    rep = RepairReport(0, 5, 3, 4, "x", [HelperUsage(1, 2, 2, (0, 1)), HelperUsage(2, 2, 2, (2, 3))])
    assert rep.rows_accessed() is None
    assert format_rows(None) == "varies"


def test_format_rows():
    assert format_rows({0, 1, 4}) == "{1,2,5}"
    assert format_rows({0, 1, 4}, one_based=False) == "{0,1,4}"


def test_render_text():
    text = render_text([_report([2] * 4, [2] * 4)], "demo")
    lines = text.splitlines()
    assert lines[0] == "demo"
    assert "optimal per helper=2" in lines[1]
    assert lines[-1].split()[-1] == "{1,2}"
    assert " yes " in lines[-1]


def test_render_csv():
    rows = list(csv.DictReader(_io.StringIO(render_csv([_report([2, 2, 2, 3], [2] * 4)]))))
    assert len(rows) == 1
    row = rows[0]
    assert row["schema"] == "repairforge-report/1"
    assert row["accessed_per_helper"] == "2/3"
    assert row["total_accessed"] == "9"
    assert row["optimal_access"] == "False"
    assert row["rows"] == "{1,2}"


def test_render_json_is_zero_based():
    doc = json.loads(render_json([_report([2] * 4, [2] * 4)], code="demo"))
    assert doc["schema"] == "repairforge-report/1" and doc["code"] == "demo"
    rep = doc["reports"][0]
    assert rep["helpers"][0]["rows"] == [0, 1]
    assert rep["optimal_per_node"] == "2"
    assert rep["total_downloaded"] == sum(h["downloaded"] for h in rep["helpers"])
