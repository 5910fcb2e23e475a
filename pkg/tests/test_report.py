import csv
import random

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from iiasim.report import (OVERALL, CaseRow, aggregate, emit_plots, emit_tables, format_percent, read_cases,
                           request_metrics, system_metrics, write_cases)


def row(system="s", req="r1", h="dbh", percent=1.0, iic="A", p=0.5, r=0.5, n=3):
    return CaseRow(system, req, h, percent, n, iic, 4, 2, p, r)


def by_key(metrics):
    return {(m.system, m.heuristic, m.percent): m for m in metrics}


def test_request_mean_over_initial_classes():
    m = request_metrics([row(iic="A", r=1.0), row(iic="B", r=0.5)])
    assert m.r_cr == 0.75


def test_system_stats_two_requests():
    reqs = [request_metrics([row(req="a", p=0.2)]), request_metrics([row(req="b", p=0.4)])]
    s = system_metrics(reqs)
    assert s.p_avg == pytest.approx(0.3)
    assert s.p_sd == pytest.approx(0.1)
    assert s.p_med == pytest.approx(0.3)
    assert s.request_count == 2


def test_fifteen_requests_match_numpy():
    rng = random.Random(4)
    rows = [row(req=f"r{i:02d}", iic=c, p=rng.random(), r=rng.random())
            for i in range(15) for c in "ABC"[: rng.randint(1, 3)]]
    s = by_key(aggregate(rows))[("s", "dbh", 1.0)]
    per = {}
    for x in rows:
        per.setdefault(x.request_id, []).append(x.precision)
    means = np.array([np.mean(v) for v in per.values()])
    assert s.p_avg == pytest.approx(means.mean(), abs=1e-12)
    assert s.p_sd == pytest.approx(means.std(ddof=0), abs=1e-12)
    assert s.p_med == pytest.approx(float(np.median(means)), abs=1e-12)
    assert s.request_count == 15


def test_overall_pools_requests_not_system_means():
    rows = [row(system="big", req=f"b{i}", r=1.0) for i in range(3)] + [row(system="small", req="s0", r=0.0)]
    ms = by_key(aggregate(rows))
    assert ms[(OVERALL, "dbh", 1.0)].r_avg == 0.75
    assert ms[(OVERALL, "dbh", 1.0)].request_count == 4
    assert (ms[("big", "dbh", 1.0)].r_avg + ms[("small", "dbh", 1.0)].r_avg) / 2 == 0.5


def test_mixed_requests_rejected():
    with pytest.raises(ValueError):
        request_metrics([row(req="a"), row(req="b")])


rows_strategy = st.lists(
    st.builds(row, req=st.sampled_from(["r1", "r2", "r3"]), iic=st.sampled_from("ABCD"),
              h=st.sampled_from(["dbh", "rnd"]), percent=st.sampled_from([0.5, 1.0]),
              p=st.floats(0, 1), r=st.floats(0, 1)),
    min_size=1, max_size=30)


@given(rows_strategy, st.randoms())
def test_aggregate_permutation_invariant(rows, rnd):
    shuffled = list(rows)
    rnd.shuffle(shuffled)
    assert aggregate(rows) == aggregate(shuffled)


def test_format_percent():
    assert format_percent(0.5) == "0.5"
    assert format_percent(3.0) == "3.0"
    assert format_percent(0.25) == "0.25"


def test_case_csv_round_trip(tmp_path):
    rows = [row(p=1 / 3, r=2 / 3), row(iic="B", percent=0.5)]
    assert write_cases(rows, tmp_path / "cases.csv") == 2
    assert read_cases(tmp_path / "cases.csv") == rows


def _grid_rows():
    rows = []
    for h in ("dbh", "rnd"):
        for pct in (0.5, 1.0, 2.0):
            for req in ("r1", "r2"):
                rows.append(row(req=req, h=h, percent=pct, p=0.1 * pct, r=min(1.0, 0.3 * pct)))
    return rows


def test_table_shape(tmp_path):
    emit_tables(aggregate(_grid_rows(), overall=False), tmp_path)
    with (tmp_path / "s_recall.csv").open() as fh:
        table = list(csv.reader(fh))
    assert table[0] == ["percent", "n_actual", "mean_rnd", "mean_dbh", "sd_rnd", "sd_dbh"]
    assert len(table) == 4
    assert [r[0] for r in table[1:]] == ["0.5", "1.0", "2.0"]
    assert (tmp_path / "s_precision_median.csv").exists()
    assert "| 2.0 | 3 |" in (tmp_path / "tables.md").read_text()


def test_single_heuristic_column(tmp_path):
    emit_tables(aggregate([x for x in _grid_rows() if x.heuristic == "rnd"]), tmp_path)
    header = (tmp_path / "overall_precision.csv").read_text().splitlines()[0]
    assert header == "percent,n_actual,mean_rnd,sd_rnd"


def test_identical_heuristics_identical_columns(tmp_path):
    rows = [row(h="hist1", req=q, p=p) for q, p in (("a", 0.2), ("b", 0.7))]
    rows += [row(h="hist2", req=q, p=p) for q, p in (("a", 0.2), ("b", 0.7))]
    emit_tables(aggregate(rows), tmp_path)
    with (tmp_path / "s_precision.csv").open() as fh:
        for rec in csv.DictReader(fh):
            assert rec["mean_hist1"] == rec["mean_hist2"] and rec["sd_hist1"] == rec["sd_hist2"]


def test_outputs_byte_deterministic(tmp_path):
    ms = aggregate(_grid_rows())
    files_a = emit_tables(ms, tmp_path / "a") + emit_plots(ms, tmp_path / "a")
    files_b = emit_tables(ms, tmp_path / "b") + emit_plots(ms, tmp_path / "b")
    assert [f.name for f in files_a] == [f.name for f in files_b]
    assert "s_mean.svg" in {f.name for f in files_a}
    for a, b in zip(files_a, files_b):
        assert a.read_bytes() == b.read_bytes()


def test_recall_monotone_preserved_by_aggregation():
    ms = [m for m in aggregate(_grid_rows()) if m.system == "s" and m.heuristic == "dbh"]
    recalls = [m.r_avg for m in sorted(ms, key=lambda m: m.percent)]
    assert recalls == sorted(recalls)
