import datetime as dt
import json
import logging

import pytest
from hypothesis import given
from hypothesis import strategies as st

from iiasim import ingest
from iiasim.ingest import IngestError, class_id_from_path, tokenize
from iiasim.synth import SynthParams, generate, write_dataset


def write(tmp_path, name, content):
    p = tmp_path / name
    p.write_text(content if isinstance(content, str) else json.dumps(content, indent=1))
    return p


# -- tokenizer --------------------------------------------------------------

def test_tokenize_splits_identifiers():
    assert tokenize("getFooBar_baz") == ["get", "foo", "bar", "baz"]
    assert tokenize("public static void") == []
    assert tokenize("ResourceBundleUtil loads icons") == ["resource", "bundle", "util", "loads", "icons"]


def test_tokenize_digits_acronyms_and_short_terms():
    assert tokenize("parseHTMLPage2Fast x") == ["parse", "html", "page", "fast"]
    assert tokenize("a1b2 of the") == []


@given(st.text())
def test_tokenize_idempotent(text):
    toks = tokenize(text)
    assert tokenize(" ".join(toks)) == toks
    assert all(t == t.lower() and len(t) > 1 for t in toks)


def test_stopword_resource_is_versioned():
    words = ingest.stopwords()
    assert {"public", "void", "the", "and"} <= words
    assert "get" not in words


# -- graph file -------------------------------------------------------------

def test_parse_graph_file(tmp_path):
    p = write(tmp_path, "g.json", {"system": "s", "classes": ["A", "B"],
                                   "edges": [{"src": "A", "dst": "B", "calls": 3}]})
    g = ingest.parse_graph_file(p)
    assert g.edges == {("A", "B")}
    assert g.calls("A", "B") == 3
    assert g.system.class_count == 2


def test_graph_unknown_class_names_it(tmp_path):
    p = write(tmp_path, "g.json", {"system": "s", "classes": ["A", "B"],
                                   "edges": [{"src": "A", "dst": "B", "calls": 1},
                                             {"src": "A", "dst": "Z", "calls": 1}]})
    with pytest.raises(IngestError, match="Z") as info:
        ingest.parse_graph_file(p)
    assert info.value.line is not None


def test_graph_malformed_record_has_line_number(tmp_path):
    text = '{\n "system": "s",\n "classes": ["A", "B"],\n "edges": [\n  {"src": "A", "dst": "B", "calls": 1},\n  {"src": "A", "dst": "B", "calls": -2}\n ]\n}\n'
    p = write(tmp_path, "g.json", text)
    with pytest.raises(IngestError) as info:
        ingest.parse_graph_file(p)
    assert info.value.line == 6


def test_graph_self_loop_dropped_with_warning(tmp_path, caplog):
    p = write(tmp_path, "g.json", {"system": "s", "classes": ["A", "B"],
                                   "edges": [{"src": "A", "dst": "A", "calls": 2},
                                             {"src": "A", "dst": "B", "calls": 1}]})
    with caplog.at_level(logging.WARNING):
        g = ingest.parse_graph_file(p)
    assert g.edges == {("A", "B")}
    assert "self-loop" in caplog.text


def test_graph_duplicate_pairs_collapse(tmp_path):
    p = write(tmp_path, "g.json", {"system": "s", "classes": ["A", "B"],
                                   "edges": [{"src": "A", "dst": "B", "calls": 2},
                                             {"src": "A", "dst": "B", "calls": 0}]})
    assert ingest.parse_graph_file(p).call_counts == {("A", "B"): 2}


def test_graph_round_trip_synthetic(tmp_path):
    ds = generate(SynthParams(classes=500, requests=1, seed=3))
    ingest.write_graph_file(ds.graph, tmp_path / "g.json")
    g = ingest.parse_graph_file(tmp_path / "g.json")
    assert g.system.class_count == 500
    assert g == ds.graph
    ingest.write_graph_file(g, tmp_path / "g2.json")
    assert (tmp_path / "g2.json").read_bytes() == (tmp_path / "g.json").read_bytes()


# -- commit log -------------------------------------------------------------

def commits_file(tmp_path, records):
    return write(tmp_path, "c.jsonl", "".join(json.dumps(r) + "\n" for r in records))


def test_commit_interval_filter(tmp_path):
    p = commits_file(tmp_path, [
        {"id": "1", "date": "2005-01-01", "classes": ["A", "B"]},
        {"id": "2", "date": "2010-01-01", "classes": ["A"]},
        {"id": "3", "date": "2006-03-04", "classes": ["B", "C"]},
    ])
    ts = ingest.parse_commit_log(p, ("2004-12-31", "2009-12-22"))
    assert [t.commit_id for t in ts.transactions] == ["1", "3"]
    # Inclusive on both ends, day precision, unpadded dates accepted.
    ts = ingest.parse_commit_log(p, ("2005-1-1", "2006-3-4"))
    assert len(ts) == 2


def test_commit_empty_interval(tmp_path):
    p = commits_file(tmp_path, [])
    with pytest.raises(IngestError):
        ingest.parse_commit_log(p, ("2009-01-02", "2009-01-01"))


def test_commit_bad_date_line(tmp_path):
    p = commits_file(tmp_path, [{"id": "1", "date": "2005-01-01", "classes": []},
                                {"id": "2", "date": "yesterday", "classes": []}])
    with pytest.raises(IngestError) as info:
        ingest.parse_commit_log(p, ("2000-01-01", "2020-01-01"))
    assert info.value.line == 2


def test_commit_paths_mapped_to_classes(tmp_path):
    p = commits_file(tmp_path, [{"id": "1", "date": "2005-01-01",
                                 "classes": ["trunk/src/org/gjt/sp/jedit/Buffer.java", "doc/README.txt",
                                             "org.gjt.sp.jedit.View"]}])
    ts = ingest.parse_commit_log(p, ("2000-01-01", "2020-01-01"))
    assert ts.transactions[0].classes == {"org.gjt.sp.jedit.Buffer", "org.gjt.sp.jedit.View"}


def test_class_id_from_path():
    assert class_id_from_path("src/main/java/org/x/Foo.java") == "org.x.Foo"
    assert class_id_from_path("jhotdraw7/src/main/java/org/jhotdraw/app/App.java") == "org.jhotdraw.app.App"
    assert class_id_from_path("org\\x\\Bar.java") == "org.x.Bar"
    assert class_id_from_path("docs/index.html") is None
    assert class_id_from_path("weird/Path.java", {"weird/Path.java": "custom.Id"}) == "custom.Id"


def test_historical_classes_flagged(tmp_path):
    ds = generate(SynthParams(classes=20, requests=1, seed=2))
    p = commits_file(tmp_path, [{"id": "1", "date": "2005-01-01", "classes": ["gone.Old", sorted(ds.graph.system.classes)[0]]}])
    ts = ingest.parse_commit_log(p, ("2000-01-01", "2020-01-01"))
    assert ts.unknown_classes(ds.graph.system) == {"gone.Old"}
    assert "gone.Old" in ts.transactions[0].classes


def test_jedit_shaped_history(tmp_path):
    start, end = dt.date(2004, 12, 31), dt.date(2009, 12, 22)
    span = (end - start).days
    recs = [{"id": str(i), "date": (start + dt.timedelta(days=i * span // 2050)).isoformat(), "classes": ["A"]}
            for i in range(2051)]
    recs.insert(0, {"id": "early", "date": "2004-12-30", "classes": ["A"]})
    recs.append({"id": "late", "date": "2009-12-23", "classes": ["A"]})
    ts = ingest.parse_commit_log(commits_file(tmp_path, recs), ("2004-12-31", "2009-12-22"))
    assert len(ts) == 2051


@given(st.lists(st.tuples(st.dates(dt.date(2000, 1, 1), dt.date(2003, 12, 31)), st.sets(st.sampled_from("ABC"))),
                max_size=15),
       st.dates(dt.date(2000, 1, 1), dt.date(2003, 12, 31)), st.integers(0, 800))
def test_commit_filter_order_preserving(tmp_path_factory, commits, start, width):
    end = start + dt.timedelta(days=width)
    path = tmp_path_factory.mktemp("log") / "c.jsonl"
    path.write_text("".join(json.dumps({"id": str(i), "date": d.isoformat(), "classes": sorted(c)}) + "\n"
                            for i, (d, c) in enumerate(commits)))
    ts = ingest.parse_commit_log(path, (start, end))
    expected = [str(i) for i, (d, _) in enumerate(commits) if start <= d <= end]
    assert [t.commit_id for t in ts.transactions] == expected
    assert ingest.parse_commit_log(path, (start, end)) == ts


def test_name_only_log(tmp_path):
    raw = write(tmp_path, "raw.txt",
                "commit a1 2005-02-03\nsrc/org/x/Foo.java\nsrc/org/x/Bar.java\n\n"
                "commit a2 2005-02-04\nsrc/org/x/Foo.java\nbuild.xml\n")
    recs = ingest.parse_name_only_log(raw)
    assert recs == [{"id": "a1", "date": "2005-02-03", "classes": ["org.x.Bar", "org.x.Foo"]},
                    {"id": "a2", "date": "2005-02-04", "classes": ["org.x.Foo"]}]


def test_name_only_log_bad_header(tmp_path):
    raw = write(tmp_path, "raw.txt", "commit a1 2005-02-03\nFoo.java\n\nnot a header\n")
    with pytest.raises(IngestError) as info:
        ingest.parse_name_only_log(raw)
    assert info.value.line == 4


# -- corpus and change requests ----------------------------------------------

def test_corpus_inline_and_path(tmp_path):
    (tmp_path / "b.java").write_text("class B { void drawIcon() {} }")
    p = write(tmp_path, "corpus.json", {"docs": {"A": {"text": "alpha beta"}, "B": {"path": "b.java"}}})
    from iiasim.model import SubjectSystem
    corpus = ingest.parse_corpus(p, SubjectSystem("s", frozenset({"A", "B"})))
    assert corpus.texts()["A"] == "alpha beta"
    assert "drawIcon" in corpus.texts()["B"]


def test_corpus_missing_class(tmp_path):
    from iiasim.model import SubjectSystem
    p = write(tmp_path, "corpus.json", {"docs": {"A": {"text": "alpha"}}})
    with pytest.raises(IngestError, match="B"):
        ingest.parse_corpus(p, SubjectSystem("s", frozenset({"A", "B"})))


def test_corpus_empty_documents_flagged(tmp_path):
    p = write(tmp_path, "corpus.json", {"docs": {"A": {"text": "alpha"}, "B": {"text": "public void"}}})
    assert ingest.parse_corpus(p).empty_documents() == ["B"]


def _system(n):
    from iiasim.model import SubjectSystem
    return SubjectSystem("s", frozenset(f"C{i}" for i in range(n)))


def test_change_requests(tmp_path, caplog):
    p = write(tmp_path, "cr.json", [
        {"id": "1", "text": "icons", "revision": "783", "ais": [f"C{i}" for i in range(7)]},
        {"id": "2", "text": "tiny", "revision": "800", "ais": ["C1"]},
    ])
    with caplog.at_level(logging.WARNING):
        cases = ingest.parse_change_requests(p, _system(10))
    assert [c.request_id for c in cases] == ["1"]
    assert len(cases[0].ais) == 7 and cases[0].revision == "783"
    assert "at least 2" in caplog.text


def test_change_request_unknown_class(tmp_path):
    p = write(tmp_path, "cr.json", [{"id": "1", "text": "x", "revision": "", "ais": ["C1", "Ghost"]}])
    with pytest.raises(IngestError, match="Ghost"):
        ingest.parse_change_requests(p, _system(3))


def test_synthetic_dataset_parses(tmp_path):
    ds = generate(SynthParams(classes=60, requests=4, seed=9))
    write_dataset(ds, tmp_path)
    g = ingest.parse_graph_file(tmp_path / "graph.json")
    cases = ingest.parse_change_requests(tmp_path / "requests.json", g.system)
    assert cases == ds.cases
    ts = ingest.parse_commit_log(tmp_path / "commits.jsonl", ds.interval)
    assert len(ts) == len(ds.commits)
    assert ingest.parse_corpus(tmp_path / "corpus.json", g.system).texts() == ds.documents
