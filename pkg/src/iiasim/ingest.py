"""Readers and writers for the interchange files: graph, commit log, corpus, change requests."""

from __future__ import annotations

import datetime as dt
import json
import logging
import re
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping

from .model import ChangeCase, ClassId, DependencyGraph, MalformedInputError, SubjectSystem

log = logging.getLogger(__name__)

# Source-root markers stripped from committed file paths, most specific first.
DEFAULT_SOURCE_ROOTS = ("src/main/java/", "src/java/", "src/", "source/", "java/")


class IngestError(ValueError):
    def __init__(self, message: str, path: str | Path | None = None, line: int | None = None):
        self.path = str(path) if path is not None else None
        self.line = line
        where = ""
        if path is not None:
            where = f"{path}:{line}: " if line is not None else f"{path}: "
        super().__init__(where + message)


# ---------------------------------------------------------------------------
# Tokenizer
# ---------------------------------------------------------------------------

_WORD = re.compile(r"[A-Z]+(?![a-z])|[A-Z]?[a-z]+")


@lru_cache(maxsize=1)
def stopwords() -> frozenset[str]:
    text = resources.files("iiasim").joinpath("data/stopwords.txt").read_text(encoding="utf-8")
    words: set[str] = set()
    for line in text.splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            words.update(line.split())
    return frozenset(words)


def tokenize(text: str) -> list[str]:
    """Split identifiers on camelCase, underscores and digits; lowercase; drop stop words and 1-letter terms."""
    stop = stopwords()
    out = []
    for m in _WORD.finditer(text):
        term = m.group(0).lower()
        if len(term) > 1 and term not in stop:
            out.append(term)
    return out


# ---------------------------------------------------------------------------
# JSON helpers
# ---------------------------------------------------------------------------

def _load_json(path: Path):
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise IngestError(f"cannot read file: {exc.strerror}", path) from exc
    try:
        return text, json.loads(text)
    except json.JSONDecodeError as exc:
        raise IngestError(f"invalid JSON: {exc.msg}", path, exc.lineno) from exc


def _array_lines(text: str, key: str | None) -> list[int]:
    """Line number of each element of the top-level array (or of ``obj[key]``)."""
    dec = json.JSONDecoder()
    if key is None:
        pos = text.index("[")
    else:
        m = re.search(r'"%s"\s*:\s*\[' % re.escape(key), text)
        if m is None:
            return []
        pos = m.end() - 1
    pos += 1
    lines = []
    ws = re.compile(r"[\s,]*")
    while True:
        pos = ws.match(text, pos).end()
        if pos >= len(text) or text[pos] == "]":
            return lines
        lines.append(text.count("\n", 0, pos) + 1)
        _, pos = dec.raw_decode(text, pos)


def parse_date(value: str) -> dt.date:
    """Calendar date from ``YYYY-MM-DD``; month and day may be unpadded (``2006-11-1``)."""
    m = re.fullmatch(r"\s*(\d{4})-(\d{1,2})-(\d{1,2})\s*", value)
    if m is None:
        raise ValueError(f"unparsable date {value!r}")
    return dt.date(int(m.group(1)), int(m.group(2)), int(m.group(3)))


# ---------------------------------------------------------------------------
# Graph file
# ---------------------------------------------------------------------------

def parse_graph_file(path: str | Path) -> DependencyGraph:
    path = Path(path)
    text, data = _load_json(path)
    if not isinstance(data, dict) or not isinstance(data.get("classes"), list):
        raise IngestError("graph file needs an object with a 'classes' list", path, 1)
    name = data.get("system")
    if not isinstance(name, str) or not name:
        raise IngestError("graph file needs a non-empty 'system' name", path, 1)

    class_lines = _array_lines(text, "classes")
    classes: set[ClassId] = set()
    for i, c in enumerate(data["classes"]):
        line = class_lines[i] if i < len(class_lines) else None
        if not isinstance(c, str) or not c:
            raise IngestError(f"invalid class id {c!r}", path, line)
        if c in classes:
            raise IngestError(f"duplicate class {c!r}", path, line)
        classes.add(c)
    if not classes:
        raise IngestError("graph declares no classes", path, 1)

    edges = data.get("edges", [])
    if not isinstance(edges, list):
        raise IngestError("'edges' must be a list", path, 1)
    edge_lines = _array_lines(text, "edges")
    counts: dict[tuple[ClassId, ClassId], int] = {}
    for i, rec in enumerate(edges):
        line = edge_lines[i] if i < len(edge_lines) else None
        if not isinstance(rec, dict):
            raise IngestError("edge record must be an object", path, line)
        src, dst, calls = rec.get("src"), rec.get("dst"), rec.get("calls", 0)
        if not isinstance(src, str) or not isinstance(dst, str):
            raise IngestError("edge needs string 'src' and 'dst'", path, line)
        if isinstance(calls, bool) or not isinstance(calls, int) or calls < 0:
            raise IngestError(f"edge {src}->{dst} has invalid call count {calls!r}", path, line)
        for c in (src, dst):
            if c not in classes:
                raise IngestError(f"edge {src}->{dst} references undeclared class {c}", path, line)
        if src == dst:
            log.warning("%s:%s: dropping self-loop on %s", path, line, src)
            continue
        # Several dependency kinds between one ordered pair collapse into one edge.
        counts[(src, dst)] = counts.get((src, dst), 0) + calls

    return DependencyGraph(SubjectSystem(name, frozenset(classes)), counts)


def graph_to_dict(graph: DependencyGraph) -> dict:
    return {
        "system": graph.system.name,
        "classes": sorted(graph.system.classes),
        "edges": [
            {"src": s, "dst": d, "calls": graph.call_counts[(s, d)]}
            for s, d in sorted(graph.call_counts)
        ],
    }


def write_graph_file(graph: DependencyGraph, path: str | Path) -> None:
    data = graph_to_dict(graph)
    # One record per line keeps error line numbers meaningful.
    lines = ['{', f'  "system": {json.dumps(data["system"])},', '  "classes": [']
    lines += [f"    {json.dumps(c)}," for c in data["classes"]]
    lines[-1] = lines[-1].rstrip(",")
    lines.append("  ],")
    lines.append('  "edges": [')
    if data["edges"]:
        lines += [f"    {json.dumps(e)}," for e in data["edges"]]
        lines[-1] = lines[-1].rstrip(",")
    lines.append("  ]")
    lines.append("}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


# ---------------------------------------------------------------------------
# Commit log
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Transaction:
    commit_id: str
    date: dt.date
    classes: frozenset[ClassId]


@dataclass(frozen=True)
class TransactionSet:
    transactions: tuple[Transaction, ...]
    interval: tuple[dt.date, dt.date]

    def __post_init__(self):
        start, end = self.interval
        if start > end:
            raise ValueError(f"empty interval: {start} > {end}")
        for t in self.transactions:
            if not start <= t.date <= end:
                raise ValueError(f"commit {t.commit_id} dated {t.date} outside {start}..{end}")

    def __len__(self):
        return len(self.transactions)

    def unknown_classes(self, system: SubjectSystem) -> frozenset[ClassId]:
        """Historical class ids absent from the current class list; they never get ranked."""
        seen = set().union(*(t.classes for t in self.transactions)) if self.transactions else set()
        return frozenset(seen - system.classes)


def class_id_from_path(
    path: str,
    mapping: Mapping[str, ClassId] | None = None,
    source_roots: Iterable[str] = DEFAULT_SOURCE_ROOTS,
    accept_ids: bool = True,
) -> ClassId | None:
    """Map a committed file path to a class id; ``None`` for non-Java files.

    The path up to and including the first source-root marker is dropped,
    the ``.java`` suffix removed, and separators turned into dots.  With
    ``accept_ids``, strings without separators or suffix are taken as class
    ids already.
    """
    if mapping and path in mapping:
        return mapping[path]
    p = path.strip().replace("\\", "/")
    if not p.endswith(".java"):
        return p if accept_ids and p and "/" not in p else None
    p = p[: -len(".java")]
    for root in source_roots:
        if p.startswith(root):
            p = p[len(root):]
            break
        i = p.find("/" + root)
        if i >= 0:
            p = p[i + 1 + len(root):]
            break
    return p.strip("/").replace("/", ".") or None


def _map_classes(paths, mapping, source_roots, accept_ids=True) -> frozenset[ClassId]:
    out = set()
    for p in paths:
        c = class_id_from_path(p, mapping, source_roots, accept_ids)
        if c is not None:
            out.add(c)
    return frozenset(out)


def load_path_mapping(path: str | Path | None) -> dict[str, ClassId] | None:
    if path is None:
        return None
    path = Path(path)
    _, data = _load_json(path)
    if not isinstance(data, dict) or not all(isinstance(v, str) for v in data.values()):
        raise IngestError("mapping file must be an object of path -> class id", path, 1)
    return data


def parse_commit_log(
    path: str | Path,
    interval: tuple[dt.date | str, dt.date | str],
    mapping: Mapping[str, ClassId] | None = None,
    source_roots: Iterable[str] = DEFAULT_SOURCE_ROOTS,
) -> TransactionSet:
    """Read a JSON Lines commit log, keeping commits dated inside ``interval`` (inclusive)."""
    path = Path(path)
    start, end = (parse_date(d) if isinstance(d, str) else d for d in interval)
    if start > end:
        raise IngestError(f"empty interval: {start} > {end}", path)
    source_roots = tuple(source_roots)
    kept = []
    try:
        fh = path.open(encoding="utf-8")
    except OSError as exc:
        raise IngestError(f"cannot read file: {exc.strerror}", path) from exc
    with fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise IngestError(f"invalid JSON: {exc.msg}", path, lineno) from exc
            if not isinstance(rec, dict) or not isinstance(rec.get("classes"), list):
                raise IngestError("commit record needs 'id', 'date' and a 'classes' list", path, lineno)
            try:
                date = parse_date(str(rec.get("date", "")))
            except ValueError as exc:
                raise IngestError(str(exc), path, lineno) from exc
            if start <= date <= end:
                kept.append(Transaction(str(rec.get("id", "")), date,
                                        _map_classes(rec["classes"], mapping, source_roots)))
    return TransactionSet(tuple(kept), (start, end))


_HEADER = re.compile(r"commit\s+(\S+)\s+(\S+)\s*")


def parse_name_only_log(
    path: str | Path,
    mapping: Mapping[str, ClassId] | None = None,
    source_roots: Iterable[str] = DEFAULT_SOURCE_ROOTS,
) -> list[dict]:
    """Parse a plain-text name-only log export into commit-log records.

    Blocks are separated by blank lines; each starts with
    ``commit <id> <YYYY-MM-DD>`` followed by one file path per line.
    """
    path = Path(path)
    records: list[dict] = []
    current = None
    with path.open(encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.rstrip("\n")
            if not line.strip():
                current = None
                continue
            if current is None:
                m = _HEADER.fullmatch(line)
                if m is None:
                    raise IngestError(f"malformed commit header {line!r}", path, lineno)
                try:
                    date = parse_date(m.group(2))
                except ValueError as exc:
                    raise IngestError(str(exc), path, lineno) from exc
                current = {"id": m.group(1), "date": date.isoformat(), "paths": []}
                records.append(current)
            else:
                current["paths"].append(line.strip())
    out = []
    for r in records:
        classes = sorted(_map_classes(r["paths"], mapping, tuple(source_roots), accept_ids=False))
        out.append({"id": r["id"], "date": r["date"], "classes": classes})
    return out


def write_commit_log(records: Iterable[dict], path: str | Path) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        for r in records:
            fh.write(json.dumps({"id": r["id"], "date": r["date"], "classes": list(r["classes"])}) + "\n")


# ---------------------------------------------------------------------------
# Corpus manifest
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DocSource:
    text: str | None = None
    path: Path | None = None

    def read(self) -> str:
        if self.text is not None:
            return self.text
        return self.path.read_text(encoding="utf-8", errors="replace")


@dataclass(frozen=True)
class CorpusManifest:
    entries: Mapping[ClassId, DocSource]

    def texts(self) -> dict[ClassId, str]:
        return {c: self.entries[c].read() for c in sorted(self.entries)}

    def empty_documents(self) -> list[ClassId]:
        return [c for c, t in self.texts().items() if not tokenize(t)]


def parse_corpus(path: str | Path, system: SubjectSystem | None = None) -> CorpusManifest:
    path = Path(path)
    _, data = _load_json(path)
    docs = data.get("docs") if isinstance(data, dict) else None
    if not isinstance(docs, dict):
        raise IngestError("corpus manifest needs a 'docs' object", path, 1)
    entries = {}
    for cid, spec in docs.items():
        if isinstance(spec, dict) and isinstance(spec.get("text"), str):
            entries[cid] = DocSource(text=spec["text"])
        elif isinstance(spec, dict) and isinstance(spec.get("path"), str):
            doc_path = (path.parent / spec["path"]).resolve()
            if not doc_path.is_file():
                raise IngestError(f"document for {cid} not found: {doc_path}", path)
            entries[cid] = DocSource(path=doc_path)
        else:
            raise IngestError(f"document for {cid} needs 'text' or 'path'", path)
    if system is not None:
        missing = sorted(system.classes - entries.keys())
        if missing:
            raise IngestError(f"corpus lacks documents for {len(missing)} classes, e.g. {missing[0]}", path)
        extra = sorted(entries.keys() - system.classes)
        if extra:
            log.warning("%s: ignoring %d documents for unknown classes, e.g. %s", path, len(extra), extra[0])
            entries = {c: d for c, d in entries.items() if c in system.classes}
    manifest = CorpusManifest(entries)
    empty = manifest.empty_documents()
    if empty:
        log.warning("%s: %d empty documents, e.g. %s", path, len(empty), empty[0])
    return manifest


# ---------------------------------------------------------------------------
# Change requests
# ---------------------------------------------------------------------------

def parse_change_requests(path: str | Path, system: SubjectSystem | None = None) -> list[ChangeCase]:
    """Read change requests; records with fewer than two AIS classes are skipped with a warning."""
    path = Path(path)
    text, data = _load_json(path)
    if not isinstance(data, list):
        raise IngestError("change-request file must be a JSON array", path, 1)
    lines = _array_lines(text, None)
    cases = []
    seen = set()
    for i, rec in enumerate(data):
        line = lines[i] if i < len(lines) else None
        if not isinstance(rec, dict) or not isinstance(rec.get("ais"), list):
            raise IngestError("change request needs 'id', 'text' and an 'ais' list", path, line)
        rid = str(rec.get("id", ""))
        if not rid:
            raise IngestError("change request without id", path, line)
        if rid in seen:
            raise IngestError(f"duplicate change request id {rid!r}", path, line)
        seen.add(rid)
        ais = frozenset(str(c) for c in rec["ais"])
        if system is not None:
            for c in sorted(ais):
                if c not in system.classes:
                    raise IngestError(f"request {rid}: AIS class {c} not in graph", path, line)
        try:
            case = ChangeCase(rid, str(rec.get("text", "")), ais, str(rec.get("revision", "")))
        except MalformedInputError as exc:
            log.warning("%s:%s: rejected: %s", path, line, exc)
            continue
        cases.append(case)
    return cases


def write_change_requests(cases: Iterable[ChangeCase], path: str | Path) -> None:
    recs = [{"id": c.request_id, "text": c.text, "revision": c.revision, "ais": sorted(c.ais)} for c in cases]
    Path(path).write_text(json.dumps(recs, indent=1) + "\n", encoding="utf-8")
