"""Seeded synthetic subject systems: dependency graph, documents, history, change requests.

The generator stands in for mined open-source data.  Classes are grouped
into topical packages; edges and vocabulary follow package locality, a few
hub classes attract many dependencies, commits are random walks over the
graph plus planted co-change pairs, and each change request's AIS is grown
from a seed class with a tunable share of two-hop steps (which force
Propagating classes during reenactment).
"""

from __future__ import annotations

import datetime as dt
import json
import random
from dataclasses import dataclass, field
from pathlib import Path

from .ingest import write_change_requests, write_commit_log, write_graph_file
from .model import ChangeCase, DependencyGraph, SubjectSystem

_ONSETS = ["b", "c", "d", "f", "g", "h", "j", "k", "l", "m", "n", "p", "r", "s", "t", "v", "w", "z",
           "br", "cl", "dr", "fl", "gr", "pl", "st", "tr", "sh", "ch"]
_VOWELS = ["a", "e", "i", "o", "u", "ai", "ea", "ou"]
_CODAS = ["", "n", "r", "l", "s", "t", "m", "x", "nd", "rk"]


@dataclass
class SynthParams:
    classes: int = 500
    requests: int = 15
    seed: int = 1
    name: str = "synth"
    mean_out_degree: float = 5.0
    local_edge_share: float = 0.8
    commits: int | None = None  # default 4 * classes
    planted_pairs: int | None = None  # default classes // 50
    reach: float = 0.75  # chance a new AIS member is a direct neighbor
    ais_sizes: tuple[int, int] = (2, 7)
    start_date: dt.date = field(default_factory=lambda: dt.date(2004, 1, 1))


@dataclass
class SynthDataset:
    graph: DependencyGraph
    documents: dict[str, str]
    commits: list[dict]
    cases: list[ChangeCase]
    planted: list[tuple[str, str]]
    interval: tuple[str, str]


def _word(rng: random.Random, used: set[str]) -> str:
    while True:
        w = "".join(rng.choice(_ONSETS) + rng.choice(_VOWELS) for _ in range(rng.choice((1, 2, 2))))
        w += rng.choice(_CODAS)
        if len(w) > 2 and w not in used:
            used.add(w)
            return w


def generate(params: SynthParams) -> SynthDataset:
    if params.classes < 10:
        raise ValueError("need at least 10 classes")
    rng = random.Random(params.seed)
    used: set[str] = set()
    n = params.classes
    n_topics = max(2, n // 20)
    topics = [[_word(rng, used) for _ in range(12)] for _ in range(n_topics)]
    general = [_word(rng, used) for _ in range(40)]

    topic_of = [i % n_topics for i in range(n)]
    rng.shuffle(topic_of)
    names, name_words = [], []
    for i in range(n):
        t = topic_of[i]
        ws = rng.sample(topics[t], 2)
        names.append(f"{params.name}.{topics[t][0]}.{ws[0].capitalize()}{ws[1].capitalize()}{i:04d}")
        name_words.append(ws)
    members = [[i for i in range(n) if topic_of[i] == t] for t in range(n_topics)]
    popularity = [rng.paretovariate(1.3) for _ in range(n)]

    counts: dict[tuple[int, int], int] = {}

    def add_edge(a, b, local):
        if a == b or (a, b) in counts:
            return
        if rng.random() < 0.2:
            calls = 0  # inheritance / type-only reference
        else:
            calls = 1 + int(rng.expovariate(1 / (4.0 if local else 1.5)))
        counts[(a, b)] = calls

    order = list(range(n))
    rng.shuffle(order)
    for k in range(1, n):
        add_edge(order[k], order[rng.randrange(k)], False)
    for a in range(n):
        for _ in range(int(rng.expovariate(1 / params.mean_out_degree))):
            local = rng.random() < params.local_edge_share
            pool = members[topic_of[a]] if local else range(n)
            pool = list(pool)
            b = rng.choices(pool, weights=[popularity[j] for j in pool])[0]
            add_edge(a, b, local)

    system = SubjectSystem(params.name, frozenset(names))
    graph = DependencyGraph(system, {(names[a], names[b]): c for (a, b), c in counts.items()})

    adj: list[set[int]] = [set() for _ in range(n)]
    for a, b in counts:
        adj[a].add(b)
        adj[b].add(a)
    adj_sorted = [sorted(s) for s in adj]

    documents = {}
    for i in range(n):
        t = topic_of[i]
        toks = [w.capitalize() for w in name_words[i]] * 3
        toks += rng.choices(topics[t], k=25)
        for j in adj_sorted[i]:
            toks += [w.capitalize() for w in name_words[j]]
        toks += rng.choices(general, k=8)
        rng.shuffle(toks)
        documents[names[i]] = "class " + " ".join(toks)

    n_planted = params.planted_pairs if params.planted_pairs is not None else max(1, n // 50)
    planted = []
    while len(planted) < n_planted:
        a, b = rng.sample(range(n), 2)
        if (a, b) not in planted and (b, a) not in planted:
            planted.append((a, b))

    def walk(start, length):
        cur, out = start, {start}
        for _ in range(length):
            if not adj_sorted[cur]:
                break
            cur = rng.choice(adj_sorted[cur])
            out.add(cur)
        return out

    n_commits = params.commits if params.commits is not None else 4 * n
    commits = []
    day = params.start_date
    for k in range(n_commits):
        members_k = walk(rng.randrange(n), rng.randint(0, 5))
        if rng.random() < 0.3:
            members_k.update(planted[rng.randrange(len(planted))])
        commits.append({"id": f"r{k + 1}", "date": day.isoformat(), "classes": sorted(names[i] for i in members_k)})
        if rng.random() < 0.5:
            day += dt.timedelta(days=1)
    interval = (params.start_date.isoformat(), day.isoformat())

    lo, hi = params.ais_sizes
    cases = []
    for r in range(params.requests):
        size = rng.randint(lo, hi)
        ais = [rng.randrange(n)]
        guard = 0
        while len(ais) < size and guard < 1000:
            guard += 1
            base = rng.choice(ais)
            cand = adj_sorted[base]
            if not cand:
                continue
            nxt = rng.choice(cand)
            if rng.random() >= params.reach and adj_sorted[nxt]:
                nxt = rng.choice(adj_sorted[nxt])
            if nxt not in ais:
                ais.append(nxt)
        while len(ais) < lo:
            extra = rng.randrange(n)
            if extra not in ais:
                ais.append(extra)
        words = []
        for i in ais:
            words += name_words[i] + rng.choices(topics[topic_of[i]], k=3)
        words += rng.choices(general, k=4)
        rng.shuffle(words)
        text = "The " + " ".join(words) + " should be fixed."
        cases.append(ChangeCase(f"CR-{r + 1:03d}", text, frozenset(names[i] for i in ais), f"r{n_commits + r + 1}"))

    return SynthDataset(graph, documents, commits, cases,
                        [(names[a], names[b]) for a, b in planted], interval)


def write_dataset(ds: SynthDataset, out_dir: str | Path, seed: int = 0) -> Path:
    """Write every input file plus a ready-to-run ``config.json``; returns the config path."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_graph_file(ds.graph, out / "graph.json")
    write_commit_log(ds.commits, out / "commits.jsonl")
    (out / "corpus.json").write_text(
        json.dumps({"docs": {c: {"text": t} for c, t in sorted(ds.documents.items())}}, indent=1) + "\n",
        encoding="utf-8")
    write_change_requests(ds.cases, out / "requests.json")
    (out / "planted.json").write_text(json.dumps([list(p) for p in ds.planted], indent=1) + "\n", encoding="utf-8")
    config = {
        "graph": "graph.json",
        "commits": "commits.jsonl",
        "interval": list(ds.interval),
        "corpus": "corpus.json",
        "requests": "requests.json",
        "rnd_seed": seed,
        "output_dir": "results",
    }
    path = out / "config.json"
    path.write_text(json.dumps(config, indent=2) + "\n", encoding="utf-8")
    return path
