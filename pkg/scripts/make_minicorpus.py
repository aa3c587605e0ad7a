#!/usr/bin/env python3
"""Generate the shipped synthetic mini-corpus under data/minicorpus/.

Everything is derived from one fixed seed: ~300 patents with a citation
graph dense enough for disruption scoring, 400 tasks across 6 sectors and
24 occupations, clustered embeddings for both, vacancy rates, a survey
file, an author adjudication file, and an NDJSON replay log that lets the
annotation stage run fully offline. Re-running this script reproduces the
corpus byte-for-byte.
"""

from __future__ import annotations

import argparse
import datetime as dt
import json
import shutil
import sys
import tempfile
from pathlib import Path

import numpy as np

from aidisrupt import cli
from aidisrupt.annotate import Dimension, render_prompt, _request_key
from aidisrupt.config import load_config
from aidisrupt.corpus import (
    CitationEdge,
    IndustryMap,
    Patent,
    TaskRecord,
    write_citations,
    write_industry_map,
    write_patents,
    write_tasks,
    write_vacancies,
)
from aidisrupt.embedding import EmbeddingStore

SEED = 20240811
DIM = 24

SECTORS = {
    "Manufacturing": {
        "occupations": ["O_MF1", "O_MF2", "O_MF3", "O_MF4"],
        "verbs": ["Assemble", "Weld", "Machine", "Calibrate", "Polish"],
        "objects": ["engine housings", "steel brackets", "gearbox casings", "conveyor rollers"],
        "labels": {"nature": "P", "repetitiveness": "R", "how": "D"},
        "vacancy": 4.1,
    },
    "Information": {
        "occupations": ["O_IT1", "O_IT2", "O_IT3", "O_IT4"],
        "verbs": ["Debug", "Refactor", "Profile", "Document", "Deploy"],
        "objects": ["database queries", "web services", "billing software", "log dashboards"],
        "labels": {"nature": "M", "repetitiveness": "V", "how": "D"},
        "vacancy": 7.9,
    },
    "Health Care": {
        "occupations": ["O_HC1", "O_HC2", "O_HC3", "O_HC4"],
        "verbs": ["Examine", "Bathe", "Transport", "Comfort", "Monitor"],
        "objects": ["recovering patients", "ward residents", "clinic visitors", "newborns"],
        "labels": {"nature": "P", "repetitiveness": "V", "how": "T"},
        "vacancy": 8.6,
    },
    "Construction": {
        "occupations": ["O_CN1", "O_CN2", "O_CN3", "O_CN4"],
        "verbs": ["Pour", "Frame", "Shingle", "Excavate", "Grade"],
        "objects": ["foundation slabs", "interior walls", "roof decks", "drainage trenches"],
        "labels": {"nature": "P", "repetitiveness": "R", "how": "D"},
        "vacancy": 5.2,
    },
    "Education": {
        "occupations": ["O_ED1", "O_ED2", "O_ED3", "O_ED4"],
        "verbs": ["Tutor", "Grade", "Mentor", "Advise", "Lecture"],
        "objects": ["undergraduate seminars", "exam cohorts", "thesis students", "night classes"],
        "labels": {"nature": "M", "repetitiveness": "V", "how": "T"},
        "vacancy": 3.4,
    },
    "Retail Trade": {
        "occupations": ["O_RT1", "O_RT2", "O_RT3", "O_RT4"],
        "verbs": ["Restock", "Bag", "Price", "Greet", "Arrange"],
        "objects": ["produce shelves", "seasonal displays", "checkout lanes", "stockroom bins"],
        "labels": {"nature": "P", "repetitiveness": "R", "how": "T"},
        "vacancy": 6.3,
    },
}

STATES = ["CA", "NY", "WA", "TX", "IL", "MI", "OH", "FL"]

AI_PHRASES = [
    "machine learning",
    "deep learning",
    "artificial intelligence",
    "neural network",
    "computer vision",
    "natural language processing",
    "speech processing",
    "reinforcement learning",
    "image recognition",
    "predictive analytics",
]

AI_DOMAINS = [
    "inspecting weld seams",
    "triaging support tickets",
    "scheduling hospital wards",
    "grading handwriting",
    "forecasting shelf demand",
    "steering excavators",
    "reading invoices",
    "sorting recyclables",
]

PLAIN_THINGS = [
    "hinge", "valve", "fastener", "gasket", "pulley", "bearing",
    "sprocket", "filter", "clamp", "latch",
]
PLAIN_USES = [
    "greenhouse vents", "bicycle frames", "irrigation pumps", "cargo doors",
    "furnace ducts", "window blinds", "garden carts", "ladder hinges",
]


def build_tasks(rng):
    tasks, centers = [], {}
    for si, (sector, spec) in enumerate(SECTORS.items()):
        center = np.zeros(DIM)
        center[4 * si : 4 * si + 4] = 3.0
        centers[sector] = center
    vectors, i = [], 0
    for sector, spec in SECTORS.items():
        for _ in range(400 // len(SECTORS)):
            i += 1
            tid = f"T{i:04d}"
            occ = spec["occupations"][rng.integers(0, 4)]
            desc = (
                f"{spec['verbs'][rng.integers(0, len(spec['verbs']))]} "
                f"{spec['objects'][rng.integers(0, len(spec['objects']))]} "
                f"during shift {int(rng.integers(1, 400))}"
            )
            tasks.append(TaskRecord(tid, desc, occ))
            vectors.append(centers[sector] + rng.normal(0.0, 1.0, DIM))
    # remainder to reach exactly 400
    while i < 400:
        i += 1
        sector = list(SECTORS)[int(rng.integers(0, len(SECTORS)))]
        spec = SECTORS[sector]
        tasks.append(TaskRecord(f"T{i:04d}", f"Sort {spec['objects'][0]} overflow", spec["occupations"][0]))
        vectors.append(centers[sector] + rng.normal(0.0, 1.0, DIM))
    store = EmbeddingStore([t.task_id for t in tasks], np.array(vectors, dtype=np.float32))
    return tasks, store, centers


def build_patents(rng, centers):
    sectors = list(SECTORS)
    patents, vectors = [], []
    plan = (
        [("old_plain", y) for y in rng.integers(2005, 2014, 60)]
        + [("old_ai", y) for y in rng.integers(2010, 2015, 20)]
        + [("ai", y) for y in rng.integers(2015, 2020, 110)]
        + [("plain", y) for y in rng.integers(2015, 2020, 60)]
        + [("late_ai", y) for y in rng.integers(2020, 2022, 15)]
        + [("late_plain", y) for y in rng.integers(2020, 2022, 35)]
    )
    for i, (kind, year) in enumerate(plan, start=1):
        pid = f"P{i:04d}"
        date = dt.date(int(year), int(rng.integers(1, 13)), int(rng.integers(1, 29)))
        state = None if rng.random() < 0.05 else STATES[int(rng.integers(0, len(STATES)))]
        if kind in ("ai", "old_ai", "late_ai"):
            phrase = AI_PHRASES[int(rng.integers(0, len(AI_PHRASES)))]
            domain = AI_DOMAINS[int(rng.integers(0, len(AI_DOMAINS)))]
            title = f"{phrase.title()} apparatus"
            abstract = f"A {phrase} system for {domain}."
            codes = frozenset({"G06N20/00"}) if rng.random() < 0.2 else frozenset()
            sector = sectors[int(rng.integers(0, len(sectors)))]
            vec = 0.85 * centers[sector] + rng.normal(0.0, 1.2, DIM)
        else:
            thing = PLAIN_THINGS[int(rng.integers(0, len(PLAIN_THINGS)))]
            use = PLAIN_USES[int(rng.integers(0, len(PLAIN_USES)))]
            title = f"Improved {thing}"
            abstract = f"An improved {thing} for {use}."
            codes = frozenset()
            vec = rng.normal(0.0, 2.0, DIM)
        patents.append(Patent(pid, date, title, abstract, state, codes))
        vectors.append(vec)
    store = EmbeddingStore([p.patent_id for p in patents], np.array(vectors, dtype=np.float32))
    return patents, store


def build_citations(rng, patents, target=2000):
    by_date = sorted(patents, key=lambda p: (p.grant_date, p.patent_id))
    position = {p.patent_id: i for i, p in enumerate(by_date)}
    edges = set()

    def add(citing, cited):
        if citing.patent_id != cited.patent_id and citing.grant_date > cited.grant_date:
            edges.add((citing.patent_id, cited.patent_id))

    # references: every patent cites a handful of strictly earlier patents
    for i, p in enumerate(by_date):
        if i == 0:
            continue
        for _ in range(int(rng.integers(1, 7))):
            add(p, by_date[int(rng.integers(0, i))])
    # forward citations: in-window AI patents each get several later citers
    late = [p for p in by_date if p.grant_date.year >= 2020]
    for p in by_date:
        is_ai_window = 2015 <= p.grant_date.year <= 2019 and (
            "system for" in p.abstract and "improved" not in p.abstract.lower()
        )
        if is_ai_window:
            for _ in range(int(rng.integers(3, 9))):
                add(late[int(rng.integers(0, len(late)))], p)
    # top up with random later-cites-earlier edges
    guard = 0
    while len(edges) < target and guard < 50000:
        guard += 1
        a = by_date[int(rng.integers(1, len(by_date)))]
        b = by_date[int(rng.integers(0, position[a.patent_id]))]
        add(a, b)
    return [CitationEdge(a, b) for a, b in sorted(edges)]


def llm_label(rng, sector_labels, dimension):
    """Sector-typical label with a 15% deterministic flip."""
    label = sector_labels[dimension.value]
    if rng.random() < 0.15:
        pair = {"P": "M", "M": "P", "R": "V", "V": "R", "T": "D", "D": "T"}
        label = pair[label]
    return label


def write_replay(path, records, model):
    lines = []
    for task, dim, label in records:
        prompt = render_prompt(task, dim)
        body = {"model": model, "messages": [{"role": "user", "content": prompt}]}
        content = json.dumps(
            {"Task": task.description, dim.reply_field: label, "Explanation": "synthetic fixture"}
        )
        response = {"choices": [{"message": {"content": content}}]}
        lines.append(json.dumps({"key": _request_key(body), "request": body, "response": response}, sort_keys=True))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


CONFIG_TEMPLATE = """\
[paths]
patents = patents.csv
citations = citations.csv
tasks = tasks.csv
occ_industry = occ_industry.csv
vacancy = vacancy.csv
task_embeddings = tasks.emb
patent_embeddings = patents.emb
survey = survey.csv
adjudication = adjudication.csv
replay = replay.ndjson

[filter]
year_min = 2015
year_max = 2019
min_forward_citations = 3
require_reference = true
cpc_prefixes = G06N

[thresholds]
impact_percentile = 90
edge_percentile = 95
quartile_low = 25
quartile_high = 75
sigma_mult = 2.0
n_iter = 500

[run]
seed = 1729
threads = 1

[network]
group = not_impacted
sample_total = auto

[llm]
base_url = https://llm.invalid/v1
model = annotator-1
credential_env = AIDISRUPT_LLM_KEY
max_retries = 2
timeout = 30
concurrency = 4
"""


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--dest", default="data/minicorpus", help="output directory")
    parser.add_argument("--validate", action="store_true", help="run the full pipeline afterwards")
    args = parser.parse_args(argv)
    dest = Path(args.dest)
    dest.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(SEED)

    tasks, task_store, centers = build_tasks(rng)
    patents, patent_store = build_patents(rng, centers)
    edges = build_citations(rng, patents)

    mapping = {occ: sector for sector, spec in SECTORS.items() for occ in spec["occupations"]}
    industry_map = IndustryMap(mapping, frozenset(mapping.values()))
    vacancies = {sector: spec["vacancy"] for sector, spec in SECTORS.items()}

    write_patents(dest / "patents.csv", patents)
    write_citations(dest / "citations.csv", edges)
    write_tasks(dest / "tasks.csv", tasks)
    write_industry_map(dest / "occ_industry.csv", industry_map)
    write_vacancies(dest / "vacancy.csv", vacancies)
    task_store.save(dest / "tasks.emb")
    patent_store.save(dest / "patents.emb")
    (dest / "config.ini").write_text(CONFIG_TEMPLATE, encoding="utf-8")

    # Run the early stages once to learn which tasks the annotate stage will
    # request, then synthesize replies for exactly that set.
    cfg = load_config(dest / "config.ini")
    with tempfile.TemporaryDirectory() as tmp:
        out = Path(tmp)
        for stage in ("score", "filter", "match", "classify", "network", "sample"):
            cli.STAGES[stage](cfg, out)
        annotation_set = cli._annotation_set(cfg, out)

    sector_of = {t.task_id: mapping[t.occupation_code] for t in tasks}
    records = []
    llm_by_task = {}
    for dim in (Dimension.HOW, Dimension.REPETITIVENESS, Dimension.NATURE):
        for t in annotation_set:
            label = llm_label(rng, SECTORS[sector_of[t.task_id]]["labels"], dim)
            records.append((t, dim, label))
            llm_by_task[(t.task_id, dim)] = label
    write_replay(dest / "replay.ndjson", records, cfg.llm.model)

    # Survey: 3 crowd annotators for the first 20 annotated tasks; each agrees
    # with the model label 80% of the time.
    flip = {"P": "M", "M": "P", "R": "V", "V": "R", "T": "D", "D": "T"}
    survey_rows = ["task_id,dimension,label,annotator_id"]
    surveyed = annotation_set[:20]
    for t in surveyed:
        for dim in (Dimension.HOW, Dimension.REPETITIVENESS, Dimension.NATURE):
            base = llm_by_task[(t.task_id, dim)]
            for w in range(3):
                label = base if rng.random() < 0.8 else flip[base]
                survey_rows.append(f"{t.task_id},{dim.value},{label},w{w + 1}")
    (dest / "survey.csv").write_text("\n".join(survey_rows) + "\n", encoding="utf-8")

    # Author adjudication for the first 6 surveyed tasks (single annotator).
    adj_rows = ["task_id,dimension,label,annotator_id"]
    for t in surveyed[:6]:
        for dim in (Dimension.HOW, Dimension.REPETITIVENESS, Dimension.NATURE):
            adj_rows.append(f"{t.task_id},{dim.value},{llm_by_task[(t.task_id, dim)]},author1")
    (dest / "adjudication.csv").write_text("\n".join(adj_rows) + "\n", encoding="utf-8")

    print(f"mini-corpus written to {dest}")
    print(f"  patents: {len(patents)}  citations: {len(edges)}  tasks: {len(tasks)}")
    print(f"  annotation set: {len(annotation_set)} tasks, replay records: {len(records)}")

    if args.validate:
        with tempfile.TemporaryDirectory() as tmp:
            out = Path(tmp)
            cli.run_all(cfg, out)
            produced = sorted(p.name for p in out.iterdir())
            print(f"  run-all produced {len(produced)} files: {', '.join(produced)}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
