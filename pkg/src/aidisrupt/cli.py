"""Pipeline subcommands with manifests for byte-reproducible re-runs.

Each stage reads its declared inputs, writes its module's output files into
the --out directory, and records a manifest of content hashes so a re-run
with the same inputs and seed can be verified byte-for-byte. All randomness
derives from the single config seed via per-stage seeds.

Exit codes: 0 success, 1 usage/config error, 2 data error.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import logging
import sys
import zlib
from pathlib import Path
from typing import Iterable, Sequence

from . import __version__, aggregate as agg, annotate as ann
from .config import PipelineConfig, load_config
from .corpus import (
    load_citations,
    load_industry_map,
    load_patents,
    load_tasks,
    load_vacancies,
    require_sector_coverage,
)
from .disruption import (
    DisruptionCounts,
    DisruptionScore,
    PatentClass,
    build_graph,
    classify_patents,
    filter_ai_patents,
    score_patents,
)
from .embedding import EmbeddingStore, MatchResult, TaskImpactLabel, classify_tasks, impact_threshold, match_tasks
from .errors import ConfigError, DataError
from .stats import null_model_zscores, pearson_with_outlier_exclusion, two_prop_test
from .tasknet import Partition, TaskNetwork, build_network, louvain, sample_representatives

log = logging.getLogger(__name__)

STAGE_ORDER = (
    "score",
    "filter",
    "match",
    "classify",
    "network",
    "sample",
    "annotate",
    "consensus",
    "zscores",
    "aggregate",
    "correlate",
)

DIMENSIONS = (ann.Dimension.HOW, ann.Dimension.REPETITIVENESS, ann.Dimension.NATURE)


def stage_seed(seed: int, stage: str) -> int:
    return seed ^ zlib.crc32(stage.encode("utf-8"))


def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    with path.open("rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def _write_manifest(out: Path, stage: str, inputs: dict[str, Path], outputs: Sequence[str], seed: int) -> None:
    doc = {
        "stage": stage,
        "version": __version__,
        "seed": seed,
        "inputs": {k: _sha256(p) for k, p in sorted(inputs.items())},
        "outputs": {name: _sha256(out / name) for name in sorted(outputs)},
    }
    (out / f"{stage}.manifest.json").write_text(
        json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )


def _fmt(value) -> str:
    if isinstance(value, float):  # includes numpy float64
        return repr(float(value))
    if value is None:
        return ""
    return str(value)


def _write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def _read_csv(path: Path, expected_header: Sequence[str]) -> list[list[str]]:
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != list(expected_header):
            raise DataError(f"{path}: bad header {header!r}, expected {list(expected_header)}")
        return [row for row in reader]


def _write_json(path: Path, doc) -> None:
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _require(out: Path, name: str, producer: str) -> Path:
    p = out / name
    if not p.exists():
        raise DataError(f"missing artifact {name}: run the '{producer}' subcommand first")
    return p


def _load_graph(cfg: PipelineConfig):
    patents = load_patents(cfg.path("patents"))
    citations = load_citations(cfg.path("citations"), {p.patent_id for p in patents})
    return patents, build_graph(patents, citations.edges)


SCORES_HEADER = ("patent_id", "n_i", "n_j", "n_k", "d", "class")
MATCHES_HEADER = ("task_id", "best_patent_id", "best_similarity", "label")


def _read_scores(path: Path) -> tuple[list[list[str]], dict[str, DisruptionScore]]:
    rows = _read_csv(path, SCORES_HEADER)
    scores: dict[str, DisruptionScore] = {}
    for row in rows:
        pid, n_i, n_j, n_k, d, _cls = row
        scores[pid] = DisruptionScore(
            pid,
            DisruptionCounts(int(n_i), int(n_j), int(n_k)),
            float(d) if d else None,
        )
    return rows, scores


def _read_matches(path: Path) -> tuple[list[MatchResult], dict[str, TaskImpactLabel | None]]:
    rows = _read_csv(path, MATCHES_HEADER)
    results: list[MatchResult] = []
    labels: dict[str, TaskImpactLabel | None] = {}
    for row in rows:
        tid, pid, sim, label = row
        results.append(MatchResult(tid, pid, float(sim)))
        labels[tid] = TaskImpactLabel(label) if label else None
    return results, labels


def _require_labels(labels: dict[str, TaskImpactLabel | None]) -> dict[str, TaskImpactLabel]:
    if any(v is None for v in labels.values()):
        raise DataError("matches.csv has unlabeled tasks: run the 'classify' subcommand first")
    return labels  # type: ignore[return-value]


def stage_score(cfg: PipelineConfig, out: Path) -> None:
    patents, graph = _load_graph(cfg)
    scores = score_patents(graph, [p.patent_id for p in patents], threads=cfg.threads)
    _write_csv(
        out / "scores.csv",
        SCORES_HEADER,
        [(s.patent_id, s.counts.n_i, s.counts.n_j, s.counts.n_k, s.d, "") for s in scores],
    )
    _write_manifest(
        out,
        "score",
        {"patents": cfg.path("patents"), "citations": cfg.path("citations")},
        ["scores.csv"],
        cfg.seed,
    )


def stage_filter(cfg: PipelineConfig, out: Path) -> None:
    patents, graph = _load_graph(cfg)
    kept = filter_ai_patents(patents, cfg.filter, graph)
    _write_csv(out / "ai_patents.csv", ("patent_id",), [(pid,) for pid in kept])
    _write_manifest(
        out,
        "filter",
        {"patents": cfg.path("patents"), "citations": cfg.path("citations")},
        ["ai_patents.csv"],
        cfg.seed,
    )


def stage_match(cfg: PipelineConfig, out: Path) -> None:
    ai_path = _require(out, "ai_patents.csv", "filter")
    ai_ids = [row[0] for row in _read_csv(ai_path, ("patent_id",))]
    if not ai_ids:
        raise DataError("ai_patents.csv lists no patents; nothing to match against")
    tasks = EmbeddingStore.load(cfg.path("task_embeddings"))
    patents = EmbeddingStore.load(cfg.path("patent_embeddings")).subset(ai_ids)
    results = match_tasks(tasks, patents)
    _write_csv(
        out / "matches.csv",
        MATCHES_HEADER,
        [(r.task_id, r.best_patent_id, r.best_similarity, "") for r in results],
    )
    _write_manifest(
        out,
        "match",
        {
            "ai_patents.csv": ai_path,
            "task_embeddings": cfg.path("task_embeddings"),
            "patent_embeddings": cfg.path("patent_embeddings"),
        },
        ["matches.csv"],
        cfg.seed,
    )


def stage_classify(cfg: PipelineConfig, out: Path) -> None:
    scores_path = _require(out, "scores.csv", "score")
    ai_path = _require(out, "ai_patents.csv", "filter")
    matches_path = _require(out, "matches.csv", "match")
    score_rows, scores = _read_scores(scores_path)
    ai_ids = [row[0] for row in _read_csv(ai_path, ("patent_id",))]
    missing = [pid for pid in ai_ids if pid not in scores]
    if missing:
        raise DataError("AI patents without scores: " + ", ".join(missing[:10]))
    classification = classify_patents(
        [scores[pid] for pid in ai_ids], cfg.quartile_low, cfg.quartile_high
    )
    labeled_rows = []
    for row in score_rows:
        cls = classification.labels.get(row[0])
        labeled_rows.append(row[:5] + [cls.value if cls else ""])
    _write_csv(out / "scores.csv", SCORES_HEADER, labeled_rows)

    results, _ = _read_matches(matches_path)
    threshold = impact_threshold(results, cfg.impact_percentile)
    task_labels = classify_tasks(results, threshold, classification.labels)
    _write_csv(
        out / "matches.csv",
        MATCHES_HEADER,
        [
            (r.task_id, r.best_patent_id, r.best_similarity, task_labels[r.task_id].value)
            for r in results
        ],
    )
    class_counts = {c.value: 0 for c in PatentClass}
    for cls in classification.labels.values():
        class_counts[cls.value] += 1
    label_counts = {lab.value: 0 for lab in TaskImpactLabel}
    for lab in task_labels.values():
        label_counts[lab.value] += 1
    _write_json(
        out / "classify.json",
        {
            "q25": classification.q25,
            "q75": classification.q75,
            "degenerate": classification.degenerate,
            "undefined_scores": sorted(classification.undefined_ids),
            "impact_threshold": threshold,
            "patent_class_counts": class_counts,
            "task_label_counts": label_counts,
        },
    )
    _write_manifest(
        out,
        "classify",
        {"ai_patents.csv": ai_path},
        ["scores.csv", "matches.csv", "classify.json"],
        cfg.seed,
    )


def stage_network(cfg: PipelineConfig, out: Path) -> None:
    matches_path = _require(out, "matches.csv", "match")
    _, labels = _read_matches(matches_path)
    task_labels = _require_labels(labels)
    group = TaskImpactLabel(cfg.network_group)
    group_ids = [tid for tid, lab in task_labels.items() if lab is group]
    if len(group_ids) < 3:
        raise DataError(f"group {group.value!r} has {len(group_ids)} tasks; need at least 3")
    store = EmbeddingStore.load(cfg.path("task_embeddings")).subset(group_ids)
    net = build_network(store, cfg.edge_percentile)
    seed = stage_seed(cfg.seed, "network")
    part = louvain(net, seed)
    _write_csv(out / "network.csv", ("a", "b", "weight"), [(a, b, w) for a, b, w in net.edges])
    _write_csv(
        out / "partition.csv",
        ("task_id", "community"),
        [(node, part.communities[node]) for node in net.nodes],
    )
    _write_json(
        out / "network_meta.json",
        {
            "group": group.value,
            "percentile_cutoff": net.percentile_cutoff,
            "modularity": part.modularity,
            "n_communities": part.n_communities,
            "seed": seed,
            "trajectory": list(part.trajectory),
        },
    )
    _write_manifest(
        out,
        "network",
        {"matches.csv": matches_path, "task_embeddings": cfg.path("task_embeddings")},
        ["network.csv", "partition.csv", "network_meta.json"],
        cfg.seed,
    )


def _read_network(out: Path) -> tuple[TaskNetwork, Partition, dict]:
    net_path = _require(out, "network.csv", "network")
    part_path = _require(out, "partition.csv", "network")
    meta_path = _require(out, "network_meta.json", "network")
    meta = json.loads(meta_path.read_text(encoding="utf-8"))
    part_rows = _read_csv(part_path, ("task_id", "community"))
    nodes = tuple(row[0] for row in part_rows)
    communities = {row[0]: int(row[1]) for row in part_rows}
    edges = tuple(
        (row[0], row[1], float(row[2])) for row in _read_csv(net_path, ("a", "b", "weight"))
    )
    net = TaskNetwork(nodes=nodes, edges=edges, percentile_cutoff=float(meta["percentile_cutoff"]))
    part = Partition(
        communities=communities,
        modularity=float(meta["modularity"]),
        trajectory=tuple(meta["trajectory"]),
        seed=int(meta["seed"]),
    )
    return net, part, meta


def stage_sample(cfg: PipelineConfig, out: Path) -> None:
    net, part, _meta = _read_network(out)
    matches_path = _require(out, "matches.csv", "match")
    _, labels = _read_matches(matches_path)
    task_labels = _require_labels(labels)
    if cfg.sample_total is not None:
        total = cfg.sample_total
    else:
        n_dc = sum(
            1
            for lab in task_labels.values()
            if lab in (TaskImpactLabel.IMPACTED_DISRUPTIVE, TaskImpactLabel.IMPACTED_CONSOLIDATING)
        )
        total = min(n_dc, len(net.nodes))
        if total < 1:
            raise DataError("auto sample size is 0: no disruptive/consolidating tasks")
    plan = sample_representatives(net, part, total)
    _write_csv(out / "sample.csv", ("task_id", "community", "degree", "rank"), plan.rows)
    _write_manifest(
        out,
        "sample",
        {"network.csv": out / "network.csv", "partition.csv": out / "partition.csv"},
        ["sample.csv"],
        cfg.seed,
    )


def _annotation_set(cfg: PipelineConfig, out: Path) -> list:
    tasks = load_tasks(cfg.path("tasks"))
    matches_path = _require(out, "matches.csv", "match")
    _, labels = _read_matches(matches_path)
    task_labels = _require_labels(labels)
    sample_path = _require(out, "sample.csv", "sample")
    sampled = [row[0] for row in _read_csv(sample_path, ("task_id", "community", "degree", "rank"))]
    wanted = {
        tid
        for tid, lab in task_labels.items()
        if lab in (TaskImpactLabel.IMPACTED_DISRUPTIVE, TaskImpactLabel.IMPACTED_CONSOLIDATING)
    }
    wanted.update(sampled)
    by_id = {t.task_id: t for t in tasks}
    missing = sorted(wanted - set(by_id))
    if missing:
        raise DataError("annotation set references unknown tasks: " + ", ".join(missing[:10]))
    return [by_id[tid] for tid in sorted(wanted)]


def stage_annotate(cfg: PipelineConfig, out: Path) -> None:
    records = _annotation_set(cfg, out)
    rows = []
    missing: dict[str, list[str]] = {}
    for dim in DIMENSIONS:
        run = ann.annotate_llm(records, dim, cfg.llm)
        rows.extend(
            (a.task_id, a.dimension.value, a.label, a.source, a.annotator_id)
            for a in run.annotations
        )
        if run.missing:
            missing[dim.value] = run.missing
    _write_csv(
        out / "annotations.csv", ("task_id", "dimension", "label", "source", "annotator_id"), rows
    )
    _write_json(
        out / "annotate_report.json",
        {"n_tasks": len(records), "n_annotations": len(rows), "missing": missing},
    )
    inputs = {"matches.csv": out / "matches.csv", "sample.csv": out / "sample.csv"}
    if cfg.llm.replay_path and Path(cfg.llm.replay_path).exists():
        inputs["replay"] = Path(cfg.llm.replay_path)
    _write_manifest(out, "annotate", inputs, ["annotations.csv", "annotate_report.json"], cfg.seed)


def _load_annotation_rows(path: Path, source: str) -> list[ann.Annotation]:
    rows = _read_csv(path, ("task_id", "dimension", "label", "source", "annotator_id"))
    return [
        ann.Annotation(tid, ann.Dimension.parse(dim), label, src, annotator)
        for tid, dim, label, src, annotator in rows
        if src == source
    ]


def stage_consensus(cfg: PipelineConfig, out: Path) -> None:
    ann_path = _require(out, "annotations.csv", "annotate")
    llm_cons = ann.consensus_labels(_load_annotation_rows(ann_path, "llm"))
    survey_path = cfg.paths.get("survey")
    if survey_path is None or not survey_path.exists():
        raise DataError(f"paths.survey is required for consensus, got {survey_path}")
    human_cons = ann.consensus_labels(ann.ingest_survey(survey_path), required_n=3)

    rows = [
        (c.task_id, c.dimension.value, c.label, c.support, c.n_annotators, src)
        for src, cons in (("llm", llm_cons), ("human", human_cons))
        for c in cons
    ]
    _write_csv(
        out / "consensus.csv",
        ("task_id", "dimension", "label", "support", "n_annotators", "source"),
        rows,
    )

    report: dict = {"agreement": {}, "n_compared": {}}
    for dim in DIMENSIONS:
        human_ids = {c.task_id for c in human_cons if c.dimension is dim}
        llm_ids = {c.task_id for c in llm_cons if c.dimension is dim}
        common = human_ids & llm_ids
        if not common:
            report["agreement"][dim.value] = None
            report["n_compared"][dim.value] = 0
            continue
        a = [c for c in llm_cons if c.dimension is dim and c.task_id in common]
        b = [c for c in human_cons if c.dimension is dim and c.task_id in common]
        report["agreement"][dim.value] = ann.agreement_rate(a, b, dim)
        report["n_compared"][dim.value] = len(common)

    adj_path = cfg.paths.get("adjudication")
    if adj_path is not None and adj_path.exists():
        author_cons = ann.consensus_labels(ann.ingest_survey(adj_path, source="author"))
        report["alignment"] = {}
        for dim in DIMENSIONS:
            author_ids = {c.task_id for c in author_cons if c.dimension is dim}
            entry = {}
            for name, cons in (("llm", llm_cons), ("human", human_cons)):
                common = author_ids & {c.task_id for c in cons if c.dimension is dim}
                if common:
                    a = [c for c in author_cons if c.dimension is dim and c.task_id in common]
                    b = [c for c in cons if c.dimension is dim and c.task_id in common]
                    entry[name] = ann.agreement_rate(a, b, dim)
                else:
                    entry[name] = None
            report["alignment"][dim.value] = entry
    _write_json(out / "agreement.json", report)
    inputs = {"annotations.csv": ann_path, "survey": survey_path}
    if adj_path is not None and adj_path.exists():
        inputs["adjudication"] = adj_path
    _write_manifest(out, "consensus", inputs, ["consensus.csv", "agreement.json"], cfg.seed)


def stage_zscores(cfg: PipelineConfig, out: Path) -> None:
    cons_path = _require(out, "consensus.csv", "consensus")
    matches_path = _require(out, "matches.csv", "match")
    rows = _read_csv(cons_path, ("task_id", "dimension", "label", "support", "n_annotators", "source"))
    chars: dict[str, dict[str, str]] = {}
    for tid, dim, label, _s, _n, source in rows:
        if source == "llm":
            chars.setdefault(tid, {})[dim] = label
    complete = {tid: c for tid, c in chars.items() if len(c) == len(DIMENSIONS)}
    dropped = len(chars) - len(complete)
    if dropped:
        log.warning("%d tasks lack a full characteristic set and are excluded", dropped)
    _, labels = _read_matches(matches_path)
    task_labels = _require_labels(labels)
    model_labels = {tid: task_labels[tid].value for tid in complete}
    results = null_model_zscores(
        model_labels, complete, cfg.n_iter, stage_seed(cfg.seed, "zscores"), threads=cfg.threads
    )
    _write_csv(
        out / "zscores.csv",
        ("group", "characteristic", "value", "observed", "null_mean", "null_std", "z"),
        [
            (r.group, r.characteristic, r.value, r.observed_ratio, r.null_mean, r.null_std, r.z)
            for r in results
        ],
    )
    _write_manifest(
        out,
        "zscores",
        {"consensus.csv": cons_path, "matches.csv": matches_path},
        ["zscores.csv"],
        cfg.seed,
    )


def stage_aggregate(cfg: PipelineConfig, out: Path) -> None:
    matches_path = _require(out, "matches.csv", "match")
    results, labels = _read_matches(matches_path)
    task_labels = _require_labels(labels)
    tasks = load_tasks(cfg.path("tasks"))
    industry_map = load_industry_map(cfg.path("occ_industry"))
    require_sector_coverage(tasks, industry_map)
    patents = load_patents(cfg.path("patents"))

    ind = agg.industry_deltas(task_labels, tasks, industry_map)
    _write_csv(
        out / "industry.csv",
        (
            "sector",
            "t_disruptive",
            "t_consolidating",
            "t_all",
            "p_disruptive",
            "p_consolidating",
            "p_all",
            "delta_disruptive",
            "delta_consolidating",
        ),
        [
            (
                s,
                ind.t_disruptive[s],
                ind.t_consolidating[s],
                ind.t_all[s],
                ind.p_disruptive[s],
                ind.p_consolidating[s],
                ind.p_all[s],
                ind.delta_disruptive[s],
                ind.delta_consolidating[s],
            )
            for s in ind.sectors
        ],
    )

    states = agg.state_deltas(task_labels, results, patents)
    _write_csv(
        out / "states.csv",
        (
            "state",
            "weight_disruptive",
            "weight_consolidating",
            "weight_all",
            "p_disruptive",
            "p_consolidating",
            "p_all",
            "delta",
            "delta_vs_all_disruptive",
            "delta_vs_all_consolidating",
        ),
        [
            (
                s,
                states.weight_disruptive[s],
                states.weight_consolidating[s],
                states.weight_all[s],
                states.p_disruptive[s],
                states.p_consolidating[s],
                states.p_all[s],
                states.delta[s],
                states.delta_vs_all_disruptive[s],
                states.delta_vs_all_consolidating[s],
            )
            for s in states.states
        ],
    )

    exp = agg.sector_exposure(task_labels, tasks, industry_map)
    _write_csv(
        out / "exposure.csv",
        (
            "sector",
            "t_total",
            "t_disruptive",
            "t_consolidating",
            "ratio_disruptive",
            "ratio_consolidating",
        ),
        [
            (
                s,
                exp.t_total[s],
                exp.t_disruptive[s],
                exp.t_consolidating[s],
                exp.ratio_disruptive[s],
                exp.ratio_consolidating[s],
            )
            for s in exp.sectors
        ],
    )

    _write_json(
        out / "plot_industry.json",
        {
            "disruptive": dict(ind.delta_disruptive),
            "consolidating": dict(ind.delta_consolidating),
        },
    )
    _write_json(
        out / "plot_states.json",
        {
            "delta": dict(states.delta),
            "delta_vs_all_disruptive": dict(states.delta_vs_all_disruptive),
            "delta_vs_all_consolidating": dict(states.delta_vs_all_consolidating),
            "unknown": {
                "disruptive": states.unknown_disruptive,
                "consolidating": states.unknown_consolidating,
                "all": states.unknown_all,
            },
        },
    )

    # per-sector state breakdown for the four sectors with the most impacted tasks
    top4 = sorted(ind.sectors, key=lambda s: (-ind.t_all[s], s))[:4]
    by_sector: dict = {"sectors": top4, "per_sector": {}, "skipped": {}}
    for sector in top4:
        try:
            per = agg.state_deltas_by_sector(
                task_labels, results, patents, tasks, industry_map, [sector]
            )[sector]
        except DataError as exc:
            by_sector["skipped"][sector] = str(exc)
            continue
        by_sector["per_sector"][sector] = {
            "delta": dict(per.delta),
            "delta_vs_all_disruptive": dict(per.delta_vs_all_disruptive),
            "delta_vs_all_consolidating": dict(per.delta_vs_all_consolidating),
        }
    _write_json(out / "states_by_sector.json", by_sector)

    twoprop_rows = []
    for cls_name, t_cls, total_cls in (
        ("disruptive", ind.t_disruptive, ind.total_disruptive),
        ("consolidating", ind.t_consolidating, ind.total_consolidating),
    ):
        for s in ind.sectors:
            res = two_prop_test(t_cls[s], total_cls, ind.t_all[s], ind.total_all)
            twoprop_rows.append(
                (cls_name, s, t_cls[s], total_cls, ind.t_all[s], ind.total_all, res.z, res.p_value)
            )
    _write_csv(
        out / "twoprop.csv",
        ("class", "sector", "k1", "n1", "k2", "n2", "z", "p_value"),
        twoprop_rows,
    )

    _write_manifest(
        out,
        "aggregate",
        {
            "matches.csv": matches_path,
            "tasks": cfg.path("tasks"),
            "occ_industry": cfg.path("occ_industry"),
            "patents": cfg.path("patents"),
        },
        [
            "industry.csv",
            "states.csv",
            "exposure.csv",
            "plot_industry.json",
            "plot_states.json",
            "states_by_sector.json",
            "twoprop.csv",
        ],
        cfg.seed,
    )


def stage_correlate(cfg: PipelineConfig, out: Path) -> None:
    exp_path = _require(out, "exposure.csv", "aggregate")
    rows = _read_csv(
        exp_path,
        (
            "sector",
            "t_total",
            "t_disruptive",
            "t_consolidating",
            "ratio_disruptive",
            "ratio_consolidating",
        ),
    )
    vacancies = load_vacancies(cfg.path("vacancy"))
    joined = []
    for sector, _t, _td, _tc, rd, rc in rows:
        if sector not in vacancies:
            log.warning("sector %s has no vacancy rate; skipped in correlation", sector)
            continue
        joined.append((sector, vacancies[sector], float(rd), float(rc)))
    if len(joined) < 4:
        raise DataError(f"only {len(joined)} sectors join exposure with vacancy; need at least 4")
    sectors = [s for s, _v, _rd, _rc in joined]
    x = [v for _s, v, _rd, _rc in joined]
    doc: dict = {
        "x": "vacancy_rate",
        "y": "exposure_ratio",
        "sigma_mult": cfg.sigma_mult,
        "sectors": sectors,
    }
    for cls_name, ys in (
        ("disruptive", [rd for *_rest, rd, _rc in joined]),
        ("consolidating", [rc for *_rest, rc in joined]),
    ):
        res = pearson_with_outlier_exclusion(x, ys, sigma_mult=cfg.sigma_mult, ids=sectors)
        doc[cls_name] = {
            "r": res.r,
            "p_value": res.p_value,
            "n": res.n,
            "excluded": list(res.excluded),
            "slope": res.slope,
            "intercept": res.intercept,
        }
    _write_json(out / "correlations.json", doc)
    _write_manifest(
        out,
        "correlate",
        {"exposure.csv": exp_path, "vacancy": cfg.path("vacancy")},
        ["correlations.json"],
        cfg.seed,
    )


STAGES = {
    "score": stage_score,
    "filter": stage_filter,
    "match": stage_match,
    "classify": stage_classify,
    "network": stage_network,
    "sample": stage_sample,
    "annotate": stage_annotate,
    "consensus": stage_consensus,
    "zscores": stage_zscores,
    "aggregate": stage_aggregate,
    "correlate": stage_correlate,
}


def run_all(cfg: PipelineConfig, out: Path) -> None:
    for stage in STAGE_ORDER:
        log.info("== stage %s ==", stage)
        STAGES[stage](cfg, out)


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # exit 1 on usage errors, not argparse's default 2
        raise ConfigError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="aidisrupt", description="Patent-disruption and task-exposure pipeline")
    parser.add_argument("--config", required=True, help="pipeline config file (INI)")
    parser.add_argument("--seed", type=int, default=None, help="override the config seed")
    parser.add_argument("--threads", type=int, default=None, help="override the thread limit")
    parser.add_argument("--out", default="out", help="output directory (default: out)")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in STAGE_ORDER + ("run-all",):
        p = sub.add_parser(name)
        if name in ("zscores", "run-all"):
            p.add_argument("--n-iter", type=int, default=None, help="override thresholds.n_iter")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        cfg = load_config(args.config)
        if args.seed is not None:
            if args.seed < 0:
                raise ConfigError(f"--seed must be non-negative, got {args.seed}")
            cfg.seed = args.seed
        if args.threads is not None:
            if args.threads < 1:
                raise ConfigError(f"--threads must be at least 1, got {args.threads}")
            cfg.threads = args.threads
        n_iter = getattr(args, "n_iter", None)
        if n_iter is not None:
            if n_iter < 2:
                raise ConfigError(f"thresholds.n_iter must be >= 2, got {n_iter}")
            cfg.n_iter = n_iter
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        if args.command == "run-all":
            run_all(cfg, out)
        else:
            STAGES[args.command](cfg, out)
        return 0
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
