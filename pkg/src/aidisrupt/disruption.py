"""Citation-graph disruption scoring and quartile classification of AI patents.

The disruption index of a focal patent looks at every patent granted
strictly later that cites the focal patent or at least one of its
references, and splits those citers into three disjoint sets:

- n_i cite the focal patent but none of its references,
- n_j cite the focal patent and at least one reference,
- n_k cite at least one reference but not the focal patent.

The index is d = (n_i - n_j) / (n_i + n_j + n_k), in [-1, 1]. d = 1 means
later work cites the patent while ignoring everything it built on
(disruptive); d = -1 means the patent is only ever co-cited with its
references (consolidating). The index is undefined when no later patent
cites the focal patent or its references.
"""

from __future__ import annotations

import datetime as dt
import logging
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Mapping, Sequence

from .corpus import CitationEdge, Patent
from .errors import DataError
from .percentile import nearest_rank

log = logging.getLogger(__name__)

# AI keyword list used to narrow the corpus to AI-related patents.
AI_KEYWORDS: tuple[str, ...] = (
    "machine learning",
    "deep learning",
    "artificial intelligence",
    "reinforcement learning",
    "neural network",
    "image recognition",
    "computer vision",
    "natural language processing",
    "computational linguistics",
    "speech processing",
    "control methods",
    "knowledge representation",
    "planning",
    "predictive analytics",
    "robot",
)


class PatentClass(Enum):
    DISRUPTIVE = "disruptive"
    CONSOLIDATING = "consolidating"
    MIDDLE = "middle"


@dataclass(frozen=True)
class CitationGraph:
    """Immutable citation relation plus grant dates.

    ``forward[p]`` is the set of patents citing p (forward citations);
    ``backward[p]`` is the set of patents p cites (its references). The two
    maps are exact transposes of each other and contain every loaded patent
    as a key.
    """

    forward: Mapping[str, frozenset[str]]
    backward: Mapping[str, frozenset[str]]
    grant_date: Mapping[str, dt.date]

    def __contains__(self, patent_id: str) -> bool:
        return patent_id in self.grant_date

    @property
    def n_edges(self) -> int:
        return sum(len(s) for s in self.forward.values())


@dataclass(frozen=True)
class DisruptionCounts:
    n_i: int
    n_j: int
    n_k: int

    @property
    def total(self) -> int:
        return self.n_i + self.n_j + self.n_k


@dataclass(frozen=True)
class DisruptionScore:
    patent_id: str
    counts: DisruptionCounts
    d: float | None  # None when no later patent cites the focal patent or its references


@dataclass(frozen=True)
class FilterConfig:
    """Filters selecting the AI patents whose disruption scores get classified."""

    year_min: int = 2015
    year_max: int = 2019
    min_forward_citations: int = 3
    require_reference: bool = True
    keywords: tuple[str, ...] = AI_KEYWORDS
    cpc_prefixes: tuple[str, ...] = ()


@dataclass(frozen=True)
class PatentClassification:
    """Quartile labels over the defined disruption scores."""

    labels: Mapping[str, PatentClass]
    q25: float
    q75: float
    undefined_ids: tuple[str, ...]
    degenerate: bool


def build_graph(patents: Sequence[Patent], edges: Iterable[CitationEdge]) -> CitationGraph:
    """Index the citation edges into forward/backward adjacency over loaded patents."""
    dates = {p.patent_id: p.grant_date for p in patents}
    fwd: dict[str, set[str]] = {pid: set() for pid in dates}
    bwd: dict[str, set[str]] = {pid: set() for pid in dates}
    for e in edges:
        if e.citing_id not in dates or e.cited_id not in dates:
            raise DataError(
                f"citation edge ({e.citing_id!r}, {e.cited_id!r}) references an unloaded patent"
            )
        fwd[e.cited_id].add(e.citing_id)
        bwd[e.citing_id].add(e.cited_id)
    return CitationGraph(
        forward={pid: frozenset(s) for pid, s in fwd.items()},
        backward={pid: frozenset(s) for pid, s in bwd.items()},
        grant_date=dates,
    )


def disruption_counts(graph: CitationGraph, focal: str) -> DisruptionCounts:
    """Count the three citer sets for one focal patent.

    The counting universe is every patent granted strictly after the focal
    patent that cites the focal patent or at least one of its references;
    each such citer falls in exactly one of the i/j/k sets no matter how
    many references it cites.
    """
    if focal not in graph:
        raise DataError(f"unknown focal patent {focal!r}")
    focal_date = graph.grant_date[focal]
    refs = graph.backward[focal]
    citers_of_focal = graph.forward[focal]
    citers_of_refs: set[str] = set()
    for r in refs:
        citers_of_refs.update(graph.forward[r])
    citers_of_refs.discard(focal)

    n_i = n_j = n_k = 0
    for p in citers_of_focal | citers_of_refs:
        if graph.grant_date[p] <= focal_date:
            continue
        cites_focal = p in citers_of_focal
        cites_ref = p in citers_of_refs
        if cites_focal and cites_ref:
            n_j += 1
        elif cites_focal:
            n_i += 1
        else:
            n_k += 1
    return DisruptionCounts(n_i, n_j, n_k)


def disruption_index(counts: DisruptionCounts) -> float | None:
    """(n_i - n_j) / (n_i + n_j + n_k); None when the denominator is zero."""
    if counts.total == 0:
        return None
    return (counts.n_i - counts.n_j) / counts.total


def score_patents(
    graph: CitationGraph,
    focals: Sequence[str] | None = None,
    threads: int = 1,
) -> list[DisruptionScore]:
    """Score every focal patent. Output order follows ``focals``.

    Per-focal scoring is independent, so the optional thread pool changes
    nothing about the results.
    """
    if focals is None:
        focals = sorted(graph.grant_date)

    def one(pid: str) -> DisruptionScore:
        counts = disruption_counts(graph, pid)
        return DisruptionScore(pid, counts, disruption_index(counts))

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(one, focals))
    return [one(pid) for pid in focals]


def _keyword_patterns(keywords: Iterable[str]) -> list[re.Pattern[str]]:
    pats = []
    for kw in keywords:
        phrase = r"\s+".join(re.escape(w) for w in kw.lower().split())
        pats.append(re.compile(r"(?<!\w)" + phrase + r"(?!\w)"))
    return pats


def _normalize_text(text: str) -> str:
    return " ".join(text.lower().split())


def filter_ai_patents(
    patents: Sequence[Patent],
    config: FilterConfig,
    graph: CitationGraph,
) -> list[str]:
    """Select AI patents: grant-year window, enough forward citations, at least
    one reference, and a keyword or CPC-prefix match.

    Keyword matching is case-insensitive whole-phrase containment on the
    whitespace-normalized title plus abstract, so "robot" matches the word
    but not "robotic".
    """
    if not config.keywords and not config.cpc_prefixes:
        raise DataError("filter needs at least one keyword or CPC prefix; both lists are empty")
    patterns = _keyword_patterns(config.keywords)
    kept: list[str] = []
    for p in patents:
        if not config.year_min <= p.grant_date.year <= config.year_max:
            continue
        if len(graph.forward[p.patent_id]) < config.min_forward_citations:
            continue
        if config.require_reference and not graph.backward[p.patent_id]:
            continue
        text = _normalize_text(p.title + " " + p.abstract)
        keyword_hit = any(pat.search(text) for pat in patterns)
        cpc_hit = any(
            code.startswith(prefix) for code in p.cpc_codes for prefix in config.cpc_prefixes
        )
        if keyword_hit or cpc_hit:
            kept.append(p.patent_id)
    log.info("AI filter kept %d of %d patents", len(kept), len(patents))
    return kept


def classify_patents(
    scores: Iterable[DisruptionScore],
    q_low: float = 25.0,
    q_high: float = 75.0,
) -> PatentClassification:
    """Label patents by quartile of the defined disruption scores.

    Top quartile (d >= q75) is disruptive, bottom quartile (d <= q25)
    consolidating, everything between middle. Undefined scores are excluded
    from the quartiles and reported. On a degenerate distribution where a
    score satisfies both cutoffs, the patent resolves to middle with a
    warning so no patent is double-labeled.
    """
    scores = list(scores)
    defined = [s for s in scores if s.d is not None]
    undefined = tuple(s.patent_id for s in scores if s.d is None)
    if len(defined) < 4:
        raise DataError(f"need at least 4 defined disruption scores to classify, got {len(defined)}")
    if not q_low < q_high:
        raise DataError(f"quartile cutoffs must satisfy low < high, got {q_low} >= {q_high}")
    values = [s.d for s in defined]
    q25 = nearest_rank(values, q_low)
    q75 = nearest_rank(values, q_high)
    labels: dict[str, PatentClass] = {}
    degenerate = False
    for s in defined:
        hi = s.d >= q75
        lo = s.d <= q25
        if hi and lo:
            degenerate = True
            labels[s.patent_id] = PatentClass.MIDDLE
        elif hi:
            labels[s.patent_id] = PatentClass.DISRUPTIVE
        elif lo:
            labels[s.patent_id] = PatentClass.CONSOLIDATING
        else:
            labels[s.patent_id] = PatentClass.MIDDLE
    if degenerate:
        log.warning(
            "degenerate disruption-score distribution (q25=%g >= q75=%g); "
            "patents at both cutoffs resolved to middle",
            q25,
            q75,
        )
    if undefined:
        log.info("%d patents had undefined disruption scores and were not classified", len(undefined))
    return PatentClassification(
        labels=labels, q25=q25, q75=q75, undefined_ids=undefined, degenerate=degenerate
    )
