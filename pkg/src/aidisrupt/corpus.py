"""Loaders and writers for the flat-file corpus.

Every input is UTF-8 CSV with a mandatory header row (RFC 4180 quoting):
patents, citation edges, occupational tasks, the occupation-to-industry
crosswalk, and industry vacancy rates. Loading is single-threaded and
validates invariants up front; the returned collections are treated as
immutable afterward and are safe to share across threads read-only.
"""

from __future__ import annotations

import csv
import datetime as dt
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Mapping, Sequence

from .errors import DataError

log = logging.getLogger(__name__)

GRANT_DATE_MIN = dt.date(1790, 1, 1)
GRANT_DATE_MAX = dt.date(2100, 1, 1)

PATENT_HEADER = ("patent_id", "grant_date", "title", "abstract", "assignee_state", "cpc_codes")
CITATION_HEADER = ("citing_id", "cited_id")
TASK_HEADER = ("task_id", "description", "occupation_code")
INDUSTRY_HEADER = ("occupation_code", "industry_sector")
VACANCY_HEADER = ("industry_sector", "vacancy_rate")


@dataclass(frozen=True)
class Patent:
    """One granted patent; node of the citation graph and matching target."""

    patent_id: str
    grant_date: dt.date
    title: str
    abstract: str
    assignee_state: str | None
    cpc_codes: frozenset[str]


@dataclass(frozen=True)
class CitationEdge:
    citing_id: str
    cited_id: str


@dataclass(frozen=True)
class TaskRecord:
    task_id: str
    description: str
    occupation_code: str


@dataclass(frozen=True)
class IndustryMap:
    """Total occupation -> industry sector mapping with its closed sector set."""

    mapping: Mapping[str, str]
    sectors: frozenset[str]

    def sector_for(self, occupation_code: str) -> str:
        try:
            return self.mapping[occupation_code]
        except KeyError:
            raise DataError(f"occupation code {occupation_code!r} has no industry sector") from None

    def missing_codes(self, tasks: Iterable[TaskRecord]) -> list[str]:
        return sorted({t.occupation_code for t in tasks} - set(self.mapping))


@dataclass
class CitationLoad:
    """Edges that survived validation, plus counts of what was dropped."""

    edges: list[CitationEdge] = field(default_factory=list)
    dropped_unknown: int = 0
    dropped_self: int = 0
    collapsed_duplicates: int = 0

    def __iter__(self) -> Iterator[CitationEdge]:
        return iter(self.edges)

    def __len__(self) -> int:
        return len(self.edges)


def _read_rows(path: str | Path, header: tuple[str, ...]) -> list[tuple[int, list[str]]]:
    path = Path(path)
    if not path.exists():
        raise DataError(f"{path}: file not found")
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            first = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty file, expected header {','.join(header)}") from None
        if tuple(first) != header:
            raise DataError(f"{path}: bad header {first!r}, expected {list(header)}")
        rows = []
        for row in reader:
            rows.append((reader.line_num, row))
    return rows


def _check_width(path: str | Path, line: int, row: list[str], header: tuple[str, ...]) -> None:
    if len(row) != len(header):
        raise DataError(f"{path}: line {line}: expected {len(header)} columns, got {len(row)}")


def load_patents(path: str | Path) -> list[Patent]:
    """Load patents.csv, preserving row order. Duplicate ids and bad dates are fatal."""
    patents: list[Patent] = []
    seen: dict[str, int] = {}
    for line, row in _read_rows(path, PATENT_HEADER):
        _check_width(path, line, row, PATENT_HEADER)
        pid, date_s, title, abstract, state, cpc = row
        if not pid:
            raise DataError(f"{path}: line {line}: column patent_id: empty id")
        if pid in seen:
            raise DataError(f"{path}: duplicate patent_id {pid!r} on lines {seen[pid]} and {line}")
        seen[pid] = line
        try:
            date = dt.date.fromisoformat(date_s)
        except ValueError:
            raise DataError(
                f"{path}: line {line}: column grant_date: {date_s!r} is not a valid YYYY-MM-DD date"
            ) from None
        if not GRANT_DATE_MIN <= date <= GRANT_DATE_MAX:
            raise DataError(
                f"{path}: line {line}: column grant_date: {date} outside "
                f"[{GRANT_DATE_MIN}, {GRANT_DATE_MAX}]"
            )
        if state and not (len(state) == 2 and state.isalpha()):
            raise DataError(
                f"{path}: line {line}: column assignee_state: {state!r} is not a 2-letter code"
            )
        codes = frozenset(c for c in cpc.split(";") if c)
        patents.append(Patent(pid, date, title, abstract, state or None, codes))
    log.info("loaded %d patents from %s", len(patents), path)
    return patents


def load_citations(path: str | Path, known_ids: Iterable[str]) -> CitationLoad:
    """Load citations.csv, keeping edges whose endpoints are both known.

    Self-citations and edges with unknown endpoints are dropped with a
    warning, not an error: a partial corpus must still load. Duplicate
    (citing, cited) pairs collapse to one edge.
    """
    known = set(known_ids)
    result = CitationLoad()
    seen: set[tuple[str, str]] = set()
    for line, row in _read_rows(path, CITATION_HEADER):
        _check_width(path, line, row, CITATION_HEADER)
        citing, cited = row
        if not citing or not cited:
            raise DataError(f"{path}: line {line}: empty patent id in citation row")
        if citing == cited:
            result.dropped_self += 1
            log.warning("%s: line %d: self-citation of %r dropped", path, line, citing)
            continue
        if citing not in known or cited not in known:
            result.dropped_unknown += 1
            continue
        pair = (citing, cited)
        if pair in seen:
            result.collapsed_duplicates += 1
            continue
        seen.add(pair)
        result.edges.append(CitationEdge(citing, cited))
    if result.dropped_unknown:
        log.warning(
            "%s: dropped %d citation edges referencing unknown patent ids",
            path,
            result.dropped_unknown,
        )
    log.info("loaded %d citation edges from %s", len(result.edges), path)
    return result


def load_tasks(path: str | Path) -> list[TaskRecord]:
    tasks: list[TaskRecord] = []
    seen: dict[str, int] = {}
    for line, row in _read_rows(path, TASK_HEADER):
        _check_width(path, line, row, TASK_HEADER)
        tid, description, occ = row
        if not tid:
            raise DataError(f"{path}: line {line}: column task_id: empty id")
        if tid in seen:
            raise DataError(f"{path}: duplicate task_id {tid!r} on lines {seen[tid]} and {line}")
        seen[tid] = line
        if not description:
            raise DataError(f"{path}: line {line}: column description: empty task description")
        if not occ:
            raise DataError(f"{path}: line {line}: column occupation_code: empty code")
        tasks.append(TaskRecord(tid, description, occ))
    log.info("loaded %d tasks from %s", len(tasks), path)
    return tasks


def load_industry_map(path: str | Path) -> IndustryMap:
    mapping: dict[str, str] = {}
    lines: dict[str, int] = {}
    for line, row in _read_rows(path, INDUSTRY_HEADER):
        _check_width(path, line, row, INDUSTRY_HEADER)
        occ, sector = row
        if not occ or not sector:
            raise DataError(f"{path}: line {line}: empty occupation_code or industry_sector")
        if occ in mapping:
            raise DataError(
                f"{path}: duplicate occupation_code {occ!r} on lines {lines[occ]} and {line}"
            )
        mapping[occ] = sector
        lines[occ] = line
    log.info("loaded industry map for %d occupations from %s", len(mapping), path)
    return IndustryMap(mapping=mapping, sectors=frozenset(mapping.values()))


def load_vacancies(path: str | Path) -> dict[str, float]:
    rates: dict[str, float] = {}
    lines: dict[str, int] = {}
    for line, row in _read_rows(path, VACANCY_HEADER):
        _check_width(path, line, row, VACANCY_HEADER)
        sector, rate_s = row
        if not sector:
            raise DataError(f"{path}: line {line}: empty industry_sector")
        if sector in rates:
            raise DataError(
                f"{path}: duplicate industry_sector {sector!r} on lines {lines[sector]} and {line}"
            )
        try:
            rate = float(rate_s)
        except ValueError:
            raise DataError(
                f"{path}: line {line}: column vacancy_rate: {rate_s!r} is not a number"
            ) from None
        if not 0.0 <= rate <= 100.0:
            raise DataError(
                f"{path}: line {line}: column vacancy_rate: {rate} outside [0, 100]"
            )
        rates[sector] = rate
        lines[sector] = line
    log.info("loaded vacancy rates for %d sectors from %s", len(rates), path)
    return rates


def require_sector_coverage(tasks: Iterable[TaskRecord], industry_map: IndustryMap) -> None:
    """Fail if any task's occupation code is missing from the industry map."""
    missing = industry_map.missing_codes(tasks)
    if missing:
        raise DataError(
            "occupation codes without an industry sector: " + ", ".join(missing)
        )


def _writer(path: str | Path):
    return open(Path(path), "w", newline="", encoding="utf-8")


def _check_writable(row: list[str], where: str) -> list[str]:
    # bare CR is not protected by RFC 4180 quoting with LF line endings, and
    # NUL trips the csv module; both would corrupt the round-trip silently
    for value in row:
        if "\r" in value or "\x00" in value:
            raise DataError(f"{where}: field contains CR or NUL and cannot round-trip: {value!r}")
    return row


def write_patents(path: str | Path, patents: Sequence[Patent]) -> None:
    with _writer(path) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(PATENT_HEADER)
        for p in patents:
            w.writerow(
                _check_writable(
                    [
                        p.patent_id,
                        p.grant_date.isoformat(),
                        p.title,
                        p.abstract,
                        p.assignee_state or "",
                        ";".join(sorted(p.cpc_codes)),
                    ],
                    f"patent {p.patent_id}",
                )
            )


def write_citations(path: str | Path, edges: Sequence[CitationEdge]) -> None:
    with _writer(path) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CITATION_HEADER)
        for e in edges:
            w.writerow(_check_writable([e.citing_id, e.cited_id], f"edge {e.citing_id}"))


def write_tasks(path: str | Path, tasks: Sequence[TaskRecord]) -> None:
    with _writer(path) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TASK_HEADER)
        for t in tasks:
            w.writerow(_check_writable([t.task_id, t.description, t.occupation_code], f"task {t.task_id}"))


def write_industry_map(path: str | Path, industry_map: IndustryMap) -> None:
    with _writer(path) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(INDUSTRY_HEADER)
        for occ in sorted(industry_map.mapping):
            w.writerow(_check_writable([occ, industry_map.mapping[occ]], f"occupation {occ}"))


def write_vacancies(path: str | Path, rates: Mapping[str, float]) -> None:
    with _writer(path) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(VACANCY_HEADER)
        for sector in sorted(rates):
            w.writerow(_check_writable([sector, repr(float(rates[sector]))], f"sector {sector}"))
