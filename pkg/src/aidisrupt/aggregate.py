"""Industry, state, and sector aggregations of task impact labels.

Industry deltas compare each sector's share among disruptive- or
consolidating-impacted tasks with its share among all AI-impacted tasks.
State deltas compare where disruptive vs consolidating patents come from,
weighting each patent once per impacted task it matches (duplication
allowed). Sector exposure is the fraction of a sector's tasks impacted by
each class. Tasks matched to middle-quartile patents count toward the
"all AI" baselines but toward neither class tally.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .corpus import IndustryMap, Patent, TaskRecord, require_sector_coverage
from .embedding import MatchResult, TaskImpactLabel
from .errors import DataError

log = logging.getLogger(__name__)

UNKNOWN_STATE = "unknown"


@dataclass(frozen=True)
class IndustryAggregate:
    sectors: tuple[str, ...]
    t_disruptive: Mapping[str, int]
    t_consolidating: Mapping[str, int]
    t_all: Mapping[str, int]
    total_disruptive: int
    total_consolidating: int
    total_all: int
    p_disruptive: Mapping[str, float]
    p_consolidating: Mapping[str, float]
    p_all: Mapping[str, float]
    delta_disruptive: Mapping[str, float]
    delta_consolidating: Mapping[str, float]


@dataclass(frozen=True)
class StateAggregate:
    states: tuple[str, ...]  # states with a known assignee, sorted
    weight_disruptive: Mapping[str, int]
    weight_consolidating: Mapping[str, int]
    weight_all: Mapping[str, int]
    p_disruptive: Mapping[str, float]
    p_consolidating: Mapping[str, float]
    p_all: Mapping[str, float]
    delta: Mapping[str, float]  # P_D - P_C per state
    delta_vs_all_disruptive: Mapping[str, float]
    delta_vs_all_consolidating: Mapping[str, float]
    unknown_disruptive: int
    unknown_consolidating: int
    unknown_all: int


@dataclass(frozen=True)
class SectorExposure:
    sectors: tuple[str, ...]
    t_total: Mapping[str, int]
    t_disruptive: Mapping[str, int]
    t_consolidating: Mapping[str, int]
    ratio_disruptive: Mapping[str, float]
    ratio_consolidating: Mapping[str, float]


def _sector_of(tasks: Sequence[TaskRecord], industry_map: IndustryMap) -> dict[str, str]:
    require_sector_coverage(tasks, industry_map)
    return {t.task_id: industry_map.sector_for(t.occupation_code) for t in tasks}


def industry_deltas(
    task_labels: Mapping[str, TaskImpactLabel],
    tasks: Sequence[TaskRecord],
    industry_map: IndustryMap,
) -> IndustryAggregate:
    """Per-sector impacted-task proportions and their deltas against all AI."""
    sector_of = _sector_of(tasks, industry_map)
    sectors = tuple(sorted({sector_of[t.task_id] for t in tasks}))
    t_d = {s: 0 for s in sectors}
    t_c = {s: 0 for s in sectors}
    t_all = {s: 0 for s in sectors}
    for t in tasks:
        label = task_labels.get(t.task_id)
        if label is None or not label.impacted:
            continue
        s = sector_of[t.task_id]
        t_all[s] += 1
        if label is TaskImpactLabel.IMPACTED_DISRUPTIVE:
            t_d[s] += 1
        elif label is TaskImpactLabel.IMPACTED_CONSOLIDATING:
            t_c[s] += 1
    total_d = sum(t_d.values())
    total_c = sum(t_c.values())
    total_all = sum(t_all.values())
    if total_all == 0:
        raise DataError("no AI-impacted tasks: industry proportions are undefined")
    if total_d == 0 or total_c == 0:
        raise DataError(
            f"empty impact class (disruptive={total_d}, consolidating={total_c}); "
            "class proportions are undefined"
        )
    p_d = {s: t_d[s] / total_d for s in sectors}
    p_c = {s: t_c[s] / total_c for s in sectors}
    p_all = {s: t_all[s] / total_all for s in sectors}
    return IndustryAggregate(
        sectors=sectors,
        t_disruptive=t_d,
        t_consolidating=t_c,
        t_all=t_all,
        total_disruptive=total_d,
        total_consolidating=total_c,
        total_all=total_all,
        p_disruptive=p_d,
        p_consolidating=p_c,
        p_all=p_all,
        delta_disruptive={s: p_d[s] - p_all[s] for s in sectors},
        delta_consolidating={s: p_c[s] - p_all[s] for s in sectors},
    )


def state_deltas(
    task_labels: Mapping[str, TaskImpactLabel],
    matches: Iterable[MatchResult],
    patents: Sequence[Patent],
) -> StateAggregate:
    """Patent-origin shares by state for each impact class.

    Every impacted task contributes weight 1 to its matched patent's state,
    so a patent matched by three tasks counts three times. Patents without
    an assignee state land in an "unknown" bucket that is reported but
    excluded from the normalized shares and deltas.
    """
    state_of = {p.patent_id: p.assignee_state for p in patents}
    w_d: dict[str, int] = {}
    w_c: dict[str, int] = {}
    w_all: dict[str, int] = {}
    unknown = {"d": 0, "c": 0, "all": 0}
    for match in matches:
        label = task_labels.get(match.task_id)
        if label is None or not label.impacted:
            continue
        if match.best_patent_id not in state_of:
            raise DataError(f"matched patent {match.best_patent_id!r} is not in the corpus")
        state = state_of[match.best_patent_id]
        if state is None:
            unknown["all"] += 1
            if label is TaskImpactLabel.IMPACTED_DISRUPTIVE:
                unknown["d"] += 1
            elif label is TaskImpactLabel.IMPACTED_CONSOLIDATING:
                unknown["c"] += 1
            continue
        w_all[state] = w_all.get(state, 0) + 1
        if label is TaskImpactLabel.IMPACTED_DISRUPTIVE:
            w_d[state] = w_d.get(state, 0) + 1
        elif label is TaskImpactLabel.IMPACTED_CONSOLIDATING:
            w_c[state] = w_c.get(state, 0) + 1
    total_d = sum(w_d.values())
    total_c = sum(w_c.values())
    total_all = sum(w_all.values())
    if total_d == 0 or total_c == 0:
        raise DataError(
            f"no impacted tasks with a known patent state in some class "
            f"(disruptive={total_d}, consolidating={total_c})"
        )
    states = tuple(sorted(set(w_d) | set(w_c) | set(w_all)))
    w_d = {s: w_d.get(s, 0) for s in states}
    w_c = {s: w_c.get(s, 0) for s in states}
    w_all = {s: w_all.get(s, 0) for s in states}
    p_d = {s: w_d[s] / total_d for s in states}
    p_c = {s: w_c[s] / total_c for s in states}
    p_all = {s: w_all[s] / total_all for s in states}
    return StateAggregate(
        states=states,
        weight_disruptive=w_d,
        weight_consolidating=w_c,
        weight_all=w_all,
        p_disruptive=p_d,
        p_consolidating=p_c,
        p_all=p_all,
        delta={s: p_d[s] - p_c[s] for s in states},
        delta_vs_all_disruptive={s: p_d[s] - p_all[s] for s in states},
        delta_vs_all_consolidating={s: p_c[s] - p_all[s] for s in states},
        unknown_disruptive=unknown["d"],
        unknown_consolidating=unknown["c"],
        unknown_all=unknown["all"],
    )


def state_deltas_by_sector(
    task_labels: Mapping[str, TaskImpactLabel],
    matches: Iterable[MatchResult],
    patents: Sequence[Patent],
    tasks: Sequence[TaskRecord],
    industry_map: IndustryMap,
    sectors: Iterable[str],
) -> dict[str, StateAggregate]:
    """state_deltas restricted to each requested sector's tasks."""
    sector_of = _sector_of(tasks, industry_map)
    present = {sector_of[t.task_id] for t in tasks}
    matches = list(matches)
    out: dict[str, StateAggregate] = {}
    for sector in sectors:
        if sector not in present:
            raise DataError(f"sector {sector!r} has no tasks in the corpus")
        keep = {tid for tid, s in sector_of.items() if s == sector}
        out[sector] = state_deltas(
            {tid: lab for tid, lab in task_labels.items() if tid in keep},
            [m for m in matches if m.task_id in keep],
            patents,
        )
    return out


def sector_exposure(
    task_labels: Mapping[str, TaskImpactLabel],
    tasks: Sequence[TaskRecord],
    industry_map: IndustryMap,
) -> SectorExposure:
    """Fraction of each sector's tasks impacted by disruptive / consolidating AI."""
    sector_of = _sector_of(tasks, industry_map)
    t_total: dict[str, int] = {}
    t_d: dict[str, int] = {}
    t_c: dict[str, int] = {}
    for t in tasks:
        s = sector_of[t.task_id]
        t_total[s] = t_total.get(s, 0) + 1
        label = task_labels.get(t.task_id)
        if label is TaskImpactLabel.IMPACTED_DISRUPTIVE:
            t_d[s] = t_d.get(s, 0) + 1
        elif label is TaskImpactLabel.IMPACTED_CONSOLIDATING:
            t_c[s] = t_c.get(s, 0) + 1
    for s in sorted(industry_map.sectors - set(t_total)):
        log.warning("sector %s has no tasks; omitted from exposure table", s)
    sectors = tuple(sorted(t_total))
    return SectorExposure(
        sectors=sectors,
        t_total=t_total,
        t_disruptive={s: t_d.get(s, 0) for s in sectors},
        t_consolidating={s: t_c.get(s, 0) for s in sectors},
        ratio_disruptive={s: t_d.get(s, 0) / t_total[s] for s in sectors},
        ratio_consolidating={s: t_c.get(s, 0) / t_total[s] for s in sectors},
    )
