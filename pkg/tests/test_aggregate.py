import datetime as dt
import random

import pytest

from aidisrupt.aggregate import (
    industry_deltas,
    sector_exposure,
    state_deltas,
    state_deltas_by_sector,
)
from aidisrupt.corpus import IndustryMap, Patent, TaskRecord
from aidisrupt.embedding import MatchResult, TaskImpactLabel
from aidisrupt.errors import DataError

D = TaskImpactLabel.IMPACTED_DISRUPTIVE
C = TaskImpactLabel.IMPACTED_CONSOLIDATING
M = TaskImpactLabel.IMPACTED_MIDDLE
N = TaskImpactLabel.NOT_IMPACTED


def patent(pid, state):
    return Patent(pid, dt.date(2016, 1, 1), "", "", state, frozenset())


def corpus(spec):
    """spec: list of (task_id, sector, label). Builds tasks + map with one
    occupation per sector."""
    tasks = [TaskRecord(tid, f"desc {tid}", f"O_{sector}") for tid, sector, _ in spec]
    mapping = {f"O_{sector}": sector for _, sector, _ in spec}
    imap = IndustryMap(mapping, frozenset(mapping.values()))
    labels = {tid: lab for tid, _, lab in spec}
    return tasks, imap, labels


def test_industry_identical_distributions_zero_delta():
    spec = []
    for i, sector in enumerate(["A", "A", "B", "B", "C", "C"]):
        spec.append((f"d{i}", sector, D))
        spec.append((f"c{i}", sector, C))
    tasks, imap, labels = corpus(spec)
    agg = industry_deltas(labels, tasks, imap)
    for s in agg.sectors:
        assert agg.delta_disruptive[s] == pytest.approx(0.0, abs=1e-12)
        assert agg.delta_consolidating[s] == pytest.approx(0.0, abs=1e-12)


def test_industry_single_sector():
    spec = [("t1", "Solo", D), ("t2", "Solo", C), ("t3", "Solo", M), ("t4", "Solo", N)]
    tasks, imap, labels = corpus(spec)
    agg = industry_deltas(labels, tasks, imap)
    assert agg.p_disruptive["Solo"] == 1.0
    assert agg.p_all["Solo"] == 1.0
    assert agg.delta_disruptive["Solo"] == 0.0


def test_industry_three_sector_hand_fixture():
    # sector X: 2 D, 1 C, 1 M; sector Y: 1 D, 3 C; sector Z: 1 D, 0 C, 1 M
    spec = (
        [(f"x{i}", "X", lab) for i, lab in enumerate([D, D, C, M])]
        + [(f"y{i}", "Y", lab) for i, lab in enumerate([D, C, C, C])]
        + [(f"z{i}", "Z", lab) for i, lab in enumerate([D, M, N])]
    )
    tasks, imap, labels = corpus(spec)
    agg = industry_deltas(labels, tasks, imap)
    assert (agg.total_disruptive, agg.total_consolidating, agg.total_all) == (4, 4, 10)
    assert agg.p_disruptive["X"] == pytest.approx(2 / 4)
    assert agg.p_consolidating["Y"] == pytest.approx(3 / 4)
    assert agg.p_all["Z"] == pytest.approx(2 / 10)
    assert agg.delta_disruptive["X"] == pytest.approx(2 / 4 - 4 / 10, abs=1e-12)
    assert agg.delta_consolidating["X"] == pytest.approx(1 / 4 - 4 / 10, abs=1e-12)
    assert sum(agg.delta_disruptive.values()) == pytest.approx(0.0, abs=1e-12)
    assert sum(agg.delta_consolidating.values()) == pytest.approx(0.0, abs=1e-12)


def random_corpus(rng, n_tasks=60, sectors=("S1", "S2", "S3", "S4")):
    spec = []
    for i in range(n_tasks):
        sector = rng.choice(sectors)
        label = rng.choices([D, C, M, N], weights=[2, 2, 1, 5])[0]
        spec.append((f"t{i:03d}", sector, label))
    # guarantee both classes are present
    spec[0] = ("t000", sectors[0], D)
    spec[1] = ("t001", sectors[1], C)
    return corpus(spec)


def test_industry_identities_on_random_corpora():
    rng = random.Random(2024)
    for _ in range(20):
        tasks, imap, labels = random_corpus(rng)
        agg = industry_deltas(labels, tasks, imap)
        assert sum(agg.p_disruptive.values()) == pytest.approx(1.0, abs=1e-12)
        assert sum(agg.p_consolidating.values()) == pytest.approx(1.0, abs=1e-12)
        assert sum(agg.p_all.values()) == pytest.approx(1.0, abs=1e-12)
        assert sum(agg.delta_disruptive.values()) == pytest.approx(0.0, abs=1e-12)
        assert sum(agg.delta_consolidating.values()) == pytest.approx(0.0, abs=1e-12)


def test_industry_errors_without_impacted_tasks():
    spec = [("t1", "A", N), ("t2", "B", N)]
    tasks, imap, labels = corpus(spec)
    with pytest.raises(DataError, match="no AI-impacted"):
        industry_deltas(labels, tasks, imap)


def test_industry_permutation_invariance():
    rng = random.Random(5)
    tasks, imap, labels = random_corpus(rng)
    agg1 = industry_deltas(labels, tasks, imap)
    shuffled = tasks[:]
    rng.shuffle(shuffled)
    agg2 = industry_deltas(labels, shuffled, imap)
    assert agg1 == agg2


def test_industry_dropping_not_impacted_changes_nothing():
    rng = random.Random(8)
    tasks, imap, labels = random_corpus(rng)
    agg1 = industry_deltas(labels, tasks, imap)
    kept = [t for t in tasks if labels[t.task_id] is not N]
    agg2 = industry_deltas(labels, kept, imap)
    for s in agg1.sectors:
        if s in agg2.p_all:
            assert agg1.p_all[s] == agg2.p_all[s]
            assert agg1.delta_disruptive[s] == agg2.delta_disruptive[s]


def state_fixture():
    patents = [patent("PA", "CA"), patent("PB", "NY"), patent("PC", "CA"), patent("PU", None)]
    matches = [
        MatchResult("t1", "PA", 0.9),
        MatchResult("t2", "PA", 0.9),
        MatchResult("t3", "PB", 0.9),
        MatchResult("t4", "PC", 0.9),
        MatchResult("t5", "PB", 0.9),
        MatchResult("t6", "PU", 0.9),
        MatchResult("t7", "PB", 0.2),
    ]
    labels = {"t1": D, "t2": D, "t3": C, "t4": C, "t5": D, "t6": D, "t7": N}
    return labels, matches, patents


def test_state_extremal_split():
    patents = [patent("PD", "CA"), patent("PC", "NY")]
    matches = [MatchResult("t1", "PD", 0.9), MatchResult("t2", "PC", 0.9)]
    labels = {"t1": D, "t2": C}
    agg = state_deltas(labels, matches, patents)
    assert agg.delta["CA"] == 1.0
    assert agg.delta["NY"] == -1.0


def test_state_duplication_weighting():
    patents = [patent("PD", "CA"), patent("PX", "NY")]
    matches = [
        MatchResult("t1", "PD", 0.9),
        MatchResult("t2", "PD", 0.9),
        MatchResult("t3", "PD", 0.9),
        MatchResult("t4", "PX", 0.9),
    ]
    labels = {"t1": D, "t2": D, "t3": D, "t4": C}
    agg = state_deltas(labels, matches, patents)
    assert agg.weight_disruptive["CA"] == 3  # one patent, three tasks
    assert agg.p_disruptive["CA"] == 1.0


def test_state_two_state_hand_tally():
    labels, matches, patents = state_fixture()
    agg = state_deltas(labels, matches, patents)
    # disruptive with known state: t1, t2 -> PA(CA); t5 -> PB(NY); t6 unknown
    # consolidating: t3 -> PB(NY), t4 -> PC(CA)
    assert agg.weight_disruptive == {"CA": 2, "NY": 1}
    assert agg.weight_consolidating == {"CA": 1, "NY": 1}
    assert agg.unknown_disruptive == 1
    assert agg.p_disruptive["CA"] == pytest.approx(2 / 3)
    assert agg.delta["CA"] == pytest.approx(2 / 3 - 1 / 2, abs=1e-12)
    assert sum(agg.p_disruptive.values()) == pytest.approx(1.0, abs=1e-12)
    assert sum(agg.p_consolidating.values()) == pytest.approx(1.0, abs=1e-12)


def test_state_antisymmetry_under_class_swap():
    labels, matches, patents = state_fixture()
    swapped = {
        tid: (D if lab is C else C if lab is D else lab) for tid, lab in labels.items()
    }
    a = state_deltas(labels, matches, patents)
    b = state_deltas(swapped, matches, patents)
    for s in a.states:
        assert a.delta[s] == pytest.approx(-b.delta[s], abs=1e-15)


def test_state_missing_class_errors():
    patents = [patent("PD", "CA")]
    matches = [MatchResult("t1", "PD", 0.9)]
    with pytest.raises(DataError, match="disruptive=1, consolidating=0"):
        state_deltas({"t1": D}, matches, patents)


def test_state_deltas_by_sector_single_sector_matches_unfiltered():
    labels, matches, patents = state_fixture()
    tasks = [TaskRecord(tid, "x", "O1") for tid in labels]
    imap = IndustryMap({"O1": "Solo"}, frozenset({"Solo"}))
    per_sector = state_deltas_by_sector(labels, matches, patents, tasks, imap, ["Solo"])
    assert per_sector["Solo"] == state_deltas(labels, matches, patents)


def test_state_deltas_by_sector_absent_sector_errors():
    labels, matches, patents = state_fixture()
    tasks = [TaskRecord(tid, "x", "O1") for tid in labels]
    imap = IndustryMap({"O1": "Solo"}, frozenset({"Solo"}))
    with pytest.raises(DataError, match="no tasks"):
        state_deltas_by_sector(labels, matches, patents, tasks, imap, ["Ghost"])


def test_state_deltas_by_sector_two_sector_tallies():
    patents = [patent("P1", "CA"), patent("P2", "NY")]
    matches = [
        MatchResult("a1", "P1", 0.9),
        MatchResult("a2", "P2", 0.9),
        MatchResult("b1", "P2", 0.9),
        MatchResult("b2", "P1", 0.9),
    ]
    labels = {"a1": D, "a2": C, "b1": D, "b2": C}
    tasks = [
        TaskRecord("a1", "x", "OA"),
        TaskRecord("a2", "x", "OA"),
        TaskRecord("b1", "x", "OB"),
        TaskRecord("b2", "x", "OB"),
    ]
    imap = IndustryMap({"OA": "Alpha", "OB": "Beta"}, frozenset({"Alpha", "Beta"}))
    per_sector = state_deltas_by_sector(labels, matches, patents, tasks, imap, ["Alpha", "Beta"])
    assert per_sector["Alpha"].delta["CA"] == 1.0  # a1 (D) in CA, a2 (C) in NY
    assert per_sector["Beta"].delta["CA"] == -1.0  # b1 (D) in NY, b2 (C) in CA


def test_exposure_no_impacted_sector_is_zero():
    spec = [("t1", "A", N), ("t2", "A", N), ("t3", "B", D)]
    tasks, imap, labels = corpus(spec)
    exp = sector_exposure(labels, tasks, imap)
    assert exp.ratio_disruptive["A"] == 0.0
    assert exp.ratio_consolidating["A"] == 0.0


def test_exposure_fully_disruptive_sector_is_one():
    spec = [("t1", "A", D), ("t2", "A", D)]
    tasks, imap, labels = corpus(spec)
    exp = sector_exposure(labels, tasks, imap)
    assert exp.ratio_disruptive["A"] == 1.0


def test_exposure_mixed_fixture_counting_oracle():
    rng = random.Random(77)
    tasks, imap, labels = random_corpus(rng)
    exp = sector_exposure(labels, tasks, imap)
    for s in exp.sectors:
        in_sector = [t for t in tasks if imap.sector_for(t.occupation_code) == s]
        n_d = sum(1 for t in in_sector if labels[t.task_id] is D)
        n_c = sum(1 for t in in_sector if labels[t.task_id] is C)
        assert exp.t_total[s] == len(in_sector)
        assert exp.ratio_disruptive[s] == pytest.approx(n_d / len(in_sector))
        assert exp.ratio_consolidating[s] == pytest.approx(n_c / len(in_sector))
        assert exp.t_disruptive[s] + exp.t_consolidating[s] <= exp.t_total[s]
        assert 0.0 <= exp.ratio_disruptive[s] <= 1.0


def test_exposure_warns_on_empty_sector(caplog):
    tasks = [TaskRecord("t1", "x", "O1")]
    imap = IndustryMap({"O1": "Busy", "O2": "Empty"}, frozenset({"Busy", "Empty"}))
    exp = sector_exposure({"t1": D}, tasks, imap)
    assert "Empty" not in exp.sectors
    assert any("no tasks" in r.message for r in caplog.records)
