import datetime as dt

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from aidisrupt.corpus import (
    CitationEdge,
    IndustryMap,
    Patent,
    TaskRecord,
    load_citations,
    load_industry_map,
    load_patents,
    load_tasks,
    load_vacancies,
    require_sector_coverage,
    write_citations,
    write_industry_map,
    write_patents,
    write_tasks,
    write_vacancies,
)
from aidisrupt.errors import DataError


def make_patent(pid, date="2016-03-01", state="CA", codes=("G06N20/00",)):
    return Patent(pid, dt.date.fromisoformat(date), f"title {pid}", f"abstract {pid}", state, frozenset(codes))


def test_patents_header_only_is_empty(tmp_path):
    p = tmp_path / "patents.csv"
    p.write_text("patent_id,grant_date,title,abstract,assignee_state,cpc_codes\n")
    assert load_patents(p) == []


def test_patents_round_trip_field_by_field(tmp_path):
    patents = [
        make_patent("P1"),
        Patent("P2", dt.date(2018, 12, 31), 'has "quotes", and commas', "", None, frozenset()),
        Patent("P3", dt.date(1999, 1, 2), "multi\nline", "café ünïcode", "NY", frozenset({"A01B1/00", "G06F17/00"})),
    ]
    path = tmp_path / "patents.csv"
    write_patents(path, patents)
    loaded = load_patents(path)
    assert loaded == patents


def test_patents_bad_month_names_line(tmp_path):
    p = tmp_path / "patents.csv"
    p.write_text(
        "patent_id,grant_date,title,abstract,assignee_state,cpc_codes\n"
        "P1,2015-13-01,t,a,CA,\n"
    )
    with pytest.raises(DataError, match="line 2.*grant_date"):
        load_patents(p)


def test_patents_date_window_enforced(tmp_path):
    p = tmp_path / "patents.csv"
    p.write_text(
        "patent_id,grant_date,title,abstract,assignee_state,cpc_codes\n"
        "P1,1492-01-01,t,a,,\n"
    )
    with pytest.raises(DataError, match="grant_date"):
        load_patents(p)


def test_patents_duplicate_id_names_both_lines(tmp_path):
    p = tmp_path / "patents.csv"
    p.write_text(
        "patent_id,grant_date,title,abstract,assignee_state,cpc_codes\n"
        "P1,2015-01-01,t,a,,\n"
        "P1,2016-01-01,t,a,,\n"
    )
    with pytest.raises(DataError, match="lines 2 and 3"):
        load_patents(p)


def test_patents_bad_state_and_header(tmp_path):
    p = tmp_path / "patents.csv"
    p.write_text(
        "patent_id,grant_date,title,abstract,assignee_state,cpc_codes\n"
        "P1,2015-01-01,t,a,CAL,\n"
    )
    with pytest.raises(DataError, match="assignee_state"):
        load_patents(p)
    q = tmp_path / "bad.csv"
    q.write_text("a,b\n")
    with pytest.raises(DataError, match="bad header"):
        load_patents(q)


def test_citations_duplicates_collapse(tmp_path):
    path = tmp_path / "cites.csv"
    write_citations(path, [CitationEdge("A", "B"), CitationEdge("A", "B")])
    result = load_citations(path, {"A", "B"})
    assert result.edges == [CitationEdge("A", "B")]
    assert result.collapsed_duplicates == 1


def test_citations_self_loop_dropped_with_warning(tmp_path, caplog):
    path = tmp_path / "cites.csv"
    path.write_text("citing_id,cited_id\nA,A\n")
    result = load_citations(path, {"A"})
    assert len(result) == 0
    assert result.dropped_self == 1
    assert any("self-citation" in r.message for r in caplog.records)


def test_citations_unknown_endpoint_counted(tmp_path):
    path = tmp_path / "cites.csv"
    write_citations(
        path,
        [
            CitationEdge("A", "B"),
            CitationEdge("B", "C"),
            CitationEdge("C", "A"),
            CitationEdge("A", "C"),
            CitationEdge("A", "X"),  # unknown endpoint
        ],
    )
    result = load_citations(path, {"A", "B", "C"})
    assert len(result.edges) == 4
    assert result.dropped_unknown == 1


def test_tasks_empty_description_rejected(tmp_path):
    p = tmp_path / "tasks.csv"
    p.write_text('task_id,description,occupation_code\nT1,"",O1\n')
    with pytest.raises(DataError, match="description"):
        load_tasks(p)


def test_vacancy_range_rule(tmp_path):
    p = tmp_path / "vacancy.csv"
    p.write_text("industry_sector,vacancy_rate\nManufacturing,101\n")
    with pytest.raises(DataError, match="outside"):
        load_vacancies(p)


def test_consistent_fixture_lookups(tmp_path):
    tasks = [
        TaskRecord("T1", "weld car frames", "O1"),
        TaskRecord("T2", "inspect welds", "O1"),
        TaskRecord("T3", "file reports", "O2"),
        TaskRecord("T4", "answer phones", "O2"),
    ]
    imap = IndustryMap({"O1": "Manufacturing", "O2": "Administrative"}, frozenset({"Manufacturing", "Administrative"}))
    tpath, ipath = tmp_path / "tasks.csv", tmp_path / "occ.csv"
    write_tasks(tpath, tasks)
    write_industry_map(ipath, imap)
    loaded_tasks = load_tasks(tpath)
    loaded_map = load_industry_map(ipath)
    assert loaded_tasks == tasks
    assert loaded_map.mapping == dict(imap.mapping)
    require_sector_coverage(loaded_tasks, loaded_map)
    for t in loaded_tasks:
        assert loaded_map.sector_for(t.occupation_code) in loaded_map.sectors


def test_missing_occupation_codes_listed(tmp_path):
    tasks = [TaskRecord("T1", "x", "O1"), TaskRecord("T2", "y", "O9"), TaskRecord("T3", "z", "O8")]
    imap = IndustryMap({"O1": "Manufacturing"}, frozenset({"Manufacturing"}))
    with pytest.raises(DataError, match="O8, O9"):
        require_sector_coverage(tasks, imap)


def test_vacancy_round_trip(tmp_path):
    rates = {"Manufacturing": 4.5, "Information": 7.25}
    path = tmp_path / "vacancy.csv"
    write_vacancies(path, rates)
    assert load_vacancies(path) == rates


def test_load_is_deterministic(tmp_path):
    patents = [make_patent(f"P{i}", state=None) for i in range(20)]
    path = tmp_path / "patents.csv"
    write_patents(path, patents)
    assert load_patents(path) == load_patents(path)


@st.composite
def patent_lists(draw):
    text = st.text(
        alphabet=st.characters(blacklist_categories=("Cs",), blacklist_characters="\r\x00"),
        max_size=40,
    )
    n = draw(st.integers(min_value=0, max_value=8))
    patents = []
    for i in range(n):
        patents.append(
            Patent(
                f"P{i:03d}",
                dt.date.fromordinal(draw(st.integers(dt.date(1790, 1, 1).toordinal(), dt.date(2100, 1, 1).toordinal()))),
                draw(text),
                draw(text),
                draw(st.one_of(st.none(), st.sampled_from(["CA", "NY", "tx"]))),
                frozenset(draw(st.lists(st.sampled_from(["G06N20/00", "A01B1/00", "H04L9/40"]), max_size=3))),
            )
        )
    return patents


@settings(max_examples=60, deadline=None)
@given(patents=patent_lists())
def test_patent_round_trip_property(tmp_path_factory, patents):
    path = tmp_path_factory.mktemp("rt") / "patents.csv"
    write_patents(path, patents)
    assert load_patents(path) == patents


def test_writers_refuse_unroundtrippable_fields(tmp_path):
    bad = [Patent("P1", dt.date(2016, 1, 1), "has\rcarriage", "", None, frozenset())]
    with pytest.raises(DataError, match="cannot round-trip"):
        write_patents(tmp_path / "p.csv", bad)
