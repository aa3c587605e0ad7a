import hashlib
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from aidisrupt.disruption import PatentClass
from aidisrupt.embedding import (
    EmbeddingStore,
    MatchResult,
    TaskImpactLabel,
    classify_tasks,
    cosine,
    impact_threshold,
    match_tasks,
)
from aidisrupt.errors import DataError


def store_of(prefix, n, dim, seed):
    rng = np.random.default_rng(seed)
    vecs = rng.standard_normal((n, dim)).astype(np.float32)
    return EmbeddingStore([f"{prefix}{i:03d}" for i in range(n)], vecs)


def test_store_round_trip_bit_identical(tmp_path):
    store = store_of("X", 17, 9, seed=3)
    path = tmp_path / "x.emb"
    store.save(path)
    loaded = EmbeddingStore.load(path)
    assert loaded.ids == store.ids
    assert loaded.dim == store.dim
    assert loaded.vectors.tobytes() == store.vectors.tobytes()
    # double write produces identical bytes
    path2 = tmp_path / "y.emb"
    loaded.save(path2)
    assert hashlib.sha256(path.read_bytes()).digest() == hashlib.sha256(path2.read_bytes()).digest()


def test_store_empty_file_round_trip(tmp_path):
    store = EmbeddingStore([], np.empty((0, 8), dtype=np.float32))
    path = tmp_path / "empty.emb"
    store.save(path)
    loaded = EmbeddingStore.load(path)
    assert len(loaded) == 0 and loaded.dim == 8


def test_store_load_validations(tmp_path):
    path = tmp_path / "bad.emb"
    path.write_bytes(b"NOPE" + b"\x00" * 12)
    with pytest.raises(DataError, match="magic"):
        EmbeddingStore.load(path)
    store = store_of("X", 3, 4, seed=0)
    good = tmp_path / "good.emb"
    store.save(good)
    truncated = tmp_path / "trunc.emb"
    truncated.write_bytes(good.read_bytes()[:-5])
    with pytest.raises(DataError, match="truncated|corrupt"):
        EmbeddingStore.load(truncated)
    trailing = tmp_path / "trail.emb"
    trailing.write_bytes(good.read_bytes() + b"\x00")
    with pytest.raises(DataError, match="trailing"):
        EmbeddingStore.load(trailing)


def test_store_duplicate_ids_rejected():
    with pytest.raises(DataError, match="duplicate"):
        EmbeddingStore(["a", "a"], np.ones((2, 3), dtype=np.float32))


def test_cosine_self_similarity():
    v = np.array([0.3, -1.2, 4.0], dtype=np.float32)
    assert cosine(v, v) == 1.0


def test_cosine_orthogonal_and_45_degrees():
    assert cosine(np.array([1.0, 0.0]), np.array([0.0, 1.0])) == 0.0
    assert cosine(np.array([1.0, 0.0]), np.array([1.0, 1.0])) == pytest.approx(
        1 / math.sqrt(2), abs=1e-6
    )


def test_cosine_errors():
    with pytest.raises(DataError, match="zero"):
        cosine(np.zeros(3), np.ones(3))
    with pytest.raises(DataError, match="mismatch"):
        cosine(np.ones(3), np.ones(4))


def test_cosine_symmetry_exact():
    rng = np.random.default_rng(8)
    for _ in range(50):
        u = rng.standard_normal(16).astype(np.float32)
        v = rng.standard_normal(16).astype(np.float32)
        assert cosine(u, v) == cosine(v, u)


def test_cosine_clamped():
    v = np.array([1.0, 1.0, 1.0], dtype=np.float32)
    assert -1.0 <= cosine(v, v) <= 1.0


def test_match_single_pair():
    tasks = EmbeddingStore(["t"], np.array([[1.0, 2.0]], dtype=np.float32))
    patents = EmbeddingStore(["p"], np.array([[2.0, 1.0]], dtype=np.float32))
    (result,) = match_tasks(tasks, patents)
    assert result.best_patent_id == "p"
    assert result.best_similarity == pytest.approx(cosine(tasks.vector("t"), patents.vector("p")))


def test_match_exact_duplicate_dominates():
    patents = store_of("P", 10, 6, seed=5)
    target = patents.vectors[4].copy()
    tasks = EmbeddingStore(["t"], target.reshape(1, -1))
    (result,) = match_tasks(tasks, patents)
    assert result.best_patent_id == "P004"
    assert result.best_similarity == 1.0


def test_match_equals_double_loop_oracle():
    tasks = store_of("T", 5, 12, seed=1)
    patents = store_of("P", 20, 12, seed=2)
    results = match_tasks(tasks, patents)
    for r in results:
        tvec = tasks.vector(r.task_id)
        sims = [(cosine(tvec, patents.vector(pid)), pid) for pid in patents.ids]
        best_sim = max(s for s, _ in sims)
        best_ids = sorted(pid for s, pid in sims if s == best_sim)
        assert r.best_patent_id == best_ids[0]
        assert r.best_similarity == pytest.approx(best_sim, abs=1e-12)


def test_match_tie_break_smallest_patent_id():
    vec = np.array([[1.0, 1.0]], dtype=np.float32)
    patents = EmbeddingStore(["zz", "aa"], np.array([[2.0, 2.0], [4.0, 4.0]], dtype=np.float32))
    tasks = EmbeddingStore(["t"], vec)
    (result,) = match_tasks(tasks, patents)
    assert result.best_patent_id == "aa"


def test_match_dim_mismatch():
    with pytest.raises(DataError, match="mismatch"):
        match_tasks(store_of("T", 2, 4, 0), store_of("P", 2, 5, 0))


@settings(max_examples=40, deadline=None)
@given(lam=st.floats(min_value=1e-3, max_value=1e3, allow_nan=False), idx=st.integers(0, 19))
def test_match_argmax_scale_invariant(lam, idx):
    tasks = store_of("T", 4, 8, seed=21)
    patents = store_of("P", 20, 8, seed=22)
    baseline = [r.best_patent_id for r in match_tasks(tasks, patents)]
    scaled = patents.vectors.copy()
    scaled[idx] *= np.float32(lam)
    rescored = [r.best_patent_id for r in match_tasks(tasks, EmbeddingStore(patents.ids, scaled))]
    assert rescored == baseline


def test_threshold_nearest_rank_example():
    results = [MatchResult(f"t{i}", "p", i / 10.0) for i in range(10)]
    assert impact_threshold(results) == 0.8


def test_threshold_requires_ten():
    results = [MatchResult(f"t{i}", "p", 0.5) for i in range(9)]
    with pytest.raises(DataError, match="at least 10"):
        impact_threshold(results)


def test_threshold_degenerate_all_equal():
    results = [MatchResult(f"t{i}", "p", 0.42) for i in range(12)]
    threshold = impact_threshold(results)
    assert threshold == 0.42
    labels = classify_tasks(results, threshold, {"p": PatentClass.DISRUPTIVE})
    assert set(labels.values()) == {TaskImpactLabel.NOT_IMPACTED}


def test_threshold_hundred_distinct_gives_ten_impacted():
    rng = np.random.default_rng(17)
    sims = sorted(set(rng.uniform(-1, 1, 300).tolist()))[:100]
    results = [MatchResult(f"t{i:03d}", "p", s) for i, s in enumerate(sims)]
    threshold = impact_threshold(results)
    labels = classify_tasks(results, threshold, {"p": PatentClass.MIDDLE})
    impacted = [t for t, lab in labels.items() if lab is not TaskImpactLabel.NOT_IMPACTED]
    assert len(impacted) == 10


def test_classify_at_threshold_is_not_impacted():
    results = [MatchResult("t", "p", 0.8)]
    labels = classify_tasks(results, 0.8, {"p": PatentClass.DISRUPTIVE})
    assert labels["t"] is TaskImpactLabel.NOT_IMPACTED


def test_classify_middle_class_passthrough():
    results = [MatchResult("t", "p", 0.9)]
    labels = classify_tasks(results, 0.5, {"p": PatentClass.MIDDLE})
    assert labels["t"] is TaskImpactLabel.IMPACTED_MIDDLE


def test_classify_missing_patent_class_errors():
    results = [MatchResult("t", "p", 0.9)]
    with pytest.raises(DataError, match="no class"):
        classify_tasks(results, 0.5, {})


def test_classify_twenty_task_fixture_matches_hand_tally():
    classes = {"d": PatentClass.DISRUPTIVE, "c": PatentClass.CONSOLIDATING, "m": PatentClass.MIDDLE}
    spec = [
        ("d", 0.95), ("d", 0.61), ("c", 0.92), ("c", 0.40), ("m", 0.81),
        ("d", 0.30), ("c", 0.99), ("m", 0.20), ("d", 0.85), ("c", 0.10),
        ("d", 0.60), ("c", 0.75), ("m", 0.95), ("d", 0.05), ("c", 0.65),
        ("m", 0.55), ("d", 0.70), ("c", 0.82), ("m", 0.15), ("d", 0.90),
    ]
    results = [MatchResult(f"t{i:02d}", pid, sim) for i, (pid, sim) in enumerate(spec)]
    labels = classify_tasks(results, 0.6, classes)
    # hand tally of scores strictly above 0.6 by matched class:
    # disruptive: 0.95, 0.61, 0.85, 0.70, 0.90 -> 5
    # consolidating: 0.92, 0.99, 0.75, 0.65, 0.82 -> 5
    # middle: 0.81, 0.95 -> 2; everything else (8) not impacted
    tally = {lab: 0 for lab in TaskImpactLabel}
    for lab in labels.values():
        tally[lab] += 1
    assert tally[TaskImpactLabel.IMPACTED_DISRUPTIVE] == 5
    assert tally[TaskImpactLabel.IMPACTED_CONSOLIDATING] == 5
    assert tally[TaskImpactLabel.IMPACTED_MIDDLE] == 2
    assert tally[TaskImpactLabel.NOT_IMPACTED] == 8
    # label partition: exactly one label per task
    assert len(labels) == 20
    impacted = sum(1 for lab in labels.values() if lab.impacted)
    assert impacted == 20 - tally[TaskImpactLabel.NOT_IMPACTED]
