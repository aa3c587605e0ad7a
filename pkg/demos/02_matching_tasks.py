# Match task embeddings to patent embeddings, pick the 90th-percentile
# impact threshold, and label each task from its best match.

import numpy as np

from aidisrupt.disruption import PatentClass
from aidisrupt.embedding import (
    EmbeddingStore,
    classify_tasks,
    cosine,
    impact_threshold,
    match_tasks,
)

rng = np.random.default_rng(7)

# Two synthetic "topics" in a 12-dimensional embedding space. Patents sit
# near one of the topic centers; tasks are noisy copies of the same centers.
center_a = np.concatenate([np.full(6, 2.0), np.zeros(6)])
center_b = np.concatenate([np.zeros(6), np.full(6, 2.0)])

patent_vecs = np.array(
    [center_a + rng.normal(0,  0.4, 12) for _ in range(10)]
    + [center_b + rng.normal(0, 0.4, 12) for _ in range(10)],
    dtype=np.float32,
)
patents = EmbeddingStore([f"P{i:02d}" for i in range(20)], patent_vecs)

task_vecs = np.array(
    [center_a + rng.normal(0, 0.8, 12) for _ in range(15)]
    + [center_b + rng.normal(0, 0.8, 12) for _ in range(15)],
    dtype=np.float32,
)
tasks = EmbeddingStore([f"T{i:02d}" for i in range(30)], task_vecs)

print("cosine of a task with itself:", cosine(task_vecs[0], task_vecs[0]))

results = match_tasks(tasks, patents)
for r in results[:5]:
    print(f"  {r.task_id} -> {r.best_patent_id}  sim={r.best_similarity:.4f}")

# The threshold is the nearest-rank 90th percentile of the per-task best
# similarities; only tasks strictly above it count as impacted.
threshold = impact_threshold(results)
print(f"impact threshold (90th percentile of best sims): {threshold:.4f}")

# Pretend the first topic's patents were classified disruptive and the
# second topic's consolidating.
patent_classes = {
    pid: (PatentClass.DISRUPTIVE if int(pid[1:]) < 10 else PatentClass.CONSOLIDATING)
    for pid in patents.ids
}
labels = classify_tasks(results, threshold, patent_classes)
tally = {}
for lab in labels.values():
    tally[lab.value] = tally.get(lab.value, 0) + 1
print("label tally:", dict(sorted(tally.items())))
