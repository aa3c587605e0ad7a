# Walk through the disruption index on a citation graph small enough to
# check by hand, then classify a batch of scores by quartile.

import datetime as dt

from aidisrupt.corpus import CitationEdge, Patent
from aidisrupt.disruption import (
    DisruptionCounts,
    DisruptionScore,
    build_graph,
    classify_patents,
    disruption_counts,
    disruption_index,
)


def patent(pid, year):
    return Patent(pid, dt.date(year, 1, 1), f"title {pid}", "", None, frozenset())


# The focal patent F builds on two references R1 and R2. Four later patents
# arrive; what matters is whether each one cites F alone, F together with
# its references, or the references while ignoring F.
patents = [
    patent("R1", 2000),
    patent("R2", 2001),
    patent("F", 2010),
    patent("P1", 2012),  # cites F only                -> counts toward n_i
    patent("P2", 2012),  # cites F and R1              -> counts toward n_j
    patent("P3", 2013),  # cites R2 only               -> counts toward n_k
    patent("P4", 2013),  # cites R1 and R2, one citer  -> still one n_k
]
edges = [
    CitationEdge("F", "R1"),
    CitationEdge("F", "R2"),
    CitationEdge("P1", "F"),
    CitationEdge("P2", "F"),
    CitationEdge("P2", "R1"),
    CitationEdge("P3", "R2"),
    CitationEdge("P4", "R1"),
    CitationEdge("P4", "R2"),
]
graph = build_graph(patents, edges)

counts = disruption_counts(graph, "F")
print("citer split for F:", counts)
print("disruption index of F:", disruption_index(counts))

# The extremes are easy to read off the formula: a patent whose citers all
# ignore its references scores +1, one always co-cited with them scores -1.
print("pure disruption:", disruption_index(DisruptionCounts(5, 0, 0)))
print("pure consolidation:", disruption_index(DisruptionCounts(0, 5, 0)))

# Quartile labeling works on any batch of scores. Nearest-rank cutoffs on
# four values land at the 1st and 3rd order statistics.
scores = [
    DisruptionScore(pid, DisruptionCounts(1, 0, 0), d)
    for pid, d in [("A", -0.8), ("B", -0.2), ("C", 0.1), ("D", 0.9)]
]
result = classify_patents(scores)
print(f"q25={result.q25}  q75={result.q75}")
for pid in sorted(result.labels):
    print(f"  {pid}: {result.labels[pid].value}")
