"""Nearest-rank percentile, the single percentile rule used everywhere in the toolkit.

Interpolating percentile definitions differ between libraries; the
nearest-rank rule (value at rank ceil(p/100 * n) of the ascending sorted
sample) is exact and reproducible, so quartile cutoffs, the task-impact
threshold, and the network edge cutoff all share it.
"""

from __future__ import annotations

import math
from typing import Iterable


def nearest_rank(values: Iterable[float], pct: float) -> float:
    """Return the value at rank ceil(pct/100 * n) of the sorted sample."""
    if not 0 < pct < 100:
        raise ValueError(f"percentile must lie in (0, 100), got {pct}")
    data = sorted(values)
    if not data:
        raise ValueError("nearest-rank percentile of an empty sample")
    rank = max(1, math.ceil(pct / 100.0 * len(data)))
    return data[rank - 1]
