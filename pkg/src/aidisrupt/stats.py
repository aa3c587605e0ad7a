"""Shuffle null models, two-proportion z-tests, OLS, and outlier-robust Pearson r.

The null model reassigns each task characteristic across all tasks
(preserving the global label counts), recomputes the within-group ratios,
and converts observed ratios into z-scores against the shuffled
distribution. Each iteration seeds its own RNG stream from the
(seed, iteration) pair, so results are bit-identical no matter how the
iterations are scheduled across threads.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np
from scipy.special import ndtr, stdtr

from .errors import DataError

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class NullModelResult:
    group: str
    characteristic: str
    value: str
    observed_ratio: float
    null_mean: float
    null_std: float
    z: float
    z_defined: bool  # False when the null distribution is degenerate (std == 0)
    n_iterations: int


@dataclass(frozen=True)
class TwoPropResult:
    p1: float
    p2: float
    n1: int
    n2: int
    z: float
    p_value: float
    z_defined: bool


@dataclass(frozen=True)
class RegressionFit:
    slope: float
    intercept: float
    residuals: np.ndarray
    residual_std: float


@dataclass(frozen=True)
class CorrelationResult:
    r: float
    p_value: float
    n: int
    excluded: tuple[str, ...]
    slope: float
    intercept: float


def null_model_zscores(
    labels: Mapping[str, object],
    chars: Mapping[str, Mapping[str, str]],
    n_iter: int,
    seed: int,
    threads: int = 1,
) -> list[NullModelResult]:
    """z-scores of observed within-group characteristic ratios against shuffles.

    ``labels`` maps task id to its impact group; ``chars`` maps task id to a
    characteristic-name -> value mapping (all tasks must share the same
    characteristic names). Each of the ``n_iter`` shuffles permutes every
    characteristic column independently across all tasks. Empty groups are
    omitted with a warning. When the null distribution is degenerate
    (std == 0) the z value is 0.0 if the observation equals the null mean
    (the natural limit) and NaN otherwise, flagged via ``z_defined=False``.
    """
    if n_iter < 2:
        raise DataError(f"n_iter must be at least 2, got {n_iter}")
    if seed < 0:
        raise DataError(f"seed must be non-negative, got {seed}")
    tasks = sorted(labels)
    if not tasks:
        raise DataError("no labeled tasks to analyze")
    missing = [t for t in tasks if t not in chars]
    if missing:
        raise DataError("labeled tasks without characteristics: " + ", ".join(missing[:10]))
    char_names = sorted(chars[tasks[0]])
    for t in tasks:
        if sorted(chars[t]) != char_names:
            raise DataError(f"task {t!r} does not carry the full characteristic set")

    n = len(tasks)
    group_names = sorted({str(labels[t]) for t in tasks})
    group_masks = {
        g: np.array([str(labels[t]) == g for t in tasks], dtype=bool) for g in group_names
    }
    group_sizes = {g: int(mask.sum()) for g, mask in group_masks.items()}

    # Encode each characteristic column as integer codes over its sorted values.
    columns: dict[str, np.ndarray] = {}
    values: dict[str, list[str]] = {}
    for c in char_names:
        vals = sorted({chars[t][c] for t in tasks})
        code = {v: i for i, v in enumerate(vals)}
        columns[c] = np.array([code[chars[t][c]] for t in tasks], dtype=np.int64)
        values[c] = vals

    cells = [(c, v) for c in char_names for v in values[c]]
    observed_counts = np.zeros((len(group_names), len(cells)), dtype=np.int64)
    for gi, g in enumerate(group_names):
        mask = group_masks[g]
        for ci, (c, v) in enumerate(cells):
            vi = values[c].index(v)
            observed_counts[gi, ci] = int((columns[c][mask] == vi).sum())

    # Integer counts, not float ratios: degenerate null distributions must be
    # detected exactly, and integer sums carry no rounding noise.
    counts = np.empty((n_iter, len(group_names), len(cells)), dtype=np.int64)

    def run_iteration(it: int) -> None:
        rng = np.random.default_rng((seed, it))
        shuffled = {c: columns[c][rng.permutation(n)] for c in char_names}
        for gi, g in enumerate(group_names):
            mask = group_masks[g]
            for ci, (c, v) in enumerate(cells):
                vi = values[c].index(v)
                counts[it, gi, ci] = int((shuffled[c][mask] == vi).sum())

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(run_iteration, range(n_iter)))
    else:
        for it in range(n_iter):
            run_iteration(it)

    results: list[NullModelResult] = []
    for gi, g in enumerate(group_names):
        size = group_sizes[g]
        if size == 0:
            log.warning("group %s is empty, omitted from null-model results", g)
            continue
        for ci, (c, v) in enumerate(cells):
            col = counts[:, gi, ci]
            obs_count = int(observed_counts[gi, ci])
            obs = obs_count / size
            if int(col.min()) == int(col.max()):  # degenerate null distribution
                mean = int(col[0]) / size
                std = 0.0
                z, defined = (0.0 if obs_count == int(col[0]) else math.nan), False
            else:
                null = col.astype(np.float64) / size
                mean = float(null.mean())
                std = float(null.std())
                z, defined = (obs - mean) / std, True
            results.append(
                NullModelResult(
                    group=g,
                    characteristic=c,
                    value=v,
                    observed_ratio=obs,
                    null_mean=mean,
                    null_std=std,
                    z=z,
                    z_defined=defined,
                    n_iterations=n_iter,
                )
            )
    return results


def two_prop_test(k1: int, n1: int, k2: int, n2: int) -> TwoPropResult:
    """Pooled two-proportion z-test with a two-sided normal p-value."""
    for k, n in ((k1, n1), (k2, n2)):
        if n < 1:
            raise DataError(f"sample size must be at least 1, got {n}")
        if not 0 <= k <= n:
            raise DataError(f"count {k} outside [0, {n}]")
    p1 = k1 / n1
    p2 = k2 / n2
    pooled = (k1 + k2) / (n1 + n2)
    if pooled in (0.0, 1.0):
        return TwoPropResult(p1, p2, n1, n2, math.nan, math.nan, False)
    se = math.sqrt(pooled * (1.0 - pooled) * (1.0 / n1 + 1.0 / n2))
    z = (p1 - p2) / se
    p_value = 2.0 * float(ndtr(-abs(z)))
    return TwoPropResult(p1, p2, n1, n2, z, p_value, True)


def ols_fit(x: Sequence[float], y: Sequence[float]) -> RegressionFit:
    """Least-squares line with intercept; residual_std uses n - 2 degrees of freedom."""
    xa = np.asarray(x, dtype=np.float64)
    ya = np.asarray(y, dtype=np.float64)
    if xa.shape != ya.shape or xa.ndim != 1:
        raise DataError(f"x and y must be 1-D and equal length, got {xa.shape} and {ya.shape}")
    n = xa.size
    if n < 3:
        raise DataError(f"need at least 3 points for a regression, got {n}")
    xm = xa.mean()
    ym = ya.mean()
    sxx = float(((xa - xm) ** 2).sum())
    if sxx == 0.0:
        raise DataError("x is constant; slope is undefined")
    slope = float(((xa - xm) * (ya - ym)).sum()) / sxx
    intercept = float(ym - slope * xm)
    residuals = ya - (slope * xa + intercept)
    residual_std = math.sqrt(float((residuals**2).sum()) / (n - 2))
    return RegressionFit(slope, intercept, residuals, residual_std)


def pearson(x: Sequence[float], y: Sequence[float]) -> tuple[float, float]:
    """Pearson r and its two-sided p-value from the t distribution with n-2 df."""
    xa = np.asarray(x, dtype=np.float64)
    ya = np.asarray(y, dtype=np.float64)
    n = xa.size
    if n < 3:
        raise DataError(f"need at least 3 points for a correlation, got {n}")
    dx = xa - xa.mean()
    dy = ya - ya.mean()
    denom = math.sqrt(float((dx**2).sum()) * float((dy**2).sum()))
    if denom == 0.0:
        raise DataError("correlation undefined: x or y is constant")
    r = float((dx * dy).sum()) / denom
    r = min(1.0, max(-1.0, r))
    if abs(r) == 1.0:
        return r, 0.0
    t = r * math.sqrt((n - 2) / (1.0 - r * r))
    p_value = 2.0 * float(stdtr(n - 2, -abs(t)))
    return r, p_value


def pearson_with_outlier_exclusion(
    x: Sequence[float],
    y: Sequence[float],
    sigma_mult: float = 2.0,
    ids: Sequence[str] | None = None,
) -> CorrelationResult:
    """Pearson r after one pass of regression-residual outlier exclusion.

    Fits OLS once, drops points whose absolute residual exceeds
    ``sigma_mult`` residual standard deviations, then refits and correlates
    the remainder. No iteration: a single exclusion pass.
    """
    xa = np.asarray(x, dtype=np.float64)
    ya = np.asarray(y, dtype=np.float64)
    n = xa.size
    if n < 4:
        raise DataError(f"need at least 4 points for outlier-excluded correlation, got {n}")
    if ids is None:
        ids = [str(i) for i in range(n)]
    if len(ids) != n:
        raise DataError(f"{len(ids)} ids for {n} points")
    fit = ols_fit(xa, ya)
    keep = np.abs(fit.residuals) <= sigma_mult * fit.residual_std
    excluded = tuple(ids[i] for i in np.flatnonzero(~keep))
    if int(keep.sum()) < 3:
        raise DataError(
            f"outlier exclusion left {int(keep.sum())} points; at least 3 required"
        )
    refit = ols_fit(xa[keep], ya[keep])
    r, p_value = pearson(xa[keep], ya[keep])
    if excluded:
        log.info("excluded %d outlier(s): %s", len(excluded), ", ".join(excluded))
    return CorrelationResult(
        r=r,
        p_value=p_value,
        n=int(keep.sum()),
        excluded=excluded,
        slope=refit.slope,
        intercept=refit.intercept,
    )
