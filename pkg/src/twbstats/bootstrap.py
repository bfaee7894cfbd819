"""Seeded nonparametric bootstrap over grouped observations.

Shot data are small integers, so a series of N shots is stored as its table
of distinct rows with multiplicities.  Drawing N rows with replacement is
then the same as drawing the multiplicities from Multinomial(N, counts/N),
which costs O(distinct rows) per resample instead of O(N).

Resample ``r`` uses ``SeedSequence(seed, spawn_key=(r,))``; results do not
depend on the number of worker threads.
"""

from concurrent.futures import ThreadPoolExecutor
import warnings

import numpy as np

from .errors import TwbStatsError, ValidationError

DEFAULT_RESAMPLES = 1000


def _resample_rng(seed, r):
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(r,))))


def grouped_bootstrap(support, counts, statistic, n_resamples=DEFAULT_RESAMPLES, seed=0, workers=1):
    """Bootstrap standard error of ``statistic(support, weights)``.

    Parameters
    ----------
    support : ndarray
        Distinct observations (first axis indexes them).
    counts : array_like of int
        Multiplicity of each row of ``support``.
    statistic : callable
        ``statistic(support, weights) -> float or 1-D array``. Resamples on
        which it raises a :class:`TwbStatsError` or produces non-finite
        values are ignored for the affected entries.
    n_resamples : int
    seed : int or sequence of int
    workers : int

    Returns
    -------
    estimate, stderr : float or ndarray
        ``statistic`` on the original weights, and the standard deviation
        (ddof=1) of the resampled values.
    """
    counts = np.asarray(counts, dtype=np.int64)
    total = int(counts.sum())
    if total < 1:
        raise ValidationError("counts", "no observations")
    if n_resamples < 2:
        raise ValidationError("n_resamples", f"must be >= 2, got {n_resamples!r}")
    estimate = np.asarray(statistic(support, counts.astype(np.float64)), dtype=np.float64)
    probs = counts / total

    def one(r):
        w = _resample_rng(seed, r).multinomial(total, probs).astype(np.float64)
        try:
            return np.asarray(statistic(support, w), dtype=np.float64)
        except (TwbStatsError, ZeroDivisionError, FloatingPointError):
            return np.full(estimate.shape, np.nan)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            draws = list(pool.map(one, range(n_resamples)))
    else:
        draws = [one(r) for r in range(n_resamples)]
    draws = np.array(draws, dtype=np.float64)
    draws[~np.isfinite(draws)] = np.nan
    valid = np.sum(np.isfinite(draws), axis=0)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        err = np.nanstd(draws, axis=0, ddof=1)
    err = np.where(valid >= 2, err, np.nan)
    if estimate.ndim == 0:
        return float(estimate), float(err)
    return estimate, err


def bootstrap_mean(values, n_resamples=DEFAULT_RESAMPLES, seed=0, workers=1):
    """Mean of integer data and its bootstrap standard error."""
    values = np.asarray(values)
    support, counts = np.unique(values, return_counts=True)
    return grouped_bootstrap(
        support, counts, lambda s, w: (s @ w) / w.sum(), n_resamples=n_resamples, seed=seed, workers=workers
    )
