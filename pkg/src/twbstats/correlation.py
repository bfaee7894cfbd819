"""Correlation estimators for paired shot records and their closed-form models.

All estimators are ratios of sample moments of the paired counts
``(m1, m2)``.  With ``d = m1 - m2``, ``S = <m1 + m2>`` and ``D = <d>``::

    R                = var(d) / S
    g2_diff(m)       = <d^2> / D^2          = 1 + R S / D^2
    g2_diff(n) - 1   = g2_diff(m) - S / D^2 - 1 = (R - 1) S / D^2

The last two identities hold exactly when ``var(d)`` is the population
(ddof=0) variance.  The reported ``R`` uses the unbiased (ddof=1) variance
by default; pass ``ddof=0`` to get the value that enters the identities.

Bootstrap standard errors resample whole shots, so the two arms stay paired.
"""

from dataclasses import asdict, dataclass, field

import numpy as np

from .bootstrap import DEFAULT_RESAMPLES, grouped_bootstrap
from .errors import (
    DegenerateInputError,
    DivergentStatisticError,
    InsufficientStatisticsError,
    SingularParametersError,
    ValidationError,
)

# relative guard on |<m1 - m2>| against <m1 + m2>
DIVERGENCE_THRESHOLD = 1e-9


def pair_table(series):
    """Distinct ``(k1, k2)`` rows of a series with their multiplicities."""
    if series.n_shots < 1:
        raise ValidationError("series", "is empty")
    width = int(series.k2.max()) + 1
    code = series.k1 * width + series.k2
    hist = np.bincount(code)
    nz = np.flatnonzero(hist)
    pairs = np.stack([nz // width, nz % width], axis=1).astype(np.float64)
    return pairs, hist[nz]


def _moments(pairs, w):
    total = w.sum()
    m1 = (pairs[:, 0] @ w) / total
    m2 = (pairs[:, 1] @ w) / total
    d = pairs[:, 0] - pairs[:, 1]
    dmean = m1 - m2
    var_pop = (((d - dmean) ** 2) @ w) / total
    return total, m1, m2, dmean, var_pop


def _nrf(pairs, w, ddof):
    total, m1, m2, _, var_pop = _moments(pairs, w)
    s = m1 + m2
    if s <= 0:
        raise DegenerateInputError("zero total mean <m1 + m2>")
    if total - ddof <= 0:
        raise DegenerateInputError("too few shots for the variance")
    return var_pop * total / (total - ddof) / s


def _g2_diff(pairs, w, threshold):
    """(g2_diff(m), g2_diff(n) - 1) from one set of weights."""
    _, m1, m2, dmean, var_pop = _moments(pairs, w)
    s = m1 + m2
    if s <= 0:
        raise DegenerateInputError("zero total mean <m1 + m2>")
    if abs(dmean) < threshold * s:
        raise DivergentStatisticError(
            "<m1 - m2> is numerically zero; g2_diff diverges",
            {"sum_mean": s, "diff_mean": dmean, "var_diff": var_pop, "second_diff": var_pop + dmean**2},
        )
    d2 = dmean * dmean
    return 1.0 + var_pop / d2, (var_pop - s) / d2


def _check_shots(series, minimum=2):
    if series.n_shots < minimum:
        raise ValidationError("series", f"need at least {minimum} shots, got {series.n_shots}")


def noise_reduction_factor(series, n_resamples=DEFAULT_RESAMPLES, seed=0, ddof=1, workers=1):
    """Noise reduction factor ``var(m1 - m2) / <m1 + m2>`` and bootstrap stderr."""
    _check_shots(series)
    pairs, counts = pair_table(series)
    _nrf(pairs, counts.astype(np.float64), ddof)
    return grouped_bootstrap(
        pairs, counts, lambda p, w: _nrf(p, w, ddof), n_resamples=n_resamples, seed=seed, workers=workers
    )


def g2_diff_detected(series, n_resamples=DEFAULT_RESAMPLES, seed=0, threshold=DIVERGENCE_THRESHOLD, workers=1):
    """``<(m1 - m2)^2> / <m1 - m2>^2`` and bootstrap stderr.

    Raises
    ------
    DivergentStatisticError
        If ``|<m1 - m2>| < threshold * <m1 + m2>``; the raw moments are
        attached to the exception.
    """
    _check_shots(series, 1)
    pairs, counts = pair_table(series)
    _g2_diff(pairs, counts.astype(np.float64), threshold)
    return grouped_bootstrap(
        pairs, counts, lambda p, w: _g2_diff(p, w, threshold)[0], n_resamples=n_resamples, seed=seed, workers=workers
    )


def g2_diff_photons(series, n_resamples=DEFAULT_RESAMPLES, seed=0, threshold=DIVERGENCE_THRESHOLD, workers=1):
    """``g2_diff(n) - 1`` inferred from detected counts (equal efficiencies)."""
    _check_shots(series, 1)
    pairs, counts = pair_table(series)
    _g2_diff(pairs, counts.astype(np.float64), threshold)
    return grouped_bootstrap(
        pairs, counts, lambda p, w: _g2_diff(p, w, threshold)[1], n_resamples=n_resamples, seed=seed, workers=workers
    )


@dataclass(frozen=True)
class ArmStats:
    arm: int
    k_mean: float
    k_mean_stderr: float
    g2_k: float
    g2_k_stderr: float


def _arm_g2(values, w):
    total = w.sum()
    mean = (values @ w) / total
    if mean <= 0:
        raise DegenerateInputError("zero mean count")
    var = (((values - mean) ** 2) @ w) / total
    return np.array([mean, var / mean**2 + 1.0])


def arm_stats(series, arm, n_resamples=DEFAULT_RESAMPLES, seed=0, workers=1):
    """Sample mean and g2 (``<k^2>/<k>^2``) of one arm with bootstrap stderr."""
    _check_shots(series)
    counts = np.bincount(series.arm(arm))
    support = np.flatnonzero(counts)
    est, err = grouped_bootstrap(
        support.astype(np.float64), counts[support], _arm_g2, n_resamples=n_resamples, seed=seed, workers=workers
    )
    return ArmStats(arm, float(est[0]), float(err[0]), float(est[1]), float(err[1]))


@dataclass(frozen=True)
class CorrelationStats:
    """Joint statistics of a shot series.

    ``var_diff`` and ``R`` use the unbiased variance.  ``g2_diff_m`` and
    ``g2_diff_n_minus_1`` are ``None`` when ``<m1 - m2>`` is numerically zero;
    ``g2_diff_status`` then reads ``"divergent"``.  ``stderr`` maps field
    names to bootstrap standard errors.
    """

    n_shots: int
    mean1: float
    mean2: float
    var_diff: float
    sum_mean: float
    diff_mean: float
    R: float
    g2_diff_m: float = None
    g2_diff_n_minus_1: float = None
    g2_diff_status: str = "ok"
    stderr: dict = field(default_factory=dict)

    def to_dict(self):
        return asdict(self)


_JOINT_FIELDS = ("mean1", "mean2", "var_diff", "sum_mean", "diff_mean", "R", "g2_diff_m", "g2_diff_n_minus_1")


def _joint_vector(pairs, w, threshold):
    total, m1, m2, dmean, var_pop = _moments(pairs, w)
    s = m1 + m2
    if s <= 0:
        raise DegenerateInputError("zero total mean <m1 + m2>")
    var = var_pop * total / (total - 1)
    if abs(dmean) < threshold * s:
        gm = gn = np.nan
    else:
        gm, gn = _g2_diff(pairs, w, threshold)
    return np.array([m1, m2, var, s, dmean, var / s, gm, gn])


def correlation_stats(series, n_resamples=DEFAULT_RESAMPLES, seed=0, threshold=DIVERGENCE_THRESHOLD, workers=1):
    """All joint estimators from one bootstrap pass."""
    _check_shots(series)
    pairs, counts = pair_table(series)
    est, err = grouped_bootstrap(
        pairs, counts, lambda p, w: _joint_vector(p, w, threshold), n_resamples=n_resamples, seed=seed, workers=workers
    )
    values = dict(zip(_JOINT_FIELDS, (float(v) for v in est)))
    errors = {k: float(e) for k, e in zip(_JOINT_FIELDS, err)}
    status = "ok"
    if not np.isfinite(values["g2_diff_m"]):
        status = "divergent"
        values["g2_diff_m"] = values["g2_diff_n_minus_1"] = None
        errors["g2_diff_m"] = errors["g2_diff_n_minus_1"] = None
    return CorrelationStats(n_shots=series.n_shots, g2_diff_status=status, stderr=errors, **values)


@dataclass(frozen=True)
class ConditionalResult:
    """Statistics of one arm post-selected on a count in the other arm."""

    m_cond: int
    conditioning_arm: int
    n_selected: int
    mean: float
    fano: float
    g2n_minus_1: float
    mean_stderr: float
    fano_stderr: float
    g2n_minus_1_stderr: float

    def to_dict(self):
        return asdict(self)


def _conditional_vector(values, w):
    total = w.sum()
    mean = (values @ w) / total
    if mean <= 0:
        raise DegenerateInputError("conditional mean is zero; Fano factor undefined")
    var = (((values - mean) ** 2) @ w) / total
    fano = var / mean
    return np.array([mean, fano, (fano - 1.0) / mean])


def conditional_stats(series, conditioning_arm, m_cond, n_resamples=DEFAULT_RESAMPLES, seed=0, workers=1):
    """Fano factor and ``g2(n) - 1 = (F - 1) / <m>`` of the conditional arm.

    Shots are kept where ``conditioning_arm`` recorded exactly ``m_cond``
    counts; the statistics refer to the other arm.  Variances are
    population (ddof=0) moments so that ``(F - 1)/<m>`` equals the
    normal-ordered g2 minus one of the selected sample.
    """
    if conditioning_arm not in (1, 2):
        raise ValidationError("conditioning_arm", f"must be 1 or 2, got {conditioning_arm!r}")
    if int(m_cond) != m_cond or m_cond < 0:
        raise ValidationError("m_cond", f"must be a non-negative integer, got {m_cond!r}")
    cond = series.arm(conditioning_arm)
    other = series.arm(3 - conditioning_arm)
    selected = other[cond == m_cond]
    if selected.size < 2:
        raise InsufficientStatisticsError(
            f"only {selected.size} shots with m_cond={m_cond} in arm {conditioning_arm}", selected.size
        )
    counts = np.bincount(selected)
    support = np.flatnonzero(counts)
    est, err = grouped_bootstrap(
        support.astype(np.float64), counts[support], _conditional_vector,
        n_resamples=n_resamples, seed=seed, workers=workers,
    )
    return ConditionalResult(
        m_cond=int(m_cond),
        conditioning_arm=conditioning_arm,
        n_selected=int(selected.size),
        mean=float(est[0]),
        fano=float(est[1]),
        g2n_minus_1=float(est[2]),
        mean_stderr=float(err[0]),
        fano_stderr=float(err[1]),
        g2n_minus_1_stderr=float(err[2]),
    )


def nrf_model(mean1, mean2, eta1, eta2, modes):
    """Noise reduction factor of a multi-mode thermal twin beam.

    R = 1 - 2 sqrt(eta1 eta2) sqrt(<m1><m2>) / (<m1> + <m2>)
          + (<m1> - <m2>)^2 / (modes (<m1> + <m2>))
    """
    for name, v in (("mean1", mean1), ("mean2", mean2)):
        if not np.isfinite(v) or v < 0:
            raise ValidationError(name, f"must be finite and >= 0, got {v!r}")
    for name, v in (("eta1", eta1), ("eta2", eta2)):
        if not 0.0 <= v <= 1.0:
            raise ValidationError(name, f"must lie in [0, 1], got {v!r}")
    if modes < 1:
        raise ValidationError("modes", f"must be >= 1, got {modes!r}")
    s = mean1 + mean2
    if s == 0:
        raise DegenerateInputError("both means are zero")
    return 1.0 - 2.0 * np.sqrt(eta1 * eta2) * np.sqrt(mean1 * mean2) / s + (mean1 - mean2) ** 2 / (modes * s)


def g2_diff_model(R, sum_mean, diff_mean):
    """``1 + R <m1 + m2> / <m1 - m2>^2``."""
    if diff_mean == 0:
        raise DivergentStatisticError("diff_mean is zero", {"R": R, "sum_mean": sum_mean, "diff_mean": diff_mean})
    return 1.0 + R * sum_mean / diff_mean**2


def g2_diff_n_model(R, sum_mean, diff_mean):
    """``(R - 1) <m1 + m2> / <m1 - m2>^2``, i.e. g2_diff(n) - 1."""
    if diff_mean == 0:
        raise DivergentStatisticError("diff_mean is zero", {"R": R, "sum_mean": sum_mean, "diff_mean": diff_mean})
    return (R - 1.0) * sum_mean / diff_mean**2


def fano_conditional_model(eta, modes, mean_m, m_cond):
    """Fano factor of a conditional state from a multi-mode thermal twin beam.

    ``eta`` is the detection efficiency (same in both arms), ``mean_m`` the
    unconditioned detected mean and ``m_cond`` the conditioning count.
    """
    if not 0.0 <= eta <= 1.0:
        raise ValidationError("eta", f"must lie in [0, 1], got {eta!r}")
    if modes < 1:
        raise ValidationError("modes", f"must be >= 1, got {modes!r}")
    if not np.isfinite(mean_m) or mean_m < 0:
        raise ValidationError("mean_m", f"must be finite and >= 0, got {mean_m!r}")
    if m_cond < 0:
        raise ValidationError("m_cond", f"must be >= 0, got {m_cond!r}")
    if eta == 1.0:
        return 0.0
    if mean_m == 0:
        return 1.0 - eta
    M, mu = float(mean_m), float(modes)
    r = m_cond + mu
    bracket = r * (M + eta * mu) - eta * mu * (M + mu)
    denom = (M + mu) * bracket
    if denom == 0:
        raise SingularParametersError("conditional Fano model has a zero denominator")
    return (1.0 - eta) + (1.0 - eta) * M * r * (M + eta * mu) / denom


def g2_conditional_model(eta, modes, mean_m, m_cond, conditional_mean):
    """``(F - 1) / <m>`` with F from :func:`fano_conditional_model`."""
    if conditional_mean <= 0:
        raise ValidationError("conditional_mean", f"must be > 0, got {conditional_mean!r}")
    return (fano_conditional_model(eta, modes, mean_m, m_cond) - 1.0) / conditional_mean
