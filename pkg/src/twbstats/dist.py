"""Truncated probability mass functions over non-negative counts.

Distributions are dense arrays ``probs[n] = P(n)`` for ``n = 0..n_max`` plus
the probability mass that is not represented (``tail_mass``).  The cutoff is
chosen so that the discarded part contributes at most ``tol`` to the mass and
at most ``tol * min(1, mean**2)`` to the first and second raw moments; this
keeps moments (and therefore g2) accurate to O(tol) even for broad thermal
distributions.
"""

from dataclasses import dataclass, field
import math

import numpy as np

from .errors import UndefinedG2Error, ValidationError

DEFAULT_TOL = 1e-10
DEFAULT_MAX_SUPPORT = 1 << 20
# transforms may only shed negligible trailing entries
TRIM_FRACTION = 1e-3
NORM_TOL = 1e-12


@dataclass(frozen=True)
class PhotonDistribution:
    """Probability mass function over counts ``0..n_max``.

    Parameters
    ----------
    probs : array_like
        ``probs[n]`` is the probability of ``n`` counts.
    tail_mass : float
        Probability not represented by ``probs`` (mass beyond ``n_max``).
    """

    probs: np.ndarray
    tail_mass: float = 0.0

    def __post_init__(self):
        p = np.array(self.probs, dtype=np.float64).ravel()
        if p.size == 0:
            raise ValidationError("probs", "must contain at least one entry")
        if not np.all(np.isfinite(p)) or not math.isfinite(self.tail_mass):
            raise ValidationError("probs", "entries must be finite")
        if np.any(p < 0.0) or self.tail_mass < 0.0:
            raise ValidationError("probs", "entries must be non-negative")
        total = math.fsum(p) + self.tail_mass
        if abs(total - 1.0) > NORM_TOL:
            raise ValidationError("probs", f"sum + tail_mass = {total!r}, expected 1")
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)
        object.__setattr__(self, "tail_mass", float(self.tail_mass))

    @property
    def n_max(self):
        return self.probs.size - 1

    @property
    def support(self):
        return np.arange(self.probs.size)

    def pmf(self, n):
        """P(n), zero outside the represented range."""
        n = np.asarray(n)
        out = np.zeros(n.shape)
        ok = (n >= 0) & (n <= self.n_max)
        out[ok] = self.probs[n[ok]]
        return out if out.ndim else float(out)

    def __len__(self):
        return self.probs.size


@dataclass(frozen=True)
class Moments:
    """First two moments of a count distribution."""

    mean: float
    variance: float
    second_raw: float = field(default=None)

    def __post_init__(self):
        if self.second_raw is None:
            object.__setattr__(self, "second_raw", self.variance + self.mean**2)
        for name in ("mean", "variance", "second_raw"):
            if not math.isfinite(getattr(self, name)):
                raise ValidationError(name, "must be finite")
        scale = max(1.0, abs(self.second_raw))
        if self.variance < -NORM_TOL * scale:
            raise ValidationError("variance", "must be non-negative")
        if abs(self.variance - (self.second_raw - self.mean**2)) > NORM_TOL * scale:
            raise ValidationError("variance", "inconsistent with second_raw - mean**2")

    def scaled(self, gamma):
        """Moments of ``gamma * c``."""
        return Moments(gamma * self.mean, gamma**2 * self.variance, gamma**2 * self.second_raw)


def _check_mean(mean, name="mean"):
    if not (isinstance(mean, (int, float, np.integer, np.floating)) and math.isfinite(mean)):
        raise ValidationError(name, f"must be a finite number, got {mean!r}")
    if mean < 0:
        raise ValidationError(name, f"must be non-negative, got {mean!r}")
    return float(mean)


def _check_tol(tol):
    if not (0.0 < tol < 1.0):
        raise ValidationError("tol", f"must lie in (0, 1), got {tol!r}")
    return float(tol)


def _cutoff_index(p, tol, mean):
    """Smallest index whose discarded suffix satisfies the truncation rule."""
    n = np.arange(p.size, dtype=np.float64)
    # suffix sums computed from the far end, no cancellation against totals
    s0 = np.cumsum(p[::-1])[::-1]
    s1 = np.cumsum((n * p)[::-1])[::-1]
    s2 = np.cumsum((n * n * p)[::-1])[::-1]
    s0 = np.append(s0[1:], 0.0)
    s1 = np.append(s1[1:], 0.0)
    s2 = np.append(s2[1:], 0.0)
    mscale = tol * min(1.0, mean * mean)
    ok = (s0 <= tol) & (s1 <= mscale) & (s2 <= mscale)
    return int(np.argmax(ok))


def _from_family(logpmf, mean, var, tol, max_support):
    """Evaluate a log-pmf on a growing grid and truncate it."""
    n_hi = int(mean + 12.0 * math.sqrt(var) + 40)
    while True:
        if n_hi > max_support:
            raise ValidationError("max_support", f"distribution needs more than {max_support} entries")
        p = np.exp(logpmf(n_hi))
        peak = int(np.argmax(p))
        if peak < n_hi and p[-1] <= 1e-30 * p[peak]:
            break
        n_hi *= 2
    keep = _cutoff_index(p, tol, mean)
    p = p[: keep + 1].copy()
    tail = max(0.0, 1.0 - math.fsum(p))
    return PhotonDistribution(p, tail)


def _retruncate(p, tail, tol):
    """Drop negligible trailing entries produced by a transform."""
    p = np.asarray(p, dtype=np.float64)
    np.clip(p, 0.0, None, out=p)
    mean = float(np.arange(p.size) @ p)
    keep = _cutoff_index(p, tol * TRIM_FRACTION, mean)
    dropped = math.fsum(p[keep + 1 :])
    kept = p[: keep + 1]
    # resync bookkeeping with the represented mass (rounding only)
    tail = max(0.0, tail + dropped)
    total = math.fsum(kept) + tail
    if abs(total - 1.0) > 0.5 * NORM_TOL:
        tail = max(0.0, 1.0 - math.fsum(kept))
    return PhotonDistribution(kept, tail)


def point_mass(n=0):
    """Distribution concentrated at count ``n``."""
    if int(n) != n or n < 0:
        raise ValidationError("n", f"must be a non-negative integer, got {n!r}")
    p = np.zeros(int(n) + 1)
    p[-1] = 1.0
    return PhotonDistribution(p)


def poisson(mean, tol=DEFAULT_TOL, max_support=DEFAULT_MAX_SUPPORT):
    """Poisson distribution (dark counts, coherent light)."""
    mean = _check_mean(mean)
    tol = _check_tol(tol)
    if mean == 0.0:
        return point_mass(0)
    log_mean = math.log(mean)

    def logpmf(n_hi):
        j = np.arange(1, n_hi + 1, dtype=np.float64)
        steps = log_mean - np.log(j)
        return np.concatenate(([-mean], -mean + np.cumsum(steps)))

    return _from_family(logpmf, mean, mean, tol, max_support)


def multimode_thermal(mean, modes, tol=DEFAULT_TOL, max_support=DEFAULT_MAX_SUPPORT):
    """Photon-number law of ``modes`` equally populated thermal modes.

    This is the negative binomial with ``modes`` trials and per-mode mean
    ``mean / modes``, evaluated with the forward recurrence

        P(n + 1) / P(n) = (n + modes) / (n + 1) * x / (1 + x),  x = mean / modes

    in log space, starting from ``P(0) = (1 + x) ** -modes``.
    """
    mean = _check_mean(mean)
    tol = _check_tol(tol)
    if int(modes) != modes or modes < 1:
        raise ValidationError("modes", f"must be an integer >= 1, got {modes!r}")
    modes = int(modes)
    if mean == 0.0:
        return point_mass(0)
    x = mean / modes
    log_q = math.log(x) - math.log1p(x)
    log_p0 = -modes * math.log1p(x)

    def logpmf(n_hi):
        j = np.arange(n_hi, dtype=np.float64)
        steps = np.log(j + modes) - np.log(j + 1.0) + log_q
        return np.concatenate(([log_p0], log_p0 + np.cumsum(steps)))

    return _from_family(logpmf, mean, mean * (1.0 + x), tol, max_support)


def thermal(mean, tol=DEFAULT_TOL, max_support=DEFAULT_MAX_SUPPORT):
    """Single-mode thermal (geometric) distribution."""
    return multimode_thermal(mean, 1, tol=tol, max_support=max_support)


def moments(d):
    """Mean, variance and second raw moment of the represented mass."""
    n = np.arange(d.probs.size, dtype=np.float64)
    mean = float(n @ d.probs)
    # central form avoids cancellation; second_raw follows from it
    var = float(((n - mean) ** 2) @ d.probs)
    return Moments(mean, var, var + mean * mean)


def g2_photons(m):
    """Normal-ordered g2 of photons, (<n^2> - <n>) / <n>^2."""
    if m.mean <= 0:
        raise UndefinedG2Error("g2 undefined for zero mean")
    return (m.second_raw - m.mean) / m.mean**2


def g2_counts(m):
    """g2 of a detector output, variance / mean^2 + 1 (gain free)."""
    if m.mean <= 0:
        raise UndefinedG2Error("g2 undefined for zero mean")
    return m.variance / m.mean**2 + 1.0


def convolve(a, b, tol=DEFAULT_TOL):
    """Distribution of the sum of two independent counts."""
    p = np.convolve(a.probs, b.probs)
    tail = a.tail_mass + b.tail_mass - a.tail_mass * b.tail_mass
    return _retruncate(p, tail, tol)


def from_counts(counts):
    """Empirical distribution from a histogram of occurrences."""
    counts = np.asarray(counts)
    total = counts.sum()
    if total <= 0:
        raise ValidationError("counts", "histogram is empty")
    return PhotonDistribution(counts / total)
