"""SiPM response: detection loss, dark counts, optical cross-talk.

Two routes are provided and kept deliberately separate:

* exact transforms of a :class:`~twbstats.dist.PhotonDistribution` through
  the response chain (loss -> dark counts -> cross-talk), and
* closed-form moment and g2 relations for the same chain.

The cross-talk mechanism gives each primary avalanche at most one secondary
avalanche with probability ``epsilon``, i.e. ``k = l + Binomial(l, epsilon)``.
Its exact count variance is ``(1+e)^2 var(l) + e(1-e) <l>``; the published
closed form :func:`k_moments_closed_form` uses ``e(1+e) <l>`` instead and so
differs by ``2 e^2 <l>``.  :func:`k_moments_mechanism` gives the exact value.
"""

from dataclasses import dataclass
import math

import numpy as np
from scipy.stats import binom

from .dist import (
    DEFAULT_TOL,
    TRIM_FRACTION,
    Moments,
    PhotonDistribution,
    _retruncate,
    convolve,
    poisson,
)
from .errors import ValidationError


def _finite(name, value):
    if not math.isfinite(value):
        raise ValidationError(name, f"must be finite, got {value!r}")
    return float(value)


@dataclass(frozen=True)
class DetectorConfig:
    """Parameters of one detector arm.

    Attributes
    ----------
    eta : float
        Detection efficiency in [0, 1].
    epsilon : float
        Cross-talk probability per primary avalanche, in [0, 1).
    dark_mean : float
        Mean dark counts per gate, >= 0.
    gamma : float
        Output units per avalanche (x_out = gamma * k), > 0.
    """

    eta: float = 1.0
    epsilon: float = 0.0
    dark_mean: float = 0.0
    gamma: float = 1.0

    def __post_init__(self):
        eta = _finite("eta", self.eta)
        eps = _finite("epsilon", self.epsilon)
        dark = _finite("dark_mean", self.dark_mean)
        gamma = _finite("gamma", self.gamma)
        if not 0.0 <= eta <= 1.0:
            raise ValidationError("eta", f"must lie in [0, 1], got {eta!r}")
        if not 0.0 <= eps < 1.0:
            raise ValidationError("epsilon", f"must lie in [0, 1), got {eps!r}")
        if dark < 0.0:
            raise ValidationError("dark_mean", f"must be >= 0, got {dark!r}")
        if gamma <= 0.0:
            raise ValidationError("gamma", f"must be > 0, got {gamma!r}")
        for name, v in (("eta", eta), ("epsilon", eps), ("dark_mean", dark), ("gamma", gamma)):
            object.__setattr__(self, name, v)

    def to_dict(self):
        return {"eta": self.eta, "epsilon": self.epsilon, "dark_mean": self.dark_mean, "gamma": self.gamma}

    @classmethod
    def from_dict(cls, d):
        return cls(**{k: d[k] for k in ("eta", "epsilon", "dark_mean", "gamma") if k in d})


@dataclass(frozen=True)
class SensitivityReport:
    beta_epsilon: float
    beta_dark: float


def bernoulli_loss(d, eta, tol=DEFAULT_TOL):
    """Binomial thinning: each photon is detected with probability ``eta``."""
    eta = _finite("eta", eta)
    if not 0.0 <= eta <= 1.0:
        raise ValidationError("eta", f"must lie in [0, 1], got {eta!r}")
    if eta == 1.0:
        return d
    if eta == 0.0:
        return PhotonDistribution([1.0 - d.tail_mass], d.tail_mass)
    out = np.zeros(d.probs.size)
    for n in np.flatnonzero(d.probs):
        m = np.arange(n + 1)
        out[: n + 1] += d.probs[n] * binom.pmf(m, n, eta)
    return _retruncate(out, d.tail_mass, tol)


def add_dark(d, dark_mean, tol=DEFAULT_TOL):
    """Add independent Poisson dark counts."""
    dark_mean = _finite("dark_mean", dark_mean)
    if dark_mean < 0.0:
        raise ValidationError("dark_mean", f"must be >= 0, got {dark_mean!r}")
    if dark_mean == 0.0:
        return d
    return convolve(d, poisson(dark_mean, tol=tol * TRIM_FRACTION), tol=tol)


def crosstalk(d, epsilon, tol=DEFAULT_TOL):
    """Optical cross-talk, ``P(k) = sum_l C(l, k-l) e^(k-l) (1-e)^(2l-k) P(l)``."""
    epsilon = _finite("epsilon", epsilon)
    if not 0.0 <= epsilon < 1.0:
        raise ValidationError("epsilon", f"must lie in [0, 1), got {epsilon!r}")
    if epsilon == 0.0:
        return d
    out = np.zeros(2 * d.probs.size - 1)
    for l in np.flatnonzero(d.probs):
        extra = np.arange(l + 1)
        out[l : 2 * l + 1] += d.probs[l] * binom.pmf(extra, l, epsilon)
    return _retruncate(out, d.tail_mass, tol)


def detector_output_distribution(d_photons, cfg, tol=DEFAULT_TOL):
    """Avalanche-count distribution of one arm for incident photons ``d_photons``."""
    detected = bernoulli_loss(d_photons, cfg.eta, tol=tol)
    primaries = add_dark(detected, cfg.dark_mean, tol=tol)
    return crosstalk(primaries, cfg.epsilon, tol=tol)


def _nonneg(name, value):
    value = _finite(name, value)
    if value < 0:
        raise ValidationError(name, f"must be >= 0, got {value!r}")
    return value


def _check_epsilon(epsilon):
    epsilon = _finite("epsilon", epsilon)
    if not 0.0 <= epsilon < 1.0:
        raise ValidationError("epsilon", f"must lie in [0, 1), got {epsilon!r}")
    return epsilon


def k_moments_closed_form(mean_m, var_m, dark_mean, epsilon):
    """Published closed form for the mean and variance of the avalanche count.

    <k> = (1+e)(<m> + <m>_dc)
    var(k) = (1+e)^2 (var(m) + <m>_dc) + e(1+e)(<m> + <m>_dc)
    """
    mean_m = _nonneg("mean_m", mean_m)
    var_m = _nonneg("var_m", var_m)
    dark_mean = _nonneg("dark_mean", dark_mean)
    e = _check_epsilon(epsilon)
    primaries = mean_m + dark_mean
    mean = (1 + e) * primaries
    var = (1 + e) ** 2 * (var_m + dark_mean) + e * (1 + e) * primaries
    return Moments(mean, var)


def k_moments_mechanism(mean_m, var_m, dark_mean, epsilon):
    """Exact moments of ``k = l + Binomial(l, e)`` with ``l = m + dark``."""
    mean_m = _nonneg("mean_m", mean_m)
    var_m = _nonneg("var_m", var_m)
    dark_mean = _nonneg("dark_mean", dark_mean)
    e = _check_epsilon(epsilon)
    primaries = mean_m + dark_mean
    var = (1 + e) ** 2 * (var_m + dark_mean) + e * (1 - e) * primaries
    return Moments((1 + e) * primaries, var)


def g2_k_from_g2_n(g2_n, k_mean, dark_mean, epsilon):
    """Count g2 from photon g2, the mean count, dark mean and cross-talk."""
    k_mean = _finite("k_mean", k_mean)
    if k_mean <= 0:
        raise ValidationError("k_mean", f"must be > 0, got {k_mean!r}")
    dark_mean = _nonneg("dark_mean", dark_mean)
    e = _check_epsilon(epsilon)
    light_fraction = 1.0 - (1 + e) * dark_mean / k_mean
    return 1.0 + (g2_n - 1.0) * light_fraction**2 + (1 + 3 * e) / ((1 + e) * k_mean)


def g2_multimode_model(k_mean, modes, epsilon, dark_mean):
    """Count g2 for multi-mode thermal light with ``modes`` equal modes.

    Vectorised over ``k_mean`` (and the other arguments) with numpy
    broadcasting; used as the fitting model.
    """
    k = np.asarray(k_mean, dtype=np.float64)
    if np.any(~np.isfinite(k)) or np.any(k <= 0):
        raise ValidationError("k_mean", "must be finite and > 0")
    if np.any(np.asarray(modes) < 1):
        raise ValidationError("modes", "must be >= 1")
    e = np.asarray(epsilon, dtype=np.float64)
    dc = np.asarray(dark_mean, dtype=np.float64)
    light_fraction = 1.0 - (1 + e) * dc / k
    g2 = 1.0 + light_fraction**2 / modes + (1 + 3 * e) / ((1 + e) * k)
    return float(g2) if g2.ndim == 0 else g2


def sensitivity_beta(param_kind, modes, k_mean, hold="counts"):
    """First-order relative sensitivity of the multi-mode g2 model.

    ``beta = (dg2/d alpha) / g2`` at ``epsilon = dark_mean = 0``, where
    ``alpha`` is ``"epsilon"`` or ``"dark"``.

    ``hold="counts"`` (default) differentiates at fixed ``<k>``.  With
    ``hold="detected"`` the detected-photon mean ``<m>`` is held fixed instead,
    so ``<k> = (1+e)(<m> + dc)`` moves with the parameter; ``k_mean`` is then
    read as ``<m>`` (they coincide at the expansion point).
    """
    k = _finite("k_mean", k_mean)
    if k <= 0:
        raise ValidationError("k_mean", f"must be > 0, got {k_mean!r}")
    if modes < 1:
        raise ValidationError("modes", f"must be >= 1, got {modes!r}")
    g0 = 1.0 + 1.0 / modes + 1.0 / k
    if hold == "counts":
        derivs = {"epsilon": 2.0 / k, "dark": -2.0 / (modes * k)}
    elif hold == "detected":
        derivs = {"epsilon": 1.0 / k, "dark": -2.0 / (modes * k) - 1.0 / k**2}
    else:
        raise ValidationError("hold", f"must be 'counts' or 'detected', got {hold!r}")
    if param_kind not in derivs:
        raise ValidationError("param_kind", f"must be 'epsilon' or 'dark', got {param_kind!r}")
    return derivs[param_kind] / g0


def sensitivity_report(modes, k_mean, hold="counts"):
    return SensitivityReport(
        sensitivity_beta("epsilon", modes, k_mean, hold),
        sensitivity_beta("dark", modes, k_mean, hold),
    )


def g2_model_at_fixed_detected(m_mean, modes, epsilon, dark_mean):
    """Multi-mode g2 of counts as a function of the detected-photon mean."""
    k = (1 + epsilon) * (m_mean + dark_mean)
    return g2_multimode_model(k, modes, epsilon, dark_mean)

