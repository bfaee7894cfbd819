"""Estimate cross-talk and dark-count mean from a measured g2(k) curve.

The multi-mode count model is fitted with the number of modes held fixed.
A coarse grid over ``(epsilon, dark_mean)`` picks the starting point, then a
bounded trust-region least-squares run refines it.  Both stages are
deterministic.
"""

from dataclasses import asdict, dataclass

import numpy as np
from scipy.optimize import least_squares

from .detector import g2_multimode_model
from .errors import ValidationError

GRID_POINTS = 50
EPSILON_MAX = 0.5
_EPS_UPPER = 1.0 - 1e-9
# parameters this close to a bound count as pinned there
_BOUND_TOL = 1e-10


@dataclass(frozen=True)
class FitResult:
    epsilon_hat: float
    dark_hat: float
    residual_rms: float
    stderr_epsilon: float
    stderr_dark: float
    mu_fixed: float
    chi2: float
    n_points: int
    converged: bool

    def to_dict(self):
        # unidentifiable parameters carry an infinite stderr, stored as null
        return {k: (None if isinstance(v, float) and not np.isfinite(v) else v) for k, v in asdict(self).items()}

    @classmethod
    def from_dict(cls, d):
        values = {k: d[k] for k in cls.__dataclass_fields__}
        for k in ("stderr_epsilon", "stderr_dark"):
            if values[k] is None:
                values[k] = np.inf
        return cls(**values)


def _as_curve(curve):
    arr = np.asarray(curve, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[1] != 3:
        raise ValidationError("curve", "expected rows of (k_mean, g2, stderr)")
    if arr.shape[0] < 3:
        raise ValidationError("curve", f"need >= 3 points, got {arr.shape[0]}")
    if not np.all(np.isfinite(arr)):
        raise ValidationError("curve", "contains non-finite values")
    k, g2, err = arr.T
    if np.any(k <= 0):
        raise ValidationError("curve", "k_mean must be > 0")
    if np.any(err <= 0):
        raise ValidationError("curve", "stderr must be > 0")
    if np.all(k == k[0]):
        raise ValidationError("curve", "all k_mean values are identical")
    return k, g2, err


def _jacobian(k, mu, eps, dark, err):
    light = 1.0 - (1 + eps) * dark / k
    d_eps = -2.0 * light * dark / (mu * k) + 2.0 / ((1 + eps) ** 2 * k)
    d_dark = -2.0 * light * (1 + eps) / (mu * k)
    return np.stack([d_eps, d_dark], axis=1) / err[:, None]


def _linear_start(k, g2, err, mu):
    """Exact solution of the weighted problem in the basis (1/k, 1/k^2).

    With ``a = (1+eps) dark`` the model is ``1 + 1/mu + p/k + q/k^2`` where
    ``q = a^2/mu`` and ``p = (1+3 eps)/(1+eps) - 2a/mu``.  Returns ``None``
    when the linear solution maps outside the parameter bounds.
    """
    A = np.column_stack([1.0 / k, 1.0 / k**2]) / err[:, None]
    y = (g2 - 1.0 - 1.0 / mu) / err
    (p, q), *_ = np.linalg.lstsq(A, y, rcond=None)
    a = np.sqrt(max(q, 0.0) * mu)
    c = p + 2.0 * a / mu
    eps = (c - 1.0) / (3.0 - c)
    if not (np.isfinite(eps) and 0.0 <= eps < _EPS_UPPER):
        return None
    return np.array([eps, a / (1.0 + eps)])


def _stderr(J, x, upper):
    """Curvature standard errors; parameters on a bound or in a flat direction get inf."""
    at_bound = (x <= _BOUND_TOL) | (x >= upper - _BOUND_TOL)
    out = np.full(x.size, np.inf)
    free = ~at_bound
    if free.any():
        H = J[:, free].T @ J[:, free]
        if np.linalg.cond(H) < 1e14:
            out[free] = np.sqrt(np.clip(np.diag(np.linalg.inv(H)), 0.0, None))
    return out


def fit_detector_params(curve, mu_fixed, grid_points=GRID_POINTS):
    """Weighted least-squares fit of ``(epsilon, dark_mean)``.

    Parameters
    ----------
    curve : array_like, shape (n, 3)
        Rows of ``(k_mean, g2_k, stderr)``.
    mu_fixed : float
        Number of modes, held constant.
    grid_points : int
        Points per axis of the starting grid.

    Returns
    -------
    FitResult
        Parameter standard errors come from the inverse curvature
        ``(J^T J)^-1`` of the weighted residuals at the optimum.  A parameter
        pinned at a bound (typically ``dark_mean = 0``) is not identified to
        first order there and gets ``inf``; the other one is then the
        conditional error with the pinned value held fixed.
    """
    k, g2, err = _as_curve(curve)
    if not np.isfinite(mu_fixed) or mu_fixed < 1:
        raise ValidationError("mu_fixed", f"must be >= 1, got {mu_fixed!r}")
    mu = float(mu_fixed)

    eps_grid = np.concatenate(([0.0], np.geomspace(1e-4, EPSILON_MAX, grid_points - 1)))
    dark_hi = max(float(k.min()), 2e-6)
    dark_grid = np.concatenate(([0.0], np.geomspace(1e-6, dark_hi, grid_points - 1)))
    E, Dk = np.meshgrid(eps_grid, dark_grid, indexing="ij")
    model = g2_multimode_model(k[None, None, :], mu, E[..., None], Dk[..., None])
    chi2_grid = np.sum(((g2 - model) / err) ** 2, axis=-1)
    i, j = np.unravel_index(np.argmin(chi2_grid), chi2_grid.shape)
    x0 = np.array([eps_grid[i], dark_grid[j]])

    def resid(x):
        return (g2 - g2_multimode_model(k, mu, x[0], x[1])) / err

    # the grid cannot resolve the shallow eps/dark valley; the linear solve can
    lin = _linear_start(k, g2, err, mu)
    if lin is not None and np.sum(resid(lin) ** 2) < chi2_grid[i, j]:
        x0 = lin

    def jac(x):
        return -_jacobian(k, mu, x[0], x[1], err)

    sol = least_squares(
        resid, x0, jac=jac, bounds=([0.0, 0.0], [_EPS_UPPER, np.inf]),
        method="trf", x_scale="jac", xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=2000,
    )
    eps_hat, dark_hat = (float(v) for v in sol.x)
    stderr = _stderr(jac(sol.x), sol.x, np.array([_EPS_UPPER, np.inf]))
    raw = g2 - g2_multimode_model(k, mu, eps_hat, dark_hat)
    return FitResult(
        epsilon_hat=eps_hat,
        dark_hat=dark_hat,
        residual_rms=float(np.sqrt(np.mean(raw**2))),
        stderr_epsilon=float(stderr[0]),
        stderr_dark=float(stderr[1]),
        mu_fixed=mu,
        chi2=float(np.sum(sol.fun**2)),
        n_points=int(k.size),
        converged=bool(sol.status > 0),
    )
