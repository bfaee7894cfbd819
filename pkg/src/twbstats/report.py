"""Analysis report assembled from a shot series (JSON schema version 1).

Layout::

    {
      "schema_version": 1,
      "arms": [{"arm", "k_mean", "k_mean_stderr", "g2_k", "g2_k_stderr",
                "status", "g2_k_model"}, ...],
      "joint": {CorrelationStats fields, "stderr": {...}, "status"},
      "classical_boundary": {"R": 1.0, "g2_diff_n_minus_1": 0.0, "g2n_minus_1": 0.0},
      "model": {"R": ..., "g2_diff_m": ..., "g2_diff_n_minus_1": ...} or null,
      "conditional": [{"m_cond", "conditioning_arm", "n_selected", "mean",
                       "fano", "g2n_minus_1", "*_stderr", "status",
                       "g2n_minus_1_model"}, ...],
      "fit": {FitResult fields} or null,
      "meta": {"seed", "n_shots", "n_resamples", "params", "tool_version"}
    }

Statistics that cannot be evaluated are ``null`` with a ``status`` string
(``"divergent"``, ``"degenerate"``, ``"insufficient"``) instead of aborting
the report.
"""

from dataclasses import asdict, dataclass, field
import json
import math

import numpy as np

from . import __version__
from .bootstrap import DEFAULT_RESAMPLES
from .correlation import (
    arm_stats,
    conditional_stats,
    correlation_stats,
    fano_conditional_model,
    g2_diff_model,
    g2_diff_n_model,
    nrf_model,
)
from .detector import g2_multimode_model
from .errors import DegenerateInputError, InsufficientStatisticsError, ValidationError
from .io import SCHEMA_VERSION
from .twb import TwbParams

CLASSICAL_BOUNDARY = {"R": 1.0, "g2_diff_n_minus_1": 0.0, "g2n_minus_1": 0.0}


@dataclass
class AnalysisReport:
    arms: list
    joint: dict
    conditional: list = field(default_factory=list)
    fit: dict = None
    model: dict = None
    meta: dict = field(default_factory=dict)
    classical_boundary: dict = field(default_factory=lambda: dict(CLASSICAL_BOUNDARY))
    schema_version: int = SCHEMA_VERSION

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, d):
        if d.get("schema_version") != SCHEMA_VERSION:
            raise ValidationError("schema_version", f"unsupported report schema {d.get('schema_version')!r}")
        return cls(**{k: d[k] for k in cls.__dataclass_fields__ if k in d})

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True, allow_nan=False)

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


def _clean(obj):
    """Plain JSON types; non-finite floats become None."""
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, bool) or obj is None or isinstance(obj, str):
        return obj
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    v = float(obj)
    return v if math.isfinite(v) else None


def _params_from_meta(meta):
    try:
        return TwbParams.from_dict(meta["params"])
    except (KeyError, TypeError, ValueError):
        return None


def build_report(
    series,
    seed,
    n_resamples=DEFAULT_RESAMPLES,
    condition_arm=None,
    m_cond_values=(),
    fit=None,
    params=None,
    workers=1,
):
    """Run every estimator on ``series``.

    ``params`` (or the series' own metadata) supplies the closed-form model
    values shown next to the estimates; it never changes the estimates.
    """
    if series.n_shots < 2:
        raise ValidationError("series", f"need at least 2 shots, got {series.n_shots}")
    if int(series.k1.sum()) + int(series.k2.sum()) == 0:
        raise DegenerateInputError("zero total mean <m1 + m2>")
    params = params or _params_from_meta(series.meta)

    arms = []
    for arm in (1, 2):
        try:
            a = asdict(arm_stats(series, arm, n_resamples=n_resamples, seed=seed, workers=workers))
            a["status"] = "ok"
            if params is not None:
                cfg = params.detector(arm)
                a["g2_k_model"] = g2_multimode_model(a["k_mean"], params.modes, cfg.epsilon, cfg.dark_mean)
        except DegenerateInputError:
            a = {"arm": arm, "k_mean": 0.0, "k_mean_stderr": None, "g2_k": None, "g2_k_stderr": None,
                 "status": "degenerate"}
        arms.append(a)

    joint = correlation_stats(series, n_resamples=n_resamples, seed=seed, workers=workers).to_dict()

    model = None
    if params is not None:
        R = nrf_model(joint["mean1"], joint["mean2"], params.det1.eta, params.det2.eta, params.modes)
        model = {"R": R, "g2_diff_m": None, "g2_diff_n_minus_1": None}
        if joint["g2_diff_status"] == "ok":
            model["g2_diff_m"] = g2_diff_model(R, joint["sum_mean"], joint["diff_mean"])
            model["g2_diff_n_minus_1"] = g2_diff_n_model(R, joint["sum_mean"], joint["diff_mean"])

    conditional = []
    if condition_arm is not None:
        other = 3 - condition_arm
        uncond_mean = float(series.arm(other).mean())
        for m_cond in m_cond_values:
            try:
                row = conditional_stats(series, condition_arm, m_cond, n_resamples=n_resamples, seed=seed,
                                        workers=workers).to_dict()
                row["status"] = "ok"
                if params is not None and params.det1.eta == params.det2.eta:
                    F = fano_conditional_model(params.det1.eta, params.modes, uncond_mean, m_cond)
                    row["g2n_minus_1_model"] = (F - 1.0) / row["mean"]
            except InsufficientStatisticsError as exc:
                row = {"m_cond": int(m_cond), "conditioning_arm": condition_arm, "n_selected": exc.n_selected,
                       "status": "insufficient"}
            except DegenerateInputError:
                n_sel = int((series.arm(condition_arm) == m_cond).sum())
                row = {"m_cond": int(m_cond), "conditioning_arm": condition_arm, "n_selected": n_sel,
                       "status": "degenerate"}
            conditional.append(row)

    meta = {
        "seed": seed,
        "n_shots": series.n_shots,
        "n_resamples": n_resamples,
        "params": params.to_dict() if params is not None else None,
        "tool_version": __version__,
    }
    if "seed" in series.meta:
        meta["simulation_seed"] = series.meta["seed"]
    return AnalysisReport(
        arms=_clean(arms),
        joint=_clean(joint),
        conditional=_clean(conditional),
        fit=_clean(fit.to_dict()) if fit is not None else None,
        model=_clean(model),
        meta=_clean(meta),
    )
