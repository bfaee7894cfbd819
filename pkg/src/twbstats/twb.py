"""Monte Carlo shot records for a multi-mode thermal twin beam.

Every shot carries the same photon number ``n`` into both arms (perfect
per-mode photon-number correlation).  Each arm then thins ``n`` binomially
with its efficiency, adds Poisson dark counts and applies cross-talk
``k = l + Binomial(l, epsilon)``.

Random numbers
--------------
Shots are generated in fixed blocks of :data:`BLOCK_SIZE`.  Block ``b`` draws
from ``numpy.random.Generator(PCG64(SeedSequence(seed, spawn_key=(b,))))``,
so the output depends only on ``(seed, params, n_shots)`` and not on how
many worker threads are used.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .detector import DetectorConfig
from .dist import from_counts
from .errors import AmbiguousBinError, ValidationError

BLOCK_SIZE = 1 << 14
GENERATOR = "PCG64"
# cap on per_mode temporaries (shots x modes)
_PER_MODE_CHUNK = 1 << 22


@dataclass(frozen=True)
class TwbParams:
    """Source and detector parameters of a twin-beam experiment."""

    modes: int
    mean_n: float
    det1: DetectorConfig = field(default_factory=DetectorConfig)
    det2: DetectorConfig = field(default_factory=DetectorConfig)

    def __post_init__(self):
        if int(self.modes) != self.modes or self.modes < 1:
            raise ValidationError("modes", f"must be an integer >= 1, got {self.modes!r}")
        if not np.isfinite(self.mean_n) or self.mean_n < 0:
            raise ValidationError("mean_n", f"must be finite and >= 0, got {self.mean_n!r}")
        object.__setattr__(self, "modes", int(self.modes))
        object.__setattr__(self, "mean_n", float(self.mean_n))

    def detector(self, arm):
        if arm not in (1, 2):
            raise ValidationError("arm", f"must be 1 or 2, got {arm!r}")
        return self.det1 if arm == 1 else self.det2

    def to_dict(self):
        return {
            "modes": self.modes,
            "mean_n": self.mean_n,
            "det1": self.det1.to_dict(),
            "det2": self.det2.to_dict(),
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            modes=d["modes"],
            mean_n=d["mean_n"],
            det1=DetectorConfig.from_dict(d["det1"]),
            det2=DetectorConfig.from_dict(d["det2"]),
        )


@dataclass(frozen=True, eq=False)
class ShotSeries:
    """Paired avalanche counts, one row per pulse."""

    k1: np.ndarray
    k2: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        k1 = np.array(self.k1, dtype=np.int64).ravel()
        k2 = np.array(self.k2, dtype=np.int64).ravel()
        if k1.shape != k2.shape:
            raise ValidationError("shots", "k1 and k2 must have the same length")
        if np.any(k1 < 0) or np.any(k2 < 0):
            raise ValidationError("shots", "counts must be non-negative")
        k1.setflags(write=False)
        k2.setflags(write=False)
        object.__setattr__(self, "k1", k1)
        object.__setattr__(self, "k2", k2)
        object.__setattr__(self, "meta", dict(self.meta))

    @classmethod
    def from_pairs(cls, pairs, meta=None):
        arr = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
        return cls(arr[:, 0], arr[:, 1], meta or {})

    @property
    def n_shots(self):
        return int(self.k1.size)

    def arm(self, arm):
        if arm not in (1, 2):
            raise ValidationError("arm", f"must be 1 or 2, got {arm!r}")
        return self.k1 if arm == 1 else self.k2

    def __len__(self):
        return self.n_shots

    def __eq__(self, other):
        if not isinstance(other, ShotSeries):
            return NotImplemented
        return (
            np.array_equal(self.k1, other.k1)
            and np.array_equal(self.k2, other.k2)
            and self.meta == other.meta
        )


def _block_rng(seed, block):
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(block,))))


def _detect(rng, n, cfg):
    m = rng.binomial(n, cfg.eta) if cfg.eta < 1.0 else n.copy()
    if cfg.dark_mean > 0.0:
        m += rng.poisson(cfg.dark_mean, size=n.size)
    if cfg.epsilon > 0.0:
        m += rng.binomial(m, cfg.epsilon)
    return m


def _photons(rng, params, size, method):
    x = params.mean_n / params.modes
    p = 1.0 / (1.0 + x)
    if method == "negative_binomial":
        # sum of `modes` iid geometric photon numbers, drawn in one step
        return rng.negative_binomial(params.modes, p, size=size)
    rows = max(1, _PER_MODE_CHUNK // params.modes)
    out = np.empty(size, dtype=np.int64)
    for start in range(0, size, rows):
        stop = min(size, start + rows)
        draws = rng.geometric(p, size=(stop - start, params.modes)) - 1
        out[start:stop] = draws.sum(axis=1)
    return out


def _simulate_block(params, seed, block, size, method):
    rng = _block_rng(seed, block)
    n = _photons(rng, params, size, method).astype(np.int64)
    return _detect(rng, n, params.det1), _detect(rng, n, params.det2)


def _normalize_seed(seed):
    if isinstance(seed, (int, np.integer)):
        seeds = [int(seed)]
    else:
        try:
            seeds = [int(s) for s in seed]
        except TypeError:
            raise ValidationError("seed", f"must be an int or a sequence of ints, got {seed!r}")
    if not seeds or any(s < 0 for s in seeds):
        raise ValidationError("seed", f"must be non-negative, got {seed!r}")
    return seeds[0] if len(seeds) == 1 else seeds


def sample_twb(params, n_shots, seed, workers=1, method="negative_binomial"):
    """Simulate ``n_shots`` pulses of a twin beam through two detectors.

    Parameters
    ----------
    params : TwbParams
    n_shots : int
        Number of pulses, >= 1.
    seed : int or sequence of int
        Root entropy; the output is a pure function of ``(seed, params, n_shots)``.
    workers : int
        Threads used to generate blocks. Does not affect the result.
    method : {"negative_binomial", "per_mode"}
        ``"per_mode"`` draws every mode's geometric photon number explicitly
        (cost grows with ``modes``); ``"negative_binomial"`` draws their sum
        directly. Both sample the same law but consume the stream differently.

    Returns
    -------
    ShotSeries
    """
    if not isinstance(params, TwbParams):
        raise ValidationError("params", "must be a TwbParams")
    if int(n_shots) != n_shots or n_shots < 1:
        raise ValidationError("n_shots", f"must be an integer >= 1, got {n_shots!r}")
    if method not in ("negative_binomial", "per_mode"):
        raise ValidationError("method", f"unknown sampling method {method!r}")
    seed = _normalize_seed(seed)
    n_shots = int(n_shots)
    blocks = [(b, min(BLOCK_SIZE, n_shots - b * BLOCK_SIZE)) for b in range(-(-n_shots // BLOCK_SIZE))]

    def run(job):
        return _simulate_block(params, seed, job[0], job[1], method)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run, blocks))
    else:
        parts = [run(job) for job in blocks]
    k1 = np.concatenate([p[0] for p in parts])
    k2 = np.concatenate([p[1] for p in parts])
    meta = {
        "seed": seed,
        "n_shots": n_shots,
        "params": params.to_dict(),
        "method": method,
        "generator": GENERATOR,
        "block_size": BLOCK_SIZE,
    }
    return ShotSeries(k1, k2, meta)


def marginal_distribution(series, arm):
    """Empirical count distribution of one arm."""
    if series.n_shots < 1:
        raise ValidationError("series", "is empty")
    return from_counts(np.bincount(series.arm(arm)))


def scale_x_out(series, gamma):
    """Analog outputs ``x = gamma * k`` for both arms."""
    if not gamma > 0:
        raise ValidationError("gamma", f"must be > 0, got {gamma!r}")
    return gamma * series.k1.astype(np.float64), gamma * series.k2.astype(np.float64)


def bin_k(x, gamma):
    """Recover avalanche counts from analog outputs.

    Values further than 0.25 gain units from the nearest non-negative
    multiple of ``gamma`` are rejected.
    """
    if not gamma > 0:
        raise ValidationError("gamma", f"must be > 0, got {gamma!r}")
    ratio = np.asarray(x, dtype=np.float64) / gamma
    k = np.rint(ratio)
    bad = ~np.isfinite(ratio) | (np.abs(ratio - k) > 0.25) | (k < 0)
    if np.any(bad):
        first = np.asarray(x).ravel()[np.flatnonzero(bad.ravel())[0]]
        raise AmbiguousBinError(f"x={first!r} is not within 0.25 of a multiple of gamma={gamma!r}")
    k = k.astype(np.int64)
    return int(k) if k.ndim == 0 else k


def series_from_analog(x1, x2, gamma, meta=None):
    return ShotSeries(bin_k(x1, gamma), bin_k(x2, gamma), meta or {})
