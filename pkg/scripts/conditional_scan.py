"""Conditional Fano factor and g2(n) - 1 of one arm versus the count in the other.

Compares Monte Carlo conditioning on a lossless chain with the analytic
conditional Fano factor; prints a TSV table on stdout.

    python3 scripts/conditional_scan.py --shots 10000000
"""

import argparse
import sys

from twbstats.correlation import conditional_stats, fano_conditional_model, g2_conditional_model
from twbstats.detector import DetectorConfig
from twbstats.errors import DegenerateInputError, InsufficientStatisticsError
from twbstats.twb import TwbParams, sample_twb

COLUMNS = ["m_cond", "n_selected", "mean", "fano", "fano_stderr", "fano_model", "g2n_minus_1",
           "g2n_minus_1_stderr", "g2n_minus_1_model", "z"]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--shots", type=int, default=2_000_000)
    ap.add_argument("--modes", type=int, default=1000)
    ap.add_argument("--eta", type=float, default=0.12)
    ap.add_argument("--detected-mean", type=float, default=2.64)
    ap.add_argument("--epsilon", type=float, default=0.0)
    ap.add_argument("--dark", type=float, default=0.0)
    ap.add_argument("--m-max", type=int, default=8)
    ap.add_argument("--resamples", type=int, default=1000)
    ap.add_argument("--seed", type=int, default=606)
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()

    det = DetectorConfig(eta=args.eta, epsilon=args.epsilon, dark_mean=args.dark)
    params = TwbParams(args.modes, args.detected_mean / args.eta, det, det)
    series = sample_twb(params, args.shots, args.seed, workers=args.workers)
    M = float(series.k1.mean())
    out = sys.stdout
    out.write(f"# detected mean arm 1: {M:.6f}\n")
    out.write("\t".join(COLUMNS) + "\n")
    for m in range(args.m_max + 1):
        try:
            r = conditional_stats(series, 1, m, n_resamples=args.resamples, seed=m, workers=args.workers)
        except (InsufficientStatisticsError, DegenerateInputError) as exc:
            out.write(f"{m}\t# {exc}\n")
            continue
        F = fano_conditional_model(args.eta, args.modes, M, m)
        g = g2_conditional_model(args.eta, args.modes, M, m, r.mean)
        z = (r.g2n_minus_1 - g) / r.g2n_minus_1_stderr
        row = [m, r.n_selected, r.mean, r.fano, r.fano_stderr, F, r.g2n_minus_1, r.g2n_minus_1_stderr, g, z]
        out.write("\t".join(f"{v:.6g}" for v in row) + "\n")


if __name__ == "__main__":
    main()
