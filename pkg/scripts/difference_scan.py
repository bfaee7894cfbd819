"""Noise reduction factor and difference-g2 statistics against the detected mean.

For each mean photon number the script simulates a twin beam, estimates R,
g2_diff(m) and g2_diff(n) - 1 with bootstrap errors and prints them next to
the closed-form values as TSV on stdout.

    python3 scripts/difference_scan.py > runs/difference.tsv
"""

import argparse
import sys

import numpy as np

from twbstats.correlation import correlation_stats, g2_diff_model, g2_diff_n_model, nrf_model
from twbstats.detector import DetectorConfig
from twbstats.twb import TwbParams, sample_twb

COLUMNS = ["mean_n", "sum_mean", "diff_mean", "R", "R_stderr", "R_model", "g2_diff_m", "g2_diff_m_stderr",
           "g2_diff_m_model", "g2_diff_n_minus_1", "g2_diff_n_minus_1_stderr", "g2_diff_n_minus_1_model"]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--shots", type=int, default=100_000)
    ap.add_argument("--modes", type=int, default=1000)
    ap.add_argument("--eta1", type=float, default=0.125)
    ap.add_argument("--eta2", type=float, default=0.12)
    ap.add_argument("--epsilon", type=float, default=0.0)
    ap.add_argument("--dark", type=float, default=0.0)
    ap.add_argument("--points", type=int, default=10)
    ap.add_argument("--resamples", type=int, default=300)
    ap.add_argument("--seed", type=int, default=7)
    args = ap.parse_args()

    det1 = DetectorConfig(eta=args.eta1, epsilon=args.epsilon, dark_mean=args.dark)
    det2 = DetectorConfig(eta=args.eta2, epsilon=args.epsilon, dark_mean=args.dark)
    out = sys.stdout
    out.write("\t".join(COLUMNS) + "\n")
    for i, mean_n in enumerate(np.geomspace(5.0, 80.0, args.points)):
        series = sample_twb(TwbParams(args.modes, float(mean_n), det1, det2), args.shots, [args.seed, i])
        cs = correlation_stats(series, n_resamples=args.resamples, seed=args.seed)
        R_model = nrf_model(cs.mean1, cs.mean2, args.eta1, args.eta2, args.modes)
        row = [mean_n, cs.sum_mean, cs.diff_mean, cs.R, cs.stderr["R"], R_model]
        if cs.g2_diff_status == "ok":
            row += [cs.g2_diff_m, cs.stderr["g2_diff_m"], g2_diff_model(R_model, cs.sum_mean, cs.diff_mean),
                    cs.g2_diff_n_minus_1, cs.stderr["g2_diff_n_minus_1"],
                    g2_diff_n_model(R_model, cs.sum_mean, cs.diff_mean)]
        else:
            row += [float("nan")] * 6
        out.write("\t".join(f"{v:.6g}" for v in row) + "\n")


if __name__ == "__main__":
    main()
