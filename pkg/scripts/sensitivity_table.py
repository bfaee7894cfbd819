"""Relative sensitivity of count g2 to cross-talk and dark counts.

Tabulates beta for both parameters over a grid of means and mode numbers,
once holding the avalanche mean fixed and once holding the detected-photon
mean fixed, and reports where |beta| >= 1.

    python3 scripts/sensitivity_table.py
"""

import itertools

from twbstats.detector import sensitivity_beta

K_VALUES = [0.1, 0.2, 0.5, 1.0, 2.0, 5.0, 10.0]
MODES = [1, 2, 5, 10, 100, 1000]


def main():
    print("hold\tmodes\tmean\tbeta_epsilon\tbeta_dark")
    over = []
    for hold in ("counts", "detected"):
        for mu, k in itertools.product(MODES, K_VALUES):
            be = sensitivity_beta("epsilon", mu, k, hold=hold)
            bd = sensitivity_beta("dark", mu, k, hold=hold)
            print(f"{hold}\t{mu}\t{k}\t{be:.6f}\t{bd:.6f}")
            if abs(be) >= 1 or abs(bd) >= 1:
                over.append((hold, mu, k, be, bd))
    print(f"# {len(over)} grid points with |beta| >= 1")
    for row in over:
        print("# " + "\t".join(str(v) if not isinstance(v, float) else f"{v:.4f}" for v in row))


if __name__ == "__main__":
    main()
