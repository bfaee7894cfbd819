"""Command-line front end.

Exit codes: 0 success, 2 usage or validation error, 3 runtime or data error.
"""

import argparse
import sys

from . import __version__
from .bootstrap import DEFAULT_RESAMPLES
from .detector import DetectorConfig, g2_multimode_model
from .errors import TwbStatsError, ValidationError
from .fit import fit_detector_params
from .io import (
    read_curve_csv,
    read_series,
    write_analog_csv,
    write_json,
    write_shots_csv,
    write_tsv,
)
from .report import build_report
from .twb import TwbParams, sample_twb

EXIT_OK, EXIT_USAGE, EXIT_RUNTIME = 0, 2, 3

_CFG_FLAGS = {"eta": "--eta{arm}", "epsilon": "--epsilon{arm}", "dark_mean": "--dark{arm}", "gamma": "--gamma"}

SWEEP_COLUMNS = [
    "mean_n", "arm", "k_mean", "k_mean_stderr", "g2", "stderr", "g2_model",
    "R", "R_stderr", "R_model", "g2_diff_m", "g2_diff_m_stderr",
    "g2_diff_n_minus_1", "g2_diff_n_minus_1_stderr",
]


def _m_cond_range(text):
    try:
        lo, hi = (int(v) for v in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected LO:HI, got {text!r}") from None
    if lo < 0 or hi < lo:
        raise argparse.ArgumentTypeError(f"need 0 <= LO <= HI, got {text!r}")
    return list(range(lo, hi + 1))


def _float_list(text):
    try:
        values = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None
    if not values:
        raise argparse.ArgumentTypeError("empty list")
    return values


def _add_source_args(p, sweep=False):
    p.add_argument("--shots", type=int, required=True)
    p.add_argument("--modes", type=int, required=True)
    if sweep:
        p.add_argument("--mean-n", type=_float_list, required=True, help="comma-separated list")
    else:
        p.add_argument("--mean-n", type=float, required=True)
    for arm in (1, 2):
        p.add_argument(f"--eta{arm}", type=float, required=True)
        p.add_argument(f"--epsilon{arm}", type=float, default=0.0)
        p.add_argument(f"--dark{arm}", type=float, default=0.0)
    p.add_argument("--gamma", type=float, default=1.0, help="gain, output units per avalanche")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--method", choices=["negative_binomial", "per_mode"], default="negative_binomial")
    p.add_argument("--workers", type=int, default=1)


def _params(args, mean_n):
    dets = []
    for arm in (1, 2):
        try:
            dets.append(DetectorConfig(
                eta=getattr(args, f"eta{arm}"),
                epsilon=getattr(args, f"epsilon{arm}"),
                dark_mean=getattr(args, f"dark{arm}"),
                gamma=args.gamma,
            ))
        except ValidationError as exc:
            flag = _CFG_FLAGS.get(exc.field, exc.field).format(arm=arm)
            raise ValidationError(flag, str(exc).split(": ", 1)[-1]) from None
    try:
        return TwbParams(modes=args.modes, mean_n=mean_n, det1=dets[0], det2=dets[1])
    except ValidationError as exc:
        raise ValidationError("--" + exc.field.replace("_", "-"), str(exc).split(": ", 1)[-1]) from None


def _check_shots(n):
    if n < 1:
        raise ValidationError("--shots", f"must be >= 1, got {n}")


def cmd_simulate(args):
    _check_shots(args.shots)
    params = _params(args, args.mean_n)
    series = sample_twb(params, args.shots, args.seed, workers=args.workers, method=args.method)
    write_shots_csv(series, args.out)
    if args.analog_out:
        write_analog_csv(series, args.analog_out, args.gamma)
    return EXIT_OK


def cmd_analyze(args):
    series = read_series(args.input, gamma=args.gamma)
    fit = None
    if args.fit_curve:
        fit = fit_detector_params(read_curve_csv(args.fit_curve), args.mu)
    condition_arm = args.condition_arm
    m_values = args.m_cond_range or []
    if m_values and condition_arm is None:
        condition_arm = 1
    report = build_report(
        series, seed=args.seed, n_resamples=args.resamples, condition_arm=condition_arm,
        m_cond_values=m_values, fit=fit, workers=args.workers,
    )
    text = report.to_json() + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if args.arms_tsv:
        write_tsv(args.arms_tsv, ["arm", "k_mean", "k_mean_stderr", "g2_k", "g2_k_stderr", "g2_k_model"], report.arms)
    if args.conditional_tsv:
        write_tsv(
            args.conditional_tsv,
            ["m_cond", "n_selected", "mean", "fano", "fano_stderr", "g2n_minus_1", "g2n_minus_1_stderr",
             "g2n_minus_1_model", "status"],
            report.conditional,
        )
    return EXIT_OK


def cmd_fit(args):
    curve = read_curve_csv(args.input)
    result = fit_detector_params(curve, args.mu)
    out = {
        "schema_version": 1,
        "fit": result.to_dict(),
        "inputs": {"curve": curve.tolist(), "mu": args.mu, "source": args.input},
        "tool_version": __version__,
    }
    if args.out:
        write_json(args.out, out)
    else:
        import json

        sys.stdout.write(json.dumps(out, indent=2, sort_keys=True) + "\n")
    return EXIT_OK


def sweep_rows(args):
    rows = []
    for mean_n in args.mean_n:
        params = _params(args, mean_n)
        # common random numbers: every point reuses the root seed
        series = sample_twb(params, args.shots, args.seed, workers=args.workers, method=args.method)
        report = build_report(series, seed=args.seed, n_resamples=args.resamples, params=params,
                              workers=args.workers)
        j = report.joint
        for a in report.arms:
            cfg = params.detector(a["arm"])
            g2_model = None
            if a["status"] == "ok":
                g2_model = g2_multimode_model(a["k_mean"], params.modes, cfg.epsilon, cfg.dark_mean)
            rows.append({
                "mean_n": mean_n, "arm": a["arm"], "k_mean": a["k_mean"], "k_mean_stderr": a["k_mean_stderr"],
                "g2": a["g2_k"], "stderr": a["g2_k_stderr"], "g2_model": g2_model,
                "R": j["R"], "R_stderr": j["stderr"]["R"], "R_model": report.model["R"],
                "g2_diff_m": j["g2_diff_m"], "g2_diff_m_stderr": j["stderr"]["g2_diff_m"],
                "g2_diff_n_minus_1": j["g2_diff_n_minus_1"],
                "g2_diff_n_minus_1_stderr": j["stderr"]["g2_diff_n_minus_1"],
            })
    return rows


def cmd_sweep(args):
    _check_shots(args.shots)
    rows = sweep_rows(args)
    write_tsv(args.out, SWEEP_COLUMNS, rows)
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog="twbstats", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="simulate a twin-beam shot series")
    _add_source_args(p)
    p.add_argument("--out", required=True)
    p.add_argument("--analog-out", help="also write gamma-scaled outputs (shot,x1,x2)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("analyze", help="analyze a shot CSV into a JSON report")
    p.add_argument("input")
    p.add_argument("--seed", type=int, required=True, help="bootstrap seed")
    p.add_argument("--resamples", type=int, default=DEFAULT_RESAMPLES)
    p.add_argument("--condition-arm", type=int, choices=[1, 2])
    p.add_argument("--m-cond-range", type=_m_cond_range, help="LO:HI, inclusive")
    p.add_argument("--gamma", type=float, help="gain for analog (shot,x1,x2) input")
    p.add_argument("--fit-curve", help="curve CSV to fit and embed in the report")
    p.add_argument("--mu", type=float, default=1000.0)
    p.add_argument("--out")
    p.add_argument("--arms-tsv")
    p.add_argument("--conditional-tsv")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("fit", help="fit epsilon and dark mean to a g2(k) curve")
    p.add_argument("input")
    p.add_argument("--mu", type=float, default=1000.0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("sweep", help="simulate and analyze a list of mean photon numbers")
    _add_source_args(p, sweep=True)
    p.add_argument("--resamples", type=int, default=DEFAULT_RESAMPLES)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"twbstats {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (TwbStatsError, OSError) as exc:
        print(f"twbstats {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    raise SystemExit(main())
