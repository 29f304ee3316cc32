"""Command line interface: ``mumimo <subcommand> ...``.

Exit status is 0 on success, 1 on usage errors and 2 on runtime errors.
Negative list values need the ``=`` form, e.g. ``--snr-list-db=-10,0,10``.
"""
from __future__ import annotations

import argparse
import csv
import math
import sys
from typing import Optional, Sequence

from .asymptotics import (
    bdzf_asymptotic_rate,
    cmf_asymptotic_rate,
    czf_asymptotic_rate,
    czf_fullload_upper_bound,
    modified_cmf_rate,
    modified_czf_rate,
    optimal_czf_streams,
)
from .channel import generate_channels
from .errors import InvalidArguments, MumimoError
from .harness.montecarlo import (
    ExperimentSpec,
    RateReport,
    SimMode,
    cell_seed,
    parse_modes,
    run_monte_carlo,
    trial_rate,
)
from .harness.report import ASYMPTOTIC_COLUMNS, RATE_COLUMNS, emit_report, fmt_float, to_csv, to_json
from .oracle import DEFAULT_MAX_EVALS, brute_force_best
from .precoding import BdzfConfig
from .strategy import compute_mode_intervals


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _int_list(text: str) -> list[int]:
    """``"5,11,32"`` or an inclusive range ``"1:16"``."""
    try:
        out = []
        for part in text.split(","):
            part = part.strip()
            if ":" in part:
                a, b = part.split(":")
                out.extend(range(int(a), int(b) + 1))
            elif part:
                out.append(int(part))
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer list: {text!r}")
    if not out:
        raise argparse.ArgumentTypeError("empty list")
    return out


def _float_list(text: str) -> list[float]:
    try:
        out = [float(p) for p in text.split(",") if p.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number list: {text!r}")
    if not out:
        raise argparse.ArgumentTypeError("empty list")
    return out


def _modes(text: str):
    try:
        return parse_modes(text)
    except InvalidArguments as exc:
        raise argparse.ArgumentTypeError(str(exc))


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be positive: {value}")
    return value


def _add_output(p: argparse.ArgumentParser) -> None:
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--out", help="output path; stdout when omitted")
    p.add_argument("--workers", type=_positive_int, default=None,
                   help="worker threads (default: $MUMIMO_THREADS or 1)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="mumimo", description="MU-MIMO transmission mode selection toolkit")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("simulate", help="Monte Carlo ergodic sum rates")
    p.add_argument("--m", type=_positive_int, required=True)
    p.add_argument("--n", type=_positive_int, required=True)
    p.add_argument("--k-list", type=_int_list, required=True)
    p.add_argument("--snr-list-db", type=_float_list, required=True)
    p.add_argument("--modes", type=_modes, default=parse_modes("bdzf,czf,cmf"))
    p.add_argument("--trials", type=_positive_int, default=2000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--bdzf-t", type=_positive_int, default=None, help="override T_k for every BDZF user")
    p.add_argument("--max-evals", type=_positive_int, default=DEFAULT_MAX_EVALS)
    _add_output(p)

    p = sub.add_parser("intervals", help="K -> mode table of the selection rule")
    p.add_argument("--m", type=_positive_int, required=True)
    p.add_argument("--n", type=_positive_int, required=True)
    p.add_argument("--snr-db", type=float, required=True)

    p = sub.add_parser("asymptotic", help="deterministic sum-rate curves as CSV")
    p.add_argument("--m", type=_positive_int, required=True)
    p.add_argument("--n", type=_positive_int, required=True)
    p.add_argument("--k-list", type=_int_list, required=True)
    p.add_argument("--snr-list-db", type=_float_list, required=True)

    p = sub.add_parser("optimal-streams", help="optimal CZF stream count")
    p.add_argument("--m", type=_positive_int, required=True)
    p.add_argument("--snr-db", type=float, required=True)

    p = sub.add_parser("oracle", help="brute-force benchmark against the selection rule")
    p.add_argument("--m", type=_positive_int, required=True)
    p.add_argument("--n", type=_positive_int, required=True)
    p.add_argument("--k", type=_positive_int, required=True)
    p.add_argument("--snr-db", type=float, required=True)
    p.add_argument("--trials", type=_positive_int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-evals", type=_positive_int, default=DEFAULT_MAX_EVALS)

    p = sub.add_parser("snr-sweep", help="M=64, N=2, K in {5,11,32}: BDZF/CZF/CMF against SNR")
    p.add_argument("--trials", type=_positive_int, default=500)
    p.add_argument("--seed", type=int, default=0)
    _add_output(p)

    p = sub.add_parser("user-sweep", help="M=16, N=2, SNR 0 dB: all modes against K")
    p.add_argument("--trials", type=_positive_int, default=500)
    p.add_argument("--oracle-trials", type=int, default=20, help="0 disables the brute-force rows")
    p.add_argument("--seed", type=int, default=0)
    _add_output(p)
    return parser


def _spec(**kwargs) -> ExperimentSpec:
    try:
        return ExperimentSpec(**kwargs)
    except InvalidArguments as exc:
        raise UsageError(str(exc)) from exc


def _publish(report: RateReport, args, out) -> None:
    for cell in report.infeasible:
        print(f"infeasible: {cell.mode} K={cell.K} snr_db={cell.snr_db:g}: {cell.reason}", file=sys.stderr)
    if args.out:
        emit_report(report, args.format, args.out)
    elif args.format == "json":
        out.write(to_json(report))
    else:
        out.write(to_csv(report.rows, RATE_COLUMNS))
        out.write("\n")
        out.write(to_csv(report.asymptotic_rows, ASYMPTOTIC_COLUMNS))


def cmd_simulate(args, out) -> None:
    spec = _spec(M=args.m, N=args.n, k_values=args.k_list, snr_values_db=args.snr_list_db, modes=args.modes,
                 trials=args.trials, master_seed=args.seed, bdzf_t=args.bdzf_t, max_evals=args.max_evals)
    _publish(run_monte_carlo(spec, workers=args.workers), args, out)


def cmd_intervals(args, out) -> None:
    if args.m < 2:
        raise UsageError("--m must be at least 2")
    P = 10.0 ** (args.snr_db / 10.0)
    iv = compute_mode_intervals(args.m, args.n, P, 1.0)
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["K", "mode", "modified_czf_rate", "modified_cmf_rate"])
    for K in range(1, args.m + 1):
        mode = "CZF" if K in iv.czf_set else "CMF"
        w.writerow([K, mode, fmt_float(iv.czf_rates[K - 1]), fmt_float(iv.cmf_rates[K - 1])])


def cmd_asymptotic(args, out) -> None:
    M, N = args.m, args.n
    if M < 2 or any(not 1 <= k <= M for k in args.k_list):
        raise UsageError(f"every K must lie in 1..{M} and M must be at least 2")
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["K", "snr_db", "L", "bdzf", "czf", "cmf", "czf_fullload_bound",
                "L_star", "modified_czf", "modified_cmf", "proposed", "proposed_mode"])
    for snr_db in args.snr_list_db:
        P = 10.0 ** (snr_db / 10.0)
        opt = optimal_czf_streams(M, P, 1.0)
        iv = compute_mode_intervals(M, N, P, 1.0)
        bound = czf_fullload_upper_bound(M, P, 1.0).value
        for K in args.k_list:
            L = N * K
            if L <= M:
                T = BdzfConfig.default([N] * K, M).T
                common = [fmt_float(bdzf_asymptotic_rate([N] * K, T, P, 1.0).value),
                          fmt_float(czf_asymptotic_rate(M, L, P, 1.0).value),
                          fmt_float(cmf_asymptotic_rate(M, L, P, 1.0).value)]
            else:
                common = ["", "", ""]
            mczf = modified_czf_rate(M, N, K, P, 1.0).value
            mcmf = modified_cmf_rate(M, N, K, P, 1.0).value
            w.writerow([K, fmt_float(snr_db), L, *common, fmt_float(bound), opt.L_star,
                        fmt_float(mczf), fmt_float(mcmf), fmt_float(iv.predicted_rate(K)),
                        "CZF" if K in iv.czf_set else "CMF"])


def cmd_optimal_streams(args, out) -> None:
    if args.m < 2:
        raise UsageError("--m must be at least 2")
    P = 10.0 ** (args.snr_db / 10.0)
    opt = optimal_czf_streams(args.m, P, 1.0)
    out.write(f"L_real={fmt_float(opt.L_real)}\n")
    out.write(f"L_star={opt.L_star}\n")
    out.write(f"branch={opt.branch.value}\n")
    out.write(f"rate={fmt_float(opt.rate_at_optimum)}\n")


def cmd_oracle(args, out) -> None:
    if args.k > args.m:
        raise UsageError(f"--k {args.k} exceeds --m {args.m}")
    spec = _spec(M=args.m, N=args.n, k_values=[args.k], snr_values_db=[args.snr_db],
                 modes=[SimMode.PROPOSED, SimMode.ORACLE], trials=args.trials,
                 master_seed=args.seed, max_evals=args.max_evals)
    config = spec.config(args.k, args.snr_db)
    seed = cell_seed(args.seed, args.k, 0)
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["trial", "best_mode", "streams", "best_rate", "proposed_rate", "evaluated"])
    best_sum = proposed_sum = 0.0
    for t in range(args.trials):
        realization = generate_channels(config, seed, t)
        res = brute_force_best(realization, config.P, config.noise_power, args.max_evals)
        proposed = trial_rate(SimMode.PROPOSED, spec, config, realization, seed)
        best_sum += res.best_rate
        proposed_sum += proposed
        streams = "-".join(str(n) for n in res.best_allocation.per_user_streams)
        w.writerow([t, res.best_mode.value, streams, fmt_float(res.best_rate), fmt_float(proposed),
                    res.evaluated_count])
    ratio = proposed_sum / best_sum if best_sum > 0 else math.nan
    print(f"mean proposed / mean oracle = {ratio:.4f}", file=sys.stderr)


def cmd_snr_sweep(args, out) -> None:
    spec = _spec(M=64, N=2, k_values=[5, 11, 32], snr_values_db=[-10, -5, 0, 5, 10, 15, 20],
                 modes=[SimMode.BDZF, SimMode.CZF, SimMode.CMF], trials=args.trials, master_seed=args.seed)
    _publish(run_monte_carlo(spec, workers=args.workers), args, out)


def cmd_user_sweep(args, out) -> None:
    spec = _spec(M=16, N=2, k_values=range(1, 17), snr_values_db=[0.0],
                 modes=[SimMode.CZF, SimMode.CMF, SimMode.MODIFIED_CZF, SimMode.MODIFIED_CMF, SimMode.PROPOSED],
                 trials=args.trials, master_seed=args.seed)
    report = run_monte_carlo(spec, workers=args.workers)
    if args.oracle_trials > 0:
        oracle = _spec(M=16, N=2, k_values=range(1, 9), snr_values_db=[0.0], modes=[SimMode.ORACLE],
                       trials=args.oracle_trials, master_seed=args.seed)
        report.extend(run_monte_carlo(oracle, workers=args.workers))
    _publish(report, args, out)


COMMANDS = {
    "simulate": cmd_simulate,
    "intervals": cmd_intervals,
    "asymptotic": cmd_asymptotic,
    "optimal-streams": cmd_optimal_streams,
    "oracle": cmd_oracle,
    "snr-sweep": cmd_snr_sweep,
    "user-sweep": cmd_user_sweep,
}


def main(argv: Optional[Sequence[str]] = None, out=None) -> int:
    out = sys.stdout if out is None else out
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        COMMANDS[args.command](args, out)
    except UsageError as exc:
        print(f"mumimo {args.command}: error: {exc}", file=sys.stderr)
        return 1
    except (MumimoError, OSError) as exc:
        print(f"mumimo {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
