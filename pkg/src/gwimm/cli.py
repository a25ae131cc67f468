"""Command line interface: simulate trajectories, estimate from files, and
reproduce the packaged sampling studies as CSV."""
from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import montecarlo
from .errors import EstimationError, TooManyFailuresError
from .logdecay import RegularizerConfig, config_for_model, estimate_log_decay, log_window, sqrt_window
from .models import (
    BernoulliReproduction,
    BranchingModel,
    IidPoissonImmigration,
    PoissonReproduction,
    ProductPoissonImmigration,
    TwoStateMarkovImmigration,
)
from .ratio_estimator import estimate_by_moments
from .simulate import simulate
from .spectral import analyze

# the packaged studies: immigration following a two-state Markov chain, with
# the lag-rate constant paired to the offspring mean it was tuned for
_MARKOV_P = ((0.5, 0.5), (1.0, 0.0))
_LOGDECAY_CELLS = ((4.7, 0.9), (1.4, 0.7), (0.7, 0.5), (0.3, 0.2))
_RATIO_LAMBDAS = (0.2, 0.5, 0.7, 0.9)


def _out_stream(path):
    if path in (None, "-"):
        return sys.stdout, False
    return open(path, "w"), True


def _workers(args) -> int | None:
    env = os.environ.get("GW_ESTIM_THREADS")
    if env:
        return max(1, int(env))
    return args.threads


def _build_model(args, parser) -> tuple[BranchingModel, int]:
    try:
        if args.repro == "poisson":
            repro = PoissonReproduction(getattr(args, "lam"))
        else:
            repro = BernoulliReproduction(getattr(args, "lam"))
        if args.immigration == "iid-poisson":
            if args.markov_P is not None:
                parser.error("--markov-P only applies to markov immigration")
            imm = IidPoissonImmigration(1.0)
            extra = args.k0 or 0
        elif args.immigration == "product":
            if args.k0 is None:
                parser.error("product immigration requires --k0 (the factor window)")
            if args.markov_P is not None:
                parser.error("--markov-P only applies to markov immigration")
            imm = ProductPoissonImmigration(args.k0)
            extra = args.k0
        else:
            if args.markov_P is None:
                parser.error("markov immigration requires --markov-P p00,p01,p10,p11")
            if args.k0 is not None:
                parser.error("--k0 only applies to product immigration")
            vals = [float(v) for v in args.markov_P.split(",")]
            if len(vals) != 4:
                parser.error("--markov-P needs exactly four comma-separated probabilities")
            imm = TwoStateMarkovImmigration(((vals[0], vals[1]), (vals[2], vals[3])))
            extra = 0
    except ValueError as exc:
        parser.error(str(exc))
    return BranchingModel(repro, imm), extra


def _cmd_simulate(args, parser) -> int:
    model, extra = _build_model(args, parser)
    if args.n < 1:
        parser.error("--n must be >= 1")
    length = args.n + extra
    traj = simulate(model, length, args.seed)
    stream, close = _out_stream(args.out)
    try:
        header = (
            f"# gwimm simulate lambda={getattr(args, 'lam')} repro={args.repro} "
            f"immigration={args.immigration}"
        )
        if args.k0 is not None:
            header += f" k0={args.k0}"
        if args.markov_P is not None:
            header += f" markov_P={args.markov_P}"
        header += f" n={args.n} seed={args.seed} length={length}"
        print(header, file=stream)
        np.savetxt(stream, traj.values, fmt="%d")
    finally:
        if close:
            stream.close()
    return 0


def _load_trajectory(path, parser) -> np.ndarray:
    try:
        values = np.loadtxt(path, comments="#", dtype=float)
    except OSError as exc:
        parser.error(str(exc))
    values = np.atleast_1d(values)
    if values.ndim != 1 or values.size < 2:
        parser.error("trajectory file must hold a single column of at least two values")
    return values


def _general_config(args, parser) -> RegularizerConfig:
    if args.km is None or args.cy is None:
        parser.error("--method general requires --km and --cy")
    try:
        return RegularizerConfig(
            amplitude_floor=args.km,
            moment_bound=args.cy,
            lam_lo=args.lminus,
            lam_hi=args.lplus,
            log_rate=args.c,
        )
    except ValueError as exc:
        parser.error(str(exc))


def _general_sample_size(total: int, config: RegularizerConfig, rule: str) -> int:
    # largest n with n + window(n) + 1 <= total
    n = total
    for _ in range(64):
        window = sqrt_window(n) if rule == "sqrt" else log_window(n, config.log_rate)
        fit = total - window - 1
        if fit >= n:
            break
        n = fit
    return n


def _cmd_estimate(args, parser) -> int:
    values = _load_trajectory(args.infile, parser)
    out: dict = {"method": args.method, "input": args.infile}
    if args.method in ("moment", "lrv"):
        if args.k0 is None:
            parser.error(f"--method {args.method} requires --k0")
        n = args.n if args.n is not None else values.size - args.k0
        if n < 1:
            parser.error("not enough values for the requested lag")
        if args.method == "moment":
            est = estimate_by_moments(values, args.k0, n)
            out.update(
                offspring_mean=est.offspring_mean,
                immigration_mean=est.immigration_mean,
                lag=est.lag,
                n=est.n,
                sample_mean=est.sample_mean,
                pair_low=est.pair_low,
                pair_high=est.pair_high,
            )
        else:
            report = analyze(values, args.k0, n, args.order)
            est = estimate_by_moments(values, args.k0, n)
            out.update(
                offspring_mean=est.offspring_mean,
                immigration_mean=est.immigration_mean,
                lag=args.k0,
                n=n,
                order=report.order,
                param_cov_spectral=report.param_cov_spectral.tolist(),
                param_cov_cls=report.param_cov_cls.tolist(),
                orthogonality=report.orthogonality,
                ridge_used=report.ridge_used,
            )
    else:
        config = _general_config(args, parser)
        rule = "sqrt" if args.kn_override == "sqrt" else "log"
        n = args.n if args.n is not None else _general_sample_size(values.size, config, rule)
        if n < 2:
            parser.error("not enough values for the log-decay estimator")
        est = estimate_log_decay(values, n, config, rule)
        out.update(
            log_decay=est.log_decay,
            decay_factor=est.decay_factor,
            immigration_mean=est.immigration_mean,
            window=est.window,
            n=est.n,
            raw_log=est.raw_log,
            sample_mean=est.sample_mean,
            pair_avg=est.pair_avg,
            gates=est.gates,
        )
    json.dump(out, sys.stdout, indent=2, default=float)
    print()
    return 0


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        return f"{value:.10g}"
    return str(value)


def _emit_csv(stream, comments, header, rows):
    for line in comments:
        print(f"# {line}", file=stream)
    print(",".join(header), file=stream)
    for row in rows:
        print(",".join(_fmt(v) for v in row), file=stream)


def _ratio_table_rows(reps, seed, workers):
    header = [
        "lambda", "k0", "n", "parameter", "reps", "failures",
        "mean", "bias", "rmse", "min", "q1", "median", "q3", "max",
        "median_spectral_var", "median_cls_var",
    ]
    rows = []
    cell = 0
    for lam in _RATIO_LAMBDAS:
        for k0 in (2, 3):
            for n in (300, 2000):
                model = BranchingModel(PoissonReproduction(lam), ProductPoissonImmigration(k0))
                result = montecarlo.run_variance_study(
                    model, k0, n, reps, seed + cell, workers
                )
                cell += 1
                for name in ("offspring_mean", "immigration_mean"):
                    s = result.stats[name]
                    rows.append([
                        lam, k0, n, name, result.replications, result.failures,
                        s.mean, s.bias, s.rmse, s.minimum, s.q1, s.median, s.q3, s.maximum,
                        result.tracking["median_spectral_var"] if name == "offspring_mean" else None,
                        result.tracking["median_cls_var"] if name == "offspring_mean" else None,
                    ])
    return header, rows


def _logdecay_table_rows(reps, seed, workers, window_rule, n):
    header = [
        "lambda", "log_rate", "window_rule", "window", "n", "reps", "failures",
        "mean_log_decay", "var_log_decay", "rms_error_log_decay", "mean_decay_factor",
    ]
    rows = []
    for cell, (rate, lam) in enumerate(_LOGDECAY_CELLS):
        model = BranchingModel(PoissonReproduction(lam), TwoStateMarkovImmigration(_MARKOV_P))
        config = config_for_model(model, log_rate=rate)
        result = montecarlo.run_logdecay_study(
            model, config, n, reps, seed + cell, workers, window=window_rule
        )
        s = result.stats["log_decay"]
        f = result.stats["decay_factor"]
        rows.append([
            lam, rate, window_rule, int(result.tracking["window"]), n,
            result.replications, result.failures,
            s.mean, s.variance, s.rmse, f.mean,
        ])
    return header, rows


def _variance_figure_rows(reps, seed, workers):
    header = [
        "immigration", "lambda", "k0", "n", "reps", "failures",
        "scaled_mse_offspring", "median_spectral_var", "median_cls_var",
    ]
    n = 2000
    rows = []
    cells = [
        ("iid-poisson", IidPoissonImmigration(1.0), 1),
        ("product", ProductPoissonImmigration(2), 2),
    ]
    for cell, (label, imm, k0) in enumerate(cells):
        model = BranchingModel(BernoulliReproduction(0.5), imm)
        result = montecarlo.run_variance_study(model, k0, n, reps, seed + cell, workers)
        rows.append([
            label, 0.5, k0, n, result.replications, result.failures,
            result.tracking["scaled_mse_offspring"],
            result.tracking["median_spectral_var"],
            result.tracking["median_cls_var"],
        ])
    return header, rows


def _cmd_reproduce(args, parser) -> int:
    workers = _workers(args)
    desk = args.scale == "desk"
    if args.table == "1":
        reps = args.reps or (200 if desk else 1000)
        header, rows = _ratio_table_rows(reps, args.seed, workers)
    elif args.table in ("2", "3"):
        reps = args.reps or 20
        rule = "log" if args.table == "2" else "sqrt"
        n = 5_000_000
        header, rows = _logdecay_table_rows(reps, args.seed, workers, rule, n)
    else:
        reps = args.reps or (200 if desk else 1000)
        header, rows = _variance_figure_rows(reps, args.seed, workers)
    stream, close = _out_stream(args.out)
    try:
        comments = [
            f"gwimm reproduce table={args.table} scale={args.scale} reps={reps} seed={args.seed}",
        ]
        _emit_csv(stream, comments, header, rows)
    finally:
        if close:
            stream.close()
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gwimm",
        description="Simulation and inference for subcritical branching processes "
        "with immigration that may be serially dependent.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="write a simulated trajectory")
    sim.add_argument("--lambda", dest="lam", type=float, required=True,
                     help="offspring mean, in (0, 1)")
    sim.add_argument("--repro", choices=("poisson", "bernoulli"), required=True)
    sim.add_argument("--immigration", choices=("iid-poisson", "product", "markov"),
                     required=True)
    sim.add_argument("--n", type=int, required=True, help="usable sample size")
    sim.add_argument("--seed", type=int, required=True)
    sim.add_argument("--k0", type=int, default=None,
                     help="factor window of the product immigration")
    sim.add_argument("--markov-P", dest="markov_P", default=None,
                     help="transition matrix p00,p01,p10,p11 of the markov immigration")
    sim.add_argument("--out", default="-", help="output file (default stdout)")
    sim.set_defaults(func=_cmd_simulate)

    est = sub.add_parser("estimate", help="estimate parameters from a trajectory file")
    est.add_argument("--in", dest="infile", required=True, help="trajectory file")
    est.add_argument("--method", choices=("moment", "general", "lrv"), required=True)
    est.add_argument("--k0", type=int, default=None, help="pair-average lag (moment, lrv)")
    est.add_argument("--n", type=int, default=None,
                     help="sample size; defaults to what the file length allows")
    est.add_argument("--order", type=int, default=None,
                     help="autoregressive order of the spectral fit (lrv)")
    est.add_argument("--c", type=float, default=None, help="lag-window log rate (general)")
    est.add_argument("--km", type=float, default=None, help="decay amplitude floor (general)")
    est.add_argument("--lminus", type=float, default=0.1,
                     help="lower bracket of the offspring mean (general)")
    est.add_argument("--lplus", type=float, default=0.95,
                     help="upper bracket of the offspring mean (general)")
    est.add_argument("--cy", type=float, default=None, help="stationary moment bound (general)")
    est.add_argument("--kn-override", dest="kn_override", choices=("sqrt",), default=None,
                     help="replace the logarithmic lag window by floor(sqrt(n))")
    est.set_defaults(func=_cmd_estimate)

    rep = sub.add_parser("reproduce", help="rerun a packaged sampling study as CSV")
    rep.add_argument("--table", choices=("1", "2", "3", "fig-var"), required=True)
    rep.add_argument("--reps", type=int, default=None,
                     help="replications per cell (default depends on --scale)")
    rep.add_argument("--scale", choices=("desk", "paper"), default="desk")
    rep.add_argument("--seed", type=int, default=0)
    rep.add_argument("--threads", type=int, default=None)
    rep.add_argument("--out", default="-", help="output file (default stdout)")
    rep.set_defaults(func=_cmd_reproduce)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args, parser)
    except (EstimationError, TooManyFailuresError) as exc:
        json.dump({"error": str(exc), "type": type(exc).__name__}, sys.stdout)
        print()
        return 1


if __name__ == "__main__":
    sys.exit(main())
