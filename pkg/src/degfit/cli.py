"""Command-line interface.

Exit codes: 0 success, 2 usage or malformed input, 3 negative domain
verdict (sequence not graphic, no MLE, or a divergent fit).
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import __version__
from .core import (
    FINITE,
    GRAPH_FORMAT_VERSION,
    DegreeSequence,
    NoMleError,
    Potentials,
    RegimeError,
    WeightRegime,
    read_degrees_csv,
    read_vector_csv,
    write_degrees_csv,
    write_graph_json,
)
from .graphical import is_graphical
from .meanfn import evaluate
from .mle import SolverOptions, fit
from .sampler import SeededRng, sample_graph
from . import experiments as ex


def _emit(obj) -> None:
    print(json.dumps(obj, sort_keys=True))


def _regime_from_args(args) -> WeightRegime:
    if args.regime == FINITE:
        if args.r is None:
            raise ValueError("--regime finite requires --r")
        return WeightRegime.finite(args.r)
    if args.r is not None:
        raise ValueError(f"--regime {args.regime} does not take --r")
    return WeightRegime(args.regime)


def _add_regime_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--regime", required=True, choices=["finite", "infinite", "continuous"])
    p.add_argument("--r", type=int, default=None, help="weight levels for --regime finite")


def _add_threads_arg(p: argparse.ArgumentParser) -> None:
    p.add_argument(
        "--threads",
        type=int,
        default=1,
        help="reserved worker count; outputs never depend on it (default 1)",
    )


def _check_threads(args) -> None:
    if getattr(args, "threads", 1) < 1:
        raise ValueError("--threads must be >= 1")


def _solver_from_args(args) -> SolverOptions:
    return SolverOptions(
        tol=args.tol,
        max_iter=args.max_iter,
        divergence_norm=args.divergence_norm,
        theta0=read_vector_csv(args.theta0) if args.theta0 else None,
        record_trace=bool(args.trace),
    )


def _cmd_mean(args) -> int:
    regime = _regime_from_args(args)
    ev = evaluate(regime, args.t)
    _emit({"t": ev.t, "z1": ev.z1, "mu": ev.mu, "mu_prime": ev.mu_prime})
    return 0


def _cmd_check(args) -> int:
    regime = _regime_from_args(args)
    d = read_degrees_csv(args.degrees)
    verdict = is_graphical(regime, d)
    _emit(
        {
            "graphic": verdict.graphic,
            "violated_k": verdict.violated_k,
            "parity_ok": verdict.parity_ok,
        }
    )
    return 0 if verdict.graphic else 3


def _cmd_sample(args) -> int:
    regime = _regime_from_args(args)
    theta = Potentials(read_vector_csv(args.theta))
    g = sample_graph(regime, theta, SeededRng(args.seed, args.stream))
    write_graph_json(g, args.out)
    if args.degrees_out:
        write_degrees_csv(g.degree_sequence(), args.degrees_out)
    return 0


def _cmd_fit(args) -> int:
    _check_threads(args)
    regime = _regime_from_args(args)
    d = read_degrees_csv(args.degrees)
    opts = _solver_from_args(args)
    try:
        rep = fit(regime, d, opts)
    except NoMleError as exc:
        _emit({"error": "no-mle", "detail": str(exc)})
        return 3
    _emit(
        {
            "theta_hat": None if rep.theta_hat is None else [float(x) for x in rep.theta_hat],
            "converged": rep.converged,
            "diverged": rep.diverged,
            "iterations": rep.iterations,
            "residual_inf": rep.residual_inf,
        }
    )
    if args.trace and rep.step_trace is not None:
        with open(args.trace, "w", encoding="utf-8", newline="") as fh:
            fh.write("iter,step_inf,residual_inf\n")
            m = min(len(rep.step_trace), len(rep.residual_trace))
            for k in range(m):
                fh.write(
                    f"{k + 1},{format(rep.step_trace[k], '.17g')},"
                    f"{format(rep.residual_trace[k], '.17g')}\n"
                )
    return 3 if rep.diverged else 0


def _cmd_experiment(args) -> int:
    _check_threads(args)
    with open(args.config, "r", encoding="utf-8") as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValueError(f"malformed config JSON: {exc}") from exc
    config = ex.config_from_json(raw)
    os.makedirs(args.out, exist_ok=True)
    # Figures are imported lazily so the delimited outputs never wait on
    # matplotlib when a run fails early.
    from . import figures

    if args.kind == "trace":
        result = ex.run_convergence_trace(config)
        ex.write_trace_csv(result, os.path.join(args.out, "trace.csv"))
        summary = ex.trace_summary(result)
        ex.write_summary_json(summary, os.path.join(args.out, "summary.json"))
        figures.render_trace_figure(result, os.path.join(args.out, "trace.png"))
        _emit(summary)
        return 0 if result.existed else 3
    if args.kind == "consistency":
        result = ex.run_consistency_experiment(config)
        ex.write_consistency_csv(result, os.path.join(args.out, "consistency.csv"))
        ex.write_summary_json(result.summary, os.path.join(args.out, "summary.json"))
        figures.render_consistency_figure(result, os.path.join(args.out, "consistency.png"))
        _emit(result.summary)
        return 0
    result = ex.run_scatter(config)
    ex.write_scatter_csv(result, os.path.join(args.out, "scatter.csv"))
    ex.write_summary_json(result.summary, os.path.join(args.out, "summary.json"))
    figures.render_scatter_figure(result, os.path.join(args.out, "scatter.png"))
    _emit(result.summary)
    return 0 if result.existed else 3


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="degfit",
        description="maximum-entropy weighted graphs with prescribed expected degrees",
    )
    p.add_argument(
        "--version",
        action="version",
        version=f"degfit {__version__} (graph-json v{GRAPH_FORMAT_VERSION}, degrees-csv v1)",
    )
    sub = p.add_subparsers(dest="command", required=True)

    pm = sub.add_parser("mean", help="evaluate z1, mean and mean derivative at t")
    _add_regime_args(pm)
    pm.add_argument("--t", type=float, required=True)
    pm.set_defaults(func=_cmd_mean)

    pc = sub.add_parser("check", help="graphicality verdict for a degree CSV")
    _add_regime_args(pc)
    pc.add_argument("--degrees", required=True, metavar="CSV")
    pc.set_defaults(func=_cmd_check)

    ps = sub.add_parser("sample", help="sample a graph at given potentials")
    _add_regime_args(ps)
    ps.add_argument("--theta", required=True, metavar="CSV", help="one-line potentials CSV")
    ps.add_argument("--seed", type=int, required=True)
    ps.add_argument("--stream", type=int, default=0)
    ps.add_argument("--out", required=True, metavar="JSON", help="graph output path")
    ps.add_argument("--degrees-out", default=None, metavar="CSV", help="also write degrees")
    ps.set_defaults(func=_cmd_sample)

    pf = sub.add_parser("fit", help="fit potentials to a degree CSV")
    _add_regime_args(pf)
    pf.add_argument("--degrees", required=True, metavar="CSV")
    pf.add_argument("--tol", type=float, default=1e-10)
    pf.add_argument("--max-iter", type=int, default=5000)
    pf.add_argument("--divergence-norm", type=float, default=50.0)
    pf.add_argument("--theta0", default=None, metavar="CSV", help="starting potentials")
    pf.add_argument("--trace", default=None, metavar="CSV", help="write per-iteration trace")
    _add_threads_arg(pf)
    pf.set_defaults(func=_cmd_fit)

    pe = sub.add_parser("experiment", help="run a seeded experiment from a config JSON")
    pe.add_argument("--kind", required=True, choices=["trace", "consistency", "scatter"])
    pe.add_argument("--config", required=True, metavar="JSON")
    pe.add_argument("--out", required=True, metavar="DIR")
    _add_threads_arg(pe)
    pe.set_defaults(func=_cmd_experiment)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, RegimeError, OSError) as exc:
        print(f"degfit: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
