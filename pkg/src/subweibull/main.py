"""
Main entry point for the subweibull command line tool
"""

import argparse
import csv
import io
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from .bounds import (
    K_of_t,
    dual_moment_rate,
    gbo_bound_params,
    lp_interpolation_bracket,
    moment_rate,
    moment_rate_psi,
    rate_sum_form,
    tail_closed_form,
    tail_lower_K,
    tail_upper_K,
)
from .config import (
    BoundsConfig,
    CovappConfig,
    OrliczConfig,
    SampleConfig,
    VerifyConfig,
    default_jobs,
    env_flag,
    load_config,
)
from .covapp import CovExperimentConfig, coverage_experiment, quantile_scaling_sweep
from .errors import ConfigError, NumericalError, SubWeibullError
from .model import problem_from_config
from .orlicz import (
    GBOFunction,
    log_phi_bounds,
    log_phi_p_Z,
    solve_orlicz_analytic,
    solve_orlicz_sample,
    solve_sequence_orlicz,
    survival_Y,
    survival_Z,
)
from .runtime import ExperimentRuntime, dumps, format_cell
from .sampling import (
    sample_gaussian_groups,
    sample_rademacher,
    sample_Y,
    sample_Z,
    sample_Zstar,
)
from .verify import run_suite

logger = logging.getLogger(__name__)


class _Parser(argparse.ArgumentParser):
    """Usage errors are configuration errors (exit 1), not argparse's exit 2"""

    def error(self, message: str) -> None:  # type: ignore[override]
        raise ConfigError(f"{self.prog}: {message}")


def _float_list(text: str) -> List[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _seed(text: str) -> int:
    value = int(text, 0)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError(f"seed must be an unsigned 64-bit integer, got {text}")
    return value


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file; flags override its values", type=str)
    common.add_argument("--seed", help="Unsigned 64-bit seed (mandatory for verify and covapp)", type=_seed)
    common.add_argument("--jobs", help="Worker processes (default: SUBWEIBULL_JOBS or physical cores)", type=int)
    common.add_argument("--out", help="Output directory (default: ./runs/<command>)", type=str)
    common.add_argument("--format", help="Rendering printed to stdout", choices=["json", "csv"], default="json")
    common.add_argument("--debug", help="Enable debug logging", action="store_true")

    problem = argparse.ArgumentParser(add_help=False)
    problem.add_argument("--alpha", help="Tail exponent alpha > 0", type=float)
    problem.add_argument("--weights", help="Comma-separated weights a_i >= 0", type=_float_list)
    problem.add_argument("--scales", help="Comma-separated scales L_i >= 0", type=_float_list)

    parser = _Parser(
        prog="subweibull",
        description="subweibull - moment, tail and Orlicz-norm bounds for weighted sums of sub-Weibull variables",
        epilog="Examples:\n"
               "  subweibull bounds --op moment_rate --p 4 --alpha 1 --weights 1,1,1,1 --scales 1,1,1,1\n"
               "  subweibull bounds --op K_of_t --t 2 --alpha 1 --weights 1 --scales 1\n"
               "  subweibull orlicz --mode analytic --alpha 0.5 --l 1\n"
               "  subweibull sample --law Z --alpha 0.5 --l 2 --count 10 --seed 1\n"
               "  subweibull verify --suite gbo --seed 7\n"
               "  subweibull covapp --m 20 --n 200 --q 10 --reps 5000 --seed 3",
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--version", "-v", help="Show version and exit", action="store_true")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p_bounds = sub.add_parser("bounds", parents=[common, problem], help="Evaluate a closed-form rate or bound")
    p_bounds.add_argument("--op", dest="operation", help="Bound to evaluate", type=str)
    p_bounds.add_argument("--p", help="Moment order p >= 1", type=float)
    p_bounds.add_argument("--t", help="Tail level t", type=float)
    p_bounds.add_argument("--c", dest="constant_c", help="Stand-in for the constant C (default 1)", type=float)
    p_bounds.add_argument("--side", help="Side of tail_closed_form", choices=["upper", "lower"])

    p_orlicz = sub.add_parser("orlicz", parents=[common, problem], help="Solve an Orlicz norm")
    p_orlicz.add_argument("--mode", choices=["analytic", "sample", "sequence", "log_phi"])
    p_orlicz.add_argument("--law", choices=["Z", "Y"])
    p_orlicz.add_argument("--l", help="Scale of the Z law", type=float)
    p_orlicz.add_argument("--generator", choices=["gbo", "psi"])
    p_orlicz.add_argument("--g-alpha", dest="g_alpha", help="Generator alpha (default: law alpha)", type=float)
    p_orlicz.add_argument("--g-l", dest="g_l", help="Generator scale (default: law scale)", type=float)
    p_orlicz.add_argument("--sample", dest="sample_path", help="CSV sample file for --mode sample", type=str)
    p_orlicz.add_argument("--p", help="Order p >= 2 for sequence and log_phi modes", type=float)
    p_orlicz.add_argument("--eta", help="Scale eta for log_phi mode", type=float)

    p_sample = sub.add_parser("sample", parents=[common, problem], help="Draw a seeded sample")
    p_sample.add_argument("--law", choices=["Y", "Z", "Zstar", "gaussian", "rademacher"])
    p_sample.add_argument("--l", help="Scale of the Z law", type=float)
    p_sample.add_argument("--count", type=int)
    p_sample.add_argument("--reps", type=int)
    p_sample.add_argument("--m", type=int)
    p_sample.add_argument("--n", type=int)
    p_sample.add_argument("--q", type=int)

    p_verify = sub.add_parser("verify", parents=[common], help="Run a verification suite")
    p_verify.add_argument("--suite", choices=["sampler", "gbo", "rosenthal", "tails", "latala",
                                              "moments", "logphi", "dual", "gbo_sum"])
    p_verify.add_argument("--reps", type=int)
    p_verify.add_argument("--count", type=int)
    p_verify.add_argument("--p-grid", dest="p_grid", type=_float_list)
    p_verify.add_argument("--t-grid", dest="t_grid", type=_float_list)
    p_verify.add_argument("--n-boot", dest="n_boot", type=int)

    p_cov = sub.add_parser("covapp", parents=[common], help="Run the grouped covariance experiment")
    p_cov.add_argument("--m", type=int)
    p_cov.add_argument("--n", type=int)
    p_cov.add_argument("--q", type=int)
    p_cov.add_argument("--reps", type=int)
    p_cov.add_argument("--nu-grid", dest="nu_grid", type=_float_list)
    p_cov.add_argument("--t-grid", dest="t_grid", type=_float_list)
    p_cov.add_argument("--sweep", help="Also run the (m, n, q) quantile scaling sweep", action="store_true")
    return parser


def _problem_override(args: argparse.Namespace) -> Optional[Dict[str, Any]]:
    fields = {k: getattr(args, k, None) for k in ("alpha", "weights", "scales")}
    if all(v is None for v in fields.values()):
        return None
    return {k: v for k, v in fields.items() if v is not None}


def _require(value: Any, flag: str, what: str) -> Any:
    if value is None:
        raise ConfigError(f"{what} needs {flag}")
    return value


def _load_sample(path: str) -> np.ndarray:
    """First column of a CSV file; a non-numeric first line is taken as a header"""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"cannot read sample {path}: {e}")
    values = []
    for lineno, row in enumerate(csv.reader(io.StringIO(text)), start=1):
        if not row or row[0].startswith("#"):
            continue
        try:
            values.append(float(row[0]))
        except ValueError:
            if values or lineno > 2:
                raise ConfigError(f"non-numeric value {row[0]!r} in {path} at line {lineno}")
    if not values:
        raise ConfigError(f"sample file {path} contains no values")
    return np.asarray(values, dtype=float)


def cmd_bounds(args: argparse.Namespace, rt: ExperimentRuntime) -> Dict[str, Any]:
    cfg = load_config(args.config, BoundsConfig, {
        "problem": _problem_override(args), "operation": args.operation, "p": args.p, "t": args.t,
        "constant_c": args.constant_c, "side": args.side,
    })
    op = _require(cfg.operation, "--op", "bounds")
    problem = problem_from_config(_require(cfg.problem, "--alpha/--weights/--scales", op))
    c = cfg.constant_c
    rt.set_config(cfg.model_dump())

    if op == "moment_rate":
        result: Dict[str, Any] = moment_rate(problem, _require(cfg.p, "--p", op), c).to_dict()
    elif op == "moment_rate_psi":
        result = moment_rate_psi(problem.weights, problem.alpha, _require(cfg.p, "--p", op), c).to_dict()
    elif op == "gbo_bound_params":
        params = gbo_bound_params(problem, c)
        result = {"value": params.nu_star, "constant_c": c, "l_star": params.l_star}
    elif op == "K_of_t":
        result = {"value": K_of_t(problem, _require(cfg.t, "--t", op))}
    elif op == "tail_upper_K":
        result = tail_upper_K(problem, _require(cfg.t, "--t", op), c).to_dict()
    elif op == "tail_lower_K":
        result = tail_lower_K(problem, _require(cfg.t, "--t", op), c).to_dict()
    elif op == "tail_closed_form":
        result = tail_closed_form(problem, _require(cfg.t, "--t", op), c, cfg.side).to_dict()
    elif op == "dual_moment_rate":
        result = {"value": dual_moment_rate(problem, _require(cfg.p, "--p", op))}
    elif op == "rate_sum_form":
        result = {"value": rate_sum_form(problem, _require(cfg.p, "--p", op))}
    else:
        result = lp_interpolation_bracket(problem, _require(cfg.p, "--p", op)).to_dict()

    # regime and constant_c stay null for the operations that have neither
    payload = {"operation": op, "inputs": cfg.model_dump(), "value": None, "regime": None, "constant_c": None,
               **result}
    rt.write_json("result.json", payload)
    return {"payload": payload, "rows": None}


def cmd_orlicz(args: argparse.Namespace, rt: ExperimentRuntime) -> Dict[str, Any]:
    cfg = load_config(args.config, OrliczConfig, {
        "mode": args.mode, "law": args.law, "alpha": args.alpha, "l": args.l, "generator": args.generator,
        "g_alpha": args.g_alpha, "g_l": args.g_l, "sample_path": args.sample_path,
        "problem": _problem_override(args) if args.weights is not None else None, "p": args.p, "eta": args.eta,
    })
    rt.set_config(cfg.model_dump())

    def generator(default_alpha: float, default_l: float) -> GBOFunction:
        g_alpha = cfg.g_alpha if cfg.g_alpha is not None else default_alpha
        if cfg.generator == "psi":
            return GBOFunction.psi(g_alpha)
        return GBOFunction.gbo(g_alpha, cfg.g_l if cfg.g_l is not None else default_l)

    if cfg.mode == "analytic":
        if cfg.law == "Y":
            result: Any = solve_orlicz_analytic(survival_Y(), generator(2.0, 1.0))
        else:
            alpha = _require(cfg.alpha, "--alpha", "orlicz analytic")
            result = solve_orlicz_analytic(survival_Z(alpha, cfg.l), generator(alpha, cfg.l))
    elif cfg.mode == "sample":
        xs = _load_sample(_require(cfg.sample_path, "--sample", "orlicz sample"))
        result = solve_orlicz_sample(xs, generator(_require(cfg.alpha or cfg.g_alpha, "--alpha", "orlicz sample"),
                                                   cfg.l))
    elif cfg.mode == "sequence":
        problem = problem_from_config(_require(cfg.problem, "--alpha/--weights/--scales", "orlicz sequence"))
        result = solve_sequence_orlicz(problem, _require(cfg.p, "--p", "orlicz sequence"))
    else:
        alpha = _require(cfg.alpha, "--alpha", "orlicz log_phi")
        eta, p = _require(cfg.eta, "--eta", "orlicz log_phi"), _require(cfg.p, "--p", "orlicz log_phi")
        result = {"log_phi": log_phi_p_Z(eta, p, alpha, cfg.l)}
        if alpha <= 1:
            result["lower"], result["upper"] = log_phi_bounds(eta, p, alpha, cfg.l)

    payload = {"mode": cfg.mode, "inputs": cfg.model_dump(), "result": result}
    rt.write_json("result.json", payload)
    return {"payload": payload, "rows": None}


def cmd_sample(args: argparse.Namespace, rt: ExperimentRuntime) -> Dict[str, Any]:
    cfg = load_config(args.config, SampleConfig, {
        "law": args.law, "alpha": args.alpha, "l": args.l, "count": args.count,
        "problem": _problem_override(args) if args.weights is not None else None,
        "reps": args.reps, "m": args.m, "n": args.n, "q": args.q,
    })
    seed = rt.seed
    rt.set_config(cfg.model_dump())

    if cfg.law == "Y":
        batch = sample_Y(cfg.count, seed)
    elif cfg.law == "Z":
        batch = sample_Z(_require(cfg.alpha, "--alpha", "sample Z"), cfg.l, cfg.count, seed)
    elif cfg.law == "rademacher":
        batch = sample_rademacher(cfg.count, seed)
    elif cfg.law == "Zstar":
        problem = problem_from_config(_require(cfg.problem, "--alpha/--weights/--scales", "sample Zstar"))
        batch = sample_Zstar(problem, cfg.reps, seed, rt.jobs)
    else:
        batch = sample_gaussian_groups(cfg.m, cfg.n, cfg.q, seed)

    if batch.values.ndim == 1:
        rows = [{"value": v} for v in batch.values]
        rt.write_column("sample.csv", batch.values, batch.describe())
    else:
        m, n, q = batch.values.shape
        rows = [
            {"group": g, "observation": k, **{f"x{j}": batch.values[g, k, j] for j in range(q)}}
            for g in range(m) for k in range(n)
        ]
        rt.write_csv("sample.csv", rows, header_comment=batch.describe())
    rt.write_json("sample.json", batch.metadata())
    return {"payload": batch.metadata(), "rows": rows}


def _mandatory_seed(rt: ExperimentRuntime) -> int:
    if rt.seed is None:
        raise ConfigError(f"{rt.command} needs an explicit --seed")
    return rt.seed


def cmd_verify(args: argparse.Namespace, rt: ExperimentRuntime) -> Dict[str, Any]:
    seed = _mandatory_seed(rt)
    cfg = load_config(args.config, VerifyConfig, {
        "suite": args.suite, "reps": args.reps, "count": args.count, "p_grid": args.p_grid,
        "t_grid": args.t_grid, "n_boot": args.n_boot,
    })
    rt.set_config(cfg.model_dump())
    result = run_suite(cfg.suite, seed, rt.jobs, cfg.reps, cfg.count, cfg.p_grid, cfg.t_grid, cfg.n_boot)
    payload = {"suite": result.suite, "seed": seed, "passed": result.passed, "report": result.report}
    rt.write_json("report.json", payload)
    rt.write_csv("rows.csv", result.rows)
    return {"payload": payload, "rows": result.rows}


def cmd_covapp(args: argparse.Namespace, rt: ExperimentRuntime) -> Dict[str, Any]:
    seed = _mandatory_seed(rt)
    cfg = load_config(args.config, CovappConfig, {
        "m": args.m, "n": args.n, "q": args.q, "reps": args.reps, "nu_grid": args.nu_grid, "t_grid": args.t_grid,
    })
    rt.set_config(cfg.model_dump())
    experiment = CovExperimentConfig(cfg.m, cfg.n, cfg.q, cfg.reps, seed)
    report = coverage_experiment(experiment, cfg.nu_grid, cfg.t_grid, rt.jobs)
    payload: Dict[str, Any] = {"summary": report}
    rows = report.rows()
    rt.write_csv("coverage.csv", rows, columns=["nu_or_t", "empirical_freq", "bound_value", "c_fit"])
    if args.sweep:
        sweep = quantile_scaling_sweep(reps=cfg.reps, seed=seed, jobs=rt.jobs)
        payload["sweep"] = sweep
        rt.write_csv("sweep.csv", sweep.rows)
    rt.write_json("summary.json", payload)
    return {"payload": payload, "rows": rows}


COMMANDS = {
    "bounds": cmd_bounds,
    "orlicz": cmd_orlicz,
    "sample": cmd_sample,
    "verify": cmd_verify,
    "covapp": cmd_covapp,
}


def _render_rows(rows: Sequence[Dict[str, Any]]) -> str:
    columns: Dict[str, None] = {}
    for row in rows:
        for key in row:
            columns.setdefault(key, None)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(list(columns))
    for row in rows:
        writer.writerow([format_cell(row.get(c)) for c in columns])
    return buf.getvalue()


def configure_logging(debug: bool) -> None:
    level = logging.DEBUG if debug or env_flag("SUBWEIBULL_DEBUG") else logging.WARNING
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr, force=True)


def run(argv: Optional[Sequence[str]] = None) -> int:
    """Parse argv, run one command and return its exit code"""
    from . import __version__

    try:
        args = build_parser().parse_args(argv)
    except ConfigError as e:
        print(f"Error: {e}", file=sys.stderr)
        return e.exit_code

    if args.version:
        print(f"subweibull v{__version__}")
        return 0
    if not args.command:
        build_parser().print_help(sys.stderr)
        return ConfigError.exit_code

    configure_logging(args.debug)
    rt: Optional[ExperimentRuntime] = None
    try:
        jobs = args.jobs if args.jobs is not None else default_jobs()
        if jobs < 1:
            raise ConfigError(f"--jobs must be >= 1, got {jobs}")
        seed = args.seed if args.seed is not None or args.command != "sample" else 0
        rt = ExperimentRuntime(args.command, args.out, seed, jobs)
        outcome = COMMANDS[args.command](args, rt)
    except (SubWeibullError, ArithmeticError) as e:
        error = e if isinstance(e, SubWeibullError) else NumericalError(
            f"arithmetic failure in {args.command}: {e}", {"exception": type(e).__name__}
        )
        print(f"Error: {error}", file=sys.stderr)
        if error.diagnostics:
            print(dumps({"diagnostics": error.diagnostics}), file=sys.stderr, end="")
        if rt is not None:
            rt.finish(error.exit_code)
        return error.exit_code

    if args.format == "csv" and outcome["rows"]:
        sys.stdout.write(_render_rows(outcome["rows"]))
    else:
        sys.stdout.write(dumps(outcome["payload"]))
    rt.finish(0)
    return 0


def main() -> None:
    """Main entry point for the subweibull command line tool"""
    sys.exit(run())


if __name__ == "__main__":
    main()
