"""Command-line front end: `arma-rg <command> [flags]`.

Every command resolves its configuration (flags > --config file > defaults), produces one
artifact and a manifest that reproduces it. Exit codes: 0 success, 2 configuration or input
error, 3 numerical failure; errors are reported as one JSON line on stderr.
"""

from __future__ import annotations

import argparse
import json
import logging
import re
import sys
from collections.abc import Callable, Mapping, Sequence
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any, NoReturn

import numpy as np

from . import __version__
from .arma import new_arma, replica_rng, simulate
from .codec import (
    encode_json,
    encode_series_csv,
    encode_table,
    orbit_columns,
    orbit_rows,
    read_series,
    series_to_dict,
    write_text,
)
from .config import EXPERIMENTS, QUARTIC, build_manifest, load_config_file, resolve_config
from .const import (
    EXIT_CONFIG,
    EXIT_NUMERICAL,
    EXIT_OK,
    MANIFEST_SUFFIX,
    TABULATED_K,
    FixedPointClass,
    Likelihood,
    OutputFormat,
    Scheme,
)
from .decimation import (
    coarse_increment_covariance,
    decimate_arma21,
    decimate_general,
    params_from_model,
    q_rule,
)
from .exceptions import ArmaRgError, CodecError, ConfigError, InvalidParameterError
from .inference import (
    aggregate_reports,
    arma21_mle,
    arma21_to_report,
    effective_mle,
    euler_mle,
    quartic_experiment,
    run_replicas,
)
from .models import EstimateReport, FixedPointSpec, LinearSde2D, TaylorParams, TimeSeries
from .rg_flow import (
    basin_grid,
    classify,
    euler_initial_condition,
    flow,
    inertial_flow_closed_form,
    make_fixed_point,
    rg_step,
)
from .sde_exact import (
    continuum_to_fixed_point,
    euler_discretize,
    exact_arma_params,
    simulate_exact,
    small_tau_expansion,
)

_LOGGER = logging.getLogger(__name__)

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"
STDOUT = "-"


@dataclass(frozen=True)
class Artifact:
    """Rendered command output."""

    text: str
    fmt: OutputFormat


_ARGUMENT_RE = re.compile(r"argument ([^:\s]+)|required: ([^,\s]+)")


class _Parser(argparse.ArgumentParser):
    """Argument parser that reports usage errors as ConfigError instead of exiting."""

    def error(self, message: str) -> NoReturn:
        match = _ARGUMENT_RE.search(message)
        name = (match.group(1) or match.group(2)) if match else None
        field = name.split("/")[-1].lstrip("-").replace("-", "_") if name else None
        raise ConfigError(f"{self.prog}: {message}", field=field)


def _float_list(text: str) -> list[float]:
    try:
        return [float(item) for item in text.split(",") if item.strip()]
    except ValueError as err:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers: {err}") from err


def _int_list(text: str) -> list[int]:
    try:
        return [int(item) for item in text.split(",") if item.strip()]
    except ValueError as err:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers: {err}") from err


def _format(config: Mapping[str, Any], default: OutputFormat) -> OutputFormat:
    return OutputFormat(config["format"]) if config["format"] else default


def _flatten(payload: Mapping[str, Any], prefix: str = "") -> dict[str, Any]:
    """Nested mapping to one flat row; list items get an index suffix."""
    row: dict[str, Any] = {}
    for key, value in payload.items():
        name = f"{prefix}{key}"
        if isinstance(value, Mapping):
            row.update(_flatten(value, f"{name}."))
        elif isinstance(value, list | tuple):
            for i, item in enumerate(value):
                if isinstance(item, Mapping):
                    row.update(_flatten(item, f"{name}.{i}."))
                else:
                    row[f"{name}.{i}"] = item
        else:
            row[name] = value
    return row


def _document(payload: Mapping[str, Any], fmt: OutputFormat) -> Artifact:
    if fmt is OutputFormat.JSON:
        return Artifact(encode_json(payload), fmt)
    row = _flatten(payload)
    return Artifact(encode_table([row], list(row)), fmt)


def _table(rows: list[dict[str, Any]], columns: Sequence[str], fmt: OutputFormat) -> Artifact:
    if fmt is OutputFormat.JSON:
        return Artifact(encode_json({"columns": list(columns), "rows": rows}), fmt)
    return Artifact(encode_table(rows, columns), fmt)


def _sde(config: Mapping[str, Any]) -> LinearSde2D:
    """Linear SDE from config; a missing svv2 follows from the Einstein relation 2 T eta."""
    svv2 = config["svv2"]
    if svv2 is None:
        svv2 = 2.0 * config["temperature"] * config["eta"]
    return LinearSde2D(
        lam=config["lam"],
        kappa=config["kappa"],
        eta=config["eta"],
        sxx2=config["sxx2"],
        sxv2=config["sxv2"],
        svv2=svv2,
    )


def _initial_condition(config: Mapping[str, Any]) -> TaylorParams:
    K = config["K"]  # noqa: N806
    if config["initial"] == "euler":
        return euler_initial_condition(config["eta"], config["kappa"], config["sigma2"], K)
    if config["initial"] == "fixed-point":
        spec = FixedPointSpec(
            FixedPointClass(config["kind"]), config["u"], config["s"], config["z"], config["b"]
        )
        return make_fixed_point(spec, K)
    series = []
    for name in TaylorParams.NAMES:
        coefficients = config[name]
        if len(coefficients) > K + 1:
            raise ConfigError(f"{name} has more than K+1={K + 1} coefficients", field=name)
        series.append(np.pad(np.asarray(coefficients, dtype=float), (0, K + 1 - len(coefficients))))
    return TaylorParams(*series)


def cmd_simulate(config: Mapping[str, Any]) -> Artifact:
    """Series from the exact SDE transition, its Euler ARMA, or an explicit ARMA model."""
    n, tau, seed = config["n"], config["tau"], config["seed"]
    series: TimeSeries
    if config["scheme"] == Scheme.EXACT:
        series = simulate_exact(
            _sde(config), tau, n, seed, config["x0"], config["v0"], config["stationary"]
        )
    else:
        if config["scheme"] == Scheme.EULER:
            model = euler_discretize(_sde(config), tau)
        else:
            model = new_arma(config["phi"], config["nu"], config["mu"])
        series = simulate(model, n, tau, seed, burn_in=config["burn_in"])
        series = replace(series, scheme=Scheme(config["scheme"]))
    fmt = _format(config, OutputFormat.CSV)
    if fmt is OutputFormat.JSON:
        return Artifact(encode_json(series_to_dict(series)), fmt)
    return Artifact(encode_series_csv(series), fmt)


def cmd_decimate(config: Mapping[str, Any]) -> Artifact:
    """Decimate an ARMA model `times` times, recording the MA order after each step."""
    model = new_arma(config["phi"], config["nu"], config["mu"])
    steps = []
    current = model
    for _ in range(config["times"]):
        expected = q_rule(current.p, current.q)
        current = decimate_general(current)
        steps.append({"p": current.p, "q": current.q, "q_rule": expected})
    payload = {"before": model.to_dict(), "after": current.to_dict(), "steps": steps}
    return _document(payload, _format(config, OutputFormat.JSON))


def cmd_flow(config: Mapping[str, Any]) -> Artifact:
    """RG orbit of an initial condition, one row per iterate."""
    orbit = flow(_initial_condition(config), config["iterations"])
    rows = orbit_rows(orbit)
    for row in rows:
        row["divergent"] = orbit.divergent
    return _table(rows, [*orbit_columns(orbit), "divergent"], _format(config, OutputFormat.CSV))


def cmd_classify(config: Mapping[str, Any]) -> Artifact:
    """Fixed-point class reached by an initial condition, with fitted (u, s, z, b)."""
    initial = _initial_condition(config)
    result = classify(initial, tol=config["tol"], max_iterations=config["max_iterations"])
    payload = {"initial": initial.to_dict(), **result.to_dict()}
    return _document(payload, _format(config, OutputFormat.JSON))


def cmd_exactify(config: Mapping[str, Any]) -> Artifact:
    """Exact, small-tau and Euler discretizations of an SDE plus its class-D fixed point."""
    sde, tau = _sde(config), config["tau"]
    payload = {
        "sde": sde.to_dict(),
        "tau": tau,
        "exact": exact_arma_params(sde, tau).to_dict(),
        "small_tau": small_tau_expansion(sde, tau).to_dict(),
        "euler": euler_discretize(sde, tau).to_dict(),
        "fixed_point": continuum_to_fixed_point(sde).to_dict(),
    }
    return _document(payload, _format(config, OutputFormat.JSON))


def _estimate(likelihood: str, series: TimeSeries, with_kappa: bool) -> EstimateReport:
    if likelihood == Likelihood.EULER:
        return euler_mle(series, with_kappa=with_kappa)
    if likelihood == Likelihood.ARMA21:
        return arma21_to_report(arma21_mle(series))
    return effective_mle(series)


def _replicated(
    config: Mapping[str, Any], task: Callable[[int, int], EstimateReport]
) -> EstimateReport:
    reports = run_replicas(task, config["seed"], config["replicas"], config["workers"])
    return aggregate_reports(reports)


def _quartic_task(config: Mapping[str, Any], n: int) -> Callable[[int, int], EstimateReport]:
    def task(seed: int, replica: int) -> EstimateReport:
        return quartic_experiment(
            config["eta"],
            config["kappa"],
            config["lambda4"],
            config["temperature"],
            config["tau_sim"],
            config["subsample"],
            n,
            seed,
            replica=replica,
        )

    return task


def _exact_task(
    config: Mapping[str, Any], likelihood: str, tau: float, n: int
) -> Callable[[int, int], EstimateReport]:
    sde = _sde(config)
    stationary = sde.is_stable(strict=True)

    def task(seed: int, replica: int) -> EstimateReport:
        series = simulate_exact(sde, tau, n, seed, stationary=stationary, replica=replica)
        return _estimate(likelihood, series, config["with_kappa"])

    return task


def _report_artifact(reports: list[EstimateReport], fmt: OutputFormat) -> Artifact:
    if fmt is OutputFormat.JSON:
        return Artifact(encode_json({"reports": [r.to_dict() for r in reports]}), fmt)
    return Artifact(encode_table([r.to_row() for r in reports], EstimateReport.CSV_COLUMNS), fmt)


def cmd_infer(config: Mapping[str, Any]) -> Artifact:
    """Estimate continuum parameters from a series file or over a simulated tau / n sweep."""
    likelihood = config["likelihood"]
    fmt = _format(config, OutputFormat.CSV)
    if config["input"] is not None:
        if likelihood == QUARTIC:
            raise ConfigError("quartic runs simulate their own data", field="input")
        path = Path(config["input"])
        series = read_series(path, None if path.suffix == ".json" else config["tau"])
        return _report_artifact([_estimate(likelihood, series, config["with_kappa"])], fmt)

    reports = []
    for n in config["ns"] or [config["n"]]:
        if likelihood == QUARTIC:
            reports.append(_replicated(config, _quartic_task(config, n)))
            continue
        for tau in config["taus"] or [config["tau"]]:
            _LOGGER.info("Inferring %s at tau=%g, n=%d", likelihood, tau, n)
            reports.append(_replicated(config, _exact_task(config, likelihood, tau, n)))
    return _report_artifact(reports, fmt)


def _fixed_point_rows(config: Mapping[str, Any]) -> tuple[list[dict[str, Any]], list[str]]:
    grid = (-1.0, -0.5, 0.5, 1.0)
    specs = [FixedPointSpec(FixedPointClass.A, s=s) for s in grid]
    for kind in (FixedPointClass.B, FixedPointClass.C):
        specs += [FixedPointSpec(kind, u=u, s=s) for u in grid for s in grid]
    specs += [
        FixedPointSpec(FixedPointClass.D, u=u, s=s, z=z, b=b)
        for u in grid
        for s in grid[::2]
        for z in grid[::2]
        for b in grid[::2]
    ]
    rows = []
    for spec in specs:
        closed_form = spec.kind in (FixedPointClass.A, FixedPointClass.B)
        tp = make_fixed_point(spec, config["K"] if closed_form else TABULATED_K)
        residual = float(np.max(np.abs(rg_step(tp).stack() - tp.stack())))
        rows.append({**spec.to_dict(), "residual": residual})
    return rows, ["class", "u", "s", "z", "b", "residual"]


def _inertial_rows(config: Mapping[str, Any]) -> tuple[list[dict[str, Any]], list[str]]:
    sigma2 = config["sigma2"]
    initial = euler_initial_condition(config["eta"], config["kappa"], sigma2, max(config["K"], 3))
    rows = []
    for level, point in enumerate(flow(initial, config["iterations"]).points):
        closed = inertial_flow_closed_form(sigma2, 0.0, level)
        rows.append(
            {
                "l": level,
                "alpha3": float(point.alpha[3]),
                "beta3": float(point.beta[3]),
                "alpha3_closed": closed[0],
                "beta3_closed": closed[1],
            }
        )
    return rows, ["l", "alpha3", "beta3", "alpha3_closed", "beta3_closed"]


def random_inertial_sdes(seed: int, count: int) -> list[LinearSde2D]:
    """Strictly stable SDEs with noise on the velocity only."""
    rng = replica_rng(seed)
    return [
        LinearSde2D(
            eta=float(rng.uniform(0.2, 2.0)),
            kappa=float(rng.uniform(0.1, 3.0)),
            svv2=float(rng.uniform(0.5, 2.0)),
        )
        for _ in range(count)
    ]


def invariance_residuals(sde: LinearSde2D, tau: float) -> tuple[float, float]:
    """Relative exact residual and absolute Euler residual of decimate(tau) against 2 tau."""
    coarse = decimate_arma21(exact_arma_params(sde, tau)).as_array()
    target = exact_arma_params(sde, 2.0 * tau).as_array()
    exact = float(np.max(np.abs(coarse - target) / np.abs(target)))
    euler_coarse = decimate_arma21(params_from_model(euler_discretize(sde, tau))).as_array()
    euler_target = params_from_model(euler_discretize(sde, 2.0 * tau)).as_array()
    return exact, float(np.max(np.abs(euler_coarse - euler_target)[2:]))


def _invariance_rows(config: Mapping[str, Any]) -> tuple[list[dict[str, Any]], list[str]]:
    rows = []
    for index, sde in enumerate(random_inertial_sdes(config["seed"], 20)):
        for tau in config["taus"]:
            exact, euler = invariance_residuals(sde, tau)
            rows.append(
                {"sde": index, "tau": tau, "residual_exact": exact, "residual_euler": euler}
            )
    return rows, ["sde", "tau", "residual_exact", "residual_euler"]


def _bias_rows(config: Mapping[str, Any]) -> tuple[list[dict[str, Any]], list[str]]:
    rows = []
    options = {**config, "with_kappa": False}
    for tau in config["taus"]:
        report = _replicated(config, _exact_task(options, Likelihood.EULER, tau, config["n"]))
        rows.append({**report.to_row(), "eta_ratio": report.eta_hat / config["eta"]})
    return rows, [*EstimateReport.CSV_COLUMNS, "eta_ratio"]


def _basin_rows(config: Mapping[str, Any]) -> tuple[list[dict[str, Any]], list[str]]:
    rows = [
        {"psi0": psi0, "theta0": theta0, "verdict": str(result.verdict)}
        for psi0, theta0, result in basin_grid(resolution=config["resolution"])
    ]
    return rows, ["psi0", "theta0", "verdict"]


def _quartic_rows(config: Mapping[str, Any]) -> tuple[list[dict[str, Any]], list[str]]:
    report = _replicated(config, _quartic_task(config, config["n"]))
    row = {**report.to_row(), "eta_ratio": report.eta_hat / config["eta"]}
    return [row], [*EstimateReport.CSV_COLUMNS, "eta_ratio"]


def _memory_rows(config: Mapping[str, Any]) -> tuple[list[dict[str, Any]], list[str]]:
    rng = replica_rng(config["seed"])
    rows = []
    top = config["max_order"]
    for p in range(1, top + 1):
        for q in range(top + 1):
            roots = rng.uniform(-0.8, 0.8, p)
            phi = (-np.poly(roots)[1:]).tolist()
            model = new_arma(phi, rng.uniform(-0.5, 0.5, q).tolist(), 1.0)
            gamma = coarse_increment_covariance(model)
            expected = q_rule(p, q)
            nonzero = np.flatnonzero(np.abs(gamma) > 1e-12 * gamma[0])
            rows.append(
                {
                    "p": p,
                    "q": q,
                    "q_rule": expected,
                    "q_measured": int(nonzero[-1]),
                    "q_decimated": decimate_general(model).q,
                    "tail": float(np.max(np.abs(gamma[expected + 1 :]), initial=0.0) / gamma[0]),
                }
            )
    return rows, ["p", "q", "q_rule", "q_measured", "q_decimated", "tail"]


EXPERIMENT_TABLES: dict[
    str, Callable[[Mapping[str, Any]], tuple[list[dict[str, Any]], list[str]]]
] = {
    "fixed-points": _fixed_point_rows,
    "inertial-flow": _inertial_rows,
    "rg-invariance": _invariance_rows,
    "euler-bias": _bias_rows,
    "basin": _basin_rows,
    "quartic": _quartic_rows,
    "memory-rule": _memory_rows,
}


def cmd_experiment(config: Mapping[str, Any]) -> Artifact:
    """Regenerate one quantitative result as a table."""
    rows, columns = EXPERIMENT_TABLES[config["name"]](config)
    return _table(rows, columns, _format(config, OutputFormat.CSV))


COMMANDS: dict[str, Callable[[Mapping[str, Any]], Artifact]] = {
    "simulate": cmd_simulate,
    "decimate": cmd_decimate,
    "flow": cmd_flow,
    "classify": cmd_classify,
    "exactify": cmd_exactify,
    "infer": cmd_infer,
    "experiment": cmd_experiment,
}


def _add_sde_flags(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("linear SDE")
    group.add_argument("--lambda", dest="lam", type=float, help="position drag")
    group.add_argument("--kappa", type=float, help="stiffness")
    group.add_argument("--eta", type=float, help="velocity damping")
    group.add_argument("--sxx2", type=float, help="position noise variance rate")
    group.add_argument("--sxv2", type=float, help="noise covariance rate")
    group.add_argument("--svv2", type=float, help="velocity noise rate (default 2 T eta)")
    group.add_argument("--temperature", type=float, help="bath temperature T")


def _add_arma_flags(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("ARMA model")
    group.add_argument("--phi", type=_float_list, help="AR coefficients, e.g. 2,-1")
    group.add_argument("--nu", type=_float_list, help="MA coefficients")
    group.add_argument("--mu", type=float, help="current-noise amplitude")


def _add_initial_flags(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("initial condition")
    group.add_argument("--initial", choices=["euler", "fixed-point", "coefficients"])
    group.add_argument("--eta", type=float)
    group.add_argument("--kappa", type=float)
    group.add_argument("--sigma2", type=float)
    group.add_argument("--kind", choices=[c.value for c in FixedPointClass])
    for name in ("u", "s", "z", "b"):
        group.add_argument(f"--{name}", type=float)
    for name in TaylorParams.NAMES:
        group.add_argument(f"--{name}", type=_float_list, help=f"{name}_0,{name}_1,...")
    group.add_argument("--K", type=int, help="truncation order")


def _add_quartic_flags(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("quartic potential")
    group.add_argument("--lambda4", type=float, help="quartic coefficient")
    group.add_argument("--tau-sim", type=float, help="fine Euler step")
    group.add_argument("--subsample", type=int, help="fine steps per observation")


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", help="JSON config file or manifest")
    common.add_argument("--output", help="output path ('-' for stdout)")
    common.add_argument("--format", choices=[f.value for f in OutputFormat])
    common.add_argument("--seed", type=int)
    common.add_argument("--replicas", type=int)
    common.add_argument("--workers", type=int, help="replica worker threads")

    parser = _Parser(
        prog="arma-rg", description="Renormalization of ARMA models and linear SDE inference"
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument(
        "--log-level", default="WARNING", choices=["DEBUG", "INFO", "WARNING", "ERROR"]
    )
    sub = parser.add_subparsers(dest="command", required=True)

    simulate_p = sub.add_parser("simulate", parents=[common], help="generate a time series")
    simulate_p.add_argument("--scheme", choices=["euler", "exact", "arma"])
    simulate_p.add_argument("--n", type=int)
    simulate_p.add_argument("--tau", type=float)
    simulate_p.add_argument("--burn-in", type=int)
    simulate_p.add_argument("--stationary", action="store_true", default=None)
    simulate_p.add_argument("--x0", type=float)
    simulate_p.add_argument("--v0", type=float)
    _add_sde_flags(simulate_p)
    _add_arma_flags(simulate_p)

    decimate_p = sub.add_parser("decimate", parents=[common], help="coarse-grain an ARMA model")
    decimate_p.add_argument("--times", type=int)
    _add_arma_flags(decimate_p)

    flow_p = sub.add_parser("flow", parents=[common], help="iterate the RG map")
    flow_p.add_argument("--iterations", type=int)
    _add_initial_flags(flow_p)

    classify_p = sub.add_parser("classify", parents=[common], help="classify an RG orbit")
    classify_p.add_argument("--tol", type=float)
    classify_p.add_argument("--max-iterations", type=int)
    _add_initial_flags(classify_p)

    exactify_p = sub.add_parser("exactify", parents=[common], help="discretize a linear SDE")
    exactify_p.add_argument("--tau", type=float)
    _add_sde_flags(exactify_p)

    infer_p = sub.add_parser("infer", parents=[common], help="estimate continuum parameters")
    infer_p.add_argument("--likelihood", choices=[*(s.value for s in Likelihood), QUARTIC])
    infer_p.add_argument("--input", help="series file (.csv needs --tau, or .json)")
    infer_p.add_argument("--tau", type=float)
    infer_p.add_argument("--taus", type=_float_list, help="tau sweep")
    infer_p.add_argument("--n", type=int)
    infer_p.add_argument("--ns", type=_int_list, help="length sweep")
    infer_p.add_argument("--with-kappa", action="store_true", default=None)
    _add_sde_flags(infer_p)
    _add_quartic_flags(infer_p)

    experiment_p = sub.add_parser("experiment", parents=[common], help="regenerate a result")
    experiment_p.add_argument("name", nargs="?", choices=EXPERIMENTS)
    experiment_p.add_argument("--sigma2", type=float)
    experiment_p.add_argument("--K", type=int)
    experiment_p.add_argument("--iterations", type=int)
    experiment_p.add_argument("--taus", type=_float_list)
    experiment_p.add_argument("--n", type=int)
    experiment_p.add_argument("--resolution", type=int)
    experiment_p.add_argument("--max-order", type=int)
    _add_sde_flags(experiment_p)
    _add_quartic_flags(experiment_p)
    return parser


def _flag_values(args: argparse.Namespace) -> dict[str, Any]:
    skip = {"command", "config", "log_level"}
    return {key: value for key, value in vars(args).items() if key not in skip}


def _emit(command: str, config: Mapping[str, Any], artifact: Artifact) -> None:
    manifest = build_manifest(command, config, __version__)
    if config["output"] == STDOUT:
        sys.stdout.write(artifact.text)
        sys.stderr.write(json.dumps({"manifest": manifest}, sort_keys=True) + "\n")
        return
    path = Path(config["output"])
    write_text(path, artifact.text)
    write_text(path.with_name(path.name + MANIFEST_SUFFIX), encode_json(manifest))
    _LOGGER.info("Wrote %s and its manifest", path)


def _fail(err: ArmaRgError, code: int) -> int:
    report = {
        "error": type(err).__name__,
        "message": str(err),
        "field": getattr(err, "field", None),
        "line": getattr(err, "line", None),
    }
    sys.stderr.write(json.dumps(report) + "\n")
    return code


def main(argv: Sequence[str] | None = None) -> int:
    """Entry point of the arma-rg console script; returns the exit code."""
    try:
        args = build_parser().parse_args(argv)
    except ConfigError as err:
        return _fail(err, EXIT_CONFIG)
    logging.basicConfig(level=args.log_level, stream=sys.stderr, format=LOG_FORMAT)
    try:
        file_values = load_config_file(Path(args.config)) if args.config else {}
        config = resolve_config(args.command, file_values, _flag_values(args))
        _LOGGER.info("Running %s", args.command)
        _emit(args.command, config, COMMANDS[args.command](config))
    except (ConfigError, InvalidParameterError, CodecError) as err:
        return _fail(err, EXIT_CONFIG)
    except ArmaRgError as err:
        _LOGGER.debug("Numerical failure", exc_info=True)
        return _fail(err, EXIT_NUMERICAL)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
