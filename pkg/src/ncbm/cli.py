"""Command-line interface.

Every flag can also be given in a ``key = value`` config file (``--config``
or the ``NCBM_CONFIG`` environment variable); flags win over the file.

Exit codes: 0 success, 2 validation, 3 numerical failure, 4 degenerate
composition, 5 input parse error, 6 infeasible sweep.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .behavior import (CLUSTER_LABELS, STATE_LABELS, BehaviorParams, BehaviorState,
                       StatusThresholds, build_tpm, classify_status)
from .chart import PALETTE, Series, line_chart
from .correlation import compose_cluster, correlated_functions
from .errors import (DegenerateRow, InfeasibleGrid, LogParseError, NumericalFailure,
                     Unclassifiable, ValidationError)
from .estimation import aggregate_records, estimate_params
from .formats import fmt, format_csv, format_matrix, load_config, read_log, read_members
from .scenarios import (DEFAULT_GRID, DEFAULT_HORIZON, DEFAULT_NODE_COUNTS, Metric, Scenario,
                        SweepConfig, default_template, run_sweep)
from .smp import (SojournFamily, SojournSpec, limiting_distribution, occupancy_estimate,
                  simulate_many, transient_occupancy)

EXIT_OK, EXIT_VALIDATION, EXIT_NUMERICAL, EXIT_DEGENERATE, EXIT_PARSE, EXIT_INFEASIBLE = 0, 2, 3, 4, 5, 6


def _float_list(text):
    return [float(v) for v in str(text).replace(" ", "").split(",") if v]


def _int_list(text):
    if isinstance(text, (list, tuple)):
        return [int(v) for v in text]
    return [int(v) for v in str(text).replace(" ", "").split(",") if v]


def _bool(text):
    if isinstance(text, bool):
        return text
    value = str(text).strip().lower()
    if value in ("1", "true", "yes", "on"):
        return True
    if value in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


# key -> (converter, default); None default means "required" or command-specific
KEYS = {
    "a": (float, None), "b": (float, None), "c": (float, None), "d": (float, None), "e": (float, None),
    "eta": (float, 10.0),
    "theta_drop": (float, 0.3), "theta_forward": (float, 0.5), "theta_inject": (float, 0.3),
    "seed": (int, 0),
    "horizon": (float, None),
    "steps": (int, 100),
    "initial": (str, "W"),
    "family": (str, SojournFamily.EXPONENTIAL.value),
    "sojourn_mean": (float, 1.0),
    "sojourn_means": (_float_list, None),
    "trajectories": (int, 100),
    "workers": (int, 1),
    "nodes": (_int_list, list(DEFAULT_NODE_COUNTS)),
    "grid": (int, DEFAULT_GRID),
    "metric": (str, Metric.BOTH.value),
    "scenario": (str, None),
    "deferred_normalization": (_bool, False),
    "out": (str, None),
    "chart": (str, None),
}

# keys that cannot change results and are left out of the metadata echo
NOT_ECHOED = {"out", "chart", "workers"}

PARAMS = ("a", "b", "c", "d", "e", "eta")
SOJOURN = ("family", "sojourn_mean", "sojourn_means")
COMMAND_KEYS = {
    "tpm": PARAMS + ("out",),
    "steady": PARAMS + SOJOURN + ("out",),
    "limiting": PARAMS + SOJOURN + ("out",),
    "transient": PARAMS + ("initial", "steps", "out"),
    "compose": ("eta", "deferred_normalization", "out"),
    "simulate": PARAMS + SOJOURN + ("initial", "horizon", "trajectories", "seed", "workers", "out"),
    "estimate": ("eta", "theta_drop", "theta_forward", "theta_inject", "out"),
    "sweep": ("scenario",) + PARAMS + ("nodes", "grid", "horizon", "metric", "out", "chart"),
}


class UsageError(ValidationError):
    pass


def _add_flags(parser, keys):
    for key in keys:
        flag = "--" + key.replace("_", "-")
        convert = KEYS[key][0]
        if convert is _bool:
            parser.add_argument(flag, dest=key, action="store_true", default=None)
        elif key == "nodes":
            parser.add_argument(flag, dest=key, type=_int_list, metavar="M1,M2,...")
        elif key == "sojourn_means":
            parser.add_argument(flag, dest=key, type=_float_list, metavar="M00,...,M33",
                                help="16 row-major holding-time means")
        elif key == "family":
            parser.add_argument(flag, dest=key, choices=[f.value for f in SojournFamily])
        elif key == "metric":
            parser.add_argument(flag, dest=key, choices=[m.value for m in Metric])
        elif key == "scenario":
            parser.add_argument(flag, dest=key, choices=[s.value for s in Scenario])
        else:
            parser.add_argument(flag, dest=key, type=convert)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ncbm", description="Correlated node behavior model toolkit")
    parser.add_argument("--version", action="version", version=f"ncbm {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "tpm": "print the single-node transition matrix",
        "steady": "stationary vector of the embedded chain",
        "limiting": "limiting (time-weighted) distribution of the semi-Markov process",
        "transient": "state distribution after a number of embedded jumps",
        "compose": "compose a correlated cluster from a member file",
        "simulate": "Monte Carlo occupancy vs the analytic limiting distribution",
        "estimate": "estimate behavior parameters from a traffic log",
        "sweep": "survivability sweep for one scenario",
    }
    for name, keys in COMMAND_KEYS.items():
        p = sub.add_parser(name, help=helps[name])
        p.add_argument("--config", help="key = value config file (default: $NCBM_CONFIG)")
        if name == "compose":
            p.add_argument("members", help="member file with header node_id,a,b,c,d,e")
        if name == "estimate":
            p.add_argument("log", help="traffic log file")
        _add_flags(p, keys)
    return parser


def resolve_settings(args: argparse.Namespace) -> dict:
    """Merge defaults, config file and flags (in increasing priority)."""
    keys = COMMAND_KEYS[args.command]
    settings = {k: KEYS[k][1] for k in keys}
    config_path = args.config or os.environ.get("NCBM_CONFIG")
    if config_path:
        raw = load_config(config_path)
        unknown = sorted(set(raw) - set(KEYS))
        if unknown:
            raise UsageError(f"unknown config key(s): {', '.join(unknown)}")
        for key, text in raw.items():
            if key in settings:
                try:
                    settings[key] = KEYS[key][0](text)
                except ValueError as exc:
                    raise UsageError(f"config key {key}: {exc}") from None
    for key in keys:
        value = getattr(args, key, None)
        if value is not None:
            settings[key] = value
    if "horizon" in settings and settings["horizon"] is None:
        settings["horizon"] = DEFAULT_HORIZON if args.command == "sweep" else 1e4
    if "workers" in settings and settings["workers"] < 1:
        raise UsageError("workers must be >= 1")
    return settings


def _echo(value) -> str:
    if isinstance(value, (list, tuple)):
        return ",".join(fmt(v) for v in value)
    if isinstance(value, bool):
        return "true" if value else "false"
    return fmt(value)


def metadata_line(command: str, settings: dict, extra: dict | None = None) -> str:
    items = {k: v for k, v in settings.items() if k not in NOT_ECHOED and v is not None}
    items.update(extra or {})
    seed = settings.get("seed", KEYS["seed"][1])
    body = " ".join(f"{k}={_echo(v)}" for k, v in items.items() if k != "seed")
    return f"# ncbm {__version__} | command={command} | seed={seed} | {body}".rstrip()


def _params(settings) -> BehaviorParams:
    missing = [k for k in "abcde" if settings.get(k) is None]
    if missing:
        raise UsageError(f"missing parameter(s): {', '.join(missing)}")
    return BehaviorParams(*(settings[k] for k in "abcde"), eta=settings["eta"])


def _sojourn(settings) -> SojournSpec:
    family = SojournFamily(settings["family"])
    if settings.get("sojourn_means") is not None:
        means = settings["sojourn_means"]
        if len(means) != 16:
            raise UsageError(f"sojourn_means needs 16 values, got {len(means)}")
        return SojournSpec(np.reshape(means, (4, 4)), family)
    if not settings["sojourn_mean"] > 0:
        raise UsageError("sojourn_mean must be positive")
    return SojournSpec.uniform(settings["sojourn_mean"], family)


def _emit(text: str, settings: dict, stdout_text: str | None = None) -> None:
    sys.stdout.write(stdout_text if stdout_text is not None else text)
    if settings.get("out"):
        Path(settings["out"]).write_text(text, newline="\n")


def _labelled_matrix(p, labels) -> str:
    width = max(len(fmt(v)) for v in np.ravel(p))
    lines = ["    " + " ".join(label.rjust(width) for label in labels)]
    for label, row in zip(labels, np.asarray(p)):
        lines.append(label.ljust(4) + " ".join(fmt(v).rjust(width) for v in row))
    return "\n".join(lines) + "\n"


def cmd_tpm(settings):
    params = _params(settings)
    p = build_tpm(params)
    meta = metadata_line("tpm", settings)
    _emit(format_matrix(p, STATE_LABELS, [meta]), settings,
          stdout_text=meta + "\n" + _labelled_matrix(p, STATE_LABELS))


def _steady_csv(command, settings):
    p = build_tpm(_params(settings))
    ss = limiting_distribution(p, _sojourn(settings))
    rows = [(label, ss.pi[i], ss.mean_sojourn[i], ss.limiting[i]) for i, label in enumerate(STATE_LABELS)]
    _emit(format_csv(("state", "pi", "mean_sojourn", "limiting"), rows,
                     [metadata_line(command, settings)]), settings)


def cmd_steady(settings):
    _steady_csv("steady", settings)


def cmd_limiting(settings):
    _steady_csv("limiting", settings)


def cmd_transient(settings):
    p = build_tpm(_params(settings))
    if settings["steps"] < 0:
        raise UsageError("steps must be >= 0")
    x = transient_occupancy(p, BehaviorState.parse(settings["initial"]), settings["steps"])
    rows = [(label, x[i]) for i, label in enumerate(STATE_LABELS)]
    _emit(format_csv(("state", "occupancy"), rows, [metadata_line("transient", settings)]), settings)


def cmd_compose(settings, members_path):
    members = read_members(members_path, eta=settings["eta"])
    cluster = compose_cluster([params for _, params in members],
                              deferred=settings["deferred_normalization"])
    funcs = correlated_functions(cluster, strict=False)
    meta = metadata_line("compose", settings, {"members": members_path, "m": len(members)})
    text = format_matrix(cluster.cluster_tpm, CLUSTER_LABELS, [meta])
    for name in ("u", "v", "w", "x"):
        value = getattr(funcs, name)
        note = " (zero denominator)" if value != value else ""
        text += f"# {name} = {fmt(value)}{note}\n"
    _emit(text, settings)


def cmd_simulate(settings):
    p = build_tpm(_params(settings))
    sojourn = _sojourn(settings)
    if settings["trajectories"] < 1:
        raise UsageError("trajectories must be >= 1")
    if not settings["horizon"] > 0:
        raise UsageError("horizon must be positive")
    initial = BehaviorState.parse(settings["initial"])
    analytic = limiting_distribution(p, sojourn, start=initial).limiting
    runs = simulate_many(p, sojourn, initial, settings["horizon"], settings["trajectories"],
                         settings["seed"], workers=settings["workers"])
    est = occupancy_estimate(runs)
    rows = [(label, est.occupancy[i], est.stderr[i], analytic[i], abs(est.occupancy[i] - analytic[i]))
            for i, label in enumerate(STATE_LABELS)]
    _emit(format_csv(("state", "occupancy", "stderr", "analytic_limiting", "abs_error"), rows,
                     [metadata_line("simulate", settings)]), settings)


def _status(params: BehaviorParams, thresholds: StatusThresholds) -> str:
    # d/e enter the classifier as indicators: lost iff d == 1, otherwise up
    lost = 1 if params.d >= 1.0 else 0
    try:
        return classify_status(params.a, params.b, params.c, lost, 1 - lost, thresholds).name
    except Unclassifiable:
        return "unclassified"


def cmd_estimate(settings, log_path):
    thresholds = StatusThresholds(settings["theta_drop"], settings["theta_forward"], settings["theta_inject"])
    records = aggregate_records(read_log(log_path))
    rows = []
    for record in records:
        est = estimate_params(record, settings["eta"], strict=False)
        projected = est.params.as_tuple() if est.params else (None,) * 5
        if est.lifetime is not None:
            l_bar, t_selfish = est.lifetime.avg_lifetime, est.lifetime.t_selfish
        else:
            l_bar = t_selfish = float("nan")
        status = _status(est.params, thresholds) if est.params else "undefined"
        rows.append((record.node_id, *(est.raw[k] for k in "abcde"), *projected,
                     l_bar, t_selfish, status, ";".join(est.flags)))
    columns = ("node_id", "a_raw", "b_raw", "c_raw", "d_raw", "e_raw", "a", "b", "c", "d", "e",
               "L_bar", "t_selfish", "status", "flags")
    meta = metadata_line("estimate", settings, {"log": log_path})
    _emit(format_csv(columns, rows, [meta]), settings)


def _template(settings, scenario) -> BehaviorParams:
    overrides = {k: settings[k] for k in "abcde" if settings.get(k) is not None}
    return default_template(scenario).replace(eta=settings["eta"], **overrides)


def cmd_sweep(settings):
    if settings.get("scenario") is None:
        raise UsageError("missing --scenario")
    scenario = Scenario(settings["scenario"])
    horizon = settings["horizon"]
    if horizon != int(horizon):
        raise UsageError("sweep horizon is a number of embedded steps and must be an integer")
    config = SweepConfig(scenario=scenario, node_counts=settings["nodes"], grid=settings["grid"],
                         fixed_params=_template(settings, scenario), horizon_steps=int(horizon),
                         metric=settings["metric"])
    result = run_sweep(config)
    columns = ("scenario", "m", "param_name", "param_value", "surv_cluster", "surv_independent",
               "horizon_steps")
    rows = [(r.scenario, r.m, r.param_name, r.param_value, r.surv_cluster, r.surv_independent,
             r.horizon_steps) for r in result.rows]
    fixed = config.fixed_params
    extra = {k: getattr(fixed, k) for k in "abcde" if k != scenario.swept}
    settings_echo = {k: v for k, v in settings.items() if k not in "abcde"}
    _emit(format_csv(columns, rows, [metadata_line("sweep", settings_echo, extra)]), settings)
    if settings.get("chart"):
        Path(settings["chart"]).write_text(sweep_chart(result), newline="\n")


def sweep_chart(result) -> str:
    config = result.config
    series = []
    for i, m in enumerate(config.node_counts):
        color = PALETTE[i % len(PALETTE)]
        if config.metric in (Metric.CLUSTER, Metric.BOTH):
            x, y = result.curve(m, Metric.CLUSTER)
            series.append(Series(f"m={m} cluster", list(x), list(y), color=color))
        if config.metric in (Metric.INDEPENDENT, Metric.BOTH):
            x, y = result.curve(m, Metric.INDEPENDENT)
            series.append(Series(f"m={m} independent", list(x), list(y), dashed=True, color=color))
    name = config.scenario.swept
    return line_chart(
        series,
        title=f"Survivability vs {name} ({config.scenario.value}, {config.horizon_steps} steps)",
        xlabel=f"probability {name}",
        ylabel="survivability",
    )


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        settings = resolve_settings(args)
        if args.command == "compose":
            cmd_compose(settings, args.members)
        elif args.command == "estimate":
            cmd_estimate(settings, args.log)
        else:
            globals()[f"cmd_{args.command}"](settings)
    except LogParseError as exc:
        print(f"ncbm: parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except InfeasibleGrid as exc:
        print(f"ncbm: infeasible sweep: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except DegenerateRow as exc:
        print(f"ncbm: degenerate composition: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except NumericalFailure as exc:
        print(f"ncbm: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ValueError, OSError) as exc:
        print(f"ncbm: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
