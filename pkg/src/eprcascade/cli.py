"""Command-line interface: scenario runs, sweeps, engine comparison, regime
validation, CSV emission.

Subcommands
-----------
run       integrate one scenario (all variants) and emit a trajectory CSV
sweep     evaluate per-point reductions over a swept parameter
compare   run several engines on one scenario and report sup-norm gaps
validate  evaluate the approximation-validity report for a physical block

Exit codes: 0 success, 2 validation/configuration error, 3 numerical failure
(non-finite state or truncation overflow), 4 I/O error.

CSV conventions: first column ``t`` (``Gamma1_t`` for the reduced-model
engines), floats printed with 12 significant digits, ``#`` comment header
carrying scenario name and engine.  A timestamp comment is included unless
``--reproducible`` is given, so reproducible bodies are byte-identical.
"""

from __future__ import annotations

import argparse
import datetime
import json
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import analytic, fock, moments, regime, scenario as scenario_mod
from .errors import (
    ConfigurationError,
    IntegrationError,
    SimulationError,
    TruncationError,
)
from .moments import MODES_FULL, MODES_REDUCED

__all__ = ["main"]

_REDUCED_ENGINES = ("analytic", "adiabatic")
_DEFAULT_COLUMNS = {
    "analytic": ("var_minus", "var_plus", "n1", "n2"),
    "adiabatic": ("var_minus", "var_plus", "n1", "n2"),
    "full": ("var_minus", "var_plus", "n1", "n2", "cavity_n1", "cavity_n2"),
    "fock": ("var_minus", "var_plus", "n1", "n2", "cavity_n1", "cavity_n2"),
}
_QUAD_EXTRAS = ("p_var_minus", "p_var_plus")
_AVAILABLE_COLUMNS = {
    "analytic": _DEFAULT_COLUMNS["analytic"],
    "adiabatic": _DEFAULT_COLUMNS["adiabatic"] + _QUAD_EXTRAS,
    "full": _DEFAULT_COLUMNS["full"] + _QUAD_EXTRAS,
    "fock": _DEFAULT_COLUMNS["fock"] + _QUAD_EXTRAS,
}


# ---------------------------------------------------------------------------
# engine drivers


def _analytic_series(scn, grid):
    rates, eps, dphi = scn.reduced()
    if dphi != 0.0:
        raise ConfigurationError(
            "analytic engine: closed forms require delta_phi = 0 "
            "(use the adiabatic engine)")
    n1_0, n2_0 = scn.initial_nbars()
    if n1_0 != 0.0 or n2_0 != 0.0:
        raise ConfigurationError(
            "analytic engine: closed forms start from the motional vacuum")
    g1, g2 = rates.gamma1, rates.gamma2
    return {
        "var_minus": analytic.epr_variance(g1, g2, eps, grid, sign="-"),
        "var_plus": analytic.epr_variance(g1, g2, eps, grid, sign="+"),
        "n1": analytic.occupation_mode1(g1, grid),
        "n2": analytic.occupation_mode2(g1, g2, eps, grid),
    }


def _trajectory_series(traj, names):
    return {name: traj.series(name) for name in names}


def _run_one(engine, scn, grid):
    """Return (series mapping, gamma1-or-None) for one engine run."""
    if engine == "analytic":
        rates, _, _ = scn.reduced()
        return _analytic_series(scn, grid), rates.gamma1
    if engine == "adiabatic":
        rates, eps, dphi = scn.reduced()
        n1_0, n2_0 = scn.initial_nbars()
        initial = moments.thermal_state(
            MODES_REDUCED, {"b1": n1_0, "b2": n2_0})
        traj = moments.integrate_adiabatic(
            rates, grid, initial=initial, eps=eps, dphi=dphi)
        return _trajectory_series(traj, _AVAILABLE_COLUMNS["adiabatic"]), rates.gamma1
    if engine == "full":
        p = scn.effective()
        n1_0, n2_0 = scn.initial_nbars()
        initial = moments.thermal_state(MODES_FULL, {"b1": n1_0, "b2": n2_0})
        traj = moments.integrate_full(p, grid, initial=initial)
        return _trajectory_series(traj, _AVAILABLE_COLUMNS["full"]), None
    if engine == "fock":
        p = scn.effective()
        space = fock.cascade_space(scn.fock_cutoffs())
        n1_0, n2_0 = scn.initial_nbars()
        rho0 = space.thermal({"b1": n1_0, "b2": n2_0})
        traj = fock.evolve(rho0, p, grid)
        if not traj.valid:
            raise TruncationError(
                "truncation indicator tripped "
                f"(top-level population >= {fock.TOP_POPULATION_LIMIT:g})",
                t=traj.first_invalid_time,
            )
        return _trajectory_series(traj, _AVAILABLE_COLUMNS["fock"]), None
    raise ConfigurationError(f"unknown engine {engine!r}")


def _time_column(engine, scn, grid):
    """(column name, values): reduced engines report dimensionless time."""
    if engine in _REDUCED_ENGINES:
        rates, _, _ = scn.reduced()
        return "Gamma1_t", rates.gamma1 * grid
    return "t", grid


def _select_columns(scn, engine):
    requested = scn.columns()
    if requested is None:
        return list(_DEFAULT_COLUMNS[engine])
    available = _AVAILABLE_COLUMNS[engine]
    for name in requested:
        if name not in available:
            raise ConfigurationError(
                f"column {name!r} not available for engine {engine!r} "
                f"(choose from {available})")
    return list(requested)


# ---------------------------------------------------------------------------
# CSV output


def _fmt(value):
    if value is None:
        return ""
    if isinstance(value, str):
        return value
    return f"{value:.12g}"


def _emit_csv(args, comments, header, rows):
    lines = [f"# {c}" for c in comments]
    if not args.reproducible:
        stamp = datetime.datetime.now(datetime.timezone.utc).isoformat()
        lines.append(f"# generated: {stamp}")
    lines.append(",".join(header))
    lines.extend(",".join(_fmt(v) for v in row) for row in rows)
    text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _say(args, message):
    # keep stdout clean when the CSV itself goes there
    stream = sys.stdout if args.out else sys.stderr
    print(message, file=stream)


# ---------------------------------------------------------------------------
# subcommands


def _cmd_run(args):
    scn = scenario_mod.load(args.scenario)
    engine = args.engine or scn.engine
    if engine not in scenario_mod.ENGINES:
        raise ConfigurationError(f"unknown engine {engine!r}")

    variants = scn.variant_scenarios()
    grid = variants[0][1].grid_array()
    for label, var in variants[1:]:
        if var.grid_array().shape != grid.shape or not np.array_equal(
                var.grid_array(), grid):
            raise ConfigurationError(
                f"variant {label!r} changes the time grid; variants must share it")

    tname, tvalues = _time_column(engine, variants[0][1], grid)
    header = [tname]
    columns = []
    for label, var in variants:
        series, _ = _run_one(engine, var, grid)
        names = _select_columns(var, engine)
        for name in names:
            suffix = f"__{label}" if label else ""
            header.append(f"{name}{suffix}")
            columns.append(series[name])
        vm = series["var_minus"]
        idx = int(np.argmin(vm))
        tag = f"[{label}] " if label else ""
        _say(args, f"{tag}min var_minus = {vm[idx]:.6g} at {tname} = "
                   f"{tvalues[idx]:.6g} (n1 = {series['n1'][idx]:.6g}, "
                   f"n2 = {series['n2'][idx]:.6g})")

    step = scn.downsample()
    rows = [
        [tvalues[i]] + [col[i] for col in columns]
        for i in range(0, grid.size, step)
    ]
    _emit_csv(args, [f"scenario: {scn.name}", f"engine: {engine}"],
              header, rows)
    return 0


def _sweep_point_dict(scn, spec, value):
    data = scn.to_dict()
    data["variants"] = None
    data["sweep"] = None
    if spec.parameter in ("lambda", "epsilon"):
        if data.get("rates") is None:
            raise ConfigurationError(
                f"sweep.parameter {spec.parameter!r} needs a rates block")
        if spec.parameter == "lambda":
            data["rates"]["gamma2"] = value * data["rates"]["gamma1"]
        else:
            data["rates"]["epsilon"] = value
        return scenario_mod.from_dict(data)
    if data.get("effective") is None:
        raise ConfigurationError(
            f"sweep.parameter {spec.parameter!r} needs an effective block")
    if spec.parameter == "omega":
        data["effective"]["omega1"] = {"type": "constant", "omega": value}
        data["effective"]["omega2"] = {"type": "constant", "omega": value}
        return scenario_mod.from_dict(data)
    # tau: reshape the ramp of the first drive
    omega1 = data["effective"]["omega1"]
    if omega1.get("type") != "sine_ramp":
        raise ConfigurationError(
            "sweep.parameter 'tau' needs a sine_ramp omega1 schedule")
    omega1["tau"] = value
    return scenario_mod.from_dict(data)


def _sweep_reductions(engine, scn, spec):
    """Mapping reduction name -> value (None marks undefined) plus status."""
    out = {}
    status = "ok"
    if engine == "analytic":
        rates, eps, _ = scn.reduced()
        lam = rates.ratio
        closed = {}
        try:
            closed["min_variance"] = analytic.min_variance(lam, eps)
            closed["t_min"] = analytic.t_min(lam, eps, 1.0)
        except analytic.NoMinimumBelowVacuum:
            closed["min_variance"] = None
            closed["t_min"] = None
            status = "no_minimum"
        for red in spec.reductions:
            if red in closed:
                out[red] = closed[red]
        if "n1_at_threshold" in spec.reductions:
            grid = scn.grid_array()
            vm = analytic.epr_variance(
                rates.gamma1, rates.gamma2, eps, grid, sign="-")
            t_cross, _ = moments.first_crossing(grid, vm, spec.threshold)
            if t_cross is None:
                out["n1_at_threshold"] = None
                status = "no_crossing" if status == "ok" else status
            else:
                out["n1_at_threshold"] = float(np.interp(
                    t_cross, grid, analytic.occupation_mode1(rates.gamma1, grid)))
        return out, status

    grid = scn.grid_array()
    series, gamma1 = _run_one(engine, scn, grid)
    vm = series["var_minus"]
    scale = gamma1 if engine in _REDUCED_ENGINES else 1.0
    if "min_variance" in spec.reductions:
        out["min_variance"] = float(np.min(vm))
    if "t_min" in spec.reductions:
        out["t_min"] = float(scale * grid[int(np.argmin(vm))])
    if "n1_at_threshold" in spec.reductions:
        t_cross, _ = moments.first_crossing(grid, vm, spec.threshold)
        if t_cross is None:
            out["n1_at_threshold"] = None
            status = "no_crossing"
        else:
            out["n1_at_threshold"] = float(
                np.interp(t_cross, grid, series["n1"]))
    return out, status


def _cmd_sweep(args):
    scn = scenario_mod.load(args.scenario)
    engine = args.engine or scn.engine
    spec = scn.sweep
    if spec is None:
        raise ConfigurationError("scenario has no sweep block")

    def point(value):
        pscn = _sweep_point_dict(scn, spec, value)
        return _sweep_reductions(engine, pscn, spec)

    values = list(spec.values)
    if args.threads and args.threads > 1:
        with ThreadPoolExecutor(max_workers=args.threads) as pool:
            results = list(pool.map(point, values))
    else:
        results = [point(v) for v in values]

    tname = ("Gamma1_t_min" if engine in _REDUCED_ENGINES else "t_min")
    header = [spec.parameter]
    for red in spec.reductions:
        header.append(tname if red == "t_min" else red)
    header.append("status")
    rows = []
    for value, (reductions, status) in zip(values, results):
        row = [value] + [reductions.get(red) for red in spec.reductions]
        row.append(status)
        rows.append(row)
    _emit_csv(args, [f"scenario: {scn.name}", f"engine: {engine}",
                     f"sweep: {spec.parameter}"], header, rows)
    return 0


def _cmd_compare(args):
    scn = scenario_mod.load(args.scenario)
    engines = [e.strip() for e in (args.engine or "").split(",") if e.strip()]
    if len(engines) < 2:
        raise ConfigurationError(
            "compare needs --engine with a comma-separated list of two or "
            "more engines")
    for engine in engines:
        if engine not in scenario_mod.ENGINES:
            raise ConfigurationError(f"unknown engine {engine!r}")

    variants = scn.variant_scenarios()
    grid = variants[0][1].grid_array()
    header = ["t"]
    columns = []
    gaps = []
    for label, var in variants:
        per_engine = {}
        for engine in engines:
            try:
                series, _ = _run_one(engine, var, grid)
            except ConfigurationError as exc:
                raise ConfigurationError(
                    f"engine {engine!r} incompatible with scenario "
                    f"{scn.name!r}: {exc}") from exc
            per_engine[engine] = series
        names = scn.columns() or ["var_minus", "var_plus", "n1", "n2"]
        for name in names:
            for engine in engines:
                if name not in per_engine[engine]:
                    raise ConfigurationError(
                        f"column {name!r} not available for engine {engine!r}")
                suffix = f"__{label}" if label else ""
                header.append(f"{name}{suffix}__{engine}")
                columns.append(per_engine[engine][name])
        for i, first in enumerate(engines):
            for second in engines[i + 1:]:
                for name in names:
                    a = per_engine[first][name]
                    b = per_engine[second][name]
                    gap = float(np.max(np.abs(a - b)))
                    denom = float(np.max(np.abs(b)))
                    rel = gap / denom if denom > 0 else 0.0
                    tag = f"[{label}] " if label else ""
                    gaps.append(
                        f"{tag}gap[{name}] {first} vs {second}: "
                        f"max abs = {gap:.6g}, max rel = {rel:.6g}")
    for line in gaps:
        _say(args, line)
    rows = [[grid[i]] + [col[i] for col in columns]
            for i in range(0, grid.size, scn.downsample())]
    _emit_csv(args, [f"scenario: {scn.name}",
                     f"engines: {', '.join(engines)}"], header, rows)
    return 0


def _cmd_validate(args):
    # the report is the primary output here, so it always goes to stdout
    scn = scenario_mod.load(args.scenario)
    params, nbar_max = scn.physical()
    report = regime.full_report(params, nbar_max)
    for cond in report.conditions:
        verdict = "PASS" if cond.passed else "FAIL"
        print(f"{cond.name}: value = {cond.value:.6g}, threshold = "
              f"{cond.threshold:.6g}, margin = {cond.margin:.6g} [{verdict}]")
    derived = ", ".join(
        f"{k} = {v:.6g}" for k, v in sorted(report.derived.items()))
    print(f"derived: {derived}")
    print(f"all conditions pass: {report.all_pass}")
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            json.dump(report.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")
    return 0


# ---------------------------------------------------------------------------
# entry point


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="eprcascade",
        description="Cascaded two-cavity EPR entanglement simulator",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, engine_help):
        p.add_argument("scenario", help="path to a scenario YAML file")
        p.add_argument("--engine", help=engine_help)
        p.add_argument("--out", help="output file path (default: stdout)")
        p.add_argument("--reproducible", action="store_true",
                       help="omit the timestamp comment from the output")

    p_run = sub.add_parser("run", help="integrate a scenario, emit CSV")
    common(p_run, "override the scenario's engine")
    p_run.set_defaults(func=_cmd_run)

    p_sweep = sub.add_parser("sweep", help="sweep a parameter, emit a table")
    common(p_sweep, "override the scenario's engine")
    p_sweep.add_argument("--threads", type=int, default=1,
                         help="run sweep points in parallel")
    p_sweep.set_defaults(func=_cmd_sweep)

    p_cmp = sub.add_parser("compare", help="run several engines, report gaps")
    common(p_cmp, "comma-separated engine list (required)")
    p_cmp.set_defaults(func=_cmd_compare)

    p_val = sub.add_parser("validate", help="approximation-validity report")
    p_val.add_argument("scenario", help="path to a scenario YAML file")
    p_val.add_argument("--out", help="write the report as JSON")
    p_val.set_defaults(func=_cmd_validate)
    p_val.set_defaults(reproducible=True)
    return parser


def main(argv=None):
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except TruncationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except IntegrationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except ConfigurationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except SimulationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
