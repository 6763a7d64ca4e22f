import argparse
import json
import logging
import sys
from datetime import datetime, timezone

from rich import print
from rich.console import Console
from rich.logging import RichHandler
from rich.table import Table

from cavity_cooler.config import config
from cavity_cooler.dynamics import convergence_scan, default_time_step, propagate
from cavity_cooler.errors import ConfigError, CoolerError, NoCoolingCellError, PartialSweepFailure
from cavity_cooler.model import build_liouvillian
from cavity_cooler.molecules import molecule_report
from cavity_cooler.rates import RATE_METHOD_DICT
from cavity_cooler.rates.compare import compare_methods
from cavity_cooler.run_config import METHODS, MODES, load_config
from cavity_cooler.sweep import find_extrema, run_omega_scan, run_sweep
from cavity_cooler.utils import format_float, tool_version
from cavity_cooler.writer import WRITER_DICT

logger = logging.getLogger(__name__)

HEATMAP_QUANTITIES = ("w", "n_st")


def _methods(method):
    return ("numeric", "perturbative") if method == "both" else (method,)


def _engine(run, method):
    if method == "numeric":
        return run.numeric_engine()
    return RATE_METHOD_DICT[method]()


def _save(kind, out_dir, name, payload):
    path = WRITER_DICT[kind](out_dir, name).save(payload)
    logger.info(f"wrote {path}")
    return path


def _rate_table(title, results, nu_si):
    table = Table(title=title)
    for column in ("method", "A+ [ν]", "A- [ν]", "W [ν]", "W [1/s]", "<n>_st"):
        table.add_column(column)
    for r in results:
        table.add_row(r.method, f"{r.a_plus:.6g}", f"{r.a_minus:.6g}", f"{r.w:.6g}", f"{r.w_si(nu_si):.6g}", f"{r.n_st:.6g}")
    return table


def run_simulate(run, options):
    params = run.params
    settings = run.propagation_settings()
    engine = run.numeric_engine()
    dt = settings.dt or default_time_step(params)
    t_end = engine.horizon(params)
    traj = propagate(
        settings.initial.build(params.layout),
        build_liouvillian(params),
        dt,
        t_end,
        record_every=settings.record_every,
        engine=settings.engine,
    )
    _save("trajectory", options.out_dir, "trajectory", traj)
    if not options.quiet:
        print(
            f"[bold]simulate[/bold] t_end = {t_end:.6g}, <n>(0) = {traj.mean_n[0]:.6g}, "
            f"<n>(t_end) = {traj.mean_n[-1]:.6g}, max trace drift = {traj.trace_drift.max():.2e}"
        )


def run_rates(run, options):
    params = run.params
    if run.method == "both":
        report = compare_methods(params, numeric=run.numeric_engine())
        results = [report.perturbative, report.numeric]
        if params.omega > config["comparison"]["omega_validity"]:
            logger.warning(f"omega = {params.omega:g} is outside the weak-drive range of the perturbative rates")
    else:
        results = [_engine(run, run.method).evaluate(params)]
        report = None
    _save("rates", options.out_dir, "rates", (results, params.nu_si))
    if options.quiet:
        return
    print(_rate_table("rates", results, params.nu_si))
    if report is not None:
        deviations = ", ".join(f"{k} {v:+.2%}" for k, v in report.deviations.items())
        verdict = "[green]agree[/green]" if report.agreement else "[yellow]differ[/yellow]"
        print(f"numeric vs perturbative: {deviations} -> {verdict}")


def _print_extrema(grid):
    try:
        extrema = find_extrema(grid)
    except NoCoolingCellError:
        logger.warning(f"{grid.method} grid has no cooling cell")
        return
    best, coldest = extrema.max_w, extrema.min_n_st
    print(
        f"[bold]{grid.method}[/bold] max W = {best.result.w:.6g} at (Δ, δ_c) = ({best.delta:g}, {best.delta_c:g}); "
        f"min <n>_st = {coldest.result.n_st:.6g} at ({coldest.delta:g}, {coldest.delta_c:g})"
    )


def run_sweep_mode(run, options):
    grids = []
    for method in _methods(run.method):
        grid = run_sweep(
            run.params,
            run.delta_axis(),
            run.delta_c_axis(),
            engine=_engine(run, method),
            workers=run.workers,
            progress=not options.quiet,
        )
        grids.append(grid)
    _save("sweep", options.out_dir, "sweep", grids)
    if run.svg:
        for grid in grids:
            suffix = f"_{grid.method}" if len(grids) > 1 else ""
            for quantity in HEATMAP_QUANTITIES:
                _save("heatmap", options.out_dir, f"sweep_{quantity}{suffix}", (grid, quantity))
    if not options.quiet:
        for grid in grids:
            _print_extrema(grid)
    return [cell for grid in grids for cell in grid.iter_cells() if not cell.ok]


def run_omega_scan_mode(run, options):
    method = _methods(run.method)[0]
    if run.method == "both":
        logger.warning("omega-scan runs one method; using numeric")
    scan = run_omega_scan(
        run.params,
        run.omega_axis,
        run.delta_axis(),
        run.delta_c_axis(),
        engine=_engine(run, method),
        workers=run.workers,
        progress=not options.quiet,
    )
    _save("omega_scan", options.out_dir, "omega_scan", scan)
    _save("omega_scan_cells", options.out_dir, "omega_scan_cells", scan)
    if not options.quiet:
        table = Table(title=f"{method} Ω scan")
        for column in ("Ω [ν]", "max W [ν]", "at (Δ, δ_c)", "min <n>_st", "at (Δ, δ_c)"):
            table.add_column(column)
        for point in scan.points:
            best, coldest = point.extrema.max_w, point.extrema.min_n_st
            table.add_row(
                f"{point.omega:g}",
                f"{point.max_w:.6g}",
                f"({best.delta:g}, {best.delta_c:g})",
                f"{point.min_n_st:.6g}",
                f"({coldest.delta:g}, {coldest.delta_c:g})",
            )
        print(table)
    return [cell for point in scan.points for cell in point.grid.iter_cells() if not cell.ok]


def run_molecule(run, options):
    molecules = run.molecules()
    name = run.values["molecule"]
    if name is not None:
        if name not in molecules:
            raise ConfigError(f"unknown molecule {name!r}, available: {', '.join(molecules)}")
        molecules = {name: molecules[name]}
    rows = molecule_report(run.trap(), run.cavity(), molecules)
    _save("molecules", options.out_dir, "molecules", rows)
    if options.quiet:
        return
    table = Table(title="molecules")
    for column in ("name", "Γ table [1/s]", "Γ formula [1/s]", "dev", "η", "g [ν]", "κ [ν]", "γ [ν]", "C₁"):
        table.add_column(column)
    for row in rows:
        name = f"{row.molecule.name} (anomaly)" if row.anomaly else row.molecule.name
        table.add_row(
            name,
            f"{row.molecule.gamma_si:.4g}",
            f"{row.gamma_formula:.4g}",
            f"{row.gamma_deviation:+.1%}",
            f"{row.eta:.4g}",
            f"{row.g_nu:.4g}",
            f"{row.kappa_nu:.4g}",
            f"{row.gamma_nu:.3e}",
            f"{row.cooperativity:.4g}",
        )
    print(table)


def run_convergence(run, options):
    report = convergence_scan(
        run.params,
        run.initial_state(),
        run.n_trap_list,
        tolerance=run.tolerance,
        progress=not options.quiet,
        engine=run.numeric_engine(),
    )
    _save("convergence", options.out_dir, "convergence", report)
    if not report.converged:
        logger.warning(f"W did not settle within {report.tolerance:.0%} over n_trap = {run.n_trap_list}")
    if options.quiet:
        return
    table = Table(title="truncation convergence")
    for column in ("n_trap", "W [ν]", "<n>_st"):
        table.add_column(column)
    for row in report.rows:
        table.add_row(str(row.n_trap), format_float(row.result.w), format_float(row.result.n_st))
    print(table)
    if report.converged:
        print(f"converged at n_trap = {report.converged_at}")


MODE_DICT = {
    "simulate": run_simulate,
    "rates": run_rates,
    "sweep": run_sweep_mode,
    "omega-scan": run_omega_scan_mode,
    "molecule": run_molecule,
    "convergence": run_convergence,
}


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--config",
        dest="config",
        type=str,
        required=True,
        help="path of the run file",
    )
    common.add_argument(
        "--out",
        dest="out",
        type=str,
        help="output directory, overrides `output` of the run file",
    )
    common.add_argument(
        "--method",
        dest="method",
        type=str,
        choices=METHODS,
        help="rate engine, overrides `method` of the run file",
    )
    common.add_argument(
        "--svg",
        dest="svg",
        action="store_true",
        default=None,
        help="also write SVG heatmaps for sweeps",
    )
    common.add_argument(
        "--workers",
        dest="workers",
        type=int,
        help="sweep worker threads",
    )
    common.add_argument(
        "--seed",
        dest="seed",
        type=int,
        help="seed recorded in the manifest; the physics is deterministic",
    )
    common.add_argument(
        "--verbose",
        dest="verbose",
        action="store_true",
        help="log at INFO level",
    )
    common.add_argument(
        "--quiet",
        dest="quiet",
        action="store_true",
        help="no progress bars and no console report",
    )

    parser = argparse.ArgumentParser(
        prog="cavity_cooler",
        description="cavity-assisted laser cooling of trapped molecules",
    )
    subparsers = parser.add_subparsers(dest="mode", required=True)
    for mode in MODES:
        subparsers.add_parser(mode, parents=[common])
    return parser


def _report_error(e: CoolerError):
    line = {"error": str(e), "kind": type(e).__name__, "exit_code": e.exit_code}
    sys.stderr.write(json.dumps(line) + "\n")
    return e.exit_code


def main(argv=None):
    options = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if options.verbose else logging.WARNING,
        format="%(message)s",
        handlers=[RichHandler(console=Console(stderr=True))],
    )

    try:
        run = load_config(options.config)
        if run.mode != options.mode:
            raise ConfigError(f"subcommand {options.mode!r} does not match mode = {run.mode} of {options.config}")
        if options.workers is not None and options.workers < 1:
            raise ConfigError("--workers must be >= 1")
        run = run.with_overrides(
            output=options.out,
            method=options.method,
            svg=options.svg,
            workers=options.workers,
            seed=options.seed,
        )
        options.out_dir = run.output_dir()
        failed = MODE_DICT[run.mode](run, options)
        timestamp = datetime.now(timezone.utc).isoformat(timespec="seconds")
        _save("manifest", options.out_dir, "manifest", (run, tool_version(), timestamp))
        if failed:
            raise PartialSweepFailure(f"{len(failed)} sweep cells failed; see the status column")
    except CoolerError as e:
        sys.exit(_report_error(e))


if __name__ == "__main__":
    main()
