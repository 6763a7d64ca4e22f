import csv
import io
from abc import abstractmethod

from cavity_cooler.utils import format_float as fmt

from .base_writer import BaseWriter


class CSVWriter(BaseWriter):
    def render(self, payload) -> str:
        buf = io.StringIO()
        out = csv.writer(buf, lineterminator="\n")
        out.writerow(self.header(payload))
        out.writerows(self.rows(payload))
        return buf.getvalue()

    @abstractmethod
    def header(self, payload):
        pass

    @abstractmethod
    def rows(self, payload):
        pass


def _rate_fields(result, nu_si):
    if result is None:
        return ["", "", "", "", ""]
    return [
        fmt(result.a_plus),
        fmt(result.a_minus),
        fmt(result.w),
        fmt(result.w_si(nu_si)),
        fmt(result.n_st),
    ]


class TrajectoryWriter(CSVWriter):
    def header(self, traj):
        return ["t", *(f"p_{n}" for n in range(traj.n_trap)), "mean_n", "pop_e", "pop_photon", "trace_drift"]

    def rows(self, traj):
        for k, t in enumerate(traj.times):
            yield [
                fmt(t),
                *(fmt(p) for p in traj.populations[k]),
                fmt(traj.mean_n[k]),
                fmt(traj.pop_excited[k]),
                fmt(traj.pop_photon[k]),
                fmt(traj.trace_drift[k]),
            ]


class RatesWriter(CSVWriter):
    """Payload: (list of RateResult, nu_si)."""

    def header(self, payload):
        return ["method", "a_plus_nu", "a_minus_nu", "w_nu", "w_si_per_s", "n_st", "fit_residual"]

    def rows(self, payload):
        results, nu_si = payload
        for result in results:
            yield [result.method, *_rate_fields(result, nu_si), fmt(result.fit_residual)]


SWEEP_COLUMNS = ["delta_nu", "delta_c_nu", "a_plus_nu", "a_minus_nu", "w_nu", "w_si_per_s", "n_st", "method", "status"]


def _sweep_rows(grid):
    nu_si = grid.base.nu_si
    for cell in grid.iter_cells():
        yield [fmt(cell.delta), fmt(cell.delta_c), *_rate_fields(cell.result, nu_si), grid.method, cell.status]


class SweepWriter(CSVWriter):
    """Payload: list of SweepGrid (one per method)."""

    def header(self, grids):
        return SWEEP_COLUMNS

    def rows(self, grids):
        for grid in grids:
            yield from _sweep_rows(grid)


class OmegaScanWriter(CSVWriter):
    def header(self, scan):
        return [
            "omega_nu",
            "max_w_nu",
            "max_w_si_per_s",
            "max_w_delta_nu",
            "max_w_delta_c_nu",
            "min_n_st",
            "min_n_st_delta_nu",
            "min_n_st_delta_c_nu",
        ]

    def rows(self, scan):
        for point in scan.points:
            best, coldest = point.extrema.max_w, point.extrema.min_n_st
            yield [
                fmt(point.omega),
                fmt(point.max_w),
                fmt(point.max_w * point.grid.base.nu_si),
                fmt(best.delta),
                fmt(best.delta_c),
                fmt(point.min_n_st),
                fmt(coldest.delta),
                fmt(coldest.delta_c),
            ]


class OmegaScanCellsWriter(CSVWriter):
    def header(self, scan):
        return ["omega_nu", *SWEEP_COLUMNS]

    def rows(self, scan):
        for point in scan.points:
            for row in _sweep_rows(point.grid):
                yield [fmt(point.omega), *row]


class MoleculeWriter(CSVWriter):
    def header(self, rows):
        return [
            "name",
            "point_group",
            "irrep",
            "wavenumber_cm1",
            "dipole_au",
            "mass_amu",
            "gamma_table_s1",
            "gamma_formula_s1",
            "gamma_deviation",
            "eta",
            "g_nu",
            "kappa_nu",
            "gamma_nu",
            "cooperativity",
            "source_anomaly",
        ]

    def rows(self, rows):
        for row in rows:
            m = row.molecule
            yield [
                m.name,
                m.point_group,
                m.irrep,
                fmt(m.wavenumber),
                fmt(m.dipole),
                fmt(m.mass),
                fmt(m.gamma_si),
                fmt(row.gamma_formula),
                fmt(row.gamma_deviation),
                fmt(row.eta),
                fmt(row.g_nu),
                fmt(row.kappa_nu),
                fmt(row.gamma_nu),
                fmt(row.cooperativity),
                "yes" if row.anomaly else "no",
            ]


class ConvergenceWriter(CSVWriter):
    def header(self, report):
        return ["n_trap", "a_plus_nu", "a_minus_nu", "w_nu", "n_st", "converged"]

    def rows(self, report):
        for row in report.rows:
            r = row.result
            converged = report.converged and row.n_trap >= report.converged_at
            yield [row.n_trap, fmt(r.a_plus), fmt(r.a_minus), fmt(r.w), fmt(r.n_st), "yes" if converged else "no"]
