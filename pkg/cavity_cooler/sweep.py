"""
(Δ, δ_c) grids and Ω scans.

Cells are independent: each one replaces only (Δ, δ_c) in the shared base
parameters. Jobs are split statically over the workers (cell k goes to
worker k mod workers) and merged back by index, so results do not depend on
the worker count or on completion order.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from tqdm import tqdm

from cavity_cooler.config import config
from cavity_cooler.errors import NoCoolingCellError, NumericalError, SweepFailedError
from cavity_cooler.model import ModelParams
from cavity_cooler.rates import RATE_METHOD_DICT

logger = logging.getLogger(__name__)

SWEEP = config["sweep"]
STATUS_OK = "ok"


@dataclass
class SweepCell:
    i: int
    j: int
    delta: float
    delta_c: float
    result: object = None
    status: str = STATUS_OK
    error: str = ""

    @property
    def ok(self):
        return self.status == STATUS_OK

    @property
    def cooling(self):
        return self.ok and self.result.w > 0


@dataclass
class SweepGrid:
    delta_axis: np.ndarray
    delta_c_axis: np.ndarray
    cells: list
    method: str
    base: ModelParams

    def iter_cells(self):
        for row in self.cells:
            yield from row

    @property
    def shape(self):
        return len(self.delta_axis), len(self.delta_c_axis)

    def failed_fraction(self):
        cells = list(self.iter_cells())
        return sum(not c.ok for c in cells) / len(cells)

    def matrix(self, quantity):
        """``quantity`` of every cell as a (Δ, δ_c) array; failed cells are NaN."""
        out = np.full(self.shape, math.nan)
        for cell in self.iter_cells():
            if cell.ok:
                out[cell.i, cell.j] = getattr(cell.result, quantity)
        return out


def make_axis(lo, hi, points):
    if points < 1:
        raise ValueError("an axis needs at least one point")
    return np.linspace(lo, hi, points)


def _evaluate_cell(engine, base, job):
    i, j, delta, delta_c = job
    try:
        result = engine.evaluate(base.replace(delta=float(delta), delta_c=float(delta_c)))
    except NumericalError as e:
        logger.warning(f"cell ({i}, {j}) at delta = {delta:.4g}, delta_c = {delta_c:.4g} failed: {e}")
        return SweepCell(i, j, float(delta), float(delta_c), status=type(e).__name__, error=str(e))
    return SweepCell(i, j, float(delta), float(delta_c), result=result)


def _run_partition(engine, base, jobs, bar):
    cells = []
    for job in jobs:
        cells.append(_evaluate_cell(engine, base, job))
        bar.update(1)
    return cells


def run_sweep(
    base: ModelParams,
    delta_axis,
    delta_c_axis,
    method="numeric",
    engine=None,
    workers=1,
    progress=False,
    max_failed_fraction=SWEEP["max_failed_fraction"],
) -> SweepGrid:
    delta_axis = np.asarray(delta_axis, dtype=float)
    delta_c_axis = np.asarray(delta_c_axis, dtype=float)
    if delta_axis.size == 0 or delta_c_axis.size == 0:
        raise ValueError("sweep axes must not be empty")
    engine = engine or RATE_METHOD_DICT[method]()
    workers = max(1, int(workers))

    jobs = [(i, j, d, dc) for i, d in enumerate(delta_axis) for j, dc in enumerate(delta_c_axis)]
    partitions = [jobs[k::workers] for k in range(workers)]
    merged = {}
    with tqdm(total=len(jobs), desc=f"{engine.name} sweep", unit="cell", disable=not progress) as bar:
        if workers == 1:
            done = [_run_partition(engine, base, jobs, bar)]
        else:
            with ThreadPoolExecutor(max_workers=workers) as executor:
                futures = [executor.submit(_run_partition, engine, base, part, bar) for part in partitions]
                done = [f.result() for f in futures]
    for part in done:
        for cell in part:
            merged[(cell.i, cell.j)] = cell

    cells = [[merged[(i, j)] for j in range(delta_c_axis.size)] for i in range(delta_axis.size)]
    grid = SweepGrid(delta_axis=delta_axis, delta_c_axis=delta_c_axis, cells=cells, method=engine.name, base=base)
    failed = grid.failed_fraction()
    if failed > max_failed_fraction:
        raise SweepFailedError(f"{failed:.0%} of the cells failed (limit {max_failed_fraction:.0%})", grid=grid)
    return grid


@dataclass
class Extrema:
    max_w: SweepCell
    min_n_st: SweepCell


def _tie_break(cell):
    # smallest |δ_c|, then closest to the free-space sideband Δ = −ν, then lowest index
    return abs(cell.delta_c), abs(cell.delta + 1.0), cell.i, cell.j


def find_extrema(grid: SweepGrid) -> Extrema:
    cooling = [c for c in grid.iter_cells() if c.cooling]
    if not cooling:
        raise NoCoolingCellError("the grid has no cooling cell")
    max_w = min(cooling, key=lambda c: (-c.result.w, *_tie_break(c)))
    min_n_st = min(cooling, key=lambda c: (c.result.n_st, *_tie_break(c)))
    return Extrema(max_w=max_w, min_n_st=min_n_st)


@dataclass
class OmegaPoint:
    omega: float
    extrema: Extrema
    grid: SweepGrid

    @property
    def max_w(self):
        return self.extrema.max_w.result.w

    @property
    def min_n_st(self):
        return self.extrema.min_n_st.result.n_st


@dataclass
class OmegaScan:
    omega_axis: np.ndarray
    points: list


def run_omega_scan(
    base: ModelParams,
    omega_axis,
    delta_axis,
    delta_c_axis,
    method="numeric",
    engine=None,
    workers=1,
    progress=False,
    max_failed_fraction=SWEEP["max_failed_fraction"],
) -> OmegaScan:
    omega_axis = np.asarray(omega_axis, dtype=float)
    if omega_axis.size == 0 or omega_axis[0] <= 0 or np.any(np.diff(omega_axis) <= 0):
        raise ValueError("omega axis must be positive and strictly increasing")
    engine = engine or RATE_METHOD_DICT[method]()

    points = []
    for omega in tqdm(omega_axis, desc="omega scan", disable=not progress):
        grid = run_sweep(
            base.replace(omega=float(omega)),
            delta_axis,
            delta_c_axis,
            engine=engine,
            workers=workers,
            progress=progress,
            max_failed_fraction=max_failed_fraction,
        )
        points.append(OmegaPoint(omega=float(omega), extrema=find_extrema(grid), grid=grid))
    return OmegaScan(omega_axis=omega_axis, points=points)
