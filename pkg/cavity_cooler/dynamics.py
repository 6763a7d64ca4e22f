"""
Fixed-step RK4 propagation of the master equation.

The generator is time-independent, so one RK4 step of length h is the fixed
linear map P = 1 + hL + (hL)²/2 + (hL)³/6 + (hL)⁴/24. The ``power`` engine
raises P to the number of steps between two samples and applies the result
once per sample; the ``stepwise`` engine evaluates the four stages each step.
"""

import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np
from tqdm import tqdm

from cavity_cooler.config import config
from cavity_cooler.errors import LayoutError, NonFiniteError, StepSizeError, TraceDriftError
from cavity_cooler.hilbert import (
    POSITIVITY_TOL,
    DensityMatrix,
    HilbertLayout,
    InitialState,
    build_elementary,
    devectorize,
    partial_trace_trap,
    vectorize,
)
from cavity_cooler.model import KIND_FULL, LiouvillianMatrix, ModelParams

logger = logging.getLogger(__name__)

NUMERICS = config["numerics"]
TRACE_DRIFT_TOL = 1e-8
POPULATION_TOL = 1e-6
STEP_GUARD = 0.1
ENGINES = ("power", "stepwise")


@dataclass
class Trajectory:
    times: np.ndarray
    populations: np.ndarray
    mean_n: np.ndarray
    trace_drift: np.ndarray
    pop_excited: np.ndarray
    pop_photon: np.ndarray
    min_eigenvalue: np.ndarray
    final_state: DensityMatrix = None

    @property
    def n_trap(self):
        return self.populations.shape[1]

    def check(self, tol=POPULATION_TOL):
        if self.times[0] != 0 or np.any(np.diff(self.times) <= 0):
            raise ValueError("trajectory times must start at 0 and increase strictly")
        defect = np.max(np.abs(self.populations.sum(axis=1) - 1.0))
        if defect > tol:
            raise TraceDriftError(f"trap populations sum to 1 only within {defect:.3e}")
        return self

    def window(self, t_min):
        keep = self.times >= t_min
        return replace(
            self,
            times=self.times[keep],
            populations=self.populations[keep],
            mean_n=self.mean_n[keep],
            trace_drift=self.trace_drift[keep],
            pop_excited=self.pop_excited[keep],
            pop_photon=self.pop_photon[keep],
            min_eigenvalue=self.min_eigenvalue[keep],
        )


@dataclass(frozen=True)
class PropagationSettings:
    # None: derived from the parameter set (dt) or the perturbative estimate (t_end)
    dt: float = None
    t_end: float = None
    record_every: int = NUMERICS["record_every"]
    engine: str = "power"
    initial: InitialState = field(default_factory=InitialState)

    def __post_init__(self):
        if self.engine not in ENGINES:
            raise LayoutError(f"unknown propagation engine {self.engine!r}")
        if self.record_every < 1:
            raise LayoutError("record_every must be >= 1")


def default_time_step(params: ModelParams):
    return NUMERICS["dt_kappa_fraction"] / params.fastest_rate


def rk4_step_matrix(matrix, h):
    hl = h * matrix
    eye = np.eye(matrix.shape[0], dtype=complex)
    return eye + hl @ (eye + hl @ (eye + hl @ (eye + hl / 4) / 3) / 2)


def _restore_trace(m, diag, trace_target):
    defect = m[diag, :].sum(axis=0) - trace_target
    m[diag, :] -= defect / len(diag)
    return m


def trace_preserving_power(step, k, dim):
    """step**k by binary powering; the trace functional is re-imposed after every product."""
    diag = np.arange(dim) * (dim + 1)
    target = np.zeros(step.shape[0])
    target[diag] = 1.0
    result = np.eye(step.shape[0], dtype=complex)
    base = step.copy()
    while k:
        if k & 1:
            result = _restore_trace(result @ base, diag, target)
        k >>= 1
        if k:
            base = _restore_trace(base @ base, diag, target)
    return result


def _symmetrize(vec_rho):
    rho = devectorize(vec_rho)
    return vectorize(0.5 * (rho + rho.conj().T))


def _observables(layout: HilbertLayout):
    ops = build_elementary(layout)
    return np.diag(ops.excited).real, np.diag(ops.photon_number).real


def propagate(
    rho0: DensityMatrix,
    liouvillian: LiouvillianMatrix,
    dt,
    t_end,
    record_every=NUMERICS["record_every"],
    engine="power",
) -> Trajectory:
    layout = rho0.layout
    if liouvillian.kind != KIND_FULL or liouvillian.dim != layout.dim:
        raise LayoutError("propagation needs the full Liouvillian on the state's layout")
    if dt <= 0 or t_end <= 0:
        raise StepSizeError("dt and t_end must be positive")
    if dt > STEP_GUARD / liouvillian.fastest_rate * (1 + 1e-12):
        raise StepSizeError(
            f"dt = {dt:.3g} exceeds the stability guard {STEP_GUARD / liouvillian.fastest_rate:.3g}"
        )
    if engine not in ENGINES:
        raise LayoutError(f"unknown propagation engine {engine!r}")

    dim = layout.dim
    sample_dt = t_end / record_every
    steps = max(1, math.ceil(sample_dt / dt - 1e-9))
    h = sample_dt / steps
    times = np.linspace(0.0, t_end, record_every + 1)
    pe_diag, pc_diag = _observables(layout)

    populations = np.empty((record_every + 1, layout.n_trap))
    drift = np.empty(record_every + 1)
    pop_e = np.empty(record_every + 1)
    pop_c = np.empty(record_every + 1)
    min_eig = np.empty(record_every + 1)

    def record(i, vec_rho):
        if not np.all(np.isfinite(vec_rho)):
            raise NonFiniteError(f"non-finite density matrix at t = {times[i]:.6g}")
        state = DensityMatrix(devectorize(vec_rho), layout, validate=False)
        diag = np.diag(state.matrix).real
        drift[i] = abs(state.trace() - 1.0)
        if drift[i] > TRACE_DRIFT_TOL:
            raise TraceDriftError(f"trace drift {drift[i]:.3e} at t = {times[i]:.6g}")
        populations[i] = partial_trace_trap(state)
        pop_e[i] = diag @ pe_diag
        pop_c[i] = diag @ pc_diag
        min_eig[i] = state.min_eigenvalue()
        if min_eig[i] < -POSITIVITY_TOL:
            logger.warning(f"negative eigenvalue {min_eig[i]:.3e} at t = {times[i]:.6g}")
        return state

    vec_rho = vectorize(rho0.matrix).astype(complex)
    state = record(0, vec_rho)
    if engine == "power":
        sample_map = trace_preserving_power(rk4_step_matrix(liouvillian.matrix, h), steps, dim)
        for i in range(1, record_every + 1):
            vec_rho = _symmetrize(sample_map @ vec_rho)
            state = record(i, vec_rho)
    else:
        lm = liouvillian.matrix
        for i in range(1, record_every + 1):
            for _ in range(steps):
                k1 = lm @ vec_rho
                k2 = lm @ (vec_rho + 0.5 * h * k1)
                k3 = lm @ (vec_rho + 0.5 * h * k2)
                k4 = lm @ (vec_rho + h * k3)
                vec_rho = _symmetrize(vec_rho + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4))
            state = record(i, vec_rho)

    n = np.arange(layout.n_trap)
    traj = Trajectory(
        times=times,
        populations=populations,
        mean_n=populations @ n,
        trace_drift=drift,
        pop_excited=pop_e,
        pop_photon=pop_c,
        min_eigenvalue=min_eig,
        final_state=state,
    )
    return traj.check()


@dataclass
class ConvergenceRow:
    n_trap: int
    result: object


@dataclass
class ConvergenceReport:
    rows: list
    tolerance: float
    converged_at: int = None

    @property
    def converged(self):
        return self.converged_at is not None


def _relative_change(w_new, w_old):
    scale = max(abs(w_new), abs(w_old))
    if scale == 0:
        return 0.0
    return abs(w_new - w_old) / scale


def convergence_scan(
    params: ModelParams,
    initial: InitialState,
    n_trap_list,
    settings: PropagationSettings = None,
    tolerance=config["convergence"]["tolerance"],
    fit_mode=NUMERICS["fit_mode"],
    progress=False,
    engine=None,
) -> ConvergenceReport:
    """Extract rates for increasing trap truncations and report where W settles."""
    from cavity_cooler.rates.numeric_rates import NumericRates

    n_trap_list = sorted(n_trap_list)
    if not n_trap_list or n_trap_list[0] < 3:
        raise LayoutError("convergence scan needs n_trap values >= 3")
    if engine is None:
        engine = NumericRates(replace(settings or PropagationSettings(), initial=initial), fit_mode=fit_mode)

    rows = []
    converged_at = None
    for n_trap in tqdm(n_trap_list, desc="truncations", disable=not progress):
        cell = params.replace(layout=HilbertLayout(n_trap=n_trap))
        result = engine.evaluate(cell)
        if rows and converged_at is None:
            change = _relative_change(result.w, rows[-1].result.w)
            logger.info(f"n_trap = {n_trap}: W = {result.w:.6g}, change {change:.2%}")
            if change < tolerance:
                converged_at = rows[-1].n_trap
        rows.append(ConvergenceRow(n_trap=n_trap, result=result))
    return ConvergenceReport(rows=rows, tolerance=tolerance, converged_at=converged_at)
