import logging
import math

from cavity_cooler.config import config
from cavity_cooler.dynamics import PropagationSettings, default_time_step, propagate
from cavity_cooler.errors import NumericalError
from cavity_cooler.model import ModelParams, build_liouvillian
from cavity_cooler.rates.base_rates import BaseRateMethod, RateResult
from cavity_cooler.rates.fit import fit_rates
from cavity_cooler.rates.perturbative_rates import perturbative_rates

logger = logging.getLogger(__name__)

NUMERICS = config["numerics"]


def default_horizon(
    params: ModelParams,
    factor=NUMERICS["horizon_factor"],
    min_horizon=NUMERICS["min_horizon"],
    max_horizon=NUMERICS["max_horizon"],
):
    """factor / |W| from the perturbative estimate, clamped to [min_horizon, max_horizon]."""
    try:
        w = perturbative_rates(params).w
    except NumericalError as e:
        logger.info(f"no perturbative horizon estimate ({e}), using {max_horizon}")
        return max_horizon
    if w == 0 or not math.isfinite(w):
        return max_horizon
    return min(max(factor / abs(w), min_horizon), max_horizon)


class NumericRates(BaseRateMethod):
    """Propagate the full master equation and fit the trap populations."""

    name = "numeric"

    def __init__(
        self,
        settings: PropagationSettings = None,
        fit_mode=NUMERICS["fit_mode"],
        horizon_factor=NUMERICS["horizon_factor"],
        min_horizon=NUMERICS["min_horizon"],
        max_horizon=NUMERICS["max_horizon"],
        transient_kappa_periods=NUMERICS["transient_kappa_periods"],
        **kwargs,
    ) -> None:
        super().__init__(settings or PropagationSettings())
        self.fit_mode = fit_mode
        self.horizon_factor = horizon_factor
        self.min_horizon = min_horizon
        self.max_horizon = max_horizon
        self.transient_kappa_periods = transient_kappa_periods

    def horizon(self, params: ModelParams):
        if self.settings.t_end is not None:
            return self.settings.t_end
        return default_horizon(params, self.horizon_factor, self.min_horizon, self.max_horizon)

    def transient(self, params: ModelParams, t_end):
        if params.kappa == 0:
            return 0.0
        return min(self.transient_kappa_periods / params.kappa, 0.5 * t_end)

    def trajectory(self, params: ModelParams):
        dt = self.settings.dt or default_time_step(params)
        t_end = self.horizon(params)
        rho0 = self.settings.initial.build(params.layout)
        return propagate(
            rho0,
            build_liouvillian(params),
            dt,
            t_end,
            record_every=self.settings.record_every,
            engine=self.settings.engine,
        )

    def evaluate_with_trajectory(self, params: ModelParams):
        traj = self.trajectory(params)
        result = fit_rates(traj, mode=self.fit_mode, t_min=self.transient(params, traj.times[-1]))
        return traj, result

    def evaluate(self, params: ModelParams) -> RateResult:
        return self.evaluate_with_trajectory(params)[1]
