import math
from dataclasses import dataclass

from cavity_cooler.config import config
from cavity_cooler.model import ModelParams
from cavity_cooler.rates.base_rates import RateResult
from cavity_cooler.rates.numeric_rates import NumericRates
from cavity_cooler.rates.perturbative_rates import perturbative_rates

COMPARED = ("a_plus", "a_minus", "w", "n_st")


@dataclass
class ComparisonReport:
    perturbative: RateResult
    numeric: RateResult
    deviations: dict
    agreement: bool


def relative_deviation(reference, value):
    if not (math.isfinite(reference) and math.isfinite(value)):
        return math.nan
    if reference == 0:
        return 0.0 if value == 0 else math.inf
    return (value - reference) / abs(reference)


def compare_methods(
    params: ModelParams,
    numeric: NumericRates = None,
    tolerance=config["comparison"]["tolerance"],
    omega_validity=config["comparison"]["omega_validity"],
) -> ComparisonReport:
    pert = perturbative_rates(params)
    num = (numeric or NumericRates()).evaluate(params)
    deviations = {name: relative_deviation(getattr(pert, name), getattr(num, name)) for name in COMPARED}
    within = all(abs(deviations[name]) < tolerance for name in ("a_plus", "a_minus", "w"))
    return ComparisonReport(
        perturbative=pert,
        numeric=num,
        deviations=deviations,
        agreement=params.omega <= omega_validity and within,
    )
