from cavity_cooler.rates.base_rates import RateResult
from cavity_cooler.rates.numeric_rates import NumericRates
from cavity_cooler.rates.perturbative_rates import PerturbativeRates

RATE_METHOD_DICT = {
    "perturbative": PerturbativeRates,
    "numeric": NumericRates,
}
