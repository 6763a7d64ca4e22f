import math
from abc import ABC, abstractmethod
from dataclasses import dataclass

from cavity_cooler.errors import RateInvariantError

METHOD_PERTURBATIVE = "perturbative"
METHOD_FIT = "trajectory-fit"
METHOD_CORRELATION = "correlation"

RATE_FLOOR = -1e-10


@dataclass(frozen=True)
class RateResult:
    """Heating/cooling rates in units of ν. ``n_st`` is NaN unless the point cools (w > 0)."""

    a_plus: float
    a_minus: float
    w: float
    n_st: float
    method: str
    fit_residual: float = None

    @classmethod
    def from_rates(cls, a_plus, a_minus, method, fit_residual=None):
        a_plus, a_minus = float(a_plus), float(a_minus)
        w = a_minus - a_plus
        n_st = a_plus / w if w > 0 else math.nan
        return cls(a_plus=a_plus, a_minus=a_minus, w=w, n_st=n_st, method=method, fit_residual=fit_residual)

    @property
    def cooling(self):
        return self.w > 0

    def w_si(self, nu_si):
        return self.w * nu_si

    def check(self):
        if self.a_plus < RATE_FLOOR or self.a_minus < RATE_FLOOR:
            raise RateInvariantError(f"negative rate: A+ = {self.a_plus:.3e}, A- = {self.a_minus:.3e}")
        if self.w > 0 and abs(self.n_st - self.a_plus / (self.a_minus - self.a_plus)) > 1e-9:
            raise RateInvariantError("n_st is inconsistent with A+ and A-")
        return self


class BaseRateMethod(ABC):
    name = None

    def __init__(self, settings=None, **kwargs) -> None:
        self.settings = settings

    @abstractmethod
    def evaluate(self, params) -> RateResult:
        pass
