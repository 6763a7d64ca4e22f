"""
Perturbative heating and cooling rates from the zeroth-order Liouvillian L₀.

A± = −2 Re Tr{ V₁ (L₀ ∓ iν)⁻¹ [V₁ ϱ_S] }, with V₁ the first-order Lamb-Dicke
coupling on the internal ⊗ cavity space and ϱ_S the steady state of L₀.
"""

import math

import numpy as np
from scipy.integrate import simpson

from cavity_cooler.dynamics import rk4_step_matrix
from cavity_cooler.errors import DegenerateSteadyStateError, NumericalError, SingularResolventError
from cavity_cooler.hilbert import devectorize, trace_row, vectorize
from cavity_cooler.model import KIND_REDUCED, LiouvillianMatrix, ModelParams, build_first_order_coupling, build_liouvillian
from cavity_cooler.rates.base_rates import METHOD_CORRELATION, METHOD_PERTURBATIVE, BaseRateMethod, RateResult

NULL_TOL = 1e-9
RESIDUAL_TOL = 1e-9
PSD_TOL = 1e-10
MAX_CONDITION = 1e13


def steady_state_reduced(l0: LiouvillianMatrix) -> np.ndarray:
    if l0.kind != KIND_REDUCED:
        raise ValueError("steady state is solved on the reduced L0 only")
    matrix = l0.matrix
    singular = np.linalg.svd(matrix, compute_uv=False)
    if singular[-2] < NULL_TOL * max(1.0, singular[0]):
        raise DegenerateSteadyStateError(
            f"L0 has a degenerate null space (second smallest singular value {singular[-2]:.2e})"
        )

    augmented = matrix.copy()
    augmented[-1, :] = trace_row(l0.dim)
    rhs = np.zeros(matrix.shape[0], dtype=complex)
    rhs[-1] = 1.0
    vec_rho = np.linalg.solve(augmented, rhs)
    residual = np.max(np.abs(matrix @ vec_rho))
    if residual > RESIDUAL_TOL:
        raise DegenerateSteadyStateError(f"steady-state residual {residual:.2e} exceeds {RESIDUAL_TOL}")

    rho = devectorize(vec_rho)
    rho = 0.5 * (rho + rho.conj().T)
    if np.linalg.eigvalsh(rho)[0] < -PSD_TOL:
        raise NumericalError("steady state of L0 is not positive semidefinite")
    return rho


def _resolvent_rate(l0, v1, source, shift):
    shifted = l0.matrix - 1j * shift * np.eye(l0.matrix.shape[0])
    if np.linalg.cond(shifted) > MAX_CONDITION:
        raise SingularResolventError(f"L0 - {shift:+}i*nu is singular: the trap frequency hits an undamped mode")
    x = np.linalg.solve(shifted, source)
    return -2.0 * np.trace(v1 @ devectorize(x)).real


def perturbative_rates(params: ModelParams) -> RateResult:
    l0 = build_liouvillian(params, kind=KIND_REDUCED)
    rho_s = steady_state_reduced(l0)
    v1 = build_first_order_coupling(params)
    source = vectorize(v1 @ rho_s)
    # ν = 1: (L0 − iν) gives the heating rate, (L0 + iν) the cooling rate
    a_plus = _resolvent_rate(l0, v1, source, +1.0)
    a_minus = _resolvent_rate(l0, v1, source, -1.0)
    return RateResult.from_rates(a_plus, a_minus, METHOD_PERTURBATIVE)


def correlation_rates(params: ModelParams, decay_periods=40.0, step_fraction=0.02) -> RateResult:
    """
    A± = 2 Re ∫₀^∞ e^{∓iνt} ⟨δV₁(t) δV₁(0)⟩ dt from RK4 propagation with L0.

    The fluctuation δV₁ = V₁ − ⟨V₁⟩ removes the non-decaying part of the
    correlation; that part only adds an imaginary term to the resolvent form.
    """
    l0 = build_liouvillian(params, kind=KIND_REDUCED)
    rho_s = steady_state_reduced(l0)
    v1 = build_first_order_coupling(params)
    mean_v1 = np.trace(v1 @ rho_s)
    x = vectorize((v1 - mean_v1 * np.eye(l0.dim)) @ rho_s)

    eigenvalues = np.linalg.eigvals(l0.matrix)
    scale = np.max(np.abs(eigenvalues))
    damped = -eigenvalues.real[np.abs(eigenvalues) > NULL_TOL * max(1.0, scale)]
    if damped.size == 0 or damped.min() <= 0:
        raise SingularResolventError("L0 has undamped modes; the correlation integral diverges")
    t_max = decay_periods / damped.min()
    h = step_fraction / max(scale, 1.0)
    steps = math.ceil(t_max / h)
    step = rk4_step_matrix(l0.matrix, h)

    correlation = np.empty(steps + 1, dtype=complex)
    v1_row = vectorize(v1.T)  # Tr{V1 X} = vec(V1ᵀ) · vec(X)
    for i in range(steps + 1):
        correlation[i] = v1_row @ x
        x = step @ x
    t = h * np.arange(steps + 1)
    a_plus = 2.0 * simpson(np.exp(-1j * t) * correlation, x=t).real
    a_minus = 2.0 * simpson(np.exp(1j * t) * correlation, x=t).real
    return RateResult.from_rates(a_plus, a_minus, METHOD_CORRELATION)


def free_space_rates(params: ModelParams) -> RateResult:
    """Weak-drive free-space sideband rates (g = 0), Lorentzians centred at Δ = ±ν."""
    strength = (params.eta * params.omega * math.cos(params.theta_l)) ** 2 * params.gamma
    half_width = (params.gamma / 2) ** 2
    a_plus = strength / ((params.delta - 1.0) ** 2 + half_width)
    a_minus = strength / ((params.delta + 1.0) ** 2 + half_width)
    return RateResult.from_rates(a_plus, a_minus, METHOD_PERTURBATIVE)


class PerturbativeRates(BaseRateMethod):
    name = "perturbative"

    def evaluate(self, params: ModelParams) -> RateResult:
        return perturbative_rates(params)
