"""
Hamiltonian, dissipators and Liouvillian of the molecule, cavity and trap system.

Units: ħ = 1 and the trap frequency ν = 1, so every energy and rate below is
in units of ν and times are in units of 1/ν. The frame rotates at the laser
frequency; counter-rotating terms and O(η²) Lamb-Dicke terms are dropped, and
the recoil-modified state in the spontaneous-emission term is replaced by ρ.
"""

import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np

from cavity_cooler.errors import ConfigError
from cavity_cooler.hilbert import (
    HilbertLayout,
    build_elementary,
    build_internal,
    commutator_superop,
    dissipator_superop,
    trace_row,
)

logger = logging.getLogger(__name__)

LAMB_DICKE_WARN = 0.3
KIND_FULL = "full"
KIND_REDUCED = "reduced-L0"


@dataclass(frozen=True)
class ModelParams:
    delta: float
    delta_c: float
    omega: float
    g: float
    kappa: float
    gamma: float
    eta: float
    phi: float = math.pi / 4
    theta_l: float = math.pi / 4
    theta_c: float = math.pi / 4
    nu_si: float = 2 * math.pi * 350.0e3
    layout: HilbertLayout = field(default_factory=HilbertLayout)

    def __post_init__(self):
        for name in ("delta", "delta_c", "omega", "g", "kappa", "gamma", "eta", "phi", "theta_l", "theta_c", "nu_si"):
            if not math.isfinite(getattr(self, name)):
                raise ConfigError(f"{name} must be finite")
        for name in ("kappa", "gamma", "omega", "g", "eta"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be >= 0, got {getattr(self, name)}")
        if self.nu_si <= 0:
            raise ConfigError("nu_si must be > 0")
        if self.eta >= 1:
            raise ConfigError(f"eta = {self.eta} is outside the Lamb-Dicke regime (eta < 1)")

    def replace(self, **changes):
        return replace(self, **changes)

    @property
    def fastest_rate(self):
        return max(self.kappa, 1.0, self.g, self.omega)


def warn_lamb_dicke(params: ModelParams):
    """Log once per run when the first-order Lamb-Dicke expansion is doubtful."""
    if params.eta > LAMB_DICKE_WARN:
        logger.warning(f"eta = {params.eta} > {LAMB_DICKE_WARN}: first-order Lamb-Dicke expansion is questionable")
        return True
    return False


@dataclass(frozen=True)
class JumpOperator:
    name: str
    rate: float
    operator: np.ndarray

    @property
    def scaled(self):
        return math.sqrt(self.rate) * self.operator


@dataclass(frozen=True)
class LiouvillianMatrix:
    matrix: np.ndarray
    kind: str
    dim: int
    fastest_rate: float = 1.0

    def apply(self, vec_rho):
        return self.matrix @ vec_rho

    def trace_defect(self):
        """Largest |Tr L(X)| over basis matrices X; zero for a trace-preserving generator."""
        return float(np.max(np.abs(trace_row(self.dim) @ self.matrix)))

    def max_real_eigenvalue(self):
        return float(np.max(np.linalg.eigvals(self.matrix).real))

    def check(self, tol=1e-10, eig_tol=1e-9):
        if self.trace_defect() > tol:
            raise ValueError("Liouvillian does not preserve the trace")
        if self.max_real_eigenvalue() > eig_tol:
            raise ValueError("Liouvillian has an eigenvalue with positive real part")
        return self


def _internal_terms(params: ModelParams, ops):
    """H_M + H_C + V_I⁽⁰⁾ and the first-order coupling V_I⁽¹⁾ (without the b + b† factor)."""
    h0 = (
        -params.delta * ops.sigma_dag @ ops.sigma
        - params.delta_c * ops.a_dag @ ops.a
    )
    v0 = (params.omega * ops.identity + params.g * math.cos(params.phi) * ops.a_dag) @ ops.sigma
    h0 = h0 + v0 + v0.conj().T
    v1 = params.eta * (
        1j * params.omega * math.cos(params.theta_l) * ops.identity
        - params.g * math.cos(params.theta_c) * math.sin(params.phi) * ops.a_dag
    ) @ ops.sigma
    return h0, v1 + v1.conj().T


def build_internal_hamiltonian(params: ModelParams) -> np.ndarray:
    h0, _ = _internal_terms(params, build_internal())
    return h0


def build_first_order_coupling(params: ModelParams) -> np.ndarray:
    """V_I⁽¹⁾ on the internal ⊗ cavity space; Hermitian."""
    _, v1 = _internal_terms(params, build_internal())
    return v1


def build_hamiltonian(params: ModelParams, first_order=True) -> np.ndarray:
    ops = build_elementary(params.layout)
    h0, v1 = _internal_terms(params, ops)
    h = h0 + ops.b_dag @ ops.b + 0.5 * ops.identity
    if first_order:
        # (b + b†) is Hermitian and commutes with V_I⁽¹⁾
        h = h + v1 @ (ops.b + ops.b_dag)
    return h


def build_dissipators(params: ModelParams, reduced=False) -> list:
    ops = build_internal() if reduced else build_elementary(params.layout)
    jumps = []
    if params.kappa > 0:
        jumps.append(JumpOperator("kappa", params.kappa, ops.a))
    if params.gamma > 0:
        jumps.append(JumpOperator("gamma", params.gamma, ops.sigma))
    return jumps


def build_liouvillian(params: ModelParams, kind=KIND_FULL) -> LiouvillianMatrix:
    if kind == KIND_FULL:
        h = build_hamiltonian(params, first_order=True)
        jumps = build_dissipators(params)
    elif kind == KIND_REDUCED:
        h = build_internal_hamiltonian(params)
        jumps = build_dissipators(params, reduced=True)
    else:
        raise ValueError(f"unknown Liouvillian kind {kind!r}")
    matrix = -1j * commutator_superop(h)
    for jump in jumps:
        matrix = matrix + dissipator_superop(jump.operator, jump.rate)
    return LiouvillianMatrix(matrix=matrix, kind=kind, dim=h.shape[0], fastest_rate=params.fastest_rate)


def apply_master_equation(h, jumps, rho):
    """(1/i)[H, ρ] + Σ L_X ρ evaluated directly on a matrix."""
    out = -1j * (h @ rho - rho @ h)
    for jump in jumps:
        c = jump.operator
        cd = c.conj().T
        cdc = cd @ c
        out = out + 0.5 * jump.rate * (2 * c @ rho @ cd - cdc @ rho - rho @ cdc)
    return out
