"""
Operator algebra on the truncated vib ⊗ photon ⊗ trap space.

Basis ordering is fixed: |v⟩ ⊗ |photon⟩ ⊗ |n⟩ with the trap index varying
fastest, so the composite index is ``(v * n_photon + photon) * n_trap + n``.
Vectorization stacks columns, vec(A X B) = (Bᵀ ⊗ A) vec(X).
"""

from dataclasses import dataclass

import numpy as np

from cavity_cooler.errors import LayoutError

HERMITIAN_TOL = 1e-10
TRACE_TOL = 1e-8
POSITIVITY_TOL = 1e-8


@dataclass(frozen=True)
class HilbertLayout:
    n_vib: int = 2
    n_photon: int = 2
    n_trap: int = 5

    def __post_init__(self):
        if self.n_vib != 2 or self.n_photon != 2:
            raise LayoutError("only the two-level molecule and the 0/1 photon cavity are supported")
        if self.n_trap < 2:
            raise LayoutError(f"n_trap must be >= 2, got {self.n_trap}")

    @property
    def internal_dim(self):
        return self.n_vib * self.n_photon

    @property
    def dim(self):
        return self.internal_dim * self.n_trap

    def index(self, v, photon, n):
        return (v * self.n_photon + photon) * self.n_trap + n


@dataclass(frozen=True)
class Operators:
    """Elementary operators embedded in the full space of ``layout``."""

    layout: HilbertLayout
    a: np.ndarray
    a_dag: np.ndarray
    b: np.ndarray
    b_dag: np.ndarray
    sigma: np.ndarray
    sigma_dag: np.ndarray
    identity: np.ndarray

    @property
    def excited(self):
        return self.sigma_dag @ self.sigma

    @property
    def photon_number(self):
        return self.a_dag @ self.a

    @property
    def phonon_number(self):
        return self.b_dag @ self.b


@dataclass(frozen=True)
class InternalOperators:
    """σ and a on the 4-dim internal ⊗ cavity space (no trap factor)."""

    a: np.ndarray
    a_dag: np.ndarray
    sigma: np.ndarray
    sigma_dag: np.ndarray
    identity: np.ndarray

    @property
    def excited(self):
        return self.sigma_dag @ self.sigma

    @property
    def photon_number(self):
        return self.a_dag @ self.a


def ladder(n):
    """Truncated annihilation operator, ⟨k−1|b|k⟩ = √k."""
    return np.diag(np.sqrt(np.arange(1, n, dtype=float)), k=1).astype(complex)


def _sigma():
    # σ = |g⟩⟨e| with |g⟩ = v=0, |e⟩ = v=1
    s = np.zeros((2, 2), dtype=complex)
    s[0, 1] = 1.0
    return s


def _kron(*factors):
    out = factors[0]
    for f in factors[1:]:
        out = np.kron(out, f)
    return out


def build_elementary(layout: HilbertLayout) -> Operators:
    iv = np.eye(layout.n_vib, dtype=complex)
    ip = np.eye(layout.n_photon, dtype=complex)
    it = np.eye(layout.n_trap, dtype=complex)
    a = _kron(iv, ladder(layout.n_photon), it)
    b = _kron(iv, ip, ladder(layout.n_trap))
    sigma = _kron(_sigma(), ip, it)
    return Operators(
        layout=layout,
        a=a,
        a_dag=a.conj().T,
        b=b,
        b_dag=b.conj().T,
        sigma=sigma,
        sigma_dag=sigma.conj().T,
        identity=np.eye(layout.dim, dtype=complex),
    )


def build_internal() -> InternalOperators:
    a = np.kron(np.eye(2, dtype=complex), ladder(2))
    sigma = np.kron(_sigma(), np.eye(2, dtype=complex))
    return InternalOperators(
        a=a,
        a_dag=a.conj().T,
        sigma=sigma,
        sigma_dag=sigma.conj().T,
        identity=np.eye(4, dtype=complex),
    )


class DensityMatrix:
    def __init__(self, matrix, layout: HilbertLayout, validate=True):
        matrix = np.asarray(matrix, dtype=complex)
        if matrix.shape != (layout.dim, layout.dim):
            raise LayoutError(
                f"density matrix shape {matrix.shape} does not match layout dimension {layout.dim}"
            )
        self.matrix = matrix
        self.layout = layout
        if validate:
            self.check()

    def hermiticity_defect(self):
        return float(np.max(np.abs(self.matrix - self.matrix.conj().T)))

    def trace(self):
        return complex(np.trace(self.matrix))

    def min_eigenvalue(self):
        return float(np.linalg.eigvalsh(0.5 * (self.matrix + self.matrix.conj().T))[0])

    def check(self):
        if self.hermiticity_defect() > HERMITIAN_TOL:
            raise ValueError("density matrix is not Hermitian")
        if abs(self.trace() - 1.0) > TRACE_TOL:
            raise ValueError(f"density matrix trace {self.trace():.3e} differs from 1")
        if self.min_eigenvalue() < -POSITIVITY_TOL:
            raise ValueError("density matrix has a negative eigenvalue")
        return self


def partial_trace_trap(rho: DensityMatrix) -> np.ndarray:
    """Trap populations p_n = Tr{|n⟩⟨n| ρ}, tracing out molecule and cavity."""
    layout = rho.layout
    if rho.matrix.shape != (layout.dim, layout.dim):
        raise LayoutError("density matrix does not match its layout")
    r = rho.matrix.reshape(layout.internal_dim, layout.n_trap, layout.internal_dim, layout.n_trap)
    return np.einsum("inin->n", r).real


def partial_trace_internal(rho: DensityMatrix) -> np.ndarray:
    layout = rho.layout
    r = rho.matrix.reshape(layout.internal_dim, layout.n_trap, layout.internal_dim, layout.n_trap)
    return np.einsum("injn->ij", r)


def vectorize(rho) -> np.ndarray:
    rho = np.asarray(rho)
    return rho.reshape(-1, order="F")


def devectorize(vector) -> np.ndarray:
    vector = np.asarray(vector)
    d = int(round(np.sqrt(vector.size)))
    if d * d != vector.size or vector.ndim != 1:
        raise LayoutError(f"vector of length {vector.size} is not a vectorized square matrix")
    return vector.reshape(d, d, order="F")


def left_superop(op):
    """Matrix of X ↦ op·X."""
    return np.kron(np.eye(op.shape[0], dtype=complex), op)


def right_superop(op):
    """Matrix of X ↦ X·op."""
    return np.kron(op.T, np.eye(op.shape[0], dtype=complex))


def commutator_superop(h):
    return left_superop(h) - right_superop(h)


def dissipator_superop(c, rate=1.0):
    """Matrix of X ↦ rate·(c X c† − ½{c†c, X})."""
    cdc = c.conj().T @ c
    d = np.kron(c.conj(), c) - 0.5 * left_superop(cdc) - 0.5 * right_superop(cdc)
    return rate * d


def trace_row(dim):
    """Row vector t with t · vec(X) = Tr X."""
    return vectorize(np.eye(dim, dtype=complex)).real


def thermal_populations(n_trap, mean_n):
    if mean_n <= 0:
        p = np.zeros(n_trap)
        p[0] = 1.0
        return p
    ratio = mean_n / (mean_n + 1.0)
    p = ratio ** np.arange(n_trap)
    return p / p.sum()


def _ground_internal():
    g0 = np.zeros((4, 4), dtype=complex)
    g0[0, 0] = 1.0
    return g0


def trap_product_state(layout: HilbertLayout, trap_rho) -> DensityMatrix:
    """|g,0_c⟩⟨g,0_c| ⊗ trap_rho."""
    return DensityMatrix(np.kron(_ground_internal(), trap_rho), layout)


def thermal_state(layout: HilbertLayout, mean_n=1.0) -> DensityMatrix:
    return trap_product_state(layout, np.diag(thermal_populations(layout.n_trap, mean_n)).astype(complex))


def fock_state(layout: HilbertLayout, n) -> DensityMatrix:
    if not 0 <= n < layout.n_trap:
        raise LayoutError(f"Fock level {n} outside the truncated ladder of {layout.n_trap} levels")
    trap = np.zeros((layout.n_trap, layout.n_trap), dtype=complex)
    trap[n, n] = 1.0
    return trap_product_state(layout, trap)


@dataclass(frozen=True)
class InitialState:
    kind: str = "thermal"
    mean_n: float = 1.0
    fock_n: int = 0

    def __post_init__(self):
        if self.kind not in ("thermal", "fock"):
            raise LayoutError(f"unknown initial state kind {self.kind!r}")
        if self.mean_n < 0:
            raise LayoutError("initial mean phonon number must be >= 0")

    def build(self, layout: HilbertLayout) -> DensityMatrix:
        if self.kind == "fock":
            return fock_state(layout, self.fock_n)
        return thermal_state(layout, self.mean_n)
