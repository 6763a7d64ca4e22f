import numpy as np
import pytest

from cavity_cooler.errors import LayoutError
from cavity_cooler.hilbert import (
    DensityMatrix,
    HilbertLayout,
    InitialState,
    build_elementary,
    build_internal,
    devectorize,
    dissipator_superop,
    fock_state,
    left_superop,
    partial_trace_internal,
    partial_trace_trap,
    right_superop,
    thermal_populations,
    thermal_state,
    trace_row,
    vectorize,
)


def test_layout_dimensions():
    layout = HilbertLayout()
    assert layout.n_trap == 5
    assert layout.internal_dim == 4
    assert layout.dim == 20
    assert layout.index(1, 1, 4) == 19


@pytest.mark.parametrize("kwargs", [{"n_trap": 1}, {"n_vib": 3}, {"n_photon": 3}])
def test_layout_rejects_unsupported_sizes(kwargs):
    with pytest.raises(LayoutError):
        HilbertLayout(**kwargs)


def test_commutator_breaks_only_at_top_trap_level():
    layout = HilbertLayout(n_trap=5)
    ops = build_elementary(layout)
    commutator = ops.b @ ops.b_dag - ops.b_dag @ ops.b
    assert np.allclose(commutator, np.diag(np.diag(commutator)))
    expected = np.tile([1, 1, 1, 1, -4], layout.internal_dim)
    assert np.allclose(np.diag(commutator).real, expected)


def test_sigma_projectors():
    layout = HilbertLayout(n_trap=3)
    ops = build_elementary(layout)
    ground = np.zeros(layout.dim)
    excited = np.zeros(layout.dim)
    for photon in range(2):
        for n in range(3):
            ground[layout.index(0, photon, n)] = 1
            excited[layout.index(1, photon, n)] = 1
    assert np.allclose(ops.sigma @ ops.sigma_dag, np.diag(ground))
    assert np.allclose(ops.sigma_dag @ ops.sigma, np.diag(excited))


def test_number_operator_eigenvalue():
    layout = HilbertLayout()
    ops = build_elementary(layout)
    i = layout.index(0, 0, 2)
    assert ops.phonon_number[i, i] == pytest.approx(2.0)
    j = layout.index(1, 1, 0)
    assert ops.photon_number[j, j] == pytest.approx(1.0)


def test_internal_operators_match_embedded_ones():
    layout = HilbertLayout(n_trap=2)
    full = build_elementary(layout)
    internal = build_internal()
    trap_eye = np.eye(2)
    assert np.allclose(np.kron(internal.sigma, trap_eye), full.sigma)
    assert np.allclose(np.kron(internal.a, trap_eye), full.a)


def test_partial_trace_of_fock_state():
    layout = HilbertLayout()
    p = partial_trace_trap(fock_state(layout, 3))
    assert np.allclose(p, [0, 0, 0, 1, 0])


def test_partial_trace_of_block_mixture():
    layout = HilbertLayout()
    rho = np.zeros((layout.dim, layout.dim), dtype=complex)
    rho[layout.index(0, 0, 0), layout.index(0, 0, 0)] = 0.5
    rho[layout.index(1, 1, 1), layout.index(1, 1, 1)] = 0.5
    p = partial_trace_trap(DensityMatrix(rho, layout))
    assert np.allclose(p, [0.5, 0.5, 0, 0, 0])


def test_partial_trace_ignores_internal_coherence():
    layout = HilbertLayout()
    psi = np.zeros(layout.dim, dtype=complex)
    psi[layout.index(0, 0, 0)] = 1 / np.sqrt(2)
    psi[layout.index(1, 0, 0)] = 1 / np.sqrt(2)
    p = partial_trace_trap(DensityMatrix(np.outer(psi, psi.conj()), layout))
    assert np.allclose(p, [1, 0, 0, 0, 0])

    psi = np.zeros(layout.dim, dtype=complex)
    psi[layout.index(0, 1, 2)] = np.sqrt(0.3)
    psi[layout.index(1, 0, 2)] = 1j * np.sqrt(0.7)
    p = partial_trace_trap(DensityMatrix(np.outer(psi, psi.conj()), layout))
    assert np.allclose(p, [0, 0, 1, 0, 0])


def test_partial_trace_of_dense_state(random_density):
    layout = HilbertLayout()
    rho = DensityMatrix(random_density(layout.dim), layout)
    expected = np.zeros(layout.n_trap)
    for v in range(2):
        for c in range(2):
            for n in range(layout.n_trap):
                i = layout.index(v, c, n)
                expected[n] += rho.matrix[i, i].real
    p = partial_trace_trap(rho)
    assert np.allclose(p, expected, atol=1e-12)
    assert p.sum() == pytest.approx(1.0, abs=1e-12)
    assert np.all(p >= 0)


def test_partial_trace_internal_keeps_trace(random_density):
    layout = HilbertLayout(n_trap=3)
    rho = DensityMatrix(random_density(layout.dim), layout)
    reduced = partial_trace_internal(rho)
    assert reduced.shape == (4, 4)
    assert np.trace(reduced) == pytest.approx(1.0)
    assert partial_trace_trap(rho).sum() == pytest.approx(1.0)


def test_thermal_populations_truncated_to_five_levels():
    p = partial_trace_trap(thermal_state(HilbertLayout(), mean_n=1.0))
    assert p == pytest.approx([0.516, 0.258, 0.129, 0.065, 0.032], abs=1e-3)


def test_thermal_truncation_tail():
    n8 = thermal_populations(8, 1.0) @ np.arange(8)
    n5 = thermal_populations(5, 1.0) @ np.arange(5)
    assert abs(n8 - 1.0) < 0.04
    assert n5 < n8 < 1.0


def test_zero_temperature_is_ground_state():
    assert np.allclose(thermal_populations(4, 0.0), [1, 0, 0, 0])


def test_initial_state_recipes():
    layout = HilbertLayout(n_trap=4)
    assert np.allclose(partial_trace_trap(InitialState(kind="fock", fock_n=2).build(layout)), [0, 0, 1, 0])
    assert np.allclose(
        partial_trace_trap(InitialState(mean_n=0.5).build(layout)),
        thermal_populations(4, 0.5),
    )
    with pytest.raises(LayoutError):
        InitialState(kind="coherent")
    with pytest.raises(LayoutError):
        fock_state(layout, 4)


def test_vectorize_round_trip(random_density):
    rho = random_density(6)
    assert np.array_equal(devectorize(vectorize(rho)), rho)


def test_vectorize_identity_has_diagonal_stride():
    d = 4
    v = vectorize(np.eye(d) / d)
    assert np.count_nonzero(v) == d
    assert np.allclose(v[:: d + 1], 1 / d)


def test_devectorize_rejects_non_square_length():
    with pytest.raises(LayoutError):
        devectorize(np.zeros(5))


def test_superoperators_act_like_products(rng):
    a = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    x = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    assert np.allclose(left_superop(a) @ vectorize(x), vectorize(a @ x))
    assert np.allclose(right_superop(a) @ vectorize(x), vectorize(x @ a))
    assert trace_row(3) @ vectorize(x) == pytest.approx(np.trace(x))


def test_dissipator_matches_direct_formula(rng, random_density):
    c = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    rho = random_density(4)
    cdc = c.conj().T @ c
    direct = 0.7 * (c @ rho @ c.conj().T - 0.5 * (cdc @ rho + rho @ cdc))
    assert np.allclose(devectorize(dissipator_superop(c, 0.7) @ vectorize(rho)), direct)


def test_density_matrix_validation():
    layout = HilbertLayout(n_trap=2)
    rho = np.eye(layout.dim) / layout.dim
    DensityMatrix(rho, layout)
    skew = rho.astype(complex)
    skew[0, 1] = 0.1j
    with pytest.raises(ValueError):
        DensityMatrix(skew, layout)
    with pytest.raises(ValueError):
        DensityMatrix(2 * rho, layout)
    with pytest.raises(LayoutError):
        DensityMatrix(np.eye(3) / 3, layout)
