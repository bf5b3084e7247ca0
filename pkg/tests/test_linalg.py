"""Hamiltonian assembly, the Cayley step, and the dense propagation oracle."""

import numpy as np
import pytest

from schrodbox.grid import WaveFunction, build_grid, discrete_laplacian
from schrodbox.fields import MagneticPotential, sample_vector_potential
from schrodbox.linalg import (CayleyStepper, DensePropagator, SolverError,
                              assemble_hamiltonian, cayley_step,
                              dense_propagator_oracle, export_triplets)


def _random_state(grid, seed=0):
    rng = np.random.default_rng(seed)
    return rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape)


def test_reduces_to_laplacian_without_fields():
    g = build_grid(R=3.3, h=0.2, d=1)
    H = assemble_hamiltonian(g)
    rng = np.random.default_rng(1)
    u = rng.standard_normal(g.shape) + 0j
    assert np.allclose(H.apply(u), -discrete_laplacian(g, u), rtol=1e-14, atol=1e-14)
    assert H.hermitian_certified


def test_dense_hermiticity_random_fields():
    rng = np.random.default_rng(2)
    g = build_grid(R=1.7, h=0.2, d=1)
    assert g.points_per_axis == 17
    A = [rng.standard_normal(g.shape)]
    V = rng.standard_normal(g.shape)
    H = assemble_hamiltonian(g, A=A, V=V)
    D = H.dense()
    assert np.max(np.abs(D - D.conj().T)) <= 1e-12 * H.scale


def test_hermiticity_inner_product_form():
    rng = np.random.default_rng(3)
    g = build_grid(R=1.6, h=0.2, d=2)
    A = sample_vector_potential(g, MagneticPotential.constant(0.8))
    V = rng.standard_normal(g.shape)
    H = assemble_hamiltonian(g, A=A, V=V)
    for seed in range(10):
        u = _random_state(g, seed)
        v = _random_state(g, 100 + seed)
        lhs = g.inner(H.apply(u), v)
        rhs = g.inner(u, H.apply(v))
        assert abs(lhs - rhs) <= 1e-12 * g.norm(u) * g.norm(v) * H.scale


def test_constant_field_positive_semidefinite():
    g = build_grid(R=1.8, h=0.3, d=2)
    A = sample_vector_potential(g, MagneticPotential.constant(1.0))
    H = assemble_hamiltonian(g, A=A)
    w = np.linalg.eigvalsh(H.dense())
    assert w[0] >= -1e-10


def test_stencil_band_count():
    g = build_grid(R=1.8, h=0.3, d=2)
    A = sample_vector_potential(g, MagneticPotential.constant(1.0))
    H = assemble_hamiltonian(g, A=A, V=np.ones(g.shape))
    per_row = np.diff(H.matrix.indptr)
    assert per_row.max() <= 4 * g.d + 1


def test_cayley_identity_for_zero_operator():
    g = build_grid(R=1.0, h=0.25, d=1)
    H = assemble_hamiltonian(g, V=None)
    H.matrix = H.matrix * 0.0
    st = CayleyStepper(H, 0.3)
    psi = _random_state(g, 4)
    assert np.allclose(st.step_values(psi), psi, rtol=0, atol=1e-14)


def test_cayley_eigenvector_phase_factor():
    g = build_grid(R=1.7, h=0.2, d=1)
    rng = np.random.default_rng(5)
    H = assemble_hamiltonian(g, A=[rng.standard_normal(g.shape)],
                             V=rng.standard_normal(g.shape))
    w, U = np.linalg.eigh(H.dense())
    tau = 0.07
    st = CayleyStepper(H, tau)
    for idx in (0, 3, 8):
        vec = U[:, idx].reshape(g.shape)
        out = st.step_values(vec).reshape(-1)
        factor = (1 - 0.5j * tau * w[idx]) / (1 + 0.5j * tau * w[idx])
        assert abs(abs(factor) - 1.0) < 1e-14
        assert np.allclose(out, factor * U[:, idx], atol=1e-12)


def test_cayley_local_third_order_vs_oracle():
    rng = np.random.default_rng(7)
    g = build_grid(R=6.6, h=0.4, d=1)
    assert g.points_per_axis == 33
    H = assemble_hamiltonian(g, A=[0.5 * rng.standard_normal(g.shape)],
                             V=0.5 * rng.standard_normal(g.shape))
    psi = _random_state(g, 8)
    oracle = DensePropagator(H)
    taus = np.array([0.1, 0.05, 0.025, 0.0125])
    errs = [np.linalg.norm(CayleyStepper(H, t).step_values(psi) - oracle.apply(t, psi))
            / np.linalg.norm(psi) for t in taus]
    slope = np.polyfit(np.log(taus), np.log(errs), 1)[0]
    assert 2.7 <= slope <= 3.3


def test_cayley_unitarity_over_100_steps():
    rng = np.random.default_rng(9)
    g = build_grid(R=3.3, h=0.2, d=1)
    H = assemble_hamiltonian(g, A=[rng.standard_normal(g.shape)],
                             V=rng.standard_normal(g.shape))
    st = CayleyStepper(H, 0.05, strategy="direct")
    psi = WaveFunction(g, _random_state(g, 10))
    m0 = psi.mass
    for _ in range(100):
        psi = cayley_step(st, psi)
    assert abs(psi.mass / m0 - 1.0) <= 1e-9


def test_krylov_path_matches_direct():
    rng = np.random.default_rng(11)
    g = build_grid(R=3.3, h=0.2, d=1)
    H = assemble_hamiltonian(g, V=rng.standard_normal(g.shape))
    psi = _random_state(g, 12)
    direct = CayleyStepper(H, 0.04, strategy="direct").step_values(psi)
    krylov = CayleyStepper(H, 0.04, strategy="krylov", tol=1e-12).step_values(psi)
    assert np.linalg.norm(direct - krylov) / np.linalg.norm(direct) < 1e-9


def test_krylov_nonconvergence_reports_residual():
    rng = np.random.default_rng(13)
    g = build_grid(R=3.3, h=0.1, d=1)
    H = assemble_hamiltonian(g, V=rng.standard_normal(g.shape))
    st = CayleyStepper(H, 50.0, strategy="krylov", tol=1e-14, maxiter=1)
    with pytest.raises(SolverError, match="residual"):
        st.step_values(_random_state(g, 14))


def test_dense_oracle_identity_unitarity_composition():
    rng = np.random.default_rng(15)
    g = build_grid(R=1.7, h=0.2, d=1)
    H = assemble_hamiltonian(g, A=[rng.standard_normal(g.shape)],
                             V=rng.standard_normal(g.shape))
    psi = WaveFunction(g, _random_state(g, 16))
    out0 = dense_propagator_oracle(H, 0.0, psi)
    assert np.allclose(out0.values, psi.values, atol=1e-12)
    out = dense_propagator_oracle(H, 0.8, psi)
    assert abs(out.norm() - psi.norm()) <= 1e-12 * psi.norm()
    once = DensePropagator(H)
    twice = once.apply(0.4, once.apply(0.4, psi.values))
    assert np.allclose(twice, once.apply(0.8, psi.values), atol=1e-11)


def test_dense_oracle_cap():
    g = build_grid(R=9.9, h=0.15, d=2)  # 131^2 nodes > 4096
    H = assemble_hamiltonian(g)
    with pytest.raises(ValueError):
        DensePropagator(H)


def test_export_triplets_round_trip(tmp_path):
    rng = np.random.default_rng(17)
    g = build_grid(R=1.0, h=0.25, d=1)
    H = assemble_hamiltonian(g, A=[rng.standard_normal(g.shape)],
                             V=rng.standard_normal(g.shape))
    path = tmp_path / "matrix.txt"
    export_triplets(H, path)
    dense = np.zeros((g.size, g.size), dtype=complex)
    for line in path.read_text().splitlines():
        r, c, re, im = line.split()
        dense[int(r), int(c)] = float(re) + 1j * float(im)
    assert np.allclose(dense, H.dense(), rtol=0, atol=0)
