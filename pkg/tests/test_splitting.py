"""Time loop contracts: conservation, reductions, convergence, diagnostics."""

import numpy as np
import pytest

from schrodbox.grid import WaveFunction, build_grid
from schrodbox.fields import (ControlFunction, MagneticPotential, PotentialSpec,
                              make_scalar)
from schrodbox.linalg import DensePropagator
from schrodbox.splitting import (Propagator, SplittingConfig, diagnostics,
                                 evolve, potential_phase, restrict, strang_step,
                                 tail_norm, truncation_radius, weighted_norm)

GAUSS_2D = make_scalar("gaussian", amplitude=1 / np.pi, center=(-2.5, 2.5), width=1.0)


def _cfg_1d(**kw):
    base = dict(R=3.3, h=0.2, d=1, T=0.5, steps=25,
                initial=make_scalar("gaussian", amplitude=1.0, center=(0.5,), width=0.7))
    base.update(kw)
    return SplittingConfig(**base)


# -- potential phase ----------------------------------------------------------

def test_phase_zero_time_is_identity():
    g = build_grid(R=1.0, h=0.25, d=1)
    rng = np.random.default_rng(0)
    psi = WaveFunction(g, rng.standard_normal(g.shape) + 1j * rng.standard_normal(g.shape))
    out = potential_phase(psi, rng.standard_normal(g.shape), 0.0)
    assert np.array_equal(out.values, psi.values)


def test_phase_constant_potential_global_phase():
    g = build_grid(R=1.0, h=0.25, d=1)
    rng = np.random.default_rng(1)
    psi = WaveFunction(g, rng.standard_normal(g.shape) + 1j * rng.standard_normal(g.shape))
    tau, c = 0.3, 1.7
    out = potential_phase(psi, np.full(g.shape, c), tau)
    overlap = g.inner(psi.values, out.values) / psi.mass
    assert abs(abs(overlap) - 1.0) < 1e-14
    assert np.angle(overlap) == pytest.approx(-tau * c, rel=1e-12)


def test_phase_preserves_mass_exactly():
    g = build_grid(R=1.0, h=0.25, d=2)
    rng = np.random.default_rng(2)
    psi = WaveFunction(g, rng.standard_normal(g.shape) + 1j * rng.standard_normal(g.shape))
    out = potential_phase(psi, 10.0 * rng.standard_normal(g.shape), 0.7)
    assert abs(out.mass / psi.mass - 1.0) <= 1e-13


# -- strang step --------------------------------------------------------------

def test_step_reduces_to_double_cayley_free_case():
    cfg = _cfg_1d()
    prop = Propagator(cfg)
    psi0 = prop.initial_state()
    stepped = prop.step_values(psi0, 0.0)
    double = prop.half_stepper.step_values(prop.half_stepper.step_values(psi0))
    assert np.array_equal(stepped, double)


def test_step_mass_conservation_100_steps():
    cfg = _cfg_1d(steps=100, T=1.0,
                  potential=PotentialSpec(w_reg=make_scalar("harmonic", scale=0.5)),
                  hartree=True, kernel_eps=0.3)
    prop = Propagator(cfg)
    state = WaveFunction(prop.grid, prop.initial_state())
    m_prev = state.mass
    for k in range(100):
        state = strang_step(state, k * cfg.tau, prop)
        assert abs(state.mass / m_prev - 1.0) <= 2e-11
        m_prev = state.mass


def test_evolve_single_step_equals_manual():
    cfg = _cfg_1d(steps=1)
    prop = Propagator(cfg)
    res = evolve(cfg, prop=prop)
    manual = prop.step_values(prop.initial_state(), 0.0)
    assert np.allclose(res.psi.values, manual, rtol=0, atol=0)
    with pytest.raises(ValueError):
        _cfg_1d(steps=0)


def test_evolve_gaussian_mass_near_invariant_value():
    # integral of (1/pi^2) exp(-(x1+5/2)^2 - (x2-5/2)^2) over the plane = 1/pi
    cfg = SplittingConfig(R=10.0, h=0.2, d=2, T=0.1, steps=5, initial=GAUSS_2D)
    res = evolve(cfg)
    assert res.mass_series[0] == pytest.approx(1 / np.pi, rel=0.01)
    drift = np.max(np.abs(res.mass_series / res.mass_series[0] - 1.0))
    assert drift <= 5 * 1e-11 + 1e-12


def test_evolve_snapshots_and_determinism():
    cfg = _cfg_1d(steps=10, T=1.0)
    r1 = evolve(cfg, snapshot_times=(0.0, 0.5, 1.0))
    r2 = evolve(cfg, snapshot_times=(0.0, 0.5, 1.0))
    assert set(r1.snapshots) == {0.0, 0.5, 1.0}
    for t in r1.snapshots:
        assert np.array_equal(r1.snapshots[t], r2.snapshots[t])
    assert np.array_equal(r1.psi.values, r2.psi.values)
    with pytest.raises(ValueError):
        evolve(cfg, snapshot_times=(1.2,))  # beyond the step grid


def test_linear_mode_matches_dense_oracle():
    cfg = _cfg_1d(T=1.0, steps=200,
                  potential=PotentialSpec(w_reg=make_scalar("gaussian", amplitude=2.0,
                                                            center=(0.0,), width=1.2)))
    prop = Propagator(cfg)
    res = evolve(cfg, prop=prop)
    oracle = DensePropagator(prop.folded_operator())
    exact = oracle.apply(cfg.T, prop.initial_state())
    err = prop.grid.norm(res.psi.values - exact)
    assert err <= 0.02  # tau^2-sized for this setup; O(tau) required


def test_tau_self_convergence_with_hartree():
    errs = []
    taus = [0.1, 0.05, 0.025]
    pot = PotentialSpec(w_reg=make_scalar("gaussian", amplitude=2.0, center=(0.0,), width=1.5))
    for tau in taus:
        n = int(round(1.0 / tau))
        r1 = evolve(_cfg_1d(T=1.0, steps=n, potential=pot, hartree=True, kernel_eps=0.3,
                            cadence=n))
        r2 = evolve(_cfg_1d(T=1.0, steps=2 * n, potential=pot, hartree=True, kernel_eps=0.3,
                            cadence=2 * n))
        errs.append(r1.grid.norm(r1.psi.values - r2.psi.values))
    slope = np.polyfit(np.log(taus), np.log(errs), 1)[0]
    assert slope >= 0.9


def test_potential_perturbation_lipschitz():
    # perturbing the potential by delta * g moves the solution by O(delta),
    # with a stable ratio across two decades of delta
    bump = make_scalar("gaussian", amplitude=1.0, center=(0.3,), width=0.5)
    base = make_scalar("harmonic", scale=0.5)
    ratios = []
    for delta in (1e-2, 1e-3):
        pert = lambda p, d=delta: base(p) + d * bump(p)
        r0 = evolve(_cfg_1d(T=0.5, steps=50, potential=PotentialSpec(w_reg=base), cadence=50))
        r1 = evolve(_cfg_1d(T=0.5, steps=50, potential=PotentialSpec(w_reg=pert), cadence=50))
        ratios.append(r0.grid.norm(r1.psi.values - r0.psi.values) / delta)
    assert ratios[1] == pytest.approx(ratios[0], rel=0.05)


def test_control_frozen_at_midpoint():
    u = ControlFunction.from_knots([(0.0, 0.0), (0.25, 1.0), (0.5, 0.0)])
    vcon = make_scalar("gaussian", amplitude=1.0, center=(0.0,), width=1.0)
    cfg = _cfg_1d(steps=1, potential=PotentialSpec(v_con=vcon), control=u)
    prop = Propagator(cfg)
    psi0 = prop.initial_state()
    out = prop.step_values(psi0, 0.0)
    # reproduce by hand with u frozen at t = tau/2
    minus = prop.half_stepper.step_values(psi0)
    phase = np.exp(-1j * cfg.tau * float(u.values[1]) * prop.V_con)
    manual = prop.half_stepper.step_values(minus * phase)
    assert np.allclose(out, manual, rtol=0, atol=1e-15)


# -- diagnostics --------------------------------------------------------------

def test_diagnostics_zero_state():
    g = build_grid(R=1.0, h=0.25, d=2)
    rec = diagnostics(WaveFunction(g, np.zeros(g.shape, dtype=complex)), g)
    for key in ("mass", "h1", "w1", "w2", "energy", "h1_1", "h2_2"):
        assert rec[key] == 0.0
    assert np.all(rec["centroid"] == 0.0)


def test_diagnostics_single_node_at_origin():
    g = build_grid(R=1.0, h=0.25, d=1)
    values = np.zeros(g.shape, dtype=complex)
    values[g.j_max] = 3.0
    rec = diagnostics(WaveFunction(g, values), g)
    assert rec["mass"] == pytest.approx(g.h * 9.0)
    assert rec["w1"] == 0.0 and rec["w2"] == 0.0
    assert np.allclose(rec["centroid"], 0.0)


def test_diagnostics_magnetic_norm_present_with_operator():
    cfg = _cfg_1d()
    prop = Propagator(cfg)
    psi = WaveFunction(prop.grid, prop.initial_state())
    rec = diagnostics(psi, prop.grid, kinetic=prop.kinetic)
    assert rec["magnetic_h2"] >= psi.norm()


def test_weighted_norm_weights():
    g = build_grid(R=2.0, h=0.5, d=1)
    psi = WaveFunction(g, np.ones(g.shape, dtype=complex))
    hom = weighted_norm(psi, 2, "homogeneous")
    sob = weighted_norm(psi, 2, "sobolev")
    assert sob > hom  # (1+|x|^2) dominates |x|^2
    with pytest.raises(ValueError):
        weighted_norm(psi, 2, "other")


# -- truncation radius --------------------------------------------------------

def test_truncation_radius_formula():
    assert truncation_radius(2.0, 10.0, 0.1) == pytest.approx(10.0)
    assert truncation_radius(1.0, 1.0, 1.0) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        truncation_radius(0.0, 1.0, 1.0)


def test_gaussian_tail_satisfies_certified_bound():
    g = build_grid(R=10.0, h=0.2, d=2)
    psi = WaveFunction(g, g.sample(GAUSS_2D).astype(complex))
    M = weighted_norm(psi, 2, "sobolev")
    for R in (6.0, 8.0):
        assert tail_norm(psi, R) <= M * R ** -2.0


def test_restrict_same_h_smaller_R():
    fine = build_grid(R=4.0, h=0.5, d=1)
    coarse = build_grid(R=2.0, h=0.5, d=1)
    values = np.arange(fine.points_per_axis, dtype=float)
    sub = restrict(values, fine, coarse)
    assert np.allclose(sub, values[fine.j_max - coarse.j_max: fine.j_max + coarse.j_max + 1])


def test_restrict_coarser_h():
    fine = build_grid(R=2.0, h=0.25, d=1)
    coarse = build_grid(R=2.0, h=0.5, d=1)
    sub = restrict(fine.points[..., 0], fine, coarse)
    assert np.allclose(sub, coarse.points[..., 0])
    with pytest.raises(ValueError):
        restrict(fine.points[..., 0], fine, build_grid(R=2.0, h=0.3, d=1))


def test_truncation_error_decreases_with_R():
    # max-over-time L2 gap to an R = 8 reference run shrinks through R grid
    pot = PotentialSpec(w_reg=make_scalar("saddle", scale=1.0))
    init = make_scalar("gaussian", amplitude=1 / np.pi, center=(-1.0, 1.0), width=0.7)

    def run(R):
        cfg = SplittingConfig(R=R, h=0.25, d=2, T=0.5, steps=10, initial=init,
                              potential=pot, magnetic=MagneticPotential.constant(1.0))
        return evolve(cfg, snapshot_times=(0.25, 0.5))

    ref = run(8.0)
    errors = []
    for R in (3.0, 4.0, 5.0):
        res = run(R)
        gap = max(res.grid.norm(res.snapshots[t] - restrict(ref.snapshots[t], ref.grid, res.grid))
                  for t in (0.25, 0.5))
        errors.append(gap)
    assert errors[0] > errors[1] > errors[2]
