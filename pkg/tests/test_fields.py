"""Potential assembly, vector potentials, kernels, and control calculus."""

import numpy as np
import pytest

from schrodbox.fields import (ControlFunction, MagneticPotential, PotentialSpec,
                              SmoothedKernel, assemble_potential, control_add,
                              control_eval, control_h10_inner, control_h10_sq,
                              control_second_differences, kernel_eval,
                              make_scalar, sample_vector_potential)
from schrodbox.grid import build_grid


# -- vector potentials --------------------------------------------------------

def test_constant_field_formula():
    g = build_grid(R=2.0, h=0.5, d=2)
    A = sample_vector_potential(g, MagneticPotential.constant(1.0))
    i = g.j_max + 2  # node (1.0, 1.0)
    assert A[0][i, i] == pytest.approx(-0.5)
    assert A[1][i, i] == pytest.approx(0.5)


def test_zero_field_variants():
    g = build_grid(R=2.0, h=0.5, d=2)
    for spec in (MagneticPotential.zero(), MagneticPotential.constant(0.0)):
        assert spec.is_zero
    A = sample_vector_potential(g, MagneticPotential.zero())
    assert all(np.all(a == 0.0) for a in A)


def test_constant_field_needs_two_dimensions():
    g = build_grid(R=2.0, h=0.5, d=1)
    with pytest.raises(ValueError):
        sample_vector_potential(g, MagneticPotential.constant(1.0))


def test_bounded_sampled_tanh():
    c = 0.75
    g = build_grid(R=2.0, h=0.25, d=2)
    spec = MagneticPotential.bounded(
        (lambda p: c * np.tanh(p[..., 1]), lambda p: c * np.tanh(p[..., 0])), bound=c)
    A = sample_vector_potential(g, spec)
    assert spec.bound == pytest.approx(c)
    assert np.allclose(A[0], c * np.tanh(g.points[..., 1]), rtol=1e-14)
    assert max(np.max(np.abs(a)) for a in A) <= spec.bound


def test_bounded_sampled_rejects_bound_violation():
    g = build_grid(R=2.0, h=0.5, d=1)
    spec = MagneticPotential.bounded((lambda p: 2.0 * np.ones(p.shape[:-1]),), bound=1.0)
    with pytest.raises(ValueError):
        sample_vector_potential(g, spec)


# -- potential assembly -------------------------------------------------------

def test_assemble_harmonic_cell_average():
    g = build_grid(R=2.0, h=0.4, d=1)
    spec = PotentialSpec(w_reg=make_scalar("harmonic"))
    field = assemble_potential(g, spec)
    assert np.allclose(field, g.axis_coords ** 2 + g.h ** 2 / 12.0, rtol=1e-13)


def test_assemble_all_zero():
    g = build_grid(R=2.0, h=0.5, d=2)
    assert np.all(assemble_potential(g, PotentialSpec()) == 0.0)


def test_assemble_coulomb_finite_at_origin():
    g = build_grid(R=0.9, h=0.2, d=3)
    spec = PotentialSpec(w_sing=make_scalar("coulomb"))
    field = assemble_potential(g, spec)
    assert np.all(np.isfinite(field))
    center = (g.j_max,) * 3
    # the origin cell average beats the neighbouring node values
    assert field[center] > field[(g.j_max, g.j_max, g.j_max + 1)]


def test_assemble_affine_in_control_value():
    g = build_grid(R=2.0, h=0.4, d=1)
    spec = PotentialSpec(w_reg=make_scalar("harmonic"),
                         v_con=make_scalar("gaussian", amplitude=1.3, width=0.8))
    f1 = assemble_potential(g, spec, u_val=0.7)
    f2 = assemble_potential(g, spec, u_val=-0.4)
    vcon = assemble_potential(g, PotentialSpec(v_con=spec.v_con), u_val=1.0)
    assert np.allclose(f1 - f2, (0.7 + 0.4) * vcon, rtol=1e-12, atol=1e-14)


def test_growth_ratio_recorded_and_bounded():
    g = build_grid(R=6.0, h=0.5, d=2)
    spec = PotentialSpec(w_reg=make_scalar("saddle", scale=2.0),
                         v_con=make_scalar("harmonic", scale=0.5))
    spec.sample_parts(g)
    # |x1^2 - x2^2| <= |x|^2, so the ratio stays under the analytic bound
    assert spec.observed_growth["w_reg"] <= 2.0 * 1.1
    assert spec.observed_growth["v_con"] <= 0.5 * 1.1


# -- smoothed kernel ----------------------------------------------------------

def test_kernel_eval_examples():
    k = SmoothedKernel(0.1)
    assert kernel_eval(k, np.zeros(3)) == pytest.approx(10.0)
    assert kernel_eval(k, np.array([1.0, 0.0, 0.0])) == pytest.approx(1.01 ** -0.5)


def test_kernel_bounded_by_min():
    k = SmoothedKernel(0.25)
    rng = np.random.default_rng(0)
    x = rng.standard_normal((100, 3))
    vals = kernel_eval(k, x)
    r = np.linalg.norm(x, axis=-1)
    assert np.all(vals > 0)
    assert np.all(vals <= np.minimum(1.0 / k.eps, 1.0 / r) + 1e-15)


def test_kernel_requires_positive_eps():
    with pytest.raises(ValueError):
        SmoothedKernel(0.0)


# -- control functions --------------------------------------------------------

def test_control_zero_energy():
    u = ControlFunction.zero(2.0)
    assert control_h10_sq(u) == 0.0


def test_hat_control_energy():
    u = ControlFunction.from_knots([(0, 0), (1, 1), (2, 0)])
    assert control_h10_sq(u) == pytest.approx(2.0)
    assert control_eval(u, 0.5) == pytest.approx(0.5)
    assert control_eval(u, 1.0) == pytest.approx(1.0)


def test_control_eval_range_error():
    u = ControlFunction.from_knots([(0, 0), (1, 1), (2, 0)])
    with pytest.raises(ValueError):
        control_eval(u, -0.5)
    with pytest.raises(ValueError):
        control_eval(u, 2.5)


def test_control_energy_matches_midpoint_quadrature():
    # composite midpoint rule refined within each knot interval is exact
    # for the piecewise-constant integrand u'(t)^2
    rng = np.random.default_rng(5)
    for _ in range(5):
        t = np.concatenate([[0.0], np.sort(rng.uniform(0.1, 1.9, 6)), [2.0]])
        v = np.concatenate([[0.0], rng.standard_normal(6), [0.0]])
        u = ControlFunction(tuple(t), tuple(v))
        quad = 0.0
        for a, b in zip(t[:-1], t[1:]):
            sub = np.linspace(a, b, 8)
            mids = 0.5 * (sub[:-1] + sub[1:])
            slopes = u.slopes[np.searchsorted(u.times, mids) - 1]
            quad += np.sum(slopes ** 2) * (sub[1] - sub[0])
        assert control_h10_sq(u) == pytest.approx(quad, rel=1e-12)


def test_control_energy_invariant_under_knot_insertion():
    u = ControlFunction.from_knots([(0, 0), (0.75, 1.5), (2, 0)])
    refined = ControlFunction.from_knots(
        [(0, 0), (0.375, 0.75), (0.75, 1.5), (1.0, 1.2), (2, 0)])
    # the refined knots interpolate the same polyline
    assert control_h10_sq(refined) == pytest.approx(control_h10_sq(u), rel=1e-14)


def test_control_monotone_knots_required():
    with pytest.raises(ValueError):
        ControlFunction((0.0, 1.0, 1.0), (0.0, 1.0, 0.0))
    with pytest.raises(ValueError):
        ControlFunction((0.5, 1.0), (0.0, 0.0))


def test_control_add_and_inner():
    u = ControlFunction.from_knots([(0, 0), (1, 1), (2, 0)])
    v = ControlFunction.from_knots([(0, 0), (0.5, -1), (2, 0)])
    w = control_add(u, v, scale=2.0)
    for t in (0.0, 0.3, 0.5, 1.0, 1.7, 2.0):
        assert control_eval(w, t) == pytest.approx(control_eval(u, t) + 2 * control_eval(v, t))
    # polarization: int (u+v)'^2 = int u'^2 + 2 int u'v' + int v'^2
    lhs = control_h10_sq(control_add(u, v))
    rhs = control_h10_sq(u) + 2 * control_h10_inner(u, v) + control_h10_sq(v)
    assert lhs == pytest.approx(rhs, rel=1e-13)


def test_control_second_differences():
    u = ControlFunction.from_knots([(0, 0), (1, 1), (2, 0)])
    t_int, d2 = control_second_differences(u)
    assert np.allclose(t_int, [1.0])
    assert d2[0] == pytest.approx(-2.0)
    with pytest.raises(ValueError):
        control_second_differences(ControlFunction.zero(1.0))


def test_sine_mode_builder_vanishes_at_ends():
    u = ControlFunction.from_sine_modes([0.5, -0.25], T=2.0)
    assert u.values[0] == 0.0 and u.values[-1] == 0.0
    assert control_eval(u, 1.0) == pytest.approx(0.5 * np.sin(np.pi / 2)
                                                 + -0.25 * np.sin(np.pi), abs=1e-6)
