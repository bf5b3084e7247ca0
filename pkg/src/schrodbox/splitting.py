"""Strang splitting time loop, diagnostics, and the truncation-radius rule.

One step from t_k to t_k + tau is

    psi^-   = C(tau/2) psi_k              (Cayley half-step, kinetic only)
    psi^+   = exp(-i tau Vtot) psi^-      (pointwise unimodular phase)
    psi_k+1 = C(tau/2) psi^+

where C is the Crank-Nicolson propagator of the kinetic operator
(-i grad_h - A)^2 alone and the phase carries everything else: the static
cell-averaged potential, the control term u(t_k + tau/2) * v_con frozen at
the step midpoint, and (when enabled) the mean-field term f_eps * |psi^-|^2
evaluated at the half-advanced state.  Because |psi^+| = |psi^-| pointwise,
the mean-field potential is constant along the phase sub-flow, so the
pointwise exponential is that sub-flow's exact solution.

The initial state always enters through its cell averages.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .grid import Grid, WaveFunction, build_grid, cubic_average, sym_diff
from .fields import (ControlFunction, MagneticPotential, PotentialSpec,
                     SmoothedKernel, control_eval, sample_vector_potential)
from .hartree import ConvolutionPlan, hartree_potential
from .linalg import CayleyStepper, SparseHermitianOperator, assemble_hamiltonian


@dataclass
class SplittingConfig:
    """Everything needed to run one evolution on the truncated cube."""

    R: float
    h: float
    d: int
    T: float
    steps: int
    initial: object
    potential: PotentialSpec = field(default_factory=PotentialSpec)
    magnetic: MagneticPotential = field(default_factory=MagneticPotential.zero)
    hartree: bool = False
    kernel_eps: float | None = None     # None -> eps = h (resolution-tied default)
    control: ControlFunction | None = None
    cadence: int = 1
    stencil: str = "paper"
    energy_lambda: float = 1.0
    solver_tol: float = 1e-10
    solve_strategy: str | None = None
    initial_singular: object = None

    def __post_init__(self):
        if self.steps < 1:
            raise ValueError("need at least one time step")
        if self.T <= 0:
            raise ValueError("final time must be positive")
        if self.cadence < 1:
            raise ValueError("diagnostic cadence must be >= 1")

    @property
    def tau(self) -> float:
        return self.T / self.steps

    @property
    def eps(self) -> float:
        return self.h if self.kernel_eps is None else float(self.kernel_eps)


@dataclass
class EvolveResult:
    """Final state plus recorded diagnostics of one evolution."""

    grid: Grid
    psi: WaveFunction
    times: np.ndarray
    series: dict
    snapshots: dict
    mid_states: list | None = None
    step_states: list | None = None

    @property
    def mass_series(self) -> np.ndarray:
        return self.series["mass"]


class Propagator:
    """Assembled machinery (grid, operators, sampled fields) for one config."""

    def __init__(self, cfg: SplittingConfig):
        self.cfg = cfg
        self.grid = build_grid(cfg.R, cfg.h, cfg.d)
        self.A = None if cfg.magnetic.is_zero else sample_vector_potential(self.grid, cfg.magnetic)
        self.V_static, self.V_con = cfg.potential.sample_parts(self.grid)
        self.kinetic = assemble_hamiltonian(self.grid, A=self.A, V=None, stencil=cfg.stencil)
        self.half_stepper = CayleyStepper(self.kinetic, cfg.tau / 2.0,
                                          strategy=cfg.solve_strategy, tol=cfg.solver_tol)
        self.plan = (ConvolutionPlan(self.grid, SmoothedKernel(cfg.eps))
                     if cfg.hartree else None)

    def initial_state(self) -> np.ndarray:
        psi0 = cubic_average(self.cfg.initial, self.grid,
                             singular=self.cfg.initial_singular)
        return np.ascontiguousarray(psi0, dtype=complex)

    def control_value(self, t: float) -> float:
        if self.cfg.control is None:
            return 0.0
        return float(control_eval(self.cfg.control, min(max(t, 0.0), self.cfg.control.T)))

    def phase_potential(self, half_state: np.ndarray, t_mid: float) -> np.ndarray:
        """Vtot = V_Q + u(t_mid) (v_con)_Q + f_eps * |half_state|^2."""
        V = self.V_static
        u = self.control_value(t_mid)
        if u != 0.0:
            V = V + u * self.V_con
        if self.plan is not None:
            V = V + np.maximum(self.plan.convolve_density(np.abs(half_state) ** 2), 0.0)
        return V

    def step_values(self, values: np.ndarray, t_k: float, keep_mid: bool = False):
        tau = self.cfg.tau
        minus = self.half_stepper.step_values(values)
        V = self.phase_potential(minus, t_k + tau / 2.0)
        plus = minus * np.exp(-1j * tau * V)
        out = self.half_stepper.step_values(plus)
        if keep_mid:
            return out, plus
        return out

    def folded_operator(self) -> SparseHermitianOperator:
        """Kinetic + static potential as one operator (linear, control-free).

        Useful as the generator of the exact reference dynamics when the
        mean-field term is off and no control acts.
        """
        return assemble_hamiltonian(self.grid, A=self.A, V=self.V_static,
                                    stencil=self.cfg.stencil)


def potential_phase(psi: WaveFunction, total_potential: np.ndarray, tau: float) -> WaveFunction:
    """Pointwise unimodular phase psi -> psi * exp(-i tau V)."""
    if total_potential.shape != psi.values.shape:
        raise ValueError("potential and state shapes differ")
    return WaveFunction(psi.grid, psi.values * np.exp(-1j * tau * total_potential))


def strang_step(state: WaveFunction, t_k: float, prop: Propagator) -> WaveFunction:
    """One full splitting step from t_k using the assembled propagator."""
    return WaveFunction(state.grid, prop.step_values(state.values, t_k))


def evolve(cfg: SplittingConfig, snapshot_times=(), store_mid: bool = False,
           store_steps: bool = False, prop: Propagator | None = None) -> EvolveResult:
    """Run all steps from the cell-averaged initial state, with diagnostics.

    Diagnostics are recorded at step indices divisible by the cadence and
    always at the final step.  Snapshots are taken at the step times
    nearest the requested times.
    """
    if prop is None:
        prop = Propagator(cfg)
    grid = prop.grid
    tau = cfg.tau
    n_steps = cfg.steps

    snap_steps = {}
    for t_req in snapshot_times:
        k = int(round(t_req / tau))
        if not 0 <= k <= n_steps or abs(k * tau - t_req) > tau / 2 + 1e-9:
            raise ValueError(f"snapshot time {t_req} not on the step grid [0, {cfg.T}]")
        snap_steps.setdefault(k, t_req)

    psi = prop.initial_state()
    records = []
    snapshots = {}
    mid_states = [] if store_mid else None
    step_states = [psi.copy()] if store_steps else None

    def record(k, values):
        rec = diagnostics(WaveFunction(grid, values), grid, plan=prop.plan,
                          energy_lambda=cfg.energy_lambda)
        records.append((k * tau, rec))

    if 0 in snap_steps:
        snapshots[snap_steps[0]] = psi.copy()
    record(0, psi)
    for k in range(n_steps):
        try:
            if store_mid:
                psi, mid = prop.step_values(psi, k * tau, keep_mid=True)
                mid_states.append(mid)
            else:
                psi = prop.step_values(psi, k * tau)
        except Exception as exc:
            exc.args = (f"aborted at step {k + 1}/{n_steps}: {exc}",)
            raise
        if store_steps:
            step_states.append(psi.copy())
        if (k + 1) in snap_steps:
            snapshots[snap_steps[k + 1]] = psi.copy()
        if (k + 1) % cfg.cadence == 0 or k + 1 == n_steps:
            record(k + 1, psi)

    times = np.array([t for t, _ in records])
    series = {key: np.array([rec[key] for _, rec in records])
              for key in records[0][1]}
    return EvolveResult(grid=grid, psi=WaveFunction(grid, psi), times=times,
                        series=series, snapshots=snapshots,
                        mid_states=mid_states, step_states=step_states)


# -- diagnostics -------------------------------------------------------------

def weighted_norm(psi: WaveFunction, n: float, weight: str = "homogeneous") -> float:
    """|| w(x) psi ||_2 with w = |x|^n or the Sobolev weight (1+|x|^2)^(n/2)."""
    grid = psi.grid
    if weight == "homogeneous":
        w = grid.radius_sq ** (n / 2.0)
    elif weight == "sobolev":
        w = (1.0 + grid.radius_sq) ** (n / 2.0)
    else:
        raise ValueError(f"unknown weight {weight!r}")
    return grid.norm(w * psi.values)


def hk_seminorms(psi: WaveFunction, k: int) -> float:
    """Squared discrete Sobolev seminorm sum over derivative orders 1..k."""
    grid = psi.grid
    total = 0.0
    firsts = [sym_diff(grid, psi.values, ax) for ax in range(grid.d)]
    total += sum(grid.norm(g) ** 2 for g in firsts)
    if k >= 2:
        for g in firsts:
            for ax in range(grid.d):
                total += grid.norm(sym_diff(grid, g, ax)) ** 2
    if k > 2:
        raise ValueError("only k <= 2 supported")
    return total


def hkn_norm(psi: WaveFunction, k: int, n: float, weight: str = "homogeneous") -> float:
    """Combined norm sqrt(||psi||_{H^k}^2 + || |x|^n psi ||_2^2)."""
    grid = psi.grid
    base = grid.norm(psi.values) ** 2 + hk_seminorms(psi, k)
    return math.sqrt(base + weighted_norm(psi, n, weight) ** 2)


def diagnostics(psi: WaveFunction, grid: Grid, plan: ConvolutionPlan | None = None,
                kinetic: SparseHermitianOperator | None = None,
                energy_lambda: float = 1.0) -> dict:
    """Mass, discrete H^1 norm, weighted norms, energy, and centroid.

    The energy is h^d sum(|grad_h psi|^2 + lambda (1+|x|^2)|psi|^2
    + (1/2)(f_eps * |psi|^2)|psi|^2), the mean-field term appearing only
    when a convolution plan is supplied.  When the kinetic operator is
    supplied the record also carries the magnetic Sobolev norm
    ||psi||_2 + ||H psi||_2.
    """
    vol = grid.h ** grid.d
    density = np.abs(psi.values) ** 2
    mass = vol * float(np.sum(density))
    grad_sq = np.zeros(grid.shape)
    for ax in range(grid.d):
        grad_sq += np.abs(sym_diff(grid, psi.values, ax)) ** 2
    h1 = math.sqrt(mass + vol * float(np.sum(grad_sq)))
    energy_density = grad_sq + energy_lambda * (1.0 + grid.radius_sq) * density
    if plan is not None:
        energy_density = energy_density + 0.5 * np.maximum(
            plan.convolve_density(density), 0.0) * density
    rec = {
        "mass": mass,
        "h1": h1,
        "w1": weighted_norm(psi, 1),
        "w2": weighted_norm(psi, 2),
        "energy": vol * float(np.sum(energy_density)),
        "h1_1": hkn_norm(psi, 1, 1),
        "h2_2": hkn_norm(psi, 2, 2),
    }
    if mass > 0.0:
        centroid = vol * np.array(
            [float(np.sum(grid.points[..., ax] * density)) for ax in range(grid.d)]
        ) / mass
    else:
        centroid = np.zeros(grid.d)
    rec["centroid"] = centroid
    if kinetic is not None:
        rec["magnetic_h2"] = grid.norm(psi.values) + grid.norm(kinetic.apply(psi.values))
    return rec


def truncation_radius(eta: float, M: float, tol: float) -> float:
    """Smallest radius the tail bound ||psi 1_{|x|>=R}|| <= M R^-eta certifies."""
    if not (eta > 0 and M > 0 and tol > 0):
        raise ValueError("need eta > 0, M > 0, tol > 0")
    return (M / tol) ** (1.0 / eta)


def tail_norm(psi: WaveFunction, radius: float) -> float:
    """Discrete L2 norm of psi restricted to |x| >= radius."""
    grid = psi.grid
    mask = grid.radius_sq >= radius ** 2
    return grid.norm(np.where(mask, psi.values, 0.0))


# -- grid restriction (shared node comparison for sweeps) --------------------

def restrict(values: np.ndarray, fine: Grid, coarse: Grid) -> np.ndarray:
    """Values of a fine-grid field at the coarse grid's nodes.

    Works when the coarse lattice is a sublattice of the fine one: same R
    with h_coarse = m h_fine, or same h with smaller R (or both).
    """
    ratio = coarse.h / fine.h
    m = int(round(ratio))
    if abs(ratio - m) > 1e-9 or m < 1:
        raise ValueError(f"coarse spacing {coarse.h} is not a multiple of fine {fine.h}")
    if coarse.j_max * m > fine.j_max:
        raise ValueError("coarse grid extends beyond the fine grid")
    lo = fine.j_max - m * coarse.j_max
    hi = fine.j_max + m * coarse.j_max + 1
    sl = tuple(slice(lo, hi, m) for _ in range(fine.d))
    return values[sl]
