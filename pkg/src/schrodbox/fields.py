"""Potentials, vector potentials, smoothed kernels, and control functions.

The static pinning potential splits into a regular part with at most
quadratic growth, a square-integrable (possibly locally singular) part,
and a control potential with quadratic growth that enters bilinearly as
u(t) * v_con.  All scalar parts are realized on the grid through cell
averages, so Coulomb-type singularities stay finite.

Vector potentials are either the constant-field gauge
A(x) = (B0/2) * (-x2, x1, 0), a user-supplied bounded sampled field, or
zero.  Control functions are continuous piecewise-linear interpolants of
strictly increasing knots.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .grid import Grid, cubic_average

# -- analytic catalog -------------------------------------------------------
# Named scalar forms available to configs; each entry maps parameters to a
# vectorized callable on (N, d) point arrays, plus metadata used at
# assembly time (singular cells, analytic quadratic-growth bound).

CATALOG = ("zero", "harmonic", "saddle", "coulomb", "gaussian")


@dataclass(frozen=True)
class ScalarForm:
    """A named analytic scalar field with assembly metadata."""

    name: str
    fn: object                      # (N, d) -> (N,)
    growth_bound: float | None      # sup |f| / (1 + |x|^2), None if unbounded
    singular_at: tuple | None = None

    def __call__(self, pts):
        return self.fn(pts)


def make_scalar(name: str, scale: float = 1.0, amplitude: float = 1.0,
                center=None, width: float = 1.0) -> ScalarForm:
    """Instantiate a catalog form by name.

    zero      -> 0
    harmonic  -> scale * |x - center|^2
    saddle    -> scale * (x1^2 - x2^2)          (d >= 2)
    coulomb   -> scale / |x - center|           (singular cell average)
    gaussian  -> amplitude * exp(-|x - center|^2 / (2 width^2))
    """
    if name == "zero":
        return ScalarForm("zero", lambda p: np.zeros(len(p)), 0.0)
    if name == "harmonic":
        c = np.asarray(center, dtype=float) if center is not None else None

        def f(p, c=c, s=scale):
            q = p - c if c is not None else p
            return s * np.sum(q * q, axis=-1)

        return ScalarForm("harmonic", f, abs(scale) if center is None else None)
    if name == "saddle":
        def f(p, s=scale):
            return s * (p[..., 0] ** 2 - p[..., 1] ** 2)

        return ScalarForm("saddle", f, abs(scale))
    if name == "coulomb":
        c = np.zeros(1) if center is None else np.asarray(center, dtype=float)

        def f(p, s=scale):
            cc = np.broadcast_to(c, p.shape[-1:])
            r = np.sqrt(np.sum((p - cc) ** 2, axis=-1))
            with np.errstate(divide="ignore"):
                return s / r

        return ScalarForm("coulomb", f, None, singular_at=tuple(np.atleast_1d(c)))
    if name == "gaussian":
        c = np.asarray(center, dtype=float) if center is not None else 0.0

        def f(p, a=amplitude, w=width):
            return a * np.exp(-np.sum((p - c) ** 2, axis=-1) / (2.0 * w ** 2))

        return ScalarForm("gaussian", f, abs(amplitude))
    raise ValueError(f"unknown catalog form {name!r}; known: {CATALOG}")


# -- potentials -------------------------------------------------------------

@dataclass
class PotentialSpec:
    """Pinning potential split V = w_reg + w_sing plus the control part v_con.

    `singular_cells`, if set, maps the (N, d) node array to a boolean mask
    of cells whose averages need adaptive quadrature.  When the parts are
    ScalarForm instances the mask is derived from their singular points.
    """

    w_reg: object = None
    w_sing: object = None
    v_con: object = None
    singular_cells: object = None
    # filled in by assemble/sample: observed growth ratios max |f|/(1+|x|^2)
    observed_growth: dict = field(default_factory=dict)

    def _singular_mask(self, grid: Grid):
        if self.singular_cells is not None:
            return self.singular_cells
        points = []
        for part in (self.w_reg, self.w_sing, self.v_con):
            if isinstance(part, ScalarForm) and part.singular_at is not None:
                points.append(np.broadcast_to(np.asarray(part.singular_at, dtype=float),
                                              (grid.d,)))
        if not points:
            return None
        centers = np.stack(points)

        def mask(pts, centers=centers, h=grid.h):
            hits = np.zeros(len(pts), dtype=bool)
            for c in centers:
                hits |= np.max(np.abs(pts - c), axis=-1) <= h / 2.0 + 1e-12
            return hits

        return mask

    def sample_parts(self, grid: Grid):
        """Cell-averaged (w_reg + w_sing, v_con) on the grid, with growth check."""
        mask = self._singular_mask(grid)
        static = np.zeros(grid.shape)
        weight = 1.0 + grid.radius_sq
        for label, part in (("w_reg", self.w_reg), ("w_sing", self.w_sing)):
            if part is None:
                continue
            avg = np.real(cubic_average(part, grid, singular=mask))
            static = static + avg
            self.observed_growth[label] = float(np.max(np.abs(avg) / weight))
        if self.v_con is None:
            vcon = np.zeros(grid.shape)
        else:
            vcon = np.real(cubic_average(self.v_con, grid, singular=mask))
            self.observed_growth["v_con"] = float(np.max(np.abs(vcon) / weight))
        return static, vcon


def assemble_potential(grid: Grid, pspec: PotentialSpec, u_val: float = 0.0) -> np.ndarray:
    """(w_reg)_Q + (w_sing)_Q + u_val * (v_con)_Q as one real field."""
    static, vcon = pspec.sample_parts(grid)
    return static + u_val * vcon


# -- magnetic vector potentials ---------------------------------------------

@dataclass(frozen=True)
class MagneticPotential:
    """Vector potential variants: constant field, bounded sampled, or zero.

    kind="constant" realizes A(x) = (b0/2) * (-x2, x1, 0) (first d
    components), which needs d >= 2.  kind="bounded" carries one callable
    per component plus a declared W^{1,inf} bound that sampling validates.
    """

    kind: str = "zero"
    b0: float = 0.0
    components: tuple = ()
    bound: float = 0.0

    @staticmethod
    def constant(b0: float) -> "MagneticPotential":
        return MagneticPotential(kind="constant", b0=float(b0))

    @staticmethod
    def bounded(components, bound: float) -> "MagneticPotential":
        return MagneticPotential(kind="bounded", components=tuple(components),
                                 bound=float(bound))

    @staticmethod
    def zero() -> "MagneticPotential":
        return MagneticPotential(kind="zero")

    @property
    def is_zero(self) -> bool:
        return self.kind == "zero" or (self.kind == "constant" and self.b0 == 0.0)


def sample_vector_potential(grid: Grid, spec: MagneticPotential) -> list:
    """Node samples [A_1, ..., A_d] of the vector potential."""
    if spec.kind == "zero":
        return [np.zeros(grid.shape) for _ in range(grid.d)]
    if spec.kind == "constant":
        if grid.d < 2:
            raise ValueError("constant-field vector potential needs d >= 2")
        comps = [(-0.5 * spec.b0) * grid.points[..., 1],
                 (0.5 * spec.b0) * grid.points[..., 0]]
        while len(comps) < grid.d:
            comps.append(np.zeros(grid.shape))
        return comps
    if spec.kind == "bounded":
        if len(spec.components) != grid.d:
            raise ValueError(
                f"bounded vector potential has {len(spec.components)} components, grid d={grid.d}"
            )
        comps = [grid.sample(c).astype(float) for c in spec.components]
        worst = max(float(np.max(np.abs(c))) for c in comps)
        if worst > spec.bound * (1.0 + 1e-12):
            raise ValueError(
                f"sampled vector potential exceeds declared bound: {worst} > {spec.bound}"
            )
        return comps
    raise ValueError(f"unknown magnetic potential kind {spec.kind!r}")


# -- smoothed interaction kernel --------------------------------------------

@dataclass(frozen=True)
class SmoothedKernel:
    """Radial kernel f_eps(x) = (|x|^2 + eps^2)^(-1/2), or a smooth override."""

    eps: float
    override: object = None

    def __post_init__(self):
        if self.override is None and not self.eps > 0:
            raise ValueError(f"smoothing length must be positive, got {self.eps}")


def kernel_eval(kernel: SmoothedKernel, displacement) -> np.ndarray:
    """Kernel value at the given displacement(s); last axis is the coordinate."""
    x = np.asarray(displacement, dtype=float)
    if kernel.override is not None:
        return kernel.override(x)
    r2 = np.sum(x * x, axis=-1)
    return 1.0 / np.sqrt(r2 + kernel.eps ** 2)


# -- piecewise-linear controls ----------------------------------------------

@dataclass(frozen=True)
class ControlFunction:
    """Continuous piecewise-linear control from strictly increasing knots."""

    times: tuple
    values: tuple

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if t.ndim != 1 or t.shape != v.shape or len(t) < 2:
            raise ValueError("need matching 1-d knot arrays with at least 2 knots")
        if not np.all(np.diff(t) > 0):
            raise ValueError("knot times must be strictly increasing")
        if t[0] != 0.0:
            raise ValueError("first knot must sit at t = 0")
        object.__setattr__(self, "times", tuple(float(x) for x in t))
        object.__setattr__(self, "values", tuple(float(x) for x in v))

    @staticmethod
    def zero(T: float) -> "ControlFunction":
        return ControlFunction((0.0, float(T)), (0.0, 0.0))

    @staticmethod
    def from_knots(pairs) -> "ControlFunction":
        ts, vs = zip(*pairs)
        return ControlFunction(tuple(ts), tuple(vs))

    @staticmethod
    def from_sine_modes(coeffs, T: float, knots_per_period: int = 32) -> "ControlFunction":
        """Piecewise-linear sampling of sum_k a_k sin(k pi t / T)."""
        coeffs = np.asarray(coeffs, dtype=float)
        n = max(2, knots_per_period * max(1, len(coeffs)))
        t = np.linspace(0.0, T, n + 1)
        u = np.zeros_like(t)
        for k, a in enumerate(coeffs, start=1):
            u += a * np.sin(k * np.pi * t / T)
        u[0] = 0.0
        u[-1] = 0.0
        return ControlFunction(tuple(t), tuple(u))

    @property
    def T(self) -> float:
        return self.times[-1]

    @property
    def slopes(self) -> np.ndarray:
        t = np.asarray(self.times)
        v = np.asarray(self.values)
        return np.diff(v) / np.diff(t)

    def vanishes_at_ends(self, tol: float = 0.0) -> bool:
        return abs(self.values[0]) <= tol and abs(self.values[-1]) <= tol


def control_eval(u: ControlFunction, t) -> np.ndarray:
    """Piecewise-linear interpolant value(s); t must lie in [0, T]."""
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < -1e-12) or np.any(t_arr > u.T * (1 + 1e-12) + 1e-12):
        raise ValueError(f"time outside [0, {u.T}]")
    out = np.interp(np.clip(t_arr, 0.0, u.T), u.times, u.values)
    return out if t_arr.shape else float(out)


def control_h10_sq(u: ControlFunction) -> float:
    """Exact integral of u'(t)^2 from the piecewise-constant slopes."""
    dt = np.diff(np.asarray(u.times))
    return float(np.sum(u.slopes ** 2 * dt))


def _merged_knots(u: ControlFunction, v: ControlFunction) -> np.ndarray:
    if abs(u.T - v.T) > 1e-12 * max(u.T, v.T):
        raise ValueError("controls live on different intervals")
    return np.unique(np.concatenate([u.times, v.times]))


def control_h10_inner(u: ControlFunction, v: ControlFunction) -> float:
    """Exact integral of u'(t) v'(t) over the merged knot partition."""
    knots = _merged_knots(u, v)
    mids = 0.5 * (knots[:-1] + knots[1:])
    # Slopes are piecewise constant; interval lookup at midpoints is exact.
    du = u.slopes[np.searchsorted(u.times, mids) - 1]
    dv = v.slopes[np.searchsorted(v.times, mids) - 1]
    return float(np.sum(du * dv * np.diff(knots)))


def control_add(u: ControlFunction, v: ControlFunction, scale: float = 1.0) -> ControlFunction:
    """The piecewise-linear control u + scale * v on the merged knots."""
    knots = _merged_knots(u, v)
    vals = control_eval(u, knots) + scale * control_eval(v, knots)
    return ControlFunction(tuple(knots), tuple(np.asarray(vals)))


def control_second_differences(u: ControlFunction) -> tuple:
    """3-point second differences of the knot values at interior knots.

    Returns (interior_times, d2_values).  Needs at least 3 knots.
    """
    if len(u.times) < 3:
        raise ValueError("second differences need at least 3 knots")
    t = np.asarray(u.times)
    v = np.asarray(u.values)
    dt0 = t[1:-1] - t[:-2]
    dt1 = t[2:] - t[1:-1]
    d2 = 2.0 * ((v[2:] - v[1:-1]) / dt1 - (v[1:-1] - v[:-2]) / dt0) / (dt0 + dt1)
    return t[1:-1], d2
